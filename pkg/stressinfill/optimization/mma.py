"""Method of Moving Asymptotes update for box-bounded designs in ``[0, 1]``.

The artificial variable ``z`` of the general formulation is dropped
(``a0 = 1`` and ``a_i = 0`` make it vanish), so the dual only carries the
``m`` constraint multipliers. With ``m <= 2`` it is solved by a damped,
projected Newton iteration with cyclic bisection as fallback.
"""

from dataclasses import dataclass, field

import numpy as np
from loguru import logger

from stressinfill.models.error import DualSubproblemError, MmaInputError
from stressinfill.models.optimization import MmaSettings

ALBEFA = 0.1
MOVE = 0.5
RAA0 = 1.0e-5
_BISECTIONS = 200


@dataclass
class MmaWorkspace:
    n: int
    m: int
    move_limit: float = 0.01
    settings: MmaSettings = field(default_factory=MmaSettings)
    x_min: float = 0.0
    x_max: float = 1.0
    low: np.ndarray | None = None
    upp: np.ndarray | None = None
    xold1: np.ndarray | None = None
    xold2: np.ndarray | None = None
    multipliers: np.ndarray | None = None
    calls: int = 0


@dataclass
class _Subproblem:
    low: np.ndarray
    upp: np.ndarray
    alfa: np.ndarray
    beta: np.ndarray
    p0: np.ndarray
    q0: np.ndarray
    P: np.ndarray
    Q: np.ndarray
    b: np.ndarray
    c: np.ndarray
    d: np.ndarray

    def primal(self, lam: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        P_total = self.p0 + lam @ self.P
        Q_total = self.q0 + lam @ self.Q
        root_p, root_q = np.sqrt(P_total), np.sqrt(Q_total)
        x = (self.low * root_p + self.upp * root_q) / (root_p + root_q)
        return np.clip(x, self.alfa, self.beta), P_total, Q_total

    def slack(self, lam: np.ndarray) -> np.ndarray:
        return np.maximum(0.0, (lam - self.c) / self.d)

    def dual_value(self, lam: np.ndarray) -> float:
        x, P_total, Q_total = self.primal(lam)
        y = self.slack(lam)
        approximation = np.sum(P_total / (self.upp - x) + Q_total / (x - self.low))
        return float(approximation + np.sum(self.c * y + 0.5 * self.d * y**2 - lam * y) - lam @ self.b)

    def dual_gradient(self, lam: np.ndarray) -> np.ndarray:
        x, _, _ = self.primal(lam)
        return self.P @ (1.0 / (self.upp - x)) + self.Q @ (1.0 / (x - self.low)) - self.slack(lam) - self.b

    def dual_hessian(self, lam: np.ndarray) -> np.ndarray:
        x, P_total, Q_total = self.primal(lam)
        ux, xl = self.upp - x, x - self.low
        interior = (x > self.alfa) & (x < self.beta)
        slopes = self.P[:, interior] / ux[interior] ** 2 - self.Q[:, interior] / xl[interior] ** 2
        curvature = 2.0 * P_total[interior] / ux[interior] ** 3 + 2.0 * Q_total[interior] / xl[interior] ** 3
        hessian = -(slopes / curvature) @ slopes.T
        hessian -= np.diag((lam > self.c) / self.d)
        return hessian


def _kkt_norm(lam: np.ndarray, gradient: np.ndarray) -> float:
    residual = np.where(lam > 0.0, gradient, np.maximum(gradient, 0.0))
    return float(np.abs(residual).max()) if residual.size else 0.0


def _bisection_sweep(sub: _Subproblem, lam: np.ndarray) -> np.ndarray:
    lam = lam.copy()
    for i in range(lam.size):
        def gradient_at(value: float) -> float:
            trial = lam.copy()
            trial[i] = value
            return float(sub.dual_gradient(trial)[i])

        if gradient_at(0.0) <= 0.0:
            lam[i] = 0.0
            continue
        low, high = 0.0, max(1.0, 2.0 * lam[i])
        while gradient_at(high) > 0.0 and high < 1.0e15:
            low, high = high, 2.0 * high
        for _ in range(_BISECTIONS):
            middle = 0.5 * (low + high)
            if middle in (low, high):
                break
            if gradient_at(middle) > 0.0:
                low = middle
            else:
                high = middle
        lam[i] = 0.5 * (low + high)
    return lam


def _newton_step(sub: _Subproblem, lam: np.ndarray, gradient: np.ndarray) -> np.ndarray | None:
    free = (lam > 0.0) | (gradient > 0.0)
    if not free.any():
        return None
    hessian = sub.dual_hessian(lam)[np.ix_(free, free)]
    try:
        step = np.linalg.solve(hessian, -gradient[free])
    except np.linalg.LinAlgError:
        return None
    if not np.all(np.isfinite(step)) or step @ gradient[free] <= 0.0:
        return None
    direction = np.zeros_like(lam)
    direction[free] = step
    value = sub.dual_value(lam)
    t = 1.0
    while t > 1.0e-10:
        trial = np.maximum(lam + t * direction, 0.0)
        if sub.dual_value(trial) > value:
            return trial
        t *= 0.5
    return None


def _solve_dual(sub: _Subproblem, lam: np.ndarray, settings: MmaSettings) -> np.ndarray:
    gradient = sub.dual_gradient(lam)
    kkt = _kkt_norm(lam, gradient)
    for _ in range(settings.max_dual_steps):
        if kkt <= settings.kkt_tolerance:
            return lam
        candidate = _newton_step(sub, lam, gradient)
        if candidate is None or _kkt_norm(candidate, sub.dual_gradient(candidate)) >= kkt:
            candidate = _bisection_sweep(sub, lam if candidate is None else candidate)
        lam = candidate
        gradient = sub.dual_gradient(lam)
        kkt = _kkt_norm(lam, gradient)
    if kkt <= settings.kkt_tolerance:
        return lam
    raise DualSubproblemError(steps=settings.max_dual_steps, kkt_norm=kkt)


def _check_inputs(x, f0_grad, values, grads, ws: MmaWorkspace) -> None:
    if x.shape != (ws.n,) or f0_grad.shape != (ws.n,):
        raise MmaInputError(detail=f"expected {ws.n} design variables")
    if values.shape != (ws.m,) or grads.shape != (ws.m, ws.n):
        raise MmaInputError(detail=f"expected {ws.m} constraints over {ws.n} variables")
    checked = (
        ("x", x),
        ("objective gradient", f0_grad),
        ("constraints", values),
        ("constraint gradients", grads),
    )
    for name, array in checked:
        if not np.all(np.isfinite(array)):
            raise MmaInputError(detail=f"{name} contain non-finite entries")


def _asymptotes(x: np.ndarray, ws: MmaWorkspace) -> tuple[np.ndarray, np.ndarray]:
    span = ws.x_max - ws.x_min
    settings = ws.settings
    if ws.xold2 is None or ws.low is None or ws.upp is None:
        return x - settings.asy_init * span, x + settings.asy_init * span
    oscillation = (x - ws.xold1) * (ws.xold1 - ws.xold2)
    factor = np.ones_like(x)
    factor[oscillation > 0.0] = settings.asy_incr
    factor[oscillation < 0.0] = settings.asy_decr
    low = x - factor * (ws.xold1 - ws.low)
    upp = x + factor * (ws.upp - ws.xold1)
    low = np.clip(low, x - 10.0 * span, x - 0.01 * span)
    upp = np.clip(upp, x + 0.01 * span, x + 10.0 * span)
    return low, upp


def mma_update(
    x: np.ndarray,
    f0_grad: np.ndarray,
    constraint_values: np.ndarray,
    constraint_grads: np.ndarray,
    ws: MmaWorkspace,
) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    f0_grad = np.asarray(f0_grad, dtype=float)
    values = np.atleast_1d(np.asarray(constraint_values, dtype=float))
    grads = np.atleast_2d(np.asarray(constraint_grads, dtype=float))
    _check_inputs(x, f0_grad, values, grads, ws)

    span = ws.x_max - ws.x_min
    low, upp = _asymptotes(x, ws)
    alfa = np.maximum.reduce(
        [low + ALBEFA * (x - low), x - MOVE * span, np.full_like(x, ws.x_min), x - ws.move_limit]
    )
    beta = np.minimum.reduce(
        [upp - ALBEFA * (upp - x), x + MOVE * span, np.full_like(x, ws.x_max), x + ws.move_limit]
    )

    ux, xl = upp - x, x - low
    regularisation = RAA0 / max(span, 1.0e-5)
    p0 = np.maximum(f0_grad, 0.0)
    q0 = np.maximum(-f0_grad, 0.0)
    pq0 = 0.001 * (p0 + q0) + regularisation
    p0 = (p0 + pq0) * ux**2
    q0 = (q0 + pq0) * xl**2
    P = np.maximum(grads, 0.0)
    Q = np.maximum(-grads, 0.0)
    PQ = 0.001 * (P + Q) + regularisation
    P = (P + PQ) * ux**2
    Q = (Q + PQ) * xl**2
    b = P @ (1.0 / ux) + Q @ (1.0 / xl) - values

    sub = _Subproblem(
        low=low, upp=upp, alfa=alfa, beta=beta, p0=p0, q0=q0, P=P, Q=Q, b=b,
        c=np.full(ws.m, ws.settings.c), d=np.full(ws.m, ws.settings.d),
    )
    start = np.zeros(ws.m) if ws.multipliers is None else np.maximum(ws.multipliers, 0.0)
    lam = _solve_dual(sub, start, ws.settings)
    x_new, _, _ = sub.primal(lam)

    ws.xold2, ws.xold1 = ws.xold1, x.copy()
    ws.low, ws.upp = low, upp
    ws.multipliers = lam
    ws.calls += 1
    logger.debug(f"MMA call {ws.calls}: multipliers {np.round(lam, 6).tolist()}")
    return x_new
