"""Local and global volume constraints and their density sensitivities.

The p-mean is evaluated relative to the largest ratio ``rho_bar / alpha`` so
that ``p = 16`` (or larger) never overflows.
"""

import numpy as np

from stressinfill.domain import NeighborhoodTable


def local_volume(rho: np.ndarray, nb: NeighborhoodTable) -> np.ndarray:
    # FFT correlation leaves round-off of either sign around void regions.
    return np.maximum(nb.average(rho), 0.0)


def _normalised_ratios(rho_bar: np.ndarray, alpha: np.ndarray) -> tuple[np.ndarray, float]:
    ratios = np.maximum(np.asarray(rho_bar, dtype=float), 0.0) / np.asarray(alpha)
    return ratios, float(ratios.max())


def aggregate_constraint(rho_bar: np.ndarray, alpha: np.ndarray, p: float) -> float:
    ratios, peak = _normalised_ratios(rho_bar, alpha)
    if peak <= 0.0:
        return -1.0
    return peak * float(np.mean((ratios / peak) ** p)) ** (1.0 / p) - 1.0


def constraint_sensitivity(
    rho_bar: np.ndarray, alpha: np.ndarray, p: float, nb: NeighborhoodTable
) -> np.ndarray:
    """Derivative of ``aggregate_constraint(local_volume(rho))`` with respect to ``rho``."""
    ratios, peak = _normalised_ratios(rho_bar, alpha)
    n = ratios.size
    if peak <= 0.0:
        return np.zeros(n)
    scaled = ratios / peak
    mean_power = float(np.mean(scaled**p))
    d_rho_bar = mean_power ** (1.0 / p - 1.0) * scaled ** (p - 1.0) / (n * np.asarray(alpha))
    return nb.accumulate(d_rho_bar / nb.counts)


def global_constraint(rho: np.ndarray, alpha_total: float) -> float:
    return float(np.mean(rho)) - alpha_total


def global_constraint_sensitivity(rho: np.ndarray) -> np.ndarray:
    return np.full(np.asarray(rho).size, 1.0 / np.asarray(rho).size)
