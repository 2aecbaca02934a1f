"""Tabular run artifacts: degenerate points, skeleton polylines and history."""

import csv
import math
from pathlib import Path
from typing import Iterable

from loguru import logger
from pydantic import ValidationError

from stressinfill.models.error import ArtifactFileError, OutputWriteError
from stressinfill.models.optimization import HistoryRecord
from stressinfill.topology import PrincipalStressLine, TopologicalSkeleton

DEGENERATE_POINT_COLUMNS = (
    "index", "x", "y", "kind", "element", "a", "b", "c", "d", "delta", "slopes",
)
HISTORY_COLUMNS = (
    "iteration", "beta", "compliance", "g_local", "g_global", "sharpness", "mean_density",
)


def _format_slope(slope: float) -> str:
    return "inf" if math.isinf(slope) else f"{slope:.12g}"


def _open_for_writing(path: Path):
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        return path.open("w", encoding="utf-8", newline="")
    except OSError:
        raise OutputWriteError(path=str(path))


def write_degenerate_points(skeleton: TopologicalSkeleton, path: Path) -> Path:
    with _open_for_writing(path) as handle:
        writer = csv.writer(handle, delimiter="\t", lineterminator="\n")
        writer.writerow(DEGENERATE_POINT_COLUMNS)
        for index, point in enumerate(skeleton.points):
            g = point.gradient
            writer.writerow(
                [
                    index,
                    f"{point.x:.12g}",
                    f"{point.y:.12g}",
                    point.kind.value,
                    point.element,
                    *(f"{value:.12g}" for value in (g.a, g.b, g.c, g.d, g.delta)),
                    ",".join(_format_slope(s) for s in point.tangent_slopes),
                ]
            )
    logger.info(f"{len(skeleton.points)} degenerate points written to {path}")
    return Path(path)


def _write_polyline(handle, header: str, line: PrincipalStressLine) -> None:
    handle.write(f"{header} {line.family.value} {line.termination.value} {len(line.vertices)}\n")
    for x, y in line.vertices:
        handle.write(f"{x:.9g} {y:.9g}\n")


def write_skeleton(skeleton: TopologicalSkeleton, path: Path) -> Path:
    """One block per separatrix: a ``#`` header line then ``x y`` vertices.

    The header reads ``# separatrix <k> source <i> angle <deg> <family>
    <termination> <count>``. A skeleton without separatrices gives an empty file.
    """
    with _open_for_writing(path) as handle:
        for k, separatrix in enumerate(skeleton.separatrices):
            header = (
                f"# separatrix {k} source {separatrix.source} "
                f"angle {separatrix.launch_angle:.6f}"
            )
            _write_polyline(handle, header, separatrix.line)
    logger.info(f"{len(skeleton.separatrices)} separatrices written to {path}")
    return Path(path)


def write_psl_field(lines: Iterable[PrincipalStressLine], path: Path) -> Path:
    count = 0
    with _open_for_writing(path) as handle:
        for k, line in enumerate(lines):
            _write_polyline(handle, f"# psl {k}", line)
            count += 1
    logger.info(f"{count} principal stress lines written to {path}")
    return Path(path)


def write_history(history: Iterable[HistoryRecord], path: Path) -> Path:
    """CSV with one row per optimisation iteration; a blank ``g_global`` means unused."""
    rows = 0
    with _open_for_writing(path) as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(HISTORY_COLUMNS)
        for record in history:
            writer.writerow(
                [
                    record.iteration,
                    f"{record.beta:.12g}",
                    f"{record.compliance:.12g}",
                    f"{record.g_local:.12g}",
                    "" if record.g_global is None else f"{record.g_global:.12g}",
                    f"{record.sharpness:.12g}",
                    f"{record.mean_density:.12g}",
                ]
            )
            rows += 1
    logger.info(f"History with {rows} rows written to {path}")
    return Path(path)


def read_history(path: Path) -> list[HistoryRecord]:
    path = Path(path)
    try:
        with path.open(encoding="utf-8", newline="") as handle:
            rows = list(csv.DictReader(handle))
    except OSError as exc:
        raise ArtifactFileError(path=str(path), detail=str(exc.strerror))
    try:
        return [
            HistoryRecord(**{key: (value or None) for key, value in row.items()})
            for row in rows
        ]
    except (ValidationError, TypeError) as exc:
        raise ArtifactFileError(path=str(path), detail=f"malformed history: {exc}")
