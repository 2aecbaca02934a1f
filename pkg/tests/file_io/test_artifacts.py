import math
from pathlib import Path

import numpy as np
import pytest

from stressinfill.io.artifacts import (
    DEGENERATE_POINT_COLUMNS,
    HISTORY_COLUMNS,
    read_history,
    write_degenerate_points,
    write_history,
    write_psl_field,
    write_skeleton,
)
from stressinfill.models.error import ArtifactFileError
from stressinfill.models.optimization import HistoryRecord
from stressinfill.models.topology import (
    DegenerateKind,
    DegeneratePoint,
    StressFamily,
    TensorGradient,
    TerminationReason,
)
from stressinfill.topology import PrincipalStressLine, Separatrix, TopologicalSkeleton


@pytest.fixture(name="skeleton")
def get_skeleton() -> TopologicalSkeleton:
    point = DegeneratePoint(
        x=1.5, y=2.25, element=9, kind=DegenerateKind.TRISECTOR,
        gradient=TensorGradient(a=2.0, b=1.0, c=1.0, d=0.0),
        tangent_slopes=[-1.5, 0.25, math.inf],
    )
    line = PrincipalStressLine(
        StressFamily.MINOR, np.array([[2.5, 2.25], [3.0, 2.25], [4.0, 2.5]]),
        TerminationReason.BOUNDARY,
    )
    return TopologicalSkeleton(
        points=[point], separatrices=[Separatrix(source=0, launch_angle=180.0, line=line)]
    )


def _record(iteration: int, g_global: float | None = None) -> HistoryRecord:
    return HistoryRecord(
        iteration=iteration, beta=2.0, compliance=123.5 - iteration, g_local=-0.015625,
        g_global=g_global, sharpness=0.75, mean_density=0.5,
    )


def test_degenerate_point_table(skeleton: TopologicalSkeleton, tmp_path: Path) -> None:
    # Act
    path = write_degenerate_points(skeleton, tmp_path / "points.tsv")

    # Assert
    header, row = [line.split("\t") for line in path.read_text().splitlines()]
    assert header == list(DEGENERATE_POINT_COLUMNS)
    assert row == ["0", "1.5", "2.25", "trisector", "9", "2", "1", "1", "0", "-1", "-1.5,0.25,inf"]


def test_skeleton_polylines(skeleton: TopologicalSkeleton, tmp_path: Path) -> None:
    # Act
    lines = write_skeleton(skeleton, tmp_path / "skeleton.psl").read_text().splitlines()

    # Assert
    assert lines[0] == "# separatrix 0 source 0 angle 180.000000 minor boundary 3"
    assert lines[1:] == ["2.5 2.25", "3 2.25", "4 2.5"]


def test_empty_skeleton_gives_empty_file(tmp_path: Path) -> None:
    assert write_skeleton(TopologicalSkeleton(), tmp_path / "empty.psl").read_text() == ""


def test_psl_field_blocks(skeleton: TopologicalSkeleton, tmp_path: Path) -> None:
    # Prepare
    lines = [separatrix.line for separatrix in skeleton.separatrices] * 2

    # Act
    text = write_psl_field(lines, tmp_path / "field.psl").read_text().splitlines()

    # Assert
    assert [line for line in text if line.startswith("#")] == [
        "# psl 0 minor boundary 3",
        "# psl 1 minor boundary 3",
    ]


def test_history_round_trip(tmp_path: Path) -> None:
    # Prepare
    history = [_record(1), _record(2)]
    with_global = [_record(1, g_global=0.0625)]

    # Act
    plain = read_history(write_history(history, tmp_path / "plain.csv"))
    constrained = read_history(write_history(with_global, tmp_path / "global.csv"))

    # Assert
    assert plain == history
    assert constrained == with_global
    assert (tmp_path / "plain.csv").read_text().splitlines()[0] == ",".join(HISTORY_COLUMNS)


def test_empty_history_has_header_only(tmp_path: Path) -> None:
    # Act
    path = write_history([], tmp_path / "history.csv")

    # Assert
    assert path.read_text() == ",".join(HISTORY_COLUMNS) + "\n"
    assert read_history(path) == []


def test_read_history_errors(tmp_path: Path) -> None:
    # Prepare
    malformed = tmp_path / "history.csv"
    malformed.write_text(",".join(HISTORY_COLUMNS) + "\n1,x,1,1,,1,1\n")

    # Act / Assert
    with pytest.raises(ArtifactFileError):
        read_history(malformed)
    with pytest.raises(ArtifactFileError):
        read_history(tmp_path / "absent.csv")
