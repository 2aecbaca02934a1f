import math

import pytest
from pydantic import ValidationError

from stressinfill.models.optimization import BetaSchedule, HistoryRecord, MmaSettings


@pytest.mark.parametrize(
    "iteration, expected",
    [(1, 1.0), (40, 1.0), (41, 2.0), (80, 2.0), (81, 4.0), (281, 128.0), (1000, 128.0)],
)
def test_beta_schedule_doubles_every_period_up_to_cap(iteration: int, expected: float) -> None:
    assert BetaSchedule().at(iteration) == expected


def test_beta_schedule_custom() -> None:
    # Prepare
    schedule = BetaSchedule(initial=2.0, factor=1.5, period=10, cap=4.0)

    # Act / Assert
    assert schedule.at(10) == 2.0
    assert schedule.at(11) == 3.0
    assert schedule.at(21) == 4.0


def test_mma_settings_reject_nonpositive_quadratic_slack_weight() -> None:
    with pytest.raises(ValidationError):
        MmaSettings(d=0.0)


def test_history_record_finiteness() -> None:
    # Prepare
    record = HistoryRecord(
        iteration=1, beta=1.0, compliance=12.5, g_local=-0.1, sharpness=0.9, mean_density=0.5
    )
    broken = record.model_copy(update={"compliance": math.nan})

    # Act / Assert
    assert record.is_finite()
    assert not broken.is_finite()
    assert record.g_global is None
