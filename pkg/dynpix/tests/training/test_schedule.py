import pytest

from core.models.config_models import TrainSchedule
from dynpix.training.schedule import lr_at


HC18 = TrainSchedule(lr0=2e-4, total_epochs=200, constant_epochs=100)


def test_reported_schedule_values():
    assert lr_at(50, HC18) == 2e-4
    assert lr_at(150, HC18) == pytest.approx(1e-4, rel=1e-12)
    assert lr_at(200, HC18) == 0.0


def test_non_increasing_and_continuous():
    values = [lr_at(epoch, HC18) for epoch in range(201)]
    assert all(a >= b for a, b in zip(values, values[1:]))
    assert lr_at(99, HC18) == lr_at(100, HC18) == 2e-4


def test_montgomery_schedule_endpoints():
    schedule = TrainSchedule(total_epochs=50, constant_epochs=30)
    assert lr_at(29, schedule) == 2e-4
    assert lr_at(40, schedule) == pytest.approx(1e-4)
    assert lr_at(50, schedule) == 0.0


def test_all_constant_schedule_ends_at_zero():
    schedule = TrainSchedule(total_epochs=5, constant_epochs=5)
    assert lr_at(4, schedule) == 2e-4
    assert lr_at(5, schedule) == 0.0


@pytest.mark.parametrize("epoch", [-1, 201])
def test_out_of_range_epoch(epoch):
    with pytest.raises(ValueError):
        lr_at(epoch, HC18)
