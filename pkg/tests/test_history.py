import numpy as np
import pytest

from curvecast.errors import (
    FirstEpochMismatchError,
    NonFiniteInputError,
    OutOfOrderEpochError,
)
from curvecast.history import History, PerformanceTuple, rescale_epochs

from .oracles import curve_value, grid_refine_fit


def test_rescale_epochs_half_epoch_grid():
    assert rescale_epochs([0.5, 1.0, 1.5], 0.5) == [1.0, 2.0, 3.0]


def test_rescale_epochs_unit_step_is_identity():
    assert rescale_epochs([1.0, 2.0, 3.0], 1.0) == [1.0, 2.0, 3.0]


def test_rescale_epochs_rejects_bad_step():
    with pytest.raises(ValueError):
        rescale_epochs([1.0], 0.0)


def test_infers_step_from_first_report():
    h = History("m")
    assert h.step is None
    h.record_and_predict(0.5, 10.0, 2.0)
    assert h.step == 0.5
    assert h.last_epoch == 0.5


def test_no_prediction_before_three_points():
    h = History("m")
    assert h.record_and_predict(0.5, 10.0, 2.0) is None
    assert h.record_and_predict(1.0, 20.0, 1.5) is None
    assert len(h) == 2
    assert h.latest_prediction is None
    p = h.record_and_predict(1.5, 25.0, 1.2)
    assert p is not None
    assert h.latest_prediction == p


def test_wrong_spacing_raises():
    h = History("m")
    h.record_and_predict(0.5, 10.0, 2.0)
    with pytest.raises(OutOfOrderEpochError):
        h.record_and_predict(1.5, 11.0, 1.9)


def test_repeated_epoch_raises():
    h = History("m")
    h.record_and_predict(0.5, 10.0, 2.0)
    h.record_and_predict(1.0, 11.0, 1.9)
    with pytest.raises(OutOfOrderEpochError):
        h.record_and_predict(1.0, 12.0, 1.8)


def test_configured_step_pins_first_epoch():
    h = History("m", step=0.5)
    with pytest.raises(FirstEpochMismatchError):
        h.record_and_predict(1.0, 10.0, 2.0)


def test_non_finite_values_rejected():
    h = History("m")
    with pytest.raises(NonFiniteInputError):
        h.record_and_predict(0.5, float("nan"), 2.0)
    with pytest.raises(NonFiniteInputError):
        h.record_and_predict(0.5, 10.0, float("inf"))


def test_nonpositive_epoch_rejected():
    h = History("m")
    with pytest.raises(ValueError):
        h.record_and_predict(0.0, 10.0, 2.0)


def test_final_prediction_matches_truth_on_noiseless_curve():
    # 40 half-epoch reports of a noiseless (85, 1.5, 2) curve
    a, b, c = 85.0, 1.5, 2.0
    h = History("m")
    pred = None
    for i in range(1, 41):
        acc = curve_value(a, b, c, float(i))
        pred = h.record_and_predict(i * 0.5, acc, 1.0)
    assert pred is not None
    assert abs(pred - a) <= 1e-2
    points = [(float(i), curve_value(a, b, c, float(i))) for i in range(1, 41)]
    oracle_a, _, _, _ = grid_refine_fit(points)
    assert abs(pred - oracle_a) <= 1e-2


def test_predictions_invariant_to_epoch_interval():
    # The same accuracy sequence must give the same predictions whether it
    # arrives every half epoch or every epoch: only the index matters.
    a, b, c = 60.0, 1.8, 1.0
    accs = [curve_value(a, b, c, float(i)) for i in range(1, 11)]
    half = History("h")
    unit = History("u")
    preds_half = [half.record_and_predict((i + 1) * 0.5, acc, 1.0) for i, acc in enumerate(accs)]
    preds_unit = [unit.record_and_predict(float(i + 1), acc, 1.0) for i, acc in enumerate(accs)]
    assert preds_half == preds_unit


def test_predictions_window_returns_most_recent():
    h = History("m")
    for i in range(1, 7):
        h.record_and_predict(i * 0.5, 30.0 + i, 1.0)
    window = h.predictions(3)
    assert len(window) == 3
    assert window == [t.prediction for t in h.tuples[-3:]]
    with pytest.raises(ValueError):
        h.predictions(0)


def test_max_val_acc_tracks_maximum():
    h = History("m")
    for i, acc in enumerate([10.0, 34.2, 20.0], start=1):
        h.record_and_predict(i * 0.5, acc, 1.0)
    assert h.max_val_acc == 34.2


def test_from_tuples_round_trip():
    h = History("m")
    for i in range(1, 6):
        h.record_and_predict(i * 0.5, 40.0 + i, 1.0)
    restored = History.from_tuples(list(h.tuples))
    assert restored.tuples == h.tuples
    assert restored.step == 0.5
    # restored history keeps accepting reports on the same grid
    restored.record_and_predict(3.0, 46.0, 1.0)
    with pytest.raises(OutOfOrderEpochError):
        restored.record_and_predict(4.5, 47.0, 1.0)


def test_from_tuples_validates_spacing():
    bad = [
        PerformanceTuple("m", 0.5, 10.0, 2.0, None),
        PerformanceTuple("m", 2.0, 11.0, 1.9, None),
    ]
    with pytest.raises(OutOfOrderEpochError):
        History.from_tuples(bad)
    with pytest.raises(ValueError):
        History.from_tuples([])


def test_noisy_curve_prediction_settles_near_truth():
    rng = np.random.default_rng(5)
    a, b, c = 72.0, 1.6, 1.5
    h = History("m")
    pred = None
    for i in range(1, 41):
        acc = curve_value(a, b, c, float(i)) + rng.normal(0.0, 0.3)
        pred = h.record_and_predict(i * 0.5, float(np.clip(acc, 0.0, 100.0)), 1.0)
    assert pred is not None
    assert abs(pred - a) <= 1.0
