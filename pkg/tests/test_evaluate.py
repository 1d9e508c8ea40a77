"""Metrics, the training-mean baseline, and cutoff error curves."""

import io
import logging

import numpy as np
import pytest
from conftest import day_labels, hand_graph, key, make_panel
from hypothesis import given, settings
from hypothesis import strategies as st

from eventflow import (
    AllMasked,
    ErrorCurve,
    Metric,
    abs_pct_of_actual,
    error_curve,
    mae,
    mape,
    mean_baseline,
)

A8, A9, A10 = (key("A", f"{h:02d}:00") for h in (8, 9, 10))


def test_baseline_is_per_event_mean():
    panel = make_panel([A8, A9], day_labels(2), [[2.0, 5.0], [4.0, 7.0]])
    assert mean_baseline(panel) == {A8: 3.0, A9: 6.0}


def test_baseline_skips_missing_days():
    panel = make_panel([A8], day_labels(3), [[5.0], [np.nan], [7.0]])
    assert mean_baseline(panel) == {A8: 6.0}


def test_baseline_leaves_out_never_observed_events(caplog):
    panel = make_panel([A8, A9], day_labels(2), [[1.0, np.nan], [3.0, np.nan]])
    with caplog.at_level(logging.WARNING, logger="eventflow.evaluate"):
        base = mean_baseline(panel)
    assert base == {A8: 2.0}
    assert any("no training history" in r.message for r in caplog.records)


def test_mae_basic():
    assert mae([1.0, 2.0, 3.0], [2.0, 2.0, 5.0]) == 1.0
    assert mae([4.0], [4.0]) == 0.0


def test_mae_empty_raises():
    with pytest.raises(ValueError):
        mae([], [])


def test_mape_basic():
    assert mape([10.0], [9.0]) == 10.0
    assert mape([10.0, 20.0], [10.0, 20.0]) == 0.0


def test_mape_masks_tiny_actuals():
    # |actual| <= floor drops out; only the 10 vs 9 term remains
    assert mape([10.0, 0.001], [9.0, 5.0]) == 10.0


def test_mape_all_masked_raises():
    with pytest.raises(AllMasked):
        mape([0.0, 0.005], [1.0, 2.0])


def test_mape_respects_custom_floor():
    assert mape([0.5, 10.0], [1.0, 10.0], epsilon_floor=1.0) == 0.0


def test_abs_pct_of_actual():
    # 100 * sum|a-p| / sum|a| = 100 * (1+1) / (10+30)
    assert abs_pct_of_actual([10.0, 30.0], [9.0, 31.0]) == 5.0
    with pytest.raises(AllMasked):
        abs_pct_of_actual([0.0, 0.0], [1.0, 2.0])


def test_metric_mismatched_lengths():
    with pytest.raises(ValueError):
        mae([1.0], [1.0, 2.0])


@settings(max_examples=50, deadline=None)
@given(
    values=st.lists(st.floats(1.0, 1e6), min_size=1, max_size=20),
    scale=st.floats(0.1, 100.0),  # keeps every scaled actual above the mask floor
)
def test_mape_zero_on_exact_and_scale_free(values, scale):
    assert mape(values, values) == 0.0
    scaled_up = [v * scale for v in values]
    preds = [v * 1.1 for v in values]
    preds_up = [v * scale for v in preds]
    assert mape(values, preds) == pytest.approx(mape(scaled_up, preds_up), rel=1e-9)


def _graph_and_panel():
    # child = parent exactly on every day, so the model is perfect and the
    # baseline is not (values vary day to day)
    graph = hand_graph(
        [
            (A8, [], 4.0, 4.0),
            (A9, [(A8, 1.0)], 0.0, 4.0),
        ]
    )
    panel = make_panel(
        [A8, A9],
        day_labels(3),
        [[2.0, 2.0], [4.0, 4.0], [6.0, 6.0]],
    )
    return graph, panel


def test_error_curve_model_beats_baseline_when_it_should():
    graph, panel = _graph_and_panel()
    baseline = {A8: 4.0, A9: 4.0}
    curve = error_curve(graph, panel, baseline, [0, 540, 1440], metric=Metric.MAE)
    assert curve.cutoffs == (0, 540, 1440)
    # cutoff 540: A8 revealed, A9 scored; the model copies A8 so error is 0
    assert curve.model_error[1] == 0.0
    # baseline predicts 4 against actuals 2, 4, 6
    assert curve.baseline_error[1] == pytest.approx(4.0 / 3.0)
    assert curve.n_eval_points[1] == 3


def test_error_curve_cutoff_zero_scores_both_events():
    graph, panel = _graph_and_panel()
    baseline = {A8: 4.0, A9: 4.0}
    curve = error_curve(graph, panel, baseline, [0], metric=Metric.MAE)
    # nothing revealed: model predicts intercepts (4 then 4), same as baseline
    assert curve.model_error[0] == curve.baseline_error[0]
    assert curve.n_eval_points[0] == 6


def test_error_curve_end_of_day_has_nothing_to_score():
    graph, panel = _graph_and_panel()
    curve = error_curve(graph, panel, {A8: 4.0, A9: 4.0}, [1440])
    assert curve.model_error == (None,)
    assert curve.baseline_error == (None,)
    assert curve.n_eval_points == (0,)


def test_error_curve_skips_missing_actuals():
    graph, _ = _graph_and_panel()
    panel = make_panel([A8, A9], day_labels(2), [[2.0, np.nan], [4.0, 4.0]])
    curve = error_curve(graph, panel, {A8: 3.0, A9: 3.0}, [540])
    # day 1 has no scorable events at 540+, so only day 2 contributes
    assert curve.n_eval_points[0] == 1
    assert curve.model_error[0] == 0.0


def test_error_curve_scores_only_baseline_covered_events(caplog):
    # A9 never observed in training: the baseline map lacks it, so the
    # model is not scored on it either
    graph, panel = _graph_and_panel()
    baseline = {A8: 4.0}
    curve = error_curve(graph, panel, baseline, [0])
    assert curve.n_eval_points[0] == 3


def test_error_curve_validates_cutoffs():
    graph, panel = _graph_and_panel()
    base = {A8: 4.0, A9: 4.0}
    for bad in ([540, 540], [600, 0], [-1], [1441]):
        with pytest.raises(ValueError):
            error_curve(graph, panel, base, bad)


def test_error_curve_to_csv_golden():
    curve = ErrorCurve(
        cutoffs=(0, 720),
        model_error=(1.25, None),
        baseline_error=(2.5, None),
        metric=Metric.MAE,
        n_eval_points=(4, 0),
    )
    buf = io.StringIO()
    curve.to_csv(buf)
    assert buf.getvalue() == (
        "cutoff_minutes,model_error,baseline_error,n_points\n"
        "0,1.25,2.5,4\n"
        "720,,,0\n"
    )


def test_error_curve_length_mismatch_rejected():
    with pytest.raises(ValueError):
        ErrorCurve(
            cutoffs=(0,),
            model_error=(1.0, 2.0),
            baseline_error=(1.0,),
            metric=Metric.MAE,
            n_eval_points=(1,),
        )


def test_error_curve_mape_metric():
    graph, panel = _graph_and_panel()
    curve = error_curve(graph, panel, {A8: 4.0, A9: 4.0}, [540], metric=Metric.MAPE)
    assert curve.model_error[0] == 0.0
    # baseline per day: |2-4|/2, |4-4|/4, |6-4|/6 -> 100%, 0%, 33.3%
    assert curve.baseline_error[0] == pytest.approx((100.0 + 0.0 + 100.0 / 3.0) / 3.0)


def test_metric_enum_round_trip():
    assert Metric("mae") is Metric.MAE
    assert Metric("mape") is Metric.MAPE
    assert Metric("abs_pct_of_actual") is Metric.ABS_PCT_OF_ACTUAL
