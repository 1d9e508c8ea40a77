"""Metrics, the historical-mean baseline, and the error-vs-cutoff protocol.

The evaluation question is: standing at some time of day, how well does
the model forecast the rest of the day, against always predicting each
event's training mean? Errors are averaged over events first, then over
days, and reductions use compensated summation so results do not depend
on accumulation order beyond 1e-12.
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import IO, Mapping, Sequence

import numpy as np

from .errors import AllMasked
from .events import MINUTES_PER_DAY, EventKey, PanelDataset
from .graph import DependencyGraph
from .predict import predict_as_of

log = logging.getLogger(__name__)

MAPE_FLOOR = 0.01


class Metric(Enum):
    MAE = "mae"
    MAPE = "mape"
    ABS_PCT_OF_ACTUAL = "abs_pct_of_actual"


def mean_baseline(panel_train: PanelDataset) -> dict[EventKey, float]:
    """Per-event mean over non-missing training days.

    Events with no observations at all are left out of the map (and
    logged); evaluation skips them for the model as well so both sides
    score the same events.
    """
    out: dict[EventKey, float] = {}
    skipped = []
    for key in panel_train.catalog:
        m = panel_train.event_mean(key)
        if math.isnan(m):
            skipped.append(key)
        else:
            out[key] = m
    if skipped:
        log.warning(
            "%d events have no training history and are excluded: %s",
            len(skipped),
            ", ".join(str(k) for k in skipped[:5]),
        )
    return out


def mae(actual: Sequence[float], predicted: Sequence[float]) -> float:
    """Mean absolute error, in the attribute's own units."""
    if len(actual) != len(predicted):
        raise ValueError("actual and predicted lengths differ")
    if not actual:
        raise ValueError("nothing to score")
    return math.fsum(abs(a - p) for a, p in zip(actual, predicted)) / len(actual)


def mape(
    actual: Sequence[float],
    predicted: Sequence[float],
    epsilon_floor: float = MAPE_FLOOR,
) -> float:
    """Mean of 100*|actual - predicted|/|actual|, skipping near-zero actuals.

    Pairs with |actual| < epsilon_floor are masked to keep the ratio from
    blowing up.

    Raises:
        AllMasked: every actual fell below the floor.
    """
    if len(actual) != len(predicted):
        raise ValueError("actual and predicted lengths differ")
    kept = [(a, p) for a, p in zip(actual, predicted) if abs(a) >= epsilon_floor]
    if not kept:
        raise AllMasked(f"all {len(actual)} actuals below the {epsilon_floor} floor")
    return math.fsum(100.0 * abs(a - p) / abs(a) for a, p in kept) / len(kept)


def abs_pct_of_actual(actual: Sequence[float], predicted: Sequence[float]) -> float:
    """Total absolute error as a percentage of the total actual magnitude.

    100 * sum|actual - predicted| / sum|actual|; the count-data analogue of
    a percentage error, stable when individual actuals hit zero.

    Raises:
        AllMasked: the actual magnitudes sum to zero.
    """
    if len(actual) != len(predicted):
        raise ValueError("actual and predicted lengths differ")
    denom = math.fsum(abs(a) for a in actual)
    if denom == 0.0:
        raise AllMasked("actual values sum to zero magnitude")
    return 100.0 * math.fsum(abs(a - p) for a, p in zip(actual, predicted)) / denom


def metric_value(
    metric: Metric,
    actual: Sequence[float],
    predicted: Sequence[float],
    epsilon_floor: float = MAPE_FLOOR,
) -> float:
    if metric is Metric.MAE:
        return mae(actual, predicted)
    if metric is Metric.MAPE:
        return mape(actual, predicted, epsilon_floor)
    if metric is Metric.ABS_PCT_OF_ACTUAL:
        return abs_pct_of_actual(actual, predicted)
    raise ValueError(f"unknown metric {metric!r}")


@dataclass(frozen=True)
class ErrorCurve:
    """Model vs baseline error per as-of cutoff.

    ``None`` marks a cutoff with nothing to score (for example the end of
    the day, where no future events remain). All arrays share length.
    """

    cutoffs: tuple[int, ...]
    model_error: tuple[float | None, ...]
    baseline_error: tuple[float | None, ...]
    metric: Metric
    n_eval_points: tuple[int, ...]

    def __post_init__(self):
        n = len(self.cutoffs)
        if not (
            len(self.model_error) == len(self.baseline_error) == len(self.n_eval_points) == n
        ):
            raise ValueError("curve arrays must share one length")

    def to_csv(self, path: str | Path | IO[str]) -> None:
        """Write cutoff_minutes,model_error,baseline_error,n_points rows;
        absent errors become empty cells."""
        if hasattr(path, "write"):
            self._write(path)
        else:
            with open(path, "w", encoding="utf-8", newline="") as fh:
                self._write(fh)

    def _write(self, fh: IO[str]) -> None:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["cutoff_minutes", "model_error", "baseline_error", "n_points"])
        for c, m, b, n in zip(
            self.cutoffs, self.model_error, self.baseline_error, self.n_eval_points
        ):
            w.writerow([c, "" if m is None else repr(m), "" if b is None else repr(b), n])


def error_curve(
    graph: DependencyGraph,
    panel_test: PanelDataset,
    baseline: Mapping[EventKey, float],
    cutoffs: Sequence[int],
    metric: Metric = Metric.MAE,
    epsilon_floor: float = MAPE_FLOOR,
) -> ErrorCurve:
    """Score the model and the per-event-mean baseline at each cutoff.

    At each cutoff and test day, values before the cutoff are revealed,
    the rest of the day is predicted, and both predictors are scored on
    the events at or after the cutoff that have actual values. The per-day
    scores are then averaged across days. Days where the metric masks
    everything out contribute to the counts but not the averages.
    """
    cuts = [int(c) for c in cutoffs]
    if any(b <= a for a, b in zip(cuts, cuts[1:])):
        raise ValueError("cutoffs must be strictly ascending")
    if cuts and not (0 <= cuts[0] and cuts[-1] <= MINUTES_PER_DAY):
        raise ValueError(f"cutoffs must lie within [0, {MINUTES_PER_DAY}]")

    scorable = [k for k in graph.topo_order if k in baseline]
    if len(scorable) < len(graph.topo_order):
        log.warning(
            "%d graph events lack a baseline and are not scored",
            len(graph.topo_order) - len(scorable),
        )
    matrix = panel_test.matrix
    col = panel_test.column_index
    cov_rows = None
    if panel_test.covariates is not None and len(panel_test.covariate_names):
        cov_rows = np.asarray(panel_test.covariates, dtype=float)

    model_err: list[float | None] = []
    base_err: list[float | None] = []
    n_points: list[int] = []
    for cut in cuts:
        day_model: list[float] = []
        day_base: list[float] = []
        points = 0
        for d in panel_test.day_order:
            day_values = {
                k: float(matrix[d, col[k]])
                for k in panel_test.catalog
                if k in graph.nodes and math.isfinite(matrix[d, col[k]])
            }
            covariates = None if cov_rows is None else list(map(float, cov_rows[d]))
            state = predict_as_of(graph, day_values, cut, covariates)
            actual: list[float] = []
            model_pred: list[float] = []
            base_pred: list[float] = []
            for k in scorable:
                if k.time_bucket < cut or k not in day_values:
                    continue
                actual.append(day_values[k])
                model_pred.append(state.value(k))
                base_pred.append(baseline[k])
            if not actual:
                continue
            points += len(actual)
            try:
                m_val = metric_value(metric, actual, model_pred, epsilon_floor)
                b_val = metric_value(metric, actual, base_pred, epsilon_floor)
            except AllMasked:
                continue
            day_model.append(m_val)
            day_base.append(b_val)
        model_err.append(math.fsum(day_model) / len(day_model) if day_model else None)
        base_err.append(math.fsum(day_base) / len(day_base) if day_base else None)
        n_points.append(points)
    return ErrorCurve(
        cutoffs=tuple(cuts),
        model_error=tuple(model_err),
        baseline_error=tuple(base_err),
        metric=metric,
        n_eval_points=tuple(n_points),
    )
