"""Forecasting by topological propagation.

Observed events keep their values; every other event is predicted from its
parents' values (observed when available, otherwise the parent's own
prediction), walking the graph in topological order so parents are always
resolved first. Nodes without parents predict from their intercept alone,
which is the fitted training mean passed through the link.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from types import MappingProxyType
from typing import Iterator, Mapping, Sequence

from .errors import MissingCovariateValue, MissingParentValue, PredictionOverflow
from .events import MINUTES_PER_DAY, EventKey
from .graph import DependencyGraph, NodeModel

ETA_GUARD = 700.0


class NodeStatus(Enum):
    OBSERVED = "observed"
    PREDICTED = "predicted"
    PENDING = "pending"


@dataclass(frozen=True)
class PredictionState:
    """Value and observed-vs-predicted status for every node after a pass.

    ``values`` has an entry for each non-pending node; observed entries
    hold the input values bit-for-bit.
    """

    statuses: Mapping[EventKey, NodeStatus]
    values: Mapping[EventKey, float]
    as_of: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "statuses", MappingProxyType(dict(self.statuses)))
        object.__setattr__(self, "values", MappingProxyType(dict(self.values)))

    def value(self, key: EventKey) -> float:
        return self.values[key]

    def status_of(self, key: EventKey) -> NodeStatus:
        return self.statuses[key]

    def is_total(self) -> bool:
        return all(s is not NodeStatus.PENDING for s in self.statuses.values())

    def observed_keys(self) -> tuple[EventKey, ...]:
        return tuple(
            k for k, s in sorted(self.statuses.items(), key=lambda kv: kv[0].sort_key())
            if s is NodeStatus.OBSERVED
        )

    def items(self) -> Iterator[tuple[EventKey, NodeStatus, float | None]]:
        """(key, status, value) triples in (time, entity) order."""
        for key in sorted(self.statuses, key=EventKey.sort_key):
            yield key, self.statuses[key], self.values.get(key)


def _as_covariate_map(
    covariates, names: Sequence[str]
) -> Mapping[str, float]:
    if covariates is None:
        return {}
    if isinstance(covariates, Mapping):
        return covariates
    vec = list(covariates)
    if len(vec) != len(names):
        raise MissingCovariateValue(
            f"covariate vector has {len(vec)} entries, expected {len(names)}"
        )
    return dict(zip(names, vec))


def predict_node(
    model: NodeModel,
    parent_values: Mapping[EventKey, float],
    covariates: Mapping[str, float] | None = None,
) -> float:
    """Expected value of one node given its parents: g(m . a + m0).

    Raises:
        MissingParentValue: a parent has no (finite) value supplied.
        MissingCovariateValue: the model uses a covariate not supplied.
        PredictionOverflow: exp-link linear predictor beyond the guard.
    """
    terms = []
    for parent, coeff in zip(model.parents, model.parent_coeffs):
        v = parent_values.get(parent)
        if v is None or not math.isfinite(v):
            raise MissingParentValue(parent, model.target)
        terms.append(coeff * v)
    for name, coeff in model.covariate_coeffs:
        if covariates is None or name not in covariates:
            raise MissingCovariateValue(
                f"node {model.target} needs covariate {name!r}, none supplied"
            )
        terms.append(coeff * float(covariates[name]))
    terms.append(model.intercept)
    eta = math.fsum(terms)
    if model.family.is_log_link:
        if eta > ETA_GUARD:
            raise PredictionOverflow(model.target, eta)
        return math.exp(eta)
    return eta


def run_propagation(
    graph: DependencyGraph,
    observations: Mapping[EventKey, float],
    covariates=None,
) -> PredictionState:
    """Resolve every node: observed values pass through, the rest are
    predicted in topological order from already-resolved parents.

    ``covariates`` may be a name->value mapping or a vector aligned with
    the graph's covariate names.

    Raises:
        ValueError: an observation is for an unknown event or not finite.
    """
    for key, v in observations.items():
        if key not in graph.nodes:
            raise ValueError(f"observation for unknown event {key}")
        if not math.isfinite(v):
            raise ValueError(f"observation for {key} is not finite: {v!r}")
    cov = _as_covariate_map(covariates, graph.covariate_names)

    statuses: dict[EventKey, NodeStatus] = {}
    values: dict[EventKey, float] = {}
    for key in graph.topo_order:
        if key in observations:
            statuses[key] = NodeStatus.OBSERVED
            values[key] = float(observations[key])
        else:
            statuses[key] = NodeStatus.PREDICTED
            values[key] = predict_node(graph.nodes[key], values, cov)
    return PredictionState(statuses=statuses, values=values)


def predict_as_of(
    graph: DependencyGraph,
    day_values: Mapping[EventKey, float],
    cutoff_minutes: int,
    covariates=None,
) -> PredictionState:
    """Forecast the rest of a day from what is known before a cutoff.

    Events that start before the cutoff and have a non-missing value in
    ``day_values`` count as observed; everything else (including events
    before the cutoff whose value is missing) is predicted. Values for
    events outside the graph are ignored.
    """
    if not 0 <= cutoff_minutes <= MINUTES_PER_DAY:
        raise ValueError(f"cutoff must be within [0, {MINUTES_PER_DAY}]")
    observations = {
        key: float(v)
        for key, v in day_values.items()
        if key in graph.nodes
        and key.time_bucket < cutoff_minutes
        and v is not None
        and math.isfinite(v)
    }
    state = run_propagation(graph, observations, covariates)
    return PredictionState(
        statuses=state.statuses, values=state.values, as_of=int(cutoff_minutes)
    )
