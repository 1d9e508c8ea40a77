"""Shared helpers for the test suite: terse constructors for keys, panels,
and hand-assembled graphs (fitted by nobody, so tests control every weight).
"""

from __future__ import annotations

import numpy as np
import pytest

from eventflow import (
    BuildConfig,
    DependencyGraph,
    EventKey,
    LinkFamily,
    NodeModel,
    PanelDataset,
)


def key(entity: str, hhmm: str, width: int = 60) -> EventKey:
    h, m = hhmm.split(":")
    return EventKey(entity, 60 * int(h) + int(m), width)


def make_panel(catalog, days, values, covariates=None, covariate_names=()) -> PanelDataset:
    return PanelDataset(
        catalog=tuple(catalog),
        days=tuple(days),
        values=np.asarray(values, dtype=float),
        covariates=None if covariates is None else np.asarray(covariates, dtype=float),
        covariate_names=tuple(covariate_names),
    )


def day_labels(n: int, start: int = 1) -> list[str]:
    return [f"2024-01-{d:02d}" for d in range(start, start + n)]


ANY_CONFIG = BuildConfig(family=LinkFamily.GAUSSIAN_IDENTITY, lam=1.0)


def hand_graph(
    node_specs,
    family: LinkFamily = LinkFamily.GAUSSIAN_IDENTITY,
    config: BuildConfig | None = None,
    covariate_names=(),
) -> DependencyGraph:
    """Assemble a graph from (target, [(parent, coeff), ...], intercept,
    train_mean) tuples without running any fits."""
    cfg = config or BuildConfig(family=family, lam=1.0)
    nodes = []
    for target, parent_pairs, intercept, train_mean in node_specs:
        parents = tuple(p for p, _ in parent_pairs)
        coeffs = tuple(c for _, c in parent_pairs)
        nodes.append(
            NodeModel(
                target=target,
                family=family,
                parents=parents,
                parent_coeffs=coeffs,
                covariate_coeffs=(),
                intercept=intercept,
                train_mean=train_mean,
                lambda_used=1.0,
            )
        )
    return DependencyGraph.from_nodes(nodes, family, cfg, covariate_names)


@pytest.fixture
def rng():
    return np.random.default_rng(2024)
