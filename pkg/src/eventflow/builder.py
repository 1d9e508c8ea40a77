"""Graph construction: one sparse regression per event, earlier events as
candidate predictors.

Candidates are restricted to strictly earlier time buckets, so every edge
points forward within the day and the assembled graph is acyclic by
construction. Static per-day covariates ride along as extra design columns
but never count as parents.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .errors import InsufficientHistory, InvalidPanel
from .events import BuildConfig, EventKey, LinkFamily, PanelDataset, sorted_catalog, validate_panel
from .glm import FitResult, fit_path, lambda_max, make_design, select_by_max_parents
from .graph import DependencyGraph, NodeModel

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class CandidateSet:
    """The admissible predictors for one target event.

    Every candidate strictly precedes the target in time; the order is
    (time_bucket, entity) ascending and is what the design columns follow.
    """

    target: EventKey
    candidates: tuple[EventKey, ...]
    covariate_names: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "candidates", tuple(self.candidates))
        object.__setattr__(self, "covariate_names", tuple(self.covariate_names))
        for c in self.candidates:
            if c.time_bucket >= self.target.time_bucket:
                raise ValueError(f"candidate {c} does not precede target {self.target}")


def enumerate_candidates(
    catalog,
    target: EventKey,
    config: BuildConfig,
    covariate_names=(),
) -> CandidateSet:
    """All catalog events strictly earlier than the target.

    With ``candidate_window_minutes`` set, only events within that much
    time before the target qualify.
    """
    window = config.candidate_window_minutes
    picked = [
        key
        for key in sorted_catalog(catalog)
        if key.time_bucket < target.time_bucket
        and (window is None or target.time_bucket - key.time_bucket <= window)
    ]
    return CandidateSet(target, tuple(picked), tuple(covariate_names))


def _complete_rows(panel: PanelDataset, target: EventKey, candidates: CandidateSet) -> list[int]:
    """Day indices (in day-label order) where target, every candidate, and
    the covariate vector are all present."""
    cols = [panel.column(target)] + [panel.column(c) for c in candidates.candidates]
    ok = np.ones(panel.n_days, dtype=bool)
    for col in cols:
        ok &= np.isfinite(col)
    if candidates.covariate_names and panel.covariates is not None:
        cov = np.asarray(panel.covariates, dtype=float)
        ok &= np.isfinite(cov).all(axis=1)
    return [d for d in panel.day_order if ok[d]]


def intercept_only_node(
    panel: PanelDataset, target: EventKey, family: LinkFamily, lambda_used: float = 0.0
) -> NodeModel:
    """Fallback node when no regression can be fit: predicts the training
    mean (through the link) unconditionally."""
    mean = panel.event_mean(target)
    if math.isnan(mean):
        log.warning("%s was never observed; storing a zero training mean", target)
        mean = 0.0
    if family is LinkFamily.POISSON_EXP:
        intercept = math.log(max(mean, 1e-8))
    else:
        intercept = mean
    return NodeModel(
        target=target,
        family=family,
        parents=(),
        parent_coeffs=(),
        covariate_coeffs=(),
        intercept=intercept,
        train_mean=mean,
        lambda_used=lambda_used,
    )


def _node_from_fit(
    target: EventKey,
    candidates: CandidateSet,
    fit: FitResult,
    scales: np.ndarray,
    train_mean: float,
    family: LinkFamily,
    max_parents: int,
) -> NodeModel:
    n_cand = len(candidates.candidates)
    parent_idx = [j for j in range(n_cand) if fit.coeffs[j] != 0.0]
    if len(parent_idx) > max_parents:
        # only reachable through the exp-link fallback, where float noise can
        # leave sub-tolerance coefficients alive; keep the largest ones
        log.warning(
            "%s: trimming %d near-zero parents to honor the cap of %d",
            target,
            len(parent_idx) - max_parents,
            max_parents,
        )
        parent_idx.sort(key=lambda j: (abs(fit.coeffs[j] * scales[j]), j))
        parent_idx = sorted(parent_idx[len(parent_idx) - max_parents :])
    parents = tuple(candidates.candidates[j] for j in parent_idx)
    coeffs = tuple(float(fit.coeffs[j]) for j in parent_idx)
    cov_coeffs = tuple(
        (name, float(fit.coeffs[n_cand + k]))
        for k, name in enumerate(candidates.covariate_names)
        if fit.coeffs[n_cand + k] != 0.0
    )
    return NodeModel(
        target=target,
        family=family,
        parents=parents,
        parent_coeffs=coeffs,
        covariate_coeffs=cov_coeffs,
        intercept=fit.intercept,
        train_mean=train_mean,
        lambda_used=fit.lam,
    )


def fit_node(
    panel: PanelDataset,
    target: EventKey,
    candidates: CandidateSet,
    config: BuildConfig,
) -> NodeModel:
    """Fit one node on complete-case rows and keep the surviving parents.

    The configured penalty sweep is extended upward to the node's own
    lambda_max when needed, so a fit with zero parents is always on the
    path and the max_parents cap can always be met.

    Raises:
        InsufficientHistory: fewer complete rows than min_history_days.
    """
    rows = _complete_rows(panel, target, candidates)
    if len(rows) < config.min_history_days:
        raise InsufficientHistory(target, len(rows), config.min_history_days)

    n_cand = len(candidates.candidates)
    n_cov = len(candidates.covariate_names)
    X = np.empty((len(rows), n_cand + n_cov))
    for j, cand in enumerate(candidates.candidates):
        X[:, j] = panel.column(cand)[rows]
    if n_cov:
        cov = np.asarray(panel.covariates, dtype=float)
        X[:, n_cand:] = cov[rows]
    y = panel.column(target)[rows]
    names = [c.label() for c in candidates.candidates] + list(candidates.covariate_names)

    design = make_design(
        X, y, names, n_parent_columns=n_cand, standardize=config.standardize
    )
    path = config.penalties()
    top = lambda_max(design)
    if path[0] < top:
        path = (top,) + path
    fits = fit_path(design, config.family, path)
    for lam, fit in zip(path, fits):
        if not fit.converged:
            log.warning("%s: fit at lambda=%g stopped before convergence", target, lam)
    chosen = select_by_max_parents(fits, config.max_parents, design.n_parent_columns)

    train_mean = panel.event_mean(target)
    if math.isnan(train_mean):
        # unreachable when rows passed the history gate, kept for safety
        train_mean = 0.0
    return _node_from_fit(
        target, candidates, chosen, design.scales, train_mean, config.family, config.max_parents
    )


def build_graph(panel: PanelDataset, config: BuildConfig) -> DependencyGraph:
    """Fit every catalog event and assemble the dependency graph.

    Nodes that fail the history requirement degrade to intercept-only
    (with a logged warning) instead of being dropped, so prediction covers
    the whole catalog.

    Raises:
        InvalidPanel: the panel failed validation.
    """
    violations = validate_panel(panel, config.family)
    if violations:
        raise InvalidPanel(violations)
    catalog = sorted_catalog(panel.catalog)
    models = []
    for target in catalog:
        cand = enumerate_candidates(catalog, target, config, panel.covariate_names)
        try:
            models.append(fit_node(panel, target, cand, config))
        except InsufficientHistory as exc:
            log.warning("%s; falling back to intercept-only", exc)
            models.append(intercept_only_node(panel, target, config.family))
    return DependencyGraph.from_nodes(
        models, config.family, config, panel.covariate_names
    )
