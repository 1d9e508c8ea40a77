"""Candidate enumeration, node fitting, and whole-graph assembly."""

import logging

import numpy as np
import pytest
from conftest import day_labels, key, make_panel

from eventflow import (
    BuildConfig,
    CandidateSet,
    InsufficientHistory,
    InvalidPanel,
    LinkFamily,
    build_graph,
    enumerate_candidates,
    fit_node,
)
from eventflow.builder import intercept_only_node
from eventflow.graph import graph_to_json

HOURLY = [key("E", f"{h:02d}:00") for h in range(6, 13)]  # 06:00 .. 12:00


def _config(**kw):
    kw.setdefault("family", LinkFamily.GAUSSIAN_IDENTITY)
    if "lam" not in kw and "lambda_path" not in kw:
        kw["lam"] = 0.05
    return BuildConfig(**kw)


def test_candidates_are_strictly_earlier():
    cands = enumerate_candidates(HOURLY, HOURLY[3], _config())
    assert cands.target == HOURLY[3]
    assert cands.candidates == tuple(HOURLY[:3])


def test_earliest_event_has_no_candidates():
    cands = enumerate_candidates(HOURLY, HOURLY[0], _config())
    assert cands.candidates == ()


def test_candidate_window_limits_lookback():
    cfg = _config(candidate_window_minutes=120)
    cands = enumerate_candidates(HOURLY, key("E", "10:00"), cfg)
    assert cands.candidates == (key("E", "08:00"), key("E", "09:00"))


def test_candidates_span_entities_not_just_one():
    catalog = [key("A", "08:00"), key("B", "08:30", width=30), key("A", "09:00")]
    cands = enumerate_candidates(catalog, key("A", "09:00"), _config())
    assert cands.candidates == (key("A", "08:00"), key("B", "08:30", width=30))


def test_candidate_set_rejects_non_earlier_members():
    with pytest.raises(ValueError):
        CandidateSet(target=HOURLY[1], candidates=(HOURLY[2],), covariate_names=())


def _linear_panel(n_days=200, sd=0.1, seed=0):
    # a[3] = 2*a[0] + 1*a[1] + noise; a[2] is an unrelated distractor
    rng = np.random.default_rng(seed)
    catalog = HOURLY[:4]
    a0 = rng.normal(10, 2, n_days)
    a1 = rng.normal(5, 1.5, n_days)
    a2 = rng.normal(7, 1, n_days)
    a3 = 2 * a0 + a1 + rng.normal(0, sd, n_days)
    return make_panel(catalog, day_labels(n_days) if n_days <= 31 else
                      [f"2024-{1 + d // 28:02d}-{1 + d % 28:02d}" for d in range(n_days)],
                      np.column_stack([a0, a1, a2, a3]))


def test_fit_node_recovers_a_planted_linear_rule():
    panel = _linear_panel()
    target = HOURLY[3]
    cfg = _config(lambda_path=[1.0, 0.3, 0.1, 0.03, 0.01])
    cands = enumerate_candidates(panel.catalog, target, cfg)
    node = fit_node(panel, target, cands, cfg)
    got = dict(zip(node.parents, node.parent_coeffs))
    assert set(got) == {HOURLY[0], HOURLY[1]}
    assert got[HOURLY[0]] == pytest.approx(2.0, abs=0.1)
    assert got[HOURLY[1]] == pytest.approx(1.0, abs=0.1)


def test_fit_node_respects_parent_cap():
    panel = _linear_panel()
    cfg = _config(lambda_path=[0.5, 0.1, 0.01, 0.001], max_parents=1)
    cands = enumerate_candidates(panel.catalog, HOURLY[3], cfg)
    node = fit_node(panel, HOURLY[3], cands, cfg)
    assert len(node.parents) <= 1


def test_fit_node_with_tiny_penalty_still_honors_cap_via_path_extension():
    # the user path 0.001 keeps all three candidates; the prepended
    # lambda_max fit is what makes a 0-parent model reachable
    panel = _linear_panel()
    cfg = _config(lam=0.001, max_parents=2)
    cands = enumerate_candidates(panel.catalog, HOURLY[3], cfg)
    node = fit_node(panel, HOURLY[3], cands, cfg)
    assert len(node.parents) <= 2


def test_fit_node_insufficient_history():
    panel = _linear_panel(n_days=9)
    cfg = _config(min_history_days=10)
    cands = enumerate_candidates(panel.catalog, HOURLY[3], cfg)
    with pytest.raises(InsufficientHistory) as exc:
        fit_node(panel, HOURLY[3], cands, cfg)
    assert "9 usable rows" in str(exc.value)


def test_missing_days_shrink_usable_history():
    panel = _linear_panel(n_days=20)
    values = panel.values.copy()
    values[:15, 0] = np.nan  # parent candidate missing on 15 days
    sparse = make_panel(panel.catalog, panel.days, values)
    cfg = _config(min_history_days=10)
    cands = enumerate_candidates(sparse.catalog, HOURLY[3], cfg)
    with pytest.raises(InsufficientHistory):
        fit_node(sparse, HOURLY[3], cands, cfg)


def test_constant_history_yields_intercept_only_constant_prediction():
    catalog = HOURLY[:2]
    values = np.column_stack([np.full(30, 4.0), np.full(30, 9.5)])
    panel = make_panel(catalog, day_labels(30), values)
    cfg = _config()
    cands = enumerate_candidates(catalog, HOURLY[1], cfg)
    node = fit_node(panel, HOURLY[1], cands, cfg)
    assert node.parents == ()
    assert node.intercept == 9.5


def test_intercept_only_node_for_never_observed_event(caplog):
    catalog = HOURLY[:2]
    values = np.column_stack([np.ones(12), np.full(12, np.nan)])
    panel = make_panel(catalog, day_labels(12), values)
    with caplog.at_level(logging.WARNING, logger="eventflow.builder"):
        node = intercept_only_node(panel, HOURLY[1], LinkFamily.GAUSSIAN_IDENTITY)
    assert node.train_mean == 0.0
    assert node.intercept == 0.0
    assert any("never observed" in r.message for r in caplog.records)


def test_build_graph_degrades_short_history_to_intercept_only(caplog):
    panel = _linear_panel(n_days=12)
    cfg = _config(min_history_days=30)
    with caplog.at_level(logging.WARNING, logger="eventflow.builder"):
        graph = build_graph(panel, cfg)
    assert len(graph.nodes) == 4
    assert all(node.is_intercept_only for node in graph.nodes.values())
    assert any("intercept-only" in r.message for r in caplog.records)


def test_build_graph_rejects_invalid_panel():
    panel = make_panel(HOURLY[:1], day_labels(3), [[1.0], [np.inf], [2.0]])
    with pytest.raises(InvalidPanel):
        build_graph(panel, _config())


def test_build_graph_single_event_catalog():
    panel = make_panel(HOURLY[:1], day_labels(15), np.arange(15.0).reshape(-1, 1))
    graph = build_graph(panel, _config())
    (node,) = graph.nodes.values()
    assert node.parents == ()
    assert node.intercept == 7.0


def test_build_is_invariant_to_day_order():
    panel = _linear_panel(n_days=60, seed=5)
    order = np.random.default_rng(1).permutation(60)
    shuffled = make_panel(
        panel.catalog,
        [panel.days[i] for i in order],
        panel.values[order],
    )
    cfg = _config(lambda_path=[0.5, 0.1, 0.02])
    a = graph_to_json(build_graph(panel, cfg))
    b = graph_to_json(build_graph(shuffled, cfg))
    assert a == b


def test_repeated_builds_are_byte_identical():
    panel = _linear_panel(n_days=80, seed=9)
    cfg = _config(lambda_path=[0.8, 0.2, 0.05])
    assert graph_to_json(build_graph(panel, cfg)) == graph_to_json(build_graph(panel, cfg))


def test_covariates_join_the_fit_but_not_the_cap():
    rng = np.random.default_rng(12)
    n = 120
    catalog = HOURLY[:2]
    cov = rng.normal(0, 2, n)
    a0 = rng.normal(10, 2, n)
    a1 = 1.5 * a0 + 3.0 * cov + rng.normal(0, 0.05, n)
    panel = make_panel(
        catalog,
        [f"2024-{1 + d // 28:02d}-{1 + d % 28:02d}" for d in range(n)],
        np.column_stack([a0, a1]),
        covariates=cov.reshape(-1, 1),
        covariate_names=("temperature",),
    )
    cfg = _config(lambda_path=[1.0, 0.1, 0.01], max_parents=1)
    cands = enumerate_candidates(catalog, HOURLY[1], cfg, covariate_names=("temperature",))
    node = fit_node(panel, HOURLY[1], cands, cfg)
    assert node.parents == (HOURLY[0],)
    got = dict(node.covariate_coeffs)
    assert got["temperature"] == pytest.approx(3.0, abs=0.1)


def test_build_graph_output_is_acyclic_and_capped():
    rng = np.random.default_rng(77)
    for trial in range(10):
        n_events = int(rng.integers(2, 7))
        n_days = int(rng.integers(12, 40))
        catalog = [key("E", f"{6 + i:02d}:00") for i in range(n_events)]
        values = rng.normal(5, 2, size=(n_days, n_events))
        mask = rng.random(size=values.shape) < 0.1
        values[mask] = np.nan
        panel = make_panel(
            catalog,
            [f"2024-{1 + d // 28:02d}-{1 + d % 28:02d}" for d in range(n_days)],
            values,
        )
        cap = int(rng.integers(1, 4))
        cfg = _config(lambda_path=[0.5, 0.05, 0.005], max_parents=cap, min_history_days=5)
        graph = build_graph(panel, cfg)
        position = {k: i for i, k in enumerate(graph.topo_order)}
        for parent, child, _ in graph.edges():
            assert position[parent] < position[child]
            assert parent.time_bucket < child.time_bucket
        for node in graph.nodes.values():
            assert len(node.parents) <= cap
