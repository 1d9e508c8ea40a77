"""Dependency graph model: fitted node regressions plus (de)serialization.

A graph holds one fitted sparse GLM per event. Edges point from a parent
event (earlier in the day) to the child whose regression uses it, so the
edge set is a DAG whenever the builder's strict time-precedence rule held.
``topo_sort`` does not assume that: it runs real cycle detection so that a
corrupted model file is caught on load instead of hanging propagation.
"""

from __future__ import annotations

import heapq
import json
from dataclasses import dataclass
from pathlib import Path
from types import MappingProxyType
from typing import IO, Iterable, Iterator, Mapping

from .errors import CycleDetected, SchemaMismatch
from .events import BuildConfig, EventKey, LinkFamily


@dataclass(frozen=True)
class NodeModel:
    """Fitted sparse GLM for one event.

    ``parents`` lists only the candidate events whose fitted coefficient
    survived the sparsity penalty; ``parent_coeffs`` aligns with it and
    contains no zeros. ``covariate_coeffs`` likewise keeps only the nonzero
    static-covariate terms, keyed by covariate name. Coefficients and the
    intercept are on the original data scale.
    """

    target: EventKey
    family: LinkFamily
    parents: tuple[EventKey, ...]
    parent_coeffs: tuple[float, ...]
    covariate_coeffs: tuple[tuple[str, float], ...]
    intercept: float
    train_mean: float
    lambda_used: float

    def __post_init__(self):
        object.__setattr__(self, "parents", tuple(self.parents))
        object.__setattr__(self, "parent_coeffs", tuple(float(c) for c in self.parent_coeffs))
        object.__setattr__(
            self, "covariate_coeffs", tuple((n, float(c)) for n, c in self.covariate_coeffs)
        )
        if len(self.parents) != len(self.parent_coeffs):
            raise ValueError("parents and parent_coeffs must align")
        if any(c == 0.0 for c in self.parent_coeffs):
            raise ValueError("parent_coeffs must be nonzero (drop zero-weight parents)")
        if any(c == 0.0 for _, c in self.covariate_coeffs):
            raise ValueError("covariate_coeffs must be nonzero")
        if not self.lambda_used >= 0:
            raise ValueError("lambda_used must be >= 0")

    @property
    def is_intercept_only(self) -> bool:
        return not self.parents and not self.covariate_coeffs


@dataclass(frozen=True)
class DependencyGraph:
    """DAG of node models, with a cached topological order.

    Construct through :meth:`from_nodes`, which verifies that every
    referenced parent exists and that the edge set is acyclic.
    """

    nodes: Mapping[EventKey, NodeModel]
    topo_order: tuple[EventKey, ...]
    family: LinkFamily
    build_config: BuildConfig
    covariate_names: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "nodes", MappingProxyType(dict(self.nodes)))
        object.__setattr__(self, "topo_order", tuple(self.topo_order))
        object.__setattr__(self, "covariate_names", tuple(self.covariate_names))

    @classmethod
    def from_nodes(
        cls,
        nodes: Iterable[NodeModel],
        family: LinkFamily,
        build_config: BuildConfig,
        covariate_names: Iterable[str] = (),
    ) -> "DependencyGraph":
        node_map = {model.target: model for model in nodes}
        for model in node_map.values():
            for parent in model.parents:
                if parent not in node_map:
                    raise SchemaMismatch(
                        f"node {model.target} references unknown parent {parent}"
                    )
        graph = cls(
            nodes=node_map,
            topo_order=(),
            family=family,
            build_config=build_config,
            covariate_names=tuple(covariate_names),
        )
        order = topo_sort(graph)
        object.__setattr__(graph, "topo_order", tuple(order))
        return graph

    def edges(self) -> Iterator[tuple[EventKey, EventKey, float]]:
        """Yield (parent, child, coefficient) in deterministic order."""
        for child in self.topo_order:
            model = self.nodes[child]
            for parent, coeff in zip(model.parents, model.parent_coeffs):
                yield parent, child, coeff

    def n_edges(self) -> int:
        return sum(len(self.nodes[k].parents) for k in self.nodes)


def topo_sort(graph: DependencyGraph) -> list[EventKey]:
    """Order nodes so every parent precedes every child.

    Kahn's algorithm with a (time_bucket, entity) min-heap: for graphs whose
    edges all point forward in time this returns exactly the catalog sorted
    by (time_bucket, entity), and ties are always broken the same way.

    Raises:
        CycleDetected: the edge set is cyclic, which signals a corrupted
            model file (the builder cannot produce one).
    """
    def ident(k: EventKey) -> tuple[int, str, int]:
        return (k.time_bucket, k.entity, k.bucket_width)

    by_ident = {ident(k): k for k in graph.nodes}
    indegree = {k: 0 for k in graph.nodes}
    children: dict[EventKey, list[EventKey]] = {k: [] for k in graph.nodes}
    for child, model in graph.nodes.items():
        for parent in model.parents:
            indegree[child] += 1
            children[parent].append(child)

    ready = [i for i, key in by_ident.items() if indegree[key] == 0]
    heapq.heapify(ready)
    order: list[EventKey] = []
    while ready:
        key = by_ident[heapq.heappop(ready)]
        order.append(key)
        for child in children[key]:
            indegree[child] -= 1
            if indegree[child] == 0:
                heapq.heappush(ready, ident(child))
    if len(order) != len(graph.nodes):
        stuck = sorted((k for k, d in indegree.items() if d > 0), key=EventKey.sort_key)
        raise CycleDetected(f"cycle through {len(stuck)} nodes, e.g. {stuck[0]}")
    return order


# --- model file -------------------------------------------------------------
#
# A model is one JSON document:
#   {family, build_config, covariate_names, nodes: [{target, parents: [{key,
#    coeff}], covariate_coeffs: [[name, coeff]], intercept, train_mean,
#    lambda_used}]}
# Keys are "entity@HH:MM+width" labels; floats rely on json's repr round-trip.

_FORMAT = "eventflow-model-v1"


def _config_to_json(config: BuildConfig) -> dict:
    return {
        "family": config.family.value,
        "lambda": config.lam,
        "lambda_path": list(config.lambda_path) if config.lambda_path is not None else None,
        "max_parents": config.max_parents,
        "min_history_days": config.min_history_days,
        "standardize": config.standardize,
        "candidate_window_minutes": config.candidate_window_minutes,
    }


def _config_from_json(obj: dict) -> BuildConfig:
    try:
        path = obj["lambda_path"]
        return BuildConfig(
            family=LinkFamily(obj["family"]),
            lam=obj["lambda"],
            lambda_path=tuple(path) if path is not None else None,
            max_parents=obj["max_parents"],
            min_history_days=obj["min_history_days"],
            standardize=obj["standardize"],
            candidate_window_minutes=obj["candidate_window_minutes"],
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaMismatch(f"bad build_config in model file: {exc}") from exc


def graph_to_json(graph: DependencyGraph) -> dict:
    nodes = []
    for key in graph.topo_order:
        model = graph.nodes[key]
        nodes.append(
            {
                "target": key.label(),
                "parents": [
                    {"key": p.label(), "coeff": c}
                    for p, c in zip(model.parents, model.parent_coeffs)
                ],
                "covariate_coeffs": [[n, c] for n, c in model.covariate_coeffs],
                "intercept": model.intercept,
                "train_mean": model.train_mean,
                "lambda_used": model.lambda_used,
            }
        )
    return {
        "format": _FORMAT,
        "family": graph.family.value,
        "build_config": _config_to_json(graph.build_config),
        "covariate_names": list(graph.covariate_names),
        "nodes": nodes,
    }


def graph_from_json(obj: dict) -> DependencyGraph:
    if not isinstance(obj, dict) or obj.get("format") != _FORMAT:
        raise SchemaMismatch(f"not a {_FORMAT} document")
    try:
        family = LinkFamily(obj["family"])
        config = _config_from_json(obj["build_config"])
        covariate_names = tuple(obj.get("covariate_names", ()))
        nodes = []
        for entry in obj["nodes"]:
            nodes.append(
                NodeModel(
                    target=EventKey.from_label(entry["target"]),
                    family=family,
                    parents=tuple(EventKey.from_label(p["key"]) for p in entry["parents"]),
                    parent_coeffs=tuple(p["coeff"] for p in entry["parents"]),
                    covariate_coeffs=tuple((n, c) for n, c in entry["covariate_coeffs"]),
                    intercept=entry["intercept"],
                    train_mean=entry["train_mean"],
                    lambda_used=entry["lambda_used"],
                )
            )
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaMismatch(f"bad model file: {exc}") from exc
    return DependencyGraph.from_nodes(nodes, family, config, covariate_names)


def save_model(graph: DependencyGraph, path: str | Path | IO[str]) -> None:
    text = json.dumps(graph_to_json(graph), indent=2) + "\n"
    if hasattr(path, "write"):
        path.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def load_model(path: str | Path | IO[str]) -> DependencyGraph:
    if hasattr(path, "read"):
        obj = json.load(path)
    else:
        with open(path, encoding="utf-8") as fh:
            obj = json.load(fh)
    return graph_from_json(obj)
