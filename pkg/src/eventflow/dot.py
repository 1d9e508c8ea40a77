"""Graphviz DOT rendering of a fitted graph.

Visual conventions: each node is labelled with the hour its bucket starts,
filled with a per-entity color; edges are green for positive coefficients
and red for negative ones, with opacity and pen width scaled by |coeff|
relative to the largest |coeff| in the graph.
"""

from __future__ import annotations

from dataclasses import dataclass

from .graph import DependencyGraph

_POSITIVE = "#00aa00"
_NEGATIVE = "#cc0000"

# light fills, one per entity, cycled in sorted-entity order
_PALETTE = (
    "#a6cee3",
    "#b2df8a",
    "#fdbf6f",
    "#cab2d6",
    "#fb9a99",
    "#ffff99",
    "#80b1d3",
    "#ccebc5",
)


@dataclass(frozen=True)
class DotOptions:
    """``min_abs_weight`` drops edges whose |coeff| falls below it."""

    min_abs_weight: float = 0.0
    rankdir: str = "LR"
    graph_name: str = "eventflow"


def _quote(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def export_dot(graph: DependencyGraph, options: DotOptions | None = None) -> str:
    """Render the graph as DOT text (deterministic for a given graph)."""
    opt = options or DotOptions()
    entities = sorted({k.entity for k in graph.nodes})
    fill = {e: _PALETTE[i % len(_PALETTE)] for i, e in enumerate(entities)}

    lines = [f"digraph {opt.graph_name} {{"]
    lines.append(f"  rankdir={opt.rankdir};")
    lines.append("  node [shape=circle, style=filled];")
    for key in graph.topo_order:
        lines.append(
            f"  {_quote(key.label())} [label={_quote(str(key.hour))}, "
            f"fillcolor={_quote(fill[key.entity])}];"
        )

    max_abs = max((abs(c) for _, _, c in graph.edges()), default=0.0)
    for parent, child, coeff in graph.edges():
        if abs(coeff) < opt.min_abs_weight:
            continue
        w = abs(coeff) / max_abs if max_abs > 0 else 0.0
        alpha = format(round(255 * w), "02x")
        color = (_POSITIVE if coeff > 0 else _NEGATIVE) + alpha
        penwidth = 0.5 + 2.5 * w
        lines.append(
            f"  {_quote(parent.label())} -> {_quote(child.label())} "
            f'[color="{color}", penwidth={penwidth:.2f}];'
        )
    lines.append("}")
    return "\n".join(lines) + "\n"
