"""Layered base graph and directed attack graph construction.

The base graph mirrors the scenario topology: objects as nodes, with
relationship edges split into intra-layer and vertical (cross-layer) sets.
The attack graph is independent of that topology: every a_result of every
attack record becomes one directed edge from the attacked object to the
affected object, so a record with k results contributes exactly k edges.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import canon
from .model import AttackRecord, RelationshipEdge, ScenarioDoc, UnknownIdError
from .scenario import require_valid


@dataclass(frozen=True)
class HierarchicalGraph:
    """Per-layer object graphs joined by vertical relationship edges."""

    layers: dict[str, str]  # object id -> layer
    intra_edges: tuple[RelationshipEdge, ...]
    vertical_edges: tuple[RelationshipEdge, ...]

    def nodes(self) -> tuple[str, ...]:
        return tuple(sorted(self.layers))

    def neighbors(self, object_id: str) -> tuple[str, ...]:
        """Objects reachable over one relationship edge, honoring direction."""
        if object_id not in self.layers:
            raise UnknownIdError(f"unknown object {object_id!r}")
        out = set()
        for edge in self.intra_edges + self.vertical_edges:
            if edge.from_id == object_id:
                out.add(edge.to_id)
            elif not edge.directed and edge.to_id == object_id:
                out.add(edge.from_id)
        return tuple(sorted(out))

    def connects(self, a: str, b: str) -> bool:
        return any(e.touches(a, b) for e in self.intra_edges + self.vertical_edges)


@dataclass(frozen=True)
class AttackEdge:
    edge_id: str
    attack_id: str
    from_id: str
    to_id: str
    permission: str
    cost: float
    severity: float
    detect_prob: float

    def as_dict(self) -> dict:
        return {
            "edge_id": self.edge_id,
            "attack_id": self.attack_id,
            "from": self.from_id,
            "to": self.to_id,
            "permission": self.permission,
            "cost": self.cost,
            "severity": self.severity,
            "detect_prob": self.detect_prob,
        }


@dataclass(frozen=True)
class AttackGraph:
    base: HierarchicalGraph
    edges: tuple[AttackEdge, ...]  # sorted by edge_id
    by_id: dict[str, AttackEdge]
    by_from: dict[str, tuple[AttackEdge, ...]]
    by_attack: dict[str, tuple[AttackEdge, ...]]
    attacks: dict[str, AttackRecord]

    def edge(self, edge_id: str) -> AttackEdge:
        found = self.by_id.get(edge_id)
        if found is None:
            raise UnknownIdError(f"unknown attack edge {edge_id!r}")
        return found


def build_base_graph(doc: ScenarioDoc) -> HierarchicalGraph:
    require_valid(doc)
    layers = {o.id: o.layer for o in doc.objects}
    intra = tuple(e for e in doc.relationships if layers[e.from_id] == layers[e.to_id])
    vertical = tuple(e for e in doc.relationships if layers[e.from_id] != layers[e.to_id])
    return HierarchicalGraph(layers=layers, intra_edges=intra, vertical_edges=vertical)


def build_attack_graph(doc: ScenarioDoc, base: HierarchicalGraph) -> AttackGraph:
    require_valid(doc)
    edges = []
    for record in doc.attacks:
        for i, result in enumerate(record.a_results):
            edges.append(
                AttackEdge(
                    edge_id=f"{record.id}#{i}",
                    attack_id=record.id,
                    from_id=record.object,
                    to_id=result.object,
                    permission=result.permission,
                    cost=record.cost,
                    severity=record.severity,
                    detect_prob=record.detect_prob,
                )
            )
    edges.sort(key=lambda e: e.edge_id)
    by_from: dict[str, list[AttackEdge]] = {}
    by_attack: dict[str, list[AttackEdge]] = {}
    for e in edges:
        by_from.setdefault(e.from_id, []).append(e)
        by_attack.setdefault(e.attack_id, []).append(e)
    return AttackGraph(
        base=base,
        edges=tuple(edges),
        by_id={e.edge_id: e for e in edges},
        by_from={k: tuple(v) for k, v in by_from.items()},
        by_attack={k: tuple(v) for k, v in by_attack.items()},
        attacks=doc.attack_by_id(),
    )


def neighbors(graph: AttackGraph, object_id: str) -> tuple[AttackEdge, ...]:
    """All attack edges leaving an object, in edge-id order."""
    if object_id not in graph.base.layers:
        raise UnknownIdError(f"unknown object {object_id!r}")
    return graph.by_from.get(object_id, ())


# --- exports -----------------------------------------------------------------

def graphs_to_dict(doc: ScenarioDoc, base: HierarchicalGraph, graph: AttackGraph) -> dict:
    def rel_list(edges):
        return [e.as_dict() for e in sorted(edges, key=lambda e: (e.from_id, e.to_id, e.kind))]

    return {
        "base": {
            "nodes": [
                {"id": o.id, "layer": o.layer, "category": o.category, "label": o.label}
                for o in sorted(doc.objects, key=lambda o: o.id)
            ],
            "intra_edges": rel_list(base.intra_edges),
            "vertical_edges": rel_list(base.vertical_edges),
        },
        "attack": {"edges": [e.as_dict() for e in graph.edges]},
        "object_count": len(doc.objects),
        "attack_edge_count": len(graph.edges),
    }


def graphs_to_json(doc: ScenarioDoc, base: HierarchicalGraph, graph: AttackGraph) -> str:
    return canon.dumps(graphs_to_dict(doc, base, graph)) + "\n"


def _dot_quote(s: str) -> str:
    return '"' + s.replace('"', '\\"') + '"'


def graphs_to_dot(doc: ScenarioDoc, base: HierarchicalGraph, graph: AttackGraph) -> str:
    """Render both graphs as one DOT digraph, layers drawn as clusters.

    Output is byte-stable for a fixed scenario: clusters, nodes, and edges
    are emitted in sorted order.
    """
    lines = ["digraph scenario {", "  rankdir=TB;", "  node [shape=box];"]
    layer_order = ("application", "service", "virtual", "physical")
    objects = sorted(doc.objects, key=lambda o: o.id)
    for layer in layer_order:
        members = [o for o in objects if o.layer == layer]
        if not members:
            continue
        lines.append(f"  subgraph cluster_{layer} {{")
        lines.append(f"    label={_dot_quote(layer)};")
        for o in members:
            label = f"{o.id}\\n{o.label}" if o.label else o.id
            lines.append(f"    {_dot_quote(o.id)} [label={_dot_quote(label)}];")
        lines.append("  }")
    rels = sorted(base.intra_edges + base.vertical_edges, key=lambda e: (e.from_id, e.to_id, e.kind))
    for e in rels:
        attrs = [f"label={_dot_quote(e.kind)}", "color=gray50", "fontcolor=gray50"]
        if not e.directed:
            attrs.append("dir=none")
        lines.append(f"  {_dot_quote(e.from_id)} -> {_dot_quote(e.to_id)} [{', '.join(attrs)}];")
    for e in graph.edges:
        label = f"{e.edge_id} {e.permission}"
        lines.append(
            f"  {_dot_quote(e.from_id)} -> {_dot_quote(e.to_id)} "
            f"[label={_dot_quote(label)}, color=red3, fontcolor=red3, style=bold];"
        )
    lines.append("}")
    return "\n".join(lines) + "\n"
