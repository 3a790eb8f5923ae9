"""Graph-state algebra: local complementation and Pauli-measurement rewrites.

A ``GraphState`` is an adjacency structure over stable integer vertex ids
plus a per-vertex local Clifford ("vertex operator"); with all vertex
operators equal to the identity the represented state is
``prod_{(u,v) in E} CZ_uv |+>^n``.  All public operations are functional
(they return a new instance) and purely combinatorial; measurement outcomes
are inputs, drawn by the caller from a tableau backend or a fair coin, which
keeps this module deterministic.

Adjacency is stored as sorted sets per vertex rather than a literal bit
matrix so that vertex deletion stays cheap at 10^4-vertex protocol scale;
``adjacency_matrix`` materializes the dense form on demand.
"""

from __future__ import annotations

import json

import numpy as np

from sicluster import cliffords
from sicluster.cliffords import Clifford1

_AXIS_OF = {"X": 0, "Y": 1, "Z": 2}


def _basis_name(basis) -> str:
    name = getattr(basis, "value", basis)
    if name not in _AXIS_OF:
        raise ValueError(f"basis must be X, Y or Z, got {basis!r}")
    return name


class MeasurementOutcomeRecord:
    """Ordered record of (vertex, basis, outcome) triples, each vertex once.

    Protocol transcripts that re-prepare and re-measure a qubit (the square
    lattice variant does) construct the record with ``allow_repeats=True``;
    each entry then refers to one preparation lifetime of the qubit.
    """

    def __init__(self, allow_repeats: bool = False):
        self._entries: list[tuple[int, str, int]] = []
        self._seen: set[int] = set()
        self._allow_repeats = allow_repeats

    def append(self, vertex: int, basis, outcome: int) -> None:
        if vertex in self._seen and not self._allow_repeats:
            raise ValueError(f"vertex {vertex} measured twice")
        self._seen.add(vertex)
        self._entries.append((vertex, _basis_name(basis), outcome))

    def entries(self) -> list[tuple[int, str, int]]:
        return list(self._entries)

    def outcome_of(self, vertex: int) -> int:
        for v, _, m in self._entries:
            if v == vertex:
                return m
        raise KeyError(vertex)

    def __len__(self) -> int:
        return len(self._entries)

    def __iter__(self):
        return iter(self._entries)

    def __repr__(self) -> str:
        return f"MeasurementOutcomeRecord({self._entries!r})"


class GraphState:
    """Graph plus vertex operators; see module docstring for semantics."""

    def __init__(self, vertices=(), edges=(), vertex_ops=None):
        self._adj: dict[int, set[int]] = {int(v): set() for v in vertices}
        for u, v in edges:
            self._add_edge(int(u), int(v))
        self.vertex_ops: dict[int, Clifford1] = {}
        if vertex_ops:
            for v, op in vertex_ops.items():
                if int(v) not in self._adj:
                    raise KeyError(f"vertex op on unknown vertex {v}")
                if not op.is_identity():
                    self.vertex_ops[int(v)] = op

    # -- primitive structure -------------------------------------------------

    def _add_edge(self, u: int, v: int) -> None:
        if u == v:
            raise ValueError("self-loops are not allowed")
        if u not in self._adj or v not in self._adj:
            raise KeyError(f"unknown vertex in edge ({u}, {v})")
        self._adj[u].add(v)
        self._adj[v].add(u)

    def vertices(self) -> list[int]:
        return sorted(self._adj)

    def edges(self) -> list[tuple[int, int]]:
        out = []
        for v in sorted(self._adj):
            for u in self._adj[v]:
                if u > v:
                    out.append((v, u))
        return sorted(out)

    def neighbors(self, v: int) -> set[int]:
        return set(self._adj[v])

    def degree(self, v: int) -> int:
        return len(self._adj[v])

    def has_edge(self, u: int, v: int) -> bool:
        return v in self._adj.get(u, ())

    def op(self, v: int) -> Clifford1:
        return self.vertex_ops.get(v, cliffords.IDENTITY)

    @property
    def n(self) -> int:
        return len(self._adj)

    def copy(self) -> "GraphState":
        g = GraphState.__new__(GraphState)
        g._adj = {v: set(nbrs) for v, nbrs in self._adj.items()}
        g.vertex_ops = dict(self.vertex_ops)
        return g

    def relabeled(self, mapping: dict[int, int]) -> "GraphState":
        g = GraphState(
            (mapping[v] for v in self._adj),
            ((mapping[u], mapping[v]) for u, v in self.edges()),
        )
        g.vertex_ops = {mapping[v]: op for v, op in self.vertex_ops.items()}
        return g

    def adjacency_matrix(self) -> np.ndarray:
        ids = self.vertices()
        index = {v: i for i, v in enumerate(ids)}
        mat = np.zeros((len(ids), len(ids)), np.uint8)
        for u, v in self.edges():
            mat[index[u], index[v]] = 1
            mat[index[v], index[u]] = 1
        return mat

    def edge_set(self) -> frozenset[tuple[int, int]]:
        return frozenset(self.edges())

    def validate(self) -> None:
        for v, nbrs in self._adj.items():
            if v in nbrs:
                raise AssertionError(f"self-loop at {v}")
            for u in nbrs:
                if v not in self._adj[u]:
                    raise AssertionError(f"asymmetric edge ({v},{u})")

    def __eq__(self, other) -> bool:
        return (isinstance(other, GraphState) and self._adj == other._adj
                and self.vertex_ops == other.vertex_ops)

    def __repr__(self) -> str:
        return f"GraphState(n={self.n}, edges={len(self.edges())})"

    # -- spec operations ------------------------------------------------------

    def add_vertex(self, v: int) -> "GraphState":
        g = self.copy()
        if v in g._adj:
            raise ValueError(f"vertex {v} already present")
        g._adj[int(v)] = set()
        return g

    def toggle_edge(self, u: int, v: int) -> "GraphState":
        """Flip edge (u, v); both endpoints must carry identity vertex ops."""
        if u == v:
            raise ValueError("cannot toggle a self-loop")
        for w in (u, v):
            if w not in self._adj:
                raise KeyError(f"unknown vertex {w}")
            if not self.op(w).is_identity():
                raise ValueError(
                    f"toggle_edge({u},{v}): vertex {w} carries a non-identity "
                    "operator; CZ does not commute past it")
        g = self.copy()
        if v in g._adj[u]:
            g._adj[u].discard(v)
            g._adj[v].discard(u)
        else:
            g._adj[u].add(v)
            g._adj[v].add(u)
        return g

    def local_complement(self, v: int) -> "GraphState":
        """Complement the subgraph on N(v), preserving the quantum state.

        The adjacency change is compensated by sqrt(-iX)^dag at v and
        sqrt(iZ)^dag on each neighbor, folded into the vertex operators.
        """
        if v not in self._adj:
            raise KeyError(f"unknown vertex {v}")
        g = self.copy()
        nbrs = sorted(g._adj[v])
        _complement_adj(g._adj, v)
        g._compose_op(v, cliffords.SQRT_MINUS_IX.inverse())
        for u in nbrs:
            g._compose_op(u, cliffords.SQRT_PLUS_IZ.inverse())
        return g

    def _compose_op(self, v: int, correction: Clifford1) -> None:
        new = self.op(v).compose(correction)
        if new.is_identity():
            self.vertex_ops.pop(v, None)
        else:
            self.vertex_ops[v] = new

    def measure_pauli(self, v: int, basis, outcome: int):
        """Measure vertex v in a Pauli basis with the given outcome (+-1).

        Returns (graph without v, corrections) where corrections is the list
        of (vertex, Clifford1) byproduct operators that were folded into the
        remaining vertex operators.  The returned graph represents the exact
        post-measurement state of the represented state.
        """
        if v not in self._adj:
            raise KeyError(f"unknown vertex {v}")
        if outcome not in (1, -1):
            raise ValueError("outcome must be +1 or -1")
        name = _basis_name(basis)
        g = self.copy()
        u_v = g.vertex_ops.pop(v, cliffords.IDENTITY)
        eff_axis, eff_sign = u_v.inverse().conj_pauli(_AXIS_OF[name], 0)
        m_eff = outcome if eff_sign == 0 else -outcome
        nbrs = sorted(g._adj[v])

        corrections: list[tuple[int, Clifford1]] = []
        if eff_axis == 2:  # Z
            del_vertex(g._adj, v)
            if m_eff == -1:
                corrections = [(u, cliffords.Z) for u in nbrs]
        elif eff_axis == 1:  # Y
            _complement_adj(g._adj, v)
            del_vertex(g._adj, v)
            fix = cliffords.SQRT_MINUS_IZ if m_eff == 1 else cliffords.SQRT_PLUS_IZ
            corrections = [(u, fix) for u in nbrs]
        else:  # X
            if not nbrs:
                if m_eff != 1:
                    raise ValueError(
                        "X measurement of an isolated vertex is deterministically +1")
                del_vertex(g._adj, v)
            else:
                b0 = nbrs[0]
                nb0 = set(g._adj[b0])
                nv = set(nbrs)
                _complement_adj(g._adj, b0)
                _complement_adj(g._adj, v)
                _complement_adj(g._adj, b0)
                del_vertex(g._adj, v)
                if m_eff == 1:
                    corrections = [(b0, cliffords.SQRT_PLUS_IY)]
                    corrections += [(u, cliffords.Z) for u in sorted(nv - nb0 - {b0})]
                else:
                    corrections = [(b0, cliffords.SQRT_MINUS_IY)]
                    corrections += [(u, cliffords.Z) for u in sorted(nb0 - nv - {v})]
        for u, c in corrections:
            g._compose_op(u, c)
        return g, corrections

    def equal_up_to_local_cliffords(self, other: "GraphState", max_orbit: int = 500_000):
        """Decide LC equivalence of the two adjacencies by orbit search.

        Returns (flag, witness): witness is the vertex sequence whose local
        complementations map self's adjacency onto other's (empty when they
        already match); None when inequivalent.  Vertex operators are
        ignored -- this compares topologies modulo local Cliffords.
        """
        if set(self._adj) != set(other._adj):
            raise ValueError("vertex sets differ")
        target = other.edge_set()
        start = self.edge_set()
        if start == target:
            return True, []
        verts = self.vertices()
        seen = {start: []}
        frontier = [start]
        while frontier:
            nxt = []
            for edges in frontier:
                adj = _edges_to_adj(verts, edges)
                base = seen[edges]
                for v in verts:
                    if not adj[v]:
                        continue
                    a2 = {u: set(s) for u, s in adj.items()}
                    _complement_adj(a2, v)
                    key = _adj_to_edges(a2)
                    if key in seen:
                        continue
                    seq = base + [v]
                    if key == target:
                        return True, seq
                    seen[key] = seq
                    nxt.append(key)
                    if len(seen) > max_orbit:
                        raise RuntimeError(
                            f"LC orbit exceeded {max_orbit} graphs; "
                            "equal_up_to_local_cliffords is bounded to small n")
            frontier = nxt
        return False, None

    # -- export ---------------------------------------------------------------

    def export_dot(self) -> str:
        lines = ["graph cluster {"]
        for v in self.vertices():
            lines.append(f'  {v} [op="{self.op(v).name}"];')
        for u, v in self.edges():
            lines.append(f"  {u} -- {v};")
        lines.append("}")
        return "\n".join(lines) + "\n"

    def export_json(self) -> str:
        doc = {
            "vertices": [{"id": v, "op": self.op(v).name} for v in self.vertices()],
            "edges": [list(e) for e in self.edges()],
        }
        return json.dumps(doc, sort_keys=True, separators=(",", ": ")) + "\n"


def export(g: GraphState, fmt: str) -> bytes:
    """Serialize a graph state; fmt is "dot" or "json"."""
    fmt = fmt.lower()
    if fmt == "dot":
        return g.export_dot().encode()
    if fmt == "json":
        return g.export_json().encode()
    raise ValueError(f"unknown export format {fmt!r}")


def graph_from_json(text: str) -> GraphState:
    doc = json.loads(text)
    g = GraphState((v["id"] for v in doc["vertices"]), doc["edges"])
    for v in doc["vertices"]:
        if v.get("op", "I") != "I":
            g.vertex_ops[v["id"]] = cliffords.by_name(v["op"])
    return g


def _complement_adj(adj: dict[int, set[int]], v: int) -> None:
    nbrs = sorted(adj[v])
    for i, a in enumerate(nbrs):
        for b in nbrs[i + 1:]:
            if b in adj[a]:
                adj[a].discard(b)
                adj[b].discard(a)
            else:
                adj[a].add(b)
                adj[b].add(a)


def del_vertex(adj: dict[int, set[int]], v: int) -> None:
    for u in adj[v]:
        adj[u].discard(v)
    del adj[v]


def _edges_to_adj(verts, edges):
    adj = {v: set() for v in verts}
    for u, v in edges:
        adj[u].add(v)
        adj[v].add(u)
    return adj


def _adj_to_edges(adj):
    return frozenset((v, u) if v < u else (u, v)
                     for v, nbrs in adj.items() for u in nbrs if u != v) or frozenset()


def line_graph(n: int, start: int = 0) -> GraphState:
    """A 1-D cluster: vertices start..start+n-1 in a path."""
    verts = range(start, start + n)
    return GraphState(verts, [(v, v + 1) for v in range(start, start + n - 1)])


def grid_graph(lx: int, ly: int) -> GraphState:
    """An lx-by-ly square-lattice cluster; vertex id = i * ly + j."""
    verts = range(lx * ly)
    edges = []
    for i in range(lx):
        for j in range(ly):
            if i + 1 < lx:
                edges.append((i * ly + j, (i + 1) * ly + j))
            if j + 1 < ly:
                edges.append((i * ly + j, i * ly + j + 1))
    return GraphState(verts, edges)
