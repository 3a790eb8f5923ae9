"""Graph-state algebra: LC, measurement rewrites, LC-equivalence, export."""

import json

import numpy as np
import pytest

from conftest import dense_measure_graph, random_graph
from sicluster import cliffords
from sicluster.graphstate import (
    GraphState,
    MeasurementOutcomeRecord,
    export,
    graph_from_json,
    grid_graph,
    line_graph,
)
from sicluster.statevec import graph_to_statevector
from sicluster.tableau import from_graph_state, same_stabilizer_group


class TestToggleEdge:
    def test_toggle_and_involution(self):
        g = GraphState(range(2))
        g2 = g.toggle_edge(0, 1)
        assert g2.edges() == [(0, 1)]
        assert g2.toggle_edge(0, 1).edges() == []

    def test_self_loop_rejected(self):
        with pytest.raises(ValueError):
            GraphState(range(2)).toggle_edge(0, 0)

    def test_non_identity_op_rejected(self):
        g = GraphState(range(2), vertex_ops={0: cliffords.S})
        with pytest.raises(ValueError):
            g.toggle_edge(0, 1)

    def test_toggle_equals_cz_on_tableau(self):
        rng = np.random.default_rng(15)
        for _ in range(40):
            n = int(rng.integers(2, 9))
            g = random_graph(n, rng)
            u, v = (int(x) for x in rng.choice(n, 2, replace=False))
            t = from_graph_state(g).apply_gate("CZ", u, v)
            t2 = from_graph_state(g.toggle_edge(u, v))
            assert same_stabilizer_group(t, t2)


class TestLocalComplement:
    def test_star_becomes_triangle(self):
        star = GraphState(range(4), [(0, 1), (0, 2), (0, 3)])
        lc = star.local_complement(0)
        for e in [(1, 2), (1, 3), (2, 3), (0, 1), (0, 2), (0, 3)]:
            assert lc.has_edge(*e)

    def test_adjacency_involution(self):
        g = line_graph(5)
        assert g.local_complement(2).local_complement(2).edge_set() == g.edge_set()

    def test_unknown_vertex(self):
        with pytest.raises(KeyError):
            line_graph(3).local_complement(7)

    def test_state_preserved_100_random_graphs(self):
        rng = np.random.default_rng(10)
        for _ in range(100):
            n = int(rng.integers(2, 10))
            g = random_graph(n, rng, with_ops=bool(rng.integers(2)))
            v = int(rng.integers(n))
            g2 = g.local_complement(v)
            _, sv1 = graph_to_statevector(g)
            _, sv2 = graph_to_statevector(g2)
            assert sv1.fidelity(sv2) > 1 - 1e-9

    def test_state_preserved_via_tableau(self):
        rng = np.random.default_rng(11)
        for _ in range(60):
            n = int(rng.integers(2, 10))
            g = random_graph(n, rng)
            v = int(rng.integers(n))
            t1 = from_graph_state(g)
            t2 = from_graph_state(g.local_complement(v))
            assert same_stabilizer_group(t1, t2)


class TestMeasurePauli:
    def test_y_center_of_star_makes_triangle(self):
        star = GraphState(range(4), [(0, 1), (0, 2), (0, 3)])
        g, _ = star.measure_pauli(0, "Y", 1)
        assert g.edge_set() == frozenset({(1, 2), (1, 3), (2, 3)})

    def test_z_isolated_vertex_removed(self):
        g = GraphState(range(3), [(1, 2)])
        g2, corr = g.measure_pauli(0, "Z", -1)
        assert g2.vertices() == [1, 2] and g2.edges() == [(1, 2)]
        assert corr == []

    def test_z_end_of_path_correction(self):
        path = line_graph(3)
        g_plus, corr_plus = path.measure_pauli(0, "Z", 1)
        assert corr_plus == [] and g_plus.edges() == [(1, 2)]
        g_minus, corr_minus = path.measure_pauli(0, "Z", -1)
        assert g_minus.edges() == [(1, 2)]
        assert corr_minus == [(1, cliffords.Z)]
        assert g_minus.op(1) == cliffords.Z

    def test_x_isolated_requires_plus(self):
        g = GraphState(range(1))
        g2, _ = g.measure_pauli(0, "X", 1)
        assert g2.n == 0
        with pytest.raises(ValueError):
            g.measure_pauli(0, "X", -1)

    def test_z_never_touches_remote_edges(self):
        rng = np.random.default_rng(12)
        for _ in range(40):
            n = int(rng.integers(3, 9))
            g = random_graph(n, rng)
            v = int(rng.integers(n))
            g2, _ = g.measure_pauli(v, "Z", 1 if rng.random() < 0.5 else -1)
            before = {e for e in g.edges() if v not in e}
            assert g2.edge_set() == frozenset(before)

    @pytest.mark.parametrize("basis", ["X", "Y", "Z"])
    def test_rules_match_tableau_backend(self, basis):
        # Same rewrite checked against the scalable backend: measure on the
        # tableau (forcing the graph's outcome choice via sign injection is
        # not possible, so compare on the branch the tableau takes).
        from sicluster.tableau import Basis as TB
        from sicluster.tableau import restricted_stab_graph

        rng = np.random.default_rng(101 + hash(basis) % 97)
        checked = 0
        while checked < 25:
            n = int(rng.integers(2, 8))
            g = random_graph(n, rng)
            v = int(rng.integers(n))
            t = from_graph_state(g)
            out, det, p = t._measure_impl(v, TB(basis), np.random.default_rng(checked))
            try:
                g2, _ = g.measure_pauli(v, basis, out)
            except ValueError:
                assert det  # impossible branch can only be a deterministic one
                continue
            keep = [u for u in range(n) if u != v]
            gen = {v: p} if p >= 0 else {}
            adj, ops = restricted_stab_graph(t, keep, gen)
            got = GraphState(keep, [(keep[a], keep[b]) for a, nb in adj.items()
                                    for b in nb if a < b],
                             {keep[i]: op for i, op in ops.items()})
            assert same_stabilizer_group(from_graph_state(got), from_graph_state(g2))
            checked += 1

    @pytest.mark.parametrize("basis", ["X", "Y", "Z"])
    def test_rules_match_dense_oracle(self, basis):
        rng = np.random.default_rng(hash(basis) % 1000)
        checked = 0
        while checked < 40:
            n = int(rng.integers(2, 8))
            g = random_graph(n, rng, with_ops=bool(rng.integers(2)))
            v = int(rng.integers(n))
            outcome = 1 if rng.random() < 0.5 else -1
            oracle = dense_measure_graph(g, v, basis, outcome)
            try:
                g2, _ = g.measure_pauli(v, basis, outcome)
            except ValueError:
                assert oracle is None
                continue
            assert oracle is not None
            ids, sv = oracle
            ids2, sv2 = graph_to_statevector(g2)
            assert ids == ids2
            assert sv.fidelity(sv2) > 1 - 1e-9
            checked += 1


class TestLCEquivalence:
    def test_triangle_vs_star(self):
        tri = GraphState(range(3), [(0, 1), (0, 2), (1, 2)])
        star = GraphState(range(3), [(0, 1), (0, 2)])
        flag, witness = tri.equal_up_to_local_cliffords(star)
        assert flag and witness
        # replaying the witness maps the adjacency
        g = tri
        for v in witness:
            g = g.local_complement(v)
        assert g.edge_set() == star.edge_set()

    def test_path_vs_cycle_inequivalent(self):
        path = line_graph(4)
        cycle = GraphState(range(4), [(0, 1), (1, 2), (2, 3), (0, 3)])
        flag, witness = path.equal_up_to_local_cliffords(cycle)
        assert not flag and witness is None

    def test_self_equivalence_empty_witness(self):
        g = line_graph(4)
        flag, witness = g.equal_up_to_local_cliffords(g)
        assert flag and witness == []

    def test_vertex_set_mismatch(self):
        with pytest.raises(ValueError):
            line_graph(3).equal_up_to_local_cliffords(GraphState(range(4)))

    def test_lc_preserves_connected_components(self):
        rng = np.random.default_rng(16)
        for _ in range(30):
            n = int(rng.integers(2, 9))
            g = random_graph(n, rng)
            v = int(rng.integers(n))
            assert _components(g) == _components(g.local_complement(v))

    def test_symmetry_and_lc_invariance(self):
        rng = np.random.default_rng(13)
        for _ in range(15):
            n = int(rng.integers(2, 7))
            g1 = random_graph(n, rng)
            g2 = random_graph(n, rng)
            f12, _ = g1.equal_up_to_local_cliffords(g2)
            f21, _ = g2.equal_up_to_local_cliffords(g1)
            assert f12 == f21
            v = int(rng.integers(n))
            f_lc, _ = g1.local_complement(v).equal_up_to_local_cliffords(g2)
            assert f_lc == f12


def _components(g):
    seen, comps = set(), []
    for v in g.vertices():
        if v in seen:
            continue
        stack, comp = [v], set()
        while stack:
            w = stack.pop()
            if w in comp:
                continue
            comp.add(w)
            stack.extend(g.neighbors(w) - comp)
        seen |= comp
        comps.append(frozenset(comp))
    return sorted(comps, key=min)


class TestExport:
    def test_dot_single_edge(self):
        g = GraphState(range(2), [(0, 1)])
        dot = export(g, "dot").decode()
        assert "0 -- 1;" in dot and dot.startswith("graph")

    def test_empty_graph_valid_json(self):
        doc = json.loads(export(GraphState(), "json").decode())
        assert doc == {"vertices": [], "edges": []}

    def test_json_roundtrip_with_ops(self):
        g = GraphState(range(3), [(0, 2)], vertex_ops={1: cliffords.S})
        g2 = graph_from_json(export(g, "json").decode())
        assert g2 == g

    def test_unknown_format(self):
        with pytest.raises(ValueError):
            export(GraphState(), "yaml")

    def test_deterministic_ordering(self):
        g = GraphState([3, 1, 2], [(3, 1), (2, 3)])
        assert export(g, "json") == export(g.copy(), "json")


class TestRecord:
    def test_order_and_uniqueness(self):
        rec = MeasurementOutcomeRecord()
        rec.append(3, "Y", -1)
        rec.append(1, "Z", 1)
        assert rec.entries() == [(3, "Y", -1), (1, "Z", 1)]
        with pytest.raises(ValueError):
            rec.append(3, "X", 1)

    def test_repeats_allowed_when_requested(self):
        rec = MeasurementOutcomeRecord(allow_repeats=True)
        rec.append(3, "Y", -1)
        rec.append(3, "Y", 1)
        assert len(rec) == 2


def test_grid_graph_shape():
    g = grid_graph(3, 2)
    assert g.n == 6
    assert g.degree(0) == 2  # corner
    assert sorted(g.neighbors(3)) == [1, 2, 5]  # (1,1): up (1,0)=2, left(0,1)=1, right(2,1)=5
