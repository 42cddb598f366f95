"""Spanning-tree weight sensitivity: bottleneck formula vs exhaustive oracle."""

import itertools

import numpy as np
import pytest

from retaincal.errors import DataError, DisconnectedGraphError
from retaincal.mst import (
    ConvergenceBudgetError,
    WeightedGraph,
    gs_mst_edge,
    mst_weight,
    oracle_rs_mst,
    rs_mst_edge,
    sample_subgraphs,
)


def graph(n, edges, b=10.0):
    return WeightedGraph(vertex_count=n, edges=tuple(edges), bound_b=b)


def random_connected(rng, n, p, b=1.0):
    # dyadic weights keep tree-weight differences exact in binary
    while True:
        edges = [
            (u, v, rng.integers(0, 1025) / 1024.0)
            for u, v in itertools.combinations(range(n), 2)
            if rng.uniform() < p
        ]
        g = WeightedGraph(n, tuple(edges), b)
        if g.is_connected():
            return g


class TestMstWeight:
    def test_triangle_enumeration(self):
        # spanning trees of the triangle weigh 1+2, 1+3, 2+3; the minimum is 3
        g = graph(3, [(0, 1, 1.0), (1, 2, 2.0), (0, 2, 3.0)])
        assert mst_weight(g) == 3.0

    def test_path_graph_is_its_own_tree(self):
        g = graph(4, [(0, 1, 2.0), (1, 2, 3.0), (2, 3, 4.0)])
        assert mst_weight(g) == 9.0

    def test_complete_all_b(self):
        n, b = 6, 4.0
        g = graph(n, [(u, v, b) for u, v in itertools.combinations(range(n), 2)], b=b)
        assert mst_weight(g) == (n - 1) * b

    def test_disconnected_rejected(self):
        g = graph(4, [(0, 1, 1.0), (2, 3, 1.0)])
        with pytest.raises(DisconnectedGraphError):
            mst_weight(g)


class TestValidation:
    def test_self_loop(self):
        with pytest.raises(DataError):
            graph(3, [(0, 0, 1.0)])

    def test_duplicate_edge(self):
        with pytest.raises(DataError):
            graph(3, [(0, 1, 1.0), (1, 0, 2.0)])

    def test_weight_above_bound(self):
        with pytest.raises(DataError):
            graph(3, [(0, 1, 11.0)])


class TestRsMst:
    def test_complete_graph_zero(self):
        g = graph(4, [(u, v, 1.0) for u, v in itertools.combinations(range(4), 2)], b=1.0)
        assert rs_mst_edge(g).value == 0.0
        assert oracle_rs_mst(g).value == 0.0

    def test_path_bottleneck(self):
        g = graph(3, [(0, 1, 5.0), (1, 2, 7.0)])
        assert rs_mst_edge(g).value == 7.0
        assert oracle_rs_mst(g).value == 7.0
        assert rs_mst_edge(g).require_value() / gs_mst_edge(10.0).require_value() == 0.7

    def test_bounded_by_max_tree_edge(self):
        rng = np.random.Generator(np.random.Philox(key=5))
        for _ in range(50):
            g = random_connected(rng, 7, 0.6)
            heaviest = max(w for _, _, w in g.edges)
            assert rs_mst_edge(g).require_value() <= heaviest

    def test_near_complete_all_b_is_tight(self):
        # complete graph minus one edge, all weights B: adding the missing
        # edge at weight zero removes one weight-B tree edge
        n, b = 7, 3.5
        edges = [
            (u, v, b)
            for u, v in itertools.combinations(range(n), 2)
            if (u, v) != (0, 1)
        ]
        g = graph(n, edges, b=b)
        assert rs_mst_edge(g).value == b
        assert oracle_rs_mst(g).value == b
        assert gs_mst_edge(b).value == b


class TestOracleEquivalence:
    def test_exact_on_random_graphs(self):
        rng = np.random.Generator(np.random.Philox(key=11))
        for _ in range(120):
            n = int(rng.integers(3, 9))
            g = random_connected(rng, n, float(rng.uniform(0.3, 0.9)))
            assert rs_mst_edge(g).value == oracle_rs_mst(g).value

    def test_adding_any_edge_never_increases_weight(self):
        rng = np.random.Generator(np.random.Philox(key=13))
        for _ in range(40):
            g = random_connected(rng, 6, 0.5)
            base = mst_weight(g)
            absent = [
                (u, v)
                for u, v in itertools.combinations(range(6), 2)
                if (u, v) not in g.edge_set()
            ]
            for u, v in absent:
                w = float(rng.uniform(0, 1))
                assert mst_weight(g.with_edge(u, v, w)) <= base + 1e-12

    def test_zero_weight_addition_drops_by_bottleneck(self):
        from retaincal.mst import _tree_bottlenecks

        rng = np.random.Generator(np.random.Philox(key=17))
        for _ in range(40):
            g = random_connected(rng, 7, 0.5)
            base = mst_weight(g)
            bottleneck = _tree_bottlenecks(g)
            for u, v in itertools.combinations(range(7), 2):
                if (u, v) in g.edge_set():
                    continue
                drop = base - mst_weight(g.with_edge(u, v, 0.0))
                assert drop == bottleneck[u, v]

    def test_invariant_under_relabeling(self):
        # ties broken differently after a vertex permutation; the released
        # quantities must not move
        rng = np.random.Generator(np.random.Philox(key=19))
        for _ in range(30):
            g = random_connected(rng, 7, 0.6)
            perm = rng.permutation(7)
            relabeled = WeightedGraph(
                7,
                tuple((int(perm[u]), int(perm[v]), w) for u, v, w in g.edges),
                g.bound_b,
            )
            assert mst_weight(relabeled) == mst_weight(g)
            assert rs_mst_edge(relabeled).value == rs_mst_edge(g).value


class TestSubgraphSampling:
    def make_parent(self, seed=23, n=60, p=0.15):
        rng = np.random.Generator(np.random.Philox(key=seed))
        return random_connected(rng, n, p)

    def test_defaults_match_protocol(self):
        import inspect

        signature = inspect.signature(sample_subgraphs)
        assert signature.parameters["target_nodes"].default == 100
        assert signature.parameters["min_density"].default == 0.1
        assert signature.parameters["count"].default == 500

    def test_whole_graph_when_target_is_everything(self):
        g = self.make_parent(n=20, p=0.4)
        subs = sample_subgraphs(g, target_nodes=20, min_density=0.0, count=3, seed=1)
        assert len(subs) == 3
        for sub in subs:
            assert sub.edge_count == g.edge_count
            assert mst_weight(sub) == mst_weight(g)

    def test_all_subgraphs_connected_and_sized(self):
        g = self.make_parent()
        subs = sample_subgraphs(g, target_nodes=15, min_density=0.1, count=20, seed=2)
        assert len(subs) == 20
        for sub in subs:
            assert sub.vertex_count == 15
            assert sub.is_connected()
            assert sub.bound_b == g.bound_b

    def test_deterministic_in_seed(self):
        g = self.make_parent()
        a = sample_subgraphs(g, target_nodes=12, min_density=0.1, count=5, seed=9)
        b = sample_subgraphs(g, target_nodes=12, min_density=0.1, count=5, seed=9)
        assert [s.edges for s in a] == [s.edges for s in b]

    def test_budget_exhaustion_diagnostic(self):
        g = self.make_parent(n=30, p=0.12)
        with pytest.raises(ConvergenceBudgetError):
            sample_subgraphs(
                g, target_nodes=30, min_density=0.99, count=2, seed=3,
                rejection_budget_factor=5,
            )
