import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import random_sc_digraph
from qsdwalk import (
    DirectedGraph,
    GraphFormatError,
    NodeMap,
    induced_subgraph,
    is_strongly_connected,
    largest_scc,
    load_edge_list,
    reachable_set,
    write_edge_list,
)


def brute_edges(n, src, dst, drop_loops=True, dedup=True):
    pairs = list(zip(map(int, src), map(int, dst)))
    if drop_loops:
        pairs = [(u, v) for u, v in pairs if u != v]
    if dedup:
        pairs = set(pairs)
    return sorted(pairs)


class TestFromEdges:
    def test_dedup_and_self_loops(self):
        src = [0, 0, 0, 1, 2, 2]
        dst = [1, 1, 0, 2, 0, 0]
        g = DirectedGraph.from_edges(3, src, dst)
        assert g.m == 3
        assert sorted(zip(*map(list, g.edge_arrays()))) == [(0, 1), (1, 2), (2, 0)]

    def test_keep_everything_flags(self):
        g = DirectedGraph.from_edges(
            3, [0, 0, 1], [0, 1, 1], drop_self_loops=False, deduplicate=False
        )
        assert g.m == 3
        assert g.has_edge(0, 0)

    def test_degrees_match_brute_force(self):
        rng = np.random.default_rng(0)
        for trial in range(20):
            n = int(rng.integers(2, 40))
            e = int(rng.integers(1, 4 * n))
            src = rng.integers(0, n, e)
            dst = rng.integers(0, n, e)
            g = DirectedGraph.from_edges(n, src, dst)
            pairs = brute_edges(n, src, dst)
            out = np.zeros(n, dtype=int)
            inn = np.zeros(n, dtype=int)
            for u, v in pairs:
                out[u] += 1
                inn[v] += 1
            assert g.m == len(pairs)
            np.testing.assert_array_equal(g.out_degrees, out)
            np.testing.assert_array_equal(g.in_degrees, inn)

    def test_neighbor_views_consistent(self):
        rng = np.random.default_rng(1)
        g = random_sc_digraph(rng, 25)
        pairs = set(zip(*map(list, g.edge_arrays())))
        for i in range(g.n):
            for j in g.out_neighbors(i):
                assert (i, int(j)) in pairs
                assert g.has_edge(i, int(j))
                assert i in g.in_neighbors(int(j))
        assert sum(g.out_neighbors(i).size for i in range(g.n)) == g.m

    def test_out_neighbors_sorted(self):
        rng = np.random.default_rng(2)
        g = random_sc_digraph(rng, 30)
        for i in range(g.n):
            nbrs = g.out_neighbors(i)
            assert np.all(np.diff(nbrs) > 0)

    def test_endpoint_range_checked(self):
        with pytest.raises(ValueError, match="out of range"):
            DirectedGraph.from_edges(2, [0], [2])
        with pytest.raises(ValueError, match="out of range"):
            DirectedGraph.from_edges(2, [-1], [0])

    def test_to_csr_matches(self):
        rng = np.random.default_rng(3)
        g = random_sc_digraph(rng, 15)
        dense = g.to_csr().toarray()
        for i in range(g.n):
            for j in range(g.n):
                assert bool(dense[i, j]) == g.has_edge(i, j)

    @given(st.integers(2, 12), st.data())
    @settings(max_examples=40, deadline=None)
    def test_edge_arrays_roundtrip(self, n, data):
        e = data.draw(st.integers(1, 3 * n))
        src = data.draw(
            st.lists(st.integers(0, n - 1), min_size=e, max_size=e)
        )
        dst = data.draw(
            st.lists(st.integers(0, n - 1), min_size=e, max_size=e)
        )
        g = DirectedGraph.from_edges(n, src, dst)
        rebuilt = DirectedGraph.from_edges(n, *g.edge_arrays())
        np.testing.assert_array_equal(g.out_indptr, rebuilt.out_indptr)
        np.testing.assert_array_equal(g.out_indices, rebuilt.out_indices)
        np.testing.assert_array_equal(g.in_indptr, rebuilt.in_indptr)
        np.testing.assert_array_equal(g.in_indices, rebuilt.in_indices)
        assert sorted(zip(*map(list, g.edge_arrays()))) == brute_edges(n, src, dst)


class TestNodeMap:
    def test_roundtrip(self):
        m = NodeMap(np.array([3, 7, 40], dtype=np.int64))
        assert len(m) == 3
        assert m.to_original(1) == 7
        np.testing.assert_array_equal(m.to_original(np.array([0, 2])), [3, 40])
        assert m.to_compact(40) == 2
        with pytest.raises(KeyError):
            m.to_compact(5)

    def test_requires_increasing(self):
        with pytest.raises(ValueError):
            NodeMap(np.array([3, 3], dtype=np.int64))
        with pytest.raises(ValueError):
            NodeMap(np.array([5, 2], dtype=np.int64))

    def test_compose(self):
        inner = NodeMap(np.array([0, 2], dtype=np.int64))
        outer = NodeMap(np.array([10, 20, 30], dtype=np.int64))
        combined = inner.compose(outer)
        np.testing.assert_array_equal(combined.original, [10, 30])


class TestEdgeListIO:
    def test_load_fixture(self, tiny_path):
        g, nmap = load_edge_list(tiny_path)
        assert g.n == 4
        assert g.m == 6
        np.testing.assert_array_equal(nmap.original, [5, 7, 10, 20])
        # self-loop 7->7 dropped, duplicate 5->20 collapsed
        assert not g.has_edge(nmap.to_compact(7), nmap.to_compact(7))
        assert g.has_edge(nmap.to_compact(5), nmap.to_compact(20))

    def test_gzip_transparent(self, tiny_path):
        plain, _ = load_edge_list(tiny_path)
        gz, _ = load_edge_list(str(tiny_path) + ".gz")
        np.testing.assert_array_equal(plain.out_indptr, gz.out_indptr)
        np.testing.assert_array_equal(plain.out_indices, gz.out_indices)

    def test_keep_flags_respected(self, tiny_path):
        g, _ = load_edge_list(tiny_path, drop_self_loops=False, deduplicate=False)
        assert g.m == 8

    def test_bad_line_reports_location(self):
        with pytest.raises(GraphFormatError, match=r"bad\.txt:2"):
            load_edge_list("tests/data/bad.txt")

    def test_wrong_field_count(self, tmp_path):
        p = tmp_path / "x.txt"
        p.write_text("1 2 3\n")
        with pytest.raises(GraphFormatError, match="two fields"):
            load_edge_list(p)

    def test_write_then_load(self, tmp_path):
        rng = np.random.default_rng(4)
        g = random_sc_digraph(rng, 20)
        out = tmp_path / "g.txt"
        write_edge_list(g, out)
        back, nmap = load_edge_list(out)
        assert back.n == g.n
        np.testing.assert_array_equal(nmap.original, np.arange(g.n))
        np.testing.assert_array_equal(back.out_indptr, g.out_indptr)
        np.testing.assert_array_equal(back.out_indices, g.out_indices)

    def test_write_with_original_labels(self, tmp_path, tiny_path):
        g, nmap = load_edge_list(tiny_path)
        out = tmp_path / "orig.txt"
        write_edge_list(g, out, node_map=nmap)
        again, nmap2 = load_edge_list(out)
        np.testing.assert_array_equal(nmap2.original, nmap.original)
        np.testing.assert_array_equal(again.out_indices, g.out_indices)

    def test_header_line(self, tmp_path):
        g = DirectedGraph.from_edges(2, [0, 1], [1, 0])
        out = tmp_path / "h.txt"
        write_edge_list(g, out)
        assert out.read_text().splitlines()[0] == "# nodes 2 edges 2"


class TestConnectivity:
    def test_cycle_is_sc(self):
        g = DirectedGraph.from_edges(4, [0, 1, 2, 3], [1, 2, 3, 0])
        assert is_strongly_connected(g)

    def test_sink_breaks_sc(self):
        g = DirectedGraph.from_edges(3, [0, 1, 0], [1, 0, 2])
        assert not is_strongly_connected(g)

    def test_one_way_pair(self):
        g = DirectedGraph.from_edges(2, [0], [1])
        assert not is_strongly_connected(g)

    def test_single_node(self):
        g = DirectedGraph.from_edges(1, [], [])
        assert is_strongly_connected(g)

    def test_empty_graph_rejected(self):
        g = DirectedGraph.from_edges(0, [], [])
        with pytest.raises(ValueError):
            is_strongly_connected(g)

    def test_generator_makes_sc_graphs(self):
        rng = np.random.default_rng(5)
        for _ in range(10):
            assert is_strongly_connected(random_sc_digraph(rng, int(rng.integers(2, 40))))


class TestSubgraphs:
    def test_induced_edges_brute_force(self):
        rng = np.random.default_rng(6)
        g = random_sc_digraph(rng, 20)
        nodes = np.array([2, 3, 5, 11, 17])
        sub, smap = induced_subgraph(g, nodes)
        assert sub.n == 5
        np.testing.assert_array_equal(smap.original, nodes)
        expected = sorted(
            (int(np.searchsorted(nodes, u)), int(np.searchsorted(nodes, v)))
            for u, v in zip(*g.edge_arrays())
            if u in set(nodes.tolist()) and v in set(nodes.tolist())
        )
        assert sorted(zip(*map(list, sub.edge_arrays()))) == expected

    def test_induced_validation(self):
        g = DirectedGraph.from_edges(3, [0, 1, 2], [1, 2, 0])
        with pytest.raises(ValueError):
            induced_subgraph(g, np.array([], dtype=np.int64))
        with pytest.raises(ValueError):
            induced_subgraph(g, np.array([0, 3]))

    def test_largest_scc_two_components(self):
        # 0,1,2 form a 3-cycle; 3,4 a 2-cycle; 2->3 links them one way
        g = DirectedGraph.from_edges(
            5, [0, 1, 2, 3, 4, 2], [1, 2, 0, 4, 3, 3]
        )
        scc, smap = largest_scc(g)
        assert scc.n == 3
        np.testing.assert_array_equal(smap.original, [0, 1, 2])
        assert is_strongly_connected(scc)

    def test_largest_scc_tie_breaks_low_ids(self):
        # two disjoint 2-cycles; tie goes to the one holding node 0
        g = DirectedGraph.from_edges(4, [2, 3, 0, 1], [3, 2, 1, 0])
        _, smap = largest_scc(g)
        np.testing.assert_array_equal(smap.original, [0, 1])

    def test_largest_scc_of_sc_graph_is_identity(self):
        rng = np.random.default_rng(7)
        g = random_sc_digraph(rng, 18)
        scc, smap = largest_scc(g)
        assert scc.n == g.n
        np.testing.assert_array_equal(smap.original, np.arange(g.n))


class TestReachable:
    def brute(self, g, seeds):
        seen = set(int(s) for s in seeds)
        frontier = list(seen)
        while frontier:
            nxt = []
            for u in frontier:
                for v in g.out_neighbors(u):
                    if int(v) not in seen:
                        seen.add(int(v))
                        nxt.append(int(v))
            frontier = nxt
        return np.array(sorted(seen))

    def test_matches_brute_force(self):
        rng = np.random.default_rng(8)
        for _ in range(15):
            n = int(rng.integers(3, 30))
            e = int(rng.integers(n, 3 * n))
            g = DirectedGraph.from_edges(
                n, rng.integers(0, n, e), rng.integers(0, n, e)
            )
            seeds = rng.choice(n, size=int(rng.integers(1, 4)), replace=False)
            got = reachable_set(g, seeds)
            np.testing.assert_array_equal(got, self.brute(g, seeds))

    def test_closed_under_out_edges(self):
        rng = np.random.default_rng(9)
        g = DirectedGraph.from_edges(
            40, rng.integers(0, 40, 100), rng.integers(0, 40, 100)
        )
        closure = reachable_set(g, np.array([0]))
        members = set(closure.tolist())
        for u in closure:
            for v in g.out_neighbors(int(u)):
                assert int(v) in members

    def test_seed_validation(self):
        g = DirectedGraph.from_edges(2, [0, 1], [1, 0])
        with pytest.raises(ValueError):
            reachable_set(g, np.array([], dtype=np.int64))
        with pytest.raises(ValueError):
            reachable_set(g, np.array([2]))
