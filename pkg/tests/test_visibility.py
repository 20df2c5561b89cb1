import numpy as np
import pytest

from ergodic_tiler import (
    BadMagnification,
    NoNextBlock,
    block,
    block_decomposition,
    build_graph,
    cone,
    dominus_orbit,
    dominus_step,
    next_block,
    nested_or_disjoint_check,
    orbit_merge_test,
)

from test_graph import path_graph, random_connected


def bump_path():
    # path with a heavy middle vertex: weights (1, 3, 1)
    return path_graph(3, np.log([1.0, 3.0, 1.0]))


class TestBlock:
    def test_equal_weights_whole_component(self):
        g, c = path_graph(5)
        assert block(g, c, 2, 1.0).vertices.tolist() == [0, 1, 2, 3, 4]

    def test_heavy_middle_blocks_the_end(self):
        g, c = bump_path()
        assert block(g, c, 0, 1.0).vertices.tolist() == [0]

    def test_heavy_middle_sees_everything(self):
        g, c = bump_path()
        assert block(g, c, 1, 1.0).vertices.tolist() == [0, 1, 2]

    def test_magnification_below_one_rejected(self):
        g, c = bump_path()
        with pytest.raises(BadMagnification):
            block(g, c, 0, 0.5)

    def test_magnification_opens_view(self):
        g, c = bump_path()
        assert block(g, c, 0, 3.0).vertices.tolist() == [0, 1, 2]

    def test_idempotence_property(self):
        # the block of any member, magnified to compensate its weight gap,
        # contains the original block
        rng = np.random.default_rng(0)
        for _ in range(50):
            n = int(rng.integers(2, 20))
            g, c = random_connected(rng, n)
            x = int(rng.integers(0, n))
            alpha = float(rng.uniform(1.0, 3.0))
            b = block(g, c, x, alpha)
            y = int(b.vertices[rng.integers(0, b.size)])
            beta = alpha * float(np.exp(c.log_weight[x] - c.log_weight[y]))
            if beta < 1.0:
                continue
            b2 = block(g, c, y, beta)
            assert set(b.vertices.tolist()) <= set(b2.vertices.tolist())


class TestNestedOrDisjoint:
    def test_equal_blocks_nested(self):
        g, c = bump_path()
        b = block(g, c, 1, 1.0)
        assert nested_or_disjoint_check(b, b) == "nested"

    def test_two_ends_disjoint(self):
        g, c = bump_path()
        assert nested_or_disjoint_check(block(g, c, 0, 1.0), block(g, c, 2, 1.0)) == "disjoint"

    def test_end_inside_middle(self):
        g, c = bump_path()
        assert nested_or_disjoint_check(block(g, c, 0, 1.0), block(g, c, 1, 1.0)) == "nested"

    def test_all_pairs_random(self):
        rng = np.random.default_rng(1)
        for _ in range(60):
            n = int(rng.integers(2, 30))
            g, c = random_connected(rng, n)
            blocks = [block(g, c, x, 1.0) for x in range(n)]
            for i in range(n):
                for j in range(i + 1, n):
                    nested_or_disjoint_check(blocks[i], blocks[j])


class TestNextBlock:
    def test_end_jumps_to_whole_path(self):
        g, c = bump_path()
        b = block(g, c, 0, 1.0)
        assert next_block(g, c, b).vertices.tolist() == [0, 1, 2]

    def test_full_component_has_none(self):
        g, c = bump_path()
        with pytest.raises(NoNextBlock):
            next_block(g, c, block(g, c, 1, 1.0))

    def test_star_leaf_jumps_to_star(self):
        g, c = build_graph([(0, i) for i in range(1, 5)], np.log([10.0, 1.0, 1.0, 1.0, 1.0]))
        b = block(g, c, 1, 1.0)
        assert b.vertices.tolist() == [1]
        assert next_block(g, c, b).vertices.tolist() == [0, 1, 2, 3, 4]

    def test_choice_independence(self):
        # any lightest boundary vertex gives the same next block
        rng = np.random.default_rng(2)
        for _ in range(60):
            n = int(rng.integers(3, 25))
            g, c = random_connected(rng, n)
            x = int(rng.integers(0, n))
            b = block(g, c, x, 1.0)
            in_b = set(b.vertices.tolist())
            if len(in_b) == n:
                continue
            boundary = sorted(
                {int(u) for v in b.vertices for u in g.neighbors(v) if int(u) not in in_b}
            )
            low = min(float(c.log_weight[y]) for y in boundary)
            expect = next_block(g, c, b).vertices.tolist()
            for y in boundary:
                if float(c.log_weight[y]) == low:
                    assert block(g, c, y, 1.0).vertices.tolist() == expect


class TestDominusStep:
    def test_singleton_component(self):
        g, c = build_graph([], [0.0])
        assert dominus_step(g, c, 0) == 0

    def test_path_end_to_middle(self):
        g, c = bump_path()
        assert dominus_step(g, c, 0) == 1

    def test_equal_weights_min_id(self):
        g, c = path_graph(5)
        for x in range(5):
            assert dominus_step(g, c, x) == 0


class TestOrbitMerge:
    def test_equal_weights(self):
        g, c = path_graph(6)
        assert orbit_merge_test(g, c)
        chain = dominus_orbit(g, c, 5)
        assert chain[-1] == 0

    def test_random_trees(self):
        rng = np.random.default_rng(3)
        for _ in range(40):
            n = int(rng.integers(2, 50))
            edges = [(int(rng.integers(0, v)), v) for v in range(1, n)]
            g, c = build_graph(edges, rng.uniform(-3, 3, size=n))
            assert orbit_merge_test(g, c)

    def test_two_components(self):
        g, c = build_graph([(0, 1), (2, 3)], np.array([0.0, 1.0, 0.5, 0.0]))
        assert orbit_merge_test(g, c)


class TestCone:
    def test_max_vertex_sees_itself(self):
        g, c = bump_path()
        assert 1 in cone(g, c, 1).tolist()

    def test_heavy_middle_cone_is_itself(self):
        g, c = bump_path()
        assert cone(g, c, 1).tolist() == [1]

    def test_equal_weights_everyone(self):
        g, c = path_graph(4)
        assert cone(g, c, 2).tolist() == [0, 1, 2, 3]

    def test_nested_property(self):
        rng = np.random.default_rng(4)
        for _ in range(30):
            n = int(rng.integers(2, 25))
            g, c = random_connected(rng, n)
            x = int(rng.integers(0, n))
            cx = set(cone(g, c, x).tolist())
            for y in cx:
                assert set(cone(g, c, y).tolist()) <= cx

    def test_cofinality(self):
        rng = np.random.default_rng(5)
        for _ in range(30):
            n = int(rng.integers(2, 25))
            g, c = random_connected(rng, n)
            x = int(rng.integers(0, n))
            comp = g.component_members(g.component_id[x])
            cx = cone(g, c, x)
            assert c.log_weight[cx].max() == c.log_weight[comp].max()


class TestAmalgamation:
    def test_constructive(self):
        # the block of the heaviest vertex of a connecting path, at the larger
        # magnification, contains both blocks
        rng = np.random.default_rng(6)
        for _ in range(60):
            n = int(rng.integers(2, 40))
            g, c = random_connected(rng, n)
            x, y = int(rng.integers(0, n)), int(rng.integers(0, n))
            if g.component_id[x] != g.component_id[y]:
                continue
            alpha, beta = float(rng.uniform(1, 2)), float(rng.uniform(1, 2))
            bx, by = block(g, c, x, alpha), block(g, c, y, beta)
            # BFS path from x to y
            prev = {x: None}
            queue = [x]
            while queue:
                v = queue.pop(0)
                if v == y:
                    break
                for u in g.neighbors(v):
                    if int(u) not in prev:
                        prev[int(u)] = v
                        queue.append(int(u))
            path = []
            v = y
            while v is not None:
                path.append(v)
                v = prev[v]
            z = max(path, key=lambda v: (float(c.log_weight[v]), -v))
            bz = block(g, c, z, max(alpha, beta))
            assert set(bx.vertices.tolist()) <= set(bz.vertices.tolist())
            assert set(by.vertices.tolist()) <= set(bz.vertices.tolist())


class TestBlockDecomposition:
    def test_laminar_listing(self):
        g, c = bump_path()
        rows = block_decomposition(g, c, 1.0)
        sets = [tuple(b.vertices.tolist()) for b, _ in rows]
        assert (0, 1, 2) in sets and (0,) in sets and (2,) in sets
