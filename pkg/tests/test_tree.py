import random

import numpy as np

from ted_oracle import enum_trees, mapping_min_cost, oracle_distance, oracle_pairwise_packed
from todkit import _ted
from todkit.codec import parse_action
from todkit.model import ActionSeq
from todkit.tree import (
    ActionTree,
    ROOT_LABEL,
    pack_trees,
    pairwise_distances,
    similarity,
    similarity_from_distance,
    to_tree,
    tree_edit_distance,
    tree_size,
)


def node(label, *children):
    return ActionTree(label=label, children=tuple(children))


class TestToTree:
    def test_empty_action_is_root_only(self):
        tree = to_tree(ActionSeq())
        assert tree.label == ROOT_LABEL
        assert tree.children == ()
        assert tree_size(tree) == 1

    def test_example_action_has_size_six(self, ontology):
        action = parse_action("[restaurant] [inform] address name [offerbook]", ontology)
        tree = to_tree(action)
        assert tree_size(tree) == 6
        restaurant = tree.children[0]
        assert restaurant.label == "restaurant"
        assert [c.label for c in restaurant.children] == ["inform", "offerbook"]
        assert [c.label for c in restaurant.children[0].children] == ["address", "name"]
        assert restaurant.children[1].children == ()

    def test_single_request_has_size_four(self, ontology):
        action = parse_action("[hotel] [request] area", ontology)
        assert tree_size(to_tree(action)) == 4

    def test_sibling_order_follows_action_order(self, ontology):
        a1 = parse_action("[hotel] [request] area [restaurant] [inform] name", ontology)
        tree = to_tree(a1)
        assert [c.label for c in tree.children] == ["hotel", "restaurant"]


class TestTreeEditDistance:
    def test_identical_trees(self, ontology):
        action = parse_action("[restaurant] [inform] address name [offerbook]", ontology)
        tree = to_tree(action)
        assert tree_edit_distance(tree, tree) == 0.0

    def test_two_deletions(self, ontology):
        t1 = to_tree(parse_action("[restaurant] [inform] address name [offerbook]", ontology))
        t2 = to_tree(parse_action("[restaurant] [inform] address", ontology))
        assert oracle_distance(t1, t2) == 2.0
        assert mapping_min_cost(t1, t2) == 2
        assert tree_edit_distance(t1, t2) == 2.0

    def test_domain_relabel(self, ontology):
        t1 = to_tree(parse_action("[restaurant] [inform] name", ontology))
        t2 = to_tree(parse_action("[hotel] [inform] name", ontology))
        assert oracle_distance(t1, t2) == 1.0
        assert mapping_min_cost(t1, t2) == 1
        assert tree_edit_distance(t1, t2) == 1.0

    def test_order_sensitivity_of_sibling_acts(self):
        t1 = node(ROOT_LABEL, node("d", node("a1", node("s1")), node("a2", node("s2"))))
        t2 = node(ROOT_LABEL, node("d", node("a2", node("s2")), node("a1", node("s1"))))
        d = tree_edit_distance(t1, t2)
        assert d > 0.0
        assert d == oracle_distance(t1, t2)

    def test_matches_oracles_exhaustively_small(self):
        trees = enum_trees(3, "ab")
        packed = pack_trees(trees)
        impl = _ted.pairwise_distances_packed(
            packed.node_start, packed.labels, packed.lml,
            packed.kr_start, packed.keyroots, full=True,
        )
        orac = oracle_pairwise_packed(packed.node_start, packed.labels, packed.lml, full=True)
        assert np.array_equal(impl, orac)
        for i, t1 in enumerate(trees):
            for j, t2 in enumerate(trees):
                assert impl[i, j] == mapping_min_cost(t1, t2)

    def test_matches_brute_force_on_random_pairs(self):
        trees = enum_trees(5, "abc")
        rng = random.Random(99)
        for _ in range(150):
            t1, t2 = rng.choice(trees), rng.choice(trees)
            expected = mapping_min_cost(t1, t2)
            assert tree_edit_distance(t1, t2) == expected
            assert oracle_distance(t1, t2) == expected

    def test_symmetry_on_enumerated_sample(self):
        trees = enum_trees(4, "ab")
        dist = pairwise_distances(trees, full=True)
        assert np.array_equal(dist, dist.T)
        assert np.all(np.diagonal(dist) == 0.0)

    def test_triangle_inequality_on_sampled_triples(self):
        trees = enum_trees(4, "abc")
        rng = random.Random(4)
        sample = [rng.choice(trees) for _ in range(30)]
        dist = pairwise_distances(sample, full=True)
        n = len(sample)
        for _ in range(500):
            a, b, c = rng.randrange(n), rng.randrange(n), rng.randrange(n)
            assert dist[a, c] <= dist[a, b] + dist[b, c] + 1e-12


class TestSimilarity:
    def test_identical_trees_give_exactly_one(self, ontology):
        for text in ("", "[restaurant] [inform] name", "[hotel] [request] area type"):
            tree = to_tree(parse_action(text, ontology))
            assert similarity(tree, tree) == 1.0

    def test_example_pair(self, ontology):
        t1 = to_tree(parse_action("[restaurant] [inform] address name [offerbook]", ontology))
        t2 = to_tree(parse_action("[restaurant] [inform] address", ontology))
        assert abs(similarity(t1, t2) - (6.0 - 2.0) / 6.0) < 1e-12

    def test_clamped_to_zero_when_distance_exceeds_size(self):
        # depth-3 chain vs. flat fan of domains, disjoint labels below the
        # root: the best mapping keeps only the root and one relabeled pair
        t1 = node(ROOT_LABEL, node("d1", node("a1", node("s1"))))
        t2 = node(ROOT_LABEL, node("x"), node("y"), node("z"))
        d = tree_edit_distance(t1, t2)
        assert d == oracle_distance(t1, t2) == mapping_min_cost(t1, t2)
        m = max(tree_size(t1), tree_size(t2))
        assert d > m  # raw similarity would be negative
        assert (m - d) / m < 0.0
        assert similarity(t1, t2) == 0.0

    def test_bounds_on_enumerated_sample(self):
        trees = enum_trees(4, "ab")
        for i in range(0, len(trees), 7):
            for j in range(0, len(trees), 13):
                s = similarity(trees[i], trees[j])
                assert 0.0 <= s <= 1.0

    def test_similarity_from_distance_formula(self):
        assert similarity_from_distance(6, 4, 2.0) == (6 - 2.0) / 6
        assert similarity_from_distance(3, 3, 0.0) == 1.0
        assert similarity_from_distance(2, 2, 5.0) == 0.0


class TestKernelVariants:
    def test_python_fallback_matches_compiled(self):
        trees = enum_trees(4, "ab")[:40]
        packed = pack_trees(trees)
        args = (packed.node_start, packed.labels, packed.lml,
                packed.kr_start, packed.keyroots)
        compiled = _ted.pairwise_distances_packed(*args, full=True)
        plain = _ted.pairwise_distances_packed(
            *args, full=True, kernel=_ted.KERNEL_VARIANTS["python"]
        )
        assert np.array_equal(compiled, plain)

    def test_threaded_equals_sequential(self):
        trees = enum_trees(4, "abc")
        packed = pack_trees(trees)
        args = (packed.node_start, packed.labels, packed.lml,
                packed.kr_start, packed.keyroots)
        seq = _ted.pairwise_distances_packed(*args, threads=1)
        par = _ted.pairwise_distances_packed(*args, threads=4)
        assert np.array_equal(seq, par)
