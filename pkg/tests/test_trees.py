import math

import pytest

from floydlab.cayley import PathWord, enumerate_ball, exact_growth_rate
from floydlab.errors import ConstructionError, PreconditionError
from floydlab.geometry import TransitionParams, classify_path
from floydlab.group import IDENTITY, FreeAbelian, GroupSpec, builtin
from floydlab.sampling import random_element, random_geodesic_word, rng_from
from floydlab.trees import (ConeModel, PartialConeQuery, build_iterated_tree, cone_fingerprint,
                            cone_member_bruteforce, critical_exponent, distinct_fingerprints,
                            elements_of_length, full_tree, partial_cone_members,
                            poincare_partial_sum, ray_tree, separated_subset,
                            skeleton_verdicts, theta_hat)


# ----------------------------------------------------------------------
# deep points from the syllable skeleton

@pytest.mark.parametrize("eps,R", [(0, 1), (1, 2), (1, 3), (2, 4)])
def test_skeleton_matches_classification(G2, eps, R):
    rng = rng_from(eps * 10 + R)
    for _ in range(150):
        h = random_element(G2, rng, 14)
        path = PathWord.geodesic(G2, IDENTITY, h)
        want = [v.is_deep for v in classify_path(G2, path, TransitionParams(eps, R, 0))]
        assert skeleton_verdicts(G2, h, eps, R) == want


def test_skeleton_without_peripherals(F2):
    assert skeleton_verdicts(F2, F2.parse("a b a"), 1, 3) == [False] * 4


@pytest.mark.parametrize("name", ["F2", "G2", "G3"])
def test_elements_of_length_is_sphere(name):
    group = builtin(name)
    ball = enumerate_ball(group, 5)
    for n in range(6):
        assert sorted(elements_of_length(group, n)) == sorted(ball.sphere(n))


# ----------------------------------------------------------------------
# partial cones

def test_cone_at_identity_is_ball(F2):
    q = PartialConeQuery(IDENTITY, 1, 3, 4)
    assert partial_cone_members(F2, q) == set(enumerate_ball(F2, 4).elements)


def test_cone_at_a(F2):
    q = PartialConeQuery(F2.parse("a"), 1, 3, 4)
    got = partial_cone_members(F2, q)
    # reduced words starting with a (the literal reading of the membership clauses)
    assert got == {h for h in enumerate_ball(F2, 4).elements
                   if h and h[0][0] == 0 and h[0][1][0] > 0}
    assert len(got) == 40
    assert got == partial_cone_members(F2, q, method="enumerate")


def test_cone_long_abelian_run(G2):
    R = 3
    g, h = G2.parse("t"), G2.parse(f"t x^{R + 10}")
    model = ConeModel(G2, 1, R)
    assert model.member(model.key(g), G2.mul(G2.inv(g), h)) == \
        cone_member_bruteforce(G2, g, h, 1, R)


@pytest.mark.parametrize("eps,R", [(1, 2), (1, 3)])
def test_cone_model_matches_bruteforce(G2, eps, R):
    rng = rng_from(40 + R)
    model = ConeModel(G2, eps, R)
    checked = 0
    while checked < 150:
        g = random_element(G2, rng, 5)
        w = G2.normalize(random_geodesic_word(G2, rng, rng.randint(2 * R - 1, 2 * R + 4), g))
        h = G2.mul(g, w)
        if G2.length(h) > 9:
            continue
        assert model.member(model.key(g), w) == cone_member_bruteforce(G2, g, h, eps, R)
        checked += 1


def test_cone_local_matches_enumerate_g2(G2):
    q = PartialConeQuery(G2.parse("t x"), 1, 2, 6)
    assert partial_cone_members(G2, q) == partial_cone_members(G2, q, method="enumerate")


def test_fingerprint_counts(F2, G3):
    assert distinct_fingerprints(F2, 6, 1, 3, 3) == 5
    counts = [distinct_fingerprints(G3, n, 1, 3, 3) for n in range(3, 8)]
    assert len(set(counts)) == 1


def test_equal_fingerprints_translate(G2):
    D = 3
    elems = [g for n in range(4) for g in elements_of_length(G2, n)]
    by_fp = {}
    for g in elems:
        by_fp.setdefault(cone_fingerprint(G2, g, 1, 2, D), []).append(g)
    pairs = [(v[0], v[-1]) for v in by_fp.values() if len(v) > 1][:6]
    assert pairs
    for g, g2 in pairs:
        def brute(x):
            return {G2.mul(G2.inv(x), h)
                    for n in range(D + 1) for w in elements_of_length(G2, n)
                    for h in [G2.mul(x, w)] if cone_member_bruteforce(G2, x, h, 1, 2)}
        assert brute(g) == brute(g2)


# ----------------------------------------------------------------------
# separation

def test_separated_subset_examples(F2):
    sphere = enumerate_ball(F2, 2).sphere(2)
    assert separated_subset(F2, sphere, 0) == sorted(sphere)
    z = separated_subset(F2, sphere, 2)
    assert len(z) >= math.ceil(12 / 17)
    assert all(F2.distance(a, b) >= 2 for a in z for b in z if a != b)


@pytest.mark.parametrize("name", ["F2", "G2", "G3"])
def test_separated_subset_is_maximal_and_separated(name):
    group = builtin(name)
    rng = rng_from(3)
    for C in (2, 3, 5):
        Y = {random_element(group, rng, 7) for _ in range(120)}
        Z = separated_subset(group, Y, C)
        assert all(group.distance(a, b) >= C for a in Z for b in Z if a != b)
        assert all(any(group.distance(y, z) < C for z in Z) for y in Y)


# ----------------------------------------------------------------------
# iterated trees

def test_levels_zero(F2):
    t = build_iterated_tree(F2, 2, 1, 1, 0)
    assert t.level_sizes() == [1] and t.nodes(0) == [IDENTITY]


def test_small_free_tree(F2):
    t = build_iterated_tree(F2, 2, 1, 1, 3)
    counts = [len(ty.children) for ty in t.types]
    assert counts == [3, 3]
    assert t.level_sizes() == [1, 3, 9, 27]
    th = theta_hat(t)
    assert min(th.values()) > 0
    assert min(th.values()) == pytest.approx(3 / math.exp(2 * math.log(3)))


@pytest.mark.parametrize("name,L,C", [("F2", 2, 1), ("F2", 4, 1), ("G2", 4, 3), ("G3", 6, 1)])
def test_realization_is_tree(name, L, C):
    t = build_iterated_tree(builtin(name), L, 1, C, 2)
    rep = t.check_realization()
    assert rep["is_tree"]
    assert rep["leaves_match_product"]
    # leaves counted node by node from the per-type child counts
    assert t.level_size(1) == len(t.types[0].children)
    assert t.level_size(2) == sum(len(t.types[ty].children) for _, ty, _ in t.iter_nodes(1))
    assert rep["leaves"] == len(t.nodes(2))


@pytest.mark.parametrize("name,L,C", [("F2", 4, 1), ("G2", 4, 3), ("G2", 6, 3)])
def test_branches_pass_audit(name, L, C):
    t = build_iterated_tree(builtin(name), L, 1, C, 3)
    rep = t.audit(sample=32, seed=1)
    assert rep["ok"]
    assert rep["L_prime"] <= L + 2 * 3 + 1


def test_children_are_separated(G2):
    t = build_iterated_tree(G2, 6, 1, 3, 2)
    for ty in t.types:
        ws = [c.word for c in ty.children]
        assert all(G2.distance(a, b) >= 3 for i, a in enumerate(ws) for b in ws[i + 1:])


def test_tree_preconditions(F2):
    with pytest.raises(PreconditionError):
        build_iterated_tree(F2, 1, 1, 1, 2)
    with pytest.raises(PreconditionError):
        build_iterated_tree(F2, 4, 1, 1, -1)


def test_empty_child_set_raises():
    # in Z^2 alone every long geodesic is deep in the single coset
    with pytest.raises(ConstructionError):
        build_iterated_tree(GroupSpec([FreeAbelian(2)]), 8, 1, 1, 2)


def test_tree_serialization(G2):
    d = build_iterated_tree(G2, 4, 1, 3, 3).as_dict()
    assert d["parameters"]["L"] == 4 and d["level_sizes"][0] == 1
    assert d["adjacency"] and d["adjacency"][0]["level"] == 0
    assert len(d["adjacency"][0]["children"]) == d["level_sizes"][1]


def test_random_branch_is_geodesic(G2):
    t = build_iterated_tree(G2, 6, 1, 3, 4)
    rng = rng_from(2)
    for _ in range(10):
        g, letters = t.random_branch(rng)
        assert G2.length(g) == len(letters) and G2.normalize(letters) == g


# ----------------------------------------------------------------------
# critical exponents

def test_full_group_exponent(F2):
    assert abs(critical_exponent(F2).estimate - math.log(3)) < 1e-6


def test_full_tree_exponent(F2, G3):
    assert abs(critical_exponent(full_tree(F2, 4)).estimate - math.log(3)) < 1e-3
    assert abs(critical_exponent(full_tree(G3, 4)).exact - math.log(2) / 2) < 1e-6


def test_ray_tree_exponent(F2):
    ce = critical_exponent(ray_tree(F2, ["a", "b"], 5))
    assert ce.estimate == 0.0 and ce.exact == 0.0


def test_exponent_increases_with_L(F2):
    vals = [critical_exponent(build_iterated_tree(F2, L, 1, 1, 3)).estimate for L in (4, 6, 8)]
    assert vals[0] < vals[1] < vals[2] < math.log(3)


def test_exponent_bracket(G2):
    ce = critical_exponent(build_iterated_tree(G2, 6, 1, 3, 3))
    assert ce.lower <= ce.estimate <= ce.upper
    assert ce.lower <= ce.exact <= ce.upper
    assert abs(ce.estimate - ce.exact) < 1e-3
    assert ce.exact < exact_growth_rate(G2)[0]


def test_poincare_ratio_stable(F2):
    t = build_iterated_tree(F2, 4, 1, 1, 3)
    s = critical_exponent(t).estimate + 0.1
    x = t.nodes(1)[0]
    ratios = [poincare_partial_sum(t, x, s, d) / poincare_partial_sum(t, IDENTITY, s, d)
              for d in (1, 2, 3)]
    assert all(0 < r < math.inf for r in ratios)
    assert abs(ratios[-1] - ratios[-2]) <= abs(ratios[-2] - ratios[-3]) + 1e-12
