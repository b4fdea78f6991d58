"""End-to-end acceptance checks, one test per criterion.

Each test stores a short detail string in DETAILS; the conftest hook prints
one PASS/FAIL line per criterion at the end of the session.
"""
import json
import math
import time
from fractions import Fraction

import pytest

from floydlab.cayley import PathWord, growth_rate
from floydlab.cli import main
from floydlab.floyd import (FloydParams, chain_graph, exhaustive_chain_min, fiber_class,
                            floyd_distance, make_ray, shortcut_distance)
from floydlab.errors import InputError
from floydlab.geometry import TransitionParams, classify_point, projection_diameter
from floydlab.group import IDENTITY, builtin
from floydlab.measure import TreeMeasure, ahlfors_fit, covering_sum, shadow_ratio_stats
from floydlab.sampling import random_element, random_geodesic_word, random_ray, rng_from
from floydlab.trees import build_iterated_tree, critical_exponent, full_tree

from oracles import window_oracle

HALF = Fraction(1, 2)
DETAILS = {}


@pytest.mark.acceptance(1, "growth exactness")
def test_growth_exactness():
    t0 = time.perf_counter()
    f2 = growth_rate(builtin("F2"), 40).estimate
    g3 = growth_rate(builtin("G3"), 40).estimate
    elapsed = time.perf_counter() - t0
    DETAILS[1] = (f"F2 err {abs(f2 - math.log(3)):.1e}, G3 err {abs(g3 - math.log(2) / 2):.1e}, "
                  f"{elapsed:.2f}s")
    assert abs(f2 - math.log(3)) < 1e-6
    assert abs(g3 - math.log(2) / 2) < 1e-6
    assert elapsed < 5


@pytest.mark.acceptance(2, "dimension formula at desk scale")
def test_dimension_formula():
    F2 = builtin("F2")
    t0 = time.perf_counter()
    down = [covering_sum(F2, 1.8, n, HALF) for n in range(6, 15)]
    up = [covering_sum(F2, 1.3, n, HALF) for n in range(6, 15)]
    fit = ahlfors_fit(TreeMeasure(full_tree(F2, 12)))
    elapsed = time.perf_counter() - t0
    DETAILS[2] = f"Q = {fit.Q:.4f} (ln3/ln2 = {math.log(3) / math.log(2):.4f}), {elapsed:.1f}s"
    assert all(b < a for a, b in zip(down, down[1:]))
    assert all(b > a for a, b in zip(up, up[1:]))
    assert 1.50 <= fit.Q <= 1.67
    assert elapsed < 120


@pytest.mark.acceptance(3, "metric identities")
def test_metric_identities():
    checked = 0
    for name in ("F2", "G2"):
        group = builtin(name)
        rng = rng_from(2024)
        for _ in range(100):
            g = random_element(group, rng, 4)
            x, y = random_element(group, rng, 5), random_element(group, rng, 5)
            a = floyd_distance(group, x, y, FloydParams(HALF, IDENTITY, 10))
            b = floyd_distance(group, group.mul(g, x), group.mul(g, y), FloydParams(HALF, g, 10))
            assert (a.lower, a.upper) == (b.lower, b.upper)
            checked += 1
        for _ in range(100):
            o2 = random_element(group, rng, 3)
            k = HALF ** group.length(o2)
            x, y = random_element(group, rng, 5), random_element(group, rng, 5)
            a = floyd_distance(group, x, y, FloydParams(HALF, IDENTITY, 12))
            b = floyd_distance(group, x, y, FloydParams(HALF, o2, 12))
            assert k * b.lower <= a.upper and a.lower <= b.upper / k
            assert k * a.lower <= b.upper and b.lower <= a.upper / k
            checked += 1
    DETAILS[3] = f"{checked} equivariance/bilipschitz checks"


@pytest.mark.acceptance(4, "visual metric equivalence")
def test_visual_equivalence(capsys):
    code = main(["visual-compare", "--group", "F2", "--lambda", "1/2", "--a", str(math.log(2)),
                 "--pairs", "1000", "--radius", "20", "--seed", "0"])
    res = json.loads(capsys.readouterr().out)["results"]
    DETAILS[4] = (f"ratio in [{res['ratio_min']:.6f}, {res['ratio_max']:.6f}], "
                  f"slack {res['max_slack']:.2e}")
    assert code == 0
    assert len(res["pairs"]) == 1000
    assert res["max_slack"] <= 1e-3
    for p in res["pairs"]:
        # the visual side is a float; allow its rounding only
        assert p["ratio_lower"] - 1e-9 <= 4.0 <= p["ratio_upper"] + 1e-9


@pytest.mark.acceptance(5, "relatively hyperbolic pipeline")
def test_relative_pipeline():
    G2 = builtin("G2")
    rng = rng_from(5)
    mismatches = 0
    for k in range(10_000):
        eps, R = (0, 1) if k % 4 == 0 else (1, 2) if k % 4 == 1 else (1, 3) if k % 4 == 2 else (2, 3)
        x = random_element(G2, rng, 6)
        y = G2.mul(x, G2.normalize(random_geodesic_word(G2, rng, rng.randint(0, 12))))
        g = PathWord.geodesic(G2, x, y)
        i = rng.randrange(len(g.vertices))
        got = classify_point(G2, g, i, TransitionParams(eps, R, 8)).coset
        mismatches += got != window_oracle(G2, g, i, eps, R)

    X = G2.coset(IDENTITY, 0)
    shift = G2.parse("t^5")

    def worst(length, seed):
        r = rng_from(seed)
        best, done = 0, 0
        while done < 1000:
            a = G2.mul(shift, random_element(G2, r, length))
            b = G2.mul(shift, random_element(G2, r, length))
            g = PathWord.geodesic(G2, a, b)
            if min(G2.coset_geometry(v, X)[0] for v in g.vertices) < 5:
                continue
            best = max(best, projection_diameter(G2, g, X, 4))
            done += 1
        return best

    d_short, d_long = worst(6, 1), worst(12, 2)
    DETAILS[5] = (f"{mismatches} mismatches in 10^4; projection diameter "
                  f"{d_short} (length 6) vs {d_long} (length 12)")
    assert mismatches == 0
    assert d_long <= d_short


@pytest.mark.acceptance(6, "tree trend, audit and regularity")
def test_tree_trend():
    t0 = time.perf_counter()
    notes = []
    for name, C in (("F2", 1), ("G2", 3)):
        group = builtin(name)
        delta_g = critical_exponent(group).exact
        deltas = []
        for L in (4, 6, 8, 10):
            tree = build_iterated_tree(group, L, 1, C, 3)
            deltas.append(critical_exponent(tree).estimate)
            audit = tree.audit(sample=64, seed=L)
            assert audit["ok"] and audit["L_prime"] <= L + 2 * 3 + 1
            deep = build_iterated_tree(group, L, 1, C, max(3, math.ceil(40 / L)))
            fit = ahlfors_fit(TreeMeasure(deep), points=4)
            notes.append(f"{name} L={L} Q err {fit.relative_error:.3f}")
            assert fit.relative_error < 0.10
        gaps = [delta_g - d for d in deltas]
        notes.append(f"{name} delta_T " + " ".join(f"{d:.4f}" for d in deltas))
        assert all(b > a for a, b in zip(deltas, deltas[1:]))
        assert all(b < a for a, b in zip(gaps, gaps[1:]))
    elapsed = time.perf_counter() - t0
    DETAILS[6] = "; ".join(n for n in notes if "delta_T" in n) + \
        f"; max Q err {max(float(n.split()[-1]) for n in notes if 'Q err' in n):.3f}; {elapsed:.0f}s"
    assert elapsed < 15 * 60


@pytest.mark.acceptance(7, "shadow band")
def test_shadow_band():
    tree = build_iterated_tree(builtin("F2"), 8, 1, 1, 6)
    ratios = []
    for depth in (5, 6):
        stats = shadow_ratio_stats(TreeMeasure(tree, None, depth), 1, (2, 5))
        ratios.append(stats["ratio"])
    DETAILS[7] = f"max/min {ratios[0]:.3f} at depth 5, {ratios[1]:.3f} at depth 6"
    assert ratios[1] <= 20
    assert ratios[1] <= ratios[0]


def _fiber_pair(G2, rng):
    """Two distinct rays in one parabolic fiber, behind a random prefix."""
    while True:
        head = random_geodesic_word(G2, rng, 2)
        try:
            a = make_ray(G2, " ".join(head), "x")
            b = make_ray(G2, " ".join(head + ["y"] * 2), "x y")
        except InputError:
            continue
        if fiber_class(G2, a) == fiber_class(G2, b):
            return [a, b]


@pytest.mark.acceptance(8, "shortcut metric")
def test_shortcut_metric():
    G2 = builtin("G2")
    params = FloydParams(HALF, IDENTITY, 12)
    pairs = zero = 0
    for seed in range(5):
        rng = rng_from(seed)
        sample = _fiber_pair(G2, rng) + _fiber_pair(G2, rng)
        while len(sample) < 12:
            r = random_ray(G2, rng, 2, 2)
            if r not in sample:
                sample.append(r)
        graph = chain_graph(G2, sample, params)
        for i in range(len(sample)):
            for j in range(i + 1, len(sample)):
                sc = shortcut_distance(G2, sample[i], sample[j], sample, params, graph)
                fl = graph.floyd[i][j]
                same = graph.classes[i] == graph.classes[j] and graph.classes[i].is_parabolic
                if same:
                    assert sc.lower == sc.upper == 0
                    zero += 1
                assert sc.upper <= fl.upper and sc.lower <= fl.lower
                assert sc.upper == exhaustive_chain_min(graph.weights, i, j)
                pairs += 1
    DETAILS[8] = f"{pairs} pairs, {zero} same-fiber zeros"
    assert zero >= 10
