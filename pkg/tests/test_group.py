import random

import pytest
from hypothesis import given, settings, strategies as st

from floydlab.errors import InputError
from floydlab.group import (IDENTITY, Cyclic, FreeAbelian, GroupSpec, builtin, load_group,
                            parse_group_text)
from floydlab.sampling import random_element, rng_from

GROUPS = ["F2", "G2", "G3", "Z"]


def words(name):
    g = builtin(name)
    return st.lists(st.sampled_from(g.generator_names), max_size=12)


def test_free_reduction(F2):
    assert F2.parse("a a^-1 b") == F2.parse("b")
    assert F2.format(F2.parse("a a^-1 b")) == "b"


def test_commuting_factor(G2):
    assert G2.parse("x y x^-1 y^-1") == IDENTITY


def test_order_three(G3):
    assert G3.parse("v v v") == IDENTITY


def test_word_length_examples(G2, G3):
    assert G2.length(IDENTITY) == 0
    assert G3.length(G3.parse("v^2")) == 1
    assert G2.length(G2.parse("x^3 y^-2 t x")) == 7


def test_coset_geometry_examples(G2):
    base = G2.coset(IDENTITY, 0)
    d, near = G2.coset_geometry(G2.parse("x^2 t x^5"), base)
    assert d == 6
    assert G2.parse("x^2") in near
    c = G2.coset(G2.parse("t"), 0)
    h = G2.parse("t x^3 y")
    d, near = G2.coset_geometry(h, c)
    assert d == 0 and h in near


def _bfs_lengths(group, radius):
    dist = {IDENTITY: 0}
    frontier = [IDENTITY]
    gens = [group.gen(s) for s in group.generator_names]
    for k in range(1, radius + 1):
        nxt = []
        for g in frontier:
            for s in gens:
                h = group.mul(g, s)
                if h not in dist:
                    dist[h] = k
                    nxt.append(h)
        frontier = nxt
    return dist


@pytest.mark.parametrize("name", GROUPS)
def test_length_matches_bfs(name):
    group = builtin(name)
    for g, d in _bfs_lengths(group, 6).items():
        assert group.length(g) == d


@pytest.mark.parametrize("name", ["F2", "G2", "G3"])
def test_normal_forms_unique_per_sphere(name):
    from floydlab.cayley import sphere_counts
    group = builtin(name)
    dist = _bfs_lengths(group, 6)
    counts = [0] * 7
    for d in dist.values():
        counts[d] += 1
    assert counts == sphere_counts(group, 6)


@pytest.mark.parametrize("name", GROUPS)
def test_word_times_inverse_is_identity(name):
    group = builtin(name)

    @given(words(name))
    @settings(max_examples=60, deadline=None)
    def check(w):
        g = group.normalize(w)
        assert group.mul(g, group.inv(g)) == IDENTITY
        assert group.length(g) == group.length(group.inv(g))

    check()


@pytest.mark.parametrize("name", GROUPS)
def test_triangle_inequality(name):
    group = builtin(name)
    rng = rng_from(3)
    for _ in range(200):
        g, h = random_element(group, rng, 8), random_element(group, rng, 8)
        assert group.length(group.mul(g, h)) <= group.length(g) + group.length(h)


def test_coset_geometry_bruteforce(G2):
    # a nearest point rep * v has |v| <= 2 |rep| + 2 |h| <= 12
    vecs = [((0, (i, j)),) if (i, j) != (0, 0) else IDENTITY
            for i in range(-12, 13) for j in range(-12, 13) if abs(i) + abs(j) <= 12]
    cosets = [G2.coset(IDENTITY, 0), G2.coset(G2.parse("t"), 0),
              G2.coset(G2.parse("x t^-1"), 0)]
    for c in cosets:
        members = [G2.mul(c.rep, v) for v in vecs]
        for h in G2.ball_elements(4):
            best = min(G2.distance(h, p) for p in members)
            d, near = G2.coset_geometry(h, c)
            assert d == best
            assert all(G2.distance(h, p) == d for p in near)


def test_cyclic_tie_keeps_both_spellings():
    g = GroupSpec([Cyclic(4), FreeAbelian(1)])
    u2 = g.power(g.gen(g.generator_names[0]), 2)
    assert g.length(u2) == 2
    assert len(list(g.syllable_geodesics(u2[0]))) == 2


def test_group_file_roundtrip(tmp_path):
    text = 'name = "H"\nfactors = [ {type="free_abelian", rank=2}, {type="free", rank=1} ]\n'
    p = tmp_path / "g.toml"
    p.write_text(text)
    g = load_group(str(p))
    assert g.generator_names == ["x1", "x1^-1", "x2", "x2^-1", "t", "t^-1"]
    assert g.name == "H"
    assert g.peripheral == frozenset({0})


def test_group_file_rank_one_peripheral():
    text = 'factors = [ {type="free", rank=2} ]\nperipheral = [0]\n'
    with pytest.raises(InputError):
        parse_group_text(text)
    g = parse_group_text(text + "allow_rank_one = true\n")
    assert g.peripheral == frozenset({0})


def test_group_file_rejects_unknown_key():
    with pytest.raises(InputError, match=":2:"):
        parse_group_text('factors = [ {type="cyclic", order=3} ]\ncolour = 1\n')


def test_group_file_cyclic_needs_order():
    with pytest.raises(InputError):
        parse_group_text('factors = [ {type="cyclic"} ]\n')


def test_name_overrides():
    g = parse_group_text('factors = [ {type="free", rank=2} ]\n[names]\nt1 = "p"\nt2 = "q"\n')
    assert "p" in g.generator_names and "q^-1" in g.generator_names


def test_rank_one_peripheral_needs_flag():
    with pytest.raises(InputError):
        GroupSpec([FreeAbelian(1), FreeAbelian(1)], peripheral=[0])
    g = GroupSpec([FreeAbelian(1), FreeAbelian(1)], peripheral=[0], allow_rank_one=True)
    assert g.peripheral == frozenset({0})


def test_unknown_builtin():
    with pytest.raises(InputError):
        builtin("H7")


def test_spell_is_geodesic(G2):
    rng = random.Random(5)
    for _ in range(100):
        g = random_element(G2, rng, 10)
        letters = G2.spell(g)
        assert len(letters) == G2.length(g)
        assert G2.normalize(letters) == g
