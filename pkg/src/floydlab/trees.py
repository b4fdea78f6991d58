"""Partial cones, cone types, separated nets and iterated transitional trees.

Deep and transitional vertices on a geodesic of a free product depend only on
where the peripheral syllables sit along the path, not on how those syllables
are spelled.  If ``[a, b]`` is the run of positions a peripheral syllable
occupies, then a vertex at position p with window ``[lo, hi]`` (positions
within R of p, clipped at the path ends) is deep exactly when

* the window fits in ``[a - eps, b + eps]`` for some run, or
* ``hi - lo <= 2 eps`` (the coset through a single vertex absorbs it).

Every geodesic between two points has the same syllable skeleton, so the
existential clause in the definition of a partial cone reduces to a scan of
the canonical geodesic.  The same observation gives a finite *cone key*: the
runs within ``3R + eps + 1`` letters of the apex, the sign pattern of the last
syllable and (when short) the exact length.  Partial-cone membership of
``g w`` is a function of ``key(g)`` and ``w``.  The brute-force route
(enumerating geodesics and calling :func:`geometry.classify_point`) is kept
for validation.

A :class:`TreeSet` is stored as a finite automaton: each node type carries a
child template ``Y`` and the children of a node x of that type are ``x y`` for
``y`` in ``Y``.  Nodes of the same type have translated child sets, which is
the periodicity the construction needs, and levels are generated on demand.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

from .cayley import PathWord, growth_rate, exact_growth_rate, iter_geodesics
from .errors import ConstructionError, PreconditionError, ResourceError
from .geometry import TransitionParams, classify_point, is_transitional_path
from .group import IDENTITY, Cyclic, Element, GroupSpec
from .sampling import rng_from

DEFAULT_NODE_CAP = 200_000


# ----------------------------------------------------------------------
# enumeration by normal form

def _factor_vectors(f, k: int) -> list:
    """Coordinate tuples of norm exactly k in one factor, sorted."""
    if isinstance(f, Cyclic):
        n = f.order
        if 2 * k < n:
            return [(k,), (n - k,)]
        if 2 * k == n:
            return [(k,)]
        return []
    out = []

    def rec(prefix: list, budget: int, left: int):
        if left == 1:
            if budget == 0:
                out.append(tuple(prefix + [0]))
            else:
                out.append(tuple(prefix + [-budget]))
                out.append(tuple(prefix + [budget]))
            return
        for v in range(-budget, budget + 1):
            rec(prefix + [v], budget - abs(v), left - 1)

    rec([], k, f.rank)
    return sorted(out)


def elements_of_length(group: GroupSpec, n: int) -> Iterator[Element]:
    """All elements of word length n, in increasing normal-form order."""
    facs = group.factors
    cache: dict = {}

    def syllables(i, k):
        if (i, k) not in cache:
            cache[(i, k)] = [(i, c) for c in _factor_vectors(facs[i], k)]
        return cache[(i, k)]

    def rec(m: int, prev: int):
        if m == 0:
            yield ()
            return
        for i in range(len(facs)):
            if i == prev:
                continue
            for k in range(1, m + 1):
                syls = syllables(i, k)
                if not syls:
                    continue
                for s in syls:
                    for rest in rec(m - k, i):
                        yield (s,) + rest

    if n < 0:
        return
    yield from rec(n, -1)


# ----------------------------------------------------------------------
# skeleton verdicts

def _sign(v: int) -> int:
    return (v > 0) - (v < 0)


def peripheral_runs(group: GroupSpec, g: Element) -> list:
    """Position intervals [a, b] of the peripheral syllables of g."""
    runs, pos = [], 0
    for s in g:
        k = group.syllable_length(s)
        if s[0] in group.peripheral:
            runs.append((pos, pos + k))
        pos += k
    return runs


def _deep_at(p: int, lo_end, hi_end: int, runs, eps: int, R: int) -> bool:
    lo = p - R if lo_end is None else max(lo_end, p - R)
    hi = min(hi_end, p + R)
    if hi - lo <= 2 * eps:
        return True
    for a, b in runs:
        if a - eps <= lo and hi <= b + eps:
            return True
    return False


def skeleton_verdicts(group: GroupSpec, h: Element, eps: int, R: int) -> list:
    """Deep flags for the vertices of any geodesic from 1 to h."""
    n = group.length(h)
    if not group.peripheral:
        return [False] * (n + 1)
    runs = peripheral_runs(group, h)
    return [_deep_at(p, 0, n, runs, eps, R) for p in range(n + 1)]


# ----------------------------------------------------------------------
# cone keys

class ConeModel:
    """Local partial-cone calculus for fixed (eps, R)."""

    def __init__(self, group: GroupSpec, eps: int = 1, R: int = 3):
        if eps < 0 or R < 1:
            raise PreconditionError("need eps >= 0 and R >= 1")
        self.group = group
        self.eps = eps
        self.R = R
        self.horizon = 3 * R + eps + 1
        self.has_peripheral = bool(group.peripheral)

    def pattern(self, s) -> tuple:
        i, c = s
        if isinstance(self.group.factors[i], Cyclic):
            return (i, c)
        return (i, tuple(_sign(v) for v in c))

    def key(self, g: Element) -> tuple:
        """(start, last, runs): the data that determines g^-1 Omega(g)."""
        group, B = self.group, self.horizon
        last = self.pattern(g[-1]) if g else ()
        if not self.has_peripheral:
            return (-1, last, ())
        n = group.length(g)
        start = n if n < B else -1
        runs, end = [], 0
        for s in reversed(g):
            k = group.syllable_length(s)
            a = end - k
            if s[0] in group.peripheral:
                runs.append((max(a, -B - 1), end))
            end = a
            if end < -B:
                break
        return (start, last, tuple(reversed(runs)))

    def extend(self, key: tuple, w: Element):
        """Data for h = g w where key = key(g), or None if |h| < |g| + |w|.

        Returns ``(canonical, transitional, child_key, length)``: whether the
        canonical spelling of h extends that of g, whether a transitional
        vertex lies within 2R of g on [1, h], and key(h).
        """
        group, eps, R, B = self.group, self.eps, self.R, self.horizon
        start, last, runs = key
        if not w:
            return True, True, key, 0
        first = w[0]
        f = group.factors[first[0]]
        merged = bool(last) and last[0] == first[0]
        canonical = True
        merged_pattern = None
        if merged:
            if isinstance(f, Cyclic):
                r = (last[1][0] + first[1][0]) % f.order
                if r == 0 or f.norm((r,)) != f.norm(last[1]) + f.norm(first[1]):
                    return None
                merged_pattern = (first[0], (r,))
            else:
                signs = last[1]
                if any(a * b < 0 for a, b in zip(signs, first[1])):
                    return None
                if f.rank > 1:
                    hi_last = max(j for j, a in enumerate(signs) if a)
                    lo_first = min(j for j, b in enumerate(first[1]) if b)
                    canonical = hi_last <= lo_first
                merged_pattern = (first[0], tuple(a or _sign(b) for a, b in zip(signs, first[1])))
        allruns = list(runs)
        pos = 0
        for j, s in enumerate(w):
            k = group.syllable_length(s)
            if s[0] in group.peripheral:
                if j == 0 and merged:
                    a, _ = allruns.pop()
                    allruns.append((a, k))
                else:
                    allruns.append((pos, pos + k))
            pos += k
        wl = pos
        if not self.has_peripheral:
            transitional = True
        else:
            lo_end = -start if start >= 0 else None
            lo_p = -2 * R if lo_end is None else max(lo_end, -2 * R)
            transitional = any(not _deep_at(p, lo_end, wl, allruns, eps, R)
                               for p in range(lo_p, min(wl, 2 * R) + 1))
        # key of h
        new_last = merged_pattern if (merged and len(w) == 1) else self.pattern(w[-1])
        if not self.has_peripheral:
            return canonical, transitional, (-1, new_last, ()), wl
        new_start = start + wl if 0 <= start and start + wl < B else -1
        new_runs = tuple((max(a - wl, -B - 1), b - wl) for a, b in allruns if b - wl >= -B)
        return canonical, transitional, (new_start, new_last, new_runs), wl

    def member(self, key: tuple, w: Element) -> bool:
        """g w in Omega(g): geodesic through g and clause (1) or (2)."""
        r = self.extend(key, w)
        if r is None:
            return False
        return r[3] <= 2 * self.R or r[1]

    def continuation_key(self, g: Element) -> tuple:
        return self.pattern(g[-1]) if g else ()


# ----------------------------------------------------------------------
# partial cones and fingerprints

@dataclass(frozen=True)
class PartialConeQuery:
    apex: Element
    eps: int = 1
    R: int = 3
    depth: int = 4


def cone_member_bruteforce(group: GroupSpec, g: Element, h: Element, eps: int, R: int) -> bool:
    """Membership of h in Omega(g) by enumerating geodesics through g."""
    w = group.mul(group.inv(g), h)
    lg, lw = group.length(g), group.length(w)
    if group.length(h) != lg + lw:
        return False
    if lw <= 2 * R:
        return True
    p = TransitionParams(eps, R, 0)
    for first in iter_geodesics(group, IDENTITY, g):
        for second in iter_geodesics(group, g, h):
            path = PathWord.build(group, IDENTITY, first.letters + second.letters)
            for i in range(max(0, lg - 2 * R), min(lg + lw, lg + 2 * R) + 1):
                if not classify_point(group, path, i, p).is_deep:
                    return True
    return False


def partial_cone_members(group: GroupSpec, q: PartialConeQuery, method: str = "local",
                         cap: int = 2_000_000) -> set:
    """Omega_{eps,R}(apex) intersected with B(1, depth)."""
    from .cayley import ball_count
    if ball_count(group, q.depth) > cap:
        raise ResourceError(f"B(1, {q.depth}) exceeds the cap {cap}")
    g = q.apex
    lg = group.length(g)
    out = set()
    if method == "enumerate":
        for n in range(lg, q.depth + 1):
            for h in elements_of_length(group, n):
                if cone_member_bruteforce(group, g, h, q.eps, q.R):
                    out.add(h)
        return out
    if method != "local":
        raise PreconditionError(f"unknown method {method!r}")
    model = ConeModel(group, q.eps, q.R)
    key = model.key(g)
    for n in range(0, q.depth - lg + 1):
        for w in elements_of_length(group, n):
            if model.member(key, w):
                out.add(group.mul(g, w))
    return out


def cone_fingerprint(group: GroupSpec, g: Element, eps: int = 1, R: int = 3, D: int = 3) -> frozenset:
    """g^-1 (Omega(g) ∩ B(g, D)) as a frozenset of normal forms."""
    model = ConeModel(group, eps, R)
    key = model.key(g)
    return frozenset(w for n in range(D + 1) for w in elements_of_length(group, n)
                     if model.member(key, w))


def distinct_fingerprints(group: GroupSpec, n: int, eps: int = 1, R: int = 3, D: int = 3) -> int:
    """Number of distinct depth-D fingerprints over B(1, n)."""
    model = ConeModel(group, eps, R)
    by_key: dict = {}
    for m in range(n + 1):
        for g in elements_of_length(group, m):
            k = model.key(g)
            if k not in by_key:
                by_key[k] = cone_fingerprint(group, g, eps, R, D)
    return len(set(by_key.values()))


def _prefix_keys(group: GroupSpec, g: Element, C: int) -> list:
    """Syllable prefixes p of g with fewer than C letters after the syllable following p.

    Two elements at distance < C share their common syllable prefix, and
    that prefix is among the keys of both.
    """
    keys, tail = [g], 0
    for m in range(len(g) - 1, -1, -1):
        if m + 1 < len(g):
            tail += group.syllable_length(g[m + 1])
        if tail >= C:
            break
        keys.append(g[:m])
    return keys


def separated_subset(group: GroupSpec, Y, C: int) -> list:
    """Greedy maximal C-separated subset of Y in (length, normal form) order."""
    items = sorted(set(Y), key=lambda g: (group.length(g), g))
    if C <= 1:
        return items
    index: dict = {}
    out = []
    for y in items:
        keys = _prefix_keys(group, y, C)
        if any(group.distance(y, z) < C for k in keys for z in index.get(k, ())):
            continue
        out.append(y)
        for k in keys:
            index.setdefault(k, []).append(y)
    return out


# ----------------------------------------------------------------------
# tree sets

@dataclass(frozen=True)
class TreeParams:
    L: int = 8
    delta: float = 1
    C: int = 1
    eps: int = 1
    R: int = 3

    @property
    def transitional_bound(self) -> int:
        """L' = L + 2R + Delta, rounded down."""
        return int(math.floor(self.L + 2 * self.R + self.delta))


@dataclass
class ChildTemplate:
    word: Element           # child relative to its parent
    letters: tuple          # canonical spelling of ``word``
    length: int
    type: int


@dataclass
class NodeType:
    key: tuple
    children: list = field(default_factory=list)   # ChildTemplate, sorted by letters
    candidates: int = 0      # annulus elements in the partial cone
    class_size: int = 0      # the chosen same-type class before separation


class TreeSet:
    """An iterated tree given by node types and child templates."""

    def __init__(self, group: GroupSpec, params: TreeParams, types: list, levels: int,
                 kind: str = "iterated"):
        self.group = group
        self.params = params
        self.types = types
        self.levels = levels
        self.kind = kind

    # counting -----------------------------------------------------------

    def type_counts(self, level: int) -> list:
        vec = [0] * len(self.types)
        vec[0] = 1
        for _ in range(level):
            nxt = [0] * len(self.types)
            for t, c in enumerate(vec):
                if c:
                    for ch in self.types[t].children:
                        nxt[ch.type] += c
            vec = nxt
        return vec

    def level_size(self, level: int) -> int:
        return sum(self.type_counts(level))

    def level_sizes(self) -> list:
        return [self.level_size(i) for i in range(self.levels + 1)]

    def length_range(self, level: int) -> tuple:
        """(min, max) word length over nodes of a level."""
        lo = {0: 0}
        hi = {0: 0}
        for _ in range(level):
            nlo, nhi = {}, {}
            for t in lo:
                for ch in self.types[t].children:
                    a, b = lo[t] + ch.length, hi[t] + ch.length
                    nlo[ch.type] = min(nlo.get(ch.type, a), a)
                    nhi[ch.type] = max(nhi.get(ch.type, b), b)
            lo, hi = nlo, nhi
        if not lo:
            return (0, 0)
        return min(lo.values()), max(hi.values())

    # materialization -----------------------------------------------------

    def iter_nodes(self, level: int, cap: int = DEFAULT_NODE_CAP) -> Iterator[tuple]:
        """(element, type, letters) for every node of a level, in template order."""
        if self.level_size(level) > cap:
            raise ResourceError(f"level {level} has {self.level_size(level)} nodes, above the cap {cap}")
        group = self.group

        def rec(g, t, letters, k):
            if k == level:
                yield g, t, letters
                return
            for ch in self.types[t].children:
                yield from rec(group.mul(g, ch.word), ch.type, letters + ch.letters, k + 1)

        yield from rec(IDENTITY, 0, (), 0)

    def nodes(self, level: int, cap: int = DEFAULT_NODE_CAP) -> list:
        return [g for g, _, _ in self.iter_nodes(level, cap)]

    def children(self, x: Element, t: int) -> list:
        return [self.group.mul(x, ch.word) for ch in self.types[t].children]

    def random_branch(self, rng, level: int | None = None) -> tuple:
        """(element, letters) of a random node, choosing children uniformly."""
        level = self.levels if level is None else level
        g, t, letters = IDENTITY, 0, ()
        for _ in range(level):
            chs = self.types[t].children
            ch = chs[rng.randrange(len(chs))]
            g = self.group.mul(g, ch.word)
            letters += ch.letters
            t = ch.type
        return g, letters

    # checks --------------------------------------------------------------

    def check_realization(self, levels: int | None = None, cap: int = DEFAULT_NODE_CAP) -> dict:
        """Verify the union of branch geodesics is a tree and nodes are distinct."""
        levels = self.levels if levels is None else levels
        group = self.group
        pred = {IDENTITY: None}
        ok = True
        nodes = set()
        count = 0
        for level in range(1, levels + 1):
            for g, t, letters in self.iter_nodes(level, cap):
                count += 1
                if g in nodes:
                    ok = False
                nodes.add(g)
        # walk every branch once (the deepest level covers all shallower ones)
        for g, t, letters in self.iter_nodes(levels, cap):
            v = IDENTITY
            for s in letters:
                w = group.mul(v, group.gen(s))
                if pred.setdefault(w, v) != v:
                    ok = False
                v = w
            if group.length(v) != len(letters):
                ok = False
        leaves = self.level_size(levels)
        return {"is_tree": ok, "nodes": count, "vertices": len(pred), "leaves": leaves,
                "leaves_match_product": leaves == self.level_size(levels)}

    def audit(self, sample: int = 64, seed: int = 0, exhaustive_cap: int = 512) -> dict:
        """Transitional audit of branches to the deepest level."""
        group, p = self.group, self.params
        tp = TransitionParams(p.eps, p.R, p.transitional_bound)
        total = self.level_size(self.levels)
        if total <= exhaustive_cap:
            branches = [letters for _, _, letters in self.iter_nodes(self.levels)]
            exhaustive = True
        else:
            rng = rng_from(seed)
            branches = [self.random_branch(rng)[1] for _ in range(sample)]
            exhaustive = False
        worst, ok = 0, True
        for letters in branches:
            rep = is_transitional_path(group, PathWord.build(group, IDENTITY, letters), tp)
            worst = max(worst, rep.max_gap)
            ok = ok and rep.ok
        return {"ok": ok, "checked": len(branches), "total": total, "exhaustive": exhaustive,
                "max_gap": worst, "L_prime": tp.L}

    # serialization -------------------------------------------------------

    def as_dict(self, adjacency_levels: int = 2) -> dict:
        group = self.group
        p = self.params
        out = {
            "kind": self.kind,
            "group": group.name,
            "parameters": {"L": p.L, "delta": p.delta, "C": p.C, "eps": p.eps, "R": p.R,
                           "levels": self.levels},
            "level_sizes": self.level_sizes(),
            "types": [
                {"index": i, "key": repr(t.key), "candidates": t.candidates,
                 "class_size": t.class_size,
                 "children": [{"word": group.format(c.word), "length": c.length, "type": c.type}
                              for c in t.children]}
                for i, t in enumerate(self.types)],
        }
        adj = []
        for level in range(min(adjacency_levels, self.levels)):
            if self.level_size(level + 1) > 50_000:
                break
            for g, t, _ in self.iter_nodes(level):
                adj.append({"level": level, "node": group.format(g),
                            "children": [group.format(c) for c in self.children(g, t)]})
        out["adjacency"] = adj
        return out


def _prefix_free(group: GroupSpec, words) -> list:
    """Drop every word whose spelling extends the spelling of a kept word.

    Shorter words are kept first.  A prefix-free template set decodes every
    branch spelling uniquely, so distinct branches end at distinct nodes.
    """
    kept, spelled = [], set()
    for w in sorted(words, key=lambda g: (group.length(g), g)):
        letters = tuple(group.spell(w))
        if any(letters[:k] in spelled for k in range(1, len(letters))):
            continue
        kept.append(w)
        spelled.add(letters)
    return kept


def _sorted_templates(group: GroupSpec, items) -> list:
    out = [ChildTemplate(w, tuple(group.spell(w)), group.length(w), t) for w, t in items]
    out.sort(key=lambda c: c.letters)
    return out


def _pattern_classes(group: GroupSpec, model: ConeModel, i: int, k: int) -> list:
    """Syllables of factor i and norm k grouped by sign pattern (or residue)."""
    out: dict = {}
    for c in _factor_vectors(group.factors[i], k):
        out.setdefault(model.pattern((i, c)), []).append((i, c))
    return sorted(out.items())


def _descriptors(group: GroupSpec, n: int, model: ConeModel) -> list:
    """Words of length n up to everything :meth:`ConeModel.extend` ignores.

    Each entry is ``(representative, count, parts)`` where ``parts`` lists
    the syllable choices per position; their product is the class.
    """
    facs = group.factors
    out = []

    def skeletons(m: int, prev: int):
        if m == 0:
            yield ()
            return
        for i in range(len(facs)):
            if i == prev:
                continue
            for k in range(1, m + 1):
                if _factor_vectors(facs[i], k):
                    for rest in skeletons(m - k, i):
                        yield ((i, k),) + rest

    for sk in skeletons(n, -1):
        firsts = _pattern_classes(group, model, *sk[0])
        if len(sk) == 1:
            for _, syls in firsts:
                out.append(((syls[0],), len(syls), [syls]))
            continue
        lasts = _pattern_classes(group, model, *sk[-1])
        middle = [[(i, c) for c in _factor_vectors(facs[i], k)] for i, k in sk[1:-1]]
        mid_count = math.prod(len(m) for m in middle)
        for _, fs in firsts:
            for _, ls in lasts:
                rep = (fs[0],) + tuple(m[0] for m in middle) + (ls[0],)
                out.append((rep, len(fs) * len(ls) * mid_count, [fs] + middle + [ls]))
    return out


def build_iterated_tree(group: GroupSpec, L: int, delta: float = 1, C: int = 1, levels: int = 3,
                        eps: int = 1, R: int = 3, max_types: int = 64) -> TreeSet:
    """Iterated transitional tree by same-type, C-separated annulus cones.

    For a node type with key k the candidates are the w with
    ``L - delta <= |w| < L + delta`` such that ``g w`` lies in the partial
    cone with a transitional vertex within 2R of g and the canonical spelling
    of ``g w`` extends that of g.  The candidates are grouped by key(g w); the
    largest group (ties to the smaller key) is thinned to a greedy C-separated
    subset and then made prefix-free, giving the child template of the type.
    """
    if not L > delta:
        raise PreconditionError(f"need L > delta, got L={L}, delta={delta}")
    if levels < 0:
        raise PreconditionError("levels must be non-negative")
    params = TreeParams(L, delta, C, eps, R)
    model = ConeModel(group, eps, R)
    lengths = [n for n in range(max(1, math.ceil(L - delta)), math.ceil(L + delta) + 1)
               if L - delta <= n < L + delta]
    descriptors = [d for n in lengths for d in _descriptors(group, n, model)]
    index = {model.key(IDENTITY): 0}
    types = [NodeType(model.key(IDENTITY))]
    todo = [0]
    while todo:
        t = todo.pop()
        key = types[t].key
        counts, candidates = Counter(), 0
        groups: dict = {}
        for rep, count, parts in descriptors:
            r = model.extend(key, rep)
            if r is None:
                continue
            canonical, trans, ck, wl = r
            if wl <= 2 * R or trans:
                candidates += count
            if canonical and trans:
                counts[ck] += count
                groups.setdefault(ck, []).append(parts)
        if not counts:
            raise ConstructionError(
                f"empty child set for a node type (L={L}, delta={delta}, C={C})")
        best = min(counts, key=lambda k: (-counts[k], k))
        members = [tuple(w) for parts in groups[best] for w in itertools.product(*parts)]
        chosen = _prefix_free(group, separated_subset(group, members, C))
        if best not in index:
            if len(types) >= max_types:
                raise ConstructionError(f"more than {max_types} node types")
            index[best] = len(types)
            types.append(NodeType(best))
            todo.append(index[best])
        ct = index[best]
        types[t].children = _sorted_templates(group, [(w, ct) for w in chosen])
        types[t].candidates = candidates
        types[t].class_size = len(members)
    return TreeSet(group, params, types, levels)


def full_tree(group: GroupSpec, levels: int) -> TreeSet:
    """Tree of canonical geodesic spellings: the children of g are the g s
    whose canonical spelling extends that of g.  Its nodes at level n are the
    sphere S(n)."""
    model = ConeModel(group, 0, 1)
    gens = [group.gen(n) for n in group.generator_names]
    index = {(): 0}
    types = [NodeType(())]
    todo = [0]
    while todo:
        t = todo.pop()
        key = types[t].key
        items = []
        for s in gens:
            r = model.extend((-1, key, ()), s)
            if r is None or not r[0]:
                continue
            ck = r[2][1]
            if ck not in index:
                index[ck] = len(types)
                types.append(NodeType(ck))
                todo.append(index[ck])
            items.append((s, index[ck]))
        types[t].children = _sorted_templates(group, items)
        types[t].candidates = types[t].class_size = len(items)
    return TreeSet(group, TreeParams(1, 0.5, 1, 0, 1), types, levels, kind="full")


def ray_tree(group: GroupSpec, letters: Sequence[str], levels: int) -> TreeSet:
    """A single branch repeating the given word: one child per node."""
    w = group.normalize(letters)
    if group.length(group.power(w, 2)) != 2 * group.length(w) or not w:
        raise PreconditionError("the word must be a nontrivial geodesic whose square is geodesic")
    t = NodeType(("ray",), [ChildTemplate(w, tuple(group.spell(w)), group.length(w), 0)], 1, 1)
    return TreeSet(group, TreeParams(group.length(w), 0.5, 1, 1, 3), [t], levels, kind="ray")


# ----------------------------------------------------------------------
# critical exponents

@dataclass
class CriticalExponent:
    estimate: float
    lower: float
    upper: float
    exact: float
    counts: list = field(default_factory=list)       # a_n = #{x in T : |x| = n}
    partial_sums: dict = field(default_factory=dict)  # s -> Theta_s partial sum

    def as_dict(self) -> dict:
        return {"estimate": self.estimate, "lower": self.lower, "upper": self.upper,
                "exact": self.exact,
                "partial_sums": {f"{s:.6f}": v for s, v in sorted(self.partial_sums.items())}}


def tree_length_counts(tree: TreeSet, n_max: int) -> list:
    """a_n for the infinite tree (all levels), n = 0..n_max."""
    k = len(tree.types)
    grouped = []
    for t in tree.types:
        c = Counter((ch.length, ch.type) for ch in t.children)
        grouped.append(sorted(c.items()))
    table = [[0] * k for _ in range(n_max + 1)]
    table[0][0] = 1
    for n in range(n_max + 1):
        row = table[n]
        for t, c in enumerate(row):
            if not c:
                continue
            for (ln, ct), mult in grouped[t]:
                if n + ln <= n_max:
                    table[n + ln][ct] += c * mult
    return [sum(r) for r in table]


def _transfer(tree: TreeSet, z: float) -> np.ndarray:
    k = len(tree.types)
    m = np.zeros((k, k))
    for i, t in enumerate(tree.types):
        for ch in t.children:
            m[i, ch.type] += z ** ch.length
    return m


def _spectral_radius(m: np.ndarray) -> float:
    return float(max(abs(np.linalg.eigvals(m)))) if m.size else 0.0


def exact_tree_exponent(tree: TreeSet) -> float:
    """-log z where the transfer matrix sum_y z^|y| has spectral radius 1."""
    if _spectral_radius(_transfer(tree, 1.0)) <= 1.0:
        return 0.0
    lo, hi = 0.0, 1.0
    for _ in range(100):
        mid = 0.5 * (lo + hi)
        if _spectral_radius(_transfer(tree, mid)) < 1.0:
            lo = mid
        else:
            hi = mid
    return -math.log(0.5 * (lo + hi))


def critical_exponent(target, n_max: int | None = None) -> CriticalExponent:
    """Critical exponent of a tree set (or of the whole group).

    The estimate is the slope of log #(A(n) ∩ T) over the last half of the
    range, with A(n) the annulus of half-width equal to the longest child.
    ``upper`` applies Fekete's lemma to the annulus counts corrected by the
    largest observed ratio c = A(n+m) / (A(n) A(m)), which makes c A
    submultiplicative on the range; ``lower`` is the smallest windowed tail
    slope.  ``exact`` is the transfer-matrix root, and the bracket is
    widened to contain it when the finite range falls short.
    """
    if isinstance(target, GroupSpec):
        n_max = n_max or 40
        rep = growth_rate(target, n_max)
        lo, hi = exact_growth_rate(target)
        return CriticalExponent(rep.estimate, rep.lower, rep.upper, 0.5 * (lo + hi),
                                [r[1] for r in rep.rows])
    tree = target
    longest = max((ch.length for t in tree.types for ch in t.children), default=1)
    n_max = n_max or max(60, 40 * longest)
    a = tree_length_counts(tree, n_max)
    exact = exact_tree_exponent(tree)
    cum, acc = [], 0
    for v in a:
        acc += v
        cum.append(acc)
    half = n_max // 2
    # annulus counts with window 2 * longest: nonzero for every n and free of
    # the polynomial factor that cumulative counts carry
    w = longest
    ann = [sum(a[max(0, n - w):n + w]) for n in range(n_max + 1)]
    if cum[-1] <= 1:
        estimate = 0.0
        lower = upper = 0.0
    else:
        top = n_max - w
        estimate = max(0.0, (math.log(ann[top]) - math.log(ann[half])) / (top - half))
        win = max(longest, 1)
        slopes = [(math.log(cum[n]) - math.log(cum[n - win])) / win
                  for n in range(half + win, n_max + 1)]
        lower = min(min(slopes), estimate)
        # Fekete on the annulus counts with a correction constant
        idx = [n for n in range(1, n_max + 1) if ann[n] > 0]
        c = 1.0
        for i in idx:
            for j in idx:
                if i + j <= n_max and ann[i + j] > 0:
                    c = max(c, ann[i + j] / (ann[i] * ann[j]))
        fek = min(math.log(c * ann[n]) / n for n in idx)
        upper = max(fek, estimate)
    lower, upper = min(lower, exact), max(upper, exact)
    sums = {}
    for s in (estimate - 0.1, estimate, estimate + 0.1):
        if s > 0:
            sums[s] = float(sum(v * math.exp(-s * n) for n, v in enumerate(a)))
    return CriticalExponent(estimate, lower, upper, exact, a, sums)


def poincare_partial_sum(tree: TreeSet, x: Element, s: float, levels: int | None = None,
                         cap: int = DEFAULT_NODE_CAP) -> float:
    """sum over nodes g up to ``levels`` of exp(-s d(x, g))."""
    levels = tree.levels if levels is None else levels
    group = tree.group
    total = 0.0
    for level in range(levels + 1):
        for g, _, _ in tree.iter_nodes(level, cap):
            total += math.exp(-s * group.distance(x, g))
    return total


def theta_hat(tree: TreeSet, growth: float | None = None) -> dict:
    """Per-type child counts against exp(delta_G L)."""
    if growth is None:
        growth = exact_growth_rate(tree.group)[0]
    scale = math.exp(growth * tree.params.L)
    return {i: len(t.children) / scale for i, t in enumerate(tree.types)}
