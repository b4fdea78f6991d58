"""Balls, spheres, annuli, geodesics and growth rates in the Cayley graph."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterator

from .errors import PreconditionError, ResourceError
from .group import IDENTITY, Cyclic, Element, FreeAbelian, GroupSpec

DEFAULT_CAP = 50_000_000


@dataclass(frozen=True)
class PathWord:
    """An edge path: a base vertex and the generator letters read from it."""

    base: Element
    letters: tuple
    vertices: tuple

    @classmethod
    def build(cls, group: GroupSpec, base: Element, letters) -> "PathWord":
        letters = tuple(letters)
        verts = [base]
        for s in letters:
            verts.append(group.mul(verts[-1], group.gen(s)))
        return cls(base, letters, tuple(verts))

    @classmethod
    def geodesic(cls, group: GroupSpec, g: Element, h: Element) -> "PathWord":
        """The canonical geodesic from g to h (normal-form spelling)."""
        return cls.build(group, g, group.spell(group.mul(group.inv(g), h)))

    def __len__(self):
        return len(self.letters)

    @property
    def start(self) -> Element:
        return self.vertices[0]

    @property
    def end(self) -> Element:
        return self.vertices[-1]


@dataclass
class Ball:
    """B(1, radius) split into spheres, each sorted by normal form."""

    radius: int
    spheres: list
    parent: dict = field(repr=False)

    @property
    def elements(self) -> list:
        return [g for sphere in self.spheres for g in sphere]

    def sphere(self, k: int) -> list:
        return self.spheres[k]

    def __len__(self):
        return sum(len(s) for s in self.spheres)

    def __contains__(self, g):
        return g in self.parent

    def sizes(self) -> list:
        return [len(s) for s in self.spheres]


def sphere_counts(group: GroupSpec, n: int) -> list:
    """Exact sphere sizes |S(0)|, ..., |S(n)| by dynamic programming.

    ``last[k][i]`` counts elements of length k whose final syllable lies in
    factor i; a new syllable of length j in factor i may follow anything that
    does not already end in factor i.
    """
    if n < 0:
        raise PreconditionError("radius must be non-negative")
    return list(_sphere_counts(group.factors, n))


@lru_cache(maxsize=64)
def _sphere_counts(factors: tuple, n: int) -> tuple:
    m = len(factors)
    fac = [[f.sphere_count(k) for k in range(n + 1)] for f in factors]
    total = [1] + [0] * n
    last = [[0] * m for _ in range(n + 1)]
    for k in range(1, n + 1):
        row = last[k]
        for i in range(m):
            fi = fac[i]
            acc = 0
            for j in range(1, k + 1):
                if fi[j]:
                    acc += fi[j] * (total[k - j] - last[k - j][i])
            row[i] = acc
        total[k] = sum(row)
    return tuple(total)


def sphere_count(group: GroupSpec, n: int) -> int:
    return sphere_counts(group, n)[n]


def ball_count(group: GroupSpec, n: int) -> int:
    return sum(sphere_counts(group, n))


def enumerate_ball(group: GroupSpec, n: int, cap: int = DEFAULT_CAP) -> Ball:
    """Breadth-first enumeration of B(1, n) with BFS parent links."""
    if n < 0:
        raise PreconditionError("radius must be non-negative")
    projected = ball_count(group, n)
    if projected > cap:
        raise ResourceError(f"ball of radius {n} has {projected} elements, above the cap {cap}")
    gens = [(name, group.gen(name)) for name in group.generator_names]
    parent = {IDENTITY: None}
    spheres = [[IDENTITY]]
    for _ in range(n):
        nxt = []
        for g in spheres[-1]:
            for name, s in gens:
                h = group.mul(g, s)
                if h not in parent:
                    parent[h] = (g, name)
                    nxt.append(h)
        nxt.sort()
        spheres.append(nxt)
    return Ball(n, spheres, parent)


# ----------------------------------------------------------------------
# growth

def _factor_ratio(f, z: float) -> float:
    """F(z) / (1 + F(z)) for the factor's sphere series F without constant term."""
    if isinstance(f, FreeAbelian):
        return 1.0 - ((1.0 - z) / (1.0 + z)) ** f.rank
    big_f = sum(f.sphere_count(k) * z ** k for k in range(1, f.order // 2 + 1))
    return big_f / (1.0 + big_f)


def exact_growth_rate(group: GroupSpec) -> tuple:
    """Growth rate from the free-product growth series, as a bracket.

    The sphere series S of a free product satisfies
    ``1/S = sum_i 1/(1+F_i) - (m-1)``, so its radius of convergence r is the
    least positive root of ``sum_i F_i/(1+F_i) = 1`` (or the factors' own
    radius when there is no such root).  Bisection brackets r; the growth
    rate is ``-log r``.  This route never touches the counting DP.
    """
    factors = group.factors
    limit = 1.0 if any(isinstance(f, FreeAbelian) for f in factors) else 1e6
    h = lambda z: sum(_factor_ratio(f, z) for f in factors)
    if len(factors) == 1 or h(limit * (1 - 1e-15)) <= 1.0:
        r = min(limit, 1.0)
        rate = -math.log(r) if r < 1 else 0.0
        return rate, rate
    lo, hi = 0.0, limit
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if h(mid) < 1.0:
            lo = mid
        else:
            hi = mid
    return max(0.0, -math.log(hi)), max(0.0, -math.log(lo)) if lo > 0 else math.inf


@dataclass
class GrowthReport:
    estimate: float
    lower: float
    upper: float
    rows: list  # (n, sphere, ball, log(ball)/n)

    def as_dict(self) -> dict:
        return {"estimate": self.estimate, "lower": self.lower, "upper": self.upper,
                "rows": [dict(zip(("n", "sphere", "ball", "log_ball_over_n"), r)) for r in self.rows]}


def growth_rate(group: GroupSpec, n_max: int) -> GrowthReport:
    """Growth rate estimate from exact DP sphere counts.

    The estimate is the tail slope ``(log s_n - log s_m) / (n - m)`` with an
    even gap ``n - m`` of about n/2, which cancels the constant prefactor and
    period-2 oscillations of free products of finite groups.  ``upper`` is the
    Fekete bound ``min_k log b_k / k`` (balls are submultiplicative);
    ``lower`` comes from the growth-series root.
    """
    if n_max < 2:
        raise PreconditionError("n_max must be at least 2")
    spheres = sphere_counts(group, n_max)
    rows, ball = [], 0
    for n, s in enumerate(spheres):
        ball += s
        rows.append((n, s, ball, math.log(ball) / n if n else float("nan")))
    gap = 2 * max(1, n_max // 4)
    m = n_max - gap
    s_n, s_m = spheres[n_max], spheres[m]
    if s_n == 0 or s_m == 0:
        estimate = 0.0
    else:
        estimate = max(0.0, (math.log(s_n) - math.log(s_m)) / gap)
    fekete = min(r[3] for r in rows[1:])
    root_lo, root_hi = exact_growth_rate(group)
    lower = min(root_lo, estimate)
    upper = max(min(fekete, root_hi), estimate)
    return GrowthReport(estimate, lower, upper, rows)


# ----------------------------------------------------------------------
# geodesics and annuli

def iter_geodesics(group: GroupSpec, g: Element, h: Element) -> Iterator[PathWord]:
    """All geodesic words from g to h, in lexicographic order of letters."""
    names = group.generator_names
    gens = [group.gen(n) for n in names]
    target = group.mul(group.inv(g), h)
    n = group.length(target)
    letters = []

    def rec(rest: Element, k: int):
        if k == 0:
            yield PathWord.build(group, g, letters)
            return
        for name, s in zip(names, gens):
            nxt = group.mul(group.inv(s), rest)
            if group.length(nxt) == k - 1:
                letters.append(name)
                yield from rec(nxt, k - 1)
                letters.pop()

    yield from rec(target, n)


def geodesics_between(group: GroupSpec, g: Element, h: Element, cap: int = 10_000,
                      radius_cap: int = 64) -> tuple:
    """(paths, truncated): up to ``cap`` geodesics from g to h."""
    if group.distance(g, h) > radius_cap:
        raise PreconditionError(f"d(g, h) exceeds the radius cap {radius_cap}")
    out = []
    for path in iter_geodesics(group, g, h):
        if len(out) == cap:
            return out, True
        out.append(path)
    return out, False


def count_geodesics(group: GroupSpec, g: Element, h: Element) -> int:
    """Number of geodesic words from g to h (product over syllables)."""
    total = 1
    for s in group.mul(group.inv(g), h):
        f = group.factors[s[0]]
        if isinstance(f, FreeAbelian):
            k = sum(abs(x) for x in s[1])
            ways = math.factorial(k)
            for x in s[1]:
                ways //= math.factorial(abs(x))
            total *= ways
        elif isinstance(f, Cyclic) and 2 * s[1][0] == f.order and f.order > 2:
            total *= 2
    return total


def annulus(group: GroupSpec, g: Element, n: int, delta, ball: Ball | None = None,
            max_radius: int | None = None, cap: int = DEFAULT_CAP) -> set:
    """A(g, n, delta) = {h : n - delta <= |h| - |g| < n + delta}."""
    base = group.length(g)
    lo = base + n - delta
    hi = base + n + delta
    top = math.ceil(hi) - 1
    limit = ball.radius if ball is not None else max_radius
    if limit is not None and top > limit:
        raise ResourceError(f"annulus reaches radius {top}, beyond the enumerated radius {limit}")
    if ball is None:
        ball = enumerate_ball(group, max(top, 0), cap=cap)
    out = set()
    for k in range(max(0, math.ceil(lo)), top + 1):
        if lo <= k < hi:
            out.update(ball.spheres[k])
    return out
