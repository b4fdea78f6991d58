"""Certified Floyd distances, boundary rays, shortcut and visual metrics.

Edge weights are ``lam ** d(o, e)`` with ``d(o, e)`` the smaller endpoint
distance.  All distances are exact rationals: ``lam`` is a Fraction and the
shortest-path searches run on integer weights scaled by a power of its
denominator.

The Cayley graph of a free product is a tree of *pieces* (left cosets of the
factors) glued at cut vertices.  Every path between x and y passes through
the cut vertices of the normal-form route from x to y, and a detour that
leaves a piece must come back through the same vertex, so

    rho_o(x, y) = sum over route pieces of lam^|c| * rho^F(a, a')

where c is the piece's vertex nearest to o and a, a' are the entry and exit
positions inside the factor F.  Tree factors (Z, Z/2) are summed exactly;
other factors run a certified search in the factor ball of radius N - |c|:
an upper bound from paths inside the ball and a lower bound where the
outside is collapsed to one vertex joined to the boundary sphere at weight
lam^N (an excursion leaves and re-enters, paying at least that much twice).
The literal search over the whole ball B(o, N) is kept as ``method="ball"``.
"""

from __future__ import annotations

import heapq
import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

from .cayley import PathWord, enumerate_ball
from .errors import InputError, PreconditionError, UnsupportedOperation
from .group import IDENTITY, Cyclic, Element, FreeAbelian, GroupSpec


def as_fraction(value) -> Fraction:
    """Exact rational from an int, Fraction, float or decimal string."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        return Fraction(repr(value))
    return Fraction(value)


@dataclass(frozen=True)
class FloydParams:
    lam: Fraction = Fraction(1, 2)
    basepoint: Element = IDENTITY
    radius: int = 12

    def __post_init__(self):
        object.__setattr__(self, "lam", as_fraction(self.lam))
        if not 0 < self.lam < 1:
            raise InputError(f"lambda must lie in (0, 1), got {self.lam}")
        if self.radius < 1:
            raise InputError("truncation radius must be >= 1")

    def with_(self, **kw) -> "FloydParams":
        d = {"lam": self.lam, "basepoint": self.basepoint, "radius": self.radius}
        d.update(kw)
        return FloydParams(**d)


@dataclass(frozen=True)
class FloydInterval:
    lower: Fraction
    upper: Fraction
    radius: int
    escaped_ball: bool = False

    def __post_init__(self):
        if self.lower > self.upper:
            raise ValueError("interval with lower > upper")

    @property
    def width(self) -> Fraction:
        return self.upper - self.lower

    @property
    def mid(self) -> Fraction:
        return (self.lower + self.upper) / 2

    def contains(self, value) -> bool:
        return self.lower <= value <= self.upper

    def __add__(self, other: "FloydInterval") -> "FloydInterval":
        return FloydInterval(self.lower + other.lower, self.upper + other.upper,
                             min(self.radius, other.radius),
                             self.escaped_ball or other.escaped_ball)

    def as_dict(self) -> dict:
        return {"lower": float(self.lower), "upper": float(self.upper), "radius": self.radius,
                "escaped_ball": self.escaped_ball,
                "lower_exact": str(self.lower), "upper_exact": str(self.upper)}


def ray_mass(lam: Fraction, k: int) -> Fraction:
    """Floyd length of a geodesic ray from depth k: sum_{j >= k} lam^j."""
    return lam ** k / (1 - lam)


def edge_weight(group: GroupSpec, u: Element, v: Element, params: FloydParams) -> Fraction:
    if group.distance(u, v) != 1:
        raise PreconditionError("not an edge of the Cayley graph")
    o = params.basepoint
    return params.lam ** min(group.distance(o, u), group.distance(o, v))


def floyd_length(group: GroupSpec, path: PathWord, params: FloydParams) -> Fraction:
    """Floyd length of an edge path."""
    o_inv = group.inv(params.basepoint)
    dist = [group.length(group.mul(o_inv, v)) for v in path.vertices]
    return sum((params.lam ** min(a, b) for a, b in zip(dist, dist[1:])), Fraction(0))


# ----------------------------------------------------------------------
# factor-level distances (basepoint at the factor identity)

def _zero(f) -> tuple:
    return (0,) * f.rank if isinstance(f, FreeAbelian) else (0,)


def _norm(f, a: tuple) -> int:
    return f.norm(a) if any(a) else 0


def _add(f, a: tuple, b: tuple) -> tuple:
    if isinstance(f, FreeAbelian):
        return tuple(x + y for x, y in zip(a, b))
    return ((a[0] + b[0]) % f.order,)


def _line_distance(lam: Fraction, a: int, b: int) -> Fraction:
    lo, hi = min(a, b), max(a, b)
    return sum((lam ** min(abs(k), abs(k + 1)) for k in range(lo, hi)), Fraction(0))


def _factor_ball(f, radius: int) -> list:
    if isinstance(f, Cyclic):
        return [(r,) for r in range(f.order) if f.norm((r,)) <= radius]
    out = []

    def rec(prefix, budget, left):
        if left == 0:
            out.append(tuple(prefix))
            return
        for v in range(-budget, budget + 1):
            prefix.append(v)
            rec(prefix, budget - abs(v), left - 1)
            prefix.pop()

    rec([], radius, f.rank)
    return out


def _has_exterior(f, radius: int) -> bool:
    return isinstance(f, FreeAbelian) or radius < f.order // 2


@lru_cache(maxsize=256)
def _factor_search(f, radius: int, lam: Fraction, source: tuple) -> tuple:
    """Single-source searches in the factor ball, weights scaled by q^radius.

    Returns (inside, collapsed): distance maps without and with the exterior
    vertex.  Integer weights keep every comparison exact.
    """
    p, q = lam.numerator, lam.denominator
    pw = [p ** k * q ** (radius - k) for k in range(radius + 1)]
    verts = set(_factor_ball(f, radius))
    moves = f.unit_moves()
    if isinstance(f, Cyclic) and f.order > 2:
        moves = [(1,), (f.order - 1,)]
    ext = _has_exterior(f, radius)
    results = []
    for collapse in (False, True):
        tick = itertools.count()
        dist = {source: 0}
        heap = [(0, 0, source)]
        while heap:
            d, _, v = heapq.heappop(heap)
            if d > dist.get(v, math.inf):
                continue
            if v == "inf":
                nbrs = [(w, pw[radius]) for w in verts if _norm(f, w) == radius]
            else:
                nv = _norm(f, v)
                nbrs = []
                for m in moves:
                    w = _add(f, v, m)
                    if w in verts:
                        nbrs.append((w, pw[min(nv, _norm(f, w))]))
                if collapse and ext and nv == radius:
                    nbrs.append(("inf", pw[radius]))
            for w, wt in nbrs:
                nd = d + wt
                if nd < dist.get(w, math.inf):
                    dist[w] = nd
                    heapq.heappush(heap, (nd, next(tick), w))
        results.append(dist)
    return results[0], results[1], q ** radius


def factor_distance(f, a: tuple, b: tuple, lam: Fraction, radius: int) -> tuple:
    """(lower, upper) Floyd distance in one factor based at its identity."""
    if a == b:
        return Fraction(0), Fraction(0)
    if f.cayley_is_tree:
        if isinstance(f, Cyclic):  # Z/2: a single edge at the identity
            return Fraction(1), Fraction(1)
        d = _line_distance(lam, a[0], b[0])
        return d, d
    if max(_norm(f, a), _norm(f, b)) > radius:
        raise PreconditionError("factor points outside the search ball")
    inside, collapsed, scale = _factor_search(f, radius, lam, a)
    return Fraction(collapsed[b], scale), Fraction(inside[b], scale)


# ----------------------------------------------------------------------
# pieces of the route between two elements

@dataclass(frozen=True)
class Piece:
    corner: Element   # vertex of the coset nearest to the identity
    factor: int
    entry: tuple      # factor coordinates of the entry point
    exit: tuple


def route_pieces(group: GroupSpec, x: Element, y: Element) -> list:
    """Pieces crossed by the normal-form route from x to y (identity basepoint)."""
    out = []
    v = x
    for s in group.mul(group.inv(x), y):
        i = s[0]
        f = group.factors[i]
        if v and v[-1][0] == i:
            corner, a = v[:-1], v[-1][1]
        else:
            corner, a = v, _zero(f)
        b = _add(f, a, s[1])
        out.append(Piece(corner, i, a, b))
        v = group.mul(v, (s,))
    return out


def _pieces_distance(group: GroupSpec, x: Element, y: Element, lam: Fraction, radius: int) -> FloydInterval:
    lo = hi = Fraction(0)
    for pc in route_pieces(group, x, y):
        scale = lam ** group.length(pc.corner)
        f = group.factors[pc.factor]
        a, b = factor_distance(f, pc.entry, pc.exit, lam, radius - group.length(pc.corner))
        lo += scale * a
        hi += scale * b
    return FloydInterval(lo, hi, radius, lo < hi)


@lru_cache(maxsize=8)
def _ball_graph(group: GroupSpec, radius: int) -> tuple:
    """B(1, radius) as index arrays: elements, lengths, adjacency lists."""
    ball = enumerate_ball(group, radius)
    elems = ball.elements
    index = {g: i for i, g in enumerate(elems)}
    lengths = [group.length(g) for g in elems]
    gens = group.generators
    adj = []
    for g in elems:
        nb = []
        for s in gens:
            j = index.get(group.mul(g, s))
            if j is not None:
                nb.append(j)
        adj.append(nb)
    return elems, index, lengths, adj


def _ball_distance(group: GroupSpec, x: Element, y: Element, lam: Fraction, radius: int) -> FloydInterval:
    elems, index, lengths, adj = _ball_graph(group, radius)
    p, q = lam.numerator, lam.denominator
    pw = [p ** k * q ** (radius - k) for k in range(radius + 1)]
    inf_node = len(elems)
    rim = [i for i, n in enumerate(lengths) if n == radius]
    src, dst = index[x], index[y]
    results = []
    for collapse in (False, True):
        dist = {src: 0}
        heap = [(0, src)]
        while heap:
            d, v = heapq.heappop(heap)
            if d > dist.get(v, math.inf):
                continue
            if v == dst:
                break
            if v == inf_node:
                nbrs = [(w, pw[radius]) for w in rim]
            else:
                nv = lengths[v]
                nbrs = [(w, pw[min(nv, lengths[w])]) for w in adj[v]]
                if collapse and nv == radius:
                    nbrs.append((inf_node, pw[radius]))
            for w, wt in nbrs:
                nd = d + wt
                if nd < dist.get(w, math.inf):
                    dist[w] = nd
                    heapq.heappush(heap, (nd, w))
        results.append(Fraction(dist[dst], q ** radius))
    return FloydInterval(results[1], results[0], radius, results[1] < results[0])


def floyd_distance(group: GroupSpec, x: Element, y: Element, params: FloydParams,
                   method: str = "pieces") -> FloydInterval:
    """Certified interval for rho_o(x, y) at truncation radius N.

    Both points must lie in B(o, N-1).  The basepoint is moved to the
    identity by left translation, which preserves Floyd lengths exactly.
    """
    o_inv = group.inv(params.basepoint)
    xr, yr = group.mul(o_inv, x), group.mul(o_inv, y)
    n = params.radius
    for name, g in (("x", xr), ("y", yr)):
        if group.length(g) > n - 1:
            raise PreconditionError(f"{name} lies outside B(o, {n - 1})")
    if xr == yr:
        return FloydInterval(Fraction(0), Fraction(0), n)
    if method == "pieces":
        return _pieces_distance(group, xr, yr, params.lam, n)
    if method == "ball":
        return _ball_distance(group, xr, yr, params.lam, n)
    raise InputError(f"unknown method {method!r}")


# ----------------------------------------------------------------------
# boundary rays

def expand_letters(group: GroupSpec, text) -> tuple:
    """Generator letters from ``"a^2 b"``-style text or an iterable of names."""
    if isinstance(text, str):
        tokens = text.replace("*", " ").split()
    else:
        tokens = list(text)
    out = []
    for tok in tokens:
        tok = tok.strip()
        if tok in ("e", "1"):
            continue
        if tok in group.generator_names:
            out.append(tok)
            continue
        base, _, power = tok.partition("^")
        if base not in group.generator_names or not power.lstrip("-").isdigit():
            raise InputError(f"unknown generator token {tok!r}")
        k = int(power)
        inv = base + "^-1" if base + "^-1" in group.generator_names else base
        out.extend([base if k > 0 else inv] * abs(k))
    return tuple(out)


@dataclass(frozen=True, order=True)
class BoundaryRay:
    """The geodesic ray prefix . period . period ... read from the basepoint."""

    prefix: tuple
    period: tuple

    def letter(self, k: int) -> str:
        if k < len(self.prefix):
            return self.prefix[k]
        return self.period[(k - len(self.prefix)) % len(self.period)]

    def word(self, n: int) -> list:
        return [self.letter(k) for k in range(n)]

    def point(self, group: GroupSpec, n: int, base: Element = IDENTITY) -> Element:
        """The vertex at depth n along the ray started at ``base``."""
        return group.mul(base, group.normalize(self.word(n)))

    def label(self) -> str:
        pre = " ".join(self.prefix)
        return f"{pre} ({' '.join(self.period)})^inf".strip()


def make_ray(group: GroupSpec, prefix="", period="") -> BoundaryRay:
    """Build and validate a ray; every truncation must be a geodesic word."""
    ray = BoundaryRay(expand_letters(group, prefix), expand_letters(group, period))
    if not ray.period:
        raise InputError("a boundary ray needs a nonempty period")
    check_ray(group, ray)
    return ray


def check_ray(group: GroupSpec, ray: BoundaryRay):
    orders = [f.order for f in group.factors if isinstance(f, Cyclic)]
    reps = max([3] + orders)
    n = len(ray.prefix) + reps * len(ray.period)
    g = IDENTITY
    for k in range(n):
        g = group.mul(g, group.gen(ray.letter(k)))
        if group.length(g) != k + 1:
            raise InputError(f"ray {ray.label()} is not geodesic at depth {k + 1}")


@dataclass(frozen=True)
class FiberClass:
    """Conical (a single boundary point) or Parabolic (a peripheral coset)."""

    kind: str
    key: tuple

    @property
    def is_parabolic(self) -> bool:
        return self.kind == "parabolic"


def _single_syllable(group: GroupSpec, ray: BoundaryRay):
    q = group.normalize(ray.period)
    return q[0][0] if len(q) == 1 else None


def fiber_class(group: GroupSpec, ray: BoundaryRay) -> FiberClass:
    """Parabolic when the normal-form tail is one unbounded peripheral syllable."""
    p = group.normalize(ray.prefix)
    q = group.normalize(ray.period)
    i = _single_syllable(group, ray)
    if i is not None:
        tail_base = group.mul(p, q)
        if tail_base and tail_base[-1][0] == i:
            tail_base = tail_base[:-1]
        if i in group.peripheral:
            c = group.coset(tail_base, i)
            return FiberClass("parabolic", (c.rep, c.factor))
        direction = q[0][1]
        g = math.gcd(*direction) if len(direction) > 1 else abs(direction[0])
        return FiberClass("conical", ("line", tail_base, i, tuple(x // g for x in direction)))
    return FiberClass("conical", ("ray",) + _periodic_key(group, p, q))


def _periodic_key(group: GroupSpec, p: Element, q: Element) -> tuple:
    """Canonical (pre-period syllables, period syllables) of p q q q ..."""
    reps = 6 + len(p)
    seq = list(group.mul(p, group.power(q, reps)))[:-1]
    per = len(q) - (1 if q[0][0] == q[-1][0] else 0)
    per = max(per, 1)
    start = 0
    for j in range(len(seq) - per - 1, -1, -1):
        if seq[j] != seq[j + per]:
            start = j + 1
            break
    best = per
    for d in range(1, per + 1):
        if per % d == 0 and all(seq[j] == seq[j + d] for j in range(start, len(seq) - d)):
            best = d
            break
    return tuple(seq[:start]), tuple(seq[start:start + best])


def same_point(group: GroupSpec, xi: BoundaryRay, eta: BoundaryRay) -> bool:
    a, b = fiber_class(group, xi), fiber_class(group, eta)
    return a == b and a.kind == "conical"


def boundary_distance(group: GroupSpec, xi: BoundaryRay, eta: BoundaryRay,
                      params: FloydParams) -> FloydInterval:
    """rho_o(xi, eta) from the depth-N truncation points widened by both tails.

    Each tail beyond depth N is a Floyd geodesic of mass lam^N/(1-lam), so the
    triangle inequality gives a certified interval of width at most
    ``2 * 2 lam^N / (1-lam)`` plus any slack from the truncation points.
    """
    n = params.radius
    lam = params.lam
    o = params.basepoint
    x, y = xi.point(group, n, o), eta.point(group, n, o)
    inner = floyd_distance(group, x, y, params.with_(radius=n + 1))
    tail = 2 * ray_mass(lam, n)
    return FloydInterval(max(Fraction(0), inner.lower - tail), inner.upper + tail, n,
                         inner.escaped_ball)


# ----------------------------------------------------------------------
# shortcut pseudo-metric

@dataclass
class ChainGraph:
    """Sample rays with shortcut edge weights (0 inside a parabolic class)."""

    rays: list
    classes: list
    weights: list           # upper-bound edge weights (Fractions)
    floyd: list             # boundary_distance intervals per pair

    def index(self, ray: BoundaryRay) -> int:
        try:
            return self.rays.index(ray)
        except ValueError:
            raise PreconditionError(f"ray {ray.label()} is not in the sample") from None

    def shortest(self, i: int) -> tuple:
        """Dijkstra from ray i: (distances, predecessors)."""
        n = len(self.rays)
        dist = [None] * n
        prev = [None] * n
        dist[i] = Fraction(0)
        heap = [(Fraction(0), i)]
        done = set()
        while heap:
            d, u = heapq.heappop(heap)
            if u in done:
                continue
            done.add(u)
            for v in range(n):
                if v == u:
                    continue
                nd = d + self.weights[u][v]
                if dist[v] is None or nd < dist[v]:
                    dist[v] = nd
                    prev[v] = u
                    heapq.heappush(heap, (nd, v))
        return dist, prev


def chain_graph(group: GroupSpec, sample: Sequence[BoundaryRay], params: FloydParams) -> ChainGraph:
    rays = list(dict.fromkeys(sample))
    classes = [fiber_class(group, r) for r in rays]
    n = len(rays)
    weights = [[Fraction(0)] * n for _ in range(n)]
    floyd = [[None] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            iv = boundary_distance(group, rays[i], rays[j], params)
            floyd[i][j] = floyd[j][i] = iv
            same = classes[i] == classes[j] and classes[i].is_parabolic
            w = Fraction(0) if same else iv.upper
            weights[i][j] = weights[j][i] = w
    return ChainGraph(rays, classes, weights, floyd)


def shortcut_distance(group: GroupSpec, xi: BoundaryRay, eta: BoundaryRay,
                      sample: Sequence[BoundaryRay], params: FloydParams,
                      graph: ChainGraph | None = None) -> FloydInterval:
    """Sample-relative shortcut interval.

    The upper end is the cheapest chain through the sample (consecutive rays
    in one parabolic class cost nothing, other links cost the certified
    Floyd upper bound).  The lower end is 0 unless both rays share a
    parabolic class, in which case the interval is [0, 0].
    """
    if xi not in sample or eta not in sample:
        raise PreconditionError("sample must contain both rays")
    graph = graph or chain_graph(group, sample, params)
    i, j = graph.index(xi), graph.index(eta)
    if i == j:
        return FloydInterval(Fraction(0), Fraction(0), params.radius)
    if graph.classes[i] == graph.classes[j] and graph.classes[i].is_parabolic:
        return FloydInterval(Fraction(0), Fraction(0), params.radius)
    if not group.peripheral:
        # no parabolic classes: chains only add Floyd distances
        return graph.floyd[i][j]
    dist, _ = graph.shortest(i)
    return FloydInterval(Fraction(0), dist[j], params.radius)


def exhaustive_chain_min(weights: list, i: int, j: int) -> Fraction:
    """Minimum over every simple chain from i to j, by depth-first enumeration.

    Branches whose partial cost already reaches the best complete chain are
    cut; weights are nonnegative, so this never discards a better chain.
    """
    n = len(weights)
    best = [weights[i][j]]
    used = [False] * n
    used[i] = True

    def rec(u, cost):
        for v in range(n):
            if used[v]:
                continue
            c = cost + weights[u][v]
            if c >= best[0]:
                continue
            if v == j:
                best[0] = c
                continue
            used[v] = True
            rec(v, c)
            used[v] = False

    rec(i, Fraction(0))
    return best[0]


# ----------------------------------------------------------------------
# Gromov products, visual metric, Busemann cocycle

def _require_hyperbolic(group: GroupSpec):
    if not group.is_hyperbolic:
        raise UnsupportedOperation("Gromov products need a group without peripheral factors")


def gromov_product(group: GroupSpec, xi: BoundaryRay, eta: BoundaryRay, depth: int = 32,
                   o: Element = IDENTITY) -> tuple:
    """((xi|eta)_o, stabilized) from the products of depth-k points.

    Returns ``math.inf`` for two spellings of the same point.
    """
    _require_hyperbolic(group)
    if xi == eta or same_point(group, xi, eta):
        return math.inf, True
    vals = []
    for k in range(1, depth + 1):
        x, y = xi.point(group, k, o), eta.point(group, k, o)
        vals.append(Fraction(2 * k - group.distance(x, y), 2))
    stable = len(vals) >= 3 and vals[-1] == vals[-2] == vals[-3]
    return vals[-1], stable


def visual_distance(group: GroupSpec, xi: BoundaryRay, eta: BoundaryRay, a: float,
                    depth: int = 32, o: Element = IDENTITY) -> float:
    """exp(-a (xi|eta)_o)."""
    gp, _ = gromov_product(group, xi, eta, depth, o)
    return 0.0 if gp == math.inf else math.exp(-a * float(gp))


def busemann(group: GroupSpec, xi: BoundaryRay, x: Element, y: Element, depth: int,
             o: Element = IDENTITY) -> tuple:
    """(d(z,x) - d(z,y), stable) for z the depth point of xi, stable over 5 depths."""
    if depth < group.distance(o, x) + group.distance(o, y):
        raise PreconditionError("depth must be at least d(o,x) + d(o,y)")
    vals = []
    for k in range(max(0, depth - 4), depth + 1):
        z = xi.point(group, k, o)
        vals.append(group.distance(z, x) - group.distance(z, y))
    return vals[-1], len(set(vals)) == 1


# ----------------------------------------------------------------------
# diagnostics

def distance_to_geodesics(group: GroupSpec, x: Element, y: Element) -> int:
    """min over all geodesics [x, y] of the distance from the identity.

    Every geodesic crosses the same route pieces; inside a Z^d piece the
    closest monotone path point is found coordinate by coordinate.
    """
    if x == y:
        return group.length(x)
    best = math.inf
    for pc in route_pieces(group, x, y):
        f = group.factors[pc.factor]
        base = group.length(pc.corner)
        if isinstance(f, FreeAbelian):
            inner = sum(0 if min(a, b) <= 0 <= max(a, b) else min(abs(a), abs(b))
                        for a, b in zip(pc.entry, pc.exit))
        else:
            r = (pc.exit[0] - pc.entry[0]) % f.order
            if 2 * r <= f.order:
                steps = [(pc.entry[0] + k) % f.order for k in range(r + 1)]
            else:
                steps = [(pc.entry[0] - k) % f.order for k in range(f.order - r + 1)]
            if 2 * r == f.order:
                steps += [(pc.entry[0] - k) % f.order for k in range(r + 1)]
            inner = min(f.norm((s,)) if s else 0 for s in steps)
        best = min(best, base + inner)
    return best


def visibility_profile(group: GroupSpec, params: FloydParams, samples: int, length: int,
                       kappas: Sequence[float], rng) -> dict:
    """Largest d(o, gamma) among sampled geodesics with Floyd length >= kappa.

    Geodesics are canonical spellings between random points of B(o, length)
    and the basepoint is o.  The returned profile is nonincreasing in kappa.
    """
    from .sampling import random_element

    rows = []
    for _ in range(samples):
        x = group.mul(params.basepoint, random_element(group, rng, length))
        y = group.mul(params.basepoint, random_element(group, rng, length))
        path = PathWord.geodesic(group, x, y)
        rho = floyd_length(group, path, params)
        d = min(group.distance(params.basepoint, v) for v in path.vertices)
        rows.append((float(rho), d))
    prof = {}
    for k in sorted(kappas):
        vals = [d for rho, d in rows if rho >= k]
        prof[k] = max(vals) if vals else None
    return prof


def floyd_metric_band(group: GroupSpec, pairs: Sequence, params: FloydParams) -> dict:
    """rho(xi, eta) / lam^{d(o,[xi,eta])} over conical ray pairs.

    ``d(o,[xi,eta])`` is taken over geodesics between the depth-N points;
    ``slack`` records how far the canonical spelling is from that minimum.
    """
    ratios, slack = [], 0
    n = params.radius
    for xi, eta in pairs:
        iv = boundary_distance(group, xi, eta, params)
        x, y = xi.point(group, n), eta.point(group, n)
        dist = distance_to_geodesics(group, x, y)
        canon = min(group.length(v) for v in PathWord.geodesic(group, x, y).vertices)
        slack = max(slack, canon - dist)
        scale = params.lam ** dist
        ratios.append((float(iv.lower / scale), float(iv.upper / scale)))
    lo = min(r[0] for r in ratios)
    hi = max(r[1] for r in ratios)
    return {"min": lo, "max": hi, "width": hi / lo if lo > 0 else math.inf,
            "slack": slack, "count": len(ratios)}
