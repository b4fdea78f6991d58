"""Patterson-Sullivan approximants on tree sets, shadows, ball masses,
Ahlfors fits, covering sums and dimension estimates.

Two representations are provided.  :func:`ps_measure` materializes the
vertex measure ``exp(-s d(v, g)) / Theta_s(T, 1)`` on every node up to a
depth, which is only possible for small trees.  :class:`TreeMeasure` keeps
the leaf measure implicit: every node type has a child template, so the mass
below any prefix of a branch is a product of per-level factors and a prefix
sum over the sorted template.  Ball masses are computed by descending the
template tries with certified Floyd intervals, refining only the nodes whose
interval straddles the radius.
"""

from __future__ import annotations

import bisect
import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .cayley import sphere_counts
from .errors import PreconditionError, UnsupportedOperation
from .floyd import FloydParams, as_fraction, floyd_distance
from .group import IDENTITY, Element, GroupSpec
from .trees import TreeSet, critical_exponent

_TOP = "\U0010ffff"   # sorts after every generator name


class DivergenceWarning(UserWarning):
    """The exponent is at or below the critical exponent."""


# ----------------------------------------------------------------------
# materialized vertex measures

@dataclass
class DiscreteMeasure:
    s: float
    basepoint: Element
    depth: int
    theta: float                                       # Theta_s(T, 1) over the support
    weights: dict = field(default_factory=dict)        # node -> weight
    leaf_weights: dict = field(default_factory=dict)   # deepest level only

    @property
    def total(self) -> float:
        return sum(self.weights.values())

    @property
    def leaf_total(self) -> float:
        return sum(self.leaf_weights.values())


def default_exponent(tree: TreeSet, depth: int | None = None) -> tuple:
    """(s, delta_hat) with s = delta_hat + 1 / (shortest leaf length)."""
    depth = tree.levels if depth is None else depth
    delta = critical_exponent(tree).estimate
    word_depth = max(1, tree.length_range(depth)[0])
    return delta + 1.0 / word_depth, delta


def ps_measure(tree: TreeSet, v: Element = IDENTITY, s: float | None = None,
               depth: int | None = None) -> DiscreteMeasure:
    """Vertex weights exp(-s d(v, g)) / Theta_s(T, 1) on levels 0..depth."""
    depth = tree.levels if depth is None else depth
    delta = critical_exponent(tree).estimate
    if s is None:
        s = delta + 1.0 / max(1, tree.length_range(depth)[0])
    group = tree.group
    nodes = [(level, g) for level in range(depth + 1) for g in tree.nodes(level)]
    if v not in {g for _, g in nodes}:
        raise PreconditionError("v must be a node of the tree")
    theta = sum(math.exp(-s * group.length(g)) for _, g in nodes)
    if s <= delta:
        warnings.warn(f"s = {s:.6f} <= delta_T = {delta:.6f}; the series diverges, "
                      f"partial sum {theta:.6g} at depth {depth}", DivergenceWarning)
    weights, leaves = {}, {}
    for level, g in nodes:
        wgt = math.exp(-s * group.distance(v, g)) / theta
        weights[g] = weights.get(g, 0.0) + wgt
        if level == depth:
            leaves[g] = leaves.get(g, 0.0) + wgt
    return DiscreteMeasure(s, v, depth, theta, weights, leaves)


# ----------------------------------------------------------------------
# implicit leaf measures

@dataclass(frozen=True)
class _State:
    """A vertex of a branch spelling inside the template of a level node."""

    level: int
    type: int
    base_len: int          # |x| for the level node x
    lo: int                # range of template children still possible
    hi: int
    depth: int             # letters consumed inside the template
    vertex: Element
    length: int            # |vertex|


class TreeMeasure:
    """Normalized leaf measure with leaf weights proportional to exp(-s|leaf|)."""

    def __init__(self, tree: TreeSet, s: float | None = None, depth: int | None = None):
        self.tree = tree
        self.group = tree.group
        self.depth = tree.levels if depth is None else depth
        s0, self.delta = default_exponent(tree, self.depth)
        self.s = s0 if s is None else s
        k = len(tree.types)
        self.letters = [[c.letters for c in t.children] for t in tree.types]
        self.lookup = [{c.letters: j for j, c in enumerate(t.children)} for t in tree.types]
        self.child_lengths = [sorted({c.length for c in t.children}) for t in tree.types]
        # F[i][t]: sum over leaves below a level-i node of type t of exp(-s (|leaf| - |x|))
        F = [[0.0] * k for _ in range(self.depth + 1)]
        F[self.depth] = [1.0] * k
        for i in range(self.depth - 1, -1, -1):
            for t, ty in enumerate(tree.types):
                F[i][t] = sum(math.exp(-self.s * c.length) * F[i + 1][c.type] for c in ty.children)
        self.F = F
        self.Z = F[0][0]
        self._cum = {}

    # masses ---------------------------------------------------------------

    def cum(self, level: int, t: int) -> np.ndarray:
        key = (level, t)
        if key not in self._cum:
            ch = self.tree.types[t].children
            vals = [math.exp(-self.s * c.length) * self.F[level + 1][c.type] for c in ch]
            self._cum[key] = np.concatenate([[0.0], np.cumsum(vals)])
        return self._cum[key]

    def state_mass(self, st: _State) -> float:
        if st.level == self.depth:
            return math.exp(-self.s * st.base_len) / self.Z
        c = self.cum(st.level, st.type)
        return math.exp(-self.s * st.base_len) * float(c[st.hi] - c[st.lo]) / self.Z

    def _template_mass(self, level: int, t: int, q: tuple) -> float:
        """Unnormalized mass below the prefix q read from a level node (|x| = 0)."""
        if not q:
            return self.F[level][t]
        if level == self.depth:
            return 0.0
        total = 0.0
        lst = self.letters[t]
        lo = bisect.bisect_left(lst, q)
        hi = bisect.bisect_left(lst, q + (_TOP,))
        if hi > lo:
            c = self.cum(level, t)
            total += float(c[hi] - c[lo])
        look = self.lookup[t]
        for k in self.child_lengths[t]:
            if k < len(q) and q[:k] in look:
                ch = self.tree.types[t].children[look[q[:k]]]
                total += math.exp(-self.s * k) * self._template_mass(level + 1, ch.type, q[k:])
        return total

    def prefix_mass(self, letters: Sequence[str]) -> float:
        """Mass of the leaves whose branch spelling starts with ``letters``."""
        return self._template_mass(0, 0, tuple(letters)) / self.Z

    def shadow_mass(self, letters: Sequence[str], r: int) -> float:
        """mu(Pi_r(g)) for the node spelled ``letters`` in a tree Cayley graph.

        Branches are geodesics from 1, so in a tree the branch meets B(g, r)
        exactly when it passes through the prefix of length |g| - r.
        """
        if not self.group.cayley_is_tree:
            raise UnsupportedOperation("closed-form shadows need a tree Cayley graph; "
                                       "use shadow() on a materialized tree")
        letters = tuple(letters)
        return self.prefix_mass(letters[:max(0, len(letters) - r)])

    # trie walking --------------------------------------------------------

    def root(self) -> _State:
        return self._level_state(0, 0, 0, IDENTITY)

    def _level_state(self, level, t, base_len, vertex) -> _State:
        n = len(self.tree.types[t].children) if level < self.depth else 0
        return _State(level, t, base_len, 0, n, 0, vertex, base_len)

    def expand(self, st: _State) -> list:
        """Child states one letter further along (or at the next level)."""
        if st.level == self.depth:
            return []
        group = self.group
        lst = self.letters[st.type]
        out = []
        i = st.lo
        d = st.depth
        while i < st.hi:
            word = lst[i]
            if len(word) == d:
                ch = self.tree.types[st.type].children[i]
                out.append(self._level_state(st.level + 1, ch.type, st.base_len + ch.length,
                                             st.vertex))
                i += 1
                continue
            a = word[d]
            j = bisect.bisect_left(lst, word[:d] + (a, _TOP), i, st.hi)
            v = group.mul(st.vertex, group.gen(a))
            out.append(_State(st.level, st.type, st.base_len, i, j, d + 1, v, st.length + 1))
            i = j
        return out

    def is_branch_point(self, st: _State) -> bool:
        """A level state with no template consumed stands for a tree node."""
        return st.depth == 0

    def leaf_states(self, st: _State, cap: int = 1_000_000) -> list:
        out, stack = [], [st]
        while stack:
            cur = stack.pop()
            if cur.level == self.depth:
                out.append(cur)
                if len(out) > cap:
                    raise PreconditionError("too many leaves below the state")
                continue
            stack.extend(self.expand(cur))
        return out

    def locate(self, letters: Sequence[str]) -> list:
        """States reached by reading ``letters`` from the root."""
        states = [self.root()]
        for a in letters:
            nxt = []
            for st in states:
                for ch in self._expand_through(st):
                    if self.letters[ch.type][ch.lo][ch.depth - 1] == a:
                        nxt.append(ch)
            states = nxt
        return states

    def _expand_through(self, st: _State) -> list:
        """Expand, passing through level boundaries without consuming letters."""
        out = []
        for ch in self.expand(st):
            if ch.depth == 0:
                out.extend(self._expand_through(ch))
            else:
                out.append(ch)
        return out

    def sample_leaves(self, rng, count: int) -> list:
        """Random branches as (element, letters), children chosen by mass."""
        out = []
        for _ in range(count):
            g, letters, t = IDENTITY, (), 0
            for level in range(self.depth):
                c = self.cum(level, t)
                u = rng.random() * c[-1]
                j = min(int(np.searchsorted(c, u, side="right")) - 1, len(c) - 2)
                ch = self.tree.types[t].children[j]
                g = self.group.mul(g, ch.word)
                letters += ch.letters
                t = ch.type
            out.append((g, letters))
        return out


# ----------------------------------------------------------------------
# shadows

@dataclass
class Shadow:
    apex: Element
    r: int
    members: set = field(default_factory=set)


def shadow(tree: TreeSet, g: Element, r: int, depth: int | None = None) -> Shadow:
    """Leaves whose branch geodesic from 1 meets B(g, r), on a materialized tree."""
    depth = tree.levels if depth is None else depth
    group = tree.group
    out = set()
    for leaf, _, letters in tree.iter_nodes(depth):
        v = IDENTITY
        hit = group.distance(v, g) <= r
        for a in letters:
            if hit:
                break
            v = group.mul(v, group.gen(a))
            hit = group.distance(v, g) <= r
        if hit:
            out.add(leaf)
    return Shadow(g, r, out)


def shadow_ratio_stats(measure: TreeMeasure, r: int, levels: tuple = (2, 5)) -> dict:
    """Range of mu(Pi_r(g)) exp(delta |g|) over all nodes g in the given levels.

    A node at level i is ``x y`` with x at level i-1 and y a template child.
    The statistic factors as ``exp((delta - s)|x|) * exp(delta |y|) * M(y)``
    with M the template mass below the prefix of y of length |y| - r, so its
    extremes over all nodes come from the extreme lengths of x per type.
    Needs r below every child length.
    """
    tree, s, delta = measure.tree, measure.s, measure.delta
    lo_level, hi_level = levels
    if lo_level < 1 or hi_level > measure.depth or lo_level > hi_level:
        raise PreconditionError(f"levels {levels} outside 1..{measure.depth}")
    if not measure.group.cayley_is_tree:
        raise UnsupportedOperation("closed-form shadow statistics need a tree Cayley graph")
    per_level = {}
    vmin, vmax = math.inf, 0.0
    for i in range(lo_level, hi_level + 1):
        ranges = _type_length_ranges(tree, i - 1)
        lmin, lmax = math.inf, 0.0
        for t, (xa, xb) in ranges.items():
            for ch in tree.types[t].children:
                if r >= ch.length:
                    raise PreconditionError(f"r = {r} must be below the child length {ch.length}")
                m = measure._template_mass(i - 1, t, ch.letters[:ch.length - r]) / measure.Z
                base = m * math.exp(delta * ch.length)
                for xl in (xa, xb):
                    val = base * math.exp((delta - s) * xl)
                    lmin, lmax = min(lmin, val), max(lmax, val)
        per_level[i] = (lmin, lmax)
        vmin, vmax = min(vmin, lmin), max(vmax, lmax)
    return {"min": vmin, "max": vmax, "ratio": vmax / vmin, "per_level": per_level,
            "s": s, "delta": delta, "r": r}


def _type_length_ranges(tree: TreeSet, level: int) -> dict:
    lo, hi = {0: 0}, {0: 0}
    for _ in range(level):
        nlo, nhi = {}, {}
        for t in lo:
            for ch in tree.types[t].children:
                a, b = lo[t] + ch.length, hi[t] + ch.length
                nlo[ch.type] = min(nlo.get(ch.type, a), a)
                nhi[ch.type] = max(nhi.get(ch.type, b), b)
        lo, hi = nlo, nhi
    return {t: (lo[t], hi[t]) for t in lo}


# ----------------------------------------------------------------------
# balls and Ahlfors regularity

@dataclass
class BallMass:
    mass: float
    slack: float           # mass of leaves decided by interval midpoints
    max_width: float       # widest interval among those leaves
    visited: int


def ball_mass(measure: TreeMeasure, xi: Element, t, lam=Fraction(1, 2), metric: str = "floyd",
              max_visits: int = 2_000_000) -> BallMass:
    """Mass of {leaves eta : rho(xi, eta) <= t} for a leaf xi.

    Every leaf below a state at vertex v lies within lam^|v| / (1 - lam) of v
    in the Floyd metric, so a state is accepted or rejected whole when its
    interval clears t, and expanded otherwise.
    """
    if metric != "floyd":
        raise UnsupportedOperation("ball masses are computed for the Floyd metric")
    lam = as_fraction(lam)
    t = as_fraction(t)
    group = measure.group
    top = measure.tree.length_range(measure.depth)[1]
    params = FloydParams(lam, IDENTITY, max(top, group.length(xi)) + 2)
    mass = slack = 0.0
    width = Fraction(0)
    visited = 0
    stack = [measure.root()]
    while stack:
        st = stack.pop()
        visited += 1
        if visited > max_visits:
            raise PreconditionError("ball descent exceeded its visit budget")
        d = floyd_distance(group, xi, st.vertex, params)
        if st.level == measure.depth:
            if d.upper <= t:
                mass += measure.state_mass(st)
            elif d.lower <= t:
                m = measure.state_mass(st)
                if d.mid <= t:
                    mass += m
                slack += m
                width = max(width, d.width)
            continue
        tail = lam ** st.length / (1 - lam)
        if d.upper + tail <= t:
            mass += measure.state_mass(st)
        elif d.lower - tail > t:
            continue
        else:
            stack.extend(measure.expand(st))
    return BallMass(mass, slack, float(width), visited)


@dataclass
class AhlforsFit:
    Q: float
    intercept: float
    target: float
    rows: list            # (t, mean log mass, points used)
    residuals: list
    rejected: list        # scales dropped for interval slack

    @property
    def relative_error(self) -> float:
        return abs(self.Q - self.target) / self.target if self.target else abs(self.Q)

    def as_dict(self) -> dict:
        return {"Q": self.Q, "target": self.target, "relative_error": self.relative_error,
                "intercept": self.intercept,
                "rows": [{"t": t, "mean_log_mass": m, "points": n} for t, m, n in self.rows],
                "residuals": self.residuals, "rejected": self.rejected}


def default_scales(measure: TreeMeasure, lam=Fraction(1, 2)) -> list:
    """t = lam^k from k = 1 to a few letters above the shortest leaf less one child.

    Near the leaf resolution the finite depth shifts which branch level a
    radius selects, so those scales are left out.
    """
    lam = as_fraction(lam)
    shortest = measure.tree.length_range(measure.depth)[0]
    step = max((c.length for t in measure.tree.types for c in t.children), default=1)
    top = max(2, shortest - step - 3)
    return [lam ** k for k in range(1, top + 1)]


def ahlfors_fit(measure: TreeMeasure, scales: Sequence | None = None, points: int = 6,
                seed: int = 0, lam=Fraction(1, 2), base: Sequence | None = None) -> AhlforsFit:
    """Least-squares slope of log ball mass against log t."""
    import random
    lam = as_fraction(lam)
    scales = list(scales) if scales is not None else default_scales(measure, lam)
    if base is None:
        base = [g for g, _ in measure.sample_leaves(random.Random(seed), points)]
    target = measure.delta / -math.log(float(lam))
    rows, rejected, xs, ys = [], [], [], []
    for t in scales:
        logs = []
        bad = False
        for xi in base:
            bm = ball_mass(measure, xi, t, lam)
            if bm.max_width > float(t) / 10:
                bad = True
                break
            logs.append(math.log(bm.mass))
        if bad:
            rejected.append(float(t))
            continue
        m = sum(logs) / len(logs)
        rows.append((float(t), m, len(logs)))
        xs.append(math.log(float(t)))
        ys.append(m)
    if len(xs) < 2:
        return AhlforsFit(0.0, ys[0] if ys else 0.0, target, rows, [], rejected)
    slope, intercept = np.polyfit(xs, ys, 1)
    res = [y - (slope * x + intercept) for x, y in zip(xs, ys)]
    return AhlforsFit(float(slope), float(intercept), target, rows, res, rejected)


# ----------------------------------------------------------------------
# Hausdorff sums against the measure

def hausdorff_vs_ps(measure: TreeMeasure, cones: Sequence, sigma: float, resolution: int = 4,
                    lam=Fraction(1, 2)) -> dict:
    """Finite-scale Hausdorff sum of a union of cones against its mass.

    Cones are branch prefixes (letter tuples).  Sample points are the vertices
    ``resolution`` letters below each cone; a greedy pass keeps centers at
    mutual distance > 2r (disjoint r-balls) with r = lam^(m + resolution)
    for the shallowest cone depth m, and the 5r-enlarged balls give the sum
    ``#centers * (10 r)^sigma``.
    """
    lam = as_fraction(lam)
    cones = [tuple(c) for c in cones]
    if not cones:
        return {"hausdorff": 0.0, "mass": 0.0, "ratio": None, "centers": 0}
    group = measure.group
    mass = sum(measure.prefix_mass(c) for c in _minimal_prefixes(cones))
    m = min(len(c) for c in cones)
    pts = set()
    for c in _minimal_prefixes(cones):
        for st in measure.locate(c):
            frontier = [st]
            for _ in range(resolution):
                frontier = [ch for s in frontier for ch in measure._expand_through(s)]
            pts.update(s.vertex for s in frontier)
    pts = sorted(pts, key=lambda g: (group.length(g), g))
    r = lam ** (m + resolution)
    top = max(group.length(p) for p in pts)
    params = FloydParams(lam, IDENTITY, top + 2)
    centers = []
    for p in pts:
        if all(floyd_distance(group, p, z, params).lower > 2 * r for z in centers):
            centers.append(p)
    h = len(centers) * float(10 * r) ** sigma
    return {"hausdorff": h, "mass": mass, "ratio": h / mass if mass else None,
            "centers": len(centers), "r": float(r)}


def _minimal_prefixes(cones: list) -> list:
    out = []
    for c in sorted(set(cones), key=len):
        if not any(c[:len(o)] == o for o in out):
            out.append(c)
    return out


# ----------------------------------------------------------------------
# covering sums and box dimension

def covering_sum(group: GroupSpec, s: float, n: int, lam=0.5) -> float:
    """sum over the sphere S(n) of (2 lam^n / (1 - lam))^s."""
    lam = float(lam)
    return sphere_counts(group, n)[n] * (2 * lam ** n / (1 - lam)) ** s


@dataclass
class DimensionReport:
    rows: list          # (n, scale, count)
    exponent: float
    residuals: list
    target: float

    def as_dict(self) -> dict:
        return {"exponent": self.exponent, "target": self.target,
                "rows": [{"n": n, "scale": e, "count": c} for n, e, c in self.rows],
                "residuals": self.residuals}


def box_dimension(group: GroupSpec, lam=0.5, ns: Sequence[int] = range(4, 15),
                  target_growth: float | None = None) -> DimensionReport:
    """Fit log N(eps) against log(1/eps) with N(eps_n) = |S(n)|, eps_n = 2 lam^n/(1-lam)."""
    from .cayley import exact_growth_rate
    lam = float(lam)
    ns = list(ns)
    counts = sphere_counts(group, max(ns))
    rows = [(n, 2 * lam ** n / (1 - lam), counts[n]) for n in ns]
    xs = [math.log(1 / e) for _, e, _ in rows]
    ys = [math.log(c) for _, _, c in rows]
    slope, intercept = np.polyfit(xs, ys, 1)
    res = [y - (slope * x + intercept) for x, y in zip(xs, ys)]
    growth = exact_growth_rate(group)[0] if target_growth is None else target_growth
    return DimensionReport(rows, float(slope), res, growth / -math.log(lam))
