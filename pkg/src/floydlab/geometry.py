"""Deep and transitional points, tight paths, truncations and projections."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

from .cayley import PathWord
from .errors import PreconditionError
from .group import Coset, Element, GroupSpec


@dataclass(frozen=True)
class TransitionParams:
    eps: int = 1
    R: int = 3
    L: int = 8

    def __post_init__(self):
        if self.eps < 0 or self.R < 1 or self.L < 0:
            raise PreconditionError("need eps >= 0, R >= 1, L >= 0")


@dataclass(frozen=True)
class DeepVerdict:
    """``coset`` is None for a transitional vertex, else the witness coset."""

    coset: Coset | None = None

    @property
    def is_deep(self) -> bool:
        return self.coset is not None

    @property
    def kind(self) -> str:
        return "deep" if self.is_deep else "transitional"


TRANSITIONAL = DeepVerdict(None)


@lru_cache(maxsize=32)
def _small_ball(group: GroupSpec, radius: int) -> tuple:
    return tuple(group.ball_elements(radius))


def cosets_within(group: GroupSpec, v: Element, eps: int) -> list:
    """Peripheral cosets X with d(v, X) <= eps, sorted."""
    return sorted(group.cosets_near(v, eps, _small_ball(group, eps)))


def window(group: GroupSpec, path: PathWord, i: int, R: int) -> list:
    """Vertices of the path within word distance R of vertex i."""
    v = path.vertices[i]
    return [w for w in path.vertices if group.distance(v, w) <= R]


def classify_point(group: GroupSpec, path: PathWord, i: int, p: TransitionParams) -> DeepVerdict:
    """Deep(X) when every path vertex in B(v, R) lies in N_eps(X)."""
    if not 0 <= i < len(path.vertices):
        raise PreconditionError(f"vertex index {i} out of range")
    if not group.peripheral:
        return TRANSITIONAL
    v = path.vertices[i]
    win = window(group, path, i, p.R)
    for c in cosets_within(group, v, p.eps):
        if all(group.coset_geometry(w, c)[0] <= p.eps for w in win):
            return DeepVerdict(c)
    return TRANSITIONAL


def classify_path(group: GroupSpec, path: PathWord, p: TransitionParams) -> list:
    return [classify_point(group, path, i, p) for i in range(len(path.vertices))]


@dataclass
class TransitionalReport:
    ok: bool
    max_gap: float                  # largest path distance to a transitional vertex
    transitional: list = field(default_factory=list)
    verdicts: list = field(default_factory=list)

    def __bool__(self):
        return self.ok


def is_transitional_path(group: GroupSpec, path: PathWord, p: TransitionParams) -> TransitionalReport:
    """Every vertex has a transitional vertex within path distance L.

    A path with a single vertex is accepted outright.
    """
    n = len(path.vertices)
    if n <= 1:
        return TransitionalReport(True, 0, list(range(n)), [TRANSITIONAL] * n)
    verdicts = classify_path(group, path, p)
    trans = [i for i, v in enumerate(verdicts) if not v.is_deep]
    if not trans:
        return TransitionalReport(False, float("inf"), [], verdicts)
    gap, j = 0, 0
    for i in range(n):
        while j + 1 < len(trans) and abs(trans[j + 1] - i) <= abs(trans[j] - i):
            j += 1
        gap = max(gap, abs(trans[j] - i))
    return TransitionalReport(gap <= p.L, gap, trans, verdicts)


def is_tight(group: GroupSpec, path: PathWord, c: float, l: float) -> bool:
    """For vertex pairs at distance <= l the subpath length is <= c d + c."""
    vs = path.vertices
    for i in range(len(vs)):
        for j in range(i + 1, len(vs)):
            d = group.distance(vs[i], vs[j])
            if d <= l and j - i > c * d + c:
                return False
    return True


def components(group: GroupSpec, path: PathWord, eps: int, K: int) -> list:
    """(eps, K)-components as (start, end, coset), sorted by start.

    For each coset near the path the component runs from the first to the
    last vertex in its eps-neighbourhood; it counts when that span is >= K.
    """
    first, last = {}, {}
    for i, v in enumerate(path.vertices):
        for c in cosets_within(group, v, eps):
            first.setdefault(c, i)
            last[c] = i
    out = [(first[c], last[c], c) for c in first if last[c] - first[c] >= K]
    return sorted(out, key=lambda t: (t[0], t[1], t[2]))


def truncate(group: GroupSpec, path: PathWord, K: int, eps: int = 1, k0: int = 0) -> PathWord:
    """K-truncation: replace each (eps, K)-component by a geodesic.

    Overlapping components are chained so each replacement starts where the
    previous one ended.  Endpoints are preserved.
    """
    if K <= 2 * k0:
        raise PreconditionError(f"K = {K} must exceed 2 * K0 = {2 * k0}")
    if len(path.letters) == 0:
        return path
    comps = components(group, path, eps, K)
    letters = []
    pos = 0
    for start, end, _ in comps:
        if end <= pos:
            continue
        start = max(start, pos)
        letters.extend(path.letters[pos:start])
        u, w = path.vertices[start], path.vertices[end]
        letters.extend(group.spell(group.mul(group.inv(u), w)))
        pos = end
    letters.extend(path.letters[pos:])
    return PathWord.build(group, path.base, letters)


def projection_diameter(group: GroupSpec, path: PathWord, X: Coset, mu: int) -> int:
    """Diameter of the union of nearest-point projections of path vertices to X."""
    points = set()
    for v in path.vertices:
        d, near = group.coset_geometry(v, X)
        if d <= mu:
            raise PreconditionError(f"vertex {group.format(v)} is within {mu} of the coset")
        points.update(near)
    pts = sorted(points)
    return max((group.distance(a, b) for i, a in enumerate(pts) for b in pts[i + 1:]), default=0)


def nearest_vertex_projection(group: GroupSpec, path: PathWord, z: Element) -> list:
    """Vertices of the path at minimal word distance from z."""
    ds = [group.distance(z, v) for v in path.vertices]
    m = min(ds)
    return [v for v, d in zip(path.vertices, ds) if d == m]


def path_projection_diameter(group: GroupSpec, target: PathWord, other: PathWord) -> int:
    """Diameter of the nearest-vertex projection of ``other`` onto ``target``."""
    idx = {v: i for i, v in enumerate(target.vertices)}
    ids = [idx[p] for z in other.vertices for p in nearest_vertex_projection(group, target, z)]
    pts = [target.vertices[i] for i in (min(ids), max(ids))]
    return max(group.distance(a, b) for a in pts for b in pts)


# ----------------------------------------------------------------------
# generalized tight paths

@dataclass
class GeneralizedTightPath:
    """Tight segments whose consecutive endpoints lie near linking cosets."""

    segments: list          # PathWord
    links: list             # Coset between segment i and i+1

    def check(self, group: GroupSpec, eps: int, c: float = 1, l: float = 4) -> bool:
        if len(self.links) != len(self.segments) - 1:
            return False
        for i, X in enumerate(self.links):
            a, b = self.segments[i].end, self.segments[i + 1].start
            if group.coset_geometry(a, X)[0] > eps or group.coset_geometry(b, X)[0] > eps:
                return False
        if len(set(self.links)) != len(self.links):
            return False
        return all(is_tight(group, s, c, l) for s in self.segments)

    def floyd_length(self, group: GroupSpec, params) -> Fraction:
        from .floyd import floyd_length
        return sum((floyd_length(group, s, params) for s in self.segments), Fraction(0))


def chain_tight_path(group: GroupSpec, points: Sequence[Element], links: Sequence) -> GeneralizedTightPath:
    """Geodesic segments between consecutive points, skipping linked jumps.

    ``points`` alternate as segment start/end pairs; ``links[i]`` is the coset
    joining the end of segment i to the start of segment i+1.
    """
    segs = [PathWord.geodesic(group, points[k], points[k + 1]) for k in range(0, len(points), 2)]
    return GeneralizedTightPath(segs, list(links))
