"""Normal forms, word lengths and peripheral cosets for free products.

The supported groups are free products ``F_1 * ... * F_m`` whose factors are
free abelian groups ``Z^d`` (standard basis) or finite cyclic groups
``Z/n``.  An element is stored as its reduced syllable sequence::

    ((factor_index, coords), (factor_index, coords), ...)

where ``coords`` is a tuple of ints: the integer vector for ``Z^d`` and the
1-tuple ``(r,)`` with ``0 < r < n`` for ``Z/n``.  Adjacent syllables lie in
different factors and no syllable is trivial, so the tuple is a unique key
for the group element.  Plain tuples hash and sort, which is what the graph
searches downstream rely on.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from math import comb
from typing import Iterable, Iterator, Sequence

from .errors import InputError, PreconditionError

Coords = tuple
Syllable = tuple
Element = tuple

IDENTITY: Element = ()


@dataclass(frozen=True)
class FreeAbelian:
    rank: int

    def __post_init__(self):
        if self.rank < 1:
            raise InputError(f"free abelian rank must be >= 1, got {self.rank}")

    def combine(self, a: Coords, b: Coords):
        c = tuple(x + y for x, y in zip(a, b))
        return None if not any(c) else c

    def inverse(self, a: Coords) -> Coords:
        return tuple(-x for x in a)

    def norm(self, a: Coords) -> int:
        return sum(abs(x) for x in a)

    def unit_moves(self) -> list:
        moves = []
        for i in range(self.rank):
            e = [0] * self.rank
            e[i] = 1
            moves.append(tuple(e))
            e[i] = -1
            moves.append(tuple(e))
        return moves

    def sphere_count(self, k: int) -> int:
        """Number of integer vectors with l1 norm exactly k."""
        if k == 0:
            return 1
        d = self.rank
        return sum(2 ** j * comb(d, j) * comb(k - 1, j - 1) for j in range(1, min(d, k) + 1))

    @property
    def cayley_is_tree(self) -> bool:
        return self.rank == 1


@dataclass(frozen=True)
class Cyclic:
    order: int

    def __post_init__(self):
        if self.order < 2:
            raise InputError(f"cyclic order must be >= 2, got {self.order}")

    def combine(self, a: Coords, b: Coords):
        r = (a[0] + b[0]) % self.order
        return None if r == 0 else (r,)

    def inverse(self, a: Coords) -> Coords:
        return ((-a[0]) % self.order,)

    def norm(self, a: Coords) -> int:
        r = a[0] % self.order
        return min(r, self.order - r)

    def unit_moves(self) -> list:
        if self.order == 2:
            return [(1,)]
        return [(1,), (self.order - 1,)]

    def sphere_count(self, k: int) -> int:
        n = self.order
        if k == 0:
            return 1
        if 2 * k < n:
            return 2
        if 2 * k == n:
            return 1
        return 0

    @property
    def cayley_is_tree(self) -> bool:
        return self.order == 2


_SUPERSCRIPTS = str.maketrans("⁻⁰¹²³⁴⁵⁶⁷⁸⁹", "-0123456789")
_TOKEN = re.compile(r"^([A-Za-z][A-Za-z0-9_]*)(?:\^(-?\d+))?$")


@dataclass(frozen=True, order=True)
class Coset:
    """Left coset ``rep * P`` of the peripheral factor ``factor``.

    Build through :meth:`GroupSpec.coset`, which strips a trailing syllable
    in ``factor`` so that equal cosets compare equal.
    """

    rep: Element
    factor: int


class GroupSpec:
    """A free product of cyclic and free abelian factors.

    ``peripheral`` defaults to the free abelian factors of rank >= 2.  Rank-1
    factors may be declared peripheral only with ``allow_rank_one=True``.
    """

    def __init__(self, factors: Sequence, peripheral=None, names: dict | None = None,
                 name: str | None = None, allow_rank_one: bool = False):
        factors = tuple(factors)
        if not factors:
            raise InputError("a group needs at least one factor")
        self.factors = factors
        self.name = name or "G"
        if peripheral is None:
            peripheral = [i for i, f in enumerate(factors)
                          if isinstance(f, FreeAbelian) and f.rank >= 2]
        for i in peripheral:
            if not 0 <= i < len(factors):
                raise InputError(f"peripheral index {i} out of range")
            f = factors[i]
            if not isinstance(f, FreeAbelian):
                raise InputError(f"peripheral factor {i} must be free abelian")
            if f.rank < 2 and not allow_rank_one:
                raise InputError(f"peripheral factor {i} has rank 1")
        self.peripheral = frozenset(peripheral)
        self._build_generators(names or {})

    # ------------------------------------------------------------------
    # generators and words

    def _default_names(self) -> dict:
        n_ab = sum(1 for f in self.factors if isinstance(f, FreeAbelian) and f.rank > 1)
        n_free = sum(1 for f in self.factors if isinstance(f, FreeAbelian) and f.rank == 1)
        n_cyc = sum(1 for f in self.factors if isinstance(f, Cyclic))
        counters = {"ab": 0, "free": 0, "cyc": 0}
        names = {}
        for i, f in enumerate(self.factors):
            if isinstance(f, FreeAbelian) and f.rank > 1:
                counters["ab"] += 1
                suffix = "" if n_ab == 1 else f"_{counters['ab']}"
                for j in range(f.rank):
                    names[(i, j)] = f"x{j + 1}{suffix}"
            elif isinstance(f, FreeAbelian):
                counters["free"] += 1
                names[(i, 0)] = "t" if n_free == 1 else f"t{counters['free']}"
            else:
                counters["cyc"] += 1
                names[(i, 0)] = "u" if n_cyc == 1 else f"u{counters['cyc']}"
        return names

    def _build_generators(self, overrides: dict):
        base = self._default_names()
        known = set(base.values())
        for old in overrides:
            if old not in known:
                raise InputError(f"name override for unknown generator {old!r}")
        base = {k: overrides.get(v, v) for k, v in base.items()}
        if len(set(base.values())) != len(base):
            raise InputError("generator names must be distinct")
        self.basis_names = base
        self._gens = {}
        self._gen_order = []
        self._letter_of = {}
        for (i, j), nm in sorted(base.items()):
            f = self.factors[i]
            if isinstance(f, FreeAbelian):
                e = [0] * f.rank
                e[j] = 1
                pos = ((i, tuple(e)),)
                e[j] = -1
                neg = ((i, tuple(e)),)
            else:
                pos = ((i, (1,)),)
                neg = ((i, (f.order - 1,)),)
            self._gens[nm] = pos
            self._gens[nm + "^-1"] = neg
            self._gen_order.append(nm)
            self._letter_of.setdefault(pos, nm)
            if neg != pos:
                self._gen_order.append(nm + "^-1")
                self._letter_of.setdefault(neg, nm + "^-1")

    @property
    def generator_names(self) -> list:
        """The symmetric generating set S, one name per distinct element."""
        return list(self._gen_order)

    @property
    def generators(self) -> list:
        return [self._gens[n] for n in self._gen_order]

    def gen(self, name: str) -> Element:
        try:
            return self._gens[name]
        except KeyError:
            raise InputError(f"unknown generator {name!r}") from None

    def letter(self, g: Element) -> str:
        """Name of a generator given as an element."""
        try:
            return self._letter_of[g]
        except KeyError:
            raise InputError(f"{self.format(g)} is not a generator") from None

    def parse_token(self, token: str) -> Element:
        tok = token.translate(_SUPERSCRIPTS).strip()
        if tok in ("e", "1"):
            return IDENTITY
        m = _TOKEN.match(tok)
        if not m:
            raise InputError(f"cannot parse generator token {token!r}")
        name, power = m.group(1), int(m.group(2) or 1)
        if name not in self._gens or name.endswith("^-1"):
            raise InputError(f"unknown generator {name!r}")
        g = self._gens[name]
        return self.power(g, power)

    def parse(self, text: str) -> Element:
        """Parse a space separated word such as ``"x^3 y^-2 t x"``."""
        tokens = text.replace("*", " ").replace("·", " ").split()
        return self.normalize(self.parse_token(t) for t in tokens)

    def normalize(self, word: Iterable) -> Element:
        """Multiply out a word of generator names or elements."""
        g = IDENTITY
        for letter in word:
            if isinstance(letter, str):
                letter = self.parse_token(letter)
            g = self.mul(g, letter)
        return g

    def format(self, g: Element) -> str:
        if not g:
            return "e"
        out = []
        for i, c in g:
            f = self.factors[i]
            if isinstance(f, FreeAbelian):
                for j, v in enumerate(c):
                    if v:
                        nm = self.basis_names[(i, j)]
                        out.append(nm if v == 1 else f"{nm}^{v}")
            else:
                r = c[0]
                v = r if 2 * r <= f.order else r - f.order
                nm = self.basis_names[(i, 0)]
                out.append(nm if v == 1 else f"{nm}^{v}")
        return " ".join(out)

    # ------------------------------------------------------------------
    # arithmetic

    def mul(self, g: Element, h: Element) -> Element:
        if not g:
            return h
        if not h:
            return g
        out = list(g)
        i = 0
        while i < len(h) and out and out[-1][0] == h[i][0]:
            f = out[-1][0]
            c = self.factors[f].combine(out[-1][1], h[i][1])
            out.pop()
            i += 1
            if c is not None:
                out.append((f, c))
                break
        out.extend(h[i:])
        return tuple(out)

    def inv(self, g: Element) -> Element:
        return tuple((i, self.factors[i].inverse(c)) for i, c in reversed(g))

    def power(self, g: Element, k: int) -> Element:
        if k < 0:
            g, k = self.inv(g), -k
        out = IDENTITY
        for _ in range(k):
            out = self.mul(out, g)
        return out

    def syllable_length(self, s: Syllable) -> int:
        return self.factors[s[0]].norm(s[1])

    def length(self, g: Element) -> int:
        """Word length d_S(1, g)."""
        return sum(self.factors[i].norm(c) for i, c in g)

    def distance(self, g: Element, h: Element) -> int:
        return self.length(self.mul(self.inv(g), h))

    @property
    def is_hyperbolic(self) -> bool:
        """No peripheral factors and no Z^d with d >= 2."""
        return not self.peripheral and all(
            not (isinstance(f, FreeAbelian) and f.rank >= 2) for f in self.factors)

    @property
    def cayley_is_tree(self) -> bool:
        return all(f.cayley_is_tree for f in self.factors)

    def syllable_geodesics(self, s: Syllable) -> Iterator[tuple]:
        """All geodesic spellings (tuples of generator names) of one syllable."""
        i, c = s
        f = self.factors[i]
        if isinstance(f, Cyclic):
            r = c[0]
            nm = self.basis_names[(i, 0)]
            inv = nm if f.order == 2 else nm + "^-1"
            if 2 * r < f.order:
                yield (nm,) * r
            elif 2 * r > f.order:
                yield (inv,) * (f.order - r)
            else:
                yield (nm,) * r
                if inv != nm:
                    yield (inv,) * r
            return
        letters = []
        for j, v in enumerate(c):
            nm = self.basis_names[(i, j)]
            letters.extend([nm if v > 0 else nm + "^-1"] * abs(v))
        seen = set()
        for perm in itertools.permutations(letters):
            if perm not in seen:
                seen.add(perm)
                yield perm

    def spell(self, g: Element) -> list:
        """Canonical geodesic word for g: per syllable, basis letters in order."""
        out = []
        for s in g:
            if isinstance(self.factors[s[0]], FreeAbelian):
                out.extend(self._spell_abelian(s))
            else:
                out.extend(next(self.syllable_geodesics(s)))
        return out

    def _spell_abelian(self, s: Syllable) -> list:
        i, c = s
        out = []
        for j, v in enumerate(c):
            nm = self.basis_names[(i, j)]
            out.extend([nm if v > 0 else nm + "^-1"] * abs(v))
        return out

    # ------------------------------------------------------------------
    # peripheral cosets

    def coset(self, g: Element, factor: int) -> Coset:
        if factor not in self.peripheral:
            raise PreconditionError(f"factor {factor} is not peripheral")
        if g and g[-1][0] == factor:
            g = g[:-1]
        return Coset(g, factor)

    def coset_contains(self, c: Coset, h: Element) -> bool:
        k = self.mul(self.inv(c.rep), h)
        return not k or (len(k) == 1 and k[0][0] == c.factor)

    def coset_geometry(self, h: Element, c: Coset) -> tuple:
        """Distance from h to the coset c and the set of nearest points.

        With ``k = rep^-1 h`` the nearest point is ``rep * s`` when the first
        syllable ``s`` of k lies in the peripheral factor and ``rep`` otherwise;
        the minimiser is unique for this family.
        """
        k = self.mul(self.inv(c.rep), h)
        if k and k[0][0] == c.factor:
            return self.length(k) - self.syllable_length(k[0]), [self.mul(c.rep, (k[0],))]
        return self.length(k), [c.rep]

    def cosets_near(self, v: Element, radius: int, ball: Sequence | None = None) -> set:
        """Peripheral cosets within word distance ``radius`` of v."""
        if ball is None:
            ball = self.ball_elements(radius)
        out = set()
        for b in ball:
            q = self.mul(v, b)
            for f in self.peripheral:
                out.add(self.coset(q, f))
        return out

    def ball_elements(self, radius: int) -> list:
        """B(1, radius) by breadth-first search, sorted by (length, normal form)."""
        seen = {IDENTITY}
        frontier = [IDENTITY]
        gens = self.generators
        for _ in range(radius):
            nxt = []
            for g in frontier:
                for s in gens:
                    h = self.mul(g, s)
                    if h not in seen:
                        seen.add(h)
                        nxt.append(h)
            frontier = nxt
        return sorted(seen, key=lambda g: (self.length(g), g))

    def __repr__(self):
        return f"GroupSpec({self.name!r}, factors={list(self.factors)!r})"


class Interner:
    """Insert-or-get table mapping elements to small integer handles."""

    def __init__(self):
        self._ids: dict = {}
        self.elements: list = []

    def __call__(self, g: Element) -> int:
        idx = self._ids.get(g)
        if idx is None:
            idx = self._ids[g] = len(self.elements)
            self.elements.append(g)
        return idx

    def get(self, g: Element):
        return self._ids.get(g)

    def __len__(self):
        return len(self.elements)

    def __contains__(self, g):
        return g in self._ids


# ----------------------------------------------------------------------
# reference groups and the group description file

def free_group(rank: int = 2, names: Sequence[str] | None = None) -> GroupSpec:
    names = list(names or "abcdefgh"[:rank])
    defaults = ["t"] if rank == 1 else [f"t{i + 1}" for i in range(rank)]
    return GroupSpec([FreeAbelian(1)] * rank, name=f"F{rank}", names=dict(zip(defaults, names)))


def builtin(name: str) -> GroupSpec:
    """The reference groups F2 = Z*Z, G2 = Z^2*Z, G3 = Z/2*Z/3 and Z."""
    key = name.upper()
    if key == "F2":
        return free_group(2)
    if key == "G2":
        return GroupSpec([FreeAbelian(2), FreeAbelian(1)], name="G2",
                         names={"x1": "x", "x2": "y"})
    if key == "G3":
        return GroupSpec([Cyclic(2), Cyclic(3)], name="G3", names={"u1": "u", "u2": "v"})
    if key == "Z":
        return GroupSpec([FreeAbelian(1)], name="Z")
    raise InputError(f"unknown builtin group {name!r}")


_FILE_KEYS = {"name", "factors", "peripheral", "allow_rank_one", "names"}
_FACTOR_KEYS = {"type", "rank", "order"}


def _line_of(text: str, needle: str) -> int:
    for n, line in enumerate(text.splitlines(), 1):
        if re.search(rf"\b{re.escape(needle)}\b", line):
            return n
    return 0


def parse_group_text(text: str, source: str = "<string>") -> GroupSpec:
    """Parse a TOML group description (schema in the README)."""
    try:
        import tomllib
    except ModuleNotFoundError:  # Python < 3.11
        import tomli as tomllib
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise InputError(f"{source}: {exc}") from None
    for key in data:
        if key not in _FILE_KEYS:
            raise InputError(f"{source}:{_line_of(text, key)}: unknown key {key!r}")
    if "factors" not in data:
        raise InputError(f"{source}: missing required key 'factors'")
    factors = []
    for entry in data["factors"]:
        line = _line_of(text, "factors")
        if not isinstance(entry, dict):
            raise InputError(f"{source}:{line}: factor entries must be tables")
        for key in entry:
            if key not in _FACTOR_KEYS:
                raise InputError(f"{source}:{_line_of(text, key)}: unknown factor key {key!r}")
        kind = entry.get("type")
        if kind == "free_abelian":
            factors.append(FreeAbelian(int(entry.get("rank", 1))))
        elif kind == "free":
            factors.extend([FreeAbelian(1)] * int(entry.get("rank", 1)))
        elif kind == "cyclic":
            if "order" not in entry:
                raise InputError(f"{source}:{line}: cyclic factor needs 'order'")
            factors.append(Cyclic(int(entry["order"])))
        else:
            raise InputError(f"{source}:{line}: unknown factor type {kind!r}")
    names = data.get("names", {})
    if not isinstance(names, dict):
        raise InputError(f"{source}:{_line_of(text, 'names')}: 'names' must be a table")
    return GroupSpec(factors, peripheral=data.get("peripheral"), names=names,
                     name=data.get("name", source),
                     allow_rank_one=bool(data.get("allow_rank_one", False)))


def load_group(spec: str) -> GroupSpec:
    """A builtin name (F2, G2, G3, Z) or a path to a group description file."""
    if spec.upper() in ("F2", "G2", "G3", "Z"):
        return builtin(spec)
    try:
        with open(spec, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise InputError(f"cannot read group file {spec!r}: {exc}") from None
    return parse_group_text(text, source=spec)
