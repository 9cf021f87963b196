"""Convexity spaces, canonical encodings and safe areas.

Every space exposes a hull oracle, a canonical bitstring codec, its Helly
number and its dilation factor.  Bitstrings are plain ``str`` objects over
``'0'``/``'1'``; the canonical element order is ``(len(bits), bits)``.
"""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce
from itertools import combinations
from typing import Any, Callable, Iterable, Optional, Sequence


class InputError(ValueError):
    """Raised for elements or parameters that do not belong to a space."""


class EncodingError(ValueError):
    """Raised when a bitstring is not a valid encoding."""


def order_key(bits: str) -> tuple[int, str]:
    return len(bits), bits


@dataclass(frozen=True)
class Element:
    payload: Any
    bits: str

    @property
    def bit_length(self) -> int:
        return len(self.bits)

    def __lt__(self, other: "Element") -> bool:
        return order_key(self.bits) < order_key(other.bits)


class ValueMultiset:
    """Multiset of space elements with order-insensitive equality."""

    def __init__(self, items: Iterable = ()):
        self._counts = Counter(items)

    def __len__(self) -> int:
        return sum(self._counts.values())

    def __iter__(self):
        return self._counts.elements()

    def __eq__(self, other) -> bool:
        if isinstance(other, ValueMultiset):
            return self._counts == other._counts
        return NotImplemented

    def __repr__(self) -> str:
        return f"ValueMultiset({sorted(self._counts.items(), key=repr)})"

    def count(self, v) -> int:
        return self._counts[v]

    def distinct(self) -> list:
        return list(self._counts)


def _as_list(M) -> list:
    return list(M)


@dataclass
class SafeArea:
    space: "ConvexSpace"
    contains: Callable[[Any], bool]
    witness: Optional[Any]
    # Extra structure used by codecs and tests (intervals, vertices, ...).
    detail: dict = field(default_factory=dict)

    @property
    def empty(self) -> bool:
        return self.witness is None

    def __contains__(self, v) -> bool:
        return self.contains(v)


# -- integer codecs -------------------------------------------------------

def gamma_encode(x: int) -> str:
    if x < 1:
        raise InputError("gamma code needs a positive integer")
    b = bin(x)[2:]
    return "0" * (len(b) - 1) + b


def gamma_decode(bits: str, pos: int) -> tuple[int, int]:
    zeros = 0
    while pos + zeros < len(bits) and bits[pos + zeros] == "0":
        zeros += 1
    end = pos + 2 * zeros + 1
    if end > len(bits):
        raise EncodingError("truncated gamma code")
    return int(bits[pos + zeros:end], 2), end


def fixed_width(size: int) -> int:
    return max(1, (size - 1).bit_length())


class ConvexSpace:
    kind: str = "abstract"
    helly: int = 2
    dilation: Fraction = Fraction(1)
    finite: bool = True

    # codec ---------------------------------------------------------------
    def encode(self, v) -> str:
        raise NotImplementedError

    def decode(self, bits: str):
        raise NotImplementedError

    def check(self, v) -> None:
        raise NotImplementedError

    def bit_length(self, v) -> int:
        return len(self.encode(v))

    def element(self, v) -> Element:
        return Element(v, self.encode(v))

    def key(self, v) -> tuple[int, str]:
        return order_key(self.encode(v))

    def minimum(self):
        raise NotImplementedError

    # Wire format used by the protocols.  Spaces with dilation 1 send the
    # plain encoding; Euclidean spaces send the dilated encoding.
    def wire_encode(self, v, area: Optional[SafeArea] = None) -> str:
        return self.encode(v)

    def wire_decode(self, bits: str):
        return self.decode(bits)

    # convexity -----------------------------------------------------------
    def hull_contains(self, generators, candidate) -> bool:
        raise NotImplementedError

    def safe_area(self, M, k: int) -> SafeArea:
        raise NotImplementedError

    def elements(self) -> list:
        raise InputError(f"{self.kind} is not enumerable")


def _check_k(M: list, k: int) -> None:
    if k < 0 or k > len(M):
        raise InputError(f"k={k} out of range for |M|={len(M)}")


def _empty_area(space: ConvexSpace) -> SafeArea:
    return SafeArea(space, lambda v: False, None, {"empty": True})


def _order_stat_interval(values: list, k: int):
    """Intersection of the hulls of all (|M|-k)-subsets of a 1D multiset."""
    s = sorted(values)
    m = len(s)
    if m - k <= 0:
        return None
    lo, hi = s[k], s[m - 1 - k]
    if lo > hi:
        return None
    return lo, hi


# -- grids ----------------------------------------------------------------

class Grid1D(ConvexSpace):
    """Integers ``0..size-1`` with interval convexity."""

    kind = "grid-interval-1D"
    helly = 2

    def __init__(self, size: int):
        if size < 1:
            raise InputError("grid size must be positive")
        self.size = size
        self.width = fixed_width(size)

    def __repr__(self):
        return f"Grid1D({self.size})"

    def __eq__(self, other):
        return isinstance(other, Grid1D) and other.size == self.size

    def __hash__(self):
        return hash(("grid1d", self.size))

    def check(self, v) -> None:
        if not isinstance(v, int) or isinstance(v, bool) or not 0 <= v < self.size:
            raise InputError(f"{v!r} is not in {self!r}")

    def encode(self, v) -> str:
        self.check(v)
        return format(v, f"0{self.width}b")

    def decode(self, bits: str):
        if len(bits) != self.width or set(bits) - {"0", "1"}:
            raise EncodingError("wrong width for grid element")
        v = int(bits, 2)
        if v >= self.size:
            raise EncodingError("grid element out of range")
        return v

    def minimum(self):
        return 0

    def elements(self) -> list:
        return list(range(self.size))

    def hull_contains(self, generators, candidate) -> bool:
        gens = _as_list(generators)
        for g in gens:
            self.check(g)
        self.check(candidate)
        return bool(gens) and min(gens) <= candidate <= max(gens)

    def safe_area(self, M, k: int) -> SafeArea:
        M = _as_list(M)
        for v in M:
            self.check(v)
        _check_k(M, k)
        iv = _order_stat_interval(M, k)
        if iv is None:
            return _empty_area(self)
        lo, hi = iv
        return SafeArea(self, lambda v: lo <= v <= hi, lo, {"interval": (lo, hi)})


class GridBox(ConvexSpace):
    """Integer points of a box with axis-aligned box convexity."""

    kind = "grid-box-d"
    helly = 2

    def __init__(self, sizes: Sequence[int]):
        if not sizes:
            raise InputError("box needs at least one dimension")
        self.axes = [Grid1D(s) for s in sizes]
        self.sizes = tuple(sizes)

    def __repr__(self):
        return f"GridBox({self.sizes})"

    def __eq__(self, other):
        return isinstance(other, GridBox) and other.sizes == self.sizes

    def __hash__(self):
        return hash(("box", self.sizes))

    def check(self, v) -> None:
        if not isinstance(v, tuple) or len(v) != len(self.axes):
            raise InputError(f"{v!r} has the wrong dimension for {self!r}")
        for a, x in zip(self.axes, v):
            a.check(x)

    def encode(self, v) -> str:
        self.check(v)
        return "".join(a.encode(x) for a, x in zip(self.axes, v))

    def decode(self, bits: str):
        out, pos = [], 0
        for a in self.axes:
            out.append(a.decode(bits[pos:pos + a.width]))
            pos += a.width
        if pos != len(bits):
            raise EncodingError("trailing bits in box element")
        return tuple(out)

    def minimum(self):
        return tuple(0 for _ in self.axes)

    def elements(self) -> list:
        out = [()]
        for a in self.axes:
            out = [p + (x,) for p in out for x in range(a.size)]
        return out

    def hull_contains(self, generators, candidate) -> bool:
        gens = _as_list(generators)
        for g in gens:
            self.check(g)
        self.check(candidate)
        if not gens:
            return False
        return all(min(g[i] for g in gens) <= candidate[i] <= max(g[i] for g in gens)
                   for i in range(len(self.axes)))

    def safe_area(self, M, k: int) -> SafeArea:
        M = _as_list(M)
        for v in M:
            self.check(v)
        _check_k(M, k)
        ivs = []
        for i in range(len(self.axes)):
            iv = _order_stat_interval([v[i] for v in M], k)
            if iv is None:
                return _empty_area(self)
            ivs.append(iv)

        def contains(v):
            return all(lo <= x <= hi for (lo, hi), x in zip(ivs, v))

        return SafeArea(self, contains, tuple(lo for lo, _ in ivs), {"box": ivs})


# -- finite explicit spaces ---------------------------------------------------

class FiniteExplicit(ConvexSpace):
    """Finite space given by an explicit, intersection-closed family of convex sets."""

    kind = "finite-explicit"

    def __init__(self, labels: Sequence[str], hulls: Sequence[tuple], helly: Optional[int] = None):
        if not labels or len(set(labels)) != len(labels):
            raise InputError("labels must be distinct and nonempty")
        self.labels = list(labels)
        self.index = {lab: i for i, lab in enumerate(self.labels)}
        self.width = fixed_width(len(labels))
        universe = frozenset(range(len(labels)))
        family = {universe, frozenset()}
        table = []
        for gens, members in hulls:
            g, m = frozenset(gens), frozenset(members)
            if not m <= universe or not g <= m:
                raise InputError("hull entry must contain its generators")
            family.add(m)
            table.append((g, m))
        for a, b in combinations(list(family), 2):
            if a & b not in family:
                raise InputError("convex family is not intersection-closed")
        self.family = sorted(family, key=lambda s: (len(s), sorted(s)))
        self._hull_cache: dict = {}
        for g, m in table:
            if self._hull_idx(g) != m:
                raise InputError("hull entry disagrees with the closure of its generators")
        computed = self._helly_bruteforce() if len(labels) <= 12 else 2
        self.helly = max(2, helly if helly is not None else computed)

    @classmethod
    def from_json(cls, text_or_obj) -> "FiniteExplicit":
        obj = json.loads(text_or_obj) if isinstance(text_or_obj, str) else text_or_obj
        try:
            labels = [str(x) for x in obj["elements"]]
            hulls = [(list(e[0]), list(e[1])) for e in obj["hulls"]]
        except (KeyError, TypeError, IndexError) as exc:
            raise InputError(f"malformed finite space description: {exc}") from exc
        return cls(labels, hulls, obj.get("helly"))

    @classmethod
    def load(cls, path) -> "FiniteExplicit":
        with open(path) as fh:
            return cls.from_json(fh.read())

    def __repr__(self):
        return f"FiniteExplicit({len(self.labels)} elements)"

    def _hull_idx(self, gens: frozenset) -> frozenset:
        hit = self._hull_cache.get(gens)
        if hit is None:
            if not gens:
                hit = frozenset()
            else:
                hit = reduce(frozenset.__and__, (c for c in self.family if gens <= c))
            self._hull_cache[gens] = hit
        return hit

    def _helly_bruteforce(self) -> int:
        # Helly number = size of the largest Helly-independent set.
        best = 1
        n = len(self.labels)
        for size in range(2, n + 1):
            found = False
            for S in combinations(range(n), size):
                S = frozenset(S)
                common = reduce(frozenset.__and__, (self._hull_idx(S - {x}) for x in S))
                if not common:
                    found = True
                    break
            if found:
                best = size
            else:
                break
        return best

    def check(self, v) -> None:
        if v not in self.index:
            raise InputError(f"{v!r} is not an element of this space")

    def encode(self, v) -> str:
        self.check(v)
        return format(self.index[v], f"0{self.width}b")

    def decode(self, bits: str):
        if len(bits) != self.width or set(bits) - {"0", "1"}:
            raise EncodingError("wrong width for explicit element")
        i = int(bits, 2)
        if i >= len(self.labels):
            raise EncodingError("explicit element out of range")
        return self.labels[i]

    def minimum(self):
        return self.labels[0]

    def elements(self) -> list:
        return list(self.labels)

    def hull(self, generators) -> set:
        idx = frozenset(self.index[g] for g in generators)
        return {self.labels[i] for i in self._hull_idx(idx)}

    def hull_contains(self, generators, candidate) -> bool:
        gens = _as_list(generators)
        for g in gens:
            self.check(g)
        self.check(candidate)
        return self.index[candidate] in self._hull_idx(frozenset(self.index[g] for g in gens))

    def safe_area(self, M, k: int) -> SafeArea:
        M = _as_list(M)
        for v in M:
            self.check(v)
        _check_k(M, k)
        idx = [self.index[v] for v in M]
        members = frozenset(range(len(self.labels)))
        for sub in combinations(range(len(M)), len(M) - k):
            members = members & self._hull_idx(frozenset(idx[i] for i in sub))
            if not members:
                return _empty_area(self)
        names = {self.labels[i] for i in members}
        return SafeArea(self, names.__contains__, self.labels[min(members)], {"members": names})


# -- products -----------------------------------------------------------

class ProductSpace(ConvexSpace):
    kind = "product"

    def __init__(self, factors: Sequence[ConvexSpace]):
        if not factors:
            raise InputError("product needs at least one factor")
        for f in factors:
            if not f.finite:
                raise InputError(f"product factor {f!r} is not finite")
        self.factors = list(factors)
        self.helly = max(f.helly for f in factors)
        self.dilation = Fraction(1)

    def __repr__(self):
        return f"ProductSpace({self.factors})"

    def check(self, v) -> None:
        if not isinstance(v, tuple) or len(v) != len(self.factors):
            raise InputError(f"{v!r} is not a {len(self.factors)}-tuple")
        for f, x in zip(self.factors, v):
            f.check(x)

    def encode(self, v) -> str:
        self.check(v)
        return "".join(f.encode(x) for f, x in zip(self.factors, v))

    def decode(self, bits: str):
        out, pos = [], 0
        for f in self.factors:
            w = len(f.encode(f.minimum()))
            out.append(f.decode(bits[pos:pos + w]))
            pos += w
        if pos != len(bits):
            raise EncodingError("trailing bits in product element")
        return tuple(out)

    def minimum(self):
        return tuple(f.minimum() for f in self.factors)

    def elements(self) -> list:
        out = [()]
        for f in self.factors:
            out = [p + (x,) for p in out for x in f.elements()]
        return out

    def hull_contains(self, generators, candidate) -> bool:
        gens = _as_list(generators)
        for g in gens:
            self.check(g)
        self.check(candidate)
        return bool(gens) and all(
            f.hull_contains([g[i] for g in gens], candidate[i]) for i, f in enumerate(self.factors))

    def safe_area(self, M, k: int) -> SafeArea:
        M = _as_list(M)
        for v in M:
            self.check(v)
        _check_k(M, k)
        parts = []
        for i, f in enumerate(self.factors):
            a = f.safe_area([v[i] for v in M], k)
            if a.empty:
                return _empty_area(self)
            parts.append(a)

        def contains(v):
            return all(a.contains(x) for a, x in zip(parts, v))

        return SafeArea(self, contains, tuple(a.witness for a in parts), {"factors": parts})


# -- exact rational Euclidean space (d = 1, 2) ---------------------------------

def _frac(x) -> Fraction:
    if isinstance(x, bool):
        raise InputError("booleans are not coordinates")
    if isinstance(x, (int, Fraction)):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    raise InputError(f"coordinate {x!r} is not rational")


def _cross(o, a, b) -> Fraction:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def _normalize(a1: Fraction, a2: Fraction, b: Fraction) -> tuple[int, int, int]:
    den = math.lcm(a1.denominator, a2.denominator, b.denominator)
    x, y, z = int(a1 * den), int(a2 * den), int(b * den)
    g = math.gcd(math.gcd(abs(x), abs(y)), abs(z)) or 1
    return x // g, y // g, z // g


def _hull_constraints_2d(points: list) -> set:
    """Halfplanes a.x <= b whose intersection is the convex hull of ``points``."""
    pts = sorted(set(points))
    out = set()
    if len(pts) == 1:
        px, py = pts[0]
        for a1, a2, b in ((1, 0, px), (-1, 0, -px), (0, 1, py), (0, -1, -py)):
            out.add(_normalize(Fraction(a1), Fraction(a2), Fraction(b)))
        return out
    lower: list = []
    for p in pts:
        while len(lower) >= 2 and _cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper: list = []
    for p in reversed(pts):
        while len(upper) >= 2 and _cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    ring = lower[:-1] + upper[:-1]
    if len(ring) == 2 or all(_cross(pts[0], pts[-1], p) == 0 for p in pts):
        e1, e2 = pts[0], pts[-1]
        dx, dy = e2[0] - e1[0], e2[1] - e1[1]
        c = dy * e1[0] - dx * e1[1]
        out.add(_normalize(dy, -dx, c))
        out.add(_normalize(-dy, dx, -c))
        out.add(_normalize(dx, dy, dx * e2[0] + dy * e2[1]))
        out.add(_normalize(-dx, -dy, -(dx * e1[0] + dy * e1[1])))
        return out
    for i in range(len(ring)):
        p, q = ring[i], ring[(i + 1) % len(ring)]
        dx, dy = q[0] - p[0], q[1] - p[1]
        out.add(_normalize(dy, -dx, dy * p[0] - dx * p[1]))
    return out


def _feasible(c: tuple, p) -> bool:
    return c[0] * p[0] + c[1] * p[1] <= c[2]


def _intersect(c1: tuple, c2: tuple):
    det = c1[0] * c2[1] - c1[1] * c2[0]
    if det == 0:
        return None
    x = Fraction(c1[2] * c2[1] - c1[1] * c2[2], det)
    y = Fraction(c1[0] * c2[2] - c1[2] * c2[0], det)
    return x, y


def _line_through(p, q):
    dx, dy = q[0] - p[0], q[1] - p[1]
    return _normalize(dy, -dx, dy * p[0] - dx * p[1])


class EuclideanRational(ConvexSpace):
    """Rational points of R^d (d in {1, 2}) with straight-line convexity."""

    kind = "euclidean-rational-d"
    finite = False

    def __init__(self, d: int):
        if d not in (1, 2):
            raise InputError("only d = 1 and d = 2 are supported")
        self.d = d
        self.helly = d + 1
        self.dilation = Fraction(d * (d + 1))
        self.count_width = max(1, d.bit_length())

    def __repr__(self):
        return f"EuclideanRational({self.d})"

    def __eq__(self, other):
        return isinstance(other, EuclideanRational) and other.d == self.d

    def __hash__(self):
        return hash(("euclid", self.d))

    def point(self, *coords) -> tuple:
        return tuple(_frac(c) for c in coords)

    def check(self, v) -> None:
        if not isinstance(v, tuple) or len(v) != self.d:
            raise InputError(f"{v!r} is not a point of R^{self.d}")
        for x in v:
            if not isinstance(x, Fraction):
                raise InputError(f"coordinate {x!r} must be a Fraction")

    def encode(self, v) -> str:
        self.check(v)
        out = []
        for x in v:
            out.append("1" if x < 0 else "0")
            out.append(gamma_encode(abs(x.numerator) + 1))
            out.append(gamma_encode(x.denominator))
        return "".join(out)

    def _decode_at(self, bits: str, pos: int):
        coords = []
        for _ in range(self.d):
            if pos >= len(bits):
                raise EncodingError("truncated point")
            neg = bits[pos] == "1"
            num, pos = gamma_decode(bits, pos + 1)
            den, pos = gamma_decode(bits, pos)
            num -= 1
            if neg and num == 0:
                raise EncodingError("negative zero is not canonical")
            x = Fraction(-num if neg else num, den)
            if x.denominator != den:
                raise EncodingError("fraction not in lowest terms")
            coords.append(x)
        return tuple(coords), pos

    def decode(self, bits: str):
        v, pos = self._decode_at(bits, 0)
        if pos != len(bits):
            raise EncodingError("trailing bits after point")
        return v

    def minimum(self):
        return tuple(Fraction(0) for _ in range(self.d))

    # -- dilated encoding --------------------------------------------------
    def dilated_encode(self, v, form=None) -> str:
        if form is None:
            return "0" + self.encode(v)
        if len(form) != self.d:
            raise EncodingError(f"need {self.d} hyperplanes, got {len(form)}")
        out = ["1"]
        for plane in form:
            if not 1 <= len(plane) <= self.d:
                raise EncodingError("hyperplane needs between 1 and d points")
            out.append(format(len(plane), f"0{self.count_width}b"))
            for p in plane:
                out.append("0" + self.encode(p))
        bits = "".join(out)
        if self.dilated_decode(bits) != v:
            raise EncodingError("hyperplane witness does not describe the point")
        return bits

    def dilated_decode(self, bits: str):
        if not bits:
            raise EncodingError("empty dilated encoding")
        if bits[0] == "0":
            return self.decode(bits[1:])
        pos = 1
        planes = []
        for _ in range(self.d):
            cnt_bits = bits[pos:pos + self.count_width]
            if len(cnt_bits) != self.count_width:
                raise EncodingError("truncated hyperplane count")
            cnt = int(cnt_bits, 2)
            pos += self.count_width
            if not 1 <= cnt <= self.d:
                raise EncodingError("bad hyperplane point count")
            pts = []
            for _ in range(cnt):
                # Nested points must use the plain form (depth one).
                if pos >= len(bits) or bits[pos] != "0":
                    raise EncodingError("nested hyperplane encodings are not accepted")
                p, pos = self._decode_at(bits, pos + 1)
                pts.append(p)
            planes.append(pts)
        if pos != len(bits):
            raise EncodingError("trailing bits after hyperplane form")
        if self.d == 1:
            return planes[0][0]
        lines = []
        for pts in planes:
            if len(pts) != 2 or pts[0] == pts[1]:
                raise EncodingError("a line needs two distinct points")
            lines.append(_line_through(pts[0], pts[1]))
        p = _intersect(lines[0], lines[1])
        if p is None:
            raise EncodingError("hyperplanes do not meet in a single point")
        return p

    def shortest_dilated(self, v, M: Iterable = ()) -> str:
        """Shortest dilated encoding of ``v`` using lines through points of ``M``."""
        best = self.dilated_encode(v)
        if self.d == 1:
            return best
        pts = sorted(set(M))
        lines = {}
        for p, q in combinations(pts, 2):
            if p == q:
                continue
            c = _line_through(p, q)
            if _feasible(c, v) and _feasible((-c[0], -c[1], -c[2]), v):
                enc = len(self.encode(p)) + len(self.encode(q))
                if c not in lines or enc < lines[c][0]:
                    lines[c] = (enc, (p, q))
        ranked = sorted(lines.items(), key=lambda kv: kv[1][0])
        for i, (c1, (l1, f1)) in enumerate(ranked):
            for c2, (l2, f2) in ranked[i + 1:]:
                if 1 + 2 * (self.count_width + 2) + l1 + l2 >= len(best):
                    break
                if _intersect(c1, c2) is not None:
                    cand = self.dilated_encode(v, [list(f1), list(f2)])
                    if order_key(cand) < order_key(best):
                        best = cand
        return best

    def wire_encode(self, v, area: Optional[SafeArea] = None) -> str:
        M = area.detail.get("points", ()) if area is not None else ()
        return self.shortest_dilated(v, M)

    def wire_decode(self, bits: str):
        return self.dilated_decode(bits)

    # -- convexity ---------------------------------------------------------
    def hull_contains(self, generators, candidate) -> bool:
        gens = sorted(set(_as_list(generators)))
        for g in gens:
            self.check(g)
        self.check(candidate)
        if not gens:
            return False
        if self.d == 1:
            return gens[0] <= candidate <= gens[-1]
        return all(_feasible(c, candidate) for c in _hull_constraints_2d(gens))

    def safe_area(self, M, k: int) -> SafeArea:
        M = _as_list(M)
        for v in M:
            self.check(v)
        _check_k(M, k)
        if self.d == 1:
            iv = _order_stat_interval(M, k)
            if iv is None:
                return _empty_area(self)
            lo, hi = iv
            witness = min({lo, hi}, key=lambda p: (order_key(self.shortest_dilated(p)), self.key(p)))
            return SafeArea(self, lambda v: lo <= v <= hi, witness,
                            {"interval": (lo, hi), "vertices": sorted({lo, hi}), "points": M})
        size = len(M) - k
        if size <= 0:
            return _empty_area(self)
        constraints: set = set()
        seen: set = set()
        for sub in combinations(range(len(M)), size):
            key = tuple(sorted(M[i] for i in sub))
            if key in seen:
                continue
            seen.add(key)
            constraints |= _hull_constraints_2d(list(key))
        cons = sorted(constraints)

        def contains(v):
            return all(_feasible(c, v) for c in cons)

        cands = set(M)
        for i, c1 in enumerate(cons):
            for c2 in cons[i + 1:]:
                p = _intersect(c1, c2)
                if p is not None:
                    cands.add(p)
        vertices = sorted(p for p in cands if contains(p))
        if not vertices:
            return _empty_area(self)
        # Vertices are ranked by their shortest dilated encoding.
        witness = min(vertices, key=lambda p: (order_key(self.shortest_dilated(p, M)), self.key(p)))
        return SafeArea(self, contains, witness,
                        {"constraints": cons, "vertices": vertices, "points": M})


# -- module level operations ------------------------------------------------

def hull_contains(space: ConvexSpace, generators, candidate) -> bool:
    return space.hull_contains(generators, candidate)


def safe_area(space: ConvexSpace, M, k: int) -> SafeArea:
    return space.safe_area(M, k)


def pick_canonical(area: SafeArea):
    return area.witness


def helly_number(space: ConvexSpace) -> int:
    return space.helly


def dilated_encode(space: ConvexSpace, v, hyperplane_form=None) -> str:
    if isinstance(space, EuclideanRational):
        return space.dilated_encode(v, hyperplane_form)
    if space.dilation != 1:
        raise InputError("dilated encoding needs a Euclidean space or dilation 1")
    if hyperplane_form is not None:
        raise EncodingError("spaces with dilation 1 only use the plain form")
    return "0" + space.encode(v)


def dilated_decode(space: ConvexSpace, bits: str):
    if isinstance(space, EuclideanRational):
        return space.dilated_decode(bits)
    if not bits or bits[0] != "0":
        raise EncodingError("spaces with dilation 1 only use the plain form")
    return space.decode(bits[1:])


def product_space(factors: Sequence[ConvexSpace]) -> ProductSpace:
    return ProductSpace(factors)


def space_from_spec(spec: dict, base_dir: str = ".") -> ConvexSpace:
    """Build a space from a JSON-style description."""
    kind = spec.get("kind")
    if kind == "grid-interval-1D":
        return Grid1D(int(spec["size"]))
    if kind == "grid-box-d":
        return GridBox([int(s) for s in spec["sizes"]])
    if kind == "euclidean-rational-d":
        return EuclideanRational(int(spec["d"]))
    if kind == "finite-explicit":
        if "file" in spec:
            import os
            return FiniteExplicit.load(os.path.join(base_dir, spec["file"]))
        return FiniteExplicit.from_json(spec)
    if kind == "product":
        return ProductSpace([space_from_spec(f, base_dir) for f in spec["factors"]])
    raise InputError(f"unknown space kind {kind!r}")


def parse_value(space: ConvexSpace, raw):
    """Turn a JSON value into a space element (rationals come as 'p/q' strings)."""
    if isinstance(space, Grid1D):
        return int(raw)
    if isinstance(space, GridBox):
        return tuple(int(x) for x in raw)
    if isinstance(space, EuclideanRational):
        return tuple(_frac(x) for x in raw)
    if isinstance(space, FiniteExplicit):
        return str(raw)
    if isinstance(space, ProductSpace):
        return tuple(parse_value(f, x) for f, x in zip(space.factors, raw))
    raise InputError(f"cannot parse values for {space!r}")


def format_value(space: ConvexSpace, v):
    if isinstance(space, EuclideanRational):
        return [str(x) for x in v]
    if isinstance(space, ProductSpace):
        return [format_value(f, x) for f, x in zip(space.factors, v)]
    if isinstance(v, tuple):
        return list(v)
    return v
