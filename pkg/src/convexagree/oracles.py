"""Slow reference implementations used to cross-check the fast code paths.

Nothing here shares logic with the production modules: hulls are rebuilt
from first principles, field arithmetic is carry-less multiplication and
Merkle roots are recomputed recursively.
"""

from __future__ import annotations

import hashlib
import math
from fractions import Fraction
from itertools import combinations, product
from typing import Iterable, Optional, Sequence

import numpy as np

from .convexity import ConvexSpace, EuclideanRational, FiniteExplicit, GridBox, Grid1D, ProductSpace


# -- convexity ------------------------------------------------------------------

def hull_set(space: ConvexSpace, gens: Sequence) -> frozenset:
    """All elements of the hull of ``gens`` in an enumerable space."""
    gens = list(gens)
    if not gens:
        return frozenset()
    if isinstance(space, Grid1D):
        return frozenset(range(min(gens), max(gens) + 1))
    if isinstance(space, GridBox):
        ranges = [range(min(g[i] for g in gens), max(g[i] for g in gens) + 1) for i in range(len(space.sizes))]
        return frozenset(product(*ranges))
    if isinstance(space, ProductSpace):
        parts = [hull_set(f, [g[i] for g in gens]) for i, f in enumerate(space.factors)]
        return frozenset(product(*parts))
    if isinstance(space, FiniteExplicit):
        # Smallest member of the convex family containing every generator.
        idx = {space.index[g] for g in gens}
        best = None
        for c in space.family:
            if idx <= c and (best is None or len(c) < len(best)):
                best = c
        return frozenset(space.labels[i] for i in best)
    raise TypeError(f"no hull oracle for {space!r}")


def safe_set(space: ConvexSpace, M: Sequence, k: int) -> frozenset:
    """Intersection of the hulls of every (|M|-k)-subset, by enumeration."""
    M = list(M)
    size = len(M) - k
    if size <= 0:
        return frozenset()
    out = None
    for sub in combinations(range(len(M)), size):
        h = hull_set(space, [M[i] for i in sub])
        out = h if out is None else out & h
        if not out:
            break
    return out


def canonical_min(space: ConvexSpace, elements: Iterable):
    elements = list(elements)
    if not elements:
        return None
    return min(elements, key=lambda v: (len(space.encode(v)), space.encode(v)))


def in_triangle(p, a, b, c) -> bool:
    """Exact closed-triangle membership (degenerate triangles included)."""

    def cross(o, u, v):
        return (u[0] - o[0]) * (v[1] - o[1]) - (u[1] - o[1]) * (v[0] - o[0])

    d1, d2, d3 = cross(a, b, p), cross(b, c, p), cross(c, a, p)
    neg = d1 < 0 or d2 < 0 or d3 < 0
    pos = d1 > 0 or d2 > 0 or d3 > 0
    if neg and pos:
        return False
    if cross(a, b, c) == 0:
        # Collinear: p must lie on the segment spanned by the extreme pair.
        pts = sorted({a, b, c})
        lo, hi = pts[0], pts[-1]
        if cross(lo, hi, p) != 0:
            return False
        return min(lo, hi) <= p <= max(lo, hi) if lo != hi else p == lo
    return True


def plane_hull_contains(gens: Sequence, p) -> bool:
    """Point in the hull of planar points, via triangles of generators."""
    pts = sorted(set(gens))
    if len(pts) == 1:
        return pts[0] == p
    if len(pts) == 2:
        return in_triangle(p, pts[0], pts[1], pts[1])
    return any(in_triangle(p, a, b, c) for a, b, c in combinations(pts, 3))


def plane_safe_contains(M: Sequence, k: int, p) -> bool:
    M = list(M)
    size = len(M) - k
    if size <= 0:
        return False
    return all(plane_hull_contains([M[i] for i in sub], p) for sub in combinations(range(len(M)), size))


def line_safe_interval(M: Sequence, k: int):
    """Safe interval of a 1D rational multiset by subset enumeration."""
    M = list(M)
    size = len(M) - k
    if size <= 0:
        return None
    lo, hi = None, None
    for sub in combinations(range(len(M)), size):
        vals = [M[i] for i in sub]
        lo = min(vals) if lo is None else max(lo, min(vals))
        hi = max(vals) if hi is None else min(hi, max(vals))
    return (lo, hi) if lo <= hi else None


# -- extractors ------------------------------------------------------------------

def dense_lambda(adjacency: np.ndarray, n_right: int) -> float:
    """Second singular value of the normalized biadjacency matrix."""
    n, D = adjacency.shape
    A = np.zeros((n, n_right))
    for i in range(n):
        for j in adjacency[i]:
            A[i, j] += 1
    A /= math.sqrt(D * D * n / n_right)
    s = np.linalg.svd(A, compute_uv=False)
    return float(s[1]) if len(s) > 1 else 0.0


def edge_fraction_gap(adjacency: np.ndarray, n_right: int, S: Sequence[int], T: Sequence[int]) -> float:
    """|probability an edge leaving S lands in T - |T|/right size|."""
    D = adjacency.shape[1]
    Tset = set(T)
    hits = sum(1 for i in S for j in adjacency[i] if j in Tset)
    return abs(hits / (len(S) * D) - len(Tset) / n_right)


# -- GF(2^16) and Reed-Solomon -------------------------------------------------------

POLY = 0x1100B


def clmul(a: int, b: int) -> int:
    out = 0
    while b:
        if b & 1:
            out ^= a
        a <<= 1
        b >>= 1
    return out


def gf_reduce(x: int) -> int:
    while x.bit_length() > 16:
        x ^= POLY << (x.bit_length() - 17)
    return x


def gf_mul_slow(a: int, b: int) -> int:
    return gf_reduce(clmul(a, b))


def gf_inv_slow(a: int) -> int:
    # a^(2^16 - 2) by square and multiply.
    out, base, e = 1, a, (1 << 16) - 2
    while e:
        if e & 1:
            out = gf_mul_slow(out, base)
        base = gf_mul_slow(base, base)
        e >>= 1
    return out


def lagrange_at(points: Sequence[tuple[int, int]], x: int) -> int:
    """Value at ``x`` of the polynomial through ``points`` over GF(2^16)."""
    total = 0
    for i, (xi, yi) in enumerate(points):
        num, den = 1, 1
        for j, (xj, _) in enumerate(points):
            if i != j:
                num = gf_mul_slow(num, x ^ xj)
                den = gf_mul_slow(den, xi ^ xj)
        total ^= gf_mul_slow(yi, gf_mul_slow(num, gf_inv_slow(den)))
    return total


def eval_poly(coeffs: Sequence[int], x: int) -> int:
    out = 0
    for c in reversed(coeffs):
        out = gf_mul_slow(out, x) ^ c
    return out


# -- Merkle ------------------------------------------------------------------------

def merkle_root_slow(leaves: Sequence[bytes]) -> bytes:
    """Recursive root: pair left to right, promote an unpaired last node."""
    level = [hashlib.sha256(b"\x00" + x).digest() for x in leaves]
    if len(level) == 1:
        return hashlib.sha256(b"\x01" + level[0]).digest()

    def up(nodes):
        if len(nodes) == 1:
            return nodes[0]
        nxt = [hashlib.sha256(b"\x01" + nodes[i] + nodes[i + 1]).digest() if i + 1 < len(nodes) else nodes[i]
               for i in range(0, len(nodes), 2)]
        return up(nxt)

    return up(level)


# -- agreement outcomes ------------------------------------------------------------

def agreement_holds(outputs: dict, honest: Iterable) -> bool:
    vals = [outputs[p] for p in honest if p in outputs]
    return all(v == vals[0] for v in vals)


def in_hull(space: ConvexSpace, gens: Sequence, v) -> bool:
    """Hull membership without materializing large hulls."""
    gens = list(gens)
    if isinstance(space, Grid1D):
        return bool(gens) and min(gens) <= v <= max(gens)
    if isinstance(space, ProductSpace):
        return all(in_hull(f, [g[i] for g in gens], v[i]) for i, f in enumerate(space.factors))
    if isinstance(space, EuclideanRational):
        if space.d == 2:
            return plane_hull_contains(gens, v)
        return bool(gens) and min(gens) <= v <= max(gens)
    return v in hull_set(space, gens)


def convex_valid(space: ConvexSpace, outputs: dict, honest_inputs: Sequence, honest: Iterable) -> bool:
    return all(outputs.get(p) is not None and in_hull(space, honest_inputs, outputs[p]) for p in honest)


def exact_or_none(x: Optional[str], expected: str) -> bool:
    return x is None or x == expected
