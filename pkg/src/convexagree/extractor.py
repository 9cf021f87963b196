"""Certified extractor graphs and the committee assignments built on them.

Candidate graphs are unions of relabeled cyclic shifts: with a seeded
permutation ``pi`` of ``0..n-1`` and seeded shifts ``s_j``, vertex ``v`` is joined
to ``pi(pi^-1(v) + s_j)`` and ``pi(pi^-1(v) - s_j)``.  The result is a relabeled
circulant, so its spectrum has a closed form and the minimal passing degree is
found without building any matrix.  Once all ``n`` shifts are in use the graph
is twice the complete graph with loops, whose normalized second eigenvalue is
zero; certification therefore always succeeds with ``D <= 2n``.
"""

from __future__ import annotations

import hashlib
import math
import struct
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Optional, Sequence

import numpy as np

SEED = 0x5EED_C0DE
_TOL = 1e-9


class ConstructionError(ValueError):
    """Raised when no candidate graph passes certification."""


def _rng(n: int, salt: int = 0) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=[SEED + salt, n]))


@lru_cache(maxsize=None)
def _layout(n: int) -> tuple[np.ndarray, np.ndarray]:
    rng = _rng(n)
    pi = rng.permutation(n)
    shifts = rng.permutation(n)
    return pi, shifts


@lru_cache(maxsize=None)
def _spectrum_prefix(n: int) -> np.ndarray:
    """Row j holds the nontrivial adjacency eigenvalues using the first j+1 shifts."""
    _, shifts = _layout(n)
    r = np.arange(1, n)
    contrib = 2.0 * np.cos(2.0 * np.pi * np.outer(shifts, r) / n)
    return np.cumsum(contrib, axis=0)


def spectral_bound(alpha: Fraction, eps: Fraction) -> float:
    return float(eps) * math.sqrt(2.0 * float(alpha))


@dataclass(frozen=True)
class ExtractorGraph:
    n_left: int
    n_right: int
    degree: int
    adjacency: np.ndarray = field(repr=False)  # (n_left, degree) right endpoints
    lam: float = 0.0

    def right_degrees(self) -> np.ndarray:
        return np.bincount(self.adjacency.reshape(-1), minlength=self.n_right)

    def matrix(self) -> np.ndarray:
        A = np.zeros((self.n_left, self.n_right), dtype=np.int64)
        np.add.at(A, (np.repeat(np.arange(self.n_left), self.degree), self.adjacency.reshape(-1)), 1)
        return A

    def edges_between(self, S: Iterable[int], T: Iterable[int]) -> int:
        tmask = np.zeros(self.n_right, dtype=bool)
        tmask[list(T)] = True
        rows = self.adjacency[list(S)]
        return int(tmask[rows].sum())


def circulant_graph(n: int, degree: int) -> ExtractorGraph:
    if degree % 2 or not 2 <= degree <= 2 * n:
        raise ConstructionError(f"degree {degree} must be even and in 2..{2 * n}")
    pi, shifts = _layout(n)
    inv = np.argsort(pi)
    pos = inv[np.arange(n)]
    cols = []
    for s in shifts[:degree // 2]:
        cols.append(pi[(pos + s) % n])
        cols.append(pi[(pos - s) % n])
    adj = np.stack(cols, axis=1)
    lam = float(np.max(np.abs(_spectrum_prefix(n)[degree // 2 - 1]))) / degree if n > 1 else 0.0
    return ExtractorGraph(n, n, degree, adj, lam)


def minimal_degree(n: int, alpha: Fraction, eps: Fraction) -> int:
    if n == 1:
        return 2
    bound = spectral_bound(alpha, eps)
    prefix = _spectrum_prefix(n)
    degrees = 2 * np.arange(1, n + 1)
    lam = np.max(np.abs(prefix), axis=1) / degrees
    ok = np.nonzero(lam <= bound + _TOL)[0]
    if len(ok) == 0:
        raise ConstructionError(f"no candidate degree certifies n={n}")
    return int(degrees[ok[0]])


def build_extractor(n: int, k: int, eps, alpha=None) -> ExtractorGraph:
    """Certified ``(k, eps)`` extractor on ``n + n`` vertices.

    ``alpha`` defaults to ``k / n``; the certificate is ``lam <= eps * sqrt(2 alpha)``.
    """
    eps = Fraction(eps)
    if n < 1 or eps <= 0:
        raise ConstructionError("need n >= 1 and eps > 0")
    alpha = Fraction(alpha) if alpha is not None else Fraction(max(k, 1), n)
    if k < max(math.floor(alpha * n), 1):
        raise ConstructionError("k is below max(floor(alpha n), 1)")
    return circulant_graph(n, minimal_degree(n, alpha, eps))


def spectral_lambda(g: ExtractorGraph) -> float:
    """Normalized second eigenvalue computed directly from the adjacency matrix."""
    A = g.matrix().astype(float)
    ev = np.sort(np.abs(np.linalg.eigvalsh((A + A.T) / 2.0)))[::-1]
    return float(ev[1]) / g.degree if len(ev) > 1 else 0.0


def extractor_gap(g: ExtractorGraph, S: Sequence[int], T: Sequence[int]) -> float:
    return abs(g.edges_between(S, T) / (g.degree * len(S)) - len(T) / g.n_right)


# -- committee assignments -------------------------------------------------------

@dataclass(frozen=True)
class Assignment:
    n: int
    m: int
    degree: int
    alpha: Fraction
    beta: Fraction
    mu: Fraction
    eps_internal: Fraction
    graph: ExtractorGraph = field(repr=False)
    groups: tuple = field(repr=False)  # per group: tuple of members with multiplicity
    incidence: tuple = field(repr=False)  # per member: tuple of groups with multiplicity

    @property
    def group_sizes(self) -> list[int]:
        return [len(g) for g in self.groups]

    def members(self, g: int) -> list[int]:
        return sorted(set(self.groups[g]))

    def group_sets(self) -> list[list[int]]:
        return [self.members(g) for g in range(self.m)]

    def size_band(self) -> tuple[int, int]:
        """Declared bounds on group sizes counted with multiplicity."""
        return self.degree * (self.n // self.m), math.floor(2 * self.degree * self.n / self.m)

    def heavy_groups(self, S: Iterable[int], beta: Optional[Fraction] = None) -> list[int]:
        """Groups with more than a ``beta`` fraction of their edges coming from ``S``."""
        beta = self.beta if beta is None else Fraction(beta)
        mask = np.zeros(self.n, dtype=bool)
        mask[list(S)] = True
        out = []
        for gi, g in enumerate(self.groups):
            bad = int(mask[list(g)].sum())
            if bad * beta.denominator > beta.numerator * len(g):
                out.append(gi)
        return out

    def bad_count_vector(self, mask: np.ndarray) -> np.ndarray:
        return np.array([int(mask[list(g)].sum()) for g in self.groups])


def _group_of_right(n: int, m: int) -> np.ndarray:
    s, r = divmod(n, m)
    sizes = [s + 1 if i < r else s for i in range(m)]
    return np.repeat(np.arange(m), sizes)


@lru_cache(maxsize=None)
def committee_graph(n: int, m: int, alpha, beta, mu) -> Assignment:
    alpha, beta, mu = Fraction(alpha), Fraction(beta), Fraction(mu)
    if not (0 < alpha < beta < 1) or mu <= 0 or not 1 <= m <= n:
        raise ValueError(f"bad committee parameters n={n} m={m} alpha={alpha} beta={beta} mu={mu}")
    eps = mu * (beta / alpha - 1) / 2
    g = build_extractor(n, max(math.floor(alpha * n), 1), eps, alpha)
    right_group = _group_of_right(n, m)
    groups: list[list[int]] = [[] for _ in range(m)]
    incidence = []
    for v in range(n):
        gs = tuple(int(right_group[r]) for r in g.adjacency[v])
        incidence.append(gs)
        for x in gs:
            groups[x].append(v)
    return Assignment(n, m, g.degree, alpha, beta, mu, eps, g,
                      tuple(tuple(x) for x in groups), tuple(incidence))


def supernode_committee_params(omega: int, eps) -> tuple[Fraction, Fraction, Fraction]:
    eps = Fraction(eps)
    return Fraction(1) / (omega + eps), Fraction(1, omega), 1 / (2 * (omega + eps))


def party_supernode_params(omega: int, eps) -> tuple[Fraction, Fraction, Fraction]:
    eps = Fraction(eps)
    alpha = 1 / (omega + eps)
    beta = 1 / (omega + eps / 2)
    mu = min(1 / (2 * (omega + eps)), (1 / (omega + eps / 3) - 1 / (omega + eps / 2)) / 2)
    return alpha, beta, mu


def unknown_length_params(omega: int, eps, mu=None) -> tuple[Fraction, Fraction, Fraction]:
    eps = Fraction(eps)
    if mu is None:
        mu = 1 / (omega + eps) - 1 / (omega + 1 + eps)
    return 1 / (omega + 1 + eps), Fraction(1, omega + 1), Fraction(mu) / 2


def assign_supernodes_to_committees(N: int, sigma: int, omega: int, eps) -> Assignment:
    if not N >= sigma >= 2:
        raise ValueError("need N >= sigma >= 2")
    return committee_graph(N, N // sigma, *supernode_committee_params(omega, eps))


def assign_parties_to_supernodes(n: int, N: int, omega: int, eps) -> Assignment:
    if not 1 <= N <= n:
        raise ValueError("need 1 <= N <= n")
    return committee_graph(n, N, *party_supernode_params(omega, eps))


def assign_parties_to_committees_unknownL(n: int, omega: int, eps, mu=None) -> Assignment:
    return committee_graph(n, n, *unknown_length_params(omega, eps, mu))


# -- adversarial search -----------------------------------------------------------

def greedy_bad_set(a: Assignment, size: int) -> list[int]:
    """Grow ``S`` one member at a time, each time maximizing the heavy-group count."""
    S: list[int] = []
    mask = np.zeros(a.n, dtype=bool)
    sizes = np.array(a.group_sizes)
    inc = [np.array(x) for x in a.incidence]
    counts = np.zeros(a.m, dtype=np.int64)
    thr = sizes * a.beta
    for _ in range(size):
        best, best_score = None, None
        for v in range(a.n):
            if mask[v]:
                continue
            c = counts.copy()
            np.add.at(c, inc[v], 1)
            heavy = int(np.sum(c > np.array([float(x) for x in thr])))
            # Tie-break on how close groups come to the threshold.
            score = (heavy, float(np.sum(c / sizes)))
            if best_score is None or score > best_score:
                best, best_score = v, score
        mask[best] = True
        np.add.at(counts, inc[best], 1)
        S.append(best)
    return S


def sampled_max_heavy(a: Assignment, size: int, samples: int, seed: int = 0) -> int:
    """Largest heavy-group count over ``samples`` uniformly random bad sets of ``size``."""
    if size == 0:
        return 0
    rng = np.random.Generator(np.random.Philox(key=[seed, (a.n << 32) | size]))
    M = np.zeros((a.n, a.m), dtype=np.int64)
    for v, gs in enumerate(a.incidence):
        for g in gs:
            M[v, g] += 1
    sizes = np.array(a.group_sizes)
    best = 0
    chunk = 4096
    done = 0
    while done < samples:
        b = min(chunk, samples - done)
        keys = rng.random((b, a.n))
        idx = np.argpartition(keys, size - 1, axis=1)[:, :size]
        ind = np.zeros((b, a.n), dtype=np.int64)
        np.put_along_axis(ind, idx, 1, axis=1)
        counts = ind @ M
        heavy = (counts * a.beta.denominator > a.beta.numerator * sizes).sum(axis=1)
        best = max(best, int(heavy.max()))
        done += b
    return best


# -- cache file ---------------------------------------------------------------------

_MAGIC = b"CAXG"


def _frac_pack(x: Fraction) -> bytes:
    return struct.pack(">QQ", x.numerator, x.denominator)


def save_assignment(path, a: Assignment) -> None:
    head = _MAGIC + struct.pack(">III", a.n, a.m, a.degree)
    head += _frac_pack(a.alpha) + _frac_pack(a.beta) + _frac_pack(a.mu) + struct.pack(">Q", SEED)
    with open(path, "wb") as fh:
        fh.write(head)
        fh.write(a.graph.adjacency.astype(">u4").tobytes())


def load_assignment(path, n: int, m: int, alpha, beta, mu) -> Assignment:
    """Read a cached graph, rejecting it if the parameters or adjacency differ."""
    with open(path, "rb") as fh:
        raw = fh.read()
    if raw[:4] != _MAGIC:
        raise ValueError("not a graph cache file")
    cn, cm, D = struct.unpack(">III", raw[4:16])
    vals = struct.unpack(">QQQQQQQ", raw[16:72])
    params = (Fraction(vals[0], vals[1]), Fraction(vals[2], vals[3]), Fraction(vals[4], vals[5]))
    want = (Fraction(alpha), Fraction(beta), Fraction(mu))
    if (cn, cm) != (n, m) or params != want or vals[6] != SEED:
        raise ValueError("cache parameters differ")
    adj = np.frombuffer(raw[72:], dtype=">u4").astype(np.int64).reshape(cn, D)
    a = committee_graph(n, m, *want)
    if not np.array_equal(a.graph.adjacency, adj):
        raise ValueError("cached adjacency does not match the certified construction")
    return a


def digest(a: Assignment) -> str:
    return hashlib.sha256(a.graph.adjacency.astype(">u4").tobytes()).hexdigest()[:16]
