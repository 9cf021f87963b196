"""Oracle-backed verification suites shared by the CLI and the acceptance tests."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, combinations_with_replacement, product
from typing import Iterable, Optional

import numpy as np

from . import oracles
from .ba import BAInstance, ba_run, binary_phase_king
from .convexity import EuclideanRational, GridBox, Grid1D
from .erasure import (
    KAPPA,
    RSConfig,
    ShareBundle,
    bundle_cap_bits,
    bundle_valid,
    make_bundles,
    mt_build,
    mt_verify,
    path_length,
    rs_decode,
    rs_encode,
)
from .extractor import (
    Assignment,
    assign_parties_to_committees_unknownL,
    assign_parties_to_supernodes,
    assign_supernodes_to_committees,
    greedy_bad_set,
    sampled_max_heavy,
    spectral_bound,
)
from .simnet import ADVERSARIES, Network, account, drive, make_adversary
from .supersend import GroupChannel, supersend, supersend_cap, supersend_rounds


@dataclass
class SuiteResult:
    name: str
    checked: int = 0
    failures: list = field(default_factory=list)
    detail: dict = field(default_factory=dict)
    seconds: float = 0.0

    @property
    def ok(self) -> bool:
        return not self.failures

    def fail(self, msg: str) -> None:
        if len(self.failures) < 50:
            self.failures.append(msg)
        else:
            self.detail["suppressed"] = self.detail.get("suppressed", 0) + 1

    def line(self) -> str:
        status = "PASS" if self.ok else "FAIL"
        return f"{status} {self.name}: {self.checked} checks, {len(self.failures)} failures, {self.seconds:.1f}s"


def _timed(fn):
    def wrapper(*args, **kwargs):
        t0 = time.perf_counter()
        res = fn(*args, **kwargs)
        res.seconds = time.perf_counter() - t0
        return res
    wrapper.__name__ = fn.__name__
    wrapper.__doc__ = fn.__doc__
    return wrapper


# -- safe areas -------------------------------------------------------------------

class _SubsetIntersections:
    """Intersection of hull masks over all s-sub-multisets, by recursion on removals.

    Every s-subset of a larger multiset misses at least one element, so the
    intersection over s-subsets of M is the intersection, over distinct q in M,
    of the same quantity for M minus one copy of q.
    """

    def __init__(self, hull_mask):
        self.hull_mask = hull_mask
        self.memo: dict = {}

    def __call__(self, M: tuple, s: int) -> int:
        if s <= 0:
            return 0
        if s == len(M):
            return self.hull_mask(M)
        key = (M, s)
        hit = self.memo.get(key)
        if hit is None:
            hit = -1
            for q in sorted(set(M)):
                i = M.index(q)
                hit &= self(M[:i] + M[i + 1:], s)
                if hit == 0:
                    break
            self.memo[key] = hit
        return hit


def _check_space(res: SuiteResult, space, elements: list, max_m: int, tag: str,
                 containment_m: int = 5) -> None:
    # Bit i of a mask is the i-th element in canonical order, so the
    # canonical minimum of a set is its lowest set bit.
    ranked = sorted(elements, key=lambda v: (len(space.encode(v)), space.encode(v)))
    pos = {v: i for i, v in enumerate(ranked)}
    hull_cache: dict = {}

    def hull_mask(M):
        key = tuple(sorted(set(M)))
        hit = hull_cache.get(key)
        if hit is None:
            hit = 0
            for v in oracles.hull_set(space, key):
                hit |= 1 << pos[v]
            hull_cache[key] = hit
        return hit

    inter = _SubsetIntersections(hull_mask)
    omega = space.helly
    for m in range(1, max_m + 1):
        for M in combinations_with_replacement(elements, m):
            for k in range(m + 1):
                area = space.safe_area(list(M), k)
                mask = inter(M, m - k)
                got = 0
                for v in ranked:
                    if area.contains(v):
                        got |= 1 << pos[v]
                res.checked += 1
                if got != mask:
                    res.fail(f"{tag} M={M} k={k}: membership differs from oracle")
                    continue
                if mask and area.witness != ranked[(mask & -mask).bit_length() - 1]:
                    res.fail(f"{tag} M={M} k={k}: witness {area.witness} is not canonical")
                if not mask and not area.empty:
                    res.fail(f"{tag} M={M} k={k}: empty oracle area reported nonempty")
                if omega * k < m and not mask:
                    res.fail(f"{tag} M={M} k={k}: empty although k < |M|/omega")
                if m > containment_m:
                    continue
                # Removing any k entries leaves a multiset whose hull covers the area.
                for drop in set(combinations(range(m), k)):
                    H = tuple(M[i] for i in range(m) if i not in drop)
                    if H and mask & ~hull_mask(H):
                        res.fail(f"{tag} M={M} k={k}: area leaves hull of {H}")
                        break


def _check_bot_variant(res: SuiteResult, space, elements: list, max_n: int, tag: str) -> None:
    omega = space.helly
    for n in range(1, max_n + 1):
        for t in range(0, n):
            if t * (omega + 1) >= n:
                break
            for m in range(max(1, n - 2 * t), n + 1):
                for M in combinations_with_replacement(elements, m):
                    k = m - (n - 2 * t)
                    res.checked += 1
                    if space.safe_area(list(M), min(k, t)).empty:
                        res.fail(f"{tag} n={n} t={t} M={M}: min(k,t) area empty")


@_timed
def verify_safe_area(max_size: int = 8, box=(4, 4), max_m: int = 7, bot_n: int = 7) -> SuiteResult:
    """Exact agreement with the subset-intersection oracle on small grids."""
    res = SuiteResult("safe-area")
    g = Grid1D(max_size)
    _check_space(res, g, g.elements(), max_m, f"grid{max_size}")
    b = GridBox(list(box))
    _check_space(res, b, b.elements(), max_m, f"box{box}")
    _check_bot_variant(res, Grid1D(min(max_size, 4)), list(range(min(max_size, 4))), bot_n, "grid-bot")
    return res


# -- extractors ---------------------------------------------------------------------

def _raw_check(res: SuiteResult, a: Assignment, samples: int, seed: int) -> None:
    g = a.graph
    n, nr, D = g.n_left, g.n_right, g.degree
    size = math.ceil(a.alpha * n)
    if size < 1:
        return
    rng = np.random.Generator(np.random.Philox(key=[seed, (n << 32) | nr]))
    A = g.matrix().astype(float)
    T = rng.random((samples, nr)) < rng.random((samples, 1))
    u = T.sum(axis=1) / nr
    eps = float(a.eps_internal)
    worst = 0.0
    for S in combinations(range(n), size):
        p = A[list(S)].sum(axis=0) / (D * size)
        gap = np.abs(T @ p - u)
        worst = max(worst, float(gap.max()))
        res.checked += samples
        if worst > eps + 1e-12:
            res.fail(f"raw extractor gap {worst:.4f} > {eps:.4f} at n={n} S={S}")
            return
    res.detail.setdefault("raw_worst", {})[f"{n}x{nr}/{a.alpha}"] = worst


@_timed
def verify_extractor(assignments: Iterable[Assignment], raw_max_n: int = 14, samples: int = 10_000) -> SuiteResult:
    """Spectral certificate of each graph plus the raw edge-distribution check on small graphs."""
    res = SuiteResult("extractor")
    seen = set()
    for a in assignments:
        key = (a.n, a.m, a.alpha, a.beta, a.mu)
        if key in seen:
            continue
        seen.add(key)
        g = a.graph
        bound = spectral_bound(a.alpha, a.eps_internal)
        dense = oracles.dense_lambda(g.adjacency, g.n_right)
        res.checked += 1
        if abs(dense - g.lam) > 1e-7:
            res.fail(f"closed-form lambda {g.lam} differs from dense {dense} at n={a.n}")
        if dense > bound + 1e-9:
            res.fail(f"lambda {dense:.4f} exceeds {bound:.4f} at n={a.n} m={a.m}")
        degs = g.right_degrees()
        if degs.min() != degs.max():
            res.fail(f"graph at n={a.n} is not right-regular")
        lo, hi = a.size_band()
        if min(a.group_sizes) < lo or max(a.group_sizes) > hi:
            res.fail(f"group sizes outside [{lo}, {hi}] at n={a.n} m={a.m}")
        if a.n <= raw_max_n:
            _raw_check(res, a, samples, seed=len(seen))
    res.detail["graphs"] = len(seen)
    return res


def standard_assignments(n: int, omega: int = 2, eps=Fraction(1), sigma: int = 2) -> list[Assignment]:
    return [assign_supernodes_to_committees(n, sigma, omega, eps),
            assign_parties_to_supernodes(n, n // sigma, omega, eps),
            assign_parties_to_committees_unknownL(n, omega, eps)]


@_timed
def verify_committees(ns=(32, 48), samples: int = 100_000, omega: int = 2, eps=Fraction(1)) -> SuiteResult:
    """Adversarial bad-set search never makes a mu fraction of groups heavy."""
    res = SuiteResult("committees")
    for n in ns:
        for a in standard_assignments(n, omega, eps):
            size = math.floor(a.alpha * n)
            limit = a.mu * a.m
            sampled = sampled_max_heavy(a, size, samples, seed=n)
            greedy = len(a.heavy_groups(greedy_bad_set(a, size)))
            res.checked += samples + 1
            res.detail[f"n={n} m={a.m} alpha={a.alpha} beta={a.beta}"] = {"sampled": sampled, "greedy": greedy,
                                                             "limit": float(limit)}
            for name, q in (("sampled", sampled), ("greedy", greedy)):
                if q >= limit:
                    res.fail(f"{name} search found {q} heavy groups >= {float(limit):.2f} at n={n} m={a.m}")
    return res


# -- erasure -------------------------------------------------------------------------

def _random_bits(rng, length: int) -> str:
    return "".join("01"[b] for b in rng.integers(0, 2, length))


@_timed
def verify_erasure(trials: int = 1000, tamper: int = 1000, max_subset_n: int = 9, seed: int = 0) -> SuiteResult:
    """Round trips, exhaustive threshold subsets, Merkle tampering and share sizes."""
    res = SuiteResult("erasure")
    rng = np.random.Generator(np.random.Philox(key=[seed, 4]))
    for i in range(trials):
        nb = int(rng.integers(1, 17))
        m = _random_bits(rng, int(rng.integers(1, 2000)))
        cfg = RSConfig(nb)
        shares = rs_encode(m, cfg)
        if nb <= max_subset_n:
            subsets = combinations(range(nb), cfg.threshold)
        else:
            subsets = [tuple(sorted(rng.choice(nb, cfg.threshold, replace=False)))]
        for sub in subsets:
            res.checked += 1
            if rs_decode({j + 1: shares[j] for j in sub}, cfg, len(m)) != m:
                res.fail(f"trial {i}: decode failed for nb={nb} subset={sub}")
        if i % 50 == 0:
            # Shares are evaluations of one polynomial: an oracle interpolation agrees.
            k = cfg.threshold
            sym = [[int.from_bytes(s[2 * c:2 * c + 2], "big") for s in shares] for c in range(len(shares[0]) // 2)]
            pts = list(range(1, k + 1))
            for col in sym[:2]:
                for x in range(k + 1, nb + 1):
                    res.checked += 1
                    if oracles.lagrange_at([(p, col[p - 1]) for p in pts], x) != col[x - 1]:
                        res.fail(f"trial {i}: share {x} is off the interpolating polynomial")
    for i in range(tamper):
        nb = int(rng.integers(2, 17))
        m = _random_bits(rng, int(rng.integers(1, 500)))
        bundles = make_bundles(m, nb)
        res.checked += 1
        if oracles.merkle_root_slow([b.share for b in bundles]) != bundles[0].root:
            res.fail(f"tamper {i}: Merkle root differs from the recursive oracle")
        b = bundles[int(rng.integers(0, nb))]
        where = int(rng.integers(0, 4))
        if where == 0:
            j = int(rng.integers(0, len(b.share)))
            share = b.share[:j] + bytes([b.share[j] ^ (1 << int(rng.integers(0, 8)))]) + b.share[j + 1:]
            bad = ShareBundle(b.root, b.index, share, b.witness)
        elif where == 1 and b.witness:
            j = int(rng.integers(0, len(b.witness)))
            w = list(b.witness)
            w[j] = bytes([w[j][0] ^ 1]) + w[j][1:]
            bad = ShareBundle(b.root, b.index, b.share, tuple(w))
        elif where == 2:
            bad = ShareBundle(b.root, b.index % nb + 1, b.share, b.witness)
        else:
            root = bytes([b.root[0] ^ 0x80]) + b.root[1:]
            bad = ShareBundle(root, b.index, b.share, b.witness)
        if bad == bundles[bad.index - 1]:
            # Equal shares at two positions: the "tampered" bundle is genuine.
            continue
        res.checked += 1
        if bundle_valid(bad, nb, len(m) + 64) or mt_verify(bad.root, bad.index - 1, bad.share, bad.witness, nb):
            res.fail(f"tamper {i}: modified bundle accepted (kind {where})")
    sizes = {}
    for L in (2 ** 10, 2 ** 16):
        for nb in (4, 8, 16, 32, 64):
            cap = bundle_cap_bits(L, nb)
            share_bits = 16 * RSConfig(nb).columns(L)
            limit = 2 * L / nb + 64 + KAPPA * (path_length(nb) + 2)
            real = make_bundles("1" * L, nb)[0].bits
            res.checked += 1
            sizes[f"L={L} nB={nb}"] = {"share_bits": share_bits, "bundle_bits": real, "cap": cap}
            if real > cap or cap > limit or share_bits > 2 * L / nb + 64:
                res.fail(f"bundle size {real}/{cap} exceeds {limit:.0f} at L={L} nB={nb}")
    res.detail["sizes"] = sizes
    return res


# -- Byzantine agreement ---------------------------------------------------------------

def _corrupt_set(rng, size: int, count: int) -> list[int]:
    return sorted(int(x) for x in rng.choice(size, count, replace=False)) if count else []


@_timed
def verify_ba(sizes=(4, 7, 10), seeds: int = 200, adversaries: Optional[Iterable[str]] = None) -> SuiteResult:
    """Agreement and validity within resilience; round and bit caps beyond it."""
    res = SuiteResult("ba")
    names = list(adversaries or ADVERSARIES)
    stats = {"within": 0, "extra": 0, "extra_disagree": 0}
    for size in sizes:
        roster = tuple(range(size))
        t = (size - 1) // 3
        for name in names:
            for seed in range(seeds):
                rng = np.random.Generator(np.random.Philox(key=[seed, (size << 32) | 11]))
                extra = seed % 2 == 1
                count = int(rng.integers(math.ceil(size / 3), size // 2 + 2)) if extra else t
                count = min(count, size - 1)
                corrupt = [] if name == "adaptive-largest-supernode" else _corrupt_set(rng, size, count)
                multivalued = seed % 4 < 2
                inst = BAInstance(roster, 8, multivalued=multivalued)
                net = Network(size, seed=seed, adversary=make_adversary(name, corrupt), budget=count)
                if multivalued:
                    pool = ["1011", "0001", "11111111"]
                    unanimous = seed % 3 == 0
                    ins = {p: pool[0] if unanimous else pool[int(rng.integers(0, 3))] for p in roster}
                    out = drive(net, ba_run(net, "ba", inst, ins, default="0"), inst.rounds)
                else:
                    unanimous = seed % 3 == 0
                    ins = {p: 1 if unanimous else int(rng.integers(0, 2)) for p in roster}
                    out = drive(net, binary_phase_king(net, "ba", inst, ins), inst.rounds)
                honest = net.honest_parties()
                res.checked += 1
                bits, rounds = account(net.transcript(), "ba")
                if net.round != inst.rounds:
                    res.fail(f"size={size} {name} seed={seed}: {net.round} rounds, cap {inst.rounds}")
                if bits > inst.cap_bits():
                    res.fail(f"size={size} {name} seed={seed}: {bits} bits over cap {inst.cap_bits()}")
                if any(p not in out for p in honest):
                    res.fail(f"size={size} {name} seed={seed}: an honest member produced no output")
                    continue
                within = len(net.corrupt) * 3 < size
                if within:
                    stats["within"] += 1
                    if not oracles.agreement_holds(out, honest):
                        res.fail(f"size={size} {name} seed={seed}: honest members disagree")
                    hin = {ins[p] for p in honest}
                    if len(hin) == 1 and out[honest[0]] != next(iter(hin)):
                        res.fail(f"size={size} {name} seed={seed}: unanimous input not returned")
                else:
                    stats["extra"] += 1
                    stats["extra_disagree"] += not oracles.agreement_holds(out, honest)
    res.detail.update(stats)
    return res


# -- supersend -----------------------------------------------------------------------

SUPERSEND_CASES = (
    # (senders, receivers, byzantine members), parties numbered senders first.
    (1, 4, ()),
    (3, 4, (0,)),
    (5, 7, (5,)),
    (5, 7, (0, 1, 5)),
    (4, 7, (0, 1, 2)),
    (7, 7, (0, 1)),
    (2, 10, (0, 1, 2, 3)),
)


@_timed
def verify_supersend(seeds: int = 500, L: int = 256) -> SuiteResult:
    """Delivery from honest-majority senders, {m', bot} agreement otherwise, bit caps always."""
    res = SuiteResult("supersend")
    names = list(ADVERSARIES)
    counts = {"deliver": 0, "agree": 0}
    for seed in range(seeds):
        na, nb, bad = SUPERSEND_CASES[seed % len(SUPERSEND_CASES)]
        name = names[(seed // len(SUPERSEND_CASES)) % len(names)]
        rng = np.random.Generator(np.random.Philox(key=[seed, 6]))
        n = na + nb
        A = tuple(range(na))
        B = tuple(range(na, n))
        corrupt = list(bad)
        adv = make_adversary(name, [] if name == "adaptive-largest-supernode" else corrupt)
        net = Network(n, seed=seed, adversary=adv, budget=len(corrupt))
        m = _random_bits(rng, int(rng.integers(1, L + 1)))
        other = _random_bits(rng, int(rng.integers(1, L + 1)))
        net.context["extreme_values"] = [other, m]
        ch = GroupChannel(A, B, L)
        out = drive(net, supersend(net, "ss", ch, {a: m for a in A}), supersend_rounds(nb))
        res.checked += 1
        bits, _ = account(net.transcript(), "ss")
        if bits > supersend_cap(na, nb, L):
            res.fail(f"seed={seed}: {bits} bits over cap {supersend_cap(na, nb, L)}")
        bad_a = sum(1 for a in A if not net.is_honest(a))
        bad_b = sum(1 for b in B if not net.is_honest(b))
        if bad_b * 3 >= nb:
            continue
        honest_b = [b for b in B if net.is_honest(b)]
        if 2 * bad_a < na:
            counts["deliver"] += 1
            if any(out.get(b) != m for b in honest_b):
                res.fail(f"seed={seed} {name} case={na, nb, bad}: honest-majority message not delivered")
        else:
            counts["agree"] += 1
            vals = {out.get(b) for b in honest_b} - {None}
            if len(vals) > 1:
                res.fail(f"seed={seed} {name} case={na, nb, bad}: receivers output {len(vals)} messages")
    res.detail.update(counts)
    return res


# -- dilated encodings ------------------------------------------------------------------

@_timed
def verify_dilation(instances: int = 500, seed: int = 0) -> SuiteResult:
    """Planar safe-area witnesses fit in (d(d+1))L bits and decode back exactly."""
    res = SuiteResult("dilation")
    sp = EuclideanRational(2)
    rng = np.random.Generator(np.random.Philox(key=[seed, 10]))
    worst = 0.0
    for i in range(instances):
        m = int(rng.integers(1, 8))
        span = int(rng.integers(2, 200))
        M = [(Fraction(int(rng.integers(-span, span + 1)), int(rng.integers(1, 9))),
              Fraction(int(rng.integers(-span, span + 1)), int(rng.integers(1, 9)))) for _ in range(m)]
        k = int(rng.integers(0, (m - 1) // 3 + 1))
        area = sp.safe_area(M, k)
        res.checked += 1
        if area.empty:
            res.fail(f"instance {i}: empty area with k={k} < |M|/3")
            continue
        L = max(len(sp.encode(p)) for p in M)
        bits = sp.wire_encode(area.witness, area)
        worst = max(worst, len(bits) / L)
        if len(bits) > sp.dilation * L:
            res.fail(f"instance {i}: witness needs {len(bits)} bits > {sp.dilation}*{L}")
        if sp.wire_decode(bits) != area.witness:
            res.fail(f"instance {i}: witness does not round-trip")
        if not oracles.plane_safe_contains(M, k, area.witness):
            res.fail(f"instance {i}: witness outside the oracle safe area")
    res.detail["worst_ratio"] = worst
    return res


SUITES = {
    "safe-area": verify_safe_area,
    "extractor": verify_extractor,
    "erasure": verify_erasure,
    "ba": verify_ba,
    "supersend": verify_supersend,
}
