"""Convex agreement protocols built from supersend, committees and safe areas."""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Optional

from .ba import BAInstance, ba_run, binary_phase_king, bitstring_size
from .convexity import ConvexSpace, EncodingError, InputError, order_key
from .extractor import (
    assign_parties_to_committees_unknownL,
    assign_parties_to_supernodes,
    assign_supernodes_to_committees,
    party_supernode_params,
)
from .simnet import Network, parallel
from .supersend import GroupChannel, supersend, supersend_rounds

KAPPA = 256
LENGTH_FIELD_BITS = 64


@dataclass
class ProtocolConfig:
    n: int
    t: int
    space: ConvexSpace
    eps: Fraction = Fraction(1)
    L: Optional[int] = None
    kappa: int = KAPPA
    sigma: Optional[int] = None

    def __post_init__(self):
        self.eps = Fraction(self.eps)

    @property
    def omega(self) -> int:
        return self.space.helly

    @property
    def delta(self) -> Fraction:
        return Fraction(self.space.dilation)

    def supernode_factor(self) -> int:
        if self.sigma is not None:
            return self.sigma
        if self.delta == 1:
            return 2
        ll = math.log2(math.log2(self.n)) if self.n > 2 else 0
        return max(2, math.floor(ll))

    def grow(self, L: int) -> int:
        return math.ceil(self.delta * L)

    def within_fixed_bound(self) -> bool:
        return self.t * max(3, self.omega + self.eps) < self.n

    def within_unknown_bound(self) -> bool:
        return self.t * (self.omega + 1 + self.eps) < self.n


@dataclass
class Supernode:
    id: int
    members: tuple
    values: dict = field(default_factory=dict)  # party -> wire bitstring or None
    classification: str = ""


def to_wire(space: ConvexSpace, v, area=None) -> str:
    return space.wire_encode(v, area)


def from_wire(space: ConvexSpace, bits: Optional[str]):
    if bits is None:
        return None
    try:
        return space.wire_decode(bits)
    except (EncodingError, InputError, ValueError):
        return None


def _union(groups) -> tuple:
    out: set = set()
    for g in groups:
        out.update(g)
    return tuple(sorted(out))


def _decide(space: ConvexSpace, values: list, k: int, memo: dict) -> Optional[str]:
    """Canonical safe-area witness of ``values``, wire-encoded, or None."""
    if k < 0:
        return None
    key = (tuple(sorted(space.encode(v) for v in values)), k)
    if key in memo:
        return memo[key]
    area = space.safe_area(values, k)
    out = None if area.empty else to_wire(space, area.witness, area)
    memo[key] = out
    return out


# -- fixed-length protocols ----------------------------------------------------------

def supernodes_ca(net: Network, tag: str, supernodes: list, L: int, cfg: ProtocolConfig):
    """Every supernode supersends its value to all; each party picks from the safe area."""
    net.register(tag)
    N = len(supernodes)
    t_N = math.ceil(Fraction(N, cfg.omega)) - 1
    B = _union(s.members for s in supernodes)
    gens = [supersend(net, f"{tag}/s{j}", GroupChannel(s.members, B, L), s.values)
            for j, s in enumerate(supernodes)]
    outs = yield from parallel(gens)
    memo: dict = {}
    result = {}
    for p in B:
        if not net.acting(p):
            continue
        vals = []
        for o in outs:
            v = from_wire(cfg.space, o.get(p))
            if v is not None:
                vals.append(v)
        result[p] = _decide(cfg.space, vals, len(vals) - (N - t_N), memo)
    return result


def reduce_supernodes(net: Network, tag: str, supernodes: list, L: int, cfg: ProtocolConfig):
    """One compression step from N to floor(N / sigma) supernodes."""
    net.register(tag)
    sigma = cfg.supernode_factor()
    N = len(supernodes)
    com = assign_supernodes_to_committees(N, sigma, cfg.omega, cfg.eps)
    committees = [[supernodes[j] for j in com.members(c)] for c in range(com.m)]
    values = yield from parallel(supernodes_ca(net, f"{tag}/c{c}", cg, L, cfg)
                                 for c, cg in enumerate(committees))
    pa = assign_parties_to_supernodes(net.n, com.m, cfg.omega, cfg.eps)
    targets = [tuple(pa.members(c)) for c in range(com.m)]
    big = cfg.grow(L)
    gens = []
    for c, cg in enumerate(committees):
        A = _union(s.members for s in cg)
        gens.append(supersend(net, f"{tag}/to{c}", GroupChannel(A, targets[c], big), values[c]))
    outs = yield from parallel(gens)
    return [Supernode(c, targets[c], dict(outs[c])) for c in range(com.m)]


def ca_fixed_L(net: Network, tag: str, cfg: ProtocolConfig, inputs: dict):
    """Convex agreement with a known bound ``cfg.L`` on honest input lengths.

    ``inputs`` maps parties to space elements (or None).  Returns party -> element.
    """
    if cfg.L is None:
        raise ValueError("ca_fixed_L needs a length bound")
    net.register(tag)
    space = cfg.space
    sigma = cfg.supernode_factor()
    sn = []
    for p in range(net.n):
        v = inputs.get(p)
        sn.append(Supernode(p, (p,), {p: None if v is None else to_wire(space, v)}))
    net.context["supernodes"] = [s.members for s in sn]
    L = cfg.L
    i = 0
    while len(sn) >= sigma:
        sn = yield from reduce_supernodes(net, f"{tag}/it{i}", sn, L, cfg)
        i += 1
        L = cfg.grow(L)
        net.context["supernodes"] = [s.members for s in sn]
        hook = net.context.get("audit")
        if hook is not None:
            hook(net, cfg, sn, i, L)
    final = yield from supernodes_ca(net, f"{tag}/final", sn, L, cfg)
    out = {}
    for p in range(net.n):
        if not net.acting(p):
            continue
        v = from_wire(space, final.get(p))
        if v is None:
            v = space.minimum()
            net.flag("default-path", party=p, tag=tag)
        out[p] = v
    return out


def fixed_L_rounds(n: int, cfg: ProtocolConfig) -> int:
    """Round count of ``ca_fixed_L`` derived from the group structure alone."""
    sigma = cfg.supernode_factor()
    groups = [(p,) for p in range(n)]
    total = 0
    while len(groups) >= sigma:
        com = assign_supernodes_to_committees(len(groups), sigma, cfg.omega, cfg.eps)
        unions = [_union(groups[j] for j in com.members(c)) for c in range(com.m)]
        total += max(supersend_rounds(len(u)) for u in unions)
        pa = assign_parties_to_supernodes(n, com.m, cfg.omega, cfg.eps)
        groups = [tuple(pa.members(c)) for c in range(com.m)]
        total += max(supersend_rounds(len(g)) for g in groups)
    return total + supersend_rounds(len(_union(groups)))


def fixed_L_assignments(n: int, cfg: ProtocolConfig) -> list:
    """Every committee and supernode assignment ``ca_fixed_L`` builds for ``n`` parties."""
    sigma = cfg.supernode_factor()
    N, out = n, []
    while N >= sigma:
        com = assign_supernodes_to_committees(N, sigma, cfg.omega, cfg.eps)
        out.append(com)
        out.append(assign_parties_to_supernodes(n, com.m, cfg.omega, cfg.eps))
        N = com.m
    return out


# -- unknown-length machinery ------------------------------------------------------------

def _uint_bits(x: int) -> str:
    return format(x, "b")


def exponential_search(net: Network, tag: str, parties: tuple, L_in: dict):
    """Parallel bit agreements on ``L_in <= 2^i``; returns party -> 2^j for the least accepted j."""
    n = len(parties)
    J = math.ceil(math.log2(n * n)) if n > 1 else 0
    net.register(tag)
    inst = BAInstance(tuple(parties), 1, multivalued=False)
    gens = [binary_phase_king(net, f"{tag}/i{i}", inst,
                              {p: int(L_in.get(p, 1) <= 2 ** i) for p in parties if net.acting(p)})
            for i in range(J + 1)]
    outs = yield from parallel(gens)
    res = {}
    for p in parties:
        if net.acting(p):
            j = next((i for i, o in enumerate(outs) if o.get(p) == 1), J)
            res[p] = 2 ** j
    return res


def exponential_search_rounds(n: int) -> int:
    return BAInstance(tuple(range(n)), 1, multivalued=False).rounds


def high_cost_ca(net: Network, tag: str, parties: tuple, inputs: dict, width: int = LENGTH_FIELD_BITS):
    """Convex agreement on naturals: disseminate every input by its own agreement, then trim t."""
    n = len(parties)
    t = (n - 1) // 3
    net.register(tag)

    def check(x, s, r):
        b = bitstring_size(x)
        return b if b is not None and b <= width else None

    d = net.exchange(f"{tag}/offer", "value", parties, parties,
                     {p: _uint_bits(inputs.get(p, 0)) for p in parties if net.acting(p)}, check,
                     meta={"proto": "hc", "cap": width, "default": "0"})
    yield
    heard = {p: d.view(p) for p in parties if net.acting(p)}
    inst = BAInstance(tuple(parties), width)
    gens = [ba_run(net, f"{tag}/ba{j}", inst, {p: heard[p].get(j, "0") for p in heard}, default="0")
            for j in parties]
    outs = yield from parallel(gens)
    res = {}
    for p in parties:
        if not net.acting(p):
            continue
        vals = sorted(int(o.get(p, "0"), 2) for o in outs)
        lo, hi = vals[t], vals[len(vals) - 1 - t]
        res[p] = lo if lo <= hi else vals[len(vals) // 2]
    return res


def ca_with_bot(net: Network, tag: str, members: tuple, inputs: dict, L: int, cfg: ProtocolConfig):
    """Convex agreement inside a group where some honest members hold no value."""
    net.register(tag)
    nc = len(members)
    t = math.ceil(Fraction(nc, cfg.omega + 1)) - 1
    gens = [supersend(net, f"{tag}/s{j}", GroupChannel((p,), members, L), {p: inputs.get(p)})
            for j, p in enumerate(members)]
    outs = yield from parallel(gens)
    memo: dict = {}
    res = {}
    for p in members:
        if not net.acting(p):
            continue
        vals = [v for v in (from_wire(cfg.space, o.get(p)) for o in outs) if v is not None]
        k = len(vals) - (nc - 2 * t)
        res[p] = _decide(cfg.space, vals, min(k, t), memo) if k >= 0 else None
    return res


def _agreed(values: dict):
    c = Counter(values.values())
    return max(c.items(), key=lambda kv: (kv[1], -kv[0] if isinstance(kv[0], int) else 0))[0]


def ca_unknown_L(net: Network, tag: str, cfg: ProtocolConfig, inputs: dict):
    """Convex agreement without a known length bound.  Returns party -> element."""
    n = net.n
    parties = tuple(range(n))
    space = cfg.space
    net.register(tag)
    wires = {p: to_wire(space, inputs[p]) for p in parties if net.acting(p) and inputs.get(p) is not None}
    lengths = {p: len(w) for p, w in wires.items()}
    cap = (1 << LENGTH_FIELD_BITS) - 1

    def lcheck(x, s, r):
        return LENGTH_FIELD_BITS if isinstance(x, int) and not isinstance(x, bool) and 0 <= x <= cap else None

    d = net.exchange(f"{tag}/length", "length", parties, parties,
                     {p: min(lengths.get(p, 0), cap) for p in parties if net.acting(p)}, lcheck,
                     meta={"proto": "length", "cap": LENGTH_FIELD_BITS})
    yield
    Lp = {}
    for p in parties:
        if net.acting(p):
            got = sorted(d.view(p).values(), reverse=True)
            got += [0] * (n - len(got))
            Lp[p] = got[cfg.t]
    big = yield from binary_phase_king(net, f"{tag}/big", BAInstance(parties, 1, multivalued=False),
                                       {p: int(Lp[p] > n * n) for p in Lp})
    honest_big = {p: b for p, b in big.items() if net.is_honest(p)} or big
    if _agreed(honest_big) == 1:
        q = yield from high_cost_ca(net, f"{tag}/hc", parties,
                                    {p: math.ceil(Lp[p] / (n * n)) for p in Lp})
        Lt = {p: q[p] * n * n for p in q}
    else:
        Lt = yield from exponential_search(net, f"{tag}/es", parties,
                                           {p: max(1, min(Lp[p], n * n)) for p in Lp})
    L_tilde = _agreed({p: v for p, v in Lt.items() if net.is_honest(p)} or Lt)
    net.context["L_tilde"] = L_tilde
    vin = {p: (w if lengths[p] <= Lt.get(p, L_tilde) else None) for p, w in wires.items()}
    for p, w in vin.items():
        if w is None:
            net.flag("input-dropped", party=p)

    ua = assign_parties_to_committees_unknownL(n, cfg.omega, cfg.eps)
    groups = [tuple(ua.members(i)) for i in range(n)]
    res = yield from parallel(ca_with_bot(net, f"{tag}/cb{i}", g, {p: vin.get(p) for p in g}, L_tilde, cfg)
                              for i, g in enumerate(groups))
    big_L = cfg.grow(L_tilde)
    direct = {}
    for i, g in enumerate(groups):
        for p in g:
            if net.acting(p) and res[i].get(p) is not None:
                direct.setdefault(p, {})[i] = res[i][p]

    def dcheck(x, s, r):
        b = bitstring_size(x)
        return b if b is not None and b <= big_L and s in groups[r] else None

    d = net.exchange(f"{tag}/deliver", "direct", parties, parties, direct, dcheck, p2p=True,
                     meta={"proto": "deliver", "cap": big_L})
    yield
    new_inputs = {}
    for p in parties:
        if not net.acting(p):
            continue
        c = Counter(x for x in d.view(p).values() if from_wire(space, x) is not None)
        if c:
            top = max(c.values())
            best = min((x for x, k in c.items() if k == top), key=order_key)
            new_inputs[p] = from_wire(space, best)
        else:
            new_inputs[p] = None
    fixed = ProtocolConfig(n, cfg.t, space, cfg.eps, big_L, cfg.kappa, cfg.sigma)
    return (yield from ca_fixed_L(net, f"{tag}/fixed", fixed, new_inputs))


def unknown_L_rounds(n: int, cfg: ProtocolConfig) -> int:
    """Round count of ``ca_unknown_L``; the branch taken after the length vote is the longer one."""
    branch = max(1 + BAInstance(tuple(range(n)), LENGTH_FIELD_BITS).rounds, exponential_search_rounds(n))
    ua = assign_parties_to_committees_unknownL(n, cfg.omega, cfg.eps)
    bot = max(supersend_rounds(len(ua.members(i))) for i in range(n))
    big = BAInstance(tuple(range(n)), 1, multivalued=False).rounds
    return 1 + big + branch + bot + 1 + fixed_L_rounds(n, cfg)


def unknown_L_assignments(n: int, cfg: ProtocolConfig) -> list:
    return [assign_parties_to_committees_unknownL(n, cfg.omega, cfg.eps)] + fixed_L_assignments(n, cfg)


# -- audits (harness annotation, never read by the protocol) -------------------------------

def byzantine_fraction_literal(omega: int, eps) -> Fraction:
    eps = Fraction(eps)
    return min(1 / (omega + eps / 2), (1 / (omega + eps / 3) - 1 / (omega + eps / 2)) / 2)


def classify(net: Network, cfg: ProtocolConfig, s: Supernode, honest_inputs: list, literal: bool = False) -> str:
    size = len(s.members)
    byz = sum(1 for p in s.members if not net.is_honest(p))
    if literal:
        frac = byzantine_fraction_literal(cfg.omega, cfg.eps)
        if byz >= math.ceil(size * frac):
            return "byzantine"
    else:
        _, beta, _ = party_supernode_params(cfg.omega, cfg.eps)
        if byz > beta * size:
            return "byzantine"
    held = {s.values.get(p) for p in s.members if net.is_honest(p)}
    if len(held) != 1:
        return "split"
    v = from_wire(cfg.space, next(iter(held)))
    if v is None or not cfg.space.hull_contains(honest_inputs, v):
        return "confused"
    return "good"


def iteration_audit(net: Network, cfg: ProtocolConfig, sn: list, i: int, L: int, honest_inputs: list) -> dict:
    n = net.n
    sigma = cfg.supernode_factor()
    N_i = n // sigma ** i
    classes = [classify(net, cfg, s, honest_inputs) for s in sn]
    literal = [classify(net, cfg, s, honest_inputs, literal=True) for s in sn]
    a = assign_parties_to_supernodes(n, len(sn), cfg.omega, cfg.eps)
    bad = sum(1 for c in classes if c != "good")
    membership = Counter(p for s in sn for p in s.members)
    lengths = [len(s.values[p]) for s in sn if classes[sn.index(s)] != "byzantine"
               for p in s.members if net.is_honest(p) and s.values.get(p) is not None]
    return {
        "iteration": i,
        "A": len(sn) == N_i,
        "B": bad * (cfg.omega + cfg.eps) <= len(sn),
        "C": all(x <= L for x in lengths),
        "D": max(membership.values(), default=0) <= a.degree,
        "E": all(len(s.members) <= 2 * a.degree * n / len(sn) for s in sn),
        "split_free": "split" not in classes,
        "classes": Counter(classes),
        "literal_classes": Counter(literal),
    }
