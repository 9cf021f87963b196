"""Unauthenticated Byzantine agreement with a fixed round and bit schedule.

Binary agreement is phase-king with ``floor((n-1)/3) + 1`` phases of three
rounds.  Multivalued agreement adds a two-round preamble: a value that
gathered ``n - t`` votes is echoed, and the binary agreement then decides
whether the most echoed value is output or the default.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Any, Callable, Hashable, Optional, Sequence

from .simnet import ENVELOPE_BITS, Network

BOT = None
PROP_NONE = 2


def fault_bound(size: int) -> int:
    return (size - 1) // 3


def ba_rounds(size: int, multivalued: bool = True) -> int:
    return 3 * (fault_bound(size) + 1) + (2 if multivalued else 0)


def bitstring_size(v) -> Optional[int]:
    if isinstance(v, str) and v and not set(v) - {"0", "1"}:
        return len(v)
    return None


def bytes_size(v) -> Optional[int]:
    return 8 * len(v) if isinstance(v, bytes) else None


@dataclass(frozen=True)
class BAInstance:
    roster: tuple
    L: int
    multivalued: bool = True
    owner: Optional[dict] = None  # virtual id -> real party; identity when absent

    @property
    def size(self) -> int:
        return len(self.roster)

    @property
    def rounds(self) -> int:
        return ba_rounds(self.size, self.multivalued)

    def owner_of(self, v):
        return v if self.owner is None else self.owner[v]

    def schedule(self) -> list[tuple[str, int]]:
        """(kind, per-sender payload cap) for every round, fixed before round one."""
        out = []
        if self.multivalued:
            out += [("value", self.L), ("echo", self.L + 1)]
        for _ in range(fault_bound(self.size) + 1):
            out += [("vote", 1), ("prop", 2), ("king", 1)]
        return out

    def cap_bits(self) -> int:
        """Most bits honest members can send in one run, whatever the adversary does."""
        outside = [sum(1 for r in self.roster if self.owner_of(r) != self.owner_of(s)) for s in self.roster]
        total = 0
        for kind, cap in self.schedule():
            if kind == "king":
                total += (cap + ENVELOPE_BITS) * max(outside)
            else:
                total += (cap + ENVELOPE_BITS) * sum(outside)
        return total


def _most_frequent(counts: Counter, key: Callable):
    best = None
    for v, c in counts.items():
        if v is None:
            continue
        if best is None or c > best[0] or (c == best[0] and key(v) < key(best[1])):
            best = (c, v)
    return best


def binary_phase_king(net: Network, tag: str, inst: BAInstance, bits: dict):
    """Binary agreement; ``bits`` maps acting members to 0/1.  Returns member -> bit."""
    roster = list(inst.roster)
    n = len(roster)
    t = fault_bound(n)
    own = inst.owner_of
    ow = None if inst.owner is None else own
    net.register(tag)
    v = {m: (1 if bits.get(m) else 0) for m in roster}
    strong = {m: False for m in roster}

    def bitcheck(x, s, r):
        return 1 if x in (0, 1) and not isinstance(x, bool) else None

    def propcheck(x, s, r):
        return 2 if x in (0, 1, PROP_NONE) and not isinstance(x, bool) else None

    meta = {"proto": "ba", "cap": 1, "default": 0}
    for phase in range(t + 1):
        king = roster[phase]
        acting = [m for m in roster if net.acting(own(m))]
        d = net.exchange(tag, "vote", roster, roster, {m: v[m] for m in acting}, bitcheck,
                         meta=meta, owner=ow)
        base = Counter(d.honest.values())
        prop = {}
        for extra, rs in d.groups(acting):
            c = base + Counter(extra.values()) if extra else base
            p = 1 if c[1] >= n - t else 0 if c[0] >= n - t else PROP_NONE
            for r in rs:
                prop[r] = p
        yield

        acting = [m for m in roster if net.acting(own(m))]
        d = net.exchange(tag, "prop", roster, roster, {m: prop.get(m, PROP_NONE) for m in acting},
                         propcheck, meta=meta, owner=ow)
        base = Counter(d.honest.values())
        for extra, rs in d.groups(acting):
            c = base + Counter(extra.values()) if extra else base
            adopt = 1 if c[1] > t else 0 if c[0] > t else None
            for r in rs:
                if adopt is not None:
                    v[r] = adopt
                strong[r] = adopt is not None and c[adopt] >= n - t
        yield

        acting = [m for m in roster if net.acting(own(m))]
        payload = {king: v[king]} if king in acting else {}
        d = net.exchange(tag, "king", [king], roster, payload, bitcheck, meta=meta, owner=ow)
        for r in acting:
            if not strong[r]:
                kv = d.view(r).get(king)
                if kv in (0, 1):
                    v[r] = kv
        yield
    return {m: v[m] for m in roster if net.acting(own(m))}


def ba_run(net: Network, tag: str, inst: BAInstance, inputs: dict, default: Hashable = None,
           size: Callable = bitstring_size, key: Optional[Callable] = None):
    """Agreement on values of at most ``inst.L`` bits.  Returns member -> value.

    For binary instances inputs are 0/1.  For multivalued instances values are
    bitstrings (or bytes with ``size=bytes_size``) and ``default`` is returned
    when no value is supported widely enough.
    """
    if not inst.multivalued:
        return (yield from binary_phase_king(net, tag, inst, inputs))
    roster = list(inst.roster)
    n = len(roster)
    t = fault_bound(n)
    own = inst.owner_of
    ow = None if inst.owner is None else own
    if default is None:
        default = "0" * max(1, inst.L)
    key = key or (lambda x: (size(x), x))
    net.register(tag)
    meta = {"proto": "ba", "cap": inst.L, "default": default}

    def valcheck(x, s, r):
        b = size(x) if x is not None else None
        return b if b is not None and b <= inst.L else None

    def echocheck(x, s, r):
        if x == ("bot",):
            return 1
        b = valcheck(x, s, r)
        return None if b is None else 1 + b

    acting = [m for m in roster if net.acting(own(m))]
    ins = {}
    for m in acting:
        x = inputs.get(m)
        ins[m] = x if x is not None and valcheck(x, m, None) is not None else default
    d = net.exchange(tag, "value", roster, roster, ins, valcheck, meta=meta, owner=ow)
    base = Counter(d.honest.values())
    echo = {}
    for extra, rs in d.groups(acting):
        c = base + Counter(extra.values()) if extra else base
        best = _most_frequent(c, key)
        x = best[1] if best and best[0] >= n - t else ("bot",)
        for r in rs:
            echo[r] = x
    yield

    acting = [m for m in roster if net.acting(own(m))]
    d = net.exchange(tag, "echo", roster, roster, {m: echo.get(m, ("bot",)) for m in acting},
                     echocheck, meta=meta, owner=ow)
    base = Counter(x for x in d.honest.values() if x != ("bot",))
    cand, flag = {}, {}
    for extra, rs in d.groups(acting):
        c = base + Counter(x for x in extra.values() if x != ("bot",)) if extra else base
        best = _most_frequent(c, key)
        y = best[1] if best else default
        b = 1 if best and best[0] >= n - t else 0
        for r in rs:
            cand[r], flag[r] = y, b
    yield

    decided = yield from binary_phase_king(net, tag + "/bit", inst, flag)
    return {m: (cand.get(m, default) if decided.get(m) == 1 else default) for m in decided}
