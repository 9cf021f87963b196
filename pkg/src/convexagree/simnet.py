"""Deterministic synchronous round simulator with bit accounting.

Protocol instances are generators.  Each ``yield`` ends one synchronous round;
an instance performs at most one message exchange per round through
:meth:`Network.exchange`.  Sequential composition is ``yield from``;
lockstep parallel composition is :func:`parallel`.

The adversary is rushing: inside an exchange it sees every honest payload of
that exchange before choosing the payloads of corrupted senders.
"""

from __future__ import annotations

import hashlib
import json
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, Iterable, Iterator, Optional, Sequence

import numpy as np

ENVELOPE_BITS = 128
PRNG_NAME = "numpy.Philox4x64-10"


class RunFailed(RuntimeError):
    """Raised when a run exceeds four times its declared round bound."""


class PerReceiver(dict):
    """Marks an adversarial payload that differs per receiver."""


@dataclass
class ExchangeContext:
    net: "Network"
    tag: str
    kind: str
    senders: list          # corrupted senders that may speak in this exchange
    receivers: list
    honest: dict           # broadcast: sender -> payload; p2p: sender -> {receiver: payload}
    p2p: bool
    meta: dict

    @property
    def round(self) -> int:
        return self.net.round


class Delivery:
    """What receivers got in one exchange."""

    __slots__ = ("honest", "extra", "p2p")

    def __init__(self, honest: dict, extra: dict, p2p: bool):
        self.honest = honest    # sender -> payload (broadcast) or receiver -> {sender: payload}
        self.extra = extra      # receiver -> {sender: payload} from corrupted senders
        self.p2p = p2p

    def view(self, r) -> dict:
        if self.p2p:
            out = dict(self.honest.get(r, {}))
        else:
            out = dict(self.honest)
        out.update(self.extra.get(r, {}))
        return out

    def groups(self, receivers: Iterable) -> list:
        """Receivers bucketed by identical adversarial extras (broadcast exchanges)."""
        buckets: dict = {}
        for r in receivers:
            ex = self.extra.get(r)
            key = tuple(sorted(ex.items(), key=lambda kv: kv[0])) if ex else ()
            buckets.setdefault(key, []).append(r)
        return [(dict(k), rs) for k, rs in buckets.items()]


def _digest(payload) -> str:
    return hashlib.sha256(repr(payload).encode()).hexdigest()[:12]


class Network:
    def __init__(self, n: int, seed: int = 0, adversary=None, budget: Optional[int] = None,
                 record: bool = False, config: Optional[dict] = None):
        self.n = n
        self.seed = seed
        self.round = 0
        self.adversary = adversary or Adversary()
        self.budget = budget if budget is not None else n
        self.corrupt: set = set()
        self.followers: set = set()
        self.bits: Dict[str, int] = defaultdict(int)
        self.spans: Dict[str, list] = {}
        self.events: list = []
        self.flags: list = []
        self.audits: list = []
        self.context: dict = {}
        self.record = record
        self.log: list = []
        self.config = config or {}
        self._rngs: dict = {}
        self.adversary.setup(self)

    # -- parties ----------------------------------------------------------
    def rng(self, party: int) -> np.random.Generator:
        """Per-(run, party) generator; party -1 is the adversary."""
        g = self._rngs.get(party)
        if g is None:
            g = np.random.Generator(np.random.Philox(key=[self.seed, party + 1]))
            self._rngs[party] = g
        return g

    def is_honest(self, p) -> bool:
        return p not in self.corrupt

    def acting(self, p) -> bool:
        """True if ``p`` runs the honest code (honest parties and followers)."""
        return p not in self.corrupt or p in self.followers

    def corrupt_party(self, p, follow: bool = False) -> bool:
        if p in self.corrupt:
            return True
        if len(self.corrupt) >= self.budget:
            return False
        self.corrupt.add(p)
        if follow:
            self.followers.add(p)
        self.events.append({"event": "corrupt", "round": self.round, "party": p, "follower": follow})
        return True

    def honest_parties(self) -> list:
        return [p for p in range(self.n) if p not in self.corrupt]

    # -- accounting --------------------------------------------------------
    def register(self, tag: str) -> None:
        self.bits.setdefault(tag, 0)
        self.spans.setdefault(tag, [self.round, self.round])

    def _touch(self, tag: str) -> None:
        sp = self.spans.get(tag)
        if sp is None:
            self.spans[tag] = [self.round, self.round]
        else:
            sp[1] = max(sp[1], self.round)

    def flag(self, name: str, **info) -> None:
        self.flags.append({"flag": name, "round": self.round, **info})

    # -- rounds ------------------------------------------------------------
    def tick(self) -> None:
        self.round += 1
        self.adversary.boundary(self)

    def exchange(self, tag: str, kind: str, senders: Sequence, receivers: Sequence,
                 honest: dict, validate: Callable, p2p: bool = False,
                 meta: Optional[dict] = None, owner: Optional[Callable] = None) -> Delivery:
        """One round of messages from ``senders`` to ``receivers``.

        ``honest`` maps each acting sender to its payload (``None`` means silent);
        for ``p2p`` exchanges the payload is a dict receiver -> payload.
        ``validate(payload, sender, receiver)`` returns the payload size in bits,
        or ``None`` to drop it at ingress.
        """
        own = owner or (lambda v: v)
        self._touch(tag)
        rset = set(receivers)
        total = 0
        kept: dict = {}
        for s, pay in honest.items():
            if pay is None:
                continue
            o = own(s)
            if not self.acting(o):
                continue
            counted = o not in self.corrupt
            if p2p:
                for r, x in pay.items():
                    if r not in rset or x is None:
                        continue
                    b = validate(x, s, r)
                    if b is None:
                        continue
                    kept.setdefault(r, {})[s] = x
                    if counted and own(r) != o:
                        total += b + ENVELOPE_BITS
                    if self.record:
                        self.log.append([self.round, tag, kind, repr(s), repr(r), b, counted, _digest(x)])
            else:
                b = validate(pay, s, None)
                if b is None:
                    continue
                kept[s] = pay
                if counted:
                    if owner is None:
                        same = 1 if o in rset else 0
                    else:
                        same = sum(1 for r in receivers if own(r) == o)
                    total += (b + ENVELOPE_BITS) * (len(receivers) - same)
                if self.record:
                    self.log.append([self.round, tag, kind, repr(s), "*", b, counted, _digest(pay)])
        if total:
            self.bits[tag] += total
        else:
            self.bits.setdefault(tag, 0)

        extra: dict = {}
        bad = [s for s in senders if not self.acting(own(s))]
        if bad:
            ctx = ExchangeContext(self, tag, kind, bad, list(receivers),
                                  kept if not p2p else {s: honest[s] for s in honest if honest[s]},
                                  p2p, meta or {})
            out = self.adversary.messages(ctx) or {}
            badset = set(bad)
            for s, pay in out.items():
                if s not in badset or pay is None:
                    continue
                if isinstance(pay, PerReceiver):
                    items = pay.items()
                else:
                    items = ((r, pay) for r in receivers)
                for r, x in items:
                    if r not in rset or x is None or validate(x, s, r) is None:
                        continue
                    extra.setdefault(r, {})[s] = x
                    if self.record:
                        self.log.append([self.round, tag, kind, repr(s), repr(r), validate(x, s, r), False, _digest(x)])
        return Delivery(kept, extra, p2p)

    # -- transcripts -----------------------------------------------------------
    def transcript(self, outputs: Optional[dict] = None) -> "RunTranscript":
        cfg = json.dumps(self.config, sort_keys=True, default=str)
        header = {"config_hash": hashlib.sha256(cfg.encode()).hexdigest(), "seed": self.seed,
                  "prng": PRNG_NAME, "n": self.n}
        return RunTranscript(header, dict(self.bits), {k: tuple(v) for k, v in self.spans.items()},
                             list(self.events), outputs or {}, list(self.audits), list(self.flags),
                             self.round, list(self.log))


@dataclass
class RunTranscript:
    header: dict
    bits: dict
    spans: dict
    events: list
    outputs: dict
    audits: list
    flags: list
    rounds: int
    log: list = field(default_factory=list)

    @property
    def total_bits(self) -> int:
        return sum(self.bits.values())

    def lines(self) -> Iterator[str]:
        yield json.dumps({"type": "header", **self.header}, sort_keys=True)
        for e in self.log:
            yield json.dumps({"type": "envelope", "round": e[0], "tag": e[1], "kind": e[2], "from": e[3],
                              "to": e[4], "bits": e[5], "honest": e[6], "digest": e[7]})
        for e in self.events:
            yield json.dumps({"type": "event", **e}, sort_keys=True, default=str)
        for f in self.flags:
            yield json.dumps({"type": "flag", **f}, sort_keys=True, default=str)
        yield json.dumps({"type": "summary", "rounds": self.rounds, "bits": self.bits,
                          "outputs": {str(k): v for k, v in self.outputs.items()}},
                         sort_keys=True, default=str)

    def write(self, path) -> None:
        with open(path, "w") as fh:
            for line in self.lines():
                fh.write(line + "\n")


def account(transcript, tag: str) -> tuple[int, int]:
    """Honest bits and rounds spent under ``tag`` (including nested tags)."""
    bits_map = transcript.bits
    spans = transcript.spans
    keys = [k for k in bits_map if k == tag or k.startswith(tag + "/")]
    if not keys:
        raise KeyError(f"unknown phase tag {tag!r}")
    bits = sum(bits_map[k] for k in keys)
    sp = [spans[k] for k in keys if k in spans]
    rounds = (max(s[1] for s in sp) - min(s[0] for s in sp) + 1) if sp else 0
    return bits, rounds


# -- composition -----------------------------------------------------------------

def parallel(gens: Iterable) -> Iterator:
    """Run generators in lockstep; returns their results in order."""
    gens = list(gens)
    results: list = [None] * len(gens)
    live = list(range(len(gens)))
    while live:
        still = []
        for i in live:
            try:
                next(gens[i])
                still.append(i)
            except StopIteration as stop:
                results[i] = stop.value
        live = still
        if live:
            yield
    return results


def drive(net: Network, gen, bound: Optional[int] = None):
    """Run a top-level generator to completion, ticking the network each round."""
    limit = None if bound is None else 4 * bound
    start = net.round
    while True:
        try:
            next(gen)
        except StopIteration as stop:
            return stop.value
        net.tick()
        if limit is not None and net.round - start > limit:
            raise RunFailed(f"run exceeded {limit} rounds")


def echo_protocol(net: Network, tag: str, payloads: dict):
    """Each party broadcasts one bitstring; used to exercise the engine."""
    parties = list(range(net.n))
    d = net.exchange(tag, "echo", parties, parties, payloads,
                     lambda x, s, r: len(x) if isinstance(x, str) else None)
    yield
    return {p: d.view(p) for p in parties if net.acting(p)}


# -- adversaries -------------------------------------------------------------------

class Adversary:
    """Corrupts nobody and sends nothing."""

    name = "none"

    def __init__(self, corrupt: Iterable = (), **params):
        self.initial = list(corrupt)
        self.params = params

    def setup(self, net: Network) -> None:
        for p in self.initial:
            net.corrupt_party(p, follow=self.follows())

    def follows(self) -> bool:
        return False

    def boundary(self, net: Network) -> None:
        pass

    def messages(self, ctx: ExchangeContext) -> dict:
        return {}


class Crash(Adversary):
    name = "crash"


class Follower(Adversary):
    """Corrupted parties run the honest code with inputs of the adversary's choice."""

    name = "follower"

    def follows(self) -> bool:
        return True


def _split(receivers: list) -> tuple[list, list]:
    h = len(receivers) // 2
    return receivers[:h], receivers[h:]


class _Forger:
    """Kind-aware payload construction shared by the active adversaries."""

    def __init__(self, rng: np.random.Generator):
        self.rng = rng

    def bit(self) -> int:
        return int(self.rng.integers(0, 2))

    def bitstring(self, cap: int) -> str:
        cap = max(1, int(cap))
        ln = int(self.rng.integers(1, min(cap, 64) + 1))
        return "".join("01"[int(b)] for b in self.rng.integers(0, 2, ln))

    def candidates(self, ctx: ExchangeContext) -> list:
        """Plausible values: honest payloads seen so far plus extreme space points."""
        seen = []
        if not ctx.p2p:
            seen = [v for v in ctx.honest.values() if v is not None]
        extras = list(ctx.net.context.get("extreme_values", ()))
        cap = ctx.meta.get("cap")
        pool = sorted(set(seen), key=lambda v: (len(v) if hasattr(v, "__len__") else 0, repr(v)))
        for e in extras:
            if cap is None or len(e) <= cap:
                pool.append(e)
        return pool


def _value_payload(forger: _Forger, ctx: ExchangeContext, pick: int):
    kind = ctx.kind
    meta = ctx.meta
    if kind in ("vote", "king", "bit"):
        return pick % 2
    if kind == "prop":
        return pick % 3
    if kind in ("value", "echo"):
        pool = [v for v in forger.candidates(ctx) if isinstance(v, type(meta.get("default")))]
        if not pool:
            d = meta.get("default")
            if isinstance(d, bytes):
                pool = [bytes(forger.rng.integers(0, 256, len(d), dtype=np.uint8))]
            else:
                pool = [forger.bitstring(meta.get("cap", 8))]
        return pool[pick % len(pool)] if pick < 2 * len(pool) else pool[-1]
    if kind == "length":
        return int(forger.rng.integers(0, 1 << 20))
    return None


class RandomBits(Adversary):
    """Sends random well-typed payloads, independently per receiver.

    Each corrupt sender draws a small pool per exchange and picks from it per
    receiver, so receivers still see conflicting messages.
    """

    name = "random-bits"
    pool_size = 2

    def messages(self, ctx):
        f = _Forger(ctx.net.rng(-1))
        out = {}
        receivers = list(ctx.receivers)
        for s in ctx.senders:
            if ctx.kind == "bundle":
                from .erasure import make_bundles
                nb = ctx.meta["n_shares"]
                pool = [make_bundles(f.bitstring(ctx.meta.get("cap", 8)), nb) for _ in range(self.pool_size)]
                picks = f.rng.integers(0, self.pool_size, len(receivers))
                out[s] = PerReceiver({r: pool[int(i)][ctx.meta["index"](r) - 1] for r, i in zip(receivers, picks)})
                continue
            pool = [_random_payload(f, ctx, None) for _ in range(self.pool_size)]
            picks = f.rng.integers(0, self.pool_size, len(receivers))
            out[s] = PerReceiver({r: pool[int(i)] for r, i in zip(receivers, picks)})
        return out


def _random_payload(f: _Forger, ctx: ExchangeContext, r):
    k = ctx.kind
    if k in ("vote", "king", "bit"):
        return f.bit()
    if k == "prop":
        return int(f.rng.integers(0, 3))
    if k in ("value", "echo"):
        d = ctx.meta.get("default")
        if isinstance(d, bytes):
            return bytes(f.rng.integers(0, 256, len(d), dtype=np.uint8))
        return f.bitstring(ctx.meta.get("cap", 8))
    if k == "bundle":
        from .erasure import make_bundles
        nb = ctx.meta["n_shares"]
        b = make_bundles(f.bitstring(ctx.meta.get("cap", 8)), nb)
        return b[ctx.meta["index"](r) - 1]
    if k == "share":
        return None
    if k == "length":
        return int(f.rng.integers(0, 1 << 20))
    if k == "direct":
        return f.bitstring(ctx.meta.get("cap", 8))
    return None


class Equivocate(Adversary):
    """Different plausible payloads to the two halves of every receiver set."""

    name = "equivocate-in-supersend"

    def messages(self, ctx):
        f = _Forger(ctx.net.rng(-1))
        lo, hi = _split(list(ctx.receivers))
        out = {}
        if ctx.kind == "bundle":
            msgs = _two_messages(f, ctx)
            per = PerReceiver()
            bundles = [_bundles_for(m, ctx) for m in msgs]
            for half, bs in ((lo, bundles[0]), (hi, bundles[1])):
                for r in half:
                    per[r] = bs[ctx.meta["index"](r) - 1]
            return {s: per for s in ctx.senders}
        if ctx.kind == "share":
            return {}
        for j, s in enumerate(ctx.senders):
            per = PerReceiver()
            a, b = _value_payload(f, ctx, 0), _value_payload(f, ctx, 1)
            for r in lo:
                per[r] = a
            for r in hi:
                per[r] = b
            out[s] = per
        return out


def _two_messages(f: _Forger, ctx) -> list:
    cap = ctx.meta.get("cap", 8)
    pool = [m for m in ctx.net.context.get("extreme_values", ()) if len(m) <= cap]
    seen = []
    for per in ctx.honest.values():
        for b in (per.values() if isinstance(per, dict) else []):
            seen.append(b)
            break
    if len(pool) >= 2:
        return pool[:2]
    a = f.bitstring(cap)
    b = a[:-1] + ("1" if a[-1] == "0" else "0")
    return (pool + [a, b])[:2]


def _bundles_for(m: str, ctx):
    from .erasure import make_bundles
    return make_bundles(m, ctx.meta["n_shares"])


class RootSplit(Adversary):
    """Two Merkle roots to the two halves of each receiving group, and split root votes."""

    name = "root-split"

    def messages(self, ctx):
        f = _Forger(ctx.net.rng(-1))
        lo, hi = _split(list(ctx.receivers))
        if ctx.kind == "bundle":
            msgs = _two_messages(f, ctx)
            bundles = [_bundles_for(m, ctx) for m in msgs]
            per = PerReceiver()
            for half, bs in ((lo, bundles[0]), (hi, bundles[1])):
                for r in half:
                    per[r] = bs[ctx.meta["index"](r) - 1]
            return {s: per for s in ctx.senders}
        if ctx.kind in ("value", "echo") and isinstance(ctx.meta.get("default"), bytes):
            roots = sorted({v for v in ctx.honest.values() if isinstance(v, bytes)})
            if len(roots) < 2:
                roots = roots + [bytes(f.rng.integers(0, 256, 32, dtype=np.uint8))] * (2 - len(roots))
            per = PerReceiver()
            for r in lo:
                per[r] = roots[0]
            for r in hi:
                per[r] = roots[1]
            return {s: per for s in ctx.senders}
        if ctx.kind in ("vote", "prop", "king"):
            per = PerReceiver()
            for r in lo:
                per[r] = 0
            for r in hi:
                per[r] = 1
            return {s: per for s in ctx.senders}
        return {}


class AdaptiveLargestSupernode(Equivocate):
    """At a chosen round, corrupts members of the currently largest supernode."""

    name = "adaptive-largest-supernode"

    def __init__(self, corrupt: Iterable = (), at_round: int = 1, **params):
        super().__init__(corrupt, **params)
        self.at_round = at_round
        self.fired = False

    def boundary(self, net):
        if self.fired or net.round < self.at_round:
            return
        # Without supernodes the whole party set counts as one group.
        groups = net.context.get("supernodes") or [tuple(range(net.n))]
        self.fired = True
        target = max(groups, key=lambda g: (len(g), tuple(g)))
        for p in sorted(target):
            if len(net.corrupt) >= net.budget:
                break
            net.corrupt_party(p)


ADVERSARIES = {
    "none": Adversary,
    "crash": Crash,
    "equivocate-in-supersend": Equivocate,
    "root-split": RootSplit,
    "follower": Follower,
    "random-bits": RandomBits,
    "adaptive-largest-supernode": AdaptiveLargestSupernode,
}


def make_adversary(name: str, corrupt: Iterable = (), **params) -> Adversary:
    try:
        cls = ADVERSARIES[name]
    except KeyError:
        raise ValueError(f"unknown adversary {name!r}") from None
    return cls(corrupt, **params)
