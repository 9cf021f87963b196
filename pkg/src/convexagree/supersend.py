"""Group-to-group transfer of a long message via erasure-coded, Merkle-committed shares."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Optional

from .ba import BAInstance, ba_rounds, binary_phase_king, ba_run, bytes_size
from .erasure import (
    KAPPA,
    ShareBundle,
    ZERO_ROOT,
    bundle_cap_bits,
    bundle_valid,
    decode_committed,
    make_bundles,
    share_verifies,
    path_length,
)
from .simnet import ENVELOPE_BITS, Network


@dataclass(frozen=True)
class GroupChannel:
    senders: tuple
    receivers: tuple
    L: int

    @property
    def n_shares(self) -> int:
        return len(self.receivers)

    def index(self, r) -> int:
        return self._pos[r] + 1

    @property
    def _pos(self) -> dict:
        pos = self.__dict__.get("_pos_cache")
        if pos is None:
            pos = {r: i for i, r in enumerate(self.receivers)}
            object.__setattr__(self, "_pos_cache", pos)
        return pos


def reconstruct_rounds(n_b: int) -> int:
    return ba_rounds(n_b, True) + 1


def supersend_rounds(n_b: int) -> int:
    return 1 + reconstruct_rounds(n_b) + ba_rounds(n_b, False) + 1 + reconstruct_rounds(n_b)


def _full(root: bytes, x: ShareBundle) -> ShareBundle:
    return ShareBundle(root, x.index, x.share, x.witness)


def share_message_bits(L: int, n_b: int) -> int:
    """Largest rebroadcast tuple (index, share, witness) without the root."""
    return bundle_cap_bits(L, n_b) - KAPPA


def supersend_cap(n_a: int, n_b: int, L: int) -> int:
    """Bits honest parties may send in one supersend, for any adversary."""
    bundle = bundle_cap_bits(L, n_b) + ENVELOPE_BITS
    share = share_message_bits(L, n_b) + ENVELOPE_BITS
    roster = tuple(range(n_b))
    root_ba = BAInstance(roster, KAPPA).cap_bits()
    bit_ba = BAInstance(roster, 1, multivalued=False).cap_bits()
    send = n_a * n_b * bundle
    recon = n_b * n_b * share + root_ba
    return send + recon + bit_ba + n_b * n_b * bundle + recon


def send_shares(net: Network, tag: str, ch: GroupChannel, messages: dict):
    """Each acting sender with a message sends share ``i`` to the ``i``-th receiver.

    Returns receiver -> list of valid bundles (one entry per sender that delivered).
    """
    nb, L = ch.n_shares, ch.L
    honest = {}
    for a in ch.senders:
        m = messages.get(a)
        if m is None or not net.acting(a) or len(m) > L or not m:
            continue
        bundles = make_bundles(m, nb)
        honest[a] = {r: bundles[i] for i, r in enumerate(ch.receivers)}

    def check(x, s, r):
        if not isinstance(x, ShareBundle) or r is None or x.index != ch.index(r):
            return None
        return x.bits if bundle_valid(x, nb, L) else None

    meta = {"proto": "supersend", "cap": L, "n_shares": nb, "index": ch.index}
    d = net.exchange(tag, "bundle", ch.senders, ch.receivers, honest, check, p2p=True, meta=meta)
    yield
    out = {}
    for r in ch.receivers:
        if net.acting(r):
            out[r] = list(d.view(r).values())
    return out


def _plurality(bundles: list) -> Optional[ShareBundle]:
    if not bundles:
        return None
    c = Counter(bundles)
    top = max(c.values())
    return min((b for b, k in c.items() if k == top), key=lambda b: (b.root, b.to_bytes()))


def reconstruct_from_shares(net: Network, tag: str, ch: GroupChannel, held: dict):
    """Agree on a root, rebroadcast matching shares, decode.  Returns (outputs, roots)."""
    B, nb, L = ch.receivers, ch.n_shares, ch.L
    choice = {r: _plurality(held.get(r, [])) for r in B if net.acting(r)}
    inst = BAInstance(tuple(B), KAPPA)
    roots_in = {r: (b.root if b is not None else ZERO_ROOT) for r, b in choice.items()}
    zstar = yield from ba_run(net, tag + "/root", inst, roots_in, default=ZERO_ROOT, size=bytes_size)

    honest = {}
    for r in B:
        b = choice.get(r)
        if b is not None and net.acting(r) and zstar.get(r) == b.root:
            honest[r] = ShareBundle(b"", b.index, b.share, b.witness)

    def check(x, s, r):
        if not isinstance(x, ShareBundle) or x.root != b"" or x.index != ch.index(s):
            return None
        if x.bits > share_message_bits(L, nb) or len(x.witness) > path_length(nb):
            return None
        return x.bits

    meta = {"proto": "supersend", "cap": L, "n_shares": nb, "index": ch.index}
    d = net.exchange(tag + "/shares", "share", B, B, honest, check, meta=meta)
    yield
    out = {}
    for r in B:
        if not net.acting(r):
            continue
        z = zstar.get(r, ZERO_ROOT)
        shares = {}
        for s, x in d.view(r).items():
            if share_verifies(z, _full(z, x), nb):
                shares[x.index] = x.share
        if 2 * len(shares) <= nb:
            out[r] = None
        else:
            out[r] = decode_committed(z, shares, nb, L)
    return out, zstar


def supersend(net: Network, tag: str, ch: GroupChannel, messages: dict):
    """Send ``messages[a]`` (bitstrings, or None to abstain) from group A to group B.

    Returns receiver -> bitstring or None.
    """
    net.register(tag)
    held = yield from send_shares(net, tag + "/send", ch, messages)
    first, zstar = yield from reconstruct_from_shares(net, tag + "/rec1", ch, held)
    B = ch.receivers
    inst = BAInstance(tuple(B), 1, multivalued=False)
    ok = yield from binary_phase_king(net, tag + "/ok", inst,
                                      {r: int(first.get(r) is not None) for r in B if net.acting(r)})
    inner = GroupChannel(B, B, ch.L)
    resend = {r: first.get(r) for r in B if ok.get(r) == 1}
    held2 = yield from send_shares(net, tag + "/resend", inner, resend)
    held2 = {r: [b for b in bs if b.root == zstar.get(r)] for r, bs in held2.items()}
    second, _ = yield from reconstruct_from_shares(net, tag + "/rec2", inner, held2)
    return {r: (second.get(r) if ok.get(r) == 1 else None) for r in B if net.acting(r)}
