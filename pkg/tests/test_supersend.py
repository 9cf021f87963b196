from itertools import combinations

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from convexagree.erasure import RSConfig, ShareBundle, make_bundles, rs_decode
from convexagree.simnet import ADVERSARIES, Adversary, Network, PerReceiver, account, drive, make_adversary
from convexagree.supersend import (
    GroupChannel,
    _plurality,
    reconstruct_from_shares,
    reconstruct_rounds,
    send_shares,
    supersend,
    supersend_cap,
    supersend_rounds,
)


class TamperedWitness(Adversary):
    """Corrupted senders forward genuine bundles with one witness byte flipped."""

    name = "tampered-witness"

    def messages(self, ctx):
        if ctx.kind != "bundle":
            return {}
        m = self.params["message"]
        bundles = make_bundles(m, ctx.meta["n_shares"])
        out = {}
        for s in ctx.senders:
            per = PerReceiver()
            for r in ctx.receivers:
                b = bundles[ctx.meta["index"](r) - 1]
                w = list(b.witness)
                if w:
                    w[0] = bytes([w[0][0] ^ 1]) + w[0][1:]
                per[r] = ShareBundle(b.root, b.index, b.share, tuple(w))
            out[s] = per
        return out


class SecondRoot(Adversary):
    """Corrupted senders deliver a valid encoding of a different message."""

    name = "second-root"

    def messages(self, ctx):
        if ctx.kind != "bundle":
            return {}
        bundles = make_bundles(self.params["message"], ctx.meta["n_shares"])
        return {s: PerReceiver({r: bundles[ctx.meta["index"](r) - 1] for r in ctx.receivers})
                for s in ctx.senders}


def run(gen, net, bound):
    return drive(net, gen, bound)


def test_honest_sender_shares_decode():
    A, B = (0,), tuple(range(1, 8))
    net = Network(8)
    ch = GroupChannel(A, B, 64)
    m = "1101" * 10
    held = drive(net, send_shares(net, "s", ch, {0: m}), 1)
    assert net.round == 1
    assert all(len(held[r]) == 1 for r in B)
    shares = {held[r][0].index: held[r][0].share for r in B}
    cfg = RSConfig(7)
    for sub in combinations(sorted(shares), 4):
        assert rs_decode({i: shares[i] for i in sub}, cfg, 64) == m


def test_silent_sender_gives_nothing():
    net = Network(5)
    held = drive(net, send_shares(net, "s", GroupChannel((0,), (1, 2, 3, 4), 16), {}), 1)
    assert all(v == [] for v in held.values())


def test_corrupted_witness_is_filtered():
    net = Network(6, adversary=TamperedWitness([0], message="1" * 20), budget=1)
    held = drive(net, send_shares(net, "s", GroupChannel((0,), (1, 2, 3, 4, 5), 32), {}), 1)
    assert all(v == [] for v in held.values())


def test_overlong_message_is_not_sent():
    net = Network(5)
    held = drive(net, send_shares(net, "s", GroupChannel((0,), (1, 2, 3, 4), 8), {0: "1" * 9}), 1)
    assert all(v == [] for v in held.values())


def test_reconstruct_returns_common_message():
    B = tuple(range(7))
    m = "0111" * 25
    bundles = make_bundles(m, 7)
    ch = GroupChannel(B, B, 100)
    net = Network(7)
    out, roots = drive(net, reconstruct_from_shares(net, "r", ch, {r: [bundles[r]] for r in B}),
                       reconstruct_rounds(7))
    assert set(out.values()) == {m}
    assert net.round == reconstruct_rounds(7)


def test_reconstruct_without_bundles_gives_bot():
    B = tuple(range(4))
    net = Network(4)
    out, roots = drive(net, reconstruct_from_shares(net, "r", GroupChannel(B, B, 8), {}), reconstruct_rounds(4))
    assert set(out.values()) == {None}
    assert set(roots.values()) == {bytes(32)}


def test_plurality_prefers_least_root_on_ties():
    a = make_bundles("1" * 8, 4)[0]
    b = make_bundles("0" * 8, 4)[0]
    assert _plurality([a, b]).root == min(a.root, b.root)
    assert _plurality([a, b, b]) == b
    assert _plurality([]) is None


def test_single_honest_sender_delivers():
    A, B = (0,), (1, 2, 3, 4)
    net = Network(5)
    m = "10" * 30
    out = drive(net, supersend(net, "ss", GroupChannel(A, B, 64), {0: m}), supersend_rounds(4))
    assert set(out.values()) == {m}
    assert net.round == supersend_rounds(4)


def test_honest_majority_senders_deliver_despite_corruption():
    A, B = (0, 1, 2, 3, 4), tuple(range(5, 12))
    m = "0011" * 16
    for name in ADVERSARIES:
        corrupt = [] if name == "adaptive-largest-supernode" else [0, 1, 6, 9]
        net = Network(12, seed=3, adversary=make_adversary(name, corrupt), budget=4)
        net.context["extreme_values"] = ["1" * 64, m]
        out = drive(net, supersend(net, "ss", GroupChannel(A, B, 64), {a: m for a in A}), supersend_rounds(7))
        honest_b = [b for b in B if net.is_honest(b)]
        bad_b = len(B) - len(honest_b)
        if 3 * bad_b < len(B) and 2 * sum(1 for a in A if not net.is_honest(a)) < len(A):
            assert all(out[b] == m for b in honest_b), name
        bits, _ = account(net.transcript(), "ss")
        assert bits <= supersend_cap(5, 7, 64)


def test_byzantine_majority_senders_give_one_value_or_bot():
    A, B = (0, 1, 2), tuple(range(3, 10))
    m, other = "1" * 40, "01" * 20
    for seed in range(20):
        net = Network(10, seed=seed, adversary=SecondRoot([0, 1], message=other), budget=2)
        out = drive(net, supersend(net, "ss", GroupChannel(A, B, 40), {a: m for a in A}), supersend_rounds(7))
        vals = {out[b] for b in B} - {None}
        assert len(vals) <= 1
        bits, _ = account(net.transcript(), "ss")
        assert bits <= supersend_cap(3, 7, 40)


def test_injected_second_root_keeps_receivers_consistent():
    B = tuple(range(7))
    m, other = "1" * 50, "0" * 50
    good, bad = make_bundles(m, 7), make_bundles(other, 7)
    held = {r: [good[r]] + ([bad[r]] if r in (1, 2) else []) for r in B}
    net = Network(7, adversary=make_adversary("equivocate-in-supersend", [5, 6]), budget=2)
    net.context["extreme_values"] = [other, m]
    out, _ = drive(net, reconstruct_from_shares(net, "r", GroupChannel(B, B, 50), held), reconstruct_rounds(7))
    assert {out[r] for r in net.honest_parties()} <= {m, None}
    assert len({out[r] for r in net.honest_parties()}) == 1


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 5), st.integers(1, 7), st.text("01", min_size=1, max_size=120),
       st.sampled_from(sorted(ADVERSARIES)), st.integers(0, 1000), st.data())
def test_caps_and_output_agreement(na, nb, m, name, seed, data):
    n = na + nb
    A, B = tuple(range(na)), tuple(range(na, n))
    budget = data.draw(st.integers(0, n - 1))
    corrupt = [] if name == "adaptive-largest-supernode" else data.draw(
        st.lists(st.integers(0, n - 1), min_size=budget, max_size=budget, unique=True))
    net = Network(n, seed=seed, adversary=make_adversary(name, corrupt), budget=budget)
    net.context["extreme_values"] = [m, "1" * 120]
    out = drive(net, supersend(net, "ss", GroupChannel(A, B, 120), {a: m for a in A}), supersend_rounds(nb))
    assert net.round == supersend_rounds(nb)
    bits, _ = account(net.transcript(), "ss")
    assert bits <= supersend_cap(na, nb, 120)
    honest_b = [b for b in B if net.is_honest(b)]
    if 3 * (nb - len(honest_b)) < nb:
        assert len({out[b] for b in honest_b} - {None}) <= 1
        if 2 * sum(1 for a in A if not net.is_honest(a)) < na:
            assert all(out[b] == m for b in honest_b)
