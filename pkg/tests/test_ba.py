import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from convexagree import oracles
from convexagree.ba import BAInstance, ba_rounds, ba_run, binary_phase_king, bytes_size, fault_bound
from convexagree.simnet import ADVERSARIES, Network, account, drive, make_adversary


def run_ba(size, ins, adversary="none", corrupt=(), seed=0, L=8, multivalued=True, owner=None, n=None):
    roster = tuple(ins)
    inst = BAInstance(roster, L, multivalued=multivalued, owner=owner)
    net = Network(n or size, seed=seed, adversary=make_adversary(adversary, corrupt), budget=len(corrupt))
    gen = ba_run(net, "ba", inst, ins, default="0") if multivalued else binary_phase_king(net, "ba", inst, ins)
    out = drive(net, gen, inst.rounds)
    return net, inst, out


def test_round_counts():
    assert [fault_bound(s) for s in (1, 3, 4, 7, 10)] == [0, 0, 1, 2, 3]
    assert ba_rounds(4, multivalued=False) == 6
    assert ba_rounds(7) == 3 * 3 + 2
    assert len(BAInstance(tuple(range(10)), 5).schedule()) == ba_rounds(10)


@pytest.mark.parametrize("size", [1, 4, 7, 10])
def test_unanimous_input_is_returned(size):
    _, _, out = run_ba(size, {p: "1101" for p in range(size)})
    assert set(out.values()) == {"1101"}
    _, _, out = run_ba(size, {p: 1 for p in range(size)}, multivalued=False)
    assert set(out.values()) == {1}


def test_seven_members_two_equivocators_agree():
    for seed in range(1000):
        rng = np.random.default_rng(seed)
        ins = {p: ["0110", "111"][int(rng.integers(0, 2))] for p in range(7)}
        corrupt = sorted(int(x) for x in rng.choice(7, 2, replace=False))
        name = "equivocate-in-supersend" if seed % 2 else "random-bits"
        net, inst, out = run_ba(7, ins, name, corrupt, seed=seed)
        honest = net.honest_parties()
        assert oracles.agreement_holds(out, honest)
        assert net.round == inst.rounds


def test_extra_corruptions_still_halt_within_cap():
    for name in ADVERSARIES:
        for seed in range(30):
            ins = {p: ["1", "0"][p % 2] for p in range(4)}
            corrupt = [] if name == "adaptive-largest-supernode" else [seed % 4, (seed + 1) % 4]
            inst = BAInstance(tuple(range(4)), 8)
            net = Network(4, seed=seed, adversary=make_adversary(name, corrupt), budget=2)
            out = drive(net, ba_run(net, "ba", inst, ins, default="0"), inst.rounds)
            assert net.round == inst.rounds
            assert all(p in out for p in net.honest_parties())
            bits, _ = account(net.transcript(), "ba")
            assert bits <= inst.cap_bits()


def test_oversized_inputs_fall_back_to_default():
    _, _, out = run_ba(4, {p: "1" * 9 for p in range(4)}, L=8)
    assert set(out.values()) == {"0"}


def test_bytes_domain():
    inst = BAInstance(tuple(range(4)), 256)
    net = Network(4)
    root = bytes(range(32))
    out = drive(net, ba_run(net, "ba", inst, {p: root for p in range(4)}, default=bytes(32), size=bytes_size),
                inst.rounds)
    assert set(out.values()) == {root}


def test_virtual_members_of_one_party_act_independently():
    # Party 0 backs two of nine virtual members; the other seven are honest parties.
    roster = tuple(("v", i) for i in range(9))
    owner = {("v", i): (0 if i < 2 else i - 1) for i in range(9)}
    ins = {v: "11" for v in roster}
    inst = BAInstance(roster, 8, owner=owner)
    honest_net = Network(8)
    out = drive(honest_net, ba_run(honest_net, "ba", inst, ins, default="0"), inst.rounds)
    assert set(out.values()) == {"11"} and len(out) == 9
    # Messages between members owned by the same party are free.
    assert inst.cap_bits() < BAInstance(tuple(range(9)), 8).cap_bits()
    net = Network(8, adversary=make_adversary("equivocate-in-supersend", [0]), budget=1)
    out = drive(net, ba_run(net, "ba", inst, ins, default="0"), inst.rounds)
    assert set(out.values()) == {"11"} and len(out) == 7
    assert net.bits["ba"] + net.bits["ba/bit"] <= inst.cap_bits()


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 12), st.integers(1, 64), st.booleans())
def test_schedule_is_fixed_by_roster_and_length(size, L, mv):
    a = BAInstance(tuple(range(size)), L, mv)
    b = BAInstance(tuple(range(size)), L, mv)
    assert a.schedule() == b.schedule()
    assert a.cap_bits() == b.cap_bits()
    assert len(a.schedule()) == a.rounds


@settings(max_examples=60, deadline=None)
@given(st.sampled_from([4, 7, 10]), st.sampled_from(sorted(ADVERSARIES)), st.integers(0, 10 ** 6), st.data())
def test_agreement_and_validity_within_resilience(size, name, seed, data):
    t = fault_bound(size)
    corrupt = [] if name == "adaptive-largest-supernode" else data.draw(
        st.lists(st.integers(0, size - 1), min_size=t, max_size=t, unique=True))
    ins = {p: data.draw(st.sampled_from(["01", "1", "0011"])) for p in range(size)}
    inst = BAInstance(tuple(range(size)), 8)
    net = Network(size, seed=seed, adversary=make_adversary(name, corrupt), budget=t)
    out = drive(net, ba_run(net, "ba", inst, ins, default="0"), inst.rounds)
    honest = net.honest_parties()
    assert oracles.agreement_holds(out, honest)
    hin = {ins[p] for p in honest}
    if len(hin) == 1:
        assert out[honest[0]] == hin.pop()
    bits, _ = account(net.transcript(), "ba")
    assert bits <= inst.cap_bits()
