"""End-to-end acceptance checks, one test (or pair) per criterion.

Each test prints a PASS/FAIL line and records it for the terminal summary.
"""
import functools
import math
import random
import time
from fractions import Fraction

from conftest import record_criterion

from convexagree import oracles, suites
from convexagree.convexity import EuclideanRational
from convexagree.harness import bundled_assignments, load_scenario, run_scenario, scaling_report
from convexagree.protocol import ProtocolConfig, ca_unknown_L, exponential_search, to_wire, unknown_L_rounds
from convexagree.simnet import ADVERSARIES, Network, drive, make_adversary

ADVS = [a for a in ADVERSARIES if a != "adaptive-largest-supernode"]


def _report(capsys, number, part, ok, detail):
    record_criterion(number, part, ok, detail)
    with capsys.disabled():
        print(f"\ncriterion {number} [{part}]: {'PASS' if ok else 'FAIL'} ({detail})")


def _suite(capsys, number, res, limit):
    ok = res.ok and res.seconds < limit
    _report(capsys, number, res.name, ok, f"{res.checked} checks, {len(res.failures)} failures, "
                                          f"{res.seconds:.1f}s of {limit}s")
    assert res.ok, res.failures[:5]
    assert res.seconds < limit


def test_1_safe_area_oracle(capsys):
    _suite(capsys, 1, suites.verify_safe_area(max_size=8, box=(4, 4), max_m=7), 120)


def test_2_extractor_certification(capsys):
    _suite(capsys, 2, suites.verify_extractor(bundled_assignments(), raw_max_n=14, samples=10_000), 300)


def test_3_committee_bound(capsys):
    _suite(capsys, 3, suites.verify_committees(ns=(32, 48), samples=100_000), 600)


def test_4_erasure(capsys):
    _suite(capsys, 4, suites.verify_erasure(trials=1000, tamper=1000, max_subset_n=9), 120)


def test_5_ba_contracts(capsys):
    _suite(capsys, 5, suites.verify_ba(sizes=(4, 7, 10), seeds=200), 600)


def test_6_supersend(capsys):
    _suite(capsys, 6, suites.verify_supersend(seeds=500), 600)


@functools.lru_cache(maxsize=None)
def _fixed_L_runs():
    """75 seeds at each of n = 9, 18, 27 on the 1D grid and 75 on the two-factor product."""
    start = time.time()
    records = []
    for name in ("fixedL-grid-adversarial", "fixedL-product"):
        records += run_scenario(load_scenario(name), seeds=list(range(75)), workers=1)["records"]
    return records, time.time() - start


def test_7_end_to_end_fixed_L(capsys):
    records, elapsed = _fixed_L_runs()
    keys = ("termination", "agreement", "validity", "audits", "default_path")
    bad = [(r["config"]["scenario"], r["point"]["n"], r["seed"], k)
           for r in records for k in keys if not r["checks"][k]]
    counts = {}
    for r in records:
        label = "product" if r["config"]["scenario"] == "fixedL-product" else f"n={r['point']['n']}"
        counts[label] = counts.get(label, 0) + 1
    ok = len(records) == 300 and not bad and elapsed < 1200
    _report(capsys, 7, "fixed-L runs", ok, f"{len(records)} runs {counts}, {len(bad)} violations, {elapsed:.0f}s")
    assert len(records) == 300
    assert not bad, bad[:5]
    assert elapsed < 1200


def test_7_audit_B_with_ceiling_threshold(capsys):
    """Audit (B) again, classifying a supernode byzantine once ceil(size * fraction) members are corrupt."""
    records, _ = _fixed_L_runs()
    eps = Fraction(1)
    audits = 0
    failing = 0
    for r in records:
        for a in r["audits"]:
            audits += 1
            size = sum(a["literal_classes"].values())
            bad = size - a["literal_classes"].get("good", 0)
            if bad * (2 + eps) > size:
                failing += 1
    ok = failing == 0
    _report(capsys, 7, "audit B, ceiling threshold", ok, f"{failing} of {audits} iteration audits exceed 1/(omega+eps)")
    assert failing == 0


def test_8_bits_affine_in_L(capsys):
    start = time.time()
    rep = run_scenario(load_scenario("fixedL-n32-sweep"), workers=1)
    fit = scaling_report(rep["records"], "L")
    elapsed = time.time() - start
    slope = fit["affine_bits"]["slope"]
    c = slope / (32 * math.log2(32))
    ok = fit["affine_bits"]["r2"] >= 0.99 and fit["ratio_max_min"] <= 3 and elapsed < 1800
    _report(capsys, 8, "bits vs L at n=32", ok,
            f"r2={fit['affine_bits']['r2']:.4f}, slope={slope:.0f} bits per L bit = {c:.0f} n log n, "
            f"intercept={fit['affine_bits']['intercept']:.4g}, normalized={[round(x) for x in fit['normalized']]}, "
            f"max/min={fit['ratio_max_min']:.2f} (limit 3), {elapsed:.0f}s")
    assert fit["affine_bits"]["r2"] >= 0.99
    assert fit["ratio_max_min"] <= 3


def test_8_rounds_linear_in_n(capsys):
    start = time.time()
    rep = run_scenario(load_scenario("fixedL-n-sweep"), workers=1)
    fit = scaling_report(rep["records"], "n")
    elapsed = time.time() - start
    r2 = fit["rounds_linear"]["r2"]
    rounds = [int(p["rounds"]) for p in fit["points"]]
    ok = r2 >= 0.95 and rep["passed"] and elapsed < 1800
    _report(capsys, 8, "rounds vs n at L=4096", ok,
            f"rounds={rounds} for n={[p['n'] for p in fit['points']]}, R2={r2:.4f} (limit 0.95), "
            f"L n^2 coefficient={fit['ln2_coefficient']}, {elapsed:.0f}s")
    assert rep["passed"], rep["failures"][:3]
    assert r2 >= 0.95


def _follower_bits(byz_value, seed=3):
    e1 = EuclideanRational(1)
    n, t = 10, 2
    inputs = {p: (Fraction(p - 4, 3),) for p in range(n)}
    inputs[8] = inputs[9] = byz_value
    cfg = ProtocolConfig(n, t, e1)
    net = Network(n, seed=seed, adversary=make_adversary("follower", [8, 9]), budget=t)
    out = drive(net, ca_unknown_L(net, "ca", cfg, inputs), unknown_L_rounds(n, cfg))
    h = net.honest_parties()
    valid = oracles.agreement_holds(out, h) and oracles.convex_valid(e1, out, [inputs[p] for p in h], h)
    honest_len = max(len(to_wire(e1, inputs[p])) for p in h)
    bits = sum(b for k, b in net.bits.items() if not k.startswith("ca/length"))
    return valid, bits, net.context["L_tilde"], honest_len


def test_9_unknown_length(capsys):
    start = time.time()
    n = 10
    violations = 0
    for seed in range(200):
        rng = random.Random(seed)
        corrupt = rng.sample(range(n), 2)
        L_in = {p: rng.randint(1, n * n) for p in range(n)}
        net = Network(n, seed=seed, adversary=make_adversary(ADVS[seed % len(ADVS)], corrupt), budget=2)
        net.context["extreme_values"] = ["1" * 8]
        out = drive(net, exponential_search(net, "es", tuple(range(n)), L_in))
        h = net.honest_parties()
        got = {out[p] for p in h}
        lo, hi = min(L_in[p] for p in h), max(L_in[p] for p in h)
        if len(got) != 1 or not lo <= next(iter(got)) < 2 * hi:
            violations += 1
    long_value = (Fraction(2 ** 50_000),)
    short_value = (Fraction(2 ** 30),)
    assert len(to_wire(EuclideanRational(1), short_value)) <= 64
    v_long, b_long, Lt_long, honest_len = _follower_bits(long_value)
    v_short, b_short, Lt_short, _ = _follower_bits(short_value)
    elapsed = time.time() - start
    ok = violations == 0 and v_long and v_short and b_long == b_short and Lt_long <= 2 * honest_len and elapsed < 600
    _report(capsys, 9, "unknown L", ok,
            f"exponential search violations {violations}/200; follower input "
            f"{len(to_wire(EuclideanRational(1), long_value))} vs "
            f"{len(to_wire(EuclideanRational(1), short_value))} bits: honest bits {b_long} vs {b_short}, "
            f"L~={Lt_long} (honest max {honest_len}), {elapsed:.0f}s")
    assert violations == 0
    assert v_long and v_short
    assert b_long == b_short
    assert Lt_long <= 2 * honest_len


def test_10_dilation(capsys):
    res = suites.verify_dilation(instances=500)
    _suite(capsys, 10, res, 300)
