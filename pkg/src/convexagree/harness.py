"""Scenario runner, scaling reports and the command line interface."""

from __future__ import annotations

import ast
import csv
import hashlib
import json
import math
import operator
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Any, Optional

import click
import numpy as np
from scipy.optimize import nnls

from . import oracles
from .convexity import (
    ConvexSpace,
    EuclideanRational,
    FiniteExplicit,
    GridBox,
    Grid1D,
    InputError,
    ProductSpace,
    format_value,
    parse_value,
    space_from_spec,
)
from .protocol import (
    ProtocolConfig,
    ca_fixed_L,
    ca_unknown_L,
    fixed_L_assignments,
    fixed_L_rounds,
    iteration_audit,
    to_wire,
    unknown_L_assignments,
    unknown_L_rounds,
)
from .simnet import ADVERSARIES, Network, RunFailed, drive, make_adversary

SCHEMA_VERSION = 1
WORKERS_ENV = "CONVEXAGREE_WORKERS"
PROTOCOLS = ("fixed-L", "unknown-L")
DEFAULT_EXPECT = ("termination", "agreement", "validity")
KAPPA = 256
# Values with longer encodings are written to records as a size and digest.
SHOW_LIMIT_BITS = 4096


class ScenarioError(ValueError):
    """A scenario file that cannot be parsed or is inconsistent."""


# -- small arithmetic for scenario fields ------------------------------------------

_OPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
        ast.FloorDiv: operator.floordiv, ast.Pow: operator.pow, ast.Mod: operator.mod}


def resolve(expr, env: dict) -> int:
    """Evaluate an integer field such as ``"2^L"`` or ``"(n-1)//3"``."""
    if isinstance(expr, bool):
        raise ScenarioError(f"expected an integer expression, got {expr!r}")
    if isinstance(expr, int):
        return expr
    if not isinstance(expr, str):
        raise ScenarioError(f"expected an integer expression, got {expr!r}")
    try:
        tree = ast.parse(expr.replace("^", "**"), mode="eval")
    except SyntaxError as exc:
        raise ScenarioError(f"bad expression {expr!r}") from exc

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, int):
            return node.value
        if isinstance(node, ast.Name):
            if node.id not in env:
                raise ScenarioError(f"unknown name {node.id!r} in {expr!r}")
            return env[node.id]
        if isinstance(node, ast.BinOp) and type(node.op) in _OPS:
            return _OPS[type(node.op)](ev(node.left), ev(node.right))
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, ast.USub):
            return -ev(node.operand)
        raise ScenarioError(f"unsupported syntax in {expr!r}")

    return int(ev(tree))


def parse_seeds(text) -> list[int]:
    """``"a..b"`` (inclusive), a single integer, or a list."""
    if isinstance(text, list):
        return [int(x) for x in text]
    if isinstance(text, int):
        return [text]
    try:
        if ".." in text:
            a, b = text.split("..")
            return list(range(int(a), int(b) + 1))
        return [int(text)]
    except ValueError as exc:
        raise ScenarioError(f"bad seed range {text!r}") from exc


# -- scenarios --------------------------------------------------------------------------

@dataclass
class Scenario:
    name: str
    protocol: str
    space: dict
    n: Any
    t: Any
    eps: Fraction
    L: Any
    inputs: dict
    adversary: list
    corrupt: Any
    adversary_params: dict
    seeds: list
    sweep: Optional[tuple] = None
    byzantine_inputs: Optional[dict] = None
    expect: dict = field(default_factory=dict)
    base_dir: str = "."

    def points(self) -> list[dict]:
        if self.sweep is None:
            return [{}]
        axis, values = self.sweep
        return [{axis: v} for v in values]


def bundled_scenarios() -> dict[str, Path]:
    root = resources.files("convexagree") / "scenarios"
    return {Path(str(p)).stem: Path(str(p)) for p in root.iterdir() if str(p).endswith(".json")}


def parse_scenario(obj, base_dir: str = ".") -> Scenario:
    if not isinstance(obj, dict):
        raise ScenarioError("scenario must be a JSON object")
    if obj.get("schema") != SCHEMA_VERSION:
        raise ScenarioError(f"unsupported schema {obj.get('schema')!r}; expected {SCHEMA_VERSION}")
    try:
        protocol = obj["protocol"]
        if protocol not in PROTOCOLS:
            raise ScenarioError(f"unknown protocol {protocol!r}")
        adv = obj.get("adversary", {"name": "none"})
        names = adv.get("name", "none")
        names = [names] if isinstance(names, str) else list(names)
        for a in names:
            if a not in ADVERSARIES:
                raise ScenarioError(f"unknown adversary {a!r}")
        sweep = obj.get("sweep")
        if sweep is not None:
            sweep = (sweep["axis"], [int(v) for v in sweep["values"]])
            if sweep[0] not in ("n", "L"):
                raise ScenarioError("sweep axis must be n or L")
        expect = obj.get("expect", {c: True for c in DEFAULT_EXPECT})
        if isinstance(expect, list):
            expect = {c: True for c in expect}
        sc = Scenario(
            name=str(obj.get("name", "scenario")),
            protocol=protocol,
            space=dict(obj["space"]),
            n=obj["n"],
            t=obj.get("t", 0),
            eps=Fraction(str(obj.get("eps", "1"))),
            L=obj.get("L"),
            inputs=dict(obj["inputs"]),
            adversary=names,
            corrupt=adv.get("corrupt", "last"),
            adversary_params=dict(adv.get("params", {})),
            seeds=parse_seeds(obj.get("seeds", "0..0")),
            sweep=sweep,
            byzantine_inputs=obj.get("byzantine_inputs"),
            expect=dict(expect),
            base_dir=base_dir,
        )
    except (KeyError, TypeError, AttributeError) as exc:
        raise ScenarioError(f"malformed scenario: missing or invalid field {exc}") from exc
    if protocol == "fixed-L" and sc.L is None:
        raise ScenarioError("fixed-L scenarios need L")
    if sc.eps <= 0:
        raise ScenarioError("eps must be positive")
    return sc


def load_scenario(ref: str) -> Scenario:
    """Load a scenario file, or a bundled scenario by name."""
    path = Path(ref)
    if not path.exists():
        bundled = bundled_scenarios()
        if ref not in bundled:
            raise ScenarioError(f"no scenario file or bundled scenario named {ref!r}")
        path = bundled[ref]
    try:
        obj = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ScenarioError(f"cannot read {path}: {exc}") from exc
    return parse_scenario(obj, str(path.parent))


# -- inputs ---------------------------------------------------------------------------

def _space_for(sc: Scenario, env: dict) -> ConvexSpace:
    spec = json.loads(json.dumps(sc.space))

    def fix(s):
        if "size" in s:
            s["size"] = resolve(s["size"], env)
        if "sizes" in s:
            s["sizes"] = [resolve(x, env) for x in s["sizes"]]
        for f in s.get("factors", ()):
            fix(f)

    fix(spec)
    try:
        return space_from_spec(spec, sc.base_dir)
    except (InputError, KeyError, ValueError) as exc:
        raise ScenarioError(f"bad space: {exc}") from exc


def _big_below(rng: np.random.Generator, bound: int) -> int:
    """Uniform integer in [0, bound) for bounds beyond 64 bits."""
    if bound <= 1 << 62:
        return int(rng.integers(0, bound))
    nbytes = (bound.bit_length() + 7) // 8 + 8
    return int.from_bytes(rng.bytes(nbytes), "little") % bound


def _random_element(space: ConvexSpace, rng: np.random.Generator, spec: dict, env: dict):
    if isinstance(space, Grid1D):
        lo = resolve(spec.get("low", 0), env)
        hi = resolve(spec.get("high", space.size - 1), env)
        return lo + _big_below(rng, hi - lo + 1)
    if isinstance(space, GridBox):
        return tuple(int(rng.integers(0, s)) for s in space.sizes)
    if isinstance(space, EuclideanRational):
        lo = resolve(spec.get("low", -100), env)
        hi = resolve(spec.get("high", 100), env)
        den = resolve(spec.get("den", 8), env)
        return tuple(Fraction(int(rng.integers(lo, hi + 1)), int(rng.integers(1, den + 1))) for _ in range(space.d))
    if isinstance(space, FiniteExplicit):
        return space.labels[int(rng.integers(0, len(space.labels)))]
    if isinstance(space, ProductSpace):
        return tuple(_random_element(f, rng, {}, env) for f in space.factors)
    raise ScenarioError(f"no random inputs for {space!r}")


def _long_element(space: ConvexSpace, bits: int):
    """An element whose plain encoding has roughly ``bits`` bits."""
    if not isinstance(space, EuclideanRational):
        raise ScenarioError("long inputs are only available in Euclidean spaces")
    per = max(2, bits // (2 * space.d))
    return tuple(Fraction(2 ** (per - 1)) for _ in range(space.d))


def make_inputs(space: ConvexSpace, spec: dict, n: int, seed: int, env: dict) -> dict:
    kind = spec.get("kind")
    rng = np.random.Generator(np.random.Philox(key=[seed, 0x1A9]))
    try:
        if kind == "constant":
            v = parse_value(space, spec["value"])
            return {p: v for p in range(n)}
        if kind == "explicit":
            vals = spec["values"]
            if isinstance(vals, dict):
                return {int(p): parse_value(space, v) for p, v in vals.items()}
            return {p: parse_value(space, vals[p]) for p in range(n)}
        if kind == "spread":
            base, step = resolve(spec["base"], env), resolve(spec.get("step", 1), env)
            return {p: base + p * step for p in range(n)}
        if kind == "random":
            return {p: _random_element(space, rng, spec, env) for p in range(n)}
        if kind == "long":
            return {p: _long_element(space, resolve(spec["bits"], env)) for p in range(n)}
    except (KeyError, IndexError, TypeError, ValueError) as exc:
        raise ScenarioError(f"bad inputs: {exc}") from exc
    raise ScenarioError(f"unknown input kind {kind!r}")


def _corrupt_list(spec, n: int, t: int, seed: int) -> list[int]:
    if isinstance(spec, list):
        return [int(p) for p in spec]
    if spec == "last":
        return list(range(n - t, n))
    if spec == "first":
        return list(range(t))
    if spec == "random":
        rng = np.random.Generator(np.random.Philox(key=[seed, 0xC0]))
        return sorted(int(x) for x in rng.choice(n, t, replace=False))
    raise ScenarioError(f"bad corrupt set {spec!r}")


def extreme_values(space: ConvexSpace) -> list[str]:
    """Wire encodings of far-apart elements, offered to forging adversaries."""
    if isinstance(space, EuclideanRational):
        pts = [tuple(Fraction(s * 10 ** 6) for _ in range(space.d)) for s in (-1, 1)]
    elif isinstance(space, Grid1D):
        pts = [0, space.size - 1]
    elif isinstance(space, GridBox):
        pts = [space.minimum(), tuple(s - 1 for s in space.sizes)]
    elif isinstance(space, FiniteExplicit):
        pts = [space.labels[0], space.labels[-1]]
    elif isinstance(space, ProductSpace):
        lo = space.minimum()
        hi = tuple(f.elements()[-1] for f in space.factors)
        pts = [lo, hi]
    else:
        return []
    return [to_wire(space, p) for p in pts]


# -- single run ---------------------------------------------------------------------

def _env(sc: Scenario, point: dict) -> dict:
    env = {}
    if "L" in point:
        env["L"] = point["L"]
    elif isinstance(sc.L, int):
        env["L"] = sc.L
    env["n"] = point["n"] if "n" in point else resolve(sc.n, env)
    if "L" not in env and sc.L is not None:
        env["L"] = resolve(sc.L, env)
    env["t"] = resolve(sc.t, env)
    return env


def _phase_bits(bits: dict, depth: int = 2) -> dict:
    out: dict = {}
    for tag, b in bits.items():
        key = "/".join(tag.split("/")[:depth])
        out[key] = out.get(key, 0) + b
    return dict(sorted(out.items()))


def _jsonable_audit(a: dict) -> dict:
    return {k: (dict(v) if hasattr(v, "items") else v) for k, v in a.items()}


def show_value(space: ConvexSpace, v):
    """JSON form of an element; huge values are summarized by size and digest."""
    enc = space.encode(v)
    if len(enc) <= SHOW_LIMIT_BITS:
        return format_value(space, v)
    return {"encoded_bits": len(enc), "sha256": hashlib.sha256(enc.encode()).hexdigest()}


def run_one(sc: Scenario, seed: int, point: Optional[dict] = None) -> dict:
    """Execute one seed of a scenario and return its run record."""
    point = point or {}
    env = _env(sc, point)
    n, t = env["n"], env["t"]
    space = _space_for(sc, env)
    L = env.get("L")
    cfg = ProtocolConfig(n, t, space, sc.eps, L if sc.protocol == "fixed-L" else None)
    inputs = make_inputs(space, sc.inputs, n, seed, env)
    name = sc.adversary[seed % len(sc.adversary)]
    adaptive = name == "adaptive-largest-supernode"
    corrupt = [] if adaptive else _corrupt_list(sc.corrupt, n, t, seed)
    if sc.byzantine_inputs is not None:
        byz = make_inputs(space, sc.byzantine_inputs, n, seed, env)
        for p in corrupt:
            if p in byz:
                inputs[p] = byz[p]
    adv = make_adversary(name, corrupt, **sc.adversary_params)
    config = {"scenario": sc.name, "protocol": sc.protocol, "n": n, "t": t, "L": L, "eps": str(sc.eps),
              "space": sc.space, "adversary": name, "seed": seed, "point": point}
    net = Network(n, seed=seed, adversary=adv, budget=t, config=config)
    net.context["extreme_values"] = extreme_values(space)

    def audit(net, cfg, sn, i, Lc):
        honest_in = [inputs[p] for p in net.honest_parties()]
        net.audits.append(_jsonable_audit(iteration_audit(net, cfg, sn, i, Lc, honest_in)))

    net.context["audit"] = audit
    if sc.protocol == "fixed-L":
        bound = fixed_L_rounds(n, cfg)
        gen = ca_fixed_L(net, "ca", cfg, inputs)
    else:
        bound = unknown_L_rounds(n, cfg)
        gen = ca_unknown_L(net, "ca", cfg, inputs)
    failure = None
    try:
        outputs = drive(net, gen, bound)
    except RunFailed as exc:
        outputs, failure = {}, str(exc)
    honest = net.honest_parties()
    honest_inputs = [inputs[p] for p in honest]
    checks = {
        "termination": failure is None and all(p in outputs for p in honest) and net.round <= bound,
        "agreement": oracles.agreement_holds(outputs, honest),
        "validity": failure is None and oracles.convex_valid(space, outputs, honest_inputs, honest),
        "audits": all(all(a[c] for c in "ABCDE") and a["split_free"] for a in net.audits),
        "default_path": not any(f["flag"] == "default-path" for f in net.flags),
    }
    if "output" in sc.expect and outputs:
        want = parse_value(space, sc.expect["output"])
        checks["output"] = all(outputs.get(p) == want for p in honest)
    return {
        "config": config,
        "point": {"n": n, "L": L, **point},
        "seed": seed,
        "inputs": {str(p): show_value(space, v) for p, v in sorted(inputs.items())},
        "corrupt": sorted(net.corrupt),
        "outputs": {str(p): show_value(space, outputs[p]) for p in honest if p in outputs},
        "phases": _phase_bits(net.bits),
        "total_bits": sum(net.bits.values()),
        "rounds": net.round,
        "round_bound": bound,
        "audits": net.audits,
        "flags": net.flags,
        "checks": checks,
        "failure": failure,
    }


def _run_job(args):
    sc, seed, point = args
    return run_one(sc, seed, point)


def workers_from_env() -> int:
    raw = os.environ.get(WORKERS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise ScenarioError(f"{WORKERS_ENV} must be an integer, got {raw!r}") from None


def first_failure(sc: Scenario, record: dict) -> Optional[str]:
    for check, wanted in sc.expect.items():
        if not wanted:
            continue
        if check not in record["checks"]:
            raise ScenarioError(f"unknown expected contract {check!r}")
        if not record["checks"][check]:
            return (f"{sc.name} seed={record['seed']} point={record['point']}: "
                    f"{check} violated" + (f" ({record['failure']})" if record["failure"] else ""))
    return None


def run_scenario(sc: Scenario, seeds: Optional[list] = None, out: Optional[str] = None,
                 workers: Optional[int] = None) -> dict:
    """Run every (point, seed) of ``sc``; records come back in point then seed order."""
    seeds = sc.seeds if seeds is None else seeds
    jobs = [(sc, s, p) for p in sc.points() for s in seeds]
    workers = workers_from_env() if workers is None else workers
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(_run_job, jobs))
    else:
        records = [_run_job(j) for j in jobs]
    failures = [f for f in (first_failure(sc, r) for r in records) if f]
    report = {"scenario": sc.name, "schema": SCHEMA_VERSION, "runs": len(records),
              "passed": not failures, "failures": failures,
              "table": [{"n": r["point"]["n"], "L": r["point"]["L"], "seed": r["seed"],
                         "bits": r["total_bits"], "rounds": r["rounds"]} for r in records]}
    if out is not None:
        write_records(out, sc.name, records, report)
    report["records"] = records
    return report


def _label(point: dict) -> str:
    return "-".join(f"{k}{point[k]}" for k in sorted(point) if point[k] is not None)


def write_records(out: str, name: str, records: list, report: dict) -> None:
    d = Path(out)
    d.mkdir(parents=True, exist_ok=True)
    for r in records:
        path = d / f"run-{name}-{_label(r['point'])}-s{r['seed']}.json"
        path.write_text(json.dumps(r, sort_keys=True, default=str, indent=1))
    with open(d / "metrics.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["scenario", "n", "L", "seed", "total_bits", "rounds", "round_bound",
                    "termination", "agreement", "validity", "audits"])
        for r in records:
            c = r["checks"]
            w.writerow([name, r["point"]["n"], r["point"]["L"], r["seed"], r["total_bits"], r["rounds"],
                        r["round_bound"], c["termination"], c["agreement"], c["validity"], c["audits"]])
    (d / "report.json").write_text(json.dumps(report, sort_keys=True, indent=1))


def load_records(directory: str) -> list[dict]:
    paths = sorted(Path(directory).glob("run-*.json"))
    return [json.loads(p.read_text()) for p in paths]


# -- scaling ------------------------------------------------------------------------

TERMS = ("L n log n", "n^2 log n", "L n^2")


def _terms(n: float, L: float) -> list[float]:
    lg = math.log2(n)
    return [L * n * lg, n * n * lg, L * n * n]


def _linear_fit(x: list, y: list) -> dict:
    x, y = np.asarray(x, float), np.asarray(y, float)
    slope, intercept = np.polyfit(x, y, 1)
    pred = slope * x + intercept
    ss_res = float(np.sum((y - pred) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    return {"slope": float(slope), "intercept": float(intercept),
            "r2": 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0}


def scaling_report(records: list[dict], axis: str, kappa: int = KAPPA) -> dict:
    """Least-squares fits of honest bits and rounds along ``axis``.

    Points are averaged over seeds and fitted by non-negative least squares.  Terms that are collinear on the grid (at
    fixed ``n`` only the L-proportional terms vary) are dropped in the order
    listed, and their coefficient is reported as ``None``.
    """
    if axis not in ("n", "L"):
        raise ValueError("axis must be n or L")
    groups: dict = {}
    for r in records:
        key = (r["point"]["n"], r["point"]["L"])
        groups.setdefault(key, []).append(r)
    points = []
    for (n, L), rs in sorted(groups.items()):
        points.append({"n": n, "L": L, "bits": float(np.mean([r["total_bits"] for r in rs])),
                       "rounds": float(np.mean([r["rounds"] for r in rs])), "runs": len(rs)})
    xs = {p[axis] for p in points}
    if len(xs) < 4 or len(xs) != len(points):
        raise ValueError(f"need at least 4 distinct {axis} values with the other axis fixed")
    X = np.array([_terms(p["n"], p["L"]) for p in points])
    y = np.array([p["bits"] for p in points])
    scale = np.abs(X).max(axis=0)
    Xs = X / scale
    keep: list[int] = []
    for j in range(Xs.shape[1]):
        cand = keep + [j]
        with_const = np.column_stack([Xs[:, cand], np.ones(len(points))]) if axis == "L" else Xs[:, cand]
        if np.linalg.matrix_rank(with_const, tol=1e-9) == with_const.shape[1]:
            keep = cand
    design = Xs[:, keep]
    if axis == "L":
        # At fixed n the L-free term is a constant column.
        design = np.column_stack([design, np.ones(len(points))])
    # Bit counts cannot have negative components, so the fit is non-negative.
    coef, _ = nnls(design, y)
    full = [None] * len(TERMS)
    for i, j in enumerate(keep):
        full[j] = float(coef[i] / scale[j])
    ratio_vals = [p["bits"] / (p["L"] * p["n"] * math.log2(p["n"]) + kappa * p["n"] ** 2 * math.log2(p["n"]))
                  for p in points]
    out = {
        "axis": axis,
        "points": points,
        "terms": list(TERMS),
        "coefficients": dict(zip(TERMS, full)),
        "ln2_coefficient": full[2],
        "normalized": ratio_vals,
        "ratio_max_min": max(ratio_vals) / min(ratio_vals),
        "affine_bits": _linear_fit([p[axis] for p in points], [p["bits"] for p in points]),
        "rounds_linear": _linear_fit([p[axis] for p in points], [p["rounds"] for p in points]),
    }
    if axis == "L":
        out["constant"] = float(coef[-1])
    return out


# -- command line -------------------------------------------------------------------

def _fail(msg: str, code: int) -> None:
    click.echo(msg, err=True)
    sys.exit(code)


@click.group()
def cli():
    """Run convex agreement scenarios, scaling reports and oracle suites."""


@cli.command()
@click.argument("scenario")
@click.option("--seeds", default=None, help="Inclusive seed range a..b.")
@click.option("--out", default=None, type=click.Path(file_okay=False), help="Directory for run records.")
def run(scenario, seeds, out):
    """Execute SCENARIO (a file or a bundled name) and check its contracts."""
    try:
        sc = load_scenario(scenario)
        report = run_scenario(sc, parse_seeds(seeds) if seeds else None, out)
    except ScenarioError as exc:
        _fail(f"error: {exc}", 2)
    for row in report["table"]:
        click.echo(f"n={row['n']} L={row['L']} seed={row['seed']} bits={row['bits']} rounds={row['rounds']}")
    if not report["passed"]:
        _fail(f"FAIL {report['failures'][0]}", 1)
    click.echo(f"PASS {sc.name}: {report['runs']} runs")


@cli.group()
def report():
    """Summaries computed from stored run records."""


@report.command()
@click.option("--in", "directory", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--axis", type=click.Choice(["n", "L"]), required=True)
def scaling(directory, axis):
    """Fit honest bits and rounds against the grid in a record directory."""
    try:
        res = scaling_report(load_records(directory), axis)
    except ValueError as exc:
        _fail(f"error: {exc}", 2)
    click.echo(json.dumps(res, indent=1, sort_keys=True))


@cli.command()
@click.argument("suite", type=click.Choice(["safe-area", "extractor", "erasure", "ba", "supersend"]))
@click.option("--max-n", "max_n", type=int, default=None, help="Largest size the suite enumerates.")
def verify(suite, max_n):
    """Run one oracle-backed verification suite."""
    from . import suites

    if suite == "safe-area":
        res = suites.verify_safe_area(max_size=max_n or 8)
    elif suite == "extractor":
        res = suites.verify_extractor(bundled_assignments(), raw_max_n=max_n or 14)
    elif suite == "erasure":
        res = suites.verify_erasure(max_subset_n=max_n or 9)
    elif suite == "ba":
        sizes = tuple(s for s in (4, 7, 10) if max_n is None or s <= max_n) or (4,)
        res = suites.verify_ba(sizes=sizes)
    else:
        res = suites.verify_supersend()
    click.echo(res.line())
    for f in res.failures[:10]:
        click.echo(f"  {f}")
    if not res.ok:
        sys.exit(1)


def bundled_assignments() -> list:
    """Every committee assignment that some bundled scenario builds."""
    out = []
    for path in bundled_scenarios().values():
        sc = parse_scenario(json.loads(path.read_text()), str(path.parent))
        for point in sc.points():
            env = _env(sc, point)
            space = _space_for(sc, env)
            cfg = ProtocolConfig(env["n"], env["t"], space, sc.eps, env.get("L"))
            if sc.protocol == "fixed-L":
                out.extend(fixed_L_assignments(env["n"], cfg))
            else:
                out.extend(unknown_L_assignments(env["n"], cfg))
    return out


def main(argv=None) -> None:
    cli.main(args=argv, prog_name="convexagree")
