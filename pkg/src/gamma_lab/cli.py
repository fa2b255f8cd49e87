"""Command-line front end: ``generate``, ``verify`` and ``sweep``.

Exit codes: 0 when every check passes, 2 when some check fails, 1 on input
errors (unreadable or malformed files, bad arguments).
"""

import argparse
import json
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import jsonio
from .dilation import (
    adjoint_extension_residual,
    build_sznagy,
    minimality_check,
    unitary_extension_residual,
    verify_dilation,
    verify_gamma_unitary_structure,
)
from .errors import GammaLabError
from .fundop import identity_suite, solve_fundamental
from .gamma import YES, classify_pair
from .generators import KINDS, generate
from .model import build_coisometric_model

EXIT_OK, EXIT_INPUT, EXIT_FAIL = 0, 1, 2

DEFAULT_TOLERANCES = {
    "solver": 1e-10,
    "identities": 1e-9,
    "omega": 1e-8,
    "grid": 1e-8,
    "dilation": 1e-9,
    "structure": 1e-9,
    "restriction": 1e-10,
    "model": 1e-9,
}


class InputError(Exception):
    pass


# -- scenarios --------------------------------------------------------------


def make_scenario(seed, dim, kind, tolerances=None):
    if dim < 1:
        raise InputError("dimension must be at least 1")
    if kind not in KINDS:
        raise InputError(f"unknown kind {kind!r}; choose from {', '.join(KINDS)}")
    pair = generate(kind, dim, np.random.default_rng(seed))
    return {
        "seed": int(seed),
        "dimension": int(dim),
        "generator": kind,
        "pair": jsonio.pair_to_json(pair),
        "tolerances": {**DEFAULT_TOLERANCES, **(tolerances or {})},
    }


def load_scenario(path):
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read scenario: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"malformed scenario JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise InputError("scenario must be a JSON object")
    return data


def scenario_pair(scenario):
    """OperatorPair of a scenario; generated scenarios without a pair are regenerated."""
    try:
        if "pair" in scenario:
            pair = jsonio.pair_from_json(scenario["pair"])
        else:
            pair = generate(
                scenario["generator"],
                int(scenario["dimension"]),
                np.random.default_rng(int(scenario["seed"])),
            )
    except (GammaLabError, KeyError, TypeError, ValueError) as exc:
        raise InputError(f"invalid scenario pair: {exc}") from exc
    dim = scenario.get("dimension", pair.n)
    if not isinstance(dim, int) or dim < 1 or dim != pair.n:
        raise InputError(f"scenario dimension {dim!r} does not match the pair ({pair.n})")
    return pair


# -- the verify pipeline ----------------------------------------------------


def run_pipeline(scenario, overrides=None):
    """All verification stages on one scenario; returns the RunReport dict."""
    tol = {**DEFAULT_TOLERANCES, **scenario.get("tolerances", {}), **(overrides or {})}
    pair = scenario_pair(scenario)
    timings = {}
    checks = {}
    report = {
        "scenario": {k: scenario.get(k) for k in ("seed", "dimension", "generator")},
        "tolerances": tol,
    }

    t = time.perf_counter()
    cls = classify_pair(pair, tol=tol["identities"], contraction_tol=tol["grid"])
    timings["classify"] = time.perf_counter() - t
    report["classification"] = cls.to_dict()
    checks["gamma_contraction"] = cls.is_gamma_contraction.verdict == YES
    if not checks["gamma_contraction"]:
        report.update(checks=checks, passed=False, timings=timings)
        return report

    t = time.perf_counter()
    fp = solve_fundamental(pair, tol=tol["solver"])
    timings["fundamental"] = time.perf_counter() - t
    report["fundamental"] = {k: v for k, v in fp.to_dict().items() if k not in ("F", "Fstar")}
    checks["fundamental"] = (
        not fp.violates_equation
        and fp.omega_F <= 1 + tol["omega"]
        and fp.omega_Fstar <= 1 + tol["omega"]
    )

    t = time.perf_counter()
    ids = identity_suite(pair, fp, tol=tol["identities"])
    timings["identity_suite"] = time.perf_counter() - t
    report["identity_suite"] = ids.to_dict()
    checks["identity_suite"] = ids.passed

    t = time.perf_counter()
    bundle = build_sznagy(pair, fp)
    dil = verify_dilation(bundle, tol=tol["dilation"])
    structure = verify_gamma_unitary_structure(bundle, tol=tol["structure"], norm_tol=tol["omega"])
    minimal = minimality_check(bundle)
    extension = {
        "adjoint_extension_residual": adjoint_extension_residual(bundle),
        "unitary_extension_residual": unitary_extension_residual(bundle),
    }
    timings["dilation"] = time.perf_counter() - t
    report["dilation"] = {**dil, "structure": structure, "minimality": minimal, **extension}
    checks["dilation"] = dil["passed"]
    checks["dilation_structure"] = structure["passed"]
    checks["minimality"] = minimal["filled"]
    checks["extension"] = max(extension.values()) <= tol["structure"]

    t = time.perf_counter()
    cm = build_coisometric_model(pair, fp, tol=tol["model"])
    timings["model"] = time.perf_counter() - t
    mr = cm.report
    report["model"] = mr
    checks["model"] = (
        mr["restriction_residual"] <= tol["restriction"]
        and mr["gamma_coisometry_checks"]["passed"]
        and mr["defect_dims"][0] == mr["defect_dims"][1]
        and mr["B_vs_Fstar_window_residual"] <= tol["model"]
        and mr["B_unitarily_equivalent_F_residual"] <= tol["model"]
    )

    checks = {k: bool(v) for k, v in checks.items()}
    report.update(checks=checks, passed=all(checks.values()), timings=timings)
    return report


def write_json(path, obj):
    path = Path(path)
    if path.parent and not path.parent.exists():
        path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(jsonio.dumps(obj) + "\n", encoding="utf-8")


# -- sweep aggregation --------------------------------------------------------

AGGREGATE_PATHS = {
    "solver_residual_F": ("fundamental", "residual_F"),
    "solver_residual_Fstar": ("fundamental", "residual_Fstar"),
    "omega_F": ("fundamental", "omega_F"),
    "omega_Fstar": ("fundamental", "omega_Fstar"),
    "dilation_residual": ("dilation", "dilation_residual"),
    "isometric_dilation_residual": ("dilation", "isometric_dilation_residual"),
    "adjoint_extension_residual": ("dilation", "adjoint_extension_residual"),
    "unitary_extension_residual": ("dilation", "unitary_extension_residual"),
    "U0_unitary": ("dilation", "structure", "U0_unitary"),
    "T0_eq_T0starU0": ("dilation", "structure", "T0_eq_T0starU0"),
    "commutation": ("dilation", "structure", "commutation"),
    "restriction_residual": ("model", "restriction_residual"),
    "B_vs_Fstar_window_residual": ("model", "B_vs_Fstar_window_residual"),
}


def _dig(d, path):
    for key in path:
        if not isinstance(d, dict) or key not in d:
            return None
        d = d[key]
    return d


def aggregate(reports):
    worst = {}
    for name, path in AGGREGATE_PATHS.items():
        vals = [v for v in (_dig(r, path) for r in reports) if v is not None]
        worst[name] = max(vals) if vals else None
    for r in reports:
        for name, v in r.get("identity_suite", {}).items():
            if name in ("passed", "tol"):
                continue
            worst[f"identity_{name}"] = max(worst.get(f"identity_{name}", 0.0), v)
    failed = [i for i, r in enumerate(reports) if not r["passed"]]
    return {"count": len(reports), "failed": failed, "worst": worst, "passed": not failed}


def sweep_scenarios(count, dim_max, seed0, kinds=KINDS):
    out = []
    for i in range(count):
        seed = seed0 + i
        dim = int(np.random.default_rng([seed, 1]).integers(1, dim_max + 1))
        out.append(make_scenario(seed, dim, kinds[i % len(kinds)]))
    return out


def _workers():
    raw = os.environ.get("GAMMA_LAB_THREADS")
    if raw is None:
        return os.cpu_count() or 1
    try:
        return max(1, int(raw))
    except ValueError:
        raise InputError(f"GAMMA_LAB_THREADS must be an integer, got {raw!r}") from None


def run_sweep(scenarios, overrides=None, workers=1):
    if workers <= 1 or len(scenarios) <= 1:
        return [run_pipeline(s, overrides) for s in scenarios]
    with ProcessPoolExecutor(max_workers=min(workers, len(scenarios))) as ex:
        # map preserves input order, so the merge is deterministic
        return list(ex.map(run_pipeline, scenarios, [overrides] * len(scenarios)))


# -- commands ---------------------------------------------------------------------


def cmd_generate(args):
    scenario = make_scenario(args.seed, args.dim, args.kind)
    write_json(args.out, scenario)
    print(f"wrote {args.kind} scenario (dim {args.dim}, seed {args.seed}) to {args.out}")
    return EXIT_OK


def cmd_verify(args):
    scenario = load_scenario(args.scenario)
    report = run_pipeline(scenario, tolerance_overrides(args))
    write_json(args.report, report)
    for name, ok in report["checks"].items():
        print(f"{'PASS' if ok else 'FAIL'} {name}")
    return EXIT_OK if report["passed"] else EXIT_FAIL


def cmd_sweep(args):
    if args.count < 1:
        raise InputError("--count must be at least 1")
    if args.dim_max < 1:
        raise InputError("--dim-max must be at least 1")
    scenarios = sweep_scenarios(args.count, args.dim_max, args.seed0)
    reports = run_sweep(scenarios, tolerance_overrides(args), _workers())
    out = Path(args.out)
    for i, (s, r) in enumerate(zip(scenarios, reports)):
        write_json(out / f"scenario_{i:04d}.json", s)
        write_json(out / f"report_{i:04d}.json", r)
    agg = aggregate(reports)
    write_json(out / "aggregate.json", agg)
    print(f"{agg['count'] - len(agg['failed'])}/{agg['count']} scenarios passed")
    return EXIT_OK if agg["passed"] else EXIT_FAIL


def tolerance_overrides(args):
    out = {}
    for name in DEFAULT_TOLERANCES:
        v = getattr(args, f"tol_{name}", None)
        if v is not None:
            out[name] = v
    return out


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _positive_float(text):
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError("tolerances must be positive")
    return v


def _add_tolerances(p):
    for name, default in DEFAULT_TOLERANCES.items():
        p.add_argument(
            f"--tol.{name}", dest=f"tol_{name}", type=_positive_float, metavar="V",
            help=f"override the {name} tolerance (default {default:g})",
        )


def build_parser():
    ap = _Parser(prog="gamma-lab", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("generate", help="write a random scenario")
    g.add_argument("--seed", type=int, required=True)
    g.add_argument("--dim", type=int, required=True)
    g.add_argument("--kind", choices=KINDS, default="symmetrized_random")
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_generate)

    v = sub.add_parser("verify", help="run the verification pipeline on a scenario")
    v.add_argument("--scenario", required=True)
    v.add_argument("--report", required=True)
    _add_tolerances(v)
    v.set_defaults(func=cmd_verify)

    s = sub.add_parser("sweep", help="verify many generated scenarios")
    s.add_argument("--count", type=int, required=True)
    s.add_argument("--dim-max", type=int, required=True)
    s.add_argument("--seed0", type=int, default=0)
    s.add_argument("--out", required=True)
    _add_tolerances(s)
    s.set_defaults(func=cmd_sweep)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (InputError, GammaLabError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
