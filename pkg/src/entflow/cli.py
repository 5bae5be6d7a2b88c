"""Command-line front end: JSON in, JSON out.

Arguments naming a state, operator or path accept either a file path or
an inline JSON document.  Exit codes: 0 success, 2 invalid input,
3 failed precondition, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import subprocess
import sys
from pathlib import Path as FsPath

import numpy as np

from . import bipartite, fourqubit, multipartite, protocols, survival
from .bipartite import SchmidtVector
from .errors import EntflowError, InvalidInput
from .paths import path_from_json


# ---------------------------------------------------------------- serialization

def _plain(obj):
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if hasattr(obj, "to_json"):
        return _plain(obj.to_json())
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    return obj


def _emit(obj, out) -> str:
    def fmt(x):
        if isinstance(x, bool) or x is None:
            return json.dumps(x)
        if isinstance(x, float):
            return format(x, ".17g") if math.isfinite(x) else "null"
        if isinstance(x, int):
            return str(x)
        if isinstance(x, str):
            return json.dumps(x)
        if isinstance(x, dict):
            return "{" + ", ".join(f"{json.dumps(k)}: {fmt(v)}" for k, v in x.items()) + "}"
        return "[" + ", ".join(fmt(v) for v in x) + "]"

    text = fmt(_plain(obj))
    out.write(text + "\n")
    return text


def dumps(obj) -> str:
    """Deterministic JSON with floats at 17 significant digits."""
    class _Buf:
        text = ""

        def write(self, s):
            self.text += s

    buf = _Buf()
    _emit(obj, buf)
    return buf.text.rstrip("\n")


def _load(arg: str, what: str):
    if arg is None:
        raise InvalidInput(f"{what}: missing")
    text = arg
    if os.path.exists(arg):
        text = FsPath(arg).read_text(encoding="utf-8")
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidInput(f"{what}: not a JSON file or document ({exc.msg})") from None


def _with_field(what: str, fn, obj):
    try:
        return fn(obj)
    except EntflowError as exc:
        exc.args = (f"{what}: {exc.args[0] if exc.args else ''}",)
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidInput(f"{what}: malformed ({exc})") from None


def _schmidt(arg, what):
    return _with_field(what, SchmidtVector.from_json, _load(arg, what))


def _descriptor(arg, what):
    return _with_field(what, multipartite.GenericStateDescriptor.from_json, _load(arg, what))


def _operator(arg, what):
    obj = _load(arg, what)
    if isinstance(obj, dict) and "g" in obj:
        obj = obj["g"]
    return _with_field(what, multipartite.LocalPSDOperator.from_json, obj)


def _path(arg, what="path"):
    return _with_field(what, path_from_json, _load(arg, what))


def _floats(text: str, what: str) -> list:
    try:
        return [float(x) for x in text.split(",")]
    except ValueError:
        raise InvalidInput(f"{what}: expected comma-separated numbers") from None


def _any_state(arg, what):
    obj = _load(arg, what)
    if isinstance(obj, dict) and "seed" in obj:
        return _with_field(what, multipartite.GenericStateDescriptor.from_json, obj)
    return _with_field(what, SchmidtVector.from_json, obj)


# ---------------------------------------------------------------- commands

def cmd_bip_prob(a):
    r = bipartite.max_prob(_schmidt(a.psi, "psi"), _schmidt(a.phi, "phi"))
    return {"p": r.p, "argmin_l": r.argmin_l}


def cmd_bip_lattice(a):
    x, y = _schmidt(a.a, "a"), _schmidt(a.b, "b")
    fn = bipartite.lattice_meet if a.op == "meet" else bipartite.lattice_join
    return fn(x, y).to_json()


def cmd_bip_interval(a):
    return {"in_interval": bipartite.in_interval(_schmidt(a.chi, "chi"), _schmidt(a.psi, "psi"), _schmidt(a.phi, "phi"))}


def cmd_bip_intermediate(a):
    v = bipartite.is_intermediate(_schmidt(a.psi, "psi"), _schmidt(a.chi, "chi"), _schmidt(a.phi, "phi"))
    return {"verdict": v.verdict, "l": v.l, "reason": v.reason}


def cmd_bip_xi(a):
    r = protocols.xi_state(_schmidt(a.psi, "psi"), _schmidt(a.phi, "phi"))
    return {"xi": r.xi, "ratios": list(r.ratios), "boundaries": list(r.boundaries)}


def cmd_bip_zeta_eta(a):
    psi, phi = _schmidt(a.psi, "psi"), _schmidt(a.phi, "phi")
    units = None
    if a.units:
        obj = _load(a.units, "units")
        units = _with_field("units", lambda o: protocols.SegmentedUnitVectors(tuple(o["boundaries"]),
                                                                              tuple(tuple(v) for v in o["vectors"])), obj)
    elif a.shape_of:
        units = protocols.default_units(psi, phi, a.shape_of)
    zeta, eta = protocols.zeta_eta(psi, phi, units)
    return {"zeta": zeta, "eta": eta, "p": bipartite.max_prob(zeta, eta).p}


def cmd_bip_chimax(a):
    return protocols.chi_max(_schmidt(a.psi, "psi"), a.p).to_json()


def cmd_bip_chimin(a):
    return protocols.chi_min(_schmidt(a.phi, "phi"), a.p).to_json()


def cmd_bip_osbp(a):
    return {"osbp": bipartite.osbp_direct_possible(_schmidt(a.psi, "psi"), _schmidt(a.phi, "phi"))}


def _report(path, a):
    return survival.path_probability(path, a.tol, a.method, a.path_samples)


def cmd_path_check(a):
    path = _path(a.path)
    return _report(path, a).to_json()


def cmd_bip_mops(a):
    ops = protocols.emit_measurement_operators(_schmidt(a.psi, "psi"), _schmidt(a.phi, "phi"),
                                               _floats(a.probs, "probs"))
    return {
        "operators": [multipartite.matrix_to_json(m) for m in ops.operators],
        "branch_probs": list(ops.branch_probs),
        "corrections": [list(p) for p in ops.corrections],
        "completeness_defect_min": ops.completeness_defect_min,
    }


def cmd_multi_prob(a):
    psi = _descriptor(a.psi, "psi")
    target = _load(a.phi, "phi")
    h = _with_field("phi", lambda o: multipartite.LocalPSDOperator.from_json(o["g"] if "g" in o else o), target)
    r = multipartite.max_prob_generic(psi, h)
    return {"p": r.p, "exact": r.exact}


def cmd_multi_monotone(a):
    psi = _descriptor(a.psi, "psi")
    x = _with_field("x", multipartite.ProductState.from_json, _load(a.x, "x"))
    out = {"E_x": multipartite.monotone_Ex(psi, x), "E_x_normalized": multipartite.monotone_Ex(psi, x, normalized=True)}
    if a.phi:
        h = _operator(a.phi, "phi")
        r = multipartite.min_ratio_over_products(psi, h, samples=a.samples, refine=True, rng=a.seed)
        out.update({"min_ratio": r.closed_form, "sampled": r.sampled, "refined": r.refined, "minimizer": r.minimizer})
    return out


def cmd_multi_fingerprint(a):
    g = _operator(a.g, "g")
    states = multipartite.product_frame(g.n, g.d)
    return {"n": g.n, "d": g.d, "values": [{"x": x, "value": v} for x, v in multipartite.fingerprint(g, states)]}


def cmd_multi_reconstruct(a):
    obj = _load(a.fingerprint, "fingerprint")

    def parse(o):
        return [(multipartite.ProductState.from_json(item["x"]), float(item["value"])) for item in o["values"]]

    values = _with_field("fingerprint.values", parse, obj)
    n = a.n if a.n is not None else obj.get("n")
    d = a.d if a.d is not None else obj.get("d")
    if n is None or d is None:
        raise InvalidInput("n, d: required (flags or fields of the fingerprint file)")
    g = multipartite.reconstruct_G_from_fingerprint(values, int(n), int(d), as_local=a.local)
    if a.local:
        return g.to_json()
    return {"G": multipartite.matrix_to_json(g)}


def cmd_multi_intermediate(a):
    g, h = _operator(a.g, "g"), _operator(a.h, "h")
    holds, report = multipartite.sufficient_conditions_check(g, h)
    return {"intermediate": multipartite.is_intermediate_generic(g, h), "sufficient_conditions": holds,
            "parties": report, "sufficient_only": g.d > 2}


def cmd_multi_make_path(a):
    obj = {"family": "multipartite", "kind": a.kind}
    if a.target:
        obj["target"] = _operator(a.target, "target").to_json()
    if a.schedule:
        obj["schedule"] = a.schedule if a.schedule in ("linear", "exp") else _load(a.schedule, "schedule")
    if a.seed_state:
        seed = _load(a.seed_state, "seed-state")
        obj["seed"] = seed["seed"] if isinstance(seed, dict) else seed
    if a.n is not None:
        obj["n"] = a.n
    if a.samples_file:
        obj["samples"] = _load(a.samples_file, "samples")
    path = _with_field("path", multipartite.operator_path_from_json, obj)
    return path.to_json()


def cmd_survival_integrate(a):
    return _report(_path(a.path), a).to_json()


def cmd_survival_length(a):
    path = _path(a.path)
    return {"length": survival.path_length(path, a.tol, a.method),
            "distance": survival.interconversion_distance(path.state(0.0), path.state(1.0))}


def cmd_survival_product(a):
    path = _path(a.path)
    prod = survival.product_integral(path, a.steps, a.method)
    lam = survival.cumulative_hazard(path, a.tol, a.method)
    return {"product_integral": prod, "P": math.exp(-lam), "difference": abs(prod - math.exp(-lam))}


def cmd_metric(a):
    return {"d_I": survival.interconversion_distance(_any_state(a.a, "a"), _any_state(a.b, "b"))}


def cmd_four_feasible(a):
    r = fourqubit.locc_feasible(_floats(a.src, "src"), _floats(a.dst, "dst"))
    return {"feasible": r.feasible, "r": list(r.r), "slack": list(r.slack)}


def cmd_four_regions(a):
    r = fourqubit.accessible_region(_floats(a.src, "src"), a.grid)
    out = {"grid": r.grid, "k_plus_size": len(r.k_plus), "k_minus_size": len(r.k_minus), "min_gap": r.min_gap}
    if a.points:
        out["k_plus"] = r.k_plus
        out["k_minus"] = r.k_minus
    return out


def cmd_four_witness(a):
    return fourqubit.no_intermediate_witness(_floats(a.alpha, "alpha"), a.grid).to_json()


def cmd_suite_acceptance(a):
    target = FsPath(a.tests) if a.tests else FsPath.cwd() / "tests" / "test_acceptance.py"
    if not target.exists():
        raise InvalidInput(f"tests: {target} not found")
    proc = subprocess.run([sys.executable, "-m", "pytest", str(target), "-q"], capture_output=True, text=True)
    lines = [ln for ln in proc.stdout.splitlines() if ln.startswith(("PASS", "FAIL"))]
    sys.stderr.write(proc.stdout)
    return {"returncode": proc.returncode, "criteria": lines}


# ---------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="entflow", description="Entanglement transformation toolkit (JSON in/out).")
    parser.add_argument("--out", help="write JSON result to this file instead of stdout")
    top = parser.add_subparsers(dest="group", required=True)

    def add(sub, name, fn, *args, **help_kw):
        p = sub.add_parser(name, **help_kw)
        p.set_defaults(fn=fn)
        p.add_argument("--out", default=argparse.SUPPRESS, help="write JSON result to this file")
        for flag, kw in args:
            p.add_argument(flag, **kw)
        return p

    req = {"required": True}
    survival_flags = [
        ("--tol", {"type": float, "default": 1e-8}),
        ("--method", {"choices": ["fd", "analytic"], "default": "fd"}),
        ("--path-samples", {"type": int, "default": 32, "dest": "path_samples"}),
    ]

    bip = top.add_parser("bip", help="bipartite pure states").add_subparsers(dest="cmd", required=True)
    add(bip, "prob", cmd_bip_prob, ("--psi", req), ("--phi", req))
    add(bip, "lattice", cmd_bip_lattice, ("op", {"choices": ["meet", "join"]}), ("--a", req), ("--b", req))
    add(bip, "interval", cmd_bip_interval, ("--chi", req), ("--psi", req), ("--phi", req))
    add(bip, "intermediate", cmd_bip_intermediate, ("--psi", req), ("--chi", req), ("--phi", req))
    add(bip, "xi", cmd_bip_xi, ("--psi", req), ("--phi", req))
    add(bip, "zeta-eta", cmd_bip_zeta_eta, ("--psi", req), ("--phi", req), ("--units", {}),
        ("--shape-of", {"choices": ["phi", "psi"], "dest": "shape_of"}))
    add(bip, "chimax", cmd_bip_chimax, ("--psi", req), ("--p", {"type": float, "required": True}))
    add(bip, "chimin", cmd_bip_chimin, ("--phi", req), ("--p", {"type": float, "required": True}))
    add(bip, "osbp", cmd_bip_osbp, ("--psi", req), ("--phi", req))
    add(bip, "path-check", cmd_path_check, ("--path", req), *survival_flags)
    add(bip, "mops", cmd_bip_mops, ("--psi", req), ("--phi", req), ("--probs", req))

    multi = top.add_parser("multi", help="generic multiqudit states").add_subparsers(dest="cmd", required=True)
    add(multi, "prob", cmd_multi_prob, ("--psi", req), ("--phi", req))
    add(multi, "monotone", cmd_multi_monotone, ("--psi", req), ("--x", req), ("--phi", {}),
        ("--samples", {"type": int, "default": 100000}), ("--seed", {"type": int, "default": 42}))
    add(multi, "fingerprint", cmd_multi_fingerprint, ("--g", req))
    add(multi, "reconstruct", cmd_multi_reconstruct, ("--fingerprint", req), ("--n", {"type": int}),
        ("--d", {"type": int}), ("--local", {"action": "store_true"}))
    add(multi, "intermediate", cmd_multi_intermediate, ("--g", req), ("--h", req))
    add(multi, "path-check", cmd_path_check, ("--path", req), *survival_flags)
    add(multi, "make-path", cmd_multi_make_path,
        ("--kind", {"required": True, "choices": ["diag_interp", "sequential_twofold", "qutrit_counterexample", "sampled"]}),
        ("--target", {}), ("--schedule", {}), ("--seed-state", {"dest": "seed_state"}), ("--n", {"type": int}),
        ("--samples-file", {"dest": "samples_file"}))

    surv = top.add_parser("survival", help="hazard integration along paths").add_subparsers(dest="cmd", required=True)
    add(surv, "integrate", cmd_survival_integrate, ("--path", req), *survival_flags)
    add(surv, "length", cmd_survival_length, ("--path", req), *survival_flags[:2])
    add(surv, "product-integral", cmd_survival_product, ("--path", req), ("--steps", {"type": int, "default": 10000}),
        *survival_flags[:2])

    metric = top.add_parser("metric", help="interconversion distance")
    metric.set_defaults(fn=cmd_metric)
    metric.add_argument("--a", required=True)
    metric.add_argument("--b", required=True)
    metric.add_argument("--out", default=argparse.SUPPRESS, help="write JSON result to this file")

    four = top.add_parser("fourqubit", help="four-qubit family").add_subparsers(dest="cmd", required=True)
    add(four, "feasible", cmd_four_feasible, ("--src", req), ("--dst", req))
    add(four, "regions", cmd_four_regions, ("--src", req), ("--grid", {"type": float, "default": 1e-2}),
        ("--points", {"action": "store_true"}))
    add(four, "witness", cmd_four_witness, ("--alpha", {"default": "0.09,0.1,0.08"}),
        ("--grid", {"type": float, "default": 5e-3}))

    suite = top.add_parser("suite", help="batch runners").add_subparsers(dest="cmd", required=True)
    add(suite, "acceptance", cmd_suite_acceptance, ("--tests", {}))
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        result = args.fn(args)
    except EntflowError as exc:
        sys.stderr.write(dumps({"error": type(exc).__name__, "message": str(exc)}) + "\n")
        return exc.exit_code
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            _emit(result, fh)
    else:
        _emit(result, sys.stdout)
    if args.fn is cmd_suite_acceptance:
        return result["returncode"]
    return 0


if __name__ == "__main__":
    sys.exit(main())
