"""``fracspec`` command line: JSON reports and CSV tables for every check.

Exit codes: 0 success, 1 invalid input, 2 numerical failure.
"""

import argparse
import csv
import io
import json
import math
import sys
from datetime import datetime, timezone

import numpy as np

from . import __version__
from . import acceptance
from .analysis import (
    compactness_report,
    diamagnetic_check,
    fractional_apply,
    lp_interpolation_check,
    tail_mass_check,
)
from .errors import NumericalError, ValidationError
from .extension import (
    default_quadrature,
    dtn_limit,
    evaluate_extension,
    extension_energy,
    half_line_quadrature,
    k_constant,
    mode_profile,
    spectral_energy,
)
from .operators import BackendSpec, GroundFunction, build_backend, magnetic_assembly, project, synthesize

REPORT_SCHEMA = {
    "type": "object",
    "required": ["command", "inputs", "results", "checks", "seed", "version", "timestamp"],
    "additionalProperties": False,
    "properties": {
        "command": {"type": "string"},
        "inputs": {"type": "object"},
        "results": {"type": "object"},
        "checks": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["name", "pass", "value", "bound"],
                "additionalProperties": False,
                "properties": {
                    "name": {"type": "string"},
                    "pass": {"type": "boolean"},
                    "value": {"type": ["number", "string"]},
                    "bound": {"type": ["number", "string"]},
                },
            },
        },
        "seed": {"type": "integer"},
        "version": {"type": "string"},
        "timestamp": {"type": "string"},
    },
}

COMMANDS = (
    "spectrum",
    "frac-apply",
    "extension-eval",
    "energy-check",
    "dtn-check",
    "compactness",
    "tail-check",
    "diamagnetic-check",
    "report",
)

# filled in for required backend parameters the user left out
_DEFAULTS = {
    "interval_analytic": {"length": math.pi, "modes": 16},
    "interval_fd": {"length": math.pi, "grid": 64},
    "box2d_fd": {"length": 1.0, "grid": 16},
    "oscillator_analytic": {"modes": 20},
    "oscillator_fd": {"length": 12.0, "grid": 400},
    "potential_fd": {"length": 6.0, "grid": 400, "potential": "one_plus_x4"},
    "grushin_fd": {"length": 1.0, "grid": 16, "gamma": 1.0},
    "magnetic_fd": {"length": 1.0, "grid": 12, "flux": 0.0},
    "matrix_file": {},
}
_BACKEND_FLAGS = ("length", "grid", "modes", "gamma", "flux", "potential", "matrix")
_DEFAULT_BACKEND = {
    "tail-check": "oscillator-fd",
    "diamagnetic-check": "magnetic-fd",
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ValidationError(message)


def _parser():
    p = _Parser(prog="fracspec", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in COMMANDS:
        c = sub.add_parser(name)
        c.add_argument("--backend")
        c.add_argument("--length", type=float)
        c.add_argument("--grid", type=int)
        c.add_argument("--modes", type=int)
        c.add_argument("--gamma", type=float)
        c.add_argument("--flux", type=float)
        c.add_argument("--potential")
        c.add_argument("--matrix")
        c.add_argument("--s", type=float, default=0.5)
        c.add_argument("--quad-nodes", type=int, default=16)
        c.add_argument("--tmax", type=float)
        c.add_argument("--rank", type=int)
        c.add_argument("--q", type=float, default=4.0)
        c.add_argument("--radius", type=float, default=2.0)
        c.add_argument("--seed", type=int, default=0)
        c.add_argument("--out")
        c.add_argument("--format", choices=("json", "csv"), default="json")
        c.add_argument("--lambda", dest="lam", type=float, default=1.0)
        c.add_argument("--c0", type=float, default=1.0)
        c.add_argument("--t", type=float, default=1.0)
        c.add_argument("--input", help="CSV of nodal values (re[,im] per line)")
        c.add_argument("--samples", type=int)
    return p


def _backend_spec(args, command):
    raw = args.backend or _DEFAULT_BACKEND.get(command)
    if raw is None:
        raise ValidationError(f"{command} needs --backend")
    kind = raw.replace("-", "_")
    if kind not in _DEFAULTS:
        raise ValidationError(f"unknown backend {raw!r}")
    given = {k: getattr(args, k) for k in _BACKEND_FLAGS if getattr(args, k) is not None}
    if "matrix" in given:
        given["path"] = given.pop("matrix")
    params = dict(_DEFAULTS[kind])
    params.update(given)
    if kind == "matrix_file" and "path" not in params:
        raise ValidationError("matrix-file backend needs --matrix")
    return BackendSpec(kind, **params)


def _read_nodal(path, sp):
    try:
        with open(path, newline="") as fh:
            rows = [r for r in csv.reader(fh) if r]
        if rows and len(rows[0]) >= 2:
            vals = np.array([complex(float(r[0]), float(r[1])) for r in rows])
        else:
            vals = np.array([float(r[0]) for r in rows])
    except (OSError, ValueError) as exc:
        raise ValidationError(f"cannot read {path}: {exc}") from exc
    if vals.shape[0] != sp.size:
        raise ValidationError(f"{path} has {vals.shape[0]} values, backend has {sp.size} nodes")
    return vals


def _ground_function(args, sp):
    if args.input:
        return project(_read_nodal(args.input, sp), sp)
    rng = np.random.default_rng(args.seed)
    return synthesize(acceptance.random_coefficients(rng, sp.modes), sp)


def _num(x):
    if isinstance(x, (complex, np.complexfloating)):
        return {"re": _num(x.real), "im": _num(x.imag)}
    x = float(x)
    return x if math.isfinite(x) else repr(x)


def _nums(arr):
    return [_num(v) for v in np.asarray(arr).ravel()]


def _check(name, value, bound, ok):
    return {"name": name, "pass": bool(ok), "value": _num(value), "bound": _num(bound)}


def _spectrum_inputs(spec):
    return {"backend": spec.as_dict()}


def cmd_spectrum(args):
    spec = _backend_spec(args, "spectrum")
    sp = build_backend(spec)
    err = float(np.max(np.abs(sp.gram() - np.eye(sp.modes))))
    results = {"eigenvalues": _nums(sp.eigenvalues), "meta": {k: _num(v) for k, v in sp.meta.items()}}
    checks = [
        _check("orthonormality", err, 1e-10, err <= 1e-10),
        _check("lambda1_positive", sp.eigenvalues[0], 0.0, sp.eigenvalues[0] > 0),
    ]
    rows = [{"k": k + 1, "eigenvalue": _num(v)} for k, v in enumerate(sp.eigenvalues)]
    return _spectrum_inputs(spec), results, checks, rows


def cmd_frac_apply(args):
    spec = _backend_spec(args, "frac-apply")
    sp = build_backend(spec)
    order = k_constant(args.s)
    f = _ground_function(args, sp)
    g = fractional_apply(sp, order, f)
    c = project(f, sp).coefficients
    expected = float(np.sqrt(np.sum(sp.eigenvalues ** (2 * order.s) * np.abs(c) ** 2)))
    got = float(np.sqrt(np.sum(sp.weights * np.abs(g.values) ** 2)))
    err = abs(got - expected) / max(expected, 1e-300)
    results = {"values": _nums(g.values), "coefficients": _nums(g.coefficients)}
    checks = [_check("norm_identity.rel_err", err, 1e-10, err <= 1e-10)]
    rows = [{"node": i, "input": _num(a), "output": _num(b)} for i, (a, b) in enumerate(zip(f.values, g.values))]
    return {"s": order.s, **_spectrum_inputs(spec)}, results, checks, rows


def cmd_extension_eval(args):
    spec = _backend_spec(args, "extension-eval")
    sp = build_backend(spec)
    order = k_constant(args.s)
    f = _ground_function(args, sp)
    u = evaluate_extension(sp, order, f, args.t)
    u0 = evaluate_extension(sp, order, f, 0.0)
    err = float(np.max(np.abs(u0.values - f.values)))
    norm_t = float(np.sqrt(np.sum(sp.weights * np.abs(u.values) ** 2)))
    norm_0 = float(np.sqrt(np.sum(sp.weights * np.abs(f.values) ** 2)))
    results = {"t": args.t, "values": _nums(u.values), "coefficients": _nums(u.coefficients), "norm": norm_t}
    checks = [
        _check("trace_recovered", err, 1e-10, err <= 1e-10),
        _check("norm_not_increasing", norm_t, norm_0, norm_t <= norm_0 * (1 + 1e-12)),
    ]
    rows = [{"k": k + 1, "alpha_t": _num(v)} for k, v in enumerate(u.coefficients)]
    return {"s": order.s, "t": args.t, **_spectrum_inputs(spec)}, results, checks, rows


def cmd_energy_check(args):
    spec = _backend_spec(args, "energy-check")
    sp = build_backend(spec)
    order = k_constant(args.s)
    f = _ground_function(args, sp)
    c = f.coefficients
    active = sp.eigenvalues[np.nonzero(c)[0]]
    if args.tmax is None:
        quad = default_quadrature(active, order, n=args.quad_nodes)
    else:
        quad = half_line_quadrature(order, 1 - 2 * order.s, args.tmax, args.quad_nodes)
    lhs = extension_energy(sp, order, f, quad)
    rhs = spectral_energy(sp, order, f)
    rel = abs(lhs - rhs) / rhs if rhs else abs(lhs)
    results = {"lhs": lhs, "rhs": rhs, "rel_err": rel, "K": order.ks, "quad_nodes": len(quad)}
    checks = [_check("energy_identity.rel_err", rel, 1e-6, rel <= 1e-6)]
    modal = order.ks * sp.eigenvalues**order.s * np.abs(c) ** 2
    rows = [
        {"k": k + 1, "lambda": _num(lam), "coefficient": _num(ck), "spectral_energy": _num(e)}
        for k, (lam, ck, e) in enumerate(zip(sp.eigenvalues, c, modal))
    ]
    inputs = {"s": order.s, "quad_nodes": args.quad_nodes, "tmax": args.tmax, **_spectrum_inputs(spec)}
    return inputs, results, checks, rows


def cmd_dtn_check(args):
    order = k_constant(args.s)
    p = mode_profile(args.lam, order, args.c0)
    value = dtn_limit(p)
    expected = order.ks * args.lam**order.s * args.c0
    rel = abs(value - expected) / abs(expected) if expected else abs(value)
    results = {"value": value, "expected": expected, "K": order.ks, "rel_err": rel}
    checks = [_check("dtn.rel_err", rel, 1e-5, rel <= 1e-5)]
    rows = [{"s": order.s, "lambda": args.lam, "c0": args.c0, "value": value, "expected": expected}]
    return {"s": order.s, "lambda": args.lam, "c0": args.c0}, results, checks, rows


def cmd_compactness(args):
    spec = _backend_spec(args, "compactness")
    sp = build_backend(spec)
    order = k_constant(args.s)
    ranks = [args.rank] if args.rank is not None else None
    samples = args.samples if args.samples is not None else 200
    rep = compactness_report(sp, order, ranks=ranks, samples=samples, seed=args.seed)
    attain = max(abs(e.modulus - e.bound) for e in rep.entries)
    excess = max(e.mc_max - e.bound for e in rep.entries)
    results = {
        "ranks": rep.ranks,
        "moduli": _nums(rep.moduli),
        "bound": _nums(rep.bound),
        "energy_moduli": _nums(rep.energy_moduli),
        "mc_max": _nums([e.mc_max for e in rep.entries]),
        "witness_index": [e.rank + 1 for e in rep.entries],
        "samples": samples,
    }
    checks = [
        _check("witness_attains", attain, 1e-12, attain <= 1e-12),
        _check("mc_excess", excess, 1e-12, excess <= 1e-12),
        _check("non_increasing", float(rep.non_increasing()), 1.0, rep.non_increasing()),
    ]
    rows = [
        {"rank": e.rank, "modulus": _num(e.modulus), "bound": _num(e.bound), "mc_max": _num(e.mc_max)}
        for e in rep.entries
    ]
    return {"s": order.s, "rank": args.rank, **_spectrum_inputs(spec)}, results, checks, rows


def cmd_tail_check(args):
    spec = _backend_spec(args, "tail-check")
    sp = build_backend(spec)
    samples = args.samples if args.samples is not None else 100
    rng = np.random.default_rng(args.seed)
    k = min(10, sp.modes)
    rows = []
    for i in range(samples):
        f = synthesize(rng.standard_normal(k), sp)
        tail, bound = tail_mass_check(sp, f, args.radius)
        lhs, rhs = lp_interpolation_check(f, args.q, sp)
        rows.append({"sample": i, "tail": tail, "bound": bound, "lq": lhs, "holder": rhs})
    tail_margin = min(r["bound"] - r["tail"] for r in rows)
    lp_margin = min(r["holder"] - r["lq"] for r in rows)
    results = {"tail": [r["tail"] for r in rows], "bound": [r["bound"] for r in rows],
               "lq": [r["lq"] for r in rows], "holder": [r["holder"] for r in rows]}
    checks = [
        _check("tail_mass.min_margin", tail_margin, 0.0, tail_margin >= 0),
        _check("lp_interpolation.min_margin", lp_margin, 0.0, lp_margin >= 0),
    ]
    inputs = {"radius": args.radius, "q": args.q, "samples": samples, **_spectrum_inputs(spec)}
    return inputs, results, checks, rows


def cmd_diamagnetic_check(args):
    spec = _backend_spec(args, "diamagnetic-check")
    asm = magnetic_assembly(spec)
    samples = args.samples if args.samples is not None else 1000
    rng = np.random.default_rng(args.seed)
    rows = []
    for i in range(samples):
        u = rng.standard_normal(asm.size) + 1j * rng.standard_normal(asm.size)
        phases = rng.uniform(-math.pi, math.pi, asm.theta.shape[0])
        q0, qa = diamagnetic_check(asm.with_phases(phases), u)
        rows.append({"sample": i, "q0": q0, "qA": qa})
    worst = max(r["q0"] - r["qA"] for r in rows)
    results = {"q0": [r["q0"] for r in rows], "qA": [r["qA"] for r in rows]}
    checks = [_check("q0_minus_qA.max", worst, 1e-12, worst <= 1e-12)]
    return {"samples": samples, **_spectrum_inputs(spec)}, results, checks, rows


def cmd_report(args):
    crits = acceptance.run_all(seed=args.seed)
    results = {f"criterion_{c.number}": {"title": c.title, "pass": c.passed} for c in crits}
    checks = []
    rows = []
    for c in crits:
        for ch in c.checks:
            d = ch.as_dict()
            d["name"] = f"c{c.number}.{d['name']}"
            d["value"] = _num(d["value"])
            d["bound"] = _num(d["bound"])
            checks.append(d)
            rows.append({"criterion": c.number, **d})
    results["all_pass"] = all(c.passed for c in crits)
    return {}, results, checks, rows


_HANDLERS = {
    "spectrum": cmd_spectrum,
    "frac-apply": cmd_frac_apply,
    "extension-eval": cmd_extension_eval,
    "energy-check": cmd_energy_check,
    "dtn-check": cmd_dtn_check,
    "compactness": cmd_compactness,
    "tail-check": cmd_tail_check,
    "diamagnetic-check": cmd_diamagnetic_check,
    "report": cmd_report,
}


def _validate_common(args):
    if not 0.0 < args.s < 1.0:
        raise ValidationError(f"--s must lie in (0, 1), got {args.s}")
    if args.grid is not None and args.grid < 2:
        raise ValidationError("--grid must be >= 2")
    if args.modes is not None and args.modes < 1:
        raise ValidationError("--modes must be >= 1")
    if args.quad_nodes < 8:
        raise ValidationError("--quad-nodes must be >= 8")
    if args.samples is not None and args.samples < 1:
        raise ValidationError("--samples must be >= 1")


def build_report(argv):
    """Parse ``argv`` and run the subcommand; returns ``(report, rows, fmt, out)``."""
    args = _parser().parse_args(argv)
    _validate_common(args)
    inputs, results, checks, rows = _HANDLERS[args.command](args)
    report = {
        "command": args.command,
        "inputs": {"argv": list(argv), **inputs},
        "results": results,
        "checks": checks,
        "seed": args.seed,
        "version": __version__,
        "timestamp": datetime.now(timezone.utc).isoformat(),
    }
    return report, rows, args.format, args.out


def render(report, rows, fmt):
    if fmt == "json":
        return json.dumps(report, indent=2, sort_keys=True) + "\n"
    buf = io.StringIO()
    header = list(rows[0].keys()) if rows else ["empty"]
    writer = csv.DictWriter(buf, fieldnames=header, lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    return buf.getvalue()


def run(argv=None):
    """Entry point; returns the process exit code."""
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        report, rows, fmt, out = build_report(argv)
        text = render(report, rows, fmt)
    except NumericalError as exc:
        print(f"fracspec: numerical failure: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"fracspec: {exc}", file=sys.stderr)
        return 1
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
