"""Command-line front end. Every subcommand writes CSV or JSON; numbers use 17
significant digits so reruns produce identical files.

Exit codes: 0 success, 1 runtime failure, 2 usage error or invalid parameters.
"""

import argparse
import csv
import json
import math
import os
import sys
import time
from dataclasses import asdict, dataclass, fields

import numpy as np

from . import __version__
from .blowup import (
    check_G1_bound,
    check_G_identity,
    kato_fit,
    lifespan_scan,
    lifespan_to_csv,
    load_config,
    parse_key_values,
    simulate,
)
from .errors import InvalidParam, WavelabError
from .exponents import (
    ScaleInvariantModel,
    classify,
    exponent_report,
    fujita_branch,
    strauss_branch,
    transformed_report,
)
from .kernels import KernelParams, cone_width, pde_residual, verify_lemma41
from .profiles import PROFILES, make_profile
from .quadrature import integrate
from .solver1d import CauchyData1D, QuadConfig, convergence_study, default_probes, solve_exact, solve_fd

USAGE_ERRORS = (InvalidParam, ValueError)


def _fmt(x):
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, float) or isinstance(x, np.floating):
        return format(float(x), ".17g")
    return str(x)


def _json_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    raise TypeError(f"cannot serialize {type(obj)}")


def _clean(obj):
    """Replace non-finite floats with strings so the JSON stays standard."""
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (float, np.floating)) and not math.isfinite(obj):
        return "inf" if obj > 0 else ("-inf" if obj < 0 else "nan")
    return obj


def _dump_json(obj, path=None):
    text = json.dumps(_clean(obj), indent=2, sort_keys=True, default=_json_default) + "\n"
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


@dataclass
class RunManifest:
    command: str
    config: dict
    version: str
    duration_s: float
    outputs: list

    def write(self, out_dir):
        path = os.path.join(out_dir, "manifest.json")
        self.outputs = sorted(set(self.outputs))
        _dump_json(asdict(self), path)
        return path


def _out_dir(path):
    os.makedirs(path, exist_ok=True)
    return path


# exponents


def cmd_exponents(args):
    if args.transformed:
        if args.ell is None or args.k is None:
            raise InvalidParam("--transformed needs --ell and --k")
        report = transformed_report(args.n, args.ell, args.k, args.p)
    else:
        if args.mu1 is None or args.mu2sq is None:
            raise InvalidParam("--mu1 and --mu2sq are required (or use --transformed)")
        report = exponent_report(args.n, args.mu1, args.mu2sq, args.p)
    _dump_json(report.to_dict(), args.out)
    return 0


# verify-kernels


def cmd_verify_kernels(args):
    rng = np.random.default_rng(args.seed)
    results = []
    ok = True
    for ell in args.ell:
        params = KernelParams(ell)
        worst = {}
        pde_worst = 0.0
        for _ in range(args.samples):
            t = rng.uniform(0.1, 5.0)
            b = rng.uniform(0.0, t)
            rep = verify_lemma41(t, b, params, rng=rng)
            for name, dev in rep.deviations.items():
                worst[name] = max(worst.get(name, 0.0), dev)
            # fundamental-solution check at an interior point with room for the stencil
            h = 1e-2
            bb = min(max(b, 2 * h), t - 4 * h) if t > 6 * h else None
            if bb is not None:
                w = cone_width(t, bb + 2 * h, ell) - 2 * h
                if w > 0:
                    y = rng.uniform(-w, w)
                    pde_worst = max(pde_worst, pde_residual(t, y, bb, params, h=h))
        passed = max(worst.values()) <= args.tol and pde_worst <= args.pde_tol
        ok &= passed
        results.append({"ell": ell, "max_deviation": worst, "pde_residual": pde_worst, "passed": passed})
    _dump_json({"seed": args.seed, "samples": args.samples, "tol": args.tol, "results": results, "passed": ok}, args.out)
    return 0 if ok else 1


# solve1d


@dataclass
class Solve1DConfig:
    ell: float = 1.0
    u0: str = "bump"
    u1: str = "zero"
    R: float = 1.0
    T: float = 1.0
    dx: float = 0.02
    cfl: float = 0.5
    levels: int = 3
    abs_tol: float = 1e-10

    def __post_init__(self):
        for name in (self.u0, self.u1):
            if name not in PROFILES:
                raise InvalidParam(f"unknown profile {name!r}; choose from {sorted(PROFILES)}")
        if not (self.R > 0 and self.dx > 0 and self.T > 0 and self.abs_tol > 0):
            raise InvalidParam("R, T, dx and abs_tol must be positive")
        if not 0 < self.cfl < 1:
            raise InvalidParam("cfl must be in (0, 1)")
        if self.levels < 1:
            raise InvalidParam("levels must be >= 1")
        KernelParams(self.ell)


def load_solve1d_config(path):
    with open(path) as fh:
        raw = parse_key_values(fh.read())
    kinds = {f.name: f.type for f in fields(Solve1DConfig)}
    values = {}
    for key, text in raw.items():
        if key not in kinds:
            raise InvalidParam(f"unknown config key {key!r}")
        kind = kinds[key]
        try:
            values[key] = int(text) if kind in (int, "int") else text if kind in (str, "str") else float(text)
        except ValueError as exc:
            raise InvalidParam(f"bad value for {key}: {text!r}") from exc
    return Solve1DConfig(**values)


def _closed_form_ell0(t, x, u0, u1, R, tol):
    """d'Alembert's formula, evaluated without any kernel machinery."""
    lo, hi = max(x - t, -R), min(x + t, R)
    mass = integrate(u1, lo, hi, abs_tol=tol) if hi > lo else 0.0
    return 0.5 * float(u0(np.array([x + t]))[0] + u0(np.array([x - t]))[0]) + 0.5 * mass


def cmd_solve1d(args):
    cfg = load_solve1d_config(args.config)
    out_dir = _out_dir(args.out_dir)
    start = time.perf_counter()
    params = KernelParams(cfg.ell)
    u0, u1 = make_profile(cfg.u0, cfg.R), make_profile(cfg.u1, cfg.R)
    data = CauchyData1D(u0=u0, u1=u1, R=cfg.R)
    q = QuadConfig(abs_tol=cfg.abs_tol)
    if args.probes:
        probes = np.array([float(s) for s in args.probes.split(",")])
    else:
        probes = default_probes(data, params, cfg.T, cfg.dx)

    exact = np.array([solve_exact(cfg.T, x, data, params, q) for x in probes])
    finest = cfg.dx / 2 ** (cfg.levels - 1)
    grid = solve_fd(data, params, cfg.T, finest, cfg.cfl, record_every=10**9)
    fd = grid.at(probes)
    header = ["t", "x", "exact", "fd", "abs_error"]
    closed = None
    if cfg.ell == 0:
        closed = np.array([_closed_form_ell0(cfg.T, x, u0, u1, cfg.R, cfg.abs_tol / 10) for x in probes])
        header.append("closed_form")
    rows = []
    for i, x in enumerate(probes):
        row = [cfg.T, x, exact[i], fd[i], abs(fd[i] - exact[i])]
        if closed is not None:
            row.append(closed[i])
        rows.append(row)
    probe_path = os.path.join(out_dir, "probes.csv")
    _write_csv(probe_path, header, rows)
    outputs = [probe_path]

    summary = {"max_fd_error": float(np.max(np.abs(fd - exact)))}
    if closed is not None:
        summary["max_closed_form_error"] = float(np.max(np.abs(exact - closed)))
    if cfg.levels >= 2:
        table = convergence_study(data, params, cfg.T, cfg.levels, cfg.dx, cfg.cfl, probes, q)
        conv_path = os.path.join(out_dir, "convergence.csv")
        _write_csv(conv_path, ["dx", "error", "order"], [(r.dx, r.error, r.order) for r in table])
        outputs.append(conv_path)
        summary["orders"] = [r.order for r in table[1:]]
    if args.grid:
        grid_path = os.path.join(out_dir, "grid.csv")
        with open(grid_path, "w", newline="") as fh:
            fh.write(f"ell={_fmt(cfg.ell)},dx={_fmt(finest)},cfl={_fmt(cfg.cfl)},T={_fmt(cfg.T)}\n")
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["t", "x", "value"])
            for xi, v in zip(grid.x, grid.final):
                w.writerow([_fmt(cfg.T), _fmt(xi), _fmt(v)])
        outputs.append(grid_path)

    RunManifest("solve1d", asdict(cfg), __version__, time.perf_counter() - start, outputs).write(out_dir)
    _dump_json(summary)
    return 0


# simulate / lifespan


def cmd_simulate(args):
    cfg = load_config(args.config)
    out_dir = _out_dir(args.out_dir)
    start = time.perf_counter()
    res = simulate(cfg)
    trace_path = os.path.join(out_dir, "trace.csv")
    res.trace.to_csv(trace_path)
    summary = {"outcome": res.outcome.kind, "T_est": res.outcome.T_est, "t_reached": res.outcome.t_reached}
    if len(res.trace) >= 9:
        summary["G_identity_residual"] = check_G_identity(res.trace, cfg)
    g1 = check_G1_bound(res.trace, cfg)
    summary["G1_min_scaled"] = g1.min_scaled
    try:
        fit = kato_fit(res.trace, cfg)
        summary["kato"] = {"a": fit.a, "q": fit.q, "threshold": fit.threshold, "verdict": fit.verdict.value}
    except WavelabError as exc:
        summary["kato"] = str(exc)
    summary_path = os.path.join(out_dir, "summary.json")
    _dump_json(summary, summary_path)
    config = {f.name: getattr(cfg, f.name) for f in fields(cfg)}
    RunManifest(
        "simulate", config, __version__, time.perf_counter() - start, [trace_path, summary_path]
    ).write(out_dir)
    _dump_json(summary)
    return 0


def cmd_lifespan(args):
    cfg = load_config(args.config)
    out_dir = _out_dir(args.out_dir)
    start = time.perf_counter()
    try:
        eps = [float(s) for s in args.epsilons.split(",")]
    except ValueError as exc:
        raise InvalidParam(f"bad --epsilons list {args.epsilons!r}") from exc
    rows = lifespan_scan(cfg, eps)
    path = os.path.join(out_dir, "lifespan.csv")
    lifespan_to_csv(rows, path)
    config = {f.name: getattr(cfg, f.name) for f in fields(cfg)}
    config["epsilons"] = eps
    RunManifest("lifespan", config, __version__, time.perf_counter() - start, [path]).write(out_dir)
    with open(path) as fh:
        sys.stdout.write(fh.read())
    return 0


# figure1


def cmd_figure1(args):
    """Strauss branch, Fujita branch and p_mu along mu1 in [0, 2] with mu2 = 0."""
    if args.points < 2:
        raise InvalidParam("--points must be >= 2")
    rows = []
    for mu1 in np.linspace(0.0, 2.0, args.points):
        if mu1 == 1.0:
            continue  # delta = 0 there
        model = ScaleInvariantModel(args.n, float(mu1), 0.0)
        ps, pf = strauss_branch(model), fujita_branch(model)
        rows.append((mu1, ps, pf, max(ps, pf), classify(args.n, float(mu1), 0.0).value))
    header = ["mu1", "strauss_branch", "fujita_branch", "p_mu", "classification"]
    if args.out:
        _write_csv(args.out, header, rows)
    else:
        w = csv.writer(sys.stdout, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])
    return 0


def build_parser():
    parser = argparse.ArgumentParser(prog="wavelab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("exponents", help="critical exponents, classification and verdict")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--mu1", type=float)
    p.add_argument("--mu2sq", type=float)
    p.add_argument("--p", type=float)
    p.add_argument("--transformed", action="store_true", help="take (ell, k) directly")
    p.add_argument("--ell", type=float)
    p.add_argument("--k", type=float)
    p.add_argument("--out")
    p.set_defaults(func=cmd_exponents)

    p = sub.add_parser("verify-kernels", help="check the kernel identities at random points")
    p.add_argument("--ell", type=float, nargs="+", default=[0.0, 1.0, 2.0])
    p.add_argument("--samples", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--pde-tol", type=float, default=1e-5)
    p.add_argument("--out")
    p.set_defaults(func=cmd_verify_kernels)

    p = sub.add_parser("solve1d", help="exact vs finite-difference solution of the linear problem")
    p.add_argument("--config", required=True)
    p.add_argument("--probes", help="comma-separated x values")
    p.add_argument("--out-dir", default="solve1d_out")
    p.add_argument("--grid", action="store_true", help="also write the finest FD grid at T")
    p.set_defaults(func=cmd_solve1d)

    p = sub.add_parser("simulate", help="semilinear blow-up simulation")
    p.add_argument("--config", required=True)
    p.add_argument("--out-dir", default="simulate_out")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("lifespan", help="lifespan T(eps) over a list of amplitudes")
    p.add_argument("--config", required=True)
    p.add_argument("--epsilons", required=True, help="comma-separated amplitudes")
    p.add_argument("--out-dir", default="lifespan_out")
    p.set_defaults(func=cmd_lifespan)

    p = sub.add_parser("figure1", help="classification-region curves for a given n")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--points", type=int, default=201)
    p.add_argument("--out")
    p.set_defaults(func=cmd_figure1)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except USAGE_ERRORS as exc:
        print(f"wavelab {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except (WavelabError, ArithmeticError, OSError) as exc:
        print(f"wavelab {args.command}: failed: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
