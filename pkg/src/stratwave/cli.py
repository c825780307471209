"""Command-line front end: reproducible experiment runs with CSV/JSON outputs.

Subcommands: catalog, special, kernel, decay, rank, witness, fourier-check.
Every run writes its data as CSV, a JSON summary embedding the fully
resolved configuration, and (for report paths) a matplotlib figure next to
the delimited output.  Exit codes: 0 pass, 2 verdict failure, 1 error,
64 usage.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import __version__
from .errors import StratwaveError
from .groups import GroupSpec, catalog, homogeneous_dimension, spec_to_json
from .kernel import KernelRequest, kernel
from .quadrature import QuadratureBudget
from .reporting import decay_figure, fmt, witness_figure, write_csv, write_json
from .spectrum import WindowSpec
from . import analysis, fourier, selftest

USAGE_EXIT = 64


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(USAGE_EXIT, f"{self.prog}: error: {message}\n")


def _default_jobs() -> int:
    try:
        return max(1, int(os.environ.get("STRATWAVE_JOBS", "1")))
    except ValueError:
        return 1


# ----------------------------------------------------------------------------
# argument parsing helpers
# ----------------------------------------------------------------------------


def parse_group(text: str) -> GroupSpec:
    """'htype:4,2' or 'heisenberg:2' -> catalog spec."""
    if ":" in text:
        kind, _, rest = text.partition(":")
        params = [int(v) for v in rest.split(",") if v != ""]
    else:
        kind, params = text, []
    return catalog(kind, *params)


def parse_window(text: str) -> WindowSpec:
    a, b = (float(v) for v in text.split(","))
    return WindowSpec(a, b)


def parse_t_grid(text: str) -> list[float]:
    """'20:500:12log' (geometric), '1:10:5' or '1:10:5lin' (linear), '1,10,100'."""
    if ":" in text:
        lo, hi, n = text.split(":")
        if n.endswith("log"):
            return [float(v) for v in np.geomspace(float(lo), float(hi), int(n[:-3]))]
        if n.endswith("lin"):
            n = n[:-3]
        return [float(v) for v in np.linspace(float(lo), float(hi), int(n))]
    return [float(v) for v in text.split(",")]


def parse_point(text: str, spec: GroupSpec):
    """'P;Q;Z;R' blocks (comma-separated entries) or one flat comma list."""
    if ";" in text:
        parts = [([float(v) for v in blk.split(",")] if blk else []) for blk in text.split(";")]
        while len(parts) < 4:
            parts.append([])
        P, Q, Z, R = parts[:4]
    else:
        flat = [float(v) for v in text.split(",")]
        need = 2 * spec.d + spec.p + spec.k
        if spec.k == 0 and len(flat) == need + 1 and flat[-1] == 0.0:
            flat = flat[:-1]  # tolerate a written-out zero R slot on radical-free groups
        if len(flat) != need:
            raise ValueError(f"point needs {need} coordinates (d={spec.d}, p={spec.p}, k={spec.k})")
        P = flat[: spec.d]
        Q = flat[spec.d : 2 * spec.d]
        Z = flat[2 * spec.d : 2 * spec.d + spec.p]
        R = flat[2 * spec.d + spec.p :]
    return spec.element(
        P=np.asarray(P) if P else 0.0,
        Q=np.asarray(Q) if Q else 0.0,
        R=np.asarray(R) if R else 0.0,
        Z=np.asarray(Z) if Z else 0.0,
    )


def _load_config(path: str | None) -> dict:
    if not path:
        return {}
    with open(path) as fh:
        return json.load(fh)


def _resolve(args: argparse.Namespace, config: dict, key: str, default):
    """Priority: explicit CLI flag > config file > default."""
    cli_value = getattr(args, key.replace("-", "_"), None)
    if cli_value is not None:
        return cli_value
    if key in config:
        return config[key]
    return default


# ----------------------------------------------------------------------------
# subcommands
# ----------------------------------------------------------------------------


def _cmd_catalog(args) -> int:
    text = args.group if not args.params else args.group + ":" + ",".join(args.params)
    spec = parse_group(text)
    print(
        f"{spec.name}: p={spec.p} d={spec.d} k={spec.k} dim_v={spec.dim_v} "
        f"n={spec.dim} Q_hom={homogeneous_dimension(spec)} "
        f"eta_mode={spec.eta_mode.value} frame_mode={spec.frame_mode.value}"
    )
    print(spec_to_json(spec))
    return 0


def _cmd_special(args) -> int:
    import csv
    import io

    rows = selftest.run_suite()
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["check", "detail", "value", "threshold", "status"])
    for r in rows:
        writer.writerow([r.check, r.detail, fmt(r.value), fmt(r.threshold), "pass" if r.passed else "FAIL"])
    text = buf.getvalue()
    print(text, end="")
    if args.out:
        path = Path(args.out) / "special_selftest.csv"
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
    return 0 if all(r.passed for r in rows) else 2


def _cmd_kernel(args, config: dict) -> int:
    spec = parse_group(_resolve(args, config, "group", None))
    w = parse_window(_resolve(args, config, "window", "1,2"))
    t = float(_resolve(args, config, "t", 10.0))
    m_max = int(_resolve(args, config, "mmax", 8))
    tol = float(_resolve(args, config, "tol", 1e-8))
    point = parse_point(_resolve(args, config, "point", "0;0;0;0"), spec)
    req = KernelRequest(spec=spec, window=w, t=t, x=point, m_max=m_max, tol=tol)
    kv = kernel(req)
    payload = {
        "config": {
            "command": "kernel",
            "group": spec.name,
            "window": w.metadata(),
            "t": t,
            "point": {
                "P": point.P.tolist(),
                "Q": point.Q.tolist(),
                "Z": point.Z.tolist(),
                "R": point.R.tolist(),
            },
            "mmax": m_max,
            "tol": tol,
            "normalization": "leading constant and radical Jacobian set to 1",
            "version": __version__,
        },
        "value_re": kv.value.real,
        "value_im": kv.value.imag,
        "tail_bound": kv.series_tail_bound,
        "quad_error": kv.quadrature_error,
        "nodes": kv.nodes_used,
        "fresnel_modulus": kv.fresnel_modulus,
    }
    print(json.dumps(payload, indent=2, sort_keys=True))
    if args.out:
        write_json(Path(args.out) / "kernel.json", payload)
    return 0


def _base_config(command: str, spec: GroupSpec, extra: dict) -> dict:
    cfg = {"command": command, "group": spec.name, "version": __version__}
    cfg.update(extra)
    return cfg


def _cmd_decay(args, config: dict) -> int:
    spec = parse_group(_resolve(args, config, "group", None))
    w = parse_window(_resolve(args, config, "window", "1,2"))
    t_spec = _resolve(args, config, "t", "20:500:12log")
    t_grid = parse_t_grid(t_spec)
    m_max = int(_resolve(args, config, "mmax", 6))
    tol = float(_resolve(args, config, "tol", 1e-8))
    jobs = int(_resolve(args, config, "jobs", _default_jobs()))
    margin = float(_resolve(args, config, "margin", 0.1))
    z_text = _resolve(args, config, "z_grid", None)
    if z_text:
        Z_grid = [np.asarray([float(v) for v in blk.split(",")]) for blk in z_text.split(";")]
    else:
        Z_grid = analysis.stationary_z_grid(spec, w)
    report = analysis.decay_scan(
        spec, w, t_grid, Z_grid=Z_grid, m_max=m_max, tol=tol, slope_margin=margin, jobs=jobs
    )
    out = Path(_resolve(args, config, "out", "."))
    prefix = _resolve(args, config, "prefix", f"decay_{spec.name.replace('(', '_').replace(')', '').replace(',', '_')}")
    header = ["t"] + [f"Z{i+1}" for i in range(spec.p)] + [
        "re", "im", "modulus", "tail_bound", "quad_error", "nodes",
    ]
    rows = [
        [r.t, *r.Z, r.value.real, r.value.imag, r.modulus, r.tail_bound, r.quad_error, r.nodes]
        for r in report.rows
    ]
    csv_path = write_csv(out / f"{prefix}.csv", header, rows)
    cfg = _base_config(
        "decay",
        spec,
        {
            "window": w.metadata(),
            "t": t_spec,
            "t_grid": t_grid,
            "z_grid": [list(map(float, z)) for z in Z_grid],
            "mmax": m_max,
            "tol": tol,
            "jobs": jobs,
            "slope_margin": margin,
            "quadrature": asdict(QuadratureBudget(tol=tol)),
            "normalization": "leading constant and radical Jacobian set to 1",
        },
    )
    summary = {
        "config": cfg,
        "slope": report.slope,
        "ci": report.slope_ci,
        "theory": report.theory_slope,
        "verdict": bool(report.verdict),
        "dropped_t": list(report.dropped),
        "t_kept": list(report.t_kept),
        "sup_modulus": list(report.sup_modulus),
    }
    write_json(out / f"{prefix}.json", summary)
    if _resolve(args, config, "plot", True):
        decay_figure(out / f"{prefix}.png", report)
    print(json.dumps({k: summary[k] for k in ("slope", "ci", "theory", "verdict")}, sort_keys=True))
    print(f"wrote {csv_path}")
    return 0 if report.verdict else 2


def _cmd_rank(args, config: dict) -> int:
    spec = parse_group(_resolve(args, config, "group", None))
    samples = int(_resolve(args, config, "samples", 12))
    seed = int(_resolve(args, config, "seed", 0))
    alpha_max = int(_resolve(args, config, "alpha_max", 4))
    report = analysis.assumption_check(spec, sample_count=samples, seed=seed, alpha_max=alpha_max)
    out = Path(_resolve(args, config, "out", "."))
    prefix = _resolve(args, config, "prefix", f"rank_{spec.name.replace('(', '_').replace(')', '').replace(',', '_')}")
    header = (
        ["alpha", *[f"lam{i+1}" for i in range(spec.p)]]
        + [f"sigma{i+1}" for i in range(spec.p)]
        + ["rank_ok", "euler_residual"]
    )
    rows = [
        ["|".join(map(str, e.alpha)), *e.lam, *e.singular_values, e.rank_ok, e.euler_residual]
        for e in report.entries
    ]
    write_csv(out / f"{prefix}.csv", header, rows)
    summary = {
        "config": _base_config(
            "rank", spec, {"samples": samples, "seed": seed, "alpha_max": alpha_max,
                           "tol_zero": report.tol_zero, "tol_rank": report.tol_rank}
        ),
        "expected_rank": report.expected_rank,
        "verdict": bool(report.verdict),
        "max_euler_residual": report.max_euler_residual,
        "entries": len(report.entries),
    }
    write_json(out / f"{prefix}.json", summary)
    print(json.dumps({k: summary[k] for k in ("expected_rank", "verdict", "max_euler_residual")}, sort_keys=True))
    return 0 if report.verdict else 2


def _cmd_witness(args, config: dict) -> int:
    spec = parse_group(_resolve(args, config, "group", None))
    kind = _resolve(args, config, "kind", "optimality")
    t_spec = _resolve(args, config, "t", "20:500:12log")
    ts = parse_t_grid(t_spec)
    out = Path(_resolve(args, config, "out", "."))
    if kind == "optimality":
        radius = float(_resolve(args, config, "radius", 0.5))
        result = analysis.optimality_witness(spec, ts, support_radius=radius)
        theory = -0.5 * (spec.k + spec.p - 1)
        verdict = abs(result.exponent - theory) <= float(_resolve(args, config, "margin", 0.1))
        extra = {"radius": radius, "theory": theory}
    elif kind == "nondispersion":
        w = parse_window(_resolve(args, config, "window", "1,2"))
        result = analysis.nondispersion_witness(spec, w, ts)
        moduli = np.asarray(result.moduli)
        spread = float(np.max(np.abs(moduli - moduli[0])) / np.abs(moduli[0]))
        verdict = spread <= 1e-6 and float(moduli[0]) > 0
        theory = 0.0
        extra = {"window": w.metadata(), "pairwise_relative_spread": spread, "theory": theory}
    else:
        raise ValueError(f"unknown witness kind {kind!r}")
    prefix = _resolve(
        args, config, "prefix",
        f"witness_{kind}_{spec.name.replace('(', '_').replace(')', '').replace(',', '_')}",
    )
    header = ["t", "re", "im", "modulus"]
    rows = [[t, v.real, v.imag, m] for t, v, m in zip(result.ts, result.values, result.moduli)]
    write_csv(out / f"{prefix}.csv", header, rows)
    summary = {
        "config": _base_config("witness", spec, {"kind": kind, "t": t_spec, **extra}),
        "classification": result.classification,
        "exponent": result.exponent,
        "ci": result.exponent_ci,
        "verdict": bool(verdict),
        "meta": result.meta,
    }
    write_json(out / f"{prefix}.json", summary)
    if _resolve(args, config, "plot", True):
        witness_figure(out / f"{prefix}.png", result)
    print(json.dumps({k: summary[k] for k in ("classification", "exponent", "verdict")}, sort_keys=True))
    return 0 if verdict else 2


def _cmd_fourier_check(args, config: dict) -> int:
    grid = fourier.FourierGrid(
        lam_min=float(_resolve(args, config, "lam_min", 0.01)),
        lam_max=float(_resolve(args, config, "lam_max", 2.5)),
        lam_nodes=int(_resolve(args, config, "lam_nodes", 40)),
        n_hermite=int(_resolve(args, config, "n_hermite", 16)),
        box=float(_resolve(args, config, "box", 6.5)),
        spatial_nodes=int(_resolve(args, config, "spatial_nodes", 72)),
        box_z=float(_resolve(args, config, "box_z", 11.0)),
        spatial_nodes_z=int(_resolve(args, config, "spatial_nodes_z", 64)),
    )
    verdict_doc = fourier_check_suite(grid)
    verdict_doc["config"] = {
        "command": "fourier-check",
        "grid": asdict(grid),
        "version": __version__,
    }
    out = _resolve(args, config, "out", None)
    if out:
        write_json(Path(out) / "fourier_check.json", verdict_doc)
    print(json.dumps(verdict_doc, indent=2, sort_keys=True, default=str))
    return 0 if verdict_doc["verdict"] else 2


def fourier_check_suite(grid: fourier.FourierGrid) -> dict:
    """kappa universality, inversion round trips, and sublaplacian diagonalization."""
    h1 = catalog("heisenberg", 1)
    tests = [
        lambda P, Q, Z: np.exp(-(P**2 + Q**2) / 2 - Z**2 / 8),
        lambda P, Q, Z: np.exp(-(P**2 + Q**2) / 1.6 - Z**2 / 6),
        lambda P, Q, Z: np.exp(-((P - 0.4) ** 2 + (Q + 0.3) ** 2) / 2 - Z**2 / 8),
    ]
    kappas = []
    datas = []
    for f in tests:
        data = fourier.forward(f, grid)
        kappas.append(fourier.plancherel_kappa(f, grid, data))
        datas.append(data)
    kappa = float(np.mean(kappas))
    kappa_spread = float((max(kappas) - min(kappas)) / min(kappas))
    inv_raw = fourier.inverse_at(h1.element(), datas[0], 1.0).real
    kappa_inversion = float(tests[0](0.0, 0.0, 0.0) / inv_raw)
    points = [(0.0, 0.0, 0.0), (0.5, 0.0, 0.0), (0.0, 0.5, 0.7), (0.3, -0.4, 1.0), (-0.6, 0.2, -0.5)]
    roundtrip = []
    for f, data in zip(tests, datas):
        worst = 0.0
        for pt in points:
            x = h1.element(P=[pt[0]], Q=[pt[1]], Z=[pt[2]])
            worst = max(worst, abs(fourier.inverse_at(x, data, kappa) - f(*pt)))
        roundtrip.append(worst)
    diag = fourier.diagonalization_residual(tests[0], grid)
    verdict = (
        kappa_spread < 0.02
        and abs(kappa_inversion / kappa - 1.0) < 0.02
        and max(roundtrip) < 1e-2
        and diag < 1e-2
    )
    return {
        "kappa_estimates": [float(k) for k in kappas],
        "kappa_mean": kappa,
        "kappa_spread": kappa_spread,
        "kappa_inversion": kappa_inversion,
        "roundtrip_errors": [float(r) for r in roundtrip],
        "diag_residual": float(diag),
        "verdict": bool(verdict),
    }


# ----------------------------------------------------------------------------
# entry point
# ----------------------------------------------------------------------------


def build_parser() -> _Parser:
    parser = _Parser(prog="stratwave", description=__doc__)
    parser.add_argument("--version", action="version", version=f"stratwave {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("catalog", help="print a catalog group spec")
    p.add_argument("group", help="kind[:params], e.g. heisenberg:2 or htype:4,3")
    p.add_argument("params", nargs="*", help="alternatively, space-separated parameters")

    p = sub.add_parser("special", help="special-function invariant suite")
    p.add_argument("--selftest", action="store_true", required=True)
    p.add_argument("--out")

    for name in ("kernel", "decay", "rank", "witness", "fourier-check"):
        p = sub.add_parser(name, help=f"{name} experiment")
        p.add_argument("--config", help="JSON file with parameter values")
        p.add_argument("--out", help="output directory")
        if name in ("decay", "rank", "witness"):
            p.add_argument("--prefix", help="output file stem")
        if name in ("kernel", "decay", "witness"):
            p.add_argument("--group")
            p.add_argument("--window", help="a,b ring bounds")
            p.add_argument("--t", help="time or grid, e.g. 20:500:12log")
            p.add_argument("--mmax", type=int)
            p.add_argument("--tol", type=float)
        if name == "kernel":
            p.add_argument("--point", help="'P;Q;Z;R' blocks or flat comma list")
        if name == "decay":
            p.add_argument("--z-grid", dest="z_grid", help="semicolon-separated Z vectors")
            p.add_argument("--jobs", type=int)
            p.add_argument("--margin", type=float)
            p.add_argument("--no-plot", dest="plot", action="store_false", default=None)
        if name == "rank":
            p.add_argument("--group")
            p.add_argument("--samples", type=int)
            p.add_argument("--seed", type=int)
            p.add_argument("--alpha-max", dest="alpha_max", type=int)
        if name == "witness":
            p.add_argument("--kind", choices=["optimality", "nondispersion"])
            p.add_argument("--radius", type=float)
            p.add_argument("--margin", type=float)
            p.add_argument("--no-plot", dest="plot", action="store_false", default=None)
        if name == "fourier-check":
            for field_name in ("lam-min", "lam-max", "box", "box-z"):
                p.add_argument(f"--{field_name}", dest=field_name.replace("-", "_"), type=float)
            for field_name in ("lam-nodes", "n-hermite", "spatial-nodes", "spatial-nodes-z"):
                p.add_argument(f"--{field_name}", dest=field_name.replace("-", "_"), type=int)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "catalog":
            return _cmd_catalog(args)
        if args.command == "special":
            return _cmd_special(args)
        config = _load_config(getattr(args, "config", None))
        if args.command == "kernel":
            return _cmd_kernel(args, config)
        if args.command == "decay":
            return _cmd_decay(args, config)
        if args.command == "rank":
            return _cmd_rank(args, config)
        if args.command == "witness":
            return _cmd_witness(args, config)
        if args.command == "fourier-check":
            return _cmd_fourier_check(args, config)
        parser.error(f"unknown command {args.command!r}")
    except (StratwaveError, ValueError, OSError) as exc:
        print(f"stratwave: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
