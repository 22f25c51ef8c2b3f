"""Command-line front end.

Exit codes: 0 success, 1 internal/numerical failure, 2 infeasible or
out-of-domain configuration, 3 malformed configuration.  Every run writes
its tables as CSV (provenance comment lines prefixed ``#``) plus a
``run_manifest.txt`` echoing the configuration, seed, and wall time;
CSV bytes are identical across reruns of the same (config, seed, version).
"""

from __future__ import annotations

import argparse
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .arbitrage import CallCurve, check_consistency, construct_arbitrage
from .callmax import CallPosition, lambda_sweep, terminal_wealth_cdf
from .config import RunConfig
from .errors import (AccuracyError, ConfigError, DomainError, InfeasibleError,
                     UnsupportedRegimeError)
from .market import Measure
from .onetouch import (HedgeMode, OneTouchSpec, hobson_optimal_strike,
                       onetouch_price)
from .onetouch import sweep as onetouch_sweep
from .passage import LineBoundary, gamma1, gamma2
from .pricing import rho, z
from .tables import ResultTable, config_hash

_VIOLATION_CODES = {"convexity": 0, "monotonicity": 1, "spot_anchor": 2,
                    "slope": 3, "nonnegativity": 4}


def _provenance(cfg: RunConfig) -> dict:
    return {"config": config_hash(cfg.canonical()),
            "seed": cfg.get("run", "seed", int),
            "version": __version__}


def _outdir(cfg: RunConfig, args) -> Path:
    out = args.out or cfg.sections["run"].get("outdir") or \
        os.environ.get("INTRINSICOPT_OUT", ".")
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _write_manifest(cfg, outdir, command, t0, files):
    text = [f"command = {command}",
            f"version = {__version__}",
            f"seed = {cfg.get('run', 'seed', int)}",
            f"config_hash = {config_hash(cfg.canonical())}",
            f"wall_time_s = {time.time() - t0:.3f}",
            f"outputs = {', '.join(files)}",
            "", "[config]", cfg.canonical()]
    (outdir / "run_manifest.txt").write_text("\n".join(text), encoding="utf-8")


# ---------------------------------------------------------------------- #
# subcommands
# ---------------------------------------------------------------------- #

def _cmd_call_sweep(cfg: RunConfig, args) -> list[str]:
    m = cfg.market()
    K = cfg.get("call", "K", float)
    delta_c = cfg.get("call", "delta_c", float)
    lambdas = cfg.grid("call", "lambda_min", "lambda_max", "lambda_points")
    prov = _provenance(cfg)
    table = lambda_sweep(m, K, delta_c, lambdas, provenance=prov)
    outdir = _outdir(cfg, args)
    table.to_csv(outdir / "call_sweep.csv")
    # companion curves on the strike line (inputs of the first two figures)
    Kd = m.discounted_strike(K)
    ts = np.linspace(0.0, m.T, 201)
    lam_mid = float(lambdas[-1]) if len(lambdas) else 1.0
    rho_phi = ResultTable(
        name="rho_phi", columns=("t", "rho", "phi"),
        rows=np.column_stack([ts, rho(m, ts, Kd), m.phi_on_strike_line(ts, Kd)]),
        provenance=prov)
    z_curve = ResultTable(
        name="z_curve", columns=("t", "z"),
        rows=np.column_stack([ts, z(m, ts, lam_mid, Kd)]),
        provenance={**prov, "lambda": lam_mid})
    rho_phi.to_csv(outdir / "rho_phi.csv")
    z_curve.to_csv(outdir / "z_curve.csv")
    return ["call_sweep.csv", "rho_phi.csv", "z_curve.csv"]


def _cmd_call_cdf(cfg: RunConfig, args) -> list[str]:
    m = cfg.market()
    K = cfg.get("call", "K", float)
    delta_c = cfg.get("call", "delta_c", float)
    measure = Measure.parse(cfg.sections["run"]["measure"])
    files = []
    outdir = _outdir(cfg, args)
    for lam in cfg.float_list("call", "cdf_lambdas"):
        pos = CallPosition(K=K, lam=lam, delta_c=delta_c)
        table = terminal_wealth_cdf(m, pos, measure=measure,
                                    provenance=_provenance(cfg))
        fname = f"cdf_lambda_{lam:g}.csv"
        table.to_csv(outdir / fname)
        files.append(fname)
    return files


def _onetouch_spec(cfg) -> OneTouchSpec:
    sec = cfg.sections["onetouch"]
    return OneTouchSpec(B=float(sec["B"]), K=float(sec["K"]),
                        premium=float(sec["premium"]), w0=float(sec["w0"]),
                        alpha=float(sec["alpha"]))


def _cmd_onetouch_utility(cfg: RunConfig, args) -> list[str]:
    m = cfg.market(w0_key=("onetouch", "w0"), alpha_key=("onetouch", "alpha"))
    spec = _onetouch_spec(cfg)
    grid = cfg.grid("onetouch", "w0_min", "w0_max", "w0_points")
    steps = cfg.get("onetouch", "lattice_steps", int)
    prov = _provenance(cfg)
    prov["onetouch_price"] = onetouch_price(m, spec)
    blocks = []
    for mode in cfg.sections["onetouch"]["modes"].split(","):
        mode = HedgeMode.parse(mode.strip())
        blocks.append(onetouch_sweep(m, spec, mode, "w0", grid,
                                     lattice_steps=steps, provenance=prov))
    rows = np.vstack([b.rows for b in blocks])
    table = ResultTable(name="onetouch_utility",
                        columns=("w0", "mode", "M", "utility", "ce",
                                 "feasible"),
                        rows=rows, provenance=blocks[0].provenance)
    outdir = _outdir(cfg, args)
    table.to_csv(outdir / "onetouch_utility.csv")
    return ["onetouch_utility.csv"]


def _cmd_onetouch_ce_k(cfg: RunConfig, args) -> list[str]:
    m = cfg.market(w0_key=("onetouch", "w0"), alpha_key=("onetouch", "alpha"))
    spec = _onetouch_spec(cfg)
    grid = cfg.grid("onetouch", "K_min", "K_max", "K_points")
    prov = _provenance(cfg)
    prov["hobson_optimal_k"] = hobson_optimal_strike(m, spec.B)
    sweep_table = onetouch_sweep(m, spec, HedgeMode.SEMI_STATIC, "K", grid,
                                 provenance=prov)
    feasible = sweep_table.column("feasible") > 0
    table = ResultTable(name="onetouch_ce_k", columns=("K", "ce"),
                        rows=np.column_stack([sweep_table.column("K")[feasible],
                                              sweep_table.column("ce")[feasible]]),
                        provenance=sweep_table.provenance)
    outdir = _outdir(cfg, args)
    table.to_csv(outdir / "onetouch_ce_k.csv")
    return ["onetouch_ce_k.csv"]


def _read_curve(path, s0, maturity) -> CallCurve:
    strikes, prices = [], []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = [tok.strip() for tok in line.split(",")]
            if parts[0].lower() == "strike":
                continue
            if len(parts) < 2:
                raise ConfigError(f"{path}:{lineno}: expected strike,price")
            try:
                strikes.append(float(parts[0]))
                prices.append(float(parts[1]))
            except ValueError:
                raise ConfigError(
                    f"{path}:{lineno}: non-numeric entry {line!r}") from None
    if not strikes:
        raise ConfigError(f"{path}: no quotes found")
    return CallCurve.from_arrays(strikes, prices, s0, maturity)


def _cmd_arb_check(cfg: RunConfig, args) -> list[str]:
    if not args.curve:
        raise ConfigError("arb-check requires --curve file.csv")
    m = cfg.market()
    curve = _read_curve(args.curve, m.s0, m.T)
    dT = m.discount(m.T)
    report = check_consistency(curve, dT=dT)
    outdir = _outdir(cfg, args)
    lines = [f"audited {len(curve.quotes)} quotes at maturity T={m.T:g} "
             f"(D_T = {dT:.6g})"]
    rows = []
    files = ["arb_report.txt", "arb_violations.csv"]
    for i, v in enumerate(report.violations):
        lines.append(f"VIOLATION {v.kind}: {v.detail}")
        port = construct_arbitrage(curve, v, dT=dT)
        lines.append(f"  portfolio: calls {port.call_legs}, asset "
                     f"{port.asset_qty:+g}, credit {port.cash_credit:.6g}")
        lines.append(f"  certificate: {port.certificate}")
        ks = (list(v.strikes) + [0.0, 0.0, 0.0])[:3]
        rows.append([_VIOLATION_CODES[v.kind], *ks, port.epsilon,
                     port.wealth_floor])
        legs = ResultTable(
            name=f"arb_portfolio_{i}", columns=("strike", "quantity"),
            rows=np.asarray(port.call_legs + ((0.0, port.asset_qty),)),
            provenance={**_provenance(cfg), "kind": v.kind,
                        "epsilon": port.epsilon, "cash_credit": port.cash_credit,
                        "wealth_floor": port.wealth_floor,
                        "note": "strike 0.0 row is the asset leg"})
        fname = f"arb_portfolio_{i}.csv"
        legs.to_csv(outdir / fname)
        files.append(fname)
    for item in report.not_checkable:
        lines.append(f"not checkable without a zero-strike quote: {item}")
    if report.clean:
        lines.append("no violations")
    (outdir / "arb_report.txt").write_text("\n".join(lines) + "\n",
                                           encoding="utf-8")
    table = ResultTable(
        name="arb_violations",
        columns=("kind", "K1", "K2", "K3", "epsilon", "wealth_floor"),
        rows=np.asarray(rows, dtype=float).reshape(-1, 6),
        provenance={**_provenance(cfg),
                    "kind_codes": "convexity=0 monotonicity=1 spot_anchor=2 "
                                  "slope=3 nonnegativity=4"})
    table.to_csv(outdir / "arb_violations.csv")
    print("\n".join(lines))
    return files


def _cmd_densities(cfg: RunConfig, args) -> list[str]:
    m = cfg.market()
    sec = cfg.sections["densities"]
    level = float(sec["level"]) if sec["level"] != "" else \
        m.discounted_strike(cfg.get("call", "K", float))
    measure = Measure.parse(sec["measure"])
    b = LineBoundary(x=m.x0, y=m.level_of(level), beta=m.line_slope(measure))
    u = np.linspace(cfg.get("densities", "u_min", float), m.T,
                    cfg.get("densities", "u_points", int))
    t_slice = cfg.get("densities", "t", float)
    prov = {**_provenance(cfg), "x": b.x, "y": b.y, "beta": b.beta,
            "measure": measure.value}
    g1 = ResultTable(name="gamma1", columns=("u", "gamma1"),
                     rows=np.column_stack([u, gamma1(u, b)]), provenance=prov)
    width = 6.0 * np.sqrt(t_slice)
    v = np.linspace(b.x - width, b.x + width,
                    cfg.get("densities", "v_points", int))
    g2 = ResultTable(name="gamma2", columns=("v", "gamma2"),
                     rows=np.column_stack([v, gamma2(v, t_slice, b)]),
                     provenance={**prov, "t": t_slice})
    outdir = _outdir(cfg, args)
    g1.to_csv(outdir / "densities_gamma1.csv")
    g2.to_csv(outdir / "densities_gamma2.csv")
    return ["densities_gamma1.csv", "densities_gamma2.csv"]


def _cmd_verify(cfg: RunConfig, args) -> list[str]:
    from .acceptance import run_all
    ok = run_all(fast=args.fast)
    if not ok:
        raise RuntimeError("verification suite reported failures")
    return []


# ---------------------------------------------------------------------- #
# entry point
# ---------------------------------------------------------------------- #

_COMMANDS = {
    "call-sweep": _cmd_call_sweep,
    "call-cdf": _cmd_call_cdf,
    "onetouch-utility": _cmd_onetouch_utility,
    "onetouch-ce-k": _cmd_onetouch_ce_k,
    "arb-check": _cmd_arb_check,
    "densities": _cmd_densities,
    "verify": _cmd_verify,
}


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="intrinsicopt",
        description="Utility maximisation under intrinsic wealth constraints")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", default=None, help="INI config file")
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--set", action="append", default=[], dest="overrides",
                       metavar="SECTION.KEY=VALUE")
        if name == "arb-check":
            p.add_argument("--curve", default=None,
                           help="CSV of strike,price quotes")
        if name == "verify":
            p.add_argument("--fast", action="store_true",
                           help="reduced sample sizes")
    return parser


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    t0 = time.time()
    try:
        overrides = list(args.overrides)
        if args.seed is not None:
            overrides.append(f"run.seed={args.seed}")
        cfg = RunConfig.load(args.config, overrides)
        files = _COMMANDS[args.command](cfg, args)
        if args.command != "verify":
            outdir = _outdir(cfg, args)
            _write_manifest(cfg, outdir, args.command, t0, files)
            print(f"wrote {', '.join(files + ['run_manifest.txt'])} "
                  f"to {outdir}")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 3
    except (DomainError, InfeasibleError, UnsupportedRegimeError) as exc:
        print(f"infeasible or out-of-domain: {exc}", file=sys.stderr)
        return 2
    except (AccuracyError, RuntimeError, ArithmeticError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
