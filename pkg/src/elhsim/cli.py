"""Command-line front end.

Subcommands: simulate, check-coeffs, identities, sweep, report.  Exit
codes: 0 success, 2 configuration error, 3 blow-up, 4 threshold failure
(report --assert and identities).  ELH_THREADS caps transform parallelism.
"""

from __future__ import annotations

import argparse
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .coefficients import classify, eta0, from_independent
from .config import ConfigError, RunConfig, load_config
from .diagnostics import (
    DiagnosticsRecord,
    diagnostics_record,
    energy_residual,
    identity_suite,
)
from .dynamics import (
    BlowUpError,
    CflError,
    State,
    make_initial_data,
    renormalize_director,
    step,
)
from .outputs import RNG_DESCRIPTION, write_csv, write_snapshot
from .spectral import leray_project, make_grid, mollify

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_BLOWUP = 3
EXIT_THRESHOLD = 4

ETA_MONOTONE_SLACK = 1e-8


@dataclass
class RunResult:
    records: list[DiagnosticsRecord]
    outcome: str  # "completed" | "blowup"
    message: str | None = None


def resolve_eta(config: RunConfig) -> float | None:
    if config.eta_mode == "none":
        return None
    cap = None
    if classify(config.coeffs, config.coeffs.delta or 0.5).kind == "strict_damping":
        cap = eta0(config.coeffs, config.eta_constant)
    if config.eta_mode == "auto":
        return cap  # None outside the strict-damping class
    if cap is None or not 0 < config.eta_value <= cap:
        raise ConfigError(
            [f"[diagnostics] eta = {config.eta_value} needs the strict-damping "
             f"class and eta <= {cap}"]
        )
    return config.eta_value


def run_simulate(config: RunConfig, corrupt_multiplier: bool = False) -> RunResult:
    """Advance the configured run, producing artifacts on disk."""
    grid = make_grid(config.dim, config.n)
    state = make_initial_data(config.kind, config.amplitude, config.seed, grid)
    solver = config.solver_config()
    eta = resolve_eta(config)
    delta = config.coeffs.delta or (0.5 if config.coeffs.lambda1 == 0 else None)

    def record(st: State) -> DiagnosticsRecord:
        return diagnostics_record(
            st, config.coeffs, config.s, eta=eta,
            estimate_constant=config.eta_constant, delta=delta, pad="rule23",
        )

    def snapshot(st: State, istep: int) -> None:
        if config.snapshot_prefix is not None:
            write_snapshot(f"{config.snapshot_prefix}_{istep:08d}.snap", st)

    nsteps = round(config.t_end / config.dt)
    records = [record(state)]
    snapshot(state, 0)
    outcome, message = "completed", None
    try:
        for istep in range(1, nsteps + 1):
            state = step(state, config.coeffs, solver, corrupt_multiplier)
            if solver.renormalize_every and istep % solver.renormalize_every == 0:
                state = renormalize_director(state)
                print(f"renormalized director at step {istep} (t={state.t:.6g})",
                      file=sys.stderr)
            if istep % config.sample_every == 0:
                records.append(record(state))
            if config.snapshot_every and istep % config.snapshot_every == 0:
                snapshot(state, istep)
    except BlowUpError as exc:
        outcome, message = "blowup", str(exc)
    except CflError as exc:
        # the amplitude grew until the stability limit fell below dt
        outcome, message = "blowup", f"stability limit crossed mid-run: {exc}"

    if outcome == "completed" and config.snapshot_prefix is not None:
        if not config.snapshot_every or nsteps % config.snapshot_every:
            snapshot(state, nsteps)

    fill_residuals(records)
    if config.csv_path is not None:
        write_csv(config.csv_path, records, csv_meta(config, outcome))
    return RunResult(records, outcome, message)


def fill_residuals(records: list[DiagnosticsRecord]) -> None:
    """Post-hoc energy-balance residual; row i gets the interval ending at i."""
    if len(records) < 3:
        return
    t = np.array([r.t for r in records])
    E = np.array([r.E_basic for r in records])
    D = np.array([r.D_total for r in records])
    _, rel = energy_residual(t, E, D)
    for i, r in enumerate(records[1:], start=1):
        r.residual = float(rel[i - 1])


def csv_meta(config: RunConfig, outcome: str) -> dict[str, str]:
    c = config.coeffs
    if config.preset_name:
        coeff_desc = f"preset:{config.preset_name}"
    else:
        coeff_desc = (
            f"mu1={c.mu1!r} mu4={c.mu4!r} mu5={c.mu5!r} mu6={c.mu6!r} "
            f"lambda1={c.lambda1!r} rho1={c.rho1!r}"
        )
    return {
        "format": "elh-timeseries v1",
        "rng": RNG_DESCRIPTION,
        "seed": str(config.seed),
        "grid": f"dim={config.dim} n={config.n}",
        "coefficients": coeff_desc,
        "solver": f"dt={config.dt!r} integrator={config.integrator} "
                  f"dealias={config.dealias}",
        "diagnostics": f"s={config.s} sample_every={config.sample_every}",
        "outcome": outcome,
    }


def summarize(records: list[DiagnosticsRecord], outcome: str) -> dict[str, str]:
    res = [r.residual for r in records if r.residual is not None]
    max_res = max(res) if res else float("nan")
    max_h = max(r.h_max for r in records)
    eta_vals = [r.E_eta for r in records if r.E_eta is not None]
    if len(eta_vals) < 2:
        verdict = "n.a."
    else:
        diffs = np.diff(np.array(eta_vals))
        verdict = "yes" if np.all(diffs <= ETA_MONOTONE_SLACK) else "no"
    return {
        "samples": str(len(records)),
        "t_final": repr(records[-1].t),
        "max_rel_residual": repr(max_res),
        "max_h": repr(max_h),
        "e_eta_monotone": verdict,
        "e_hs_final_over_initial": repr(
            records[-1].E_hs / records[0].E_hs if records[0].E_hs else float("nan")
        ),
        "outcome": outcome,
    }


def print_summary_line(summary: dict[str, str]) -> None:
    print(
        "summary: "
        f"max_rel_residual={summary['max_rel_residual']} "
        f"max_h={summary['max_h']} "
        f"e_eta_monotone={summary['e_eta_monotone']} "
        f"outcome={summary['outcome']}"
    )


def cmd_simulate(args) -> int:
    config = load_config(args.config)
    result = run_simulate(config)
    if result.message:
        print(result.message, file=sys.stderr)
    print_summary_line(summarize(result.records, result.outcome))
    return EXIT_OK if result.outcome == "completed" else EXIT_BLOWUP


def cmd_check_coeffs(args) -> int:
    config = load_config(args.config)
    c = config.coeffs
    print("coefficients:")
    for key in ("mu1", "mu2", "mu3", "mu4", "mu5", "mu6",
                "lambda1", "lambda2", "rho1"):
        print(f"  {key} = {getattr(c, key)!r}")
    if c.delta is not None:
        print(f"  delta = {c.delta!r}")
    delta = c.delta
    if c.lambda1 == 0 and delta is None:
        delta = 0.5
        print("  (lambda1 = 0 and no delta given; classifying with delta = 0.5)")
    cls = classify(c, delta)
    if cls.kind == "strict_damping":
        combo = c.mu5 + c.mu6 + c.lambda2**2 / c.lambda1
        print(f"class: strict_damping (mu5+mu6+lambda2^2/lambda1 = {combo!r})")
    elif cls.kind == "zero_lambda1":
        lhs = (1 - cls.delta) * c.mu4 * (c.mu5 + c.mu6)
        rhs = 2 * c.lambda2**2
        print(f"class: zero_lambda1 (delta = {cls.delta!r}, "
              f"margin inequality {lhs!r} >= {rhs!r})")
    else:
        print(f"class: invalid ({cls.reason})")
    return EXIT_OK


def identity_fields(config: RunConfig):
    """Band-limited random fields for the identity checks (band n/8)."""
    grid = make_grid(config.dim, config.n)
    band = max(1.0, config.n / 8.0)
    st = make_initial_data("random", 0.3, config.seed, grid, band=band)
    eps = 1.0 / band
    u = leray_project(mollify(st.u, eps))
    d = mollify(st.d, eps)
    w = mollify(st.w, eps)
    return u, d, w


def cmd_identities(args) -> int:
    config = load_config(args.config)
    u, d, w = identity_fields(config)
    results = identity_suite(u, d, w, config.coeffs)
    ok = True
    for r in results:
        passed = r.passed(args.tol)
        ok = ok and passed
        print(f"{r.name:16s} lhs={r.lhs!r} rhs={r.rhs!r} "
              f"diff={r.diff:.3e} tol={args.tol * r.scale:.3e} "
              f"{'ok' if passed else 'FAIL'}")
    return EXIT_OK if ok else EXIT_THRESHOLD


_SWEEP_AXES = {
    "initial.amplitude": lambda cfg, v: replace(cfg, amplitude=float(v)),
    "initial.seed": lambda cfg, v: replace(cfg, seed=int(v)),
    "solver.dt": lambda cfg, v: replace(cfg, dt=float(v)),
    "coefficients.lambda1": lambda cfg, v: replace(
        cfg,
        preset_name=None,
        coeffs=from_independent(
            cfg.coeffs.mu1, cfg.coeffs.mu4, cfg.coeffs.mu5, cfg.coeffs.mu6,
            float(v), cfg.coeffs.rho1, cfg.coeffs.delta,
        ),
    ),
}


def cmd_sweep(args) -> int:
    config = load_config(args.config)
    if args.axis not in _SWEEP_AXES:
        print(f"unknown sweep axis {args.axis!r}; "
              f"valid: {', '.join(sorted(_SWEEP_AXES))}", file=sys.stderr)
        return EXIT_CONFIG
    values = [v for v in args.values.split(",") if v]
    mutate = _SWEEP_AXES[args.axis]

    def one(idx_value):
        idx, value = idx_value
        cfg = mutate(config, value)
        if cfg.csv_path is not None:
            cfg = replace(cfg, csv_path=f"{cfg.csv_path}.{idx}")
        if cfg.snapshot_prefix is not None:
            cfg = replace(cfg, snapshot_prefix=f"{cfg.snapshot_prefix}.{idx}")
        try:
            result = run_simulate(cfg)
        except Exception as exc:  # per-point failures recorded, sweep continues
            return value, None, f"error: {exc}"
        return value, summarize(result.records, result.outcome), None

    with ThreadPoolExecutor(max_workers=min(4, len(values))) as pool:
        rows = list(pool.map(one, enumerate(values)))

    print(f"sweep over {args.axis}: {len(values)} points")
    print(f"{'value':>12s} {'outcome':>10s} {'E_hs(end)/E_hs(0)':>18s} "
          f"{'max_h':>12s} {'max_residual':>13s}")
    for value, summary, err in rows:
        if summary is None:
            print(f"{value:>12s} {'failed':>10s}  {err}")
            continue
        print(f"{value:>12s} {summary['outcome']:>10s} "
              f"{float(summary['e_hs_final_over_initial']):>18.6g} "
              f"{float(summary['max_h']):>12.3e} "
              f"{float(summary['max_rel_residual']):>13.3e}")
    return EXIT_OK


def cmd_report(args) -> int:
    from .outputs import read_csv

    meta, cols = read_csv(args.csv)
    res = cols["residual"]
    res = res[np.isfinite(res)]
    max_res = float(res.max()) if res.size else float("nan")
    max_h = float(np.nanmax(cols["h_max"]))
    eta_col = cols["E_eta"]
    eta_vals = eta_col[np.isfinite(eta_col)]
    if eta_vals.size < 2:
        verdict = "n.a."
    else:
        verdict = "yes" if np.all(np.diff(eta_vals) <= ETA_MONOTONE_SLACK) else "no"
    print("report:")
    for key in ("format", "seed", "grid", "coefficients", "outcome"):
        if key in meta:
            print(f"  {key} = {meta[key]}")
    print(f"  samples = {cols['t'].size}")
    print(f"  t_final = {float(cols['t'][-1])!r}")
    print(f"  max_rel_residual = {max_res!r}")
    print(f"  max_h = {max_h!r}")
    print(f"  e_eta_monotone = {verdict}")
    if args.assert_thresholds:
        ok = True
        if not (max_res <= args.max_residual):
            print(f"  FAIL residual {max_res!r} > {args.max_residual!r}")
            ok = False
        if not (max_h <= args.max_drift):
            print(f"  FAIL drift {max_h!r} > {args.max_drift!r}")
            ok = False
        if meta.get("outcome") != "completed":
            print("  FAIL outcome is not 'completed'")
            ok = False
        return EXIT_OK if ok else EXIT_THRESHOLD
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="elh",
        description="Pseudospectral solver for an inertial liquid-crystal flow",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="advance a configured run")
    p.add_argument("config")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("check-coeffs", help="print the coefficient set and its class")
    p.add_argument("config")
    p.set_defaults(func=cmd_check_coeffs)

    p = sub.add_parser("identities", help="check the stress-work cancellation identities")
    p.add_argument("config")
    p.add_argument("--tol", type=float, default=1e-10)
    p.set_defaults(func=cmd_identities)

    p = sub.add_parser("sweep", help="run a one-parameter family of simulations")
    p.add_argument("config")
    p.add_argument("--axis", required=True)
    p.add_argument("--values", required=True, help="comma-separated list")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("report", help="summarize a diagnostics CSV")
    p.add_argument("csv")
    p.add_argument("--assert", dest="assert_thresholds", action="store_true")
    p.add_argument("--max-residual", type=float, default=1e-4)
    p.add_argument("--max-drift", type=float, default=1e-6)
    p.set_defaults(func=cmd_report)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(exc, file=sys.stderr)
        return EXIT_CONFIG
    except FileNotFoundError as exc:
        print(exc, file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
