"""Command-line experiment runner.

    rarefaction-lab wave-check   --config exp.ini --out results/
    rarefaction-lab simulate     --config exp.ini --out results/ [--restart dump.bin]
    rarefaction-lab decay-study  --config exp.ini --out results/

Exit codes: 0 success, 2 invalid configuration, 3 a check failed,
4 the simulation blew up.
"""

import argparse
import csv
import logging
import math
import os
import sys
import time

import numpy as np
from threadpoolctl import threadpool_limits

from .config import ConfigError, ExperimentConfig, load_config
from .diagnostics import CsvSink, FitError, fit_decay
from .grid import read_field
from .solver import BlowUpError, initial_field, run, save_checkpoint
from .studies import (
    CheckResult,
    decay_series,
    derivative_identity_error,
    euler_residual_ratio,
    fan_endpoint_error,
    fan_gap,
    invariant_spread,
    kq_normalisation_error,
    log_times,
    predicted_exponent,
    second_derivative_ratio,
)
from .wave import sample_line

log = logging.getLogger("rarefaction_lab")

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_CHECK = 3
EXIT_BLOWUP = 4

_P_LABEL = {1: "L1", 2: "L2", math.inf: "Linf"}


def _write_rows(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([format(v, ".17g") if isinstance(v, float) else v for v in row])


def _series_table(series):
    keys = sorted(series, key=lambda k: (k[0], k[1]))
    times = [t for t, _ in series[keys[0]]]
    header = ["t"] + [f"{q}_{_P_LABEL[p]}" for q, p in keys]
    rows = [[t] + [series[k][i][1] for k in keys] for i, t in enumerate(times)]
    return header, rows


def wave_checks(cfg, spec):
    """Run the smooth-wave invariant suite; returns ``(results, series)``."""
    g = cfg.gas
    eps, dw, q = spec.eps, spec.strength, spec.q
    results = []

    def add(name, passed, detail):
        results.append(CheckResult(name, bool(passed), detail))

    err = kq_normalisation_error(q)
    add("kq-normalisation", err <= 1e-10, f"|kq*mass - 1| = {err:.2e}")

    xs = np.linspace(-300.0 / eps, 300.0 / eps, 60)
    ts = np.concatenate([[0.0], np.geomspace(1e-2, 1e3 / eps, 12)])
    spread = invariant_spread(g, spec, xs, ts)
    worst = max(spread.values())
    add(
        "riemann-invariant-constancy",
        worst <= 1e-9,
        ", ".join(f"{k}={v:.2e}" for k, v in spread.items()),
    )
    if spread["sigma1_endstates"] > 1e-9 or spread["entropy_endstates"] > 1e-9:
        return results, None

    err = fan_endpoint_error(g, spec)
    add("fan-end-states", err <= 1e-12, f"max deviation {err:.2e}")

    ok, detail = True, []
    for t in (0.0, 1.0, 10.0 / eps, 1e3 / eps):
        x, w, wx, _ = sample_line(spec, t, 2001, reach=100.0)
        ok &= bool(np.all(w > spec.w_minus) and np.all(w < spec.w_plus))
        ok &= bool(np.all(wx > 0) and np.all(np.diff(w) >= 0) and np.all(np.diff(x) > 0))
        detail.append(f"t={t:g}: min w_x={np.min(wx):.2e}")
    add("monotone-and-bounded", ok, "; ".join(detail))

    rng = np.random.default_rng(12345)
    e_rho, e_theta = derivative_identity_error(
        g, spec, rng.uniform(-100 / eps, 100 / eps, 200), rng.uniform(0, 100 / eps, 200)
    )
    add("derivative-identities", max(e_rho, e_theta) <= 1e-9, f"rho {e_rho:.2e}, theta {e_theta:.2e}")

    ratio = second_derivative_ratio(
        spec, np.linspace(-10.0 / eps, 10.0 / eps, 200), np.concatenate([[0.0], np.geomspace(1e-2, 1e2 / eps, 19)])
    )
    add("second-derivative-domination", np.isfinite(ratio) and ratio <= q * (1 + 1e-9), f"max |w_xx|/(eps w_x) = {ratio:.4f}")

    window = cfg.decay.window
    times = log_times(window, cfg.decay.samples)
    series = decay_series(spec, times, g)
    fit_inf = fit_decay(series[("w_x1", math.inf)])
    fit_2 = fit_decay(series[("w_x1", 2)])
    l1 = np.array([v for _, v in series[("w_x1", 1)]])
    l1_spread = float((l1.max() - l1.min()) / l1.mean())
    add("decay-slope-linf", abs(fit_inf.exponent + 1.0) <= 0.05, f"slope {fit_inf.exponent:.4f} (target -1 +/- 0.05) over {window}")
    add("decay-slope-l2", abs(fit_2.exponent + 0.5) <= 0.05, f"slope {fit_2.exponent:.4f} (target -0.5 +/- 0.05) over {window}")
    add("decay-l1-constant", l1_spread <= 1e-6, f"relative spread {l1_spread:.2e}")

    gaps = [fan_gap(spec, t) for t in np.geomspace(10.0 / eps, 1e3 / eps, 9)]
    decreasing = all(b < a for a, b in zip(gaps, gaps[1:]))
    add(
        "asymptotic-equivalence",
        decreasing and gaps[-1] < 0.05 * dw,
        f"sup gap {gaps[0]:.3e} -> {gaps[-1]:.3e} (limit {0.05 * dw:.3e})",
    )

    ratios = euler_residual_ratio(g, spec, 0.1 / eps)
    add(
        "euler-residual-order",
        all(3.5 <= r <= 4.5 for r in ratios.values()),
        ", ".join(f"{k} {v:.3f}" for k, v in ratios.items()),
    )
    return results, series


def cmd_wave_check(cfg, out):
    try:
        cfg.validate(simulation=False, check_curve=False)
        spec = cfg.wave_spec(check_curve=False)
    except (ConfigError, ValueError) as exc:
        log.error("invalid configuration: %s", exc)
        return EXIT_INVALID, []
    results, series = wave_checks(cfg, spec)
    os.makedirs(out, exist_ok=True)
    with open(os.path.join(out, "wave_check.txt"), "w") as fh:
        for r in results:
            fh.write(r.line() + "\n")
    if series is not None:
        header, rows = _series_table(series)
        _write_rows(os.path.join(out, "decay_series.csv"), header, rows)
    for r in results:
        print(r.line())
    return (EXIT_OK if all(r.passed for r in results) else EXIT_CHECK), results


def summarize(records):
    """Run summary figures from the emitted diagnostics records."""
    sup = [r.sup_dist for r in records]
    tail = sup[len(sup) - max(2, len(sup) // 3):]
    return {
        "t_final": records[-1].t,
        "max_h2": max(r.h2 for r in records),
        "initial_h2": records[0].h2,
        "sup_dist_initial": sup[0],
        "sup_dist_final": sup[-1],
        "sup_dist_ratio": sup[-1] / sup[0] if sup[0] > 0 else math.nan,
        "monotone_tail": all(b <= a for a, b in zip(tail, tail[1:])),
        "min_rho": min(r.min_rho for r in records),
        "min_theta": min(r.min_theta for r in records),
    }


def cmd_simulate(cfg, out, restart=None):
    try:
        spec = cfg.validate(simulation=True)
    except ConfigError as exc:
        log.error("invalid configuration: %s", exc)
        return EXIT_INVALID, None
    g, grid = cfg.gas, cfg.grid
    os.makedirs(out, exist_ok=True)
    t0, step0 = 0.0, 0
    if restart:
        field, t0, meta = read_field(restart)
        step0 = int(meta.get("step", 0))
        if field.grid != grid:
            log.error("restart grid %s does not match config grid %s", field.grid, grid)
            return EXIT_INVALID, None
    else:
        field = initial_field(g, spec, grid, cfg.perturbation)
    every = cfg.outputs.dump_every

    def dump(n, t, f):
        if every and n % every == 0:
            save_checkpoint(os.path.join(out, f"field_{n:07d}.bin"), f, t, n)

    if not restart:
        save_checkpoint(os.path.join(out, f"field_{0:07d}.bin"), field, t0, 0)
    csv_path = os.path.join(out, "diagnostics.csv")
    started = time.perf_counter()
    with CsvSink(csv_path) as sink:
        try:
            summary = run(g, spec, grid, cfg.solver, field, sink, t0=t0, step0=step0, callback=dump)
        except BlowUpError as exc:
            with open(os.path.join(out, "summary.txt"), "w") as fh:
                fh.write(f"status = blow-up\nmessage = {exc}\n")
            log.error("blow-up: %s", exc)
            return EXIT_BLOWUP, None
    final_step = step0 + summary.steps
    save_checkpoint(os.path.join(out, f"field_{final_step:07d}.bin"), summary.field, summary.t, final_step)
    figures = summarize(summary.records)
    figures.update(steps=summary.steps, wall_seconds=time.perf_counter() - started, status="ok")
    with open(os.path.join(out, "summary.txt"), "w") as fh:
        for k, v in figures.items():
            fh.write(f"{k} = {v!r}\n" if isinstance(v, float) else f"{k} = {v}\n")
    for k, v in figures.items():
        print(f"{k} = {v}")
    return EXIT_OK, figures


def decay_table(cfg, spec):
    times = log_times(cfg.decay.window, cfg.decay.samples)
    series = decay_series(spec, times, cfg.gas)
    rows = []
    for (qty, p), data in sorted(series.items(), key=lambda kv: (kv[0][0], kv[0][1])):
        fit = fit_decay(data)
        rows.append((qty, _P_LABEL[p], fit.exponent, predicted_exponent(qty, p, spec.q), fit.r_squared))
    return series, rows


def cmd_decay_study(cfg, out):
    try:
        spec = cfg.validate(simulation=False)
    except ConfigError as exc:
        log.error("invalid configuration: %s", exc)
        return EXIT_INVALID, []
    try:
        series, rows = decay_table(cfg, spec)
    except FitError as exc:
        log.error("decay fit failed: %s", exc)
        return EXIT_CHECK, []
    os.makedirs(out, exist_ok=True)
    header, srows = _series_table(series)
    _write_rows(os.path.join(out, "decay_series.csv"), header, srows)
    _write_rows(os.path.join(out, "decay_table.csv"), ["quantity", "norm", "fitted", "predicted", "r_squared"], rows)
    fitted = {(r[0], r[1]): r[2] for r in rows}
    l1 = np.array([v for _, v in series[("w_x1", 1)]])
    checks = [
        CheckResult("w_x1 Linf slope", abs(fitted[("w_x1", "Linf")] + 1.0) <= 0.05, f"{fitted[('w_x1', 'Linf')]:.4f}"),
        CheckResult("w_x1 L1 constant", (l1.max() - l1.min()) / l1.mean() <= 1e-6, f"spread {(l1.max() - l1.min()) / l1.mean():.2e}"),
        CheckResult("w_x1x1 Linf slope <= -1", fitted[("w_x1x1", "Linf")] <= -1.0, f"{fitted[('w_x1x1', 'Linf')]:.4f}"),
    ]
    for r in rows:
        print(f"{r[0]:>14s} {r[1]:>4s} fitted {r[2]: .4f} predicted {r[3]: .4f} r2 {r[4]:.5f}")
    for c in checks:
        print(c.line())
    return (EXIT_OK if all(c.passed for c in checks) else EXIT_CHECK), rows


def build_parser():
    parser = argparse.ArgumentParser(prog="rarefaction-lab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, helptext in (
        ("wave-check", "run the smooth-wave invariant suite"),
        ("simulate", "run a Navier-Stokes stability experiment"),
        ("decay-study", "fit decay exponents of the wave derivatives"),
    ):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--config", help="INI experiment file (defaults if omitted)")
        p.add_argument("--out", help="output directory (overrides [outputs] directory)")
        p.add_argument("--threads", type=int, help="kernel threads (overrides [outputs] threads)")
        p.add_argument("-v", "--verbose", action="store_true")
        if name == "simulate":
            p.add_argument("--restart", help="continue from a field dump")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = load_config(args.config) if args.config else ExperimentConfig()
    except (OSError, ConfigError) as exc:
        log.error("cannot load configuration: %s", exc)
        return EXIT_INVALID
    out = args.out or cfg.outputs.directory
    threads = args.threads or cfg.outputs.threads
    with threadpool_limits(limits=threads):
        if args.command == "wave-check":
            code, _ = cmd_wave_check(cfg, out)
        elif args.command == "simulate":
            code, _ = cmd_simulate(cfg, out, restart=args.restart)
        else:
            code, _ = cmd_decay_study(cfg, out)
    return code


if __name__ == "__main__":
    sys.exit(main())
