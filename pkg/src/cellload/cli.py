"""Command-line front end.

Subcommands::

    cellload stable-fraction    [--validate]   stable fraction over a sweep
    cellload mean-load          [--validate]   EI / CF / mean-cell mean loads over a sweep
    cellload throughput-compare                dynamic vs static-user throughput over lambda_u
    cellload selftest                          oracle-equivalence report

Common flags: --config PATH, --realizations N, --seed N, --jobs N,
--out PATH, --format {csv,json}. Any other ``--key value`` pair overrides
the config key of the same name (dashes and underscores are equivalent).
The seed falls back to the CELLLOAD_SEED environment variable.

Units at this boundary: lambda_bs and lambda_u are per km^2 (BS/km^2 and
users/s/km^2), sigma_bits in bits, powers in dBm, gains in dB. ``k_pathloss_db``
is the path-loss gain at 1 m and defaults to ``-(32.4 + 20 log10 carrier_ghz)``.

Exit codes: 0 success, 1 usage or config error, 2 validation or selftest failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass

import numpy as np

from . import analytic, diagnostics, dynsim, geomc
from .config import RunConfig, apply_setting, load_config
from .errors import ConfigError, DomainError, HighSNRViolation, InstabilityError

EXIT_OK, EXIT_USAGE, EXIT_VALIDATION = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


@dataclass
class SweepResult:
    columns: list
    rows: list
    passed: bool = True

    def to_csv(self) -> str:
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(self.columns)
        for row in self.rows:
            wr.writerow([_fmt(v) for v in row])
        return buf.getvalue()

    def to_json(self) -> str:
        recs = [{c: _jsonable(v) for c, v in zip(self.columns, row)} for row in self.rows]
        return json.dumps({"columns": self.columns, "rows": recs}, indent=1, sort_keys=False) + "\n"


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return v


def _jsonable(v):
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else None
    if isinstance(v, np.integer):
        return int(v)
    return v


def _safe(fn, *args, **kw):
    try:
        return fn(*args, **kw)
    except (HighSNRViolation, DomainError):
        return float("nan")


# ---------------------------------------------------------------- commands


def cmd_stable_fraction(cfg: RunConfig, validate=False, jobs=1) -> SweepResult:
    cols = [cfg.sweep_variable, "stable_fraction"]
    if validate:
        cols += ["mc_stable_fraction", "mc_cells", "band", "within_band"]
    rows, ok = [], True
    seed = cfg.resolved_seed()
    for gi, value in enumerate(cfg.sweep_values):
        model = cfg.model(**{cfg.sweep_variable: value})
        sf = analytic.stable_fraction(model, cfg.approx)
        row = [value, sf]
        if validate:
            run = geomc.run_monte_carlo(
                model,
                cfg.realizations,
                seed + gi,
                inner_cells=cfg.inner_cells,
                n_integration_points=cfg.n_integration_points,
                guard_factor=cfg.guard_factor,
                jobs=jobs,
                keep_cells=True,
            )
            loads = run.cells.load
            emp = float(np.mean(loads < 1.0))
            # circularity tolerance plus DKW 95 % band
            band = 0.05 + math.sqrt(math.log(2 / 0.05) / (2 * len(loads)))
            inside = abs(emp - sf) <= band
            ok &= inside
            row += [emp, len(loads), band, inside]
        rows.append(row)
    return SweepResult(cols, rows, ok)


def cmd_mean_load(cfg: RunConfig, validate=False, jobs=1) -> SweepResult:
    cols = [cfg.sweep_variable, "ei_mean_load", "cf_mean_load", "mean_cell_load"]
    if validate:
        cols += [
            "mc_typical_load",
            "mc_typical_stderr",
            "mc_zero_load",
            "mc_zero_stderr",
            "mean_cell_ge_ei",
            "ei_in_mc_typical_band",
        ]
    rows, ok = [], True
    seed = cfg.resolved_seed()
    for gi, value in enumerate(cfg.sweep_values):
        model = cfg.model(**{cfg.sweep_variable: value})
        ei = _safe(analytic.ei_mean_load, model, cfg.approx)
        cf = _safe(analytic.cf_mean_load, model, cfg.approx) if model.alpha == 2.0 else float("nan")
        mc = analytic.mean_load_mc_baseline(model)
        row = [value, ei, cf, mc]
        if validate:
            run = geomc.run_monte_carlo(
                model,
                cfg.realizations,
                seed + gi,
                inner_cells=cfg.inner_cells,
                n_integration_points=cfg.n_integration_points,
                guard_factor=cfg.guard_factor,
                jobs=jobs,
            )
            tm, ts = run.typical_mean_load()
            zm, zs = run.zero_mean_load()
            ordered = mc >= ei
            in_band = abs(ei - tm) <= 1.96 * ts
            ok &= bool(ordered and in_band)
            row += [tm, ts, zm, zs, ordered, in_band]
        rows.append(row)
    return SweepResult(cols, rows, ok)


def cmd_throughput_compare(cfg: RunConfig, jobs=1) -> SweepResult:
    """Dynamic (PS) vs static Poisson-user throughput over a lambda_u sweep.

    ``sweep_values`` are read as lambda_u in users/s/km^2 regardless of
    ``sweep_variable``.
    """
    cols = [
        "lambda_u",
        "w",
        "rho_bar",
        "mean_users",
        "r_dyn_formula",
        "r_dyn_sim",
        "r_dyn_ci95",
        "r_ppp_sim",
        "r_ppp_ci95",
        "unstable_cells",
        "gap_significant",
        "flagged",
    ]
    seed = cfg.resolved_seed()
    base = cfg.model()
    half, guard = geomc.default_window(base.lam, cfg.sim_inner_cells, cfg.guard_factor)
    r = geomc.sample_ppp(base.lam, half, geomc.realization_seed(seed, 0), guard)
    sim = dynsim.SimConfig(
        duration_s=cfg.sim_duration_s,
        warmup_s=cfg.sim_warmup_s,
        seed=seed,
        max_users_cap=cfg.max_users_cap,
    )
    rows = []
    for value in cfg.sweep_values:
        model = cfg.model(lambda_u=value)
        if model.w == 0:
            rows.append([value, 0.0, 0.0, 0.0, 0.0, float("nan"), float("nan"), float("nan"), float("nan"), 0, False, False])
            continue
        dyn = dynsim.simulate_dynamic(r, model, sim, cfg.n_integration_points)
        stable = ~dyn.unstable
        rho_bar = float(np.mean(dyn.rho_hat[stable])) if stable.any() else 1.0
        flagged = bool(dyn.unstable_cells > 0 or rho_bar >= 1.0)
        try:
            n_bar = analytic.mean_active_users(rho_bar)
            r_formula = analytic.dyn_throughput(rho_bar, model)
        except InstabilityError:
            n_bar, r_formula = float("nan"), 0.0
        r_dyn, r_dyn_ci = dyn.flow_throughput_hat, 1.96 * dyn.flow_throughput_stderr
        if flagged:
            r_formula, r_dyn = 0.0, 0.0
        if math.isfinite(n_bar) and n_bar > 0:
            st = dynsim.simulate_static_ppp_users(r, model, n_bar, sim, cfg.static_draws, cfg.n_integration_points)
            r_ppp, r_ppp_ci = st.throughput_hat, 1.96 * st.throughput_stderr
        else:
            r_ppp, r_ppp_ci = float("nan"), float("nan")
        gap = (not flagged) and abs(r_dyn - r_ppp) > r_dyn_ci + r_ppp_ci
        rows.append([value, model.w, rho_bar, n_bar, r_formula, r_dyn, r_dyn_ci, r_ppp, r_ppp_ci, dyn.unstable_cells, gap, flagged])
    return SweepResult(cols, rows, True)


def cmd_selftest(cfg: RunConfig) -> SweepResult:
    checks = diagnostics.run_checks(cfg.model(), cfg.tolerances)
    rows = [[c.name, c.measured, "" if c.tolerance is None else c.tolerance, c.passed] for c in checks]
    return SweepResult(["check", "measured", "tolerance", "passed"], rows, all(c.passed for c in checks))


# ---------------------------------------------------------------- entry point


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="cellload", description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in ("stable-fraction", "mean-load", "throughput-compare", "selftest"):
        sp = sub.add_parser(name)
        sp.add_argument("--config", metavar="PATH")
        sp.add_argument("--realizations", type=int, metavar="N")
        sp.add_argument("--seed", type=int, metavar="N")
        sp.add_argument("--jobs", type=int, default=1, metavar="N")
        sp.add_argument("--out", metavar="PATH")
        sp.add_argument("--format", choices=("csv", "json"), default="csv")
        if name in ("stable-fraction", "mean-load"):
            sp.add_argument("--validate", action="store_true")
    return p


def _parse_overrides(extra):
    pairs = []
    it = iter(extra)
    for tok in it:
        if not tok.startswith("--"):
            raise UsageError(f"unexpected argument {tok!r}")
        key = tok[2:]
        if "=" in key:
            key, val = key.split("=", 1)
        else:
            try:
                val = next(it)
            except StopIteration:
                raise UsageError(f"missing value for {tok}") from None
        pairs.append((key, val))
    return pairs


def resolve_config(args, extra) -> RunConfig:
    cfg = load_config(args.config) if args.config else RunConfig()
    for key, val in _parse_overrides(extra):
        apply_setting(cfg, key, val, "command line")
    if args.seed is not None:
        cfg.seed = args.seed
    if args.realizations is not None:
        cfg.realizations = args.realizations
    return cfg.validate()


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args, extra = parser.parse_known_args(argv)
        cfg = resolve_config(args, extra)
    except (UsageError, ConfigError) as exc:
        print(f"cellload: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    jobs = max(1, args.jobs)
    try:
        if args.command == "stable-fraction":
            result = cmd_stable_fraction(cfg, args.validate, jobs)
        elif args.command == "mean-load":
            result = cmd_mean_load(cfg, args.validate, jobs)
        elif args.command == "throughput-compare":
            result = cmd_throughput_compare(cfg, jobs)
        else:
            result = cmd_selftest(cfg)
    except ConfigError as exc:
        print(f"cellload: error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    text = result.to_json() if args.format == "json" else result.to_csv()
    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write(text)
        meta = {"command": args.command, "format": args.format, "passed": bool(result.passed), "config": cfg.as_dict()}
        with open(args.out + ".meta.json", "w") as fh:
            json.dump(meta, fh, indent=1, sort_keys=True, default=str)
            fh.write("\n")
    else:
        sys.stdout.write(text)
    if not result.passed:
        print(f"cellload: {args.command}: validation failed", file=sys.stderr)
        return EXIT_VALIDATION
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
