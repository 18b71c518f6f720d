"""
Command line front end.

    delaycorr analyze  [--config PATH] [--out PATH] [--seed INT] [--workers N] [--quiet]
    delaycorr mc       ...
    delaycorr tradeoff ...

Exit status: 0 on success, 2 on a configuration error, 1 on a numerical failure.
"""

import argparse
import csv
import io
import itertools
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from functools import partial

from .channel import LinkBudget, layout_for_delta
from .config import ExperimentConfig, load_config, with_mode
from .errors import ConfigError, NumericalError
from .metrics import evaluate_point
from .montecarlo import TrialConfig, run
from .tradeoff import build_tradeoff

log = logging.getLogger("delaycorr")


def _cell(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return format(v, ".12g")
    if v is None:
        return ""
    return str(v)


def to_csv(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\r\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_cell(v) for v in row])
    return buf.getvalue()


def _db(x):
    return 10.0 ** (x / 10.0)


def _metric_kw(cfg: ExperimentConfig):
    return dict(angle_nodes=cfg.angle_nodes, semi_nodes=cfg.semi_nodes, log_base=cfg.log_base)


def _analyze_point(cfg, task):
    k_db, delta, snr_db = task
    return evaluate_point(cfg.scenario(k_db), delta, _db(snr_db), **_metric_kw(cfg))


def _pad(values, width):
    values = [float(v) for v in values]
    return values + [None] * (width - len(values))


def cmd_analyze(cfg: ExperimentConfig) -> str:
    """Asymptotic MSE, BER and spectral efficiency over (K_R, delta, SNR)."""
    tasks = list(itertools.product(cfg.rician_factor_db, cfg.deltas, cfg.snr_db))
    fn = partial(_analyze_point, cfg)
    if cfg.workers > 1:
        with ProcessPoolExecutor(cfg.workers) as ex:
            points = list(ex.map(fn, tasks))
    else:
        points = [fn(t) for t in tasks]
    width = max(p.l_ratio for p in points)
    header = (["delta", "snr_db", "K_R_db", "sigma_p_sq"]
              + [f"sigma_d_sq_{u}" for u in range(1, width + 1)] + ["P_e", "eta_up"])
    rows = [
        [delta, snr_db, k_db, p.sigma_p_sq, *_pad(p.sigma_d_sq, width), p.p_e, p.eta]
        for (k_db, delta, snr_db), p in zip(tasks, points)
    ]
    return to_csv(header, rows)


def cmd_mc(cfg: ExperimentConfig) -> str:
    """Monte Carlo MSE and BER next to the analytic BER, with z-scores."""
    tasks = list(itertools.product(cfg.rician_factor_db, cfg.deltas, cfg.snr_db))
    width = max(round(1.0 / d - 1.0) for d in cfg.deltas)
    rows = []
    for k_db, delta, snr_db in tasks:
        s = cfg.scenario(k_db)
        layout = layout_for_delta(cfg.num_pilots, delta)
        budget = LinkBudget.from_snr_db(snr_db, cfg.symbol_energy)
        trial_cfg = TrialConfig(s, layout, budget, cfg.num_trials, cfg.base_seed,
                                cfg.detector_csi, cfg.frames_per_block)
        rep = run(trial_cfg, workers=cfg.workers)
        analytic = evaluate_point(s, delta, budget.snr, **_metric_kw(cfg)).p_e
        ber, ber_se = rep.ber
        z = (ber - analytic) / ber_se if ber_se > 0 else float("nan")
        rows.append([delta, snr_db, k_db, *rep.mse_pilot,
                     *_pad([m for m, _ in rep.mse_data_per_u], width), ber, ber_se, analytic, z])
    header = (["delta", "snr_db", "K_R_db", "empirical_mse_pilot", "mse_pilot_stderr"]
              + [f"empirical_mse_{u}" for u in range(1, width + 1)]
              + ["empirical_ber", "ber_stderr", "analytic_ber", "z_score"])
    return to_csv(header, rows)


def cmd_tradeoff(cfg: ExperimentConfig) -> str:
    """Normalised P_e / eta polyline over [delta_SE-opt, 0.5] per (K_R, SNR)."""
    header = ["snr_db", "K_R_db", "delta", "L", "p_e", "eta", "p_e_norm", "eta_norm", "is_anchor"]
    rows = []
    for k_db, snr_db in itertools.product(cfg.rician_factor_db, cfg.snr_db):
        curve = build_tradeoff(cfg.scenario(k_db), _db(snr_db), cfg.l_max, cfg.workers, **_metric_kw(cfg))
        for p in curve.points:
            rows.append([snr_db, k_db, p.delta, p.l_ratio, p.p_e, p.eta, p.p_e_norm, p.eta_norm, p.is_anchor])
    return to_csv(header, rows)


COMMANDS = {"analyze": cmd_analyze, "mc": cmd_mc, "tradeoff": cmd_tradeoff}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="delaycorr", description=__doc__.splitlines()[1])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in COMMANDS.items():
        p = sub.add_parser(name, help=fn.__doc__)
        p.add_argument("--config", metavar="PATH", help="INI-style experiment config")
        p.add_argument("--out", metavar="PATH", help="CSV destination (default: config output, '-' = stdout)")
        p.add_argument("--seed", type=int, help="override run.base_seed")
        p.add_argument("--workers", type=int, help="override run.workers")
        p.add_argument("--quiet", action="store_true", help="no config echo or progress on stderr")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO,
                        format="%(name)s: %(message)s", stream=sys.stderr)
    try:
        cfg = load_config(args.config, base_seed=args.seed, workers=args.workers, output=args.out)
        cfg = with_mode(cfg, args.command)
        if not args.quiet:
            sys.stderr.write("# resolved configuration\n" + cfg.to_text())
        text = COMMANDS[args.command](cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (NumericalError, ArithmeticError, ValueError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 1
    if cfg.output == "-":
        sys.stdout.write(text)
    else:
        with open(cfg.output, "w", newline="", encoding="utf-8") as fh:
            fh.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
