"""Command-line front end.

Four subcommands cover the pipeline: ``simulate`` writes synthetic sample
files, ``detect`` scores a sample file into a JSON decision report, ``roc``
sweeps detection probability over a false-alarm grid, and ``study`` runs
the degrees-of-freedom / estimation-error convergence tables.

Exit codes: 0 success, 2 configuration or usage error, 3 data error,
4 degenerate statistics.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

from . import __version__
from .detectors import default_lags, effective_alpha_star, run_detection
from .errors import (
    ConfigError,
    DataFormatError,
    DegenerateSeriesError,
    InvalidDofError,
)
from .experiments import (
    ExperimentConfig,
    analytical_pd,
    dof_convergence_study,
    empirical_roc,
    estimation_error_study,
)
from .io import (
    block_config_from,
    load_config,
    read_samples,
    read_samples_csv,
    scenario_from,
    signal_params_from,
    write_manifest,
    write_pivots,
    write_samples,
)
from .rng import substream
from .signal_model import JumpModel, NoiseOnly, generate_noise_blocks, generate_pivots, synthesize_blocks
from .spectral import estimate_carriers
from .detectors import first_differences

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_DEGENERATE = 4

_STREAM_SIMULATE = 8


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", required=True, help="flat TOML configuration file")
    parser.add_argument("--seed", type=int, default=None, help="master seed override")
    parser.add_argument(
        "--sidak-exponent",
        choices=["J", "J+1"],
        default="J",
        help="multiple-test correction exponent for the joint inference",
    )
    parser.add_argument(
        "--classical-vr-scaling",
        action="store_true",
        help="z-score the variance-ratio statistics by the sample length",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tonewalk",
        description="simulate, detect and benchmark random-walk frequency wander",
    )
    parser.add_argument("--version", action="version", version=f"tonewalk {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="write a synthetic sample file")
    _add_common(p_sim)
    p_sim.add_argument("--out", required=True, help="output sample file path")

    p_det = sub.add_parser("detect", help="score a sample file into a decision report")
    _add_common(p_det)
    p_det.add_argument("--input", required=True, help="sample file (or CSV with --csv-input)")
    p_det.add_argument("--csv-input", action="store_true", help="input is CSV with columns t,re,im")
    p_det.add_argument("--alpha", type=float, default=None, help="joint false-alarm level")
    p_det.add_argument("--out", default=None, help="write the JSON report here instead of stdout")

    p_roc = sub.add_parser("roc", help="analytical and Monte-Carlo ROC curves")
    _add_common(p_roc)
    p_roc.add_argument("--out", required=True, help="output CSV path")
    p_roc.add_argument("--trials", type=int, default=None, help="Monte-Carlo trials per grid point")
    p_roc.add_argument(
        "--analytical-only",
        action="store_true",
        help="skip the Monte-Carlo columns; consumes no randomness",
    )

    p_study = sub.add_parser("study", help="convergence studies (dof | esterr)")
    _add_common(p_study)
    p_study.add_argument("--kind", required=True, help="study kind: dof or esterr")
    p_study.add_argument("--out", required=True, help="output CSV path")
    p_study.add_argument("--trials", type=int, default=None, help="trials per grid point")

    return parser


def _experiment_config(cfg: dict, args) -> ExperimentConfig:
    block = block_config_from(cfg, args.config)
    params = signal_params_from(cfg, args.config)
    seed = args.seed if args.seed is not None else cfg["master_seed"]
    trials = getattr(args, "trials", None)
    return ExperimentConfig(
        config=block,
        params=params,
        jump_model=JumpModel(cfg["jump_model"]),
        j_lags=cfg["j_lags"],
        alphas=tuple(cfg["alphas"]),
        n_trials=trials if trials is not None else cfg["n_trials"],
        master_seed=seed,
        sidak_exponent=args.sidak_exponent,
        classical_vr_scaling=args.classical_vr_scaling,
        include_displacement=cfg["include_displacement"],
        start_bin=cfg["start_bin"],
    )


def cmd_simulate(args) -> int:
    cfg = load_config(args.config)
    block = block_config_from(cfg, args.config)
    params = signal_params_from(cfg, args.config)
    scenario = scenario_from(cfg, args.config)
    seed = args.seed if args.seed is not None else cfg["master_seed"]
    rng = substream(seed, _STREAM_SIMULATE)

    if isinstance(scenario, NoiseOnly):
        record = generate_noise_blocks(block, params.noise_variance, rng)
    else:
        pivots = generate_pivots(
            block,
            scenario,
            rng,
            start_bin=cfg["start_bin"],
            include_displacement=cfg["include_displacement"],
        )
        record = synthesize_blocks(pivots, params, block, rng)

    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    write_samples(out, record, block)
    if record.provenance is not None:
        write_pivots(str(out) + ".pivots.json", record.provenance)
    write_manifest(out, "simulate", {**cfg, "seed_used": seed}, seed, inputs={args.config: None})
    print(f"wrote {record.n_blocks} blocks ({len(record.samples)} samples) to {out}")
    return EXIT_OK


def cmd_detect(args) -> int:
    cfg = load_config(args.config)
    block = block_config_from(cfg, args.config)
    alpha = args.alpha if args.alpha is not None else cfg["alpha"]
    if args.csv_input:
        record = read_samples_csv(args.input, block)
    else:
        record, file_block = read_samples(args.input)
        if (file_block.n_per_block, file_block.n_blocks) != (
            block.n_per_block,
            block.n_blocks,
        ):
            raise DataFormatError(
                f"{args.input}: file is N={file_block.n_per_block}, "
                f"K={file_block.n_blocks} but config expects "
                f"N={block.n_per_block}, K={block.n_blocks}"
            )
    est = estimate_carriers(record, block)
    series = first_differences(est)
    lags = default_lags(cfg["j_lags"])
    report = {
        "alpha": alpha,
        "alpha_star": effective_alpha_star(alpha, len(lags), args.sidak_exponent),
        "peak_bins": [int(b) for b in est.peak_bins],
        "carrier_freqs": [float(f) for f in est.carrier_freqs],
        "first_differences": [float(y) for y in series.values],
    }
    try:
        decision = run_detection(
            series,
            block,
            alpha,
            lags=lags,
            sidak_exponent=args.sidak_exponent,
            classical_vr_scaling=args.classical_vr_scaling,
        )
    except (DegenerateSeriesError, InvalidDofError) as exc:
        report["verdict"] = "error:degenerate-series"
        report["error"] = str(exc)
        _emit_report(report, args, cfg)
        return EXIT_DEGENERATE
    report["verdict"] = decision.verdict.value
    report["cvt"] = {
        "chi_sq": decision.cvt.chi_sq,
        "dof": decision.cvt.dof,
        "z_score": decision.cvt.z_score,
        "threshold": decision.cvt.threshold,
        "stable": decision.cvt.stable,
    }
    report["vr_test"] = {
        "lags": list(decision.vrt.lags),
        "vr": list(decision.vrt.vr),
        "m1": list(decision.vrt.m1),
        "v1": decision.vrt.v1,
        "threshold": decision.vrt.threshold,
        "reject_rwh": decision.vrt.reject_rwh,
    }
    _emit_report(report, args, cfg)
    return EXIT_OK


def _emit_report(report: dict, args, cfg: dict) -> None:
    text = json.dumps(report, indent=1) + "\n"
    if args.out:
        out = Path(args.out)
        out.parent.mkdir(parents=True, exist_ok=True)
        manifest_path = write_manifest(
            out,
            "detect",
            {
                **cfg,
                "sidak_exponent": args.sidak_exponent,
                "classical_vr_scaling": args.classical_vr_scaling,
            },
            args.seed,
            inputs={args.input: None, args.config: None},
        )
        report["manifest"] = manifest_path.name
        out.write_text(json.dumps(report, indent=1) + "\n")
    else:
        sys.stdout.write(text)


def cmd_roc(args) -> int:
    cfg = load_config(args.config)
    exp = _experiment_config(cfg, args)
    rows = []
    if args.analytical_only:
        for alpha in exp.alphas:
            rows.append(
                {
                    "alpha": alpha,
                    "alpha_star": effective_alpha_star(alpha, exp.j_lags, exp.sidak_exponent),
                    "pd_analytical": analytical_pd(
                        alpha, exp.j_lags, exp.config, exp.params.snr, exp.sidak_exponent
                    ),
                    "pd_empirical": "",
                    "pd_stderr": "",
                    "pfa_empirical": "",
                    "converged_flag": "",
                }
            )
    else:
        result = empirical_roc(exp)
        for point in result.points:
            rows.append(
                {
                    "alpha": point.alpha,
                    "alpha_star": effective_alpha_star(
                        point.alpha, exp.j_lags, exp.sidak_exponent
                    ),
                    "pd_analytical": analytical_pd(
                        point.alpha, exp.j_lags, exp.config, exp.params.snr, exp.sidak_exponent
                    ),
                    "pd_empirical": point.pd,
                    "pd_stderr": point.pd_stderr,
                    "pfa_empirical": point.pfa_empirical,
                    "converged_flag": int(result.converged),
                }
            )
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    manifest_path = write_manifest(
        out,
        "roc",
        {
            **cfg,
            "analytical_only": args.analytical_only,
            "n_trials_used": exp.n_trials,
            "seed_used": exp.master_seed,
            "sidak_exponent": exp.sidak_exponent,
            "classical_vr_scaling": exp.classical_vr_scaling,
        },
        None if args.analytical_only else exp.master_seed,
        inputs={args.config: None},
    )
    _write_csv(out, rows, manifest_path.name)
    print(f"wrote {len(rows)} grid points to {out}")
    return EXIT_OK


def cmd_study(args) -> int:
    cfg = load_config(args.config)
    if args.kind not in ("dof", "esterr"):
        raise ConfigError(f"unknown study kind {args.kind!r}: expected 'dof' or 'esterr'")
    exp = _experiment_config(cfg, args)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    if args.kind == "dof":
        table = dof_convergence_study(exp, cfg["dof_n_grid"])
        rows = [
            {
                "n_per_block": row.n_per_block,
                "jump_model": row.jump_model.value,
                "mean_dof": row.mean_dof,
                "stderr": row.stderr,
                "dof_pooled": row.dof_pooled,
                "n_trials": row.n_trials,
                "n_errors": row.n_errors,
            }
            for row in table
        ]
    else:
        table = estimation_error_study(exp, cfg["esterr_sweep_param"], cfg["esterr_values"])
        rows = [
            {
                "swept_param": cfg["esterr_sweep_param"],
                "swept": row.swept,
                "rms_bin_error_pct": row.rms_bin_error_pct,
                "n_trials": row.n_trials,
                "n_errors": row.n_errors,
            }
            for row in table
        ]
    manifest_path = write_manifest(
        out,
        f"study:{args.kind}",
        {
            **cfg,
            "n_trials_used": exp.n_trials,
            "seed_used": exp.master_seed,
            "sidak_exponent": exp.sidak_exponent,
            "classical_vr_scaling": exp.classical_vr_scaling,
        },
        exp.master_seed,
        inputs={args.config: None},
    )
    _write_csv(out, rows, manifest_path.name)
    print(f"wrote {len(rows)} rows to {out}")
    return EXIT_OK


def _write_csv(path: Path, rows: list, manifest_name: str) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(f"# manifest: {manifest_name}\n")
        if rows:
            writer = csv.DictWriter(fh, fieldnames=list(rows[0].keys()))
            writer.writeheader()
            for row in rows:
                writer.writerow({k: _fmt(v) for k, v in row.items()})


def _fmt(value):
    if isinstance(value, float):
        return repr(value)
    return value


_COMMANDS = {
    "simulate": cmd_simulate,
    "detect": cmd_detect,
    "roc": cmd_roc,
    "study": cmd_study,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DataFormatError, OSError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (DegenerateSeriesError, InvalidDofError) as exc:
        print(f"degenerate statistics: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
