"""Command-line front end.

Usage::

    hierdecay spectrum --config run.toml
    hierdecay evolve   --config run.toml --method all --out results/
    hierdecay ensemble --config run.toml --seed 7
    hierdecay classify --config run.toml
    hierdecay fit      --config run.toml results/trajectory_spectral.csv

Exit codes: 0 ok, 2 configuration error, 3 numerical failure,
4 cross-method validation mismatch. The ``HIERDECAY_WORKERS`` environment
variable sets the number of ensemble workers.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .analysis import (
    classify_regime,
    fit_damped_cosine,
    fit_exponential,
    fit_sinc,
    run_ensemble,
)
from .analysis.ensemble import WORKERS_ENV, _worker_count
from .config import RunConfig, load_config
from .dynamics import evolve_full_model, evolve_reduced_ode, evolve_spectral, time_grid
from .errors import ConfigError, FitError, HierDecayError, NumericalError, ParameterError, ValidityHorizonError
from .export import metadata_block, read_trajectory, write_ensemble, write_json, write_spectrum, write_trajectory
from .model import build_full_model, build_reduced_hamiltonian
from .spectral import eigendecompose, identify_special_states

log = logging.getLogger("hierdecay")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICS, EXIT_VALIDATION = 0, 2, 3, 4
ODE_TOLERANCE = 1e-4
FULL_MODEL_TOLERANCE = 1e-2


class ValidationMismatch(HierDecayError):
    pass


def _outdir(cfg: RunConfig) -> Path:
    path = Path(cfg.output["directory"])
    path.mkdir(parents=True, exist_ok=True)
    return path


def _meta(cfg: RunConfig, command: str, **extra) -> dict:
    return metadata_block(
        cfg.echo,
        command=command,
        params=cfg.model.to_dict(),
        seed=cfg.model.seed,
        **extra,
    )


def _times(cfg: RunConfig) -> np.ndarray:
    t = cfg.time
    return time_grid(t["t_max"], t["n_points"], t["spacing"], t["t_min"])


def _fit(model: str, traj, window):
    if model == "exponential":
        if window is None:
            raise ConfigError("exponential fit needs 'fit.window'")
        return fit_exponential(traj, window)
    if model == "damped_cosine":
        return fit_damped_cosine(traj, window)
    if window is None:
        raise ConfigError("sinc fit needs 'fit.window'")
    return fit_sinc(traj, window)


def cmd_spectrum(cfg: RunConfig) -> list:
    h = build_reduced_hamiltonian(cfg.model)
    spec = eigendecompose(h)
    special = identify_special_states(spec, cfg.model)
    meta = _meta(
        cfg,
        "spectrum",
        special_states={
            "dicke_index": special.dicke_index,
            "zeno_index": special.zeno_index,
            "residual_weight_bound": special.residual_weight_bound,
            "diagnostic": special.diagnostic,
        },
    )
    files = write_spectrum(_outdir(cfg), spec, meta, cfg.output["formats"])
    lam = spec.eigenvalues
    log.info("%d eigenvalues, min Im = %.6g, max |C w| = %.6g", lam.size, lam.imag.min(), np.abs(spec.weights).max())
    return files


def cmd_evolve(cfg: RunConfig) -> list:
    method = cfg.solver["method"]
    times = _times(cfg)
    out = _outdir(cfg)
    h = build_reduced_hamiltonian(cfg.model)
    trajs = {}
    if method in ("spectral", "all"):
        trajs["spectral"] = evolve_spectral(eigendecompose(h), times)
    if method in ("ode", "all"):
        trajs["ode"] = evolve_reduced_ode(h, times, cfg.solver["rtol"], cfg.solver["atol"])
    if method == "full" or (method == "all" and cfg.rc is not None):
        if cfg.rc is None:
            raise ConfigError("method 'full' needs an [rc] section")
        fm = build_full_model(cfg.model, cfg.rc["m_levels"], cfg.rc["bandwidth"], t_max=float(times[-1]))
        trajs["full"] = evolve_full_model(fm, times)

    files = [write_trajectory(out / f"trajectory_{name}.csv", tr, _meta(cfg, "evolve")) for name, tr in trajs.items()]
    if method == "all":
        ref = trajs["spectral"]
        report = {
            "spectral_vs_ode_max_abs_a0": float(np.max(np.abs(ref.a0 - trajs["ode"].a0))),
            "ode_tolerance": ODE_TOLERANCE,
        }
        if "full" in trajs:
            report["spectral_vs_full_max_abs_p0"] = float(np.max(np.abs(ref.p0 - trajs["full"].p0)))
            report["full_tolerance"] = FULL_MODEL_TOLERANCE
        failed = report["spectral_vs_ode_max_abs_a0"] > ODE_TOLERANCE or report.get(
            "spectral_vs_full_max_abs_p0", 0.0
        ) > FULL_MODEL_TOLERANCE
        report["passed"] = not failed
        files.append(write_json(out / "deviation.json", {"metadata": _meta(cfg, "evolve"), "report": report}))
        log.info("cross-method deviation: %s", json.dumps(report))
        if failed:
            raise ValidationMismatch(f"cross-method deviation above tolerance: {report}")
    return files


def cmd_ensemble(cfg: RunConfig) -> list:
    if cfg.ensemble is None:
        raise ConfigError("missing [ensemble] section")
    ens = cfg.ensemble
    times = _times(cfg)
    stats = run_ensemble(cfg.model, ens["n_realizations"], times, method=ens["method"], window=ens["window"])
    out = _outdir(cfg)
    meta = _meta(cfg, "ensemble", workers=_worker_count(None), **stats.summary())
    files = [write_ensemble(out / "ensemble.csv", stats, meta)]
    fits = []
    if cfg.fit is not None:
        from .dynamics import Trajectory

        mean = Trajectory(stats.times, np.sqrt(stats.mean_p0).astype(complex), "external")
        try:
            fits.append(_fit(cfg.fit["model"], mean, cfg.fit["window"]).to_dict())
        except FitError as exc:
            fits.append({"model": cfg.fit["model"], "error": str(exc)})
    summary = {
        "metadata": meta,
        "fluct_rms": stats.fluct_rms,
        "regime": classify_regime(cfg.model).to_dict(),
        "fits": fits,
    }
    files.append(write_json(out / "ensemble_summary.json", summary))
    log.info("ensemble of %d: fluct_rms = %s", stats.n_realizations, stats.fluct_rms)
    return files


def cmd_classify(cfg: RunConfig) -> dict:
    report = classify_regime(cfg.model).to_dict()
    write_json(_outdir(cfg) / "regime.json", {"metadata": _meta(cfg, "classify"), "report": report})
    return report


def cmd_fit(cfg: RunConfig, trajectory_file) -> dict:
    fit_cfg = cfg.fit or {"model": "exponential", "window": None}
    traj = read_trajectory(trajectory_file)
    result = _fit(fit_cfg["model"], traj, fit_cfg["window"]).to_dict()
    write_json(
        _outdir(cfg) / "fit.json",
        {"metadata": _meta(cfg, "fit", trajectory_file=str(trajectory_file)), "fit": result},
    )
    return result


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="TOML run configuration")
    common.add_argument("--seed", type=int, help="override model.seed (unsigned 64-bit)")
    common.add_argument("--out", help="override output.directory")
    common.add_argument("--method", choices=["spectral", "ode", "full", "all"], help="override solver.method")
    common.add_argument("--quiet", action="store_true", help="only report errors")

    parser = argparse.ArgumentParser(
        prog="hierdecay",
        description="Decay of a single state through a pseudo continuum.",
        epilog=f"Set {WORKERS_ENV} to run ensemble realizations in parallel.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("spectrum", parents=[common], help="eigenvalues and decomposition weights")
    sub.add_parser("evolve", parents=[common], help="survival amplitude A0(t)")
    sub.add_parser("ensemble", parents=[common], help="disorder-averaged survival probability")
    sub.add_parser("classify", parents=[common], help="random-coupling regime report")
    p_fit = sub.add_parser("fit", parents=[common], help="fit a trajectory CSV")
    p_fit.add_argument("trajectory", help="trajectory CSV (t,re_a0,im_a0,p0)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.ERROR if args.quiet else logging.INFO,
        format="%(levelname)s: %(message)s",
        stream=sys.stderr,
        force=True,
    )
    try:
        cfg = load_config(args.config).with_overrides(args.seed, args.out, args.method)
        if args.command == "spectrum":
            result = cmd_spectrum(cfg)
        elif args.command == "evolve":
            result = cmd_evolve(cfg)
        elif args.command == "ensemble":
            result = cmd_ensemble(cfg)
        elif args.command == "classify":
            result = cmd_classify(cfg)
        else:
            result = cmd_fit(cfg, args.trajectory)
    except ValidationMismatch as exc:
        log.error("%s", exc)
        return EXIT_VALIDATION
    except (ConfigError, ParameterError, ValidityHorizonError) as exc:
        log.error("configuration error: %s", exc)
        return EXIT_CONFIG
    except (NumericalError, FitError, np.linalg.LinAlgError) as exc:
        log.error("numerical failure: %s", exc)
        return EXIT_NUMERICS

    if not args.quiet:
        if isinstance(result, dict):
            print(json.dumps(result, indent=2, sort_keys=True))
        else:
            for path in result:
                print(path)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
