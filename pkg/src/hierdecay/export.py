"""CSV / JSON serialization of spectra, trajectories and ensemble statistics.

CSV files start with ``# meta: {...}`` comment lines carrying the metadata
block, followed by the exact header row and one row per sample written with
17 significant digits.
"""

from __future__ import annotations

import json
import platform
from pathlib import Path
from typing import Optional

import numpy as np
import scipy

from . import __version__
from .dynamics import Trajectory
from .errors import ConfigError
from .spectral import Spectrum

__all__ = [
    "TRAJECTORY_HEADER",
    "SPECTRUM_HEADER",
    "ENSEMBLE_HEADER",
    "metadata_block",
    "spectrum_to_json",
    "write_spectrum",
    "write_trajectory",
    "read_trajectory",
    "write_ensemble",
    "write_json",
]

TRAJECTORY_HEADER = "t,re_a0,im_a0,p0"
SPECTRUM_HEADER = "re_lambda,im_lambda,abs_c"
ENSEMBLE_HEADER = "t,mean_p0,var_p0"


def _fmt(x: float) -> str:
    return "%.17g" % x


def _pairs(z) -> list:
    return [[float(v.real), float(v.imag)] for v in np.asarray(z, dtype=complex)]


def metadata_block(config: Optional[dict] = None, **extra) -> dict:
    meta = {
        "package": "hierdecay",
        "version": __version__,
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "python": platform.python_version(),
    }
    if config is not None:
        meta["config"] = config
    meta.update(extra)
    return meta


def write_json(path, payload: dict) -> Path:
    path = Path(path)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True, allow_nan=True) + "\n")
    return path


def _write_csv(path, header: str, columns, meta: dict) -> Path:
    path = Path(path)
    cols = [np.asarray(c, dtype=float) for c in columns]
    lines = ["# meta: " + json.dumps(meta, sort_keys=True, separators=(",", ":")), header]
    lines.extend(",".join(_fmt(v) for v in row) for row in zip(*cols))
    path.write_text("\n".join(lines) + "\n")
    return path


def spectrum_to_json(spec: Spectrum, meta: dict) -> dict:
    return {
        "metadata": meta,
        "eigenvalues": _pairs(spec.eigenvalues),
        "coefficients": _pairs(spec.coefficients),
        "overlaps": _pairs(spec.overlaps),
        "bilinear_norms": _pairs(spec.bilinear_norms),
        "least_squares": bool(spec.least_squares),
        "defective": [int(i) for i in np.flatnonzero(spec.defective)],
    }


def write_spectrum(directory, spec: Spectrum, meta: dict, formats=("csv", "json")) -> list:
    directory = Path(directory)
    written = []
    if "json" in formats:
        written.append(write_json(directory / "spectrum.json", spectrum_to_json(spec, meta)))
    if "csv" in formats:
        order = np.argsort(spec.eigenvalues.real, kind="stable")
        lam = spec.eigenvalues[order]
        written.append(
            _write_csv(
                directory / "spectrum.csv",
                SPECTRUM_HEADER,
                [lam.real, lam.imag, np.abs(spec.coefficients[order])],
                meta,
            )
        )
    return written


def write_trajectory(path, traj: Trajectory, meta: dict) -> Path:
    meta = dict(meta, method=traj.method, params_hash=traj.params_hash)
    return _write_csv(path, TRAJECTORY_HEADER, [traj.times, traj.a0.real, traj.a0.imag, traj.p0], meta)


def read_trajectory(path) -> Trajectory:
    """Load a trajectory CSV written by :func:`write_trajectory` (or any file with the same header)."""
    path = Path(path)
    lines = [ln for ln in path.read_text().splitlines() if ln.strip() and not ln.startswith("#")]
    if not lines or lines[0].strip() != TRAJECTORY_HEADER:
        raise ConfigError(f"{path}: expected header {TRAJECTORY_HEADER!r}")
    try:
        data = np.array([[float(x) for x in ln.split(",")] for ln in lines[1:]], dtype=float)
    except ValueError as exc:
        raise ConfigError(f"{path}: malformed row ({exc})") from exc
    if data.ndim != 2 or data.shape[1] != 4 or data.shape[0] == 0:
        raise ConfigError(f"{path}: expected 4 columns of data")
    return Trajectory(data[:, 0], data[:, 1] + 1j * data[:, 2], "external")


def write_ensemble(path, stats, meta: dict) -> Path:
    return _write_csv(path, ENSEMBLE_HEADER, [stats.times, stats.mean_p0, stats.var_p0], meta)
