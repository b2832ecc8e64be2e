"""File formats, configuration loading and run manifests.

Sample files carry one self-describing text header line followed by raw
little-endian float64 (re, im) pairs, so write/read round-trips are
bit-exact.  Configurations are flat TOML key-value files validated against
a known-key schema.  Every command writes a JSON manifest next to its
output recording the resolved configuration, seed and input digests.
"""

from __future__ import annotations

import datetime
import hashlib
import json
import sys
from pathlib import Path
from typing import Optional

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover - exercised only on 3.10
    import tomli as tomllib

from . import __version__
from .errors import ConfigError, DataFormatError
from .signal_model import (
    BlockConfig,
    BlockRecord,
    HypothesisScenario,
    JumpModel,
    NoiseOnly,
    PivotSequence,
    SignalParams,
    StableMeanReverting,
    StableRandomWalk,
    UnstableNonRW,
)

__all__ = [
    "write_samples",
    "read_samples",
    "read_samples_csv",
    "write_pivots",
    "read_pivots",
    "write_manifest",
    "load_config",
    "block_config_from",
    "signal_params_from",
    "scenario_from",
]

_MAGIC = "#tonewalk-samples v1"


def write_samples(path, record: BlockRecord, config: BlockConfig) -> None:
    """Write a record as header line + interleaved little-endian float64."""
    samples = record.samples
    header = (
        f"{_MAGIC} N={config.n_per_block} K={config.n_blocks} "
        f"T={config.sample_period!r} COUNT={len(samples)}\n"
    )
    interleaved = np.empty(2 * len(samples), dtype="<f8")
    interleaved[0::2] = samples.real
    interleaved[1::2] = samples.imag
    with open(path, "wb") as fh:
        fh.write(header.encode("ascii"))
        fh.write(interleaved.tobytes())


def read_samples(path):
    """Read a sample file; returns (BlockRecord, BlockConfig)."""
    with open(path, "rb") as fh:
        header = fh.readline().decode("ascii", errors="replace").rstrip("\n")
        payload = fh.read()
    if not header.startswith(_MAGIC):
        raise DataFormatError(f"{path}: missing magic {_MAGIC!r}")
    fields = {}
    for token in header[len(_MAGIC):].split():
        key, _, value = token.partition("=")
        fields[key] = value
    try:
        n = int(fields["N"])
        k = int(fields["K"])
        t = float(fields["T"])
        count = int(fields["COUNT"])
    except (KeyError, ValueError) as exc:
        raise DataFormatError(f"{path}: malformed header {header!r}") from exc
    config = BlockConfig(n_per_block=n, n_blocks=k, sample_period=t)
    if count != config.n_record:
        raise DataFormatError(
            f"{path}: header count {count} != K*(N-1)+1 = {config.n_record}"
        )
    data = np.frombuffer(payload, dtype="<f8")
    if len(data) != 2 * count:
        raise DataFormatError(
            f"{path}: payload holds {len(data)} floats, expected {2 * count}"
        )
    samples = data[0::2] + 1j * data[1::2]
    return BlockRecord(samples=samples, n_per_block=n), config


def read_samples_csv(path, config: BlockConfig) -> BlockRecord:
    """Ingest external data from a CSV with columns t, re, im (header row)."""
    rows = np.genfromtxt(path, delimiter=",", names=True)
    if rows.dtype.names is None or not {"re", "im"} <= set(rows.dtype.names):
        raise DataFormatError(f"{path}: need CSV header with columns t, re, im")
    samples = np.asarray(rows["re"], dtype=np.float64) + 1j * np.asarray(
        rows["im"], dtype=np.float64
    )
    if samples.ndim == 0:
        samples = samples.reshape(1)
    if len(samples) != config.n_record:
        raise DataFormatError(
            f"{path}: {len(samples)} rows, config expects K*(N-1)+1 = {config.n_record}"
        )
    return BlockRecord(samples=samples, n_per_block=config.n_per_block)


def write_pivots(path, pivots: PivotSequence) -> None:
    """Ground-truth sidecar for synthetic records."""
    payload = {
        "pivot_bins": [int(b) for b in pivots.pivot_bins],
        "pivot_freqs": [float(f) for f in pivots.pivot_freqs],
        "jumps": [int(u) for u in pivots.jumps],
    }
    Path(path).write_text(json.dumps(payload, indent=1) + "\n")


def read_pivots(path) -> PivotSequence:
    payload = json.loads(Path(path).read_text())
    return PivotSequence(
        pivot_bins=np.asarray(payload["pivot_bins"]),
        pivot_freqs=np.asarray(payload["pivot_freqs"]),
        jumps=np.asarray(payload["jumps"]),
    )


def _sha256(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def write_manifest(
    out_path,
    command: str,
    resolved_config: dict,
    master_seed: Optional[int],
    inputs: Optional[dict] = None,
) -> Path:
    """Write ``<out>.manifest.json`` next to an output file; returns its path."""
    manifest = {
        "tool": "tonewalk",
        "version": __version__,
        "command": command,
        "config": resolved_config,
        "master_seed": master_seed,
        "created_utc": datetime.datetime.now(datetime.timezone.utc).isoformat(),
        "inputs": {str(p): _sha256(p) for p in (inputs or {})},
    }
    manifest_path = Path(str(out_path) + ".manifest.json")
    manifest_path.write_text(json.dumps(manifest, indent=1, default=str) + "\n")
    return manifest_path


# --- configuration ---------------------------------------------------------

_KNOWN_KEYS = {
    "n_per_block": int,
    "n_blocks": int,
    "sample_period": float,
    "amplitude": float,
    "noise_variance": float,
    "initial_phase": float,
    "scenario": str,
    "jump_model": str,
    "rho": float,
    "jump_scale": float,
    "all_bin_jumps": bool,
    "start_bin": int,
    "include_displacement": bool,
    "alpha": float,
    "j_lags": int,
    "alphas": list,
    "n_trials": int,
    "master_seed": int,
    "dof_n_grid": list,
    "esterr_sweep_param": str,
    "esterr_values": list,
}

_DEFAULTS = {
    "amplitude": 1.0,
    "noise_variance": 1.0,
    "initial_phase": 0.0,
    "jump_model": "normal",
    "rho": None,
    "jump_scale": 1.0,
    "all_bin_jumps": False,
    "start_bin": 0,
    "include_displacement": True,
    "alpha": 0.05,
    "j_lags": 7,
    "alphas": [0.01, 0.02, 0.05, 0.1, 0.2, 0.3, 0.4, 0.5],
    "n_trials": 1000,
    "master_seed": 0,
    "dof_n_grid": [16, 32, 64, 128],
    "esterr_sweep_param": "n_blocks",
    "esterr_values": [12, 16, 24, 32],
}


def _key_line(path, key: str) -> str:
    """Best-effort 'file:line' locator for diagnostics."""
    try:
        for i, line in enumerate(Path(path).read_text().splitlines(), start=1):
            if line.split("=")[0].strip() == key:
                return f"{path}:{i}"
    except OSError:
        pass
    return str(path)


def load_config(path) -> dict:
    """Load and validate a flat TOML config; defaults are filled in.

    Raises ConfigError with a file:line locator for unknown or mistyped
    keys.
    """
    try:
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
    except FileNotFoundError as exc:
        raise ConfigError(f"{path}: no such config file") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc

    for key, value in raw.items():
        if key not in _KNOWN_KEYS:
            raise ConfigError(f"{_key_line(path, key)}: unknown key {key!r}")
        expected = _KNOWN_KEYS[key]
        if expected is float and isinstance(value, int) and not isinstance(value, bool):
            value = float(value)
            raw[key] = value
        if expected is int and isinstance(value, bool):
            raise ConfigError(f"{_key_line(path, key)}: {key} must be an integer")
        if not isinstance(value, expected):
            raise ConfigError(
                f"{_key_line(path, key)}: {key} must be {expected.__name__}, "
                f"got {type(value).__name__}"
            )

    for key in ("n_per_block", "n_blocks", "sample_period"):
        if key not in raw:
            raise ConfigError(f"{path}: missing required key {key!r}")

    merged = dict(_DEFAULTS)
    merged.update(raw)
    return merged


def block_config_from(cfg: dict, path="<config>") -> BlockConfig:
    try:
        return BlockConfig(
            n_per_block=cfg["n_per_block"],
            n_blocks=cfg["n_blocks"],
            sample_period=cfg["sample_period"],
        )
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def signal_params_from(cfg: dict, path="<config>") -> SignalParams:
    try:
        return SignalParams(
            amplitude=cfg["amplitude"],
            noise_variance=cfg["noise_variance"],
            initial_phase=cfg["initial_phase"],
        )
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def _jump_model_from(cfg: dict, path="<config>") -> JumpModel:
    name = cfg["jump_model"]
    try:
        return JumpModel(name)
    except ValueError as exc:
        raise ConfigError(
            f"{_key_line(path, 'jump_model')}: jump_model must be 'uniform' or "
            f"'normal', got {name!r}"
        ) from exc


def scenario_from(cfg: dict, path="<config>") -> HypothesisScenario:
    name = cfg.get("scenario")
    if name is None:
        raise ConfigError(f"{path}: missing required key 'scenario'")
    try:
        if name == "H0":
            return NoiseOnly()
        if name == "H1":
            return StableRandomWalk(jump_model=_jump_model_from(cfg, path))
        if name == "H2":
            rho = cfg["rho"] if cfg["rho"] is not None else 0.9
            return StableMeanReverting(rho=rho, jump_scale=cfg["jump_scale"])
        if name == "H3":
            if cfg["all_bin_jumps"]:
                return UnstableNonRW(rho=None, all_bin_jumps=True)
            rho = cfg["rho"] if cfg["rho"] is not None else 1.05
            return UnstableNonRW(rho=rho, jump_scale=cfg["jump_scale"])
    except ValueError as exc:
        raise ConfigError(f"{_key_line(path, 'scenario')}: {exc}") from exc
    raise ConfigError(
        f"{_key_line(path, 'scenario')}: scenario must be one of H0..H3, got {name!r}"
    )
