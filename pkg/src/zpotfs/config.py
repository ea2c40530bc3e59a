"""Experiment configuration: presets, flat ``key = value`` files, validation, run manifests."""
from __future__ import annotations

import dataclasses
import datetime as _dt
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any

import numpy as np

from . import __version__
from .channel import EVA_PROFILE, derive_spread, load_profile, max_doppler
from .errors import InvalidConfiguration
from .grid import GridParams

SCHEMES = ("proposed", "ep", "known-csi")
RNG_NAME = "numpy.random.PCG64 via SeedSequence(base_seed, spawn_key=(snr_index, frame_index))"
SNR_DEFINITION = "per-sample SNR against unit transmit power: sigma2 = 10**(-snr_db/10)"

PRESETS: dict[str, dict[str, Any]] = {
    "paper-fig2": dict(m=64, n=64, delta_f_khz=15.0, fc_ghz=4.0, speed_kmh=500.0,
                       snr_db=(0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0), frames=200),
    "paper-fig3": dict(m=64, n=64, delta_f_khz=15.0, fc_ghz=4.0, speed_kmh=500.0,
                       snr_db=(20.0,), frames=2000),
    "desk": dict(m=32, n=32, delta_f_khz=15.0, fc_ghz=4.0, speed_kmh=500.0,
                 snr_db=(0.0, 5.0, 10.0, 15.0, 20.0), frames=100),
}

# Grids swept by the overhead table and PAPR figure.
FIG3_GRIDS = tuple((m, n) for n in (16, 32, 64) for m in (16, 32, 64, 128, 256))

# Manifest entries that are recomputed on load and must agree.
DERIVED_KEYS = ("t_s", "q", "nu_max_hz")
IGNORED_KEYS = ("version", "rng", "timestamp", "snr_definition", "failed_trials")


@dataclass(frozen=True)
class ExperimentConfig:
    m: int = 32
    n: int = 32
    delta_f_khz: float = 15.0
    fc_ghz: float = 4.0
    speed_kmh: float = 500.0
    snr_db: tuple[float, ...] = (0.0, 5.0, 10.0, 15.0, 20.0)
    frames: int = 100
    seed: int = 0
    scheme: str = "proposed"
    out: str | None = None
    profile: str | None = None
    l_max: int | None = None
    k_max: int | None = None
    l_zp: int | None = None
    omp_delta: float = 0.1
    max_taps: int | None = None
    mrc_iterations: int = 15
    mrc_tol: float = 1e-6
    ep_threshold: float = 3.0
    warm_start: bool = False

    def __post_init__(self):
        if self.frames < 1:
            raise InvalidConfiguration(f"frames: must be >= 1, got {self.frames}")
        if not self.snr_db:
            raise InvalidConfiguration("snr_db: list must not be empty")
        if self.scheme not in SCHEMES:
            raise InvalidConfiguration(f"scheme: {self.scheme!r} not in {SCHEMES}")
        if self.speed_kmh < 0:
            raise InvalidConfiguration("speed_kmh: must be >= 0")

    def profile_table(self):
        return load_profile(self.profile) if self.profile else EVA_PROFILE

    def derived_spread(self) -> tuple[int, int]:
        return derive_spread(self.m, self.n, self.delta_f_khz * 1e3, self.fc_ghz * 1e9,
                             self.speed_kmh, self.profile_table())

    def grid(self) -> GridParams:
        need_l, need_k = self.derived_spread()
        l_max = need_l if self.l_max is None else self.l_max
        k_max = need_k if self.k_max is None else self.k_max
        if l_max < need_l:
            raise InvalidConfiguration(f"l_max: {l_max} is below the profile's delay spread {need_l}")
        if k_max < need_k:
            raise InvalidConfiguration(f"k_max: {k_max} is below the Doppler spread {need_k}")
        try:
            return GridParams(self.m, self.n, self.delta_f_khz * 1e3, self.fc_ghz * 1e9, l_max, k_max, self.l_zp)
        except InvalidConfiguration as exc:
            raise InvalidConfiguration(f"grid: {exc}") from None

    @property
    def nu_max(self) -> float:
        return max_doppler(self.fc_ghz * 1e9, self.speed_kmh)


@dataclass
class RunManifest:
    config: dict
    derived: dict
    version: str = __version__
    rng: str = RNG_NAME
    timestamp: str = field(default_factory=lambda: _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"))

    def items(self, include_timestamp: bool = True):
        out = {k: _format(v) for k, v in self.config.items()}
        out.update({k: _format(v) for k, v in self.derived.items()})
        out["version"] = self.version
        out["rng"] = self.rng
        out["snr_definition"] = SNR_DEFINITION
        if include_timestamp:
            out["timestamp"] = self.timestamp
        return out

    def to_text(self, include_timestamp: bool = True, prefix: str = "") -> str:
        return "".join(f"{prefix}{k} = {v}\n" for k, v in self.items(include_timestamp).items())


def _format(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (tuple, list)):
        return ",".join(_format(x) for x in v)
    if isinstance(v, float):
        return repr(v)
    return str(v)


_FIELD_TYPES = {f.name: f.type for f in fields(ExperimentConfig)}


def _parse_value(key: str, raw: str):
    t = _FIELD_TYPES[key]
    raw = raw.strip()
    try:
        if raw == "" and "None" in t:
            return None
        if t.startswith("tuple"):
            return tuple(float(x) for x in raw.split(",") if x.strip())
        if t.startswith("bool"):
            if raw.lower() not in ("true", "false", "1", "0", "yes", "no"):
                raise ValueError(raw)
            return raw.lower() in ("true", "1", "yes")
        if t.startswith("int"):
            return int(raw)
        if t.startswith("float"):
            return float(raw)
        return raw
    except ValueError:
        raise InvalidConfiguration(f"{key}: cannot parse {raw!r} as {t}") from None


def normalize_key(key: str) -> str:
    return key.strip().lstrip("-").replace("-", "_").lower()


def read_kv(path) -> dict[str, str]:
    """Parse ``key = value`` lines. ``#`` lines are comments unless they hold a manifest entry."""
    out = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        text = line.strip()
        if text.startswith("#"):
            text = text[1:].strip()
            if "=" not in text:
                continue
        if not text:
            continue
        if "=" not in text:
            # CSV body of an output file: manifest ends here
            break
        key, _, value = text.partition("=")
        out[normalize_key(key)] = value.strip()
    return out


def resolve_config(path=None, overrides: dict | None = None, preset: str | None = None):
    """Merge preset < file < overrides, validate, and derive the grid.

    Returns ``(ExperimentConfig, RunManifest)``.
    """
    values: dict[str, Any] = {}
    file_values = read_kv(path) if path else {}
    overrides = {normalize_key(k): v for k, v in (overrides or {}).items() if v is not None}
    preset = overrides.pop("preset", None) or preset or file_values.pop("preset", None)
    file_values.pop("preset", None)
    if preset:
        if preset not in PRESETS:
            raise InvalidConfiguration(f"preset: unknown preset {preset!r}; choose from {sorted(PRESETS)}")
        values.update(PRESETS[preset])

    derived_given = {}
    for key, raw in file_values.items():
        if key in DERIVED_KEYS:
            derived_given[key] = float(raw)
        elif key in IGNORED_KEYS:
            continue
        elif key in _FIELD_TYPES:
            values[key] = _parse_value(key, raw)
        else:
            raise InvalidConfiguration(f"{key}: unknown configuration key in {path}")
    for key, v in overrides.items():
        if key not in _FIELD_TYPES:
            raise InvalidConfiguration(f"{key}: unknown configuration key")
        values[key] = _parse_value(key, v) if isinstance(v, str) else (tuple(v) if isinstance(v, list) else v)

    cfg = ExperimentConfig(**values)
    p = cfg.grid()
    derived = {"l_max": p.l_max, "k_max": p.k_max, "l_zp": p.l_zp, "t_s": p.T_s, "q": p.Q, "nu_max_hz": cfg.nu_max}
    for key, given in derived_given.items():
        if not np.isclose(given, derived[key], rtol=1e-12, atol=0):
            raise InvalidConfiguration(f"{key}: manifest value {given} disagrees with recomputed {derived[key]}")
    config_dict = dataclasses.asdict(cfg)
    for key in ("l_max", "k_max", "l_zp"):
        config_dict.pop(key)
    return cfg, RunManifest(config=config_dict, derived=derived)
