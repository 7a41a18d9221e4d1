"""Experiment configuration: key=value files, defaults, validation.

Config files hold one ``key = value`` pair per line; ``#`` starts a comment.
Sweepable keys (``gamma``, ``rho2``, ``snr_db``) accept comma-separated
lists.  ``trials`` and ``seed`` are required (from the file or the command
line); everything else has a per-suite default.  The config key ``lambda``
maps to the attribute ``lam``.
"""

import os
from dataclasses import dataclass, field, fields
from typing import Optional, Union

from .errors import ConfigError
from .signal_model import ENSEMBLES

SUITES = ("gaussianity", "variance-error", "detection", "dominance")

DETECTORS = ("CROD", "CAMP", "SDL", "ROD")

_SWEEPABLE = ("gamma", "rho2", "snr_db")

Sweepable = Union[float, tuple]


def default_workers():
    env = os.environ.get("CROD_WORKERS", "")
    if env:
        try:
            return max(1, int(env))
        except ValueError as exc:
            raise ConfigError(f"CROD_WORKERS must be an integer, got {env!r}") from exc
    return os.cpu_count() or 1


@dataclass
class ExperimentConfig:
    suite: str
    trials: int
    seed: int
    ensemble: str = "partial-fourier"
    N: int = 256
    gamma: Sweepable = 0.5
    rho2: Sweepable = 0.1
    snr_db: Optional[Sweepable] = None
    sigma2: Optional[float] = None
    lam: float = 0.1
    p_fa: float = 0.01
    sigma_x2: float = 1.0
    output_path: Optional[str] = None
    parallelism: int = field(default_factory=default_workers)
    fix_matrix: bool = False
    ks_pooling: str = "pooled"
    min_null_cells: int = 0
    detectors: tuple = DETECTORS
    kappa_points: int = 20

    @property
    def sweep_param(self):
        """Name of the swept key, or None for a single-point run."""
        for name in _SWEEPABLE:
            if isinstance(getattr(self, name), tuple):
                return name
        return None

    @property
    def sweep_values(self):
        name = self.sweep_param
        if name is None:
            return (None,)
        return getattr(self, name)

    def canonical_items(self):
        """Stable key=value pairs for CSV header provenance.

        Execution-only knobs (worker count, output path) are omitted so the
        same experiment produces byte-identical files however it is run.
        """
        out = []
        for f in fields(self):
            value = getattr(self, f.name)
            if value is None or f.name in ("parallelism", "output_path"):
                continue
            key = "lambda" if f.name == "lam" else f.name
            if isinstance(value, tuple):
                value = ",".join(str(v) for v in value)
            out.append(f"{key}={value}")
        return out


_SUITE_DEFAULTS = {
    "gaussianity": {"N": 1024, "gamma": 0.75, "rho2": 0.1, "snr_db": 5.0},
    "variance-error": {"N": 256, "gamma": 0.5, "rho2": 0.1, "sigma2": 0.05},
    "detection": {"N": 256, "gamma": 0.5, "rho2": 0.1,
                  "snr_db": (0.0, 5.0, 10.0, 15.0, 20.0)},
    "dominance": {"N": 256, "gamma": 0.5, "rho2": 0.1, "snr_db": 13.0},
}

_INT_KEYS = ("N", "M", "trials", "seed", "parallelism", "min_null_cells", "kappa_points")
_FLOAT_KEYS = ("sigma2", "lambda", "p_fa", "sigma_x2")
_STR_KEYS = ("suite", "ensemble", "output_path", "ks_pooling")
_BOOL_KEYS = ("fix_matrix",)
_LIST_FLOAT_KEYS = _SWEEPABLE
_ALL_KEYS = _INT_KEYS + _FLOAT_KEYS + _STR_KEYS + _BOOL_KEYS + _LIST_FLOAT_KEYS + ("detectors",)


def _convert(key, raw):
    try:
        if key in _INT_KEYS:
            return int(raw)
        if key in _FLOAT_KEYS:
            return float(raw)
        if key in _BOOL_KEYS:
            low = raw.lower()
            if low in ("true", "1", "yes"):
                return True
            if low in ("false", "0", "no"):
                return False
            raise ValueError(raw)
        if key in _LIST_FLOAT_KEYS:
            parts = [p.strip() for p in raw.split(",") if p.strip()]
            if not parts:
                raise ValueError(raw)
            if len(parts) == 1:
                return float(parts[0])
            return tuple(float(p) for p in parts)
        if key == "detectors":
            return tuple(p.strip() for p in raw.split(",") if p.strip())
        return raw
    except ValueError as exc:
        raise ConfigError(f"malformed value for key {key!r}: {raw!r}") from exc


def read_config_file(path):
    """Parse a key=value config file into a raw {key: converted} dict."""
    raw = {}
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    for lineno, line in enumerate(lines, start=1):
        text = line.split("#", 1)[0].strip()
        if not text:
            continue
        if "=" not in text:
            raise ConfigError(f"{path}:{lineno}: expected key=value, got {line.strip()!r}")
        key, _, value = text.partition("=")
        key, value = key.strip(), value.strip()
        if key not in _ALL_KEYS:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        if key in raw:
            raise ConfigError(f"{path}:{lineno}: duplicate key {key!r}")
        raw[key] = _convert(key, value)
    return raw


def build_config(suite, raw, overrides=None):
    """Merge raw file keys, CLI overrides and suite defaults, then validate."""
    if suite not in SUITES:
        raise ConfigError(f"unknown suite {suite!r}; expected one of {SUITES}")
    merged = dict(_SUITE_DEFAULTS[suite])
    file_suite = raw.get("suite")
    if file_suite is not None and file_suite != suite:
        raise ConfigError(f"config file names suite {file_suite!r} but {suite!r} was requested")
    merged.update({k: v for k, v in raw.items() if k != "suite"})
    for key, value in (overrides or {}).items():
        if value is not None:
            merged[key] = value

    missing = [k for k in ("trials", "seed") if k not in merged]
    if missing:
        raise ConfigError("missing required keys: " + ", ".join(missing))

    if "M" in merged and "gamma" in raw:
        raise ConfigError("give exactly one of M and gamma, not both")
    if "M" in merged:
        M, N = merged.pop("M"), merged.get("N", _SUITE_DEFAULTS[suite]["N"])
        if not 1 <= M <= N:
            raise ConfigError(f"need 1 <= M <= N, got M={M}, N={N}")
        merged["gamma"] = M / N

    if "snr_db" in raw and "sigma2" in raw:
        raise ConfigError("give exactly one of snr_db and sigma2, not both")
    if "sigma2" in raw:
        merged.pop("snr_db", None)
    elif "snr_db" in raw:
        merged.pop("sigma2", None)

    kwargs = {("lam" if k == "lambda" else k): v for k, v in merged.items()}
    cfg = ExperimentConfig(suite=suite, **kwargs)
    _validate(cfg)
    return cfg


def parse_config(path, suite, overrides=None):
    """Read, merge and validate a config file for the given suite."""
    return build_config(suite, read_config_file(path) if path else {}, overrides)


def _validate(cfg):
    def fail(msg):
        raise ConfigError(msg)

    if cfg.ensemble not in ENSEMBLES:
        fail(f"ensemble must be one of {ENSEMBLES}, got {cfg.ensemble!r}")
    if cfg.trials < 1:
        fail(f"trials must be >= 1, got {cfg.trials}")
    if cfg.N < 1:
        fail(f"N must be >= 1, got {cfg.N}")
    if cfg.lam <= 0:
        fail(f"lambda must be positive, got {cfg.lam}")
    if not 0 < cfg.p_fa < 1:
        fail(f"p_fa must lie in (0, 1), got {cfg.p_fa}")
    if cfg.sigma_x2 <= 0:
        fail(f"sigma_x2 must be positive, got {cfg.sigma_x2}")
    if cfg.parallelism < 1:
        fail(f"parallelism must be >= 1, got {cfg.parallelism}")
    if cfg.kappa_points < 2:
        fail(f"kappa_points must be >= 2, got {cfg.kappa_points}")
    if cfg.min_null_cells < 0:
        fail(f"min_null_cells must be >= 0, got {cfg.min_null_cells}")
    if cfg.ks_pooling not in ("pooled", "per-trial"):
        fail(f"ks_pooling must be 'pooled' or 'per-trial', got {cfg.ks_pooling!r}")
    for det in cfg.detectors:
        if det not in DETECTORS:
            fail(f"unknown detector {det!r}; expected a subset of {DETECTORS}")
    if cfg.sigma2 is None and cfg.snr_db is None:
        fail("one of snr_db and sigma2 is required")
    if cfg.sigma2 is not None and cfg.sigma2 < 0:
        fail(f"sigma2 must be nonnegative, got {cfg.sigma2}")

    sweeps = [k for k in _SWEEPABLE if isinstance(getattr(cfg, k), tuple)]
    if len(sweeps) > 1:
        fail(f"at most one sweep key is allowed, got {sweeps}")
    if sweeps and cfg.suite in ("gaussianity", "dominance"):
        fail(f"suite {cfg.suite} does not sweep; key {sweeps[0]} must be scalar")
    if sweeps == ["snr_db"] and cfg.suite == "variance-error":
        fail("variance-error sweeps rho2 or gamma, not snr_db")

    for value in _sweep_list(cfg.gamma):
        if not 0 < value <= 1:
            fail(f"gamma values must lie in (0, 1], got {value}")
        if not 1 <= round(value * cfg.N) <= cfg.N:
            fail(f"gamma={value} gives an empty measurement set at N={cfg.N}")
    for value in _sweep_list(cfg.rho2):
        if not 0 <= value <= 1:
            fail(f"rho2 values must lie in [0, 1], got {value}")


def _sweep_list(value):
    if value is None:
        return ()
    if isinstance(value, tuple):
        return value
    return (value,)
