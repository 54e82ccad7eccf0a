"""Run configuration: defaults, environment, config file and command line flags.

Later sources override earlier ones in that order.
"""

from dataclasses import dataclass, fields
import logging
import math
import os
from pathlib import Path
from typing import Any, Dict, Mapping, Optional

from errors import UsageError
from numerics import PrecisionContext

logger = logging.getLogger(__name__)

DEFAULT_VALUES = {
    "bits": 128,
    "rel_tol": 1e-25,
    "abs_tol": 1e-30,
    "max_escalations": 2,
    "output_format": "json",
    "plot": None,
    "xi_window": 200.0,
    "scan_step_xi": math.pi / 4,
    "moment_kmax": 64,
}

ENVIRONMENT_KEYS = {
    "XIZERO_BITS": "bits",
    "XIZERO_REL_TOL": "rel_tol",
    "XIZERO_ABS_TOL": "abs_tol",
}

CONFIG_ENV = "XIZERO_CONFIG"

OUTPUT_FORMATS = ("json", "csv")


def _normalize_key(key: str) -> str:
    return key.strip().lower().replace("-", "_")


class ConfigManager:
    """Holds configuration values on top of a set of defaults.

    Values are coerced to the type of their default, unknown keys are rejected.

    :param default_values: Defaults, also the set of known keys.
    """

    def __init__(self, default_values: Mapping[str, Any]):
        self.defaults = dict(default_values)
        self.values: Dict[str, Any] = {}

    def get(self, key: str) -> Any:
        key = _normalize_key(key)
        if key not in self.defaults:
            raise UsageError(f"unknown configuration key {key!r}")
        return self.values.get(key, self.defaults[key])

    def set(self, key: str, value: Any) -> None:
        """Set a value, converting strings to the type of the default.

        :raises UsageError: Unknown key or unconvertible value.
        """
        key = _normalize_key(key)
        if key not in self.defaults:
            raise UsageError(f"unknown configuration key {key!r}")
        default = self.defaults[key]
        try:
            if value is None or default is None:
                converted = value
            elif isinstance(default, bool):
                converted = value if isinstance(value, bool) else str(value).lower() in ("1", "true", "yes", "on")
            elif isinstance(default, int):
                converted = int(value)
            elif isinstance(default, float):
                converted = float(value)
            else:
                converted = str(value)
        except (TypeError, ValueError):
            raise UsageError(f"invalid value {value!r} for {key}") from None
        self.values[key] = converted

    def set_many(self, values: Mapping[str, Any]) -> None:
        for key, value in values.items():
            self.set(key, value)

    def as_dict(self) -> Dict[str, Any]:
        return {key: self.get(key) for key in self.defaults}


def read_config_file(path: Path) -> Dict[str, str]:
    """Read flat ``key = value`` lines, ``#`` starts a comment.

    :raises UsageError: Missing file or a line without ``=``.
    """
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as err:
        raise UsageError(f"cannot read config file {path}: {err.strerror}") from None
    out = {}
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{number}: expected 'key = value', got {raw!r}")
        key, value = line.split("=", 1)
        if not key.strip():
            raise UsageError(f"{path}:{number}: empty key")
        out[_normalize_key(key)] = value.strip()
    return out


@dataclass(frozen=True)
class RunConfig:
    """Resolved settings of one command line run."""

    bits: int
    rel_tol: float
    abs_tol: float
    max_escalations: int
    output_format: str
    plot: Optional[Path]
    xi_window: float
    scan_step_xi: float
    moment_kmax: int

    def __post_init__(self):
        if self.output_format not in OUTPUT_FORMATS:
            raise UsageError(f"output format must be one of {', '.join(OUTPUT_FORMATS)}")
        if self.plot is not None:
            object.__setattr__(self, "plot", Path(self.plot))

    def context(self) -> PrecisionContext:
        """The precision context these settings describe."""
        try:
            return PrecisionContext(self.bits, self.rel_tol, self.abs_tol, self.max_escalations)
        except ValueError as err:
            raise UsageError(str(err)) from None


def resolve_config(
    flags: Optional[Mapping[str, Any]] = None,
    environ: Optional[Mapping[str, str]] = None,
) -> RunConfig:
    """Layer defaults, environment, config file and flags into a :class:`RunConfig`.

    :param flags: Values given on the command line, ``None`` entries are skipped.
        A ``config`` entry names the config file.
    :param environ: Environment, ``os.environ`` by default.
    """
    flags = dict(flags or {})
    environ = os.environ if environ is None else environ
    manager = ConfigManager(DEFAULT_VALUES)

    for variable, key in ENVIRONMENT_KEYS.items():
        if environ.get(variable):
            manager.set(key, environ[variable])

    config_path = flags.pop("config", None) or environ.get(CONFIG_ENV)
    if config_path:
        manager.set_many(read_config_file(Path(config_path)))
        logger.info("read configuration from %s", config_path)

    manager.set_many({key: value for key, value in flags.items() if value is not None})
    known = {f.name for f in fields(RunConfig)}
    return RunConfig(**{key: value for key, value in manager.as_dict().items() if key in known})
