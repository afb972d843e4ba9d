"""Line-oriented `key = value` run configuration.

Defaults reproduce the reference water/Parylene/polycarbonate sensor
stack in nondimensional units on the unit disk.  Unknown keys and
malformed values are reported with file and line number.
"""

from __future__ import annotations

from dataclasses import dataclass, fields, replace

from .errors import ConfigError
from .medium import MediumParams

# Fraction of the mesh-heuristic time step used by default.  Kept well
# inside the stability limit: the reconstruction pipeline pairs the
# forward solver with a continuous-adjoint solver, and their agreement
# (hence Landweber convergence) degrades quadratically as dt approaches
# the stability bound.  Raise toward ~0.35 for forward-only runs.
DEFAULT_CFL_SAFETY = 0.05


@dataclass(frozen=True)
class RunConfig:
    """Full run configuration: material, discretization, inversion, io."""

    # material
    c: float = 1.0
    rho: float = 1.0
    c_s: float = 22.0 / 15.0
    rho_s: float = 1.18
    c_b: float = 2180.0 / 1500.0
    rho_b: float = 1.18
    h: float = 0.0
    curvature_H: float = 1.0
    # discretization
    refinement: int = 3
    cfl_safety: float = DEFAULT_CFL_SAFETY
    T: float = 3.0
    # inversion
    gamma: float | None = None
    iterations: int = 60
    seed: int = 0
    # io
    mesh_path: str | None = None
    field_path: str | None = None
    trace_path: str | None = None
    output_dir: str | None = None

    def medium(self) -> MediumParams:
        return MediumParams(
            c=self.c, rho=self.rho, c_s=self.c_s, rho_s=self.rho_s,
            c_b=self.c_b, rho_b=self.rho_b, h=self.h, curvature_H=self.curvature_H,
        )


_FLOAT_KEYS = {"c", "rho", "c_s", "rho_s", "c_b", "rho_b", "h", "curvature_H",
               "cfl_safety", "T", "gamma"}
_INT_KEYS = {"refinement", "iterations", "seed"}
_PATH_KEYS = {"mesh_path", "field_path", "trace_path", "output_dir"}
_POSITIVE_KEYS = {"c", "rho", "c_s", "rho_s", "c_b", "rho_b", "T", "gamma"}


def _parse_value(key: str, raw: str, where: str):
    if key in _PATH_KEYS:
        return raw
    if key in _INT_KEYS:
        try:
            value = int(raw)
        except ValueError:
            raise ConfigError(f"{where}: key '{key}' needs an integer, got '{raw}'") from None
        if key == "refinement" and not 0 <= value <= 8:
            raise ConfigError(f"{where}: refinement must lie in [0, 8], got {value}")
        if key == "iterations" and value < 1:
            raise ConfigError(f"{where}: iterations must be >= 1, got {value}")
        return value
    if key == "gamma" and raw == "auto":
        return None
    try:
        value = float(raw)
    except ValueError:
        raise ConfigError(f"{where}: key '{key}' needs a number, got '{raw}'") from None
    if key in _POSITIVE_KEYS and not value > 0:
        raise ConfigError(f"{where}: {key} must be positive, got {raw}")
    if key == "h" and value < 0:
        raise ConfigError(f"{where}: h must be nonnegative, got {raw}")
    if key == "cfl_safety" and not 0 < value <= 1:
        raise ConfigError(f"{where}: cfl_safety must lie in (0, 1], got {raw}")
    return value


def parse_config(path) -> RunConfig:
    """Read a `key = value` config file; unknown keys are errors."""
    known = {f.name for f in fields(RunConfig)}
    overrides = {}
    try:
        with open(path, "r", encoding="ascii") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config '{path}': {exc}") from None
    for lineno, raw in enumerate(lines, start=1):
        text = raw.split("#", 1)[0].strip()
        if not text:
            continue
        where = f"{path}:{lineno}"
        if "=" not in text:
            raise ConfigError(f"{where}: expected 'key = value', got '{text}'")
        key, _, raw_value = text.partition("=")
        key = key.strip()
        raw_value = raw_value.strip()
        if key not in known:
            raise ConfigError(f"{where}: unknown key '{key}'")
        if not raw_value:
            raise ConfigError(f"{where}: missing value for '{key}'")
        overrides[key] = _parse_value(key, raw_value, where)
    return replace(RunConfig(), **overrides)


def dump_config(cfg: RunConfig) -> str:
    """Serialize a RunConfig so that parse_config recovers it exactly."""
    out = []
    for f in fields(RunConfig):
        value = getattr(cfg, f.name)
        if value is None:
            if f.name == "gamma":
                out.append("gamma = auto")
            continue  # unset paths are omitted
        if isinstance(value, float):
            out.append(f"{f.name} = {value:.17g}")
        else:
            out.append(f"{f.name} = {value}")
    return "\n".join(out) + "\n"


__all__ = ["DEFAULT_CFL_SAFETY", "RunConfig", "dump_config", "parse_config"]
