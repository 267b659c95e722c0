"""Run configuration: ``key = value`` text with defaults and validation.

Unknown keys, type errors and range errors are reported with their 1-based
line number.  ``serialize_config(parse_config(text))`` is semantically
identical to the input (same parsed RunConfig).
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ConfigError, ConfigRangeError, ConfigTypeError, UnknownKeyError
from .grid import Custom, Grid2D, InitialPreset, SimParams, TwoBlobs, Uniform

#: canonical defaults, in serialization order
DEFAULTS = {
    "nx": "64",
    "ny": "64",
    "lx": "1.0",
    "ly": "1.0",
    "preset": "two_blobs",
    "uniform_n": "1.0",
    "uniform_c": "1.0",
    "uniform_m": "1.0",
    "n_file": "",
    "c_file": "",
    "m_file": "",
    "ux_file": "",
    "uy_file": "",
    "alpha": "-0.4",
    "kappa": "1.0",
    "c_s": "1.0",
    "phi_grad_x": "0.0",
    "phi_grad_y": "-1.0",
    "dt_policy": "cfl",
    "dt_max": "0.001",
    "t_end": "2.0",
    "poisson_tol": "1e-10",
    "implicit_tol": "1e-10",
    "snapshot_every": "500",
    "out_dir": ".",
    "seed": "0",
    "bound_ratio": "10.0",
}

_INT_KEYS = {"nx", "ny", "snapshot_every", "seed"}
_FLOAT_KEYS = {
    "lx", "ly", "uniform_n", "uniform_c", "uniform_m", "alpha", "kappa", "c_s",
    "phi_grad_x", "phi_grad_y", "dt_max", "t_end", "poisson_tol", "implicit_tol",
    "bound_ratio",
}

_RANGE_RULES = {
    "nx": (lambda v: v >= 4, ">= 4"),
    "ny": (lambda v: v >= 4, ">= 4"),
    "lx": (lambda v: v > 0, "> 0"),
    "ly": (lambda v: v > 0, "> 0"),
    "uniform_n": (lambda v: v >= 0, ">= 0"),
    "uniform_c": (lambda v: v > 0, "> 0"),
    "uniform_m": (lambda v: v > 0, "> 0"),
    "c_s": (lambda v: v > 0, "> 0"),
    "dt_max": (lambda v: v > 0, "> 0"),
    "t_end": (lambda v: v >= 0, ">= 0"),
    "poisson_tol": (lambda v: 0 < v < 1e-4, "in (0, 1e-4)"),
    "implicit_tol": (lambda v: 0 < v < 1e-4, "in (0, 1e-4)"),
    "snapshot_every": (lambda v: v >= 1, ">= 1"),
    "bound_ratio": (lambda v: v > 0, "> 0"),
    "preset": (lambda v: v in ("two_blobs", "uniform", "custom"), "one of two_blobs/uniform/custom"),
    "dt_policy": (lambda v: v in ("cfl", "fixed"), "one of cfl/fixed"),
}


@dataclass(frozen=True)
class RunConfig:
    grid: Grid2D
    params: SimParams
    preset: InitialPreset
    snapshot_every: int = 500
    out_dir: str = "."
    seed: int = 0
    bound_ratio: float = 10.0


@dataclass(frozen=True)
class SweepSpec:
    alpha_list: tuple[float, ...]
    kappa_list: tuple[float, ...]
    base: RunConfig

    def __post_init__(self):
        if not self.alpha_list or not self.kappa_list:
            raise ConfigError("sweep needs nonempty alpha and kappa lists")


def _convert(key: str, raw: str, line: int | None):
    if key in _INT_KEYS:
        try:
            value = int(raw)
        except ValueError:
            raise ConfigTypeError(f"{key} expects an integer, got {raw!r}", line) from None
    elif key in _FLOAT_KEYS:
        try:
            value = float(raw)
        except ValueError:
            raise ConfigTypeError(f"{key} expects a number, got {raw!r}", line) from None
    else:
        value = raw
    rule = _RANGE_RULES.get(key)
    if rule is not None and not rule[0](value):
        raise ConfigRangeError(f"{key} must be {rule[1]}, got {raw!r}", line)
    return value


def parse_config(text: str, overrides: dict[str, str] | None = None) -> RunConfig:
    """Parse config text (plus optional CLI overrides) into a RunConfig."""
    values = {k: _convert(k, v, None) for k, v in DEFAULTS.items()}
    for lineno, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigTypeError(f"expected 'key = value', got {raw_line!r}", lineno)
        key, _, raw = line.partition("=")
        key = key.strip()
        raw = raw.strip()
        if key not in DEFAULTS:
            raise UnknownKeyError(f"unknown key {key!r}", lineno)
        values[key] = _convert(key, raw, lineno)
    for key, raw in (overrides or {}).items():
        if key not in DEFAULTS:
            raise UnknownKeyError(f"unknown key {key!r}")
        values[key] = _convert(key, str(raw), None)

    grid = Grid2D(values["nx"], values["ny"], values["lx"], values["ly"])
    params = SimParams(
        alpha=values["alpha"],
        kappa=values["kappa"],
        c_s=values["c_s"],
        phi_gradient=(values["phi_grad_x"], values["phi_grad_y"]),
        dt_policy=values["dt_policy"],
        dt_max=values["dt_max"],
        t_end=values["t_end"],
        poisson_tol=values["poisson_tol"],
        implicit_tol=values["implicit_tol"],
    )
    if values["preset"] == "two_blobs":
        preset: InitialPreset = TwoBlobs()
    elif values["preset"] == "uniform":
        preset = Uniform(values["uniform_n"], values["uniform_c"], values["uniform_m"])
    else:
        missing = [k for k in ("n_file", "c_file", "m_file") if not values[k]]
        if missing:
            raise ConfigError(f"custom preset needs {', '.join(missing)}")
        preset = Custom(
            values["n_file"],
            values["c_file"],
            values["m_file"],
            values["ux_file"] or None,
            values["uy_file"] or None,
        )
    return RunConfig(
        grid=grid,
        params=params,
        preset=preset,
        snapshot_every=values["snapshot_every"],
        out_dir=values["out_dir"],
        seed=values["seed"],
        bound_ratio=values["bound_ratio"],
    )


def serialize_config(config: RunConfig) -> str:
    """Emit canonical ``key = value`` text that parses back to ``config``."""
    p = config.params
    values = dict(DEFAULTS)
    values.update(
        nx=str(config.grid.nx),
        ny=str(config.grid.ny),
        lx=repr(config.grid.lx),
        ly=repr(config.grid.ly),
        alpha=repr(p.alpha),
        kappa=repr(p.kappa),
        c_s=repr(p.c_s),
        phi_grad_x=repr(p.phi_gradient[0]),
        phi_grad_y=repr(p.phi_gradient[1]),
        dt_policy=p.dt_policy,
        dt_max=repr(p.dt_max),
        t_end=repr(p.t_end),
        poisson_tol=repr(p.poisson_tol),
        implicit_tol=repr(p.implicit_tol),
        snapshot_every=str(config.snapshot_every),
        out_dir=config.out_dir,
        seed=str(config.seed),
        bound_ratio=repr(config.bound_ratio),
    )
    preset = config.preset
    if isinstance(preset, TwoBlobs):
        values["preset"] = "two_blobs"
    elif isinstance(preset, Uniform):
        values["preset"] = "uniform"
        values["uniform_n"] = repr(preset.n)
        values["uniform_c"] = repr(preset.c)
        values["uniform_m"] = repr(preset.m)
    else:
        values["preset"] = "custom"
        values["n_file"] = preset.n_path
        values["c_file"] = preset.c_path
        values["m_file"] = preset.m_path
        values["ux_file"] = preset.ux_path or ""
        values["uy_file"] = preset.uy_path or ""
    return "".join(f"{k} = {values[k]}\n" for k in DEFAULTS)


def default_config_text() -> str:
    return "".join(f"{k} = {v}\n" for k, v in DEFAULTS.items())
