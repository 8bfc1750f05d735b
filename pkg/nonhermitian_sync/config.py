"""TOML experiment configuration.

``parse_config`` checks every section and key and reports all problems at
once through :class:`ConfigError`. The grammar is documented in
``docs/COMMANDS.md``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

import numpy as np

try:
    import tomllib
except ImportError:  # Python 3.10
    import tomli as tomllib

from nonhermitian_sync.disorder import DisorderConfig
from nonhermitian_sync.elimination import ThreeModeParams
from nonhermitian_sync.errors import ConditionError, ConfigError, ParameterError
from nonhermitian_sync.noise import NoiseConfig
from nonhermitian_sync.params import (
    SyncMode,
    SystemParams,
    solve_drive_frequency,
    solve_sync_angle,
)
from nonhermitian_sync.propagator import steady_state

logger = logging.getLogger(__name__)

COMMANDS = ("check", "evolve", "kuramoto", "noise", "disorder", "eliminate", "sweep")

REQUIRED_SECTIONS: Dict[str, Tuple[str, ...]] = {
    "check": ("params",),
    "evolve": ("params", "time"),
    "kuramoto": ("params", "time"),
    "noise": ("params", "time", "noise"),
    "disorder": ("params", "disorder"),
    "eliminate": ("elimination",),
    "sweep": ("params", "time", "sweep"),
}

_REQUIRED = object()


@dataclass(frozen=True)
class Field:
    kind: str
    default: Any = _REQUIRED
    choices: Tuple[str, ...] = ()
    minimum: Optional[float] = None
    strict: bool = False


SCHEMA: Dict[str, Dict[str, Field]] = {
    "run": {
        "command": Field("str", None, choices=COMMANDS),
        "seed": Field("int", 0, minimum=0),
        "output": Field("str", "results"),
        "threads": Field("int", 1, minimum=0),
    },
    "params": {
        "n_modes": Field("int", minimum=1),
        "omega0": Field("float"),
        "gamma0": Field("float", minimum=0),
        "omega": Field("float"),
        "gamma": Field("float", minimum=0),
        "coupling": Field("float", minimum=0),
        "theta": Field("float_or_auto", None),
        "theta_over_pi": Field("float", None),
        "drive": Field("float", 0.0, minimum=0),
        "drive_freq": Field("float_or_auto", 0.0),
    },
    "time": {
        "t_final": Field("float", minimum=0, strict=True),
        "n_samples": Field("int", 201, minimum=2),
        "method": Field("str", "linear", choices=("linear", "polar")),
        "dt": Field("float", None, minimum=0, strict=True),
    },
    "initial": {
        "kind": Field("str", "random_phase", choices=("random_phase", "uniform", "steady_state")),
        "amplitude": Field("float", 1.0, minimum=0),
        "aux_amplitude": Field("float", 1.0, minimum=0),
    },
    "noise": {
        "temperature": Field("float", minimum=0),
        "aux_occupation_freq": Field("float", None, minimum=0, strict=True),
        "n_paths": Field("int", 1000, minimum=1),
        "dt": Field("float", 0.01, minimum=0, strict=True),
        "record_every": Field("int", 10, minimum=1),
        "ref_mode": Field("int", 0, minimum=0),
        "exclude_noise_dominated": Field("bool", True),
    },
    "disorder": {
        "mean_freq": Field("float", None),
        "sigma": Field("float", 0.0, minimum=0),
        "n_trials": Field("int", 50, minimum=1),
        "sigma_grid": Field("float_list", None),
        "small_sigma_max": Field("float", None, minimum=0, strict=True),
    },
    "sweep": {
        "axis": Field("str", choices=("coupling", "sin_theta")),
        "values": Field("float_list"),
        "threshold": Field("float", 0.05 * math.pi, minimum=0, strict=True),
        "n_initial": Field("int", 32, minimum=1),
    },
    "elimination": {
        "omega2": Field("float"),
        "omega_aux": Field("float"),
        "gamma1": Field("float", minimum=0),
        "gamma2": Field("float", minimum=0),
        "gamma_aux": Field("float", minimum=0, strict=True),
        "g1": Field("complex"),
        "g2": Field("complex"),
        "delta_min": Field("float", -1.0),
        "delta_max": Field("float", 1.0),
        "n_delta": Field("int", 201, minimum=2),
        "gamma_ladder": Field("float_list", None),
    },
}


@dataclass(frozen=True)
class TimeConfig:
    t_final: float
    n_samples: int
    method: str
    dt: Optional[float]

    @property
    def times(self) -> np.ndarray:
        return np.linspace(0.0, self.t_final, self.n_samples)


@dataclass(frozen=True)
class InitialConfig:
    kind: str = "random_phase"
    amplitude: float = 1.0
    aux_amplitude: float = 1.0

    def amplitudes(self, params: SystemParams, seed: int) -> np.ndarray:
        """Initial state; random phases come from the Philox stream of ``seed``."""
        if self.kind == "steady_state":
            return steady_state(params)
        n = params.n_modes
        moduli = np.full(n + 1, self.amplitude, dtype=float)
        moduli[0] = self.aux_amplitude
        if self.kind == "uniform":
            return moduli.astype(complex)
        rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([seed])))
        return moduli * np.exp(1j * rng.uniform(-math.pi, math.pi, n + 1))

    def ensemble(self, params: SystemParams, seed: int, count: int) -> np.ndarray:
        """``count`` starts stacked row-wise; start k of a random-phase ensemble uses ``SeedSequence([seed, k])``.

        Deterministic kinds give a single row.
        """
        if self.kind != "random_phase":
            return self.amplitudes(params, seed)[None, :]
        n = params.n_modes
        moduli = np.full(n + 1, self.amplitude, dtype=float)
        moduli[0] = self.aux_amplitude
        rows = []
        for k in range(count):
            rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, k])))
            rows.append(moduli * np.exp(1j * rng.uniform(-math.pi, math.pi, n + 1)))
        return np.array(rows)


@dataclass(frozen=True)
class NoiseSection:
    config: NoiseConfig
    ref_mode: int
    exclude_noise_dominated: bool


@dataclass(frozen=True)
class DisorderSection:
    config: DisorderConfig
    sigma_grid: Optional[Tuple[float, ...]]
    small_sigma_max: Optional[float]


@dataclass(frozen=True)
class SweepConfig:
    axis: str
    values: Tuple[float, ...]
    threshold: float
    n_initial: int = 32


@dataclass(frozen=True)
class EliminationConfig:
    base: ThreeModeParams
    delta_min: float
    delta_max: float
    n_delta: int
    gamma_ladder: Optional[Tuple[float, ...]]

    @property
    def delta_grid(self) -> np.ndarray:
        return np.linspace(self.delta_min, self.delta_max, self.n_delta)


@dataclass(frozen=True)
class ExperimentConfig:
    command: str
    seed: int
    threads: int
    output: str
    params: Optional[SystemParams] = None
    time: Optional[TimeConfig] = None
    initial: InitialConfig = field(default_factory=InitialConfig)
    noise: Optional[NoiseSection] = None
    disorder: Optional[DisorderSection] = None
    sweep: Optional[SweepConfig] = None
    elimination: Optional[EliminationConfig] = None
    source: Dict[str, Any] = field(default_factory=dict)
    resolved: Dict[str, Any] = field(default_factory=dict)


def _coerce(where: str, spec: Field, value: Any, errors: List[str]) -> Any:
    kind = spec.kind
    if kind == "float_or_auto" and isinstance(value, str):
        if value != "auto":
            errors.append(f"{where}: expected a number or \"auto\", got {value!r}")
            return None
        return "auto"
    if kind in ("float", "float_or_auto"):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            errors.append(f"{where}: expected a number, got {type(value).__name__}")
            return None
        value = float(value)
        if not math.isfinite(value):
            errors.append(f"{where}: must be finite")
            return None
    elif kind == "int":
        if isinstance(value, bool) or not isinstance(value, int):
            errors.append(f"{where}: expected an integer, got {type(value).__name__}")
            return None
    elif kind == "bool":
        if not isinstance(value, bool):
            errors.append(f"{where}: expected true or false")
            return None
        return value
    elif kind == "str":
        if not isinstance(value, str):
            errors.append(f"{where}: expected a string")
            return None
        if spec.choices and value not in spec.choices:
            errors.append(f"{where}: must be one of {', '.join(spec.choices)}")
            return None
        return value
    elif kind == "float_list":
        if not isinstance(value, list) or not value:
            errors.append(f"{where}: expected a non-empty array of numbers")
            return None
        if any(isinstance(v, bool) or not isinstance(v, (int, float)) for v in value):
            errors.append(f"{where}: every entry must be a number")
            return None
        return tuple(float(v) for v in value)
    elif kind == "complex":
        if isinstance(value, list) and len(value) == 2 and all(
            isinstance(v, (int, float)) and not isinstance(v, bool) for v in value
        ):
            return complex(float(value[0]), float(value[1]))
        if isinstance(value, (int, float)) and not isinstance(value, bool):
            return complex(float(value), 0.0)
        errors.append(f"{where}: expected a number or [re, im]")
        return None

    if spec.minimum is not None:
        if spec.strict and not value > spec.minimum:
            errors.append(f"{where}: must be > {spec.minimum:g}")
            return None
        if not spec.strict and value < spec.minimum:
            errors.append(f"{where}: must be >= {spec.minimum:g}")
            return None
    return value


def _read_section(name: str, raw: Any, errors: List[str]) -> Dict[str, Any]:
    schema = SCHEMA[name]
    if not isinstance(raw, dict):
        errors.append(f"[{name}] must be a table")
        return {key: None for key in schema}
    values: Dict[str, Any] = {}
    for key in raw:
        if key not in schema:
            errors.append(f"{name}.{key}: unknown key")
    for key, spec in schema.items():
        if key in raw:
            values[key] = _coerce(f"{name}.{key}", spec, raw[key], errors)
        elif spec.default is _REQUIRED:
            errors.append(f"{name}.{key}: missing required key")
            values[key] = None
        else:
            values[key] = spec.default
    return values


def _build_params(
    values: Dict[str, Any], errors: List[str], resolved: Dict[str, Any]
) -> Optional[SystemParams]:
    required = ("n_modes", "omega0", "gamma0", "omega", "gamma", "coupling")
    if any(values.get(key) is None for key in required):
        return None
    theta = values["theta"]
    if values["theta_over_pi"] is not None:
        if theta is not None:
            errors.append("params: give theta or theta_over_pi, not both")
            return None
        theta = values["theta_over_pi"] * math.pi
    theta = 0.0 if theta is None else theta
    drive_freq = values["drive_freq"]
    if drive_freq is None or values["drive"] is None:
        return None
    if theta == "auto" and drive_freq == "auto":
        errors.append("params: theta and drive_freq cannot both be \"auto\"")
        return None

    base = {key: values[key] for key in required}
    try:
        params = SystemParams(
            **base,
            theta=0.0 if theta == "auto" else theta,
            drive=values["drive"],
            drive_freq=0.0 if drive_freq == "auto" else drive_freq,
        )
        if theta == "auto":
            mode = SyncMode.DRIVEN if params.is_driven else SyncMode.UNDRIVEN
            params = params.replace(theta=solve_sync_angle(params, mode))
            resolved["theta"] = params.theta
            logger.info(f"theta resolved to {params.theta:.12g}")
        if drive_freq == "auto":
            if not params.is_driven:
                errors.append("params.drive_freq: \"auto\" needs drive > 0")
                return None
            params = params.replace(drive_freq=solve_drive_frequency(params))
            resolved["drive_freq"] = params.drive_freq
            logger.info(f"drive_freq resolved to {params.drive_freq:.12g}")
    except (ParameterError, ConditionError) as e:
        errors.append(f"params: {e}")
        return None
    return params


def parse_config(
    text: str,
    command: Optional[str] = None,
    seed: Optional[int] = None,
    threads: Optional[int] = None,
) -> ExperimentConfig:
    """Validate TOML ``text`` into an :class:`ExperimentConfig`.

    ``command``, ``seed`` and ``threads`` come from the command line and take
    precedence over ``[run]``; a conflicting ``run.command`` is an error.
    """
    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError as e:
        raise ConfigError([f"invalid TOML: {e}"]) from e

    errors: List[str] = []
    for name in raw:
        if name not in SCHEMA:
            errors.append(f"[{name}]: unknown section")
    sections = {name: _read_section(name, raw[name], errors) for name in SCHEMA if name in raw}
    run = sections.get("run") or _read_section("run", {}, errors)

    configured = run.get("command")
    if command is None:
        command = configured
    elif configured is not None and configured != command:
        errors.append(f"run.command: config is for '{configured}', not '{command}'")
    if command is None:
        errors.append("run.command: no command given")
        raise ConfigError(errors)
    if command not in COMMANDS:
        errors.append(f"command: unknown command '{command}'")
        raise ConfigError(errors)

    for name in REQUIRED_SECTIONS[command]:
        if name not in raw:
            errors.append(f"[{name}]: section required by '{command}'")

    seed = run["seed"] if seed is None else seed
    threads = run["threads"] if threads is None else threads
    if seed is None or seed < 0:
        errors.append("seed: must be a non-negative integer")
        seed = 0
    resolved: Dict[str, Any] = {}

    params = None
    if "params" in sections:
        params = _build_params(sections["params"], errors, resolved)

    time_cfg = None
    if "time" in sections:
        t = sections["time"]
        if t["t_final"] is not None and t["n_samples"] is not None:
            time_cfg = TimeConfig(t["t_final"], t["n_samples"], t["method"] or "linear", t["dt"])

    initial = InitialConfig()
    if "initial" in sections:
        i = sections["initial"]
        if None not in (i["kind"], i["amplitude"], i["aux_amplitude"]):
            initial = InitialConfig(i["kind"], i["amplitude"], i["aux_amplitude"])
        if initial.kind == "steady_state" and params is not None and not params.is_driven:
            errors.append("initial.kind: steady_state needs drive > 0")

    noise = None
    if "noise" in sections:
        n = sections["noise"]
        needed = ("temperature", "n_paths", "dt", "record_every", "ref_mode", "exclude_noise_dominated")
        try:
            if all(n[key] is not None for key in needed):
                noise_cfg = NoiseConfig(
                    temperature=n["temperature"],
                    aux_occupation_freq=n["aux_occupation_freq"],
                    seed=seed,
                    n_paths=n["n_paths"],
                    dt=n["dt"],
                    record_every=n["record_every"],
                )
                noise = NoiseSection(noise_cfg, n["ref_mode"], n["exclude_noise_dominated"])
        except ParameterError as e:
            errors.append(f"noise: {e}")
        if noise is not None and params is not None and noise.ref_mode > params.n_modes:
            errors.append(f"noise.ref_mode: must be <= n_modes ({params.n_modes})")

    disorder = None
    if "disorder" in sections:
        d = sections["disorder"]
        mean_freq = d["mean_freq"]
        if mean_freq is None and params is not None:
            mean_freq = params.omega
        grid = d["sigma_grid"]
        if grid is not None and any(b <= a for a, b in zip(grid, grid[1:])):
            errors.append("disorder.sigma_grid: must be strictly increasing")
        if mean_freq is not None and d["sigma"] is not None and d["n_trials"] is not None:
            disorder = DisorderSection(
                DisorderConfig(mean_freq=mean_freq, sigma=d["sigma"], n_trials=d["n_trials"], seed=seed),
                grid,
                d["small_sigma_max"],
            )

    sweep = None
    if "sweep" in sections:
        s = sections["sweep"]
        if None not in (s["axis"], s["values"], s["threshold"], s["n_initial"]):
            sweep = SweepConfig(s["axis"], s["values"], s["threshold"], s["n_initial"])

    elimination = None
    if "elimination" in sections:
        e = sections["elimination"]
        keys = ("omega2", "omega_aux", "gamma1", "gamma2", "gamma_aux", "g1", "g2")
        if all(e[key] is not None for key in keys):
            if e["delta_max"] is not None and e["delta_min"] is not None and e["delta_max"] <= e["delta_min"]:
                errors.append("elimination.delta_max: must exceed delta_min")
            try:
                base = ThreeModeParams(
                    omega1=e["omega2"],
                    omega2=e["omega2"],
                    omega_aux=e["omega_aux"],
                    gamma1=e["gamma1"],
                    gamma2=e["gamma2"],
                    gamma_aux=e["gamma_aux"],
                    g1=e["g1"],
                    g2=e["g2"],
                )
                elimination = EliminationConfig(
                    base, e["delta_min"], e["delta_max"], e["n_delta"], e["gamma_ladder"]
                )
            except ParameterError as exc:
                errors.append(f"elimination: {exc}")

    if errors:
        raise ConfigError(errors)
    return ExperimentConfig(
        command=command,
        seed=seed,
        threads=threads,
        output=run["output"],
        params=params,
        time=time_cfg,
        initial=initial,
        noise=noise,
        disorder=disorder,
        sweep=sweep,
        elimination=elimination,
        source=raw,
        resolved=resolved,
    )


def load_config(
    path: Union[str, Path],
    command: Optional[str] = None,
    seed: Optional[int] = None,
    threads: Optional[int] = None,
) -> ExperimentConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as e:
        raise ConfigError([f"cannot read config {path}: {e}"]) from e
    return parse_config(text, command=command, seed=seed, threads=threads)
