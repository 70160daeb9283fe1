"""
Flat sectioned key-value configuration.

    # comment
    [grid]
    n = 128
    [params]
    nu = 0.01
    mu = 0.1
    [forcing]
    modes = 2, 1, 1.0, 0.0; 0, 3, 0.5
    [run]
    t_end = 200

Keys may also be written fully dotted (``grid.n = 128``). Unknown keys are
rejected; every error names the key and, where there is one, the line.
"""

from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Tuple, Union
import logging
import math
import re

from .constants import M2P_HEADROOM, SPREAD_FACTOR, SYNC_THRESHOLD
from .errors import ConfigError
from .models import (
    BoundConstants,
    ForcingMode,
    ForcingSpec,
    GridSpec,
    InitialCondition,
    InitialKind,
    PhysParams,
    SimConfig,
    SweepConfig,
)

logger = logging.getLogger(__name__)

SECTION_PATTERN = re.compile(r"^\[\s*([A-Za-z_][\w]*)\s*\]$")
ENTRY_PATTERN = re.compile(r"^([A-Za-z_][\w.]*)\s*=\s*(.*)$")


def _float(text: str) -> float:
    value = float(text)
    if not math.isfinite(value):
        raise ValueError(f"non-finite number '{text}'")
    return value


def _int(text: str) -> int:
    return int(text)


def _bool(text: str) -> bool:
    lowered = text.lower()
    if lowered in ("true", "yes", "on", "1"):
        return True
    if lowered in ("false", "no", "off", "0"):
        return False
    raise ValueError(f"expected a boolean, got '{text}'")


def _optional(parse: Callable[[str], Any], word: str = "none") -> Callable[[str], Any]:
    def inner(text: str):
        return None if text.lower() in (word, "none") else parse(text)
    return inner


def _float_list(text: str) -> Tuple[float, ...]:
    return tuple(_float(x.strip()) for x in text.split(",") if x.strip())


def _int_list(text: str) -> Tuple[int, ...]:
    return tuple(int(x.strip()) for x in text.split(",") if x.strip())


def _int_pair(text: str) -> Tuple[int, int]:
    values = _int_list(text)
    if len(values) != 2:
        raise ValueError(f"expected two integers, got '{text}'")
    return values


def _strip_exponent(text: str) -> float:
    """Strip exponent p: an integer ≥ 2, so that ‖ω‖_{2p} has an even exponent."""
    value = _float(text)
    if value < 2 or value != int(value):
        raise ValueError(f"p must be an integer >= 2 so that 2p is even, got {text}")
    return value


def _initial_kind(text: str) -> InitialKind:
    try:
        return InitialKind(text.lower())
    except ValueError:
        raise ValueError(f"expected one of {[k.value for k in InitialKind]}, got '{text}'") from None


def _modes(text: str) -> Tuple[ForcingMode, ...]:
    modes = []
    for record in text.split(";"):
        if not record.strip():
            continue
        parts = [p.strip() for p in record.split(",")]
        if len(parts) not in (3, 4):
            raise ValueError(f"forcing mode needs 'j1, j2, amplitude[, phase]', got '{record.strip()}'")
        phase = _float(parts[3]) if len(parts) == 4 else 0.0
        modes.append(ForcingMode(int(parts[0]), int(parts[1]), _float(parts[2]), phase))
    return tuple(modes)


REQUIRED = object()
DERIVED = object()

# key -> (parser, default); DERIVED defaults are resolved after parsing
SCHEMA: Dict[str, Tuple[Callable[[str], Any], Any]] = {
    "grid.n": (_int, REQUIRED),
    "grid.length": (_float, 2.0 * math.pi),
    "params.nu": (_float, REQUIRED),
    "params.mu": (_float, REQUIRED),
    "forcing.modes": (_modes, REQUIRED),
    "run.t_end": (_float, REQUIRED),
    "run.dt": (_optional(_float, "auto"), None),
    "run.spinup": (_optional(_float, "auto"), None),
    "run.sample_every": (_int, 10),
    "run.checkpoint_every": (_optional(_int), None),
    "run.seed": (_int, 0),
    "run.fft_backend": (str, "numpy"),
    "initial.kind": (_initial_kind, InitialKind.ZERO),
    "initial.mode": (_int_pair, (1, 0)),
    "initial.amplitude": (_float, 1.0),
    "initial.slope": (_float, -1.0),
    "diagnostics.sigma1": (_float, 1.0),
    "diagnostics.radius": (_bool, True),
    "bounds.sigma1": (_float, DERIVED),
    "bounds.delta_f": (_float, 0.5),
    "bounds.p": (_strip_exponent, 2.0),
    "bounds.headroom": (_float, M2P_HEADROOM),
    "bounds.c": (_float, 1.0),
    "bounds.c1": (_float, 1.0),
    "bounds.c2": (_float, BoundConstants().c2),
    "bounds.c3": (_float, 1.0),
    "bounds.c4": (_float, BoundConstants().c4),
    "bounds.c5": (_float, BoundConstants().c5),
    "bounds.c6": (_float, 1.0),
    "bounds.c7": (_float, 1.0),
    "bounds.c8": (_float, 1.0),
    "bounds.C": (_float, 1.0),
    "sweep.nu_values": (_optional(_float_list), None),
    "sweep.resolutions": (_optional(_int_list), None),
    "sweep.refine": (_bool, True),
    "sweep.max_n": (_int, 1024),
    "sweep.spread_factor": (_float, SPREAD_FACTOR),
    "sync.kappa_c": (_optional(_float), None),
    "sync.kappa_values": (_optional(_float_list), None),
    "sync.horizon": (_optional(_float, "auto"), None),
    "sync.threshold": (_float, SYNC_THRESHOLD),
}


@dataclass
class Settings:
    """Everything a config file declares."""
    sim: SimConfig
    sweep: Optional[SweepConfig]
    constants: BoundConstants
    values: Dict[str, Any] = field(default_factory=dict)

    @property
    def bounds_sigma1(self) -> float:
        return self.values["bounds.sigma1"]

    @property
    def kappa_values(self) -> List[float]:
        if self.values["sync.kappa_values"] is not None:
            return list(self.values["sync.kappa_values"])
        if self.values["sync.kappa_c"] is not None:
            return [self.values["sync.kappa_c"]]
        return []


def _read_entries(text: str) -> Dict[str, Tuple[str, int]]:
    entries: Dict[str, Tuple[str, int]] = {}
    section = ""
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        match = SECTION_PATTERN.match(line)
        if match:
            section = match.group(1)
            continue
        match = ENTRY_PATTERN.match(line)
        if not match:
            raise ConfigError(f"cannot parse '{line}'", line=lineno)
        key = match.group(1)
        if section and "." not in key:
            key = f"{section}.{key}"
        if key not in SCHEMA:
            raise ConfigError("unknown key", key=key, line=lineno)
        if key in entries:
            raise ConfigError("duplicate key", key=key, line=lineno)
        entries[key] = (match.group(2).strip(), lineno)
    return entries


def _resolve(entries: Dict[str, Tuple[str, int]]) -> Dict[str, Any]:
    values: Dict[str, Any] = {}
    sweep_given = "sweep.nu_values" in entries
    for key, (parse, default) in SCHEMA.items():
        if key in entries:
            text, lineno = entries[key]
            try:
                values[key] = parse(text)
            except ValueError as e:
                raise ConfigError(f"bad value '{text}': {e}", key=key, line=lineno) from None
        elif default is REQUIRED:
            if key == "params.nu" and sweep_given:
                continue
            raise ConfigError("missing required key", key=key)
        else:
            values[key] = default
    if values["bounds.sigma1"] is DERIVED:
        values["bounds.sigma1"] = values["diagnostics.sigma1"]
    if "params.nu" not in values:
        nus = values["sweep.nu_values"]
        if not nus:
            raise ConfigError("sweep.nu_values must not be empty", key="sweep.nu_values",
                              line=entries["sweep.nu_values"][1])
        values["params.nu"] = nus[0]
    return values


def _build(values: Dict[str, Any], entries: Dict[str, Tuple[str, int]]) -> Settings:
    def fail(e: ValueError, key: str) -> ConfigError:
        line = entries[key][1] if key in entries else None
        return ConfigError(str(e), key=key, line=line)

    try:
        grid = GridSpec(values["grid.n"], values["grid.length"])
    except ValueError as e:
        raise fail(e, "grid.n") from None
    try:
        params = PhysParams(values["params.nu"], values["params.mu"])
    except ValueError as e:
        raise fail(e, "params.nu") from None
    initial = InitialCondition(values["initial.kind"], values["initial.mode"],
                               values["initial.amplitude"], values["initial.slope"])
    try:
        sim = SimConfig(
            grid=grid,
            params=params,
            forcing=ForcingSpec(values["forcing.modes"]),
            t_end=values["run.t_end"],
            dt=values["run.dt"],
            spinup=values["run.spinup"],
            sample_every=values["run.sample_every"],
            initial=initial,
            checkpoint_every=values["run.checkpoint_every"],
            seed=values["run.seed"],
            sigma1=values["diagnostics.sigma1"],
            radius=values["diagnostics.radius"],
            fft_backend=values["run.fft_backend"],
        )
    except ValueError as e:
        raise fail(e, "run.t_end") from None
    constants = BoundConstants(**{k.split(".", 1)[1]: values[k] for k in values
                                  if k.startswith("bounds.c") or k == "bounds.C"})
    sweep = None
    if values["sweep.nu_values"] is not None:
        try:
            sweep = SweepConfig(
                base=sim,
                nu_values=values["sweep.nu_values"],
                resolutions=values["sweep.resolutions"],
                refine=values["sweep.refine"],
                max_n=values["sweep.max_n"],
                spread_factor=values["sweep.spread_factor"],
            )
        except ValueError as e:
            raise fail(e, "sweep.nu_values") from None
    return Settings(sim, sweep, constants, values)


def parse_settings(text: str, seed: Optional[int] = None) -> Settings:
    """Parse config text; ``seed`` overrides run.seed."""
    entries = _read_entries(text)
    values = _resolve(entries)
    if seed is not None:
        values["run.seed"] = seed
    settings = _build(values, entries)
    logger.debug("[CONFIG] %d keys set, %d defaulted", len(entries), len(SCHEMA) - len(entries))
    return settings


def parse_config(text: str) -> Union[SimConfig, SweepConfig]:
    """A SweepConfig when sweep.nu_values is set, otherwise a SimConfig."""
    settings = parse_settings(text)
    return settings.sweep if settings.sweep is not None else settings.sim


def _render(value: Any) -> str:
    if value is None:
        return "none"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, InitialKind):
        return value.value
    if isinstance(value, tuple) and value and isinstance(value[0], ForcingMode):
        return "; ".join(f"{m.j1}, {m.j2}, {m.amplitude!r}, {m.phase!r}" for m in value)
    if isinstance(value, tuple):
        return ", ".join(_render(v) for v in value)
    return str(value)


def config_echo(settings: Settings) -> str:
    """Every key with defaults applied, sorted, floats repr-exact."""
    values = dict(settings.values)
    values["run.spinup"] = settings.sim.spinup_time
    return "".join(f"{key} = {_render(values[key])}\n" for key in sorted(values))
