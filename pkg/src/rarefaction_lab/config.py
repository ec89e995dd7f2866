"""INI experiment configuration: parsing, validation and serialisation.

Schema (every key optional; defaults shown)::

    [gas]
    R = 1.0
    A = 1.0
    gamma = 1.4
    mu = 0.01
    lambda = 0.0
    kappa = 0.01

    [wave]
    rho_plus = 1.0
    u1_plus = 0.0
    theta_plus = 1.0
    strength = 0.3           # w_+ - w_-; or give all three left_* keys instead
    # left_rho = ...
    # left_u1 = ...
    # left_theta = ...
    eps = 0.1
    q = 2.0
    center_fan = false       # shift u1 of both end states so w_- + w_+ = 0

    [grid]
    L = 60.0
    n1 = 512
    n2 = 8
    n3 = 8

    [solver]
    t_final = 100.0
    cfl_adv = 0.5
    cfl_visc = 0.25
    bc_mode = dirichlet-profile
    diag_every = 50

    [perturbation]
    amp_rho = 0.0
    amp_u1 = 0.0
    amp_u2 = 0.0
    amp_u3 = 0.0
    amp_theta = 0.0
    width = 2.0
    center = 0.0
    k = 0
    m = 0
    random_phase = false
    seed = 0

    [decay]
    t_lo = 50.0
    t_hi = 5000.0
    samples = 40

    [outputs]
    directory = out
    dump_every = 0           # steps between field dumps; 0 disables them
    threads = 1
"""

import configparser
from dataclasses import dataclass, field, fields, replace
import math

from .grid import Grid
from .solver import PerturbationConfig, SolverConfig
from .thermo import GasConstants, PrimState, sound_speed
from .wave import build_wave_spec

__all__ = [
    "ConfigError",
    "WaveConfig",
    "DecayConfig",
    "OutputConfig",
    "ExperimentConfig",
    "parse_config",
    "load_config",
    "dump_config",
]


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class WaveConfig:
    rho_plus: float = 1.0
    u1_plus: float = 0.0
    theta_plus: float = 1.0
    strength: float = 0.3
    left_rho: float = None
    left_u1: float = None
    left_theta: float = None
    eps: float = 0.1
    q: float = 2.0
    center_fan: bool = False

    @property
    def has_left(self):
        return self.left_rho is not None

    def build(self, g, check_curve=True):
        """Construct the :class:`~rarefaction_lab.wave.WaveSpec`."""
        shift = 0.0
        right = PrimState(self.rho_plus, self.u1_plus, 0.0, 0.0, self.theta_plus)
        if self.has_left:
            left = PrimState(self.left_rho, self.left_u1, 0.0, 0.0, self.left_theta)
            if self.center_fan:
                # Galilean shift: lambda3 moves by the same amount at both ends.
                shift = -0.5 * (
                    self.u1_plus + float(sound_speed(g, self.rho_plus, self.theta_plus))
                    + self.left_u1 + float(sound_speed(g, self.left_rho, self.left_theta))
                )
                right = replace(right, u1=right.u1 + shift)
                left = replace(left, u1=left.u1 + shift)
            rtol = 1e-10 if check_curve else math.inf
            return build_wave_spec(g, right, left=left, eps=self.eps, q=self.q, rtol=rtol)
        if self.center_fan:
            w_plus = self.u1_plus + float(sound_speed(g, self.rho_plus, self.theta_plus))
            right = replace(right, u1=self.u1_plus + 0.5 * self.strength - w_plus)
        return build_wave_spec(g, right, strength=self.strength, eps=self.eps, q=self.q)


@dataclass(frozen=True)
class DecayConfig:
    t_lo: float = 50.0
    t_hi: float = 5000.0
    samples: int = 40

    @property
    def window(self):
        return (self.t_lo, self.t_hi)


@dataclass(frozen=True)
class OutputConfig:
    directory: str = "out"
    dump_every: int = 0
    threads: int = 1


@dataclass(frozen=True)
class ExperimentConfig:
    gas: GasConstants = field(default_factory=GasConstants)
    wave: WaveConfig = field(default_factory=WaveConfig)
    grid: Grid = field(default_factory=lambda: Grid(60.0, 512, 8, 8))
    solver: SolverConfig = field(default_factory=lambda: SolverConfig(t_final=100.0))
    perturbation: PerturbationConfig = field(default_factory=PerturbationConfig)
    decay: DecayConfig = field(default_factory=DecayConfig)
    outputs: OutputConfig = field(default_factory=OutputConfig)

    def wave_spec(self, check_curve=True):
        return self.wave.build(self.gas, check_curve=check_curve)

    def validate(self, simulation=True, check_curve=True):
        """Check cross-module constraints; returns the built wave spec.

        With ``simulation`` the wave cone must fit the domain,
        ``L >= 2 (|w_-| + |w_+|) t_final``, and the perturbed initial data
        must be positive.
        """
        try:
            spec = self.wave_spec(check_curve=check_curve)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        if not self.decay.t_lo < self.decay.t_hi:
            raise ConfigError("decay window needs t_lo < t_hi")
        if self.decay.samples < 8:
            raise ConfigError("decay study needs at least 8 samples")
        if self.outputs.threads < 1 or self.outputs.dump_every < 0:
            raise ConfigError("threads must be >= 1 and dump_every >= 0")
        if simulation:
            need = 2.0 * (abs(spec.w_minus) + abs(spec.w_plus)) * self.solver.t_final
            if self.grid.L < need * (1.0 - 1e-9):
                raise ConfigError(
                    f"domain too short for the wave cone: L={self.grid.L} < {need:.6g}"
                )
            from .solver import initial_field

            try:
                initial_field(self.gas, spec, self.grid, self.perturbation)
            except ValueError as exc:
                raise ConfigError(str(exc)) from exc
        return spec


# Section name -> (config attribute, dataclass, {ini key: field name}).
_SECTIONS = {
    "gas": ("gas", GasConstants, {"lambda": "lam"}),
    "wave": ("wave", WaveConfig, {}),
    "grid": ("grid", Grid, {}),
    "solver": ("solver", SolverConfig, {}),
    "perturbation": ("perturbation", PerturbationConfig, {}),
    "decay": ("decay", DecayConfig, {}),
    "outputs": ("outputs", OutputConfig, {}),
}


def _convert(raw, default, key):
    if isinstance(default, bool):
        low = raw.strip().lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise ConfigError(f"{key}: expected a boolean, got {raw!r}")
    if isinstance(default, int):
        try:
            return int(raw)
        except ValueError:
            raise ConfigError(f"{key}: expected an integer, got {raw!r}") from None
    if isinstance(default, str):
        return raw.strip()
    try:
        return float(raw)
    except ValueError:
        raise ConfigError(f"{key}: expected a number, got {raw!r}") from None


def parse_config(text):
    """Parse INI text into a validated-structure :class:`ExperimentConfig`.

    Unknown sections or keys are errors.  Cross-module checks live in
    :meth:`ExperimentConfig.validate`.
    """
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(str(exc)) from exc
    base = ExperimentConfig()
    parts = {}
    for section in cp.sections():
        if section not in _SECTIONS:
            raise ConfigError(f"unknown section [{section}]")
    for section, (attr, cls, aliases) in _SECTIONS.items():
        current = getattr(base, attr)
        names = {f.name for f in fields(cls)}
        values = {f.name: getattr(current, f.name) for f in fields(cls)}
        if cp.has_section(section):
            for key, raw in cp.items(section):
                name = aliases.get(key, key)
                if name not in names:
                    raise ConfigError(f"unknown key {key!r} in [{section}]")
                default = values[name]
                if default is None:
                    default = 0.0
                values[name] = _convert(raw, default, f"[{section}] {key}")
        try:
            parts[attr] = cls(**values)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"[{section}] {exc}") from exc
    wave = parts["wave"]
    lefts = (wave.left_rho, wave.left_u1, wave.left_theta)
    if any(v is not None for v in lefts) and not all(v is not None for v in lefts):
        raise ConfigError("[wave] give all of left_rho, left_u1, left_theta or none")
    if cp.has_section("wave") and wave.has_left and cp.has_option("wave", "strength"):
        raise ConfigError("[wave] give either strength or a left state, not both")
    return ExperimentConfig(**parts)


def load_config(path):
    with open(path) as fh:
        return parse_config(fh.read())


def dump_config(cfg):
    """Serialise to INI text that :func:`parse_config` reads back identically."""
    lines = []
    for section, (attr, cls, aliases) in _SECTIONS.items():
        reverse = {v: k for k, v in aliases.items()}
        obj = getattr(cfg, attr)
        lines.append(f"[{section}]")
        for f in fields(cls):
            value = getattr(obj, f.name)
            if value is None:
                continue
            if section == "wave" and f.name == "strength" and cfg.wave.has_left:
                continue
            if isinstance(value, bool):
                text = "true" if value else "false"
            elif isinstance(value, float):
                text = repr(value)
            else:
                text = str(value)
            lines.append(f"{reverse.get(f.name, f.name)} = {text}")
        lines.append("")
    return "\n".join(lines)
