"""Flat ``key = value`` run configuration.

One assignment per line, ``#`` starts a comment. Unknown or repeated keys
are errors. Values are validated by the dataclasses they feed, so a bad
value fails with the same message as it would from Python.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from .errors import ConfigError, SmcfError
from .flow import FlowConfig
from .pinching import PinchingSpec
from .surface import SurfaceConfig

__all__ = ["RunConfig", "parse_config", "load_config", "BUILTIN_CONFIGS", "KEYS", "parse_spec", "OUTPUT_ENV"]

OUTPUT_ENV = "SMCF_OUTPUT_DIR"


def _bool(s):
    low = s.lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {s!r}")


# key -> (parser, default)
KEYS = {
    "k": (float, 1.0),
    "family": (str, "holomorphic-graph"),
    "nu": (int, 64),
    "nv": (int, None),
    "extent": (float, 0.5),
    "c": (float, 0.1),
    "eps": (float, 0.02),
    "bump_u": (float, 0.0),
    "bump_v": (float, 0.0),
    "bump_width": (float, 0.2),
    "r1": (float, 0.6),
    "r2": (float, 0.8),
    "c_cfl": (float, 0.1),
    "dt_max": (float, 1e-3),
    "t_end": (float, 0.1),
    "cadence": (int, 10),
    "scheme": (str, "euler"),
    "residual_gate": (float, 1e-2),
    "delta_mon": (float, 1e-3),
    "max_steps": (int, 10**6),
    "specs": (str, "thm32"),
    "aux": (str, "exp"),
    "samples": (int, 100000),
    "seed": (int, 0),
    "output_dir": (str, "out"),
    "plots": (_bool, False),
}


def parse_spec(token: str, k=1.0) -> PinchingSpec:
    """``thm32``, ``thm51`` or ``yang:<lambda>`` (lambda may be a fraction like 3/5)."""
    token = token.strip()
    if token in ("thm32", "thm51"):
        return getattr(PinchingSpec, token)(k)
    if token.startswith("yang"):
        lam = token[4:].lstrip(":")
        if not lam:
            raise ConfigError("yang spec needs a lambda, e.g. yang:0.6")
        try:
            return PinchingSpec.yang(Fraction(lam), k)
        except (ValueError, ZeroDivisionError) as exc:
            raise ConfigError(f"bad yang lambda {lam!r}: {exc}") from None
    raise ConfigError(f"unknown pinching spec {token!r}")


@dataclass(frozen=True)
class RunConfig:
    values: dict = field(default_factory=dict)

    def __getitem__(self, key):
        return self.values[key]

    @property
    def surface(self) -> SurfaceConfig:
        v = self.values
        return SurfaceConfig(family=v["family"], nu=v["nu"], nv=v["nv"], k=v["k"], extent=v["extent"], c=v["c"],
                             eps=v["eps"], bump_center=(v["bump_u"], v["bump_v"]), bump_width=v["bump_width"],
                             r1=v["r1"], r2=v["r2"])

    @property
    def specs(self) -> tuple:
        toks = [t for t in self.values["specs"].replace(",", " ").split() if t]
        if not toks:
            raise ConfigError("specs must name at least one pinching spec")
        return tuple(parse_spec(t, self.values["k"]) for t in toks)

    @property
    def flow(self) -> FlowConfig:
        v = self.values
        return FlowConfig(surface=self.surface, c_cfl=v["c_cfl"], dt_max=v["dt_max"], t_end=v["t_end"],
                          specs=self.specs, cadence=v["cadence"], seed=v["seed"], scheme=v["scheme"],
                          residual_gate=v["residual_gate"], delta_mon=v["delta_mon"], max_steps=v["max_steps"])

    def output_dir(self) -> Path:
        return Path(os.environ.get(OUTPUT_ENV) or self.values["output_dir"])

    def validate(self):
        """Build every derived object once so bad values surface as ConfigError."""
        try:
            self.flow
        except ConfigError:
            raise
        except (SmcfError, ValueError, TypeError) as exc:
            raise ConfigError(str(exc)) from None
        if self.values["samples"] < 1:
            raise ConfigError("samples must be >= 1")
        return self


def parse_config(text: str, base: dict | None = None) -> RunConfig:
    vals = {key: default for key, (_, default) in KEYS.items()}
    if base:
        vals.update(base)
    seen = set()
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
        key, val = (s.strip() for s in line.split("=", 1))
        if key not in KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in seen:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        seen.add(key)
        parser = KEYS[key][0]
        try:
            vals[key] = parser(val)
        except ValueError:
            raise ConfigError(f"line {lineno}: bad value for {key}: {val!r}") from None
    return RunConfig(vals).validate()


BUILTIN_CONFIGS = {
    "holomorphic-graph": """\
family = holomorphic-graph
nu = 32
extent = 0.5
c = 0.1
c_cfl = 0.2
t_end = 0.2
cadence = 100
specs = thm32 thm51
""",
    "complex-line": """\
family = complex-line
nu = 32
c_cfl = 0.2
t_end = 1.0
cadence = 200
specs = thm32
""",
    "perturbed-graph-thm32": """\
family = perturbed-graph
nu = 64
extent = 1.0
c = 0.005
eps = 0.02
bump_width = 0.3
c_cfl = 0.2
t_end = 0.5
cadence = 200
specs = thm32
""",
    "lagrangian": """\
family = lagrangian
nu = 32
c_cfl = 0.2
t_end = 0.05
cadence = 50
specs = thm32
""",
}


def load_config(name_or_path) -> RunConfig:
    """Read a config file, or use a built-in config when given its name."""
    name = str(name_or_path)
    if name in BUILTIN_CONFIGS and not Path(name).exists():
        return parse_config(BUILTIN_CONFIGS[name])
    try:
        text = Path(name).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {name!r}: {exc.strerror}") from None
    return parse_config(text)
