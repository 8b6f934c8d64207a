"""Run configuration: a flat ``key = value`` text format with one section per command.

Example::

    schema_version = 1
    command = spectrum
    seed = 7

    [spectrum]
    epsilon_grid = 0.1
    twist = 0.5

Top-level keys are ``schema_version``, ``command``, ``seed`` (mandatory) and
``out``.  Keys inside ``[<command>]`` are checked against a per-command schema;
anything missing is filled from the defaults and listed in
``RunConfig.defaulted``.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np

from .errors import ConfigError

__all__ = [
    "COMMANDS",
    "SCHEMA_VERSION",
    "RunConfig",
    "WarpSpec",
    "parse_config",
    "serialize",
    "load_config",
]

SCHEMA_VERSION = 1
COMMANDS = ("algebra-check", "spectrum", "scaling", "newton", "sweep")
GAMMA_FAMILIES = ("zero", "constant", "linear", "quadratic", "sine")
NORMS = ("L2", "C0", "C1ALPHA")

_WARP_RE = re.compile(
    r"^1(?:\s*\+\s*(?P<amp>[0-9.eE+-]+)\s*\*?\s*(?P<fn>sin|cos)\s*\(\s*(?P<var>x2|x3)\s*\))?$"
)


@dataclass(frozen=True)
class WarpSpec:
    """h(x2, x3) = 1 + amplitude * fn(var); amplitude 0 means h == 1."""

    amplitude: float = 0.0
    fn: str = "sin"
    var: str = "x2"

    @classmethod
    def parse(cls, text: str) -> "WarpSpec":
        m = _WARP_RE.match(text.strip())
        if m is None:
            raise ValueError(f"warp must look like '1' or '1+0.3sin(x2)', got {text!r}")
        if m.group("amp") is None:
            return cls()
        amp = float(m.group("amp"))
        if not abs(amp) < 1:
            raise ValueError(f"warp amplitude must satisfy |a| < 1 so that h > 0, got {amp}")
        return cls(amp, m.group("fn"), m.group("var"))

    @property
    def is_flat(self) -> bool:
        return self.amplitude == 0.0

    def __call__(self, x2, x3):
        arg = x2 if self.var == "x2" else x3
        fn = np.sin if self.fn == "sin" else np.cos
        return 1.0 + self.amplitude * fn(arg + 0.0 * (x2 + x3))

    def __str__(self) -> str:
        return "1" if self.is_flat else f"1+{self.amplitude!r}{self.fn}({self.var})"


# -- value parsers ----------------------------------------------------------


def _float(text):
    v = float(text)
    if not math.isfinite(v):
        raise ValueError(f"expected a finite number, got {text!r}")
    return v


def _int(text):
    try:
        return int(text)
    except ValueError:
        raise ValueError(f"expected an integer, got {text!r}") from None


def _complex(text):
    s = text.replace(" ", "").replace("i", "j")
    v = complex(s)
    if not (math.isfinite(v.real) and math.isfinite(v.imag)):
        raise ValueError(f"expected a finite complex number, got {text!r}")
    return v


def _float_list(text):
    items = [t for t in re.split(r"[,\s]+", text.strip()) if t]
    if not items:
        raise ValueError("expected at least one value")
    return tuple(_float(t) for t in items)


def _choice(options):
    def parse(text):
        for o in options:
            if text.strip().lower() == o.lower():
                return o
        raise ValueError(f"expected one of {', '.join(options)}, got {text!r}")
    return parse


def _fmt_complex(z: complex) -> str:
    return f"{z.real!r}{'+' if z.imag >= 0 else '-'}{abs(z.imag)!r}i"


# -- range checks -----------------------------------------------------------


def _positive(name):
    def check(v):
        vals = v if isinstance(v, tuple) else (v,)
        if not all(x > 0 for x in vals):
            raise ValueError(f"{name} must satisfy {name} > 0")
    return check


def _grid(name):
    def check(v):
        if v < 4:
            raise ValueError(f"{name} must satisfy {name} >= 4")
    return check


def _even_grid(name):
    def check(v):
        if v < 4 or v % 2:
            raise ValueError(f"{name} must be even and satisfy {name} >= 4")
    return check


def _alpha(v):
    if not 0 < v < 1:
        raise ValueError("alpha must satisfy alpha ∈ (0,1)")


def _p(v):
    if not v > 3:
        raise ValueError("p must satisfy p > 3")


def _at_least(name, lo):
    def check(v):
        if v < lo:
            raise ValueError(f"{name} must satisfy {name} >= {lo}")
    return check


@dataclass(frozen=True)
class _Key:
    parse: Callable[[str], Any]
    default: Any
    fmt: Callable[[Any], str] = repr
    check: Callable[[Any], None] | None = None


def _fmt_list(v):
    return ", ".join(repr(x) for x in v)


def _eps_grid(default):
    return _Key(_float_list, default, _fmt_list, _positive("epsilon"))


def _n(name, default, even=False):
    return _Key(_int, default, str, _even_grid(name) if even else _grid(name))


def _tol(name, default):
    return _Key(_float, default, repr, _positive(name))


SCHEMA: dict[str, dict[str, _Key]] = {
    "algebra-check": {
        "samples": _Key(_int, 10_000, str, _at_least("samples", 1)),
        "frames": _Key(_int, 1000, str, _at_least("frames", 0)),
    },
    "spectrum": {
        "epsilon_grid": _eps_grid((0.1,)),
        "twist": _Key(_complex, 0.5 + 0j, _fmt_complex),
        "warp": _Key(WarpSpec.parse, WarpSpec(), str),
        "n1": _n("n1", 32),
        "n2": _n("n2", 64, even=True),
        "n3": _n("n3", 64, even=True),
    },
    "scaling": {
        "epsilon_grid": _eps_grid((0.4, 0.2, 0.1, 0.05)),
        "twist": _Key(_complex, 0.5 + 0j, _fmt_complex),
        "warp": _Key(WarpSpec.parse, WarpSpec(), str),
        "norm": _Key(_choice(NORMS), "L2", str),
        "alpha": _Key(_float, 0.25, repr, _alpha),
        "p": _Key(_float, 6.0, repr, _p),
        "probes": _Key(_int, 200, str, _at_least("probes", 1)),
        "n1": _n("n1", 16),
        "n2": _n("n2", 16, even=True),
        "n3": _n("n3", 16, even=True),
    },
    "newton": {
        "epsilon": _Key(_float, 0.2, repr, _positive("epsilon")),
        "gamma": _Key(_choice(GAMMA_FAMILIES), "sine", str),
        "amplitude": _Key(_float, 0.01, repr),
        "tol": _tol("tol", 1e-10),
        "max_iter": _Key(_int, 20, str, _at_least("max_iter", 1)),
        "n1": _n("n1", 16),
        "n2": _n("n2", 32, even=True),
        "n3": _n("n3", 32, even=True),
    },
    "sweep": {
        "epsilon_grid": _eps_grid((0.4, 0.2, 0.1, 0.05)),
        "gamma": _Key(_choice(GAMMA_FAMILIES), "sine", str),
        "amplitude": _Key(_float, 0.01, repr),
        "tol": _tol("tol", 1e-10),
        "max_iter": _Key(_int, 20, str, _at_least("max_iter", 1)),
        "n1": _n("n1", 16),
        "n2": _n("n2", 32, even=True),
        "n3": _n("n3", 32, even=True),
    },
}

_TOP = ("schema_version", "command", "seed", "out")


@dataclass(frozen=True)
class RunConfig:
    command: str
    seed: int
    params: dict
    schema_version: int = SCHEMA_VERSION
    out: str | None = None
    defaulted: tuple = field(default=(), compare=False)

    def __getitem__(self, key):
        return self.params[key]

    def echo(self) -> dict:
        """JSON-friendly view of every resolved setting."""
        keys = SCHEMA[self.command]
        return {
            "schema_version": self.schema_version,
            "command": self.command,
            "seed": self.seed,
            "params": {k: keys[k].fmt(v) for k, v in self.params.items()},
            "defaulted": list(self.defaulted),
        }


def _strip(line: str) -> str:
    return line.split("#", 1)[0].strip()


def parse_config(text: str, command: str | None = None) -> RunConfig:
    """Parse and fully validate configuration text.

    ``command`` (from the command line) overrides a missing ``command`` key;
    if both are present they must agree.
    """
    top: dict[str, tuple[str, int]] = {}
    sections: dict[str, dict[str, tuple[str, int]]] = {}
    current = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = _strip(raw)
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                raise ConfigError("malformed section header", line=lineno)
            current = line[1:-1].strip()
            if current not in SCHEMA:
                raise ConfigError(f"unknown section [{current}]; expected one of {', '.join(COMMANDS)}",
                                  line=lineno)
            if current in sections:
                raise ConfigError(f"duplicate section [{current}]", line=lineno)
            sections[current] = {}
            continue
        if "=" not in line:
            raise ConfigError("expected 'key = value'", line=lineno)
        key, value = (s.strip() for s in line.split("=", 1))
        if not key:
            raise ConfigError("empty key", line=lineno)
        target = top if current is None else sections[current]
        if current is None and key not in _TOP:
            raise ConfigError(f"unknown top-level key {key!r}", line=lineno, key=key)
        if current is not None and key not in SCHEMA[current]:
            raise ConfigError(f"unknown key {key!r} in [{current}]", line=lineno, key=key)
        if key in target:
            raise ConfigError(f"duplicate key {key!r}", line=lineno, key=key)
        target[key] = (value, lineno)

    cmd = top.get("command", (None, None))[0]
    if cmd is None:
        cmd = command
    elif command is not None and cmd != command:
        raise ConfigError(f"config is for {cmd!r} but {command!r} was requested",
                          line=top["command"][1], key="command")
    if cmd is None:
        raise ConfigError("no command given", key="command")
    if cmd not in SCHEMA:
        raise ConfigError(f"unknown command {cmd!r}; expected one of {', '.join(COMMANDS)}",
                          line=top.get("command", (None, None))[1], key="command")

    version = SCHEMA_VERSION
    if "schema_version" in top:
        text_v, ln = top["schema_version"]
        try:
            version = _int(text_v)
        except ValueError as exc:
            raise ConfigError(str(exc), line=ln, key="schema_version") from None
        if version != SCHEMA_VERSION:
            raise ConfigError(f"unsupported schema_version {version}; this build reads {SCHEMA_VERSION}",
                              line=ln, key="schema_version")
    if "seed" not in top:
        raise ConfigError("seed is mandatory", key="seed")
    try:
        seed = _int(top["seed"][0])
    except ValueError as exc:
        raise ConfigError(str(exc), line=top["seed"][1], key="seed") from None
    if seed < 0:
        raise ConfigError("seed must satisfy seed >= 0", line=top["seed"][1], key="seed")

    raw = sections.get(cmd, {})
    params, defaulted = {}, []
    for key, spec in SCHEMA[cmd].items():
        if key not in raw:
            params[key] = spec.default
            defaulted.append(key)
            continue
        text_v, ln = raw[key]
        try:
            value = spec.parse(text_v)
            if spec.check is not None:
                spec.check(value)
        except ValueError as exc:
            raise ConfigError(str(exc), line=ln, key=key) from None
        params[key] = value
    out = top["out"][0] if "out" in top else None
    return RunConfig(cmd, seed, params, version, out, tuple(defaulted))


def serialize(cfg: RunConfig) -> str:
    """Text that ``parse_config`` maps back to an equal RunConfig (all keys explicit)."""
    lines = [f"schema_version = {cfg.schema_version}", f"command = {cfg.command}", f"seed = {cfg.seed}"]
    if cfg.out is not None:
        lines.append(f"out = {cfg.out}")
    lines += ["", f"[{cfg.command}]"]
    keys = SCHEMA[cfg.command]
    lines += [f"{k} = {keys[k].fmt(v)}" for k, v in cfg.params.items()]
    return "\n".join(lines) + "\n"


def load_config(path, command: str | None = None) -> RunConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read(), command)
