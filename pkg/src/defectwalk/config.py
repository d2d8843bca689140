"""
Run configuration for the command-line tool.

A config file is a JSON object with a required ``params`` block and
optional knobs.  Unknown keys are rejected.  Defaults:

==========  ===========  ===============================================
key         default      meaning
==========  ===========  ===============================================
torus       200          torus period N for ``spectrum``
operator    "U"          which dense operator ``spectrum`` diagonalizes
steps       100          number of steps for ``evolve``
sign        "+"          birth eigenvalue (+1 or -1)
radius      null         output radius (null: automatic)
sites       "-20..20"    site range for ``measure``
lambda      null         probe point (null: V0, the band centre)
levels      4            refinement levels of the divergence probe
horizon     4000         averaging horizon T for ``measure``
initial     null         initial state; null means delta_0 (x) (0,1,0,..)
anchors     null         anchor list for finite-support families (n >= 2)
exclusion   1e-6         distance to +-1 below which eigenvalues are set aside
sweep       null         {"p": [...]} grid for ``sweep``
==========  ===========  ===============================================

``params`` holds ``p`` (reals), ``q`` (complex as ``[re, im]``) and ``phi``
(one pair ``[Phi_j1, Phi_j2]`` per axis).
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .errors import ConfigError
from .walk import LatticeWindow, WalkParameters, WaveFunction, params_from_dict

__all__ = [
    "RunConfig",
    "load_config",
    "config_from_dict",
    "parse_sign",
    "parse_sites",
    "format_sites",
    "parse_anchors",
    "parse_initial",
    "initial_state",
]


@dataclass(frozen=True)
class RunConfig:
    params: WalkParameters
    torus: int = 200
    operator: str = "U"
    steps: int = 100
    sign: int = 1
    radius: int | None = None
    sites: tuple[int, int] = (-20, 20)
    lam: float | None = None
    levels: int = 4
    horizon: int = 4000
    initial: str | None = None
    anchors: tuple[tuple[int, int], ...] | None = None
    exclusion: float = 1e-6
    sweep: tuple[float, ...] | None = None

    def to_dict(self) -> dict:
        params = self.params.to_dict()
        params.pop("n")
        return {
            "params": params,
            "torus": self.torus,
            "operator": self.operator,
            "steps": self.steps,
            "sign": "+" if self.sign > 0 else "-",
            "radius": self.radius,
            "sites": format_sites(self.sites),
            "lambda": self.lam,
            "levels": self.levels,
            "horizon": self.horizon,
            "initial": self.initial,
            "anchors": None if self.anchors is None else [list(a) for a in self.anchors],
            "exclusion": self.exclusion,
            "sweep": None if self.sweep is None else {"p": list(self.sweep)},
        }

    def with_overrides(self, **changes) -> RunConfig:
        """Return a copy with the non-None entries of ``changes`` applied and checked."""
        changes = {k: v for k, v in changes.items() if v is not None}
        cfg = replace(self, **changes)
        cfg.check()
        return cfg

    def check(self) -> None:
        if self.torus < 3:
            raise ConfigError(f"torus must be at least 3, got {self.torus}")
        if self.operator not in ("U", "T"):
            raise ConfigError(f"operator must be 'U' or 'T', got {self.operator!r}")
        if self.steps < 0:
            raise ConfigError("steps must be nonnegative")
        if self.sign not in (1, -1):
            raise ConfigError("sign must be '+' or '-'")
        if self.radius is not None and self.radius < 0:
            raise ConfigError("radius must be nonnegative")
        if self.sites[0] > self.sites[1]:
            raise ConfigError(f"empty site range {format_sites(self.sites)}")
        if self.levels < 3:
            raise ConfigError("levels must be at least 3")
        if self.horizon < 1:
            raise ConfigError("horizon must be at least 1")
        if not self.exclusion > 0:
            raise ConfigError("exclusion must be positive")
        if self.anchors is not None and any(len(a) != 2 for a in self.anchors):
            raise ConfigError("anchors are pairs (a, b)")
        if self.initial is not None:
            parse_initial(self.initial, self.params.n)


_KNOBS = {
    "torus": "torus",
    "operator": "operator",
    "steps": "steps",
    "sign": "sign",
    "radius": "radius",
    "sites": "sites",
    "lambda": "lam",
    "levels": "levels",
    "horizon": "horizon",
    "initial": "initial",
    "anchors": "anchors",
    "exclusion": "exclusion",
    "sweep": "sweep",
}


def _int(value, key: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{key!r} must be an integer, got {value!r}")
    return value


def _real(value, key: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise ConfigError(f"{key!r} must be a finite real number, got {value!r}")
    return float(value)


def parse_sign(value) -> int:
    if value in ("+", "+1", 1):
        return 1
    if value in ("-", "-1", -1):
        return -1
    raise ConfigError(f"sign must be '+' or '-', got {value!r}")


def parse_sites(text: str) -> tuple[int, int]:
    """``"A..B"`` -> (A, B)."""
    if not isinstance(text, str):
        raise ConfigError(f"sites must be a string 'A..B', got {text!r}")
    m = re.fullmatch(r"\s*([+-]?\d+)\s*\.\.\s*([+-]?\d+)\s*", text)
    if not m:
        raise ConfigError(f"sites must look like 'A..B', got {text!r}")
    lo, hi = int(m.group(1)), int(m.group(2))
    if lo > hi:
        raise ConfigError(f"empty site range {text!r}")
    return lo, hi


def format_sites(sites: tuple[int, int]) -> str:
    return f"{sites[0]}..{sites[1]}"


def parse_anchors(value) -> tuple[tuple[int, int], ...]:
    """Anchors from ``"a,b;a,b;..."`` or a JSON list of pairs."""
    if isinstance(value, str):
        items = [s for s in value.split(";") if s.strip()]
        try:
            pairs = [tuple(int(v) for v in item.split(",")) for item in items]
        except ValueError:
            raise ConfigError(f"anchors must look like 'a,b;a,b', got {value!r}") from None
    elif isinstance(value, list):
        pairs = []
        for item in value:
            if not isinstance(item, list) or any(isinstance(v, bool) or not isinstance(v, int) for v in item):
                raise ConfigError(f"anchors must be integer pairs, got {item!r}")
            pairs.append(tuple(item))
    else:
        raise ConfigError(f"anchors must be a list of pairs, got {value!r}")
    if not pairs or any(len(p) != 2 for p in pairs):
        raise ConfigError("anchors must be a nonempty list of pairs (a, b)")
    return tuple(pairs)


def _complex_literal(text: str) -> complex:
    s = text.strip().replace(" ", "").replace("i", "j")
    if not s:
        raise ConfigError("empty complex literal")
    try:
        return complex(s)
    except ValueError:
        raise ConfigError(f"bad complex literal {text!r} (expected a+bi)") from None


def parse_initial(text: str, n: int) -> dict[tuple[int, ...], np.ndarray]:
    """
    Parse ``"site:(c1,...,c2n)"`` entries separated by ``;``.

    A site is ``x`` in one dimension and ``x1,...,xn`` otherwise; the
    coefficients are complex literals such as ``0.6``, ``-1i`` or ``0.3+0.4i``
    ordered as (j, k) = (1,1), (1,2), (2,1), ...
    """
    entries: dict[tuple[int, ...], np.ndarray] = {}
    for chunk in text.split(";"):
        if not chunk.strip():
            continue
        m = re.fullmatch(r"\s*([^:]+):\s*\(([^)]*)\)\s*", chunk)
        if not m:
            raise ConfigError(f"initial entries look like 'site:(c1,...,c{2 * n})', got {chunk!r}")
        try:
            site = tuple(int(v) for v in m.group(1).split(","))
        except ValueError:
            raise ConfigError(f"bad site {m.group(1)!r}") from None
        if len(site) != n:
            raise ConfigError(f"site {site} has {len(site)} coordinates, expected {n}")
        coeffs = [_complex_literal(c) for c in m.group(2).split(",")]
        if len(coeffs) != 2 * n:
            raise ConfigError(f"site {site} has {len(coeffs)} coefficients, expected {2 * n}")
        if site in entries:
            raise ConfigError(f"site {site} appears twice in the initial state")
        entries[site] = np.array(coeffs, dtype=complex)
    if not entries:
        raise ConfigError("initial state has no entries")
    return entries


def initial_state(cfg: RunConfig) -> WaveFunction:
    n = cfg.params.n
    if cfg.initial is None:
        vec = np.zeros(2 * n, dtype=complex)
        vec[1] = 1.0
        entries = {(0,) * n: vec}
    else:
        entries = parse_initial(cfg.initial, n)
    radius = max(max(abs(v) for v in site) for site in entries)
    window = LatticeWindow.zero_padded(radius, n)
    return WaveFunction.from_sites(window, {s: v.reshape(n, 2) for s, v in entries.items()})


def config_from_dict(raw) -> RunConfig:
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    unknown = sorted(set(raw) - set(_KNOBS) - {"params"})
    if unknown:
        raise ConfigError(f"unknown config key(s): {', '.join(unknown)}")
    if "params" not in raw:
        raise ConfigError("missing config key 'params'")
    praw = raw["params"]
    if not isinstance(praw, dict):
        raise ConfigError("'params' must be an object")
    extra = sorted(set(praw) - {"n", "p", "q", "phi"})
    if extra:
        raise ConfigError(f"unknown params key(s): {', '.join(extra)}")
    params = params_from_dict(praw)

    kw = {}
    for key, attr in _KNOBS.items():
        if key not in raw or raw[key] is None:
            continue
        v = raw[key]
        if key in ("torus", "steps", "levels", "horizon", "radius"):
            kw[attr] = _int(v, key)
        elif key == "operator":
            kw[attr] = v
        elif key == "sign":
            kw[attr] = parse_sign(v)
        elif key == "sites":
            kw[attr] = parse_sites(v)
        elif key in ("lambda", "exclusion"):
            kw[attr] = _real(v, key)
        elif key == "initial":
            if not isinstance(v, str):
                raise ConfigError("'initial' must be a string")
            kw[attr] = v
        elif key == "anchors":
            kw[attr] = parse_anchors(v)
        elif key == "sweep":
            if not isinstance(v, dict) or set(v) != {"p"} or not isinstance(v["p"], list) or not v["p"]:
                raise ConfigError("'sweep' must be an object {\"p\": [values]}")
            kw[attr] = tuple(_real(x, "sweep.p") for x in v["p"])
    cfg = RunConfig(params=params, **kw)
    cfg.check()
    return cfg


def load_config(path: str | Path) -> RunConfig:
    """
    Read and validate a JSON config file.

    Raises
    ------
    ConfigError
        Unreadable file, invalid JSON, unknown keys or bad knob values.
    ParameterError
        Missing or invalid model parameters (the message names the key).
    """
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON in {path}: {exc}") from None
    return config_from_dict(raw)

