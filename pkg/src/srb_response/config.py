"""Experiment configuration: a flat INI file with documented defaults.

Every optional key has a default from DEFAULTS; serialization writes all
effective values, so parse -> serialize -> parse is the identity.
"""

from __future__ import annotations

import configparser
import hashlib
import math
import os
from dataclasses import dataclass, field, fields, replace

from .errors import ConfigError
from .observables import CircleLeaf, DiracObservable, SlopedSegment, StableSegment, WindowFunction
from .dynamics import PerturbationFamily
from .torus import TorusPoint, load_field, load_scalar

CURVE_KINDS = ("stable_segment", "sloped_segment", "circle")
ROUTE_NAMES = ("series", "spectral", "oracle")

#: Central table of defaults; README documents the same values.
DEFAULTS = {
    "window.support_fraction": 0.9,
    "window.smooth_factor_file": "",
    "response.routes": "series,spectral",
    "response.tol": 1e-9,
    "response.tol_quad": 1e-10,
    "response.k_max": 200,
    "response.panel_budget": 8192,
    "oracle.t_step": 1e-3,
    "oracle.eps_schedule": "0.02,0.01,0.005",
    "oracle.n_iterates": 1_000_000,
    "oracle.n_seeds": 16,
    "oracle.burn_in": 1000,
    "oracle.mollify_eps": 0.02,
    "oracle.grid_n": 128,
    "oracle.samples_per_cell": 32,
    "oracle.ulam_replicates": 4,
    "run.rng_seed": 123456789,
    "run.out_dir": "out",
}


@dataclass(frozen=True)
class ExperimentConfig:
    kind: str
    center_x: float
    center_y: float
    half_length: float | None
    alpha: float | None
    radius: float | None
    cap_eps: float | None
    support_fraction: float
    smooth_factor_file: str
    field_file: str
    routes: tuple[str, ...]
    tol: float
    tol_quad: float
    k_max: int
    panel_budget: int
    t_step: float
    eps_schedule: tuple[float, ...]
    n_iterates: int
    n_seeds: int
    burn_in: int
    mollify_eps: float
    grid_n: int
    samples_per_cell: int
    ulam_replicates: int
    rng_seed: int
    out_dir: str
    base_dir: str = field(default=".", compare=False)

    def resolve(self, path: str) -> str:
        return path if os.path.isabs(path) else os.path.join(self.base_dir, path)


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def serialize_config(cfg: ExperimentConfig) -> str:
    """Render all effective values as the INI text the parser accepts."""
    lines = ["[curve]", f"kind = {cfg.kind}",
             f"center_x = {_fmt(cfg.center_x)}", f"center_y = {_fmt(cfg.center_y)}"]
    if cfg.kind in ("stable_segment", "sloped_segment"):
        lines.append(f"half_length = {_fmt(cfg.half_length)}")
    if cfg.kind == "sloped_segment":
        lines.append(f"alpha = {_fmt(cfg.alpha)}")
    if cfg.kind == "circle":
        lines.append(f"radius = {_fmt(cfg.radius)}")
        lines.append(f"cap_eps = {_fmt(cfg.cap_eps)}")
    lines += [
        "",
        "[window]",
        f"support_fraction = {_fmt(cfg.support_fraction)}",
        f"smooth_factor_file = {cfg.smooth_factor_file}",
        "",
        "[perturbation]",
        f"field_file = {cfg.field_file}",
        "",
        "[response]",
        f"routes = {','.join(cfg.routes)}",
        f"tol = {_fmt(cfg.tol)}",
        f"tol_quad = {_fmt(cfg.tol_quad)}",
        f"k_max = {cfg.k_max}",
        f"panel_budget = {cfg.panel_budget}",
        "",
        "[oracle]",
        f"t_step = {_fmt(cfg.t_step)}",
        f"eps_schedule = {','.join(repr(e) for e in cfg.eps_schedule)}",
        f"n_iterates = {cfg.n_iterates}",
        f"n_seeds = {cfg.n_seeds}",
        f"burn_in = {cfg.burn_in}",
        f"mollify_eps = {_fmt(cfg.mollify_eps)}",
        f"grid_n = {cfg.grid_n}",
        f"samples_per_cell = {cfg.samples_per_cell}",
        f"ulam_replicates = {cfg.ulam_replicates}",
        "",
        "[run]",
        f"rng_seed = {cfg.rng_seed}",
        f"out_dir = {cfg.out_dir}",
        "",
    ]
    return "\n".join(lines)


def config_hash(cfg: ExperimentConfig) -> str:
    return hashlib.sha256(serialize_config(cfg).encode()).hexdigest()[:16]


class _Reader:
    """Typed access to parsed INI values with default filling and error context."""

    def __init__(self, parser: configparser.ConfigParser):
        self.parser = parser
        self.seen: set[tuple[str, str]] = set()

    def raw(self, section: str, key: str, required: bool = False):
        self.seen.add((section, key))
        if self.parser.has_option(section, key):
            return self.parser.get(section, key).strip()
        if required:
            raise ConfigError(f"missing required key [{section}] {key}")
        default = DEFAULTS.get(f"{section}.{key}")
        if default is None:
            raise ConfigError(f"missing key [{section}] {key}")
        return str(default)

    def floatval(self, section: str, key: str, required: bool = False) -> float:
        text = self.raw(section, key, required)
        try:
            value = float(text)
        except ValueError as exc:
            raise ConfigError(f"[{section}] {key} = {text!r} is not a number") from exc
        if not math.isfinite(value):
            raise ConfigError(f"[{section}] {key} must be finite, got {text!r}")
        return value

    def intval(self, section: str, key: str) -> int:
        text = self.raw(section, key)
        try:
            return int(text)
        except ValueError as exc:
            raise ConfigError(f"[{section}] {key} = {text!r} is not an integer") from exc

    def check_unknown(self) -> None:
        for section in self.parser.sections():
            for key in self.parser.options(section):
                if (section, key) not in self.seen:
                    raise ConfigError(f"unknown key [{section}] {key}")


def parse_config_text(text: str, base_dir: str = ".") -> ExperimentConfig:
    parser = configparser.ConfigParser(inline_comment_prefixes=("#",))
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from exc
    known_sections = {"curve", "window", "perturbation", "response", "oracle", "run"}
    unknown = set(parser.sections()) - known_sections
    if unknown:
        raise ConfigError(f"unknown config sections: {sorted(unknown)}")

    r = _Reader(parser)
    kind = r.raw("curve", "kind", required=True)
    if kind not in CURVE_KINDS:
        raise ConfigError(f"unknown curve kind {kind!r}; expected one of {CURVE_KINDS}")
    center_x = r.floatval("curve", "center_x", required=True)
    center_y = r.floatval("curve", "center_y", required=True)
    half_length = alpha = radius = cap_eps = None
    if kind in ("stable_segment", "sloped_segment"):
        half_length = r.floatval("curve", "half_length", required=True)
        if not 0.0 < half_length < 0.45:
            raise ConfigError("half_length must lie in (0, 0.45)")
    if kind == "sloped_segment":
        alpha = r.floatval("curve", "alpha", required=True)
    if kind == "circle":
        radius = r.floatval("curve", "radius", required=True)
        cap_eps = r.floatval("curve", "cap_eps", required=True)

    support_fraction = r.floatval("window", "support_fraction")
    if not 0.0 < support_fraction < 1.0:
        raise ConfigError("support_fraction must lie in (0, 1)")
    smooth_factor_file = r.raw("window", "smooth_factor_file")
    field_file = r.raw("perturbation", "field_file", required=True)

    routes_text = r.raw("response", "routes")
    routes = tuple(s.strip() for s in routes_text.split(",") if s.strip())
    if not routes or any(route not in ROUTE_NAMES for route in routes):
        raise ConfigError(f"routes must be a comma list from {ROUTE_NAMES}, got {routes_text!r}")
    tol = r.floatval("response", "tol")
    tol_quad = r.floatval("response", "tol_quad")
    if tol <= 0 or tol_quad <= 0:
        raise ConfigError("tolerances must be positive")
    k_max = r.intval("response", "k_max")
    panel_budget = r.intval("response", "panel_budget")
    if k_max < 1 or panel_budget < 8:
        raise ConfigError("k_max must be >= 1 and panel_budget >= 8")

    t_step = r.floatval("oracle", "t_step")
    if t_step <= 0:
        raise ConfigError("t_step must be positive")
    eps_text = r.raw("oracle", "eps_schedule")
    try:
        eps_schedule = tuple(float(s) for s in eps_text.split(",") if s.strip())
    except ValueError as exc:
        raise ConfigError(f"bad eps_schedule {eps_text!r}") from exc
    if len(eps_schedule) < 2 or any(e <= 0 for e in eps_schedule) or any(
        b >= a for a, b in zip(eps_schedule, eps_schedule[1:])
    ):
        raise ConfigError("eps_schedule must be >= 2 strictly decreasing positive values")
    n_iterates = r.intval("oracle", "n_iterates")
    if n_iterates < 10_000:
        raise ConfigError("n_iterates must be at least 10000")
    n_seeds = r.intval("oracle", "n_seeds")
    if n_seeds < 2:
        raise ConfigError("n_seeds must be at least 2")
    burn_in = r.intval("oracle", "burn_in")
    if burn_in < 0:
        raise ConfigError("burn_in must be nonnegative")
    mollify_eps = r.floatval("oracle", "mollify_eps")
    if mollify_eps <= 0:
        raise ConfigError("mollify_eps must be positive")
    grid_n = r.intval("oracle", "grid_n")
    if not 64 <= grid_n <= 1024:
        raise ConfigError("grid_n must lie in [64, 1024]")
    samples_per_cell = r.intval("oracle", "samples_per_cell")
    if samples_per_cell < 1:
        raise ConfigError("samples_per_cell must be positive")
    ulam_replicates = r.intval("oracle", "ulam_replicates")
    if ulam_replicates < 2:
        raise ConfigError("ulam_replicates must be at least 2")

    rng_seed = r.intval("run", "rng_seed")
    if rng_seed < 0:
        raise ConfigError("rng_seed must be nonnegative")
    out_dir = r.raw("run", "out_dir")
    r.check_unknown()

    return ExperimentConfig(
        kind=kind,
        center_x=center_x,
        center_y=center_y,
        half_length=half_length,
        alpha=alpha,
        radius=radius,
        cap_eps=cap_eps,
        support_fraction=support_fraction,
        smooth_factor_file=smooth_factor_file,
        field_file=field_file,
        routes=routes,
        tol=tol,
        tol_quad=tol_quad,
        k_max=k_max,
        panel_budget=panel_budget,
        t_step=t_step,
        eps_schedule=eps_schedule,
        n_iterates=n_iterates,
        n_seeds=n_seeds,
        burn_in=burn_in,
        mollify_eps=mollify_eps,
        grid_n=grid_n,
        samples_per_cell=samples_per_cell,
        ulam_replicates=ulam_replicates,
        rng_seed=rng_seed,
        out_dir=out_dir,
        base_dir=base_dir,
    )


def parse_config(path: str) -> ExperimentConfig:
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config_text(text, base_dir=os.path.dirname(os.path.abspath(path)))


def apply_overrides(cfg: ExperimentConfig, *, seed=None, out=None, routes=None, tol=None) -> ExperimentConfig:
    updates = {}
    if seed is not None:
        if seed < 0:
            raise ConfigError("rng_seed must be nonnegative")
        updates["rng_seed"] = int(seed)
    if out is not None:
        updates["out_dir"] = str(out)
    if routes is not None:
        parsed = tuple(s.strip() for s in routes.split(",") if s.strip())
        if not parsed or any(route not in ROUTE_NAMES for route in parsed):
            raise ConfigError(f"routes must be a comma list from {ROUTE_NAMES}")
        updates["routes"] = parsed
    if tol is not None:
        if tol <= 0:
            raise ConfigError("tol must be positive")
        updates["tol"] = float(tol)
    return replace(cfg, **updates) if updates else cfg


def build_curve(cfg: ExperimentConfig):
    center = TorusPoint(cfg.center_x, cfg.center_y)
    if cfg.kind == "stable_segment":
        return StableSegment(center, cfg.half_length)
    if cfg.kind == "sloped_segment":
        return SlopedSegment(center, cfg.alpha, cfg.half_length)
    return CircleLeaf(center, cfg.radius, cfg.cap_eps)


def build_window(cfg: ExperimentConfig) -> WindowFunction:
    smooth = None
    if cfg.smooth_factor_file:
        smooth = load_scalar(cfg.resolve(cfg.smooth_factor_file))
    return WindowFunction(smooth_factor=smooth, support_fraction=cfg.support_fraction)


def build_observable(cfg: ExperimentConfig) -> DiracObservable:
    return DiracObservable(build_curve(cfg), build_window(cfg))


def build_family(cfg: ExperimentConfig) -> PerturbationFamily:
    return PerturbationFamily.from_field(load_field(cfg.resolve(cfg.field_file)))
