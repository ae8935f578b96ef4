"""Sectioned key/value run configuration (INI syntax).

Sections are ``scenario``, ``noise``, ``solver`` and ``output``.  Every key is
optional; an empty document yields the reference parameter set.
"""
from __future__ import annotations

import configparser
import math
from dataclasses import asdict, dataclass, field, fields

from .errors import ConfigError
from .estimator import EW_HYBRID, METHODS, OW_HYBRID
from .harness import IMPORTANCE, UNIFORM, Scenario, make_scenario
from .optimizer import IsConfig

EXPERIMENTS = ("compare", "sweep-samples", "sweep-bs")


@dataclass
class ScenarioSection:
    experiment: str = "compare"
    bias_mode: str = "unbiased"
    hex_circumradius: float = 50.0
    bs_height: float = 10.0
    target_height: float = 1.0
    bs_azimuths_deg: list = field(default_factory=lambda: [90.0, 210.0, 330.0])
    bias_lo: float = 0.0
    bias_hi: float = 5.0
    bias_fixed: bool = False
    num_trials: int = 1000
    master_seed: int = 0
    error_dims: int = 2
    methods: list = field(default_factory=lambda: [OW_HYBRID, EW_HYBRID])
    sample_counts: list = field(default_factory=lambda: [50, 100, 200, 500, 1000])
    samplers: list = field(default_factory=lambda: [IMPORTANCE, UNIFORM])
    subsets: list = field(default_factory=lambda: [[1, 2], [1, 3], [2, 3], [1, 2, 3]])


@dataclass
class NoiseSection:
    sigma_d: float = 1.0
    sigma_az_deg: float = 3.2
    sigma_el_deg: float = 3.2
    kappa: float = 10.0
    aoa_normalizer: str = "circular"


@dataclass
class SolverSection:
    num_samples: int = 1000
    grid_nx: int = 1000
    grid_ny: int = 1000
    epsilon: float = 1e-4
    max_iters: int = 100
    damping: float = 1.0
    hessian_ridge: float = 0.0
    step: str = "tangent"


@dataclass
class OutputSection:
    out_dir: str = "results"
    format: str = "both"
    threads: int = 1


@dataclass
class RunConfig:
    scenario: ScenarioSection = field(default_factory=ScenarioSection)
    noise: NoiseSection = field(default_factory=NoiseSection)
    solver: SolverSection = field(default_factory=SolverSection)
    output: OutputSection = field(default_factory=OutputSection)

    def is_config(self) -> IsConfig:
        return IsConfig(**asdict(self.solver))

    def build_scenario(self) -> Scenario:
        s, n = self.scenario, self.noise
        return make_scenario(
            s.bias_mode,
            hex_circumradius=s.hex_circumradius,
            bs_height=s.bs_height,
            target_height=s.target_height,
            bs_azimuths_deg=s.bs_azimuths_deg,
            sigma_d=n.sigma_d,
            sigma_az_deg=n.sigma_az_deg,
            sigma_el_deg=n.sigma_el_deg,
            kappa=n.kappa,
            bias_lo=s.bias_lo,
            bias_hi=s.bias_hi,
            num_trials=s.num_trials,
            master_seed=s.master_seed,
            bias_fixed=s.bias_fixed,
            error_dims=s.error_dims,
            aoa_normalizer=n.aoa_normalizer,
        )


SECTIONS = {"scenario": ScenarioSection, "noise": NoiseSection, "solver": SolverSection, "output": OutputSection}

_LIST_OF_FLOAT = {"bs_azimuths_deg"}
_LIST_OF_INT = {"sample_counts"}
_LIST_OF_STR = {"methods", "samplers"}


def _positive(v):
    return v > 0 and math.isfinite(v)


# (section, key) -> (predicate, description of the bound)
_BOUNDS = {
    ("scenario", "experiment"): (lambda v: v in EXPERIMENTS, "one of " + ", ".join(EXPERIMENTS)),
    ("scenario", "bias_mode"): (lambda v: v in ("unbiased", "biased"), "'unbiased' or 'biased'"),
    ("scenario", "hex_circumradius"): (_positive, "> 0"),
    ("scenario", "bs_height"): (lambda v: v >= 0, ">= 0"),
    ("scenario", "target_height"): (lambda v: v >= 0, ">= 0"),
    ("scenario", "bs_azimuths_deg"): (lambda v: len(v) >= 1, "at least one station"),
    ("scenario", "bias_lo"): (lambda v: v >= 0, ">= 0"),
    ("scenario", "num_trials"): (lambda v: v >= 1, ">= 1"),
    ("scenario", "master_seed"): (lambda v: 0 <= v < 2**64, "a 64-bit unsigned integer"),
    ("scenario", "error_dims"): (lambda v: v in (2, 3), "2 or 3"),
    ("scenario", "methods"): (lambda v: len(v) > 0 and all(m in METHODS for m in v), "a subset of " + ", ".join(METHODS)),
    ("scenario", "sample_counts"): (lambda v: len(v) > 0 and all(c >= 1 for c in v) and v == sorted(v), "ascending positive counts"),
    ("scenario", "samplers"): (lambda v: len(v) > 0 and all(s in (IMPORTANCE, UNIFORM) for s in v), "importance and/or uniform"),
    ("scenario", "subsets"): (lambda v: len(v) > 0 and all(len(s) > 0 for s in v), "non-empty station id sets"),
    ("noise", "sigma_d"): (_positive, "> 0"),
    ("noise", "sigma_az_deg"): (_positive, "> 0"),
    ("noise", "sigma_el_deg"): (_positive, "> 0"),
    ("noise", "kappa"): (_positive, "> 0"),
    ("noise", "aoa_normalizer"): (lambda v: v in ("circular", "sphere"), "'circular' or 'sphere'"),
    ("solver", "num_samples"): (lambda v: v >= 1, ">= 1"),
    ("solver", "grid_nx"): (lambda v: v >= 2, ">= 2"),
    ("solver", "grid_ny"): (lambda v: v >= 2, ">= 2"),
    ("solver", "epsilon"): (_positive, "> 0"),
    ("solver", "max_iters"): (lambda v: v >= 1, ">= 1"),
    ("solver", "damping"): (lambda v: 0 < v <= 1, "in (0, 1]"),
    ("solver", "hessian_ridge"): (lambda v: v >= 0 and math.isfinite(v), ">= 0"),
    ("solver", "step"): (lambda v: v in ("tangent", "relaxed"), "'tangent' or 'relaxed'"),
    ("output", "format"): (lambda v: v in ("csv", "json", "both"), "csv, json or both"),
    ("output", "threads"): (lambda v: v >= 1, ">= 1"),
}


def _key_lines(text: str) -> dict:
    lines = {}
    section = None
    for no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip()
        elif line and line[0] not in "#;" and section is not None:
            for sep in ("=", ":"):
                if sep in line:
                    lines.setdefault((section, line.split(sep, 1)[0].strip().lower()), no)
                    break
    return lines


def _convert(key: str, default, raw: str):
    raw = raw.strip()
    if key == "subsets":
        groups = [g.strip() for g in raw.split(";") if g.strip()]
        return [[int(x) for x in g.split(",") if x.strip()] for g in groups]
    if key in _LIST_OF_FLOAT:
        return [float(x) for x in raw.split(",") if x.strip()]
    if key in _LIST_OF_INT:
        return [int(x) for x in raw.split(",") if x.strip()]
    if key in _LIST_OF_STR:
        return [x.strip() for x in raw.split(",") if x.strip()]
    if isinstance(default, bool):
        low = raw.lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"expected a boolean, got {raw!r}")
    if isinstance(default, int):
        return int(raw)
    if isinstance(default, float):
        return float(raw)
    return raw


def validate(cfg: RunConfig, lines: dict | None = None) -> RunConfig:
    lines = lines or {}
    for (section, key), (ok, bound) in _BOUNDS.items():
        value = getattr(getattr(cfg, section), key)
        if not ok(value):
            raise ConfigError(
                f"{section}.{key} = {value!r} violates bound: must be {bound}",
                field=key, lineno=lines.get((section, key)),
            )
    s = cfg.scenario
    if not s.bias_hi > s.bias_lo:
        raise ConfigError("scenario.bias_hi must exceed bias_lo", field="bias_hi", lineno=lines.get(("scenario", "bias_hi")))
    k = len(s.bs_azimuths_deg)
    if cfg.solver.num_samples < 2 * k:
        raise ConfigError(f"solver.num_samples must be >= 2K = {2 * k}", field="num_samples", lineno=lines.get(("solver", "num_samples")))
    for sub in s.subsets:
        if any(not 1 <= i <= k for i in sub):
            raise ConfigError(f"scenario.subsets references unknown station in {sub}", field="subsets", lineno=lines.get(("scenario", "subsets")))
    return cfg


def parse_config(text: str) -> RunConfig:
    """Parse and validate a configuration document."""
    parser = configparser.ConfigParser(interpolation=None, strict=True)
    try:
        parser.read_string(text)
    except configparser.MissingSectionHeaderError as exc:
        raise ConfigError(f"line {exc.lineno}: key outside of any section", lineno=exc.lineno) from exc
    except configparser.DuplicateOptionError as exc:
        raise ConfigError(f"line {exc.lineno}: duplicate key {exc.option!r}", field=exc.option, lineno=exc.lineno) from exc
    except configparser.DuplicateSectionError as exc:
        raise ConfigError(f"line {exc.lineno}: duplicate section {exc.section!r}", lineno=exc.lineno) from exc
    except configparser.ParsingError as exc:
        lineno = exc.errors[0][0] if exc.errors else None
        raise ConfigError(f"line {lineno}: cannot parse {exc.errors[0][1] if exc.errors else ''}", lineno=lineno) from exc

    lines = _key_lines(text)
    cfg = RunConfig()
    for section in parser.sections():
        if section not in SECTIONS:
            raise ConfigError(f"unknown section [{section}]", field=section)
        target = getattr(cfg, section)
        known = {f.name for f in fields(target)}
        for key, raw in parser.items(section):
            lineno = lines.get((section, key))
            if key not in known:
                raise ConfigError(f"line {lineno}: unknown key {key!r} in [{section}]", field=key, lineno=lineno)
            try:
                setattr(target, key, _convert(key, getattr(target, key), raw))
            except ValueError as exc:
                raise ConfigError(f"line {lineno}: bad value for {key!r}: {exc}", field=key, lineno=lineno) from exc
    return validate(cfg, lines)


def _format_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, list):
        if value and isinstance(value[0], list):
            return "; ".join(",".join(str(i) for i in g) for g in value)
        return ", ".join(_format_value(v) for v in value)
    return str(value)


def serialize_config(cfg: RunConfig) -> str:
    out = []
    for name in SECTIONS:
        out.append(f"[{name}]")
        for f in fields(getattr(cfg, name)):
            out.append(f"{f.name} = {_format_value(getattr(getattr(cfg, name), f.name))}")
        out.append("")
    return "\n".join(out)
