"""Experiment configuration: an INI file with one ``[experiment]`` section.

Example::

    [experiment]
    kind = entropy
    system = full_shift 2 8
    n_max = 8
    mode = exact
    seed = 0
    out = runs/fs8

Unknown keys are rejected.  Command-line flags override file values.
"""

import configparser
import dataclasses
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .errors import ConfigError

KINDS = ("validate", "entropy", "cover", "shadow", "expansivity", "entpoints")
ALIASES = {"shadow-certificate": "shadow", "entropy-points": "entpoints"}
MODES = ("exact", "greedy", "auto")


@dataclass(frozen=True)
class ExperimentConfig:
    kind: str
    system: Optional[str] = None          # zoo spec, e.g. "full_shift 2 8"
    system_file: Optional[str] = None     # path to a serialized system
    grid: Optional[tuple] = None          # scales as Fractions, largest first
    max_scales: int = 16
    n_max: Optional[int] = None
    mode: str = "exact"
    seed: int = 0
    threshold: float = 0.05
    budget: int = 10 ** 7
    word_length: int = 3
    scale: Optional[str] = None           # "E0" or "eps=<p/q>" for single-scale runs
    membership: str = "every"
    out: str = "out"

    def __post_init__(self):
        kind = ALIASES.get(self.kind, self.kind)
        object.__setattr__(self, "kind", kind)
        if kind not in KINDS:
            raise ConfigError(f"unknown kind {self.kind!r}; expected one of {KINDS}")
        if (self.system is None) == (self.system_file is None):
            raise ConfigError("give exactly one of system or system_file")
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}")
        if self.n_max is not None and not 1 <= self.n_max <= 64:
            raise ConfigError("n_max must lie in [1, 64]")
        if self.seed < 0:
            raise ConfigError("seed must be nonnegative")
        if self.threshold < 0:
            raise ConfigError("threshold must be nonnegative")
        if self.budget < 1 or self.max_scales < 2 or self.word_length < 1:
            raise ConfigError("budget, max_scales and word_length must be positive "
                              "(max_scales >= 2)")
        if self.membership not in ("every", "some"):
            raise ConfigError("membership must be 'every' or 'some'")
        if self.grid is not None:
            grid = tuple(Fraction(g) for g in self.grid)
            if any(g <= 0 for g in grid) or any(a <= b for a, b in zip(grid, grid[1:])):
                raise ConfigError("grid must be positive and strictly decreasing")
            object.__setattr__(self, "grid", grid)

    def with_overrides(self, **kw):
        kw = {k: v for k, v in kw.items() if v is not None}
        unknown = set(kw) - {f.name for f in dataclasses.fields(self)}
        if unknown:
            raise ConfigError(f"unknown override(s): {sorted(unknown)}")
        return dataclasses.replace(self, **kw)

    def as_dict(self):
        d = dataclasses.asdict(self)
        if self.grid is not None:
            d["grid"] = [str(g) for g in self.grid]
        return d


_INT = {"max_scales", "n_max", "seed", "budget", "word_length"}
_FLOAT = {"threshold"}


def _convert(key, raw):
    try:
        if key in _INT:
            return int(raw)
        if key in _FLOAT:
            return float(raw)
        if key == "grid":
            return tuple(Fraction(t) for t in raw.replace(",", " ").split())
    except ValueError as exc:
        raise ConfigError(f"bad value for {key}: {raw!r}") from exc
    return raw


def parse_config(text, **overrides):
    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(str(exc)) from exc
    extra = [s for s in parser.sections() if s != "experiment"]
    if extra:
        raise ConfigError(f"unknown section(s): {extra}")
    raw = dict(parser["experiment"]) if parser.has_section("experiment") else {}
    known = {f.name for f in dataclasses.fields(ExperimentConfig)}
    unknown = set(raw) - known
    if unknown:
        raise ConfigError(f"unknown key(s): {sorted(unknown)}")
    values = {k: _convert(k, v) for k, v in raw.items()}
    values.update({k: v for k, v in overrides.items() if v is not None})
    if "kind" not in values:
        raise ConfigError("config needs a kind")
    unknown = set(values) - known
    if unknown:
        raise ConfigError(f"unknown key(s): {sorted(unknown)}")
    return ExperimentConfig(**values)


def load_config(path, **overrides):
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text, **overrides)
