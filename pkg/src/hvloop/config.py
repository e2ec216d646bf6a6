"""Run configuration: JSON file values overridden by command-line flags."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from .algebra import BracketConvention, EmptyWindowError, Window
from .exact import GaussianRational, format_rational, parse_scalar, validate_epsilon

__all__ = ["Config", "ConfigError", "load_config", "DEFAULTS"]


class ConfigError(ValueError):
    pass


C_SIGNS = ("plus", "minus", "auto")
NORM_SIGNS = ("printed", "corrected", "auto")

DEFAULTS = {
    "degree_bound": "3",
    "generators": ["1"],
    "loop_min": -2,
    "loop_max": 2,
    "epsilon": "2/3",
    "m": "1",
    "c_sign": "auto",
    "normalization_sign": "auto",
    "convention": "paper",
    "seed": 0,
    "triple_budget": None,
}


def _rational(text, what: str) -> Fraction:
    try:
        v = parse_scalar(str(text))
    except ValueError as exc:
        raise ConfigError(f"{what}: {exc}") from None
    if v.im:
        raise ConfigError(f"{what} must be rational, got {v}")
    return v.re


def _scalar(text, what: str) -> GaussianRational:
    try:
        return parse_scalar(str(text))
    except ValueError as exc:
        raise ConfigError(f"{what}: {exc}") from None


def _int(value, what: str) -> int:
    if isinstance(value, bool):
        raise ConfigError(f"{what} must be an integer")
    try:
        return int(str(value), 10)
    except ValueError:
        raise ConfigError(f"{what} must be an integer, got {value!r}") from None


@dataclass(frozen=True)
class Config:
    degree_bound: Fraction = Fraction(3)
    generators: tuple[Fraction, ...] = (Fraction(1),)
    loop_min: int = -2
    loop_max: int = 2
    epsilon: GaussianRational = field(default_factory=lambda: parse_scalar("2/3"))
    m: GaussianRational = field(default_factory=lambda: parse_scalar("1"))
    c_sign: str = "auto"
    normalization_sign: str = "auto"
    convention: BracketConvention = BracketConvention.PAPER
    seed: int = 0
    triple_budget: int | None = None

    @classmethod
    def from_dict(cls, raw: dict) -> "Config":
        unknown = set(raw) - set(DEFAULTS)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
        d = {**DEFAULTS, **raw}
        gens = d["generators"]
        if isinstance(gens, str):
            gens = [g for g in gens.split(",") if g.strip()]
        if not gens:
            raise ConfigError("generators must be nonempty")
        eps = _scalar(d["epsilon"], "epsilon")
        verdict = validate_epsilon(eps)
        if not verdict:
            raise ConfigError(f"invalid epsilon {eps}: {verdict.reason}")
        if d["c_sign"] not in C_SIGNS:
            raise ConfigError(f"c_sign must be one of {C_SIGNS}")
        if d["normalization_sign"] not in NORM_SIGNS:
            raise ConfigError(f"normalization_sign must be one of {NORM_SIGNS}")
        try:
            conv = BracketConvention.parse(d["convention"])
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        budget = d["triple_budget"]
        if budget is not None:
            budget = _int(budget, "triple_budget")
            if budget < 0:
                raise ConfigError("triple_budget must be non-negative")
        return cls(
            degree_bound=_rational(d["degree_bound"], "degree_bound"),
            generators=tuple(_rational(g, "generator") for g in gens),
            loop_min=_int(d["loop_min"], "loop_min"),
            loop_max=_int(d["loop_max"], "loop_max"),
            epsilon=eps,
            m=_scalar(d["m"], "m"),
            c_sign=d["c_sign"],
            normalization_sign=d["normalization_sign"],
            convention=conv,
            seed=_int(d["seed"], "seed"),
            triple_budget=budget,
        )

    def to_dict(self) -> dict:
        return {
            "degree_bound": format_rational(self.degree_bound),
            "generators": [format_rational(g) for g in self.generators],
            "loop_min": self.loop_min,
            "loop_max": self.loop_max,
            "epsilon": str(self.epsilon),
            "m": str(self.m),
            "c_sign": self.c_sign,
            "normalization_sign": self.normalization_sign,
            "convention": self.convention.value,
            "seed": self.seed,
            "triple_budget": self.triple_budget,
        }

    def window(self) -> Window:
        w = Window(self.degree_bound, self.loop_min, self.loop_max, self.generators)
        if w.is_empty():
            raise EmptyWindowError("window too small: no basis vectors")
        return w


def load_config(path: str | Path | None = None, overrides: dict | None = None) -> Config:
    """Defaults, then the JSON file at ``path``, then ``overrides`` (None values skipped)."""
    raw: dict = {}
    if path is not None:
        try:
            raw = json.loads(Path(path).read_text())
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"unparsable config {path}: {exc}") from None
        if not isinstance(raw, dict):
            raise ConfigError("config file must hold a JSON object")
    for k, v in (overrides or {}).items():
        if v is not None:
            raw[k] = v
    return Config.from_dict(raw)
