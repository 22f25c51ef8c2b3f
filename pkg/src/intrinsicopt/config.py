"""Run configuration: INI-style sections, strict key validation, overrides.

Every run is driven by a flat key-value configuration; unknown keys are
rejected with the offending section/field named.  Defaults reproduce the
headline parameter sets of the numerical study.  Any key can be overridden
on the command line with ``--set section.key=value``.
"""

from __future__ import annotations

import configparser
import io as _io
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError
from .market import MarketParams

_DEFAULTS = {
    "market": {
        "s0": "1.2",
        "mu": "",
        "theta": "0.05",
        "r": "0.01",
        "sigma": "0.5",
        "T": "2.0",
        "p": "0.75",
        "w0": "0.16",
        "alpha": "0.4",
    },
    "call": {
        "K": "0.85",
        "delta_c": "0.02",
        "lambda_min": "0.0",
        "lambda_max": "3.9",
        "lambda_points": "61",
        "cdf_lambdas": "1.0,2.0,3.1,3.8",
        "cdf_points": "201",
    },
    "onetouch": {
        "B": "1.9",
        "K": "1.3",
        "premium": "0.02",
        "w0": "0.1",
        "alpha": "0.1",
        "w0_min": "0.02",
        "w0_max": "1.0",
        "w0_points": "40",
        "K_min": "0.5",
        "K_max": "1.8",
        "K_points": "27",
        "modes": "semi_static,dynamic_only,no_sale",
        "lattice_steps": "400",
    },
    "densities": {
        "level": "",            # discounted level of the line; default K^D
        "measure": "Qbar",
        "u_min": "0.01",
        "u_points": "120",
        "t": "1.0",
        "v_points": "161",
    },
    "run": {
        "seed": "20240601",
        "measure": "Qbar",
        "outdir": "",
    },
}

_FLOAT_KEYS = {
    ("market", k) for k in ("s0", "mu", "theta", "r", "sigma", "T", "p",
                            "w0", "alpha")
} | {
    ("call", k) for k in ("K", "delta_c", "lambda_min", "lambda_max")
} | {
    ("onetouch", k) for k in ("B", "K", "premium", "w0", "alpha", "w0_min",
                              "w0_max", "K_min", "K_max")
} | {
    ("densities", k) for k in ("u_min", "t")
}
_INT_KEYS = {("call", "lambda_points"), ("call", "cdf_points"),
             ("onetouch", "w0_points"), ("onetouch", "K_points"),
             ("onetouch", "lattice_steps"), ("densities", "u_points"),
             ("densities", "v_points"), ("run", "seed")}


@dataclass
class RunConfig:
    """Validated configuration for one CLI run."""

    sections: dict = field(default_factory=dict)

    # ------------------------------------------------------------------ #
    # construction
    # ------------------------------------------------------------------ #

    @classmethod
    def load(cls, path=None, overrides=()) -> "RunConfig":
        parser = configparser.ConfigParser()
        parser.optionxform = str          # keep key case (T vs t)
        parser.read_dict(_DEFAULTS)
        if path is not None:
            try:
                with open(path, "r", encoding="utf-8") as fh:
                    parser.read_file(fh)
            except OSError as exc:
                raise ConfigError(f"cannot read config {path}: {exc}") from exc
            except configparser.Error as exc:
                raise ConfigError(f"malformed config {path}: {exc}") from exc
        cfg = cls(sections={s: dict(parser.items(s))
                            for s in parser.sections()})
        for item in overrides:
            cfg._apply_override(item)
        cfg._validate()
        return cfg

    def _apply_override(self, item: str):
        if "=" not in item or "." not in item.split("=", 1)[0]:
            raise ConfigError(
                f"override {item!r} is not of the form section.key=value")
        target, value = item.split("=", 1)
        section, key = target.split(".", 1)
        section, key = section.strip(), key.strip()
        if section not in self.sections:
            raise ConfigError(f"unknown config section {section!r}")
        self.sections[section][key] = value.strip()

    def _validate(self):
        for section, keys in self.sections.items():
            if section not in _DEFAULTS:
                raise ConfigError(f"unknown config section {section!r}")
            for key in keys:
                if key not in _DEFAULTS[section]:
                    raise ConfigError(
                        f"unknown key {key!r} in section [{section}]")
        mkt = self.sections["market"]
        if "mu" in mkt and "theta" in mkt and mkt.get("mu", "") != "":
            raise ConfigError("give market.mu or market.theta, not both")
        for (section, key) in _FLOAT_KEYS:
            value = self.sections.get(section, {}).get(key)
            if value not in (None, ""):
                try:
                    float(value)
                except ValueError:
                    raise ConfigError(
                        f"[{section}] {key} = {value!r} is not a number") from None
        for (section, key) in _INT_KEYS:
            value = self.sections.get(section, {}).get(key)
            if value not in (None, ""):
                try:
                    int(value)
                except ValueError:
                    raise ConfigError(
                        f"[{section}] {key} = {value!r} is not an integer") from None

    # ------------------------------------------------------------------ #
    # accessors
    # ------------------------------------------------------------------ #

    def get(self, section, key, cast=str):
        value = self.sections[section][key]
        try:
            return cast(value)
        except ValueError:
            raise ConfigError(f"[{section}] {key} = {value!r}") from None

    def market(self, w0_key=("market", "w0"),
               alpha_key=("market", "alpha")) -> MarketParams:
        mkt = self.sections["market"]
        common = dict(s0=float(mkt["s0"]), r=float(mkt["r"]),
                      sigma=float(mkt["sigma"]), T=float(mkt["T"]),
                      p=float(mkt["p"]),
                      w0=self.get(*w0_key, cast=float),
                      alpha=self.get(*alpha_key, cast=float))
        if mkt.get("mu", "") != "":
            return MarketParams(mu=float(mkt["mu"]), **common)
        return MarketParams.from_theta(theta=float(mkt["theta"]), **common)

    def grid(self, section, lo_key, hi_key, n_key) -> np.ndarray:
        lo = self.get(section, lo_key, float)
        hi = self.get(section, hi_key, float)
        n = self.get(section, n_key, int)
        if not (hi > lo and n >= 2):
            raise ConfigError(
                f"[{section}] {lo_key}/{hi_key}/{n_key} do not define a grid")
        return np.linspace(lo, hi, n)

    def float_list(self, section, key) -> list[float]:
        raw = self.sections[section][key]
        try:
            return [float(tok) for tok in raw.split(",") if tok.strip() != ""]
        except ValueError:
            raise ConfigError(f"[{section}] {key} = {raw!r}") from None

    def canonical(self) -> str:
        """Stable textual form used for hashing and the manifest."""
        buf = _io.StringIO()
        for section in sorted(self.sections):
            buf.write(f"[{section}]\n")
            for key in sorted(self.sections[section]):
                buf.write(f"{key} = {self.sections[section][key]}\n")
        return buf.getvalue()
