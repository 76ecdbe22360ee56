"""Scenario configuration: INI-style key=value sections and shipped presets."""

import configparser
import hashlib
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from .bounds import BOUND_IDS, BoundRequest
from .scattering import (Brick, DelayFlat, DopplerFlat, GridParams, PowerSpec, Profile,
                         Separable, design_grid, make_scattering, read_tabulated)

PRESET_SHA256 = {
    "ieee80211a-like": "2da6844ee0ac752df4aeb012cb355444fb3d193de57a8e2294b469de936d57df",
    "uwb-like": "a737d662c0a7267366fe5425a0b603007a8f1676628341aa5bc44a9ba8e6ca15",
    "fig1": "15996df115ea70c1ec6e6ac411e3c0885bfae3aadf9f0d8745468e6376b65f14",
}

KNOWN_KEYS = {
    "scenario": {"name", "shape", "nu_max", "tau_max", "doppler_profile", "delay_profile",
                 "table_file"},
    "grid": {"t", "f", "tf_product"},
    "power": {"p", "kappa"},
    "sweep": {"b_min", "b_max", "points", "log", "bounds"},
    "sim": {"k", "f_slots", "count", "seed"},
}

DEFAULTS = {
    "scenario": {"name": "custom", "shape": "brick"},
    "grid": {},
    "power": {"kappa": "1"},
    "sweep": {"points": "60", "log": "true", "bounds": ",".join(BOUND_IDS)},
    "sim": {"k": "8", "f_slots": "8", "count": "1000", "seed": "0"},
}


class ConfigError(ValueError):
    pass


def preset_text(name):
    if name not in PRESET_SHA256:
        raise ConfigError(f"unknown preset {name!r}; choose from {sorted(PRESET_SHA256)}")
    data = resources.files("wssuscap.presets").joinpath(f"{name}.ini").read_bytes()
    digest = hashlib.sha256(data).hexdigest()
    if digest != PRESET_SHA256[name]:
        raise ConfigError(f"preset {name!r} failed its checksum ({digest})")
    return data.decode()


def verify_presets():
    for name in PRESET_SHA256:
        preset_text(name)


def _profile(name):
    kinds = {"flat": Profile.flat, "triangular": Profile.triangular}
    if name not in kinds:
        raise ConfigError(f"unknown profile {name!r}; choose flat or triangular")
    return kinds[name]()


@dataclass
class Scenario:
    values: dict = field(default_factory=dict)

    @classmethod
    def load(cls, preset=None, path=None, overrides=()):
        cp = configparser.ConfigParser(interpolation=None)
        cp.optionxform = str.lower
        cp.read_dict(DEFAULTS)
        try:
            if preset:
                cp.read_string(preset_text(preset), source=preset)
            if path:
                with open(path) as fh:
                    cp.read_file(fh)
        except configparser.Error as exc:
            raise ConfigError(str(exc)) from None
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from None
        for item in overrides:
            if "=" not in item or "." not in item.split("=", 1)[0]:
                raise ConfigError(f"override {item!r} must look like section.key=value")
            key, val = item.split("=", 1)
            sec, k = key.strip().lower().split(".", 1)
            if not cp.has_section(sec):
                cp.add_section(sec)
            cp.set(sec, k, val.strip())
        values = {}
        for sec in cp.sections():
            if sec not in KNOWN_KEYS:
                raise ConfigError(f"unknown section [{sec}]")
            for k, v in cp.items(sec):
                if k not in KNOWN_KEYS[sec]:
                    raise ConfigError(f"unknown key {sec}.{k}")
                values[f"{sec}.{k}"] = v
        return cls(values)

    def get(self, key, default=None, cast=str):
        raw = self.values.get(key, default)
        if raw is None:
            raise ConfigError(f"missing required key {key}")
        try:
            if cast is bool:
                return str(raw).strip().lower() in ("1", "true", "yes", "on")
            return cast(raw)
        except ValueError:
            raise ConfigError(f"bad value for {key}: {raw!r}") from None

    def set(self, key, value):
        if value is not None:
            self.values[key] = str(value)

    # -- resolution
    def scattering(self):
        shape = self.get("scenario.shape")
        if shape == "tabulated":
            return read_tabulated(self.get("scenario.table_file"))
        nu, tau = self.get("scenario.nu_max", cast=float), self.get("scenario.tau_max", cast=float)
        dop = _profile(self.get("scenario.doppler_profile", "flat"))
        dly = _profile(self.get("scenario.delay_profile", "flat"))
        shapes = {"brick": lambda: Brick(), "doppler_flat": lambda: DopplerFlat(dly),
                  "delay_flat": lambda: DelayFlat(dop), "separable": lambda: Separable(dop, dly)}
        if shape not in shapes:
            raise ConfigError(f"unknown shape {shape!r}")
        return make_scattering(shapes[shape](), nu, tau)

    def grid(self, sf):
        if "grid.t" in self.values or "grid.f" in self.values:
            return GridParams(self.get("grid.t", cast=float), self.get("grid.f", cast=float))
        return design_grid(sf.nu_max, sf.tau_max, self.get("grid.tf_product", "1.25", float))

    def power(self):
        return PowerSpec(self.get("power.p", cast=float), self.get("power.kappa", cast=float))

    def bandwidths(self):
        lo, hi = self.get("sweep.b_min", cast=float), self.get("sweep.b_max", cast=float)
        n = self.get("sweep.points", cast=int)
        if n < 1 or not 0 < lo <= hi:
            raise ConfigError("sweep needs 0 < b_min <= b_max and points >= 1")
        if n == 1:
            return np.array([lo])
        if self.get("sweep.log", cast=bool):
            return np.logspace(np.log10(lo), np.log10(hi), n)
        return np.linspace(lo, hi, n)

    def which(self):
        ids = [s.strip() for s in self.get("sweep.bounds").split(",") if s.strip()]
        bad = set(ids) - set(BOUND_IDS)
        if bad:
            raise ConfigError(f"unknown bounds {sorted(bad)}")
        return frozenset(ids)

    def request(self):
        sf = self.scattering()
        grid = self.grid(sf)
        return BoundRequest(sf, grid, self.power(), tuple(self.bandwidths()), self.which())

    def header_lines(self):
        return [f"{k} = {self.values[k]}" for k in sorted(self.values)]
