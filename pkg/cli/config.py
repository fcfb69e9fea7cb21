"""Run configuration: flat key=value documents with unit-suffixed keys.

External values carry the units named in the key (frequencies as nu = omega / 2pi
in MHz); ``RunConfig.si`` converts once to the internal angular/SI representation.
Precedence: built-in defaults, then a YAML profile, then key=value text.
"""
import logging
import math
import os
from dataclasses import dataclass

import yaml

from ion_cavity.model import MHZ, SystemParams
from optics.cavity import CavityGeometry, DipoleMoment
from spatial.mode import ModeFunction
from spatial.standing_wave import (ContrastDefinition, DisplacementCoupling, LocalizationModel,
                                   WavevectorChoice)

log = logging.getLogger(__name__)

PROFILES_DIR = "config/profiles"


class ConfigError(Exception):
    def __init__(self, message, line=None, source=None):
        where = ""
        if source and line:
            where = f"{source}:{line}: "
        elif line:
            where = f"line {line}: "
        elif source:
            where = f"{source}: "
        super().__init__(f"{where}{message}")
        self.line = line
        self.source = source


@dataclass(frozen=True)
class Key:
    name: str
    kind: type
    default: object
    scale: float = 1.0
    low: float = None
    high: float = None
    open_low: bool = False
    open_high: bool = False
    choices: tuple = ()
    optional: bool = False

    def check(self, value):
        """Range message for an out-of-range value, None when acceptable."""
        if value is None or self.kind is str:
            return None
        if math.isnan(value):
            return "value is NaN"
        if self.low is not None and (value < self.low or (self.open_low and value == self.low)):
            return f"must be {'>' if self.open_low else '>='} {self.low:g}"
        if self.high is not None and (value > self.high or (self.open_high and value == self.high)):
            return f"must be {'<' if self.open_high else '<='} {self.high:g}"
        return None


_UM, _NM, _US, _NS = 1e-6, 1e-9, 1e-6, 1e-9

_KEY_LIST = [
    # ion-cavity model
    Key("omega_297_mhz", float, 1.13, MHZ, low=0.0),
    Key("g_mhz", float, 3.4, MHZ, low=0.0),
    Key("kappa_mhz", float, 320.0, MHZ, low=0.0),
    Key("gamma_mhz", float, 2.0, MHZ, low=0.0),
    Key("beta", float, 0.982, low=0.0, high=1.0, open_low=True, open_high=True),
    Key("delta_laser_mhz", float, 0.0, MHZ),
    Key("delta_cavity_mhz", float, 0.0, MHZ),
    # 0 means: calibrate against repump_tau_ns
    Key("omega_935_mhz", float, 0.0, MHZ, low=0.0),
    Key("n_max", int, 1, low=0, high=20),
    # cavity optics
    Key("cavity_length_um", float, 230.0, _UM, low=0.0, open_low=True),
    Key("wavelength_nm", float, 935.0, _NM, low=0.0, open_low=True),
    Key("finesse", float, 1000.0, low=0.0, open_low=True),
    Key("roc1_um", float, 350.0, _UM, low=0.0, open_low=True),
    Key("roc2_um", float, 350.0, _UM, low=0.0, open_low=True),
    Key("waist_um", float, 7.0, _UM, low=0.0, open_low=True),
    Key("dipole_cm", float, 3.42e-30, low=0.0, open_low=True),
    # spatial coupling
    Key("waist_y_um", float, 7.6, _UM, low=0.0, open_low=True),
    Key("waist_z_um", float, 6.6, _UM, low=0.0, open_low=True),
    Key("g_peak_mhz", float, 6.0, MHZ, low=0.0, open_low=True),
    Key("eta", float, 0.339, low=0.0, high=1.0, open_high=True),
    Key("contrast", float, 0.4, low=0.0, high=1.0, open_low=True, open_high=True),
    Key("temperature_mk", float, 0.5, 1e-3, low=0.0, open_low=True),
    Key("trap_freq_mhz", float, 1.3, MHZ, low=0.0, open_low=True),
    Key("ion_mass_u", float, 171.0, low=0.0, open_low=True),
    Key("peak_rate_per_us", float, 2.0, 1e6, low=0.0, open_low=True),
    Key("scan_half_width_um", float, 15.0, _UM, low=0.0, open_low=True),
    Key("scan_points", int, 31, low=3, high=401),
    Key("standing_wave_span_um", float, 5.0, _UM, low=0.0, open_low=True),
    Key("standing_wave_points", int, 201, low=8, high=100000),
    Key("contrast_definition", str, ContrastDefinition.PEAK_TO_PEAK_OVER_SUM.value,
        choices=tuple(c.value for c in ContrastDefinition)),
    Key("wavevector_choice", str, WavevectorChoice.OPTICAL_K.value,
        choices=tuple(c.value for c in WavevectorChoice)),
    # estimation
    Key("tau_off_us", float, 34.0, _US, low=0.0, open_low=True),
    Key("tau_on_us", float, 17.2, _US, low=0.0, open_low=True),
    Key("tau_off_err_us", float, 1.0, _US, low=0.0),
    Key("tau_on_err_us", float, 0.5, _US, low=0.0),
    Key("repump_tau_ns", float, 500.0, _NS, low=0.0, open_low=True),
    Key("t_max_us", float, 100.0, _US, low=0.0, open_low=True),
    Key("n_times", int, 41, low=3, high=100000),
    Key("fit_kind", str, "decaying", choices=("decaying", "saturating")),
    # synthetic data
    Key("noise_seed", int, 0, low=0, optional=True),
    Key("noise_relative", float, 0.15, low=0.0, high=1.0),
    Key("shot_repetitions", int, 0, low=0),
]

KEYS = {k.name: k for k in _KEY_LIST}


class RunConfig:
    def __init__(self, values=None):
        self._values = {k.name: k.default for k in _KEY_LIST}
        for name, value in (values or {}).items():
            if name not in KEYS:
                raise ConfigError(f"unknown key '{name}'")
            self._values[name] = value

    def __getitem__(self, name):
        return self._values[name]

    def si(self, name):
        """Internal (rad/s, m, s, K) value of a unit-suffixed key."""
        value = self._values[name]
        return value if value is None or KEYS[name].kind is str else value * KEYS[name].scale

    def replace(self, **changes):
        values = dict(self._values)
        for name, value in changes.items():
            values[name] = _coerce(KEYS.get(name) or _unknown(name), value)
        return RunConfig(values)

    def as_dict(self):
        return dict(self._values)

    def __eq__(self, other):
        return isinstance(other, RunConfig) and self._values == other._values

    def __repr__(self):
        changed = {k: v for k, v in self._values.items() if v != KEYS[k].default}
        return f"RunConfig({changed})"


def _unknown(name, line=None, source=None):
    raise ConfigError(f"unknown key '{name}'", line, source)


def _parse_value(key: Key, raw: str):
    raw = raw.strip()
    if key.optional and raw.lower() in ("", "none"):
        return None
    if key.kind is str:
        return raw
    if key.kind is int:
        return int(raw)
    return float(raw)


def _coerce(key: Key, value, line=None, source=None):
    try:
        if isinstance(value, str):
            value = _parse_value(key, value)
        elif value is None:
            if not key.optional:
                raise ValueError("a value is required")
        elif isinstance(value, bool):
            raise ValueError("booleans are not accepted")
        elif key.kind is int:
            if int(value) != value:
                raise ValueError(f"{value!r} is not an integer")
            value = int(value)
        elif key.kind is float:
            value = float(value)
        else:
            value = str(value)
    except (TypeError, ValueError) as e:
        raise ConfigError(f"cannot parse {key.name}={value!r}: {e}", line, source) from None

    if key.choices and value not in key.choices:
        raise ConfigError(f"{key.name}={value!r} must be one of {', '.join(key.choices)}",
                          line, source)
    problem = key.check(value)
    if problem:
        raise ConfigError(f"{key.name}={value!r} out of range: {problem}", line, source)
    return value


def parse_config(text, base: RunConfig = None, source=None) -> RunConfig:
    """key=value lines; '#' starts a comment. Unset keys keep the base (default) values."""
    values = (base or RunConfig()).as_dict()
    seen = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected key=value, got '{line}'", lineno, source)
        name, value = (part.strip() for part in line.split("=", 1))
        if name not in KEYS:
            _unknown(name, lineno, source)
        if name in seen:
            raise ConfigError(f"duplicate key '{name}' (first set on line {seen[name]})",
                              lineno, source)
        seen[name] = lineno
        values[name] = _coerce(KEYS[name], value, lineno, source)
    return RunConfig(values)


def load_config_file(path, base: RunConfig = None) -> RunConfig:
    try:
        with open(path) as f:
            text = f.read()
    except OSError as e:
        raise ConfigError(f"cannot read config: {e.strerror}", source=path) from None
    return parse_config(text, base, source=path)


def apply_mapping(mapping, base: RunConfig = None, source=None) -> RunConfig:
    if not isinstance(mapping, dict):
        raise ConfigError("profile must be a flat mapping of keys to values", source=source)
    values = (base or RunConfig()).as_dict()
    for name, value in mapping.items():
        if name not in KEYS:
            _unknown(name, source=source)
        values[name] = _coerce(KEYS[name], value, source=source)
    return RunConfig(values)


def load_profile(name, base: RunConfig = None, profiles_dir=PROFILES_DIR) -> RunConfig:
    path = os.path.join(profiles_dir, f"{name}.yaml")
    if not os.path.exists(path):
        raise ConfigError(f"profile not found: {path}")
    with open(path) as f:
        try:
            mapping = yaml.safe_load(f) or {}
        except yaml.YAMLError as e:
            raise ConfigError(f"invalid YAML: {e}", source=path) from None
    log.debug(f"Loaded parameter profile '{name}' ({len(mapping)} keys)")
    return apply_mapping(mapping, base, source=path)


def _render(value):
    if value is None:
        return "none"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def serialize_config(cfg: RunConfig) -> str:
    return "".join(f"{name}={_render(cfg[name])}\n" for name in KEYS)


def system_params(cfg: RunConfig) -> SystemParams:
    return SystemParams(
        omega_297=cfg.si("omega_297_mhz"),
        g=cfg.si("g_mhz"),
        kappa=cfg.si("kappa_mhz"),
        gamma_total=cfg.si("gamma_mhz"),
        beta=cfg["beta"],
        delta_laser=cfg.si("delta_laser_mhz"),
        delta_cavity=cfg.si("delta_cavity_mhz"),
        n_max=cfg["n_max"],
        omega_935=cfg.si("omega_935_mhz"),
    )


def cavity_geometry(cfg: RunConfig) -> CavityGeometry:
    return CavityGeometry(
        length=cfg.si("cavity_length_um"),
        wavelength=cfg.si("wavelength_nm"),
        roc_1=cfg.si("roc1_um"),
        roc_2=cfg.si("roc2_um"),
        finesse=cfg["finesse"],
    )


def dipole(cfg: RunConfig) -> DipoleMoment:
    return DipoleMoment(cfg["dipole_cm"])


def mode_function(cfg: RunConfig) -> ModeFunction:
    return ModeFunction.from_wavelength(cfg.si("waist_y_um"), cfg.si("waist_z_um"),
                                        cfg.si("wavelength_nm"))


def displacement_coupling(cfg: RunConfig) -> DisplacementCoupling:
    return DisplacementCoupling(cfg["eta"])


def localization_model(cfg: RunConfig, sigma=0.0, period=None) -> LocalizationModel:
    return LocalizationModel(cfg["contrast_definition"], cfg["wavevector_choice"],
                             sigma=sigma, period=period)
