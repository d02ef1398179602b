"""INI-style run configuration with documented defaults.

Every key belongs to a section of :data:`DEFAULTS`; anything else is rejected.
Command-line ``--set section.key=value`` overrides win over the file.
"""

from __future__ import annotations

import configparser
from pathlib import Path

DEFAULTS: dict[str, dict[str, object]] = {
    "coupling": {"gamma1": 0.6, "gamma2": 0.4, "unit": 1.0},
    "kerr": {"u": 10.0},
    "wavepacket": {
        "delta": 0.0,
        "epsilon": 0.1,
        # second photon; blank means same as the first
        "delta2": "",
        "epsilon2": "",
    },
    "spectrum": {
        "couplings": "1,0; 0.8,0.2; 0.5,0.5",
        "omega_min": -10.0,
        "omega_max": 10.0,
        "points": 2001,
    },
    "ip_slices": {
        "cuts": "0,0; 10,5; 8,5; 10,4",
        "omega_min": -10.0,
        "omega_max": 20.0,
        "points": 3001,
    },
    "maps": {"extent": 3.0, "points": 241},
    "gamma_sweep": {
        "case": "b",
        "gamma2_start": 0.05,
        "gamma2_stop": 0.95,
        "gamma2_step": 0.05,
    },
    "quadrature": {"points": 1201},
    "oracle": {
        "cutoff": 20.0,
        "modes": 1601,
        "pair_cutoff": 40.0,
        "pair_modes": 1601,
        "step": 0.005,
        "t_end": 40.0,
        "epsilon": 0.5,
        "delta": 0.0,
        "u": 10.0,
        "checks": "bare_phase, factorized, bound_state",
        "dump": "",
    },
    "validate": {"draws": 1000},
}


class ConfigError(ValueError):
    """Bad configuration; the message names the offending key."""


def _coerce(section: str, key: str, raw: str):
    default = DEFAULTS[section][key]
    try:
        if isinstance(default, bool):
            return raw.strip().lower() in ("1", "true", "yes", "on")
        if isinstance(default, int):
            return int(raw)
        if isinstance(default, float):
            return float(raw)
    except ValueError as exc:
        raise ConfigError(f"{section}.{key}: cannot parse {raw!r} ({exc})") from None
    return raw.strip()


def _check_key(section: str, key: str) -> None:
    if section not in DEFAULTS:
        raise ConfigError(f"unknown section [{section}]")
    if key not in DEFAULTS[section]:
        raise ConfigError(f"unknown key {section}.{key}")


def load_config(path=None, overrides=()) -> dict[str, dict[str, object]]:
    """Merge defaults, an optional INI file and ``section.key=value`` overrides."""
    values = {sec: dict(keys) for sec, keys in DEFAULTS.items()}
    if path is not None:
        parser = configparser.ConfigParser(interpolation=None)
        try:
            with Path(path).open(encoding="utf-8") as fh:
                parser.read_file(fh)
        except (OSError, configparser.Error) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        for section in parser.sections():
            for key, raw in parser.items(section):
                _check_key(section, key)
                values[section][key] = _coerce(section, key, raw)
    for item in overrides:
        name, sep, raw = item.partition("=")
        section, dot, key = name.strip().partition(".")
        if not sep or not dot:
            raise ConfigError(f"override {item!r} is not of the form section.key=value")
        _check_key(section, key)
        values[section][key] = _coerce(section, key, raw)
    return values


def parse_pairs(text: str, label: str) -> list[tuple[float, float]]:
    """Parse ``"a,b; c,d"`` into float pairs."""
    pairs = []
    for chunk in str(text).split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        parts = [p.strip() for p in chunk.split(",")]
        if len(parts) != 2:
            raise ConfigError(f"{label}: expected 'a,b' pairs, got {chunk!r}")
        try:
            pairs.append((float(parts[0]), float(parts[1])))
        except ValueError:
            raise ConfigError(f"{label}: non-numeric pair {chunk!r}") from None
    if not pairs:
        raise ConfigError(f"{label}: no entries")
    return pairs
