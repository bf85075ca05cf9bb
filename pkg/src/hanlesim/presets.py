"""Named parameter sets for the standard simulation scenarios.

All presets share one baseline: ground-state relaxation gamma = 0.002, zero
detuning, ground-state Zeeman shift coefficient 1.0 (excited 0.0), linear
polarization, and a square-wave field schedule that holds B = 0 for the
first half period and B = b1 for the second.  Units: the excited-state
decay rate is 1, so time is in excited-lifetime units and rates/frequencies
in units of the excited-state decay rate.

``fig5a``..``fig5e`` are dark-resonance (Fg=1 -> Fe=0) transients at five
pump intensities (squared Rabi frequencies); ``fig6a``..``fig6e`` are the
same intensities on the enhanced-absorption transition (Fg=1 -> Fe=2).
``fig7a``/``fig7b`` are intensity sweeps of the relaxation-mode spectrum for
the two transitions at a smaller switched field.
"""

from __future__ import annotations

import copy

__all__ = ["BASE", "INTENSITIES", "get_preset", "list_presets", "PRESETS"]

#: shared baseline configuration (see module docstring)
BASE = {
    "gamma": 0.002,
    "detuning": 0.0,
    "zeeman_g": 1.0,
    "zeeman_e": 0.0,
    "polarization": "linear-y",
    "dipole_scale": 1.0,
    "b0": 0.0,
    "b1": 0.03,
    "period": 5000.0,
    "duty": 0.5,
    "n_periods": 1,
    "samples_per_period": 4000,
}

#: squared Rabi frequencies for the five transient presets, weakest first
INTENSITIES = (0.002, 0.006, 0.02, 0.06, 2.0)

_LETTERS = "abcde"


def _transient(fg, fe, intensity):
    config = dict(BASE)
    config.update({"fg": fg, "fe": fe, "intensity": intensity})
    return config


def _sweep(fg, fe, dipole_scale):
    config = dict(BASE)
    config.update({
        "fg": fg,
        "fe": fe,
        "dipole_scale": dipole_scale,
        "b1": 0.01,
        "sweep_min": 1e-3,
        "sweep_max": 4.0,
        "sweep_points": 40,
    })
    return config


PRESETS = {}
for _index, _intensity in enumerate(INTENSITIES):
    PRESETS[f"fig5{_LETTERS[_index]}"] = {
        "command": "transient",
        "description": (
            f"dark-resonance transient, Fg=1 -> Fe=0, intensity {_intensity}"
        ),
        "config": _transient(1, 0, _intensity),
    }
for _index, _intensity in enumerate(INTENSITIES):
    PRESETS[f"fig6{_LETTERS[_index]}"] = {
        "command": "transient",
        "description": (
            f"enhanced-absorption transient, Fg=1 -> Fe=2, intensity {_intensity}"
        ),
        "config": _transient(1, 2, _intensity),
    }
PRESETS["fig7a"] = {
    "command": "spectrum",
    "description": "relaxation-rate spectrum vs intensity, Fg=1 -> Fe=0",
    "config": _sweep(1, 0, 1.0),
}
PRESETS["fig7b"] = {
    "command": "spectrum",
    "description": "relaxation-rate spectrum vs intensity, Fg=1 -> Fe=2",
    "config": _sweep(1, 2, 2.5),
}
del _index, _intensity


def get_preset(name: str) -> dict:
    """Deep copy of a preset: {'command', 'description', 'config'} keys."""
    try:
        return copy.deepcopy(PRESETS[name])
    except KeyError:
        known = ", ".join(PRESETS)
        raise KeyError(f"unknown preset {name!r}; known presets: {known}") from None


def list_presets() -> list:
    """(name, command, description) triples in definition order."""
    return [(name, p["command"], p["description"]) for name, p in PRESETS.items()]
