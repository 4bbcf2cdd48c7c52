"""Named run presets: one per published training-set configuration.

Each preset is a plain JSON-shaped dict (see config module for the schema)
so it can be overlaid by a user config file before parsing. Training grids
and test grids follow the reference experiment tables; compression defaults
to POD with the latent dimension the linear-compression experiments use for
that problem, with a linear function library and global DI. The 1D Burgers
presets turn on trajectory refinement of the global fit: with a handful of
training trajectories the raw derivative regression can trade one corner of
the parameter box away, and the refined fit restores it. The heat preset
instead buys its accuracy with latent dimension 6: its snapshot spectrum
decays slowly enough that the projection floor, not the fit, is what binds.
"""

from __future__ import annotations

import copy

from .errors import ConfigError

_BURGERS1D_TEST = {"grid": [{"start": 0.7, "stop": 0.9, "step": 0.01},
                            {"start": 0.9, "stop": 1.1, "step": 0.01}]}


def _burgers1d(name, a_step, w_step):
    return {
        "name": name,
        "problem": {"kind": "burgers1d"},
        "training": {"grid": [{"start": 0.7, "stop": 0.9, "step": a_step},
                              {"start": 0.9, "stop": 1.1, "step": w_step}]},
        "testing": _BURGERS1D_TEST,
        "compression": {"kind": "pod", "latent_dim": 5},
        "dynamics": {"strategy": "global", "refine": True},
    }


def _advect(name, stop, step):
    return {
        "name": name,
        "problem": {"kind": "advect2d"},
        "training": {"grid": [{"start": 0.6, "stop": stop, "step": step}]},
        "testing": {"grid": [{"start": 0.6, "stop": stop, "step": 0.01}]},
        "compression": {"kind": "pod", "latent_dim": 5},
    }


PRESETS = {
    "burgers1d-4pt": _burgers1d("burgers1d-4pt", 0.2, 0.2),
    "burgers1d-9pt": _burgers1d("burgers1d-9pt", 0.1, 0.1),
    "burgers1d-25pt": _burgers1d("burgers1d-25pt", 0.05, 0.05),
    "burgers2d-25pt": {
        "name": "burgers2d-25pt",
        "problem": {"kind": "burgers2d"},
        "training": {"grid": [{"start": 0.7, "stop": 0.9, "step": 0.05},
                              {"start": 0.9, "stop": 1.1, "step": 0.05}]},
        "testing": {"grid": [{"start": 0.7, "stop": 0.9, "step": 0.02},
                             {"start": 0.9, "stop": 1.1, "step": 0.02}]},
        "compression": {"kind": "pod", "latent_dim": 5},
    },
    "heat-21pt": {
        "name": "heat-21pt",
        "problem": {"kind": "heat2d"},
        "training": {"grid": [{"start": 0.2, "stop": 5.0, "step": 0.8},
                              {"start": 1.8, "stop": 2.2, "step": 0.2}]},
        "testing": {"grid": [{"start": 0.2, "stop": 5.0, "step": 0.04},
                             {"start": 1.8, "stop": 2.2, "step": 0.01}]},
        "compression": {"kind": "pod", "latent_dim": 6},
    },
    "advect-small-coarse": _advect("advect-small-coarse", 1.0, 0.1),
    "advect-small-fine": _advect("advect-small-fine", 1.0, 0.05),
    "advect-large-coarse": _advect("advect-large-coarse", 1.4, 0.1),
    "advect-large-fine": _advect("advect-large-fine", 1.4, 0.05),
}


def preset_names() -> list[str]:
    return sorted(PRESETS)


def load_preset(name: str) -> dict:
    """Deep copy of the named preset dict, ready for overlay and parsing."""
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; available: "
                          f"{', '.join(preset_names())}")
    return copy.deepcopy(PRESETS[name])
