"""Python front end for the fpk native core.

Configs are plain dicts (the same shape as the CLI's JSON files); reports come back as dicts.
"""

import json

from . import _fpk
from ._fpk import ConfigError, Error, NotPositiveDefinite, cholesky, spectral_gap_2d, sym_eigs

__all__ = [
    "ConfigError",
    "Error",
    "Field",
    "NotPositiveDefinite",
    "check",
    "cholesky",
    "fp_residuals",
    "run_cli",
    "simulate",
    "spectral_gap_2d",
    "sym_eigs",
]

DISCRETIZATION_C = _fpk.discretization_c


class Field:
    """Coefficient field (A, G) from a config dict, e.g. {"dim": 2, "catalog": "ou"}."""

    def __init__(self, config):
        self._native = _fpk.Field(json.dumps(config))

    @property
    def dim(self):
        return self._native.dim

    @property
    def resolved(self):
        return json.loads(self._native.resolved)

    def diffusion(self, x):
        return self._native.diffusion(list(x))

    def drift(self, x):
        return self._native.drift(list(x))

    def sigma(self, x):
        return self._native.sigma(list(x))

    def lv(self, y):
        return self._native.lv(list(y))

    def apply_bump(self, center, radius, x):
        return self._native.apply_bump(list(center), radius, list(x))


def check(field, condition, M=1.0, N0=4.0, R_max=1000.0, directions=0):
    return json.loads(_fpk.check(field._native, condition, M, N0, R_max, directions))


def simulate(field, sim, threads=0):
    """Euler-Maruyama ensemble; returns (times, positions, alive) as numpy arrays."""
    return _fpk.simulate(field._native, json.dumps(sim), threads)


def fp_residuals(field, sim, bank_scale=2.0, t=None, threads=0):
    return json.loads(_fpk.fp_residuals(field._native, json.dumps(sim), bank_scale, -1.0 if t is None else t, threads))


def run_cli(*args):
    return _fpk.run_cli([str(a) for a in args])
