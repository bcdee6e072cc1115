"""Shared parameter types, validation and seeding.

All quantities use natural units m = c = hbar = 1.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np


class ParameterError(ValueError):
    """A parameter violates one of its invariants.

    ``name`` identifies the violated invariant so callers (and the CLI) can
    report it without parsing the message.
    """

    name = "InvalidParameter"

    def __init__(self, message: str):
        super().__init__(f"{self.name}: {message}")


class NonpositiveLength(ParameterError):
    name = "NonpositiveLength"


class NonpositiveWavelength(ParameterError):
    name = "NonpositiveWavelength"


class NonpositivePeriod(ParameterError):
    name = "NonpositivePeriod"


class NegativeKickStrength(ParameterError):
    name = "NegativeKickStrength"


class InvalidCount(ParameterError):
    name = "InvalidCount"


class KickAmplitudeMode(str, enum.Enum):
    """How the classical momentum-kick amplitude is derived.

    ``AS_PRINTED`` uses 2*pi*eps*T/lambda (the bounce-kick map form),
    ``HAMILTONIAN`` uses the impulse 2*pi*eps/lambda of the delta-kicked
    Hamiltonian.
    """

    AS_PRINTED = "as-printed"
    HAMILTONIAN = "hamiltonian"


@dataclass(frozen=True)
class PhysicalParams:
    box_length: float = 1.0
    wavelength: float = 1.0
    kick_strength: float = 0.0
    kick_period: float = 1.0
    kick_amplitude_mode: KickAmplitudeMode = KickAmplitudeMode.AS_PRINTED

    def __post_init__(self):
        # accept plain strings from config files
        if not isinstance(self.kick_amplitude_mode, KickAmplitudeMode):
            object.__setattr__(self, "kick_amplitude_mode",
                               KickAmplitudeMode(self.kick_amplitude_mode))

    @property
    def kappa(self) -> float:
        return kick_amplitude(self)


@dataclass(frozen=True)
class RunConfig:
    seed: int = 20240101
    ensemble_size: int = 1000
    n_kicks: int = 1000
    basis_size: int = 256
    grid_points: int = 1024
    output_dir: str = "."

    def __post_init__(self):
        for name, lo in (("ensemble_size", 1), ("n_kicks", 1),
                         ("basis_size", 1), ("grid_points", 2)):
            value = getattr(self, name)
            if int(value) != value or value < lo:
                raise InvalidCount(f"{name} must be an integer >= {lo}, got {value!r}")
        if not 0 <= int(self.seed) < 2**64:
            raise InvalidCount(f"seed must fit in 64 bits, got {self.seed!r}")


def validate(params: PhysicalParams) -> PhysicalParams:
    """Return ``params`` unchanged, or raise on the first violated invariant."""
    checks = (
        (params.box_length, NonpositiveLength, "box_length"),
        (params.wavelength, NonpositiveWavelength, "wavelength"),
        (params.kick_period, NonpositivePeriod, "kick_period"),
    )
    for value, exc, label in checks:
        if not (math.isfinite(value) and value > 0):
            raise exc(f"{label} must be positive and finite, got {value!r}")
    if not (math.isfinite(params.kick_strength) and params.kick_strength >= 0):
        raise NegativeKickStrength(
            f"kick_strength must be >= 0, got {params.kick_strength!r}")
    return params


def kick_amplitude(params: PhysicalParams) -> float:
    """Coefficient of sin(2*pi*x/lambda) in the classical momentum kick."""
    base = 2.0 * math.pi * params.kick_strength / params.wavelength
    if params.kick_amplitude_mode is KickAmplitudeMode.AS_PRINTED:
        return base * params.kick_period
    return base


def seed_sequence(seed: int, *path: int) -> np.random.SeedSequence:
    """Deterministic child of the run seed addressed by ``path``.

    Independent streams for different purposes are obtained by using distinct
    paths, e.g. ``seed_sequence(seed, 0)`` for the classical ensemble.
    """
    return np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(p) for p in path))


def rng(seed: int, *path: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed_sequence(seed, *path)))

