"""RIS phase-shift strategies.

Covers geometric beam steering, beam codebooks, per-user co-phasing, discrete
quantisation and random phases.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .arrays import (
    AntennaPanel,
    DirectionLocal,
    incidence_direction,
    reflection_direction,
    spherical_unit_vector,
)

_TWO_PI = 2.0 * np.pi


class SteeringDomainError(ValueError):
    """Requested direction lies behind the reflecting surface."""


class PhaseConstraint(enum.Enum):
    IDEAL = "ideal"
    DISCRETE = "discrete"
    RANDOM = "random"


@dataclass(frozen=True)
class PhaseConfig:
    phases: np.ndarray
    constraint: PhaseConstraint = PhaseConstraint.IDEAL
    levels: int | None = None

    def __post_init__(self):
        if self.constraint is PhaseConstraint.DISCRETE and not self.levels:
            raise ValueError("discrete phase configuration needs a level count")

    def __len__(self) -> int:
        return len(self.phases)

    @property
    def coefficients(self) -> np.ndarray:
        return np.exp(1j * self.phases)


@dataclass(frozen=True)
class Beam:
    azimuth: float  # degrees, panel-local, relative to the RIS boresight
    zenith: float  # degrees, panel-local
    phases: PhaseConfig


@dataclass(frozen=True)
class BeamCodebook:
    beams: tuple[Beam, ...]
    aoa: DirectionLocal  # panel-local arrival direction the beams were designed for

    def __len__(self) -> int:
        return len(self.beams)

    def coefficient_matrix(self) -> np.ndarray:
        """(B, N) reflection coefficients, one row per beam."""
        return np.array([b.phases.coefficients for b in self.beams])


def _check_front(direction: DirectionLocal, what: str) -> None:
    if direction.zenith > np.pi / 2 + 1e-9:
        raise SteeringDomainError(f"{what} lies in the back half-space (zenith {direction.zenith:.4f} rad)")


def steering_betas(panel: AntennaPanel, aoa: DirectionLocal, target: DirectionLocal) -> tuple[float, float]:
    """Progressive phase increments that steer a reflection from ``aoa`` to ``target``.

    Both directions are steering-frame angles (see :mod:`rissim.arrays`).
    """
    _check_front(aoa, "arrival direction")
    _check_front(target, "target direction")
    k = _TWO_PI
    beta_y = k * panel.dy * (
        math.sin(target.azimuth) * math.sin(target.zenith) - math.sin(aoa.azimuth) * math.sin(aoa.zenith)
    )
    beta_z = k * panel.dz * (
        math.cos(target.azimuth) * math.sin(target.zenith) - math.cos(aoa.azimuth) * math.sin(aoa.zenith)
    )
    return beta_y, beta_z


def optimal_steering_phases(panel: AntennaPanel, aoa: DirectionLocal, target: DirectionLocal) -> PhaseConfig:
    beta_y, beta_z = steering_betas(panel, aoa, target)
    m, n = np.meshgrid(np.arange(panel.n_horizontal), np.arange(panel.n_vertical), indexing="ij")
    phases = np.mod(m.ravel() * beta_y + n.ravel() * beta_z, _TWO_PI)
    return PhaseConfig(phases, PhaseConstraint.IDEAL)


def codebook_azimuths(n_beams: int, azimuth_span: float = 120.0) -> np.ndarray:
    """Beam centres (degrees) splitting the span into ``n_beams`` equal slices."""
    step = azimuth_span / n_beams
    return -azimuth_span / 2.0 + step * (np.arange(n_beams) + 0.5)


def make_codebook(
    panel: AntennaPanel,
    aoa: DirectionLocal,
    n_beams: int,
    azimuth_span: float = 120.0,
    zenith: float = 90.0,
) -> BeamCodebook:
    """Fixed beam fan across the sector seen from the RIS.

    ``aoa`` is the panel-local direction towards the serving BS. Beam targets
    are panel-local too: azimuth offsets from the RIS boresight spread
    uniformly over ``azimuth_span`` at a common ``zenith`` (degrees).
    """
    if n_beams < 1:
        raise ValueError(f"codebook needs at least one beam, got {n_beams}")
    inc = incidence_direction(spherical_unit_vector(aoa))
    beams = []
    for az in codebook_azimuths(n_beams, azimuth_span):
        target = spherical_unit_vector(DirectionLocal(math.radians(zenith), math.radians(az)))
        phases = optimal_steering_phases(panel, inc, reflection_direction(target))
        beams.append(Beam(float(az), float(zenith), phases))
    return BeamCodebook(tuple(beams), aoa)


def cascade_terms(f_row: np.ndarray, g: np.ndarray, precoder: np.ndarray) -> np.ndarray:
    """Per-element cascaded gains ``r_n = F_n (G w)_n`` for a single-antenna user."""
    return np.asarray(f_row) * (np.asarray(g) @ np.asarray(precoder))


def ideal_phases(direct: complex, cascade: np.ndarray) -> PhaseConfig:
    """Co-phase every cascaded term with the direct path.

    Gives ``|direct + sum_n exp(j theta_n) r_n| = |direct| + sum_n |r_n|``. A
    zero direct path is treated as having phase 0.
    """
    ref = np.angle(direct) if direct != 0 else 0.0
    phases = np.mod(ref - np.angle(np.asarray(cascade)), _TWO_PI)
    return PhaseConfig(phases, PhaseConstraint.IDEAL)


def quantize_phases(config: PhaseConfig, levels: int) -> PhaseConfig:
    """Round each phase to the nearest of ``levels`` uniform levels.

    Exact ties round down to the lower level.
    """
    if levels < 1:
        raise ValueError(f"levels must be >= 1, got {levels}")
    step = _TWO_PI / levels
    x = np.mod(config.phases, _TWO_PI) / step
    k = np.mod(np.ceil(x - 0.5), levels)
    return PhaseConfig(k * step, PhaseConstraint.DISCRETE, int(levels))


def random_phases(n: int, rng: np.random.Generator) -> PhaseConfig:
    if n < 1:
        raise ValueError(f"need at least one element, got {n}")
    return PhaseConfig(rng.uniform(0.0, _TWO_PI, size=n), PhaseConstraint.RANDOM)


def best_discrete_phases(direct: complex, cascade: np.ndarray, levels: int) -> tuple[float, PhaseConfig]:
    """Exhaustive search over all ``levels ** N`` discrete configurations.

    Only practical for small ``N``; returns the best ``|h_eq|`` and the
    configuration attaining it.
    """
    best, idx = _kernels.exhaustive_best(direct, cascade, levels)
    return float(best), PhaseConfig(np.asarray(idx) * (_TWO_PI / levels), PhaseConstraint.DISCRETE, int(levels))
