"""Planar antenna panels, element patterns, steering vectors and array factors.

Frames
------
Global: x east, y north, z up. Directions use zenith ``theta`` from +z and
azimuth ``phi`` counter-clockwise from +x.

Panel-local: the panel lies in its local y-z plane and faces +x (boresight).
Element ``(m, n)`` sits at ``(0, m * dy, n * dz)`` wavelengths, ``m`` along the
horizontal and ``n`` along the vertical, flattened as ``m * n_vertical + n``.

Steering frame: the reflection-steering formulas take angles measured from
the panel normal, with azimuth measured in the panel plane from local +z
towards +y. Arrival directions map as ``(arccos v_x, atan2(v_y, v_z))`` and
departure directions as ``(arccos v_x, atan2(-v_y, -v_z))``. With that
convention a uniform-phase surface reflects specularly exactly when the target
equals the arrival direction, and :func:`array_factor` equals the physical
cascaded response of the surface.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import cached_property
from typing import NamedTuple

import numpy as np

SECTORAL_MAX_GAIN_DBI = 8.0
SECTORAL_BEAMWIDTH_DEG = 65.0
SECTORAL_SLA_DB = 30.0


class ElementPattern(enum.Enum):
    SECTORAL_3GPP = "sectoral3gpp"
    OMNI = "omni"
    PASSIVE_REFLECTOR = "passive_reflector"


class DirectionLocal(NamedTuple):
    """Zenith/azimuth pair in radians; fields may be scalars or arrays."""

    zenith: float | np.ndarray
    azimuth: float | np.ndarray


@dataclass(frozen=True)
class AntennaPanel:
    n_horizontal: int
    n_vertical: int
    dy: float = 0.5
    dz: float = 0.5
    boresight_azimuth: float = 0.0  # degrees
    downtilt: float = 0.0  # degrees, positive tilts the boresight below the horizon
    pattern: ElementPattern = ElementPattern.OMNI

    def __post_init__(self):
        if self.n_horizontal < 1 or self.n_vertical < 1:
            raise ValueError("panel needs at least one element in each direction")
        if not (self.dy > 0 and self.dz > 0):
            raise ValueError("element spacing must be positive")

    @property
    def n_elements(self) -> int:
        return self.n_horizontal * self.n_vertical

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n_horizontal, self.n_vertical)

    @cached_property
    def rotation(self) -> np.ndarray:
        """Columns are the local x, y, z axes expressed in global coordinates."""
        a = math.radians(self.boresight_azimuth)
        t = math.radians(self.downtilt)
        x = np.array([math.cos(a) * math.cos(t), math.sin(a) * math.cos(t), -math.sin(t)])
        y = np.array([-math.sin(a), math.cos(a), 0.0])
        z = np.cross(x, y)
        return np.column_stack([x, y, z])

    def to_local(self, v_global: np.ndarray) -> np.ndarray:
        return np.asarray(v_global) @ self.rotation

    def to_global(self, v_local: np.ndarray) -> np.ndarray:
        return np.asarray(v_local) @ self.rotation.T


def spherical_unit_vector(direction: DirectionLocal) -> np.ndarray:
    th = np.asarray(direction.zenith, dtype=float)
    ph = np.asarray(direction.azimuth, dtype=float)
    return np.stack([np.sin(th) * np.cos(ph), np.sin(th) * np.sin(ph), np.cos(th)], axis=-1)


def direction_of(v: np.ndarray) -> DirectionLocal:
    """Zenith/azimuth of (not necessarily normalised) vectors."""
    v = np.asarray(v, dtype=float)
    r = np.linalg.norm(v, axis=-1)
    return DirectionLocal(np.arccos(np.clip(v[..., 2] / r, -1.0, 1.0)), np.arctan2(v[..., 1], v[..., 0]))


def element_positions(panel: AntennaPanel) -> np.ndarray:
    m, n = np.meshgrid(np.arange(panel.n_horizontal), np.arange(panel.n_vertical), indexing="ij")
    return np.column_stack([np.zeros(panel.n_elements), m.ravel() * panel.dy, n.ravel() * panel.dz])


def phase_steps(panel: AntennaPanel, v_local: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Per-element phase increments along the horizontal and vertical panel axes."""
    v = np.asarray(v_local, dtype=float)
    return 2 * np.pi * panel.dy * v[..., 1], 2 * np.pi * panel.dz * v[..., 2]


def steering_vector(panel: AntennaPanel, direction: DirectionLocal) -> np.ndarray:
    r = spherical_unit_vector(direction)
    return np.exp(2j * np.pi * (element_positions(panel) @ r))


def element_gain_db(pattern: ElementPattern, direction: DirectionLocal) -> np.ndarray:
    """Element gain in dB(i) towards a panel-local direction."""
    th = np.degrees(np.asarray(direction.zenith, dtype=float))
    ph = (np.degrees(np.asarray(direction.azimuth, dtype=float)) + 180.0) % 360.0 - 180.0
    if pattern is ElementPattern.SECTORAL_3GPP:
        a_v = -np.minimum(12.0 * ((th - 90.0) / SECTORAL_BEAMWIDTH_DEG) ** 2, SECTORAL_SLA_DB)
        a_h = -np.minimum(12.0 * (ph / SECTORAL_BEAMWIDTH_DEG) ** 2, SECTORAL_SLA_DB)
        return -np.minimum(-(a_v + a_h), SECTORAL_SLA_DB) + SECTORAL_MAX_GAIN_DBI
    if pattern is ElementPattern.OMNI:
        return np.zeros(np.broadcast(th, ph).shape)
    amp = element_amplitude(pattern, direction)
    with np.errstate(divide="ignore"):
        return 20.0 * np.log10(amp)


def element_amplitude(pattern: ElementPattern, direction: DirectionLocal) -> np.ndarray:
    """Linear field amplitude of the element pattern.

    The passive reflector follows ``cos`` of the angle to its normal and is
    blind over the back half-space.
    """
    if pattern is ElementPattern.PASSIVE_REFLECTOR:
        th = np.asarray(direction.zenith, dtype=float)
        ph = np.asarray(direction.azimuth, dtype=float)
        return np.maximum(np.sin(th) * np.cos(ph), 0.0)
    return 10.0 ** (element_gain_db(pattern, direction) / 20.0)


def incidence_direction(v_local: np.ndarray) -> DirectionLocal:
    """Steering-frame angles of an arrival direction (pointing back at the source)."""
    v = np.asarray(v_local, dtype=float)
    v = v / np.linalg.norm(v, axis=-1, keepdims=True)
    return DirectionLocal(np.arccos(np.clip(v[..., 0], -1.0, 1.0)), np.arctan2(v[..., 1], v[..., 2]))


def reflection_direction(v_local: np.ndarray) -> DirectionLocal:
    """Steering-frame angles of a departure direction (pointing at the target)."""
    v = np.asarray(v_local, dtype=float)
    v = v / np.linalg.norm(v, axis=-1, keepdims=True)
    return DirectionLocal(np.arccos(np.clip(v[..., 0], -1.0, 1.0)), np.arctan2(-v[..., 1], -v[..., 2]))


def _transverse(direction: DirectionLocal) -> tuple[float, float]:
    st = math.sin(direction.zenith)
    return math.sin(direction.azimuth) * st, math.cos(direction.azimuth) * st


def array_factor(
    panel: AntennaPanel,
    beta_y: float,
    beta_z: float,
    aoa: DirectionLocal,
    out_dir: DirectionLocal,
) -> complex:
    """Reflection array factor of a progressive phase profile ``(beta_y, beta_z)``.

    ``aoa`` and ``out_dir`` are steering-frame angles. Positions are in
    wavelengths so the wavenumber is ``2 pi``.
    """
    k = 2 * np.pi
    sy_in, sz_in = _transverse(aoa)
    sy_out, sz_out = _transverse(out_dir)
    psi_y = k * panel.dy * (sy_in - sy_out) + beta_y
    psi_z = k * panel.dz * (sz_in - sz_out) + beta_z
    m = np.arange(panel.n_horizontal)[:, None]
    n = np.arange(panel.n_vertical)[None, :]
    return complex(np.sum(np.exp(1j * (m * psi_y + n * psi_z))))


def array_response(panel: AntennaPanel, phases: np.ndarray, aoa: DirectionLocal, out_dir: DirectionLocal) -> complex:
    """Same as :func:`array_factor` for an arbitrary per-element phase vector."""
    k = 2 * np.pi
    sy_in, sz_in = _transverse(aoa)
    sy_out, sz_out = _transverse(out_dir)
    pos = element_positions(panel)
    geo = k * (pos[:, 1] * (sy_in - sy_out) + pos[:, 2] * (sz_in - sz_out))
    return complex(np.sum(np.exp(1j * (geo + np.asarray(phases)))))
