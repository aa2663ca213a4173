"""Closed-form single-user rates used as analytic oracles for the simulator."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class RateInputs:
    """Link amplitudes and powers for the closed-form rates.

    ``direct_mag`` is ``|H|`` (after transmit combining) and ``cascade_mags``
    the per-element ``|r_n|``. Powers are linear (watts).
    """

    direct_mag: float
    cascade_mags: np.ndarray = field(default_factory=lambda: np.zeros(0))
    tx_power: float = 1.0
    noise_power: float = 1.0
    d_levels: int = 1

    def __post_init__(self):
        mags = np.asarray(self.cascade_mags, dtype=float)
        object.__setattr__(self, "cascade_mags", mags)
        if self.direct_mag < 0 or np.any(mags < 0):
            raise ValueError("amplitudes must be non-negative")
        if not (self.tx_power > 0 and self.noise_power > 0):
            raise ValueError("powers must be positive")
        if self.d_levels < 1:
            raise ValueError(f"d_levels must be >= 1, got {self.d_levels}")

    @property
    def snr_scale(self) -> float:
        return self.tx_power / self.noise_power


def sinc_factor(d_levels: int) -> float:
    """Amplitude retained under uniform ``d_levels``-level phase quantisation, ``sin(pi/D)/(pi/D)``."""
    if d_levels < 1:
        raise ValueError(f"d_levels must be >= 1, got {d_levels}")
    if d_levels == 1:
        return 0.0  # sin(pi) is not exactly zero in floating point
    x = math.pi / d_levels
    return math.sin(x) / x


def _rate(snr_scale: float, amplitude: float) -> float:
    return math.log2(1.0 + snr_scale * amplitude**2)


def rate_ideal(inputs: RateInputs) -> float:
    """Rate with every cascaded term co-phased with the direct path."""
    return _rate(inputs.snr_scale, inputs.direct_mag + float(np.sum(inputs.cascade_mags)))


def rate_discrete_asymptotic(inputs: RateInputs, n_elements: int, mean_cascade: float | None = None) -> float:
    """Large-N rate with ``inputs.d_levels`` phase levels.

    ``mean_cascade`` defaults to the sample mean of ``inputs.cascade_mags``.
    """
    if n_elements < 1:
        raise ValueError(f"n_elements must be >= 1, got {n_elements}")
    if mean_cascade is None:
        mean_cascade = float(np.mean(inputs.cascade_mags)) if inputs.cascade_mags.size else 0.0
    amp = inputs.direct_mag + n_elements * sinc_factor(inputs.d_levels) * mean_cascade
    return _rate(inputs.snr_scale, amp)


def rate_no_ris(direct_mag: float, tx_power: float, noise_power: float) -> float:
    if direct_mag < 0 or not (tx_power > 0 and noise_power > 0):
        raise ValueError("invalid rate inputs")
    return _rate(tx_power / noise_power, direct_mag)


def theory_table(levels, inputs: RateInputs, n_elements: int | None = None) -> list[tuple[int, float, float]]:
    """``(D, sinc, rate)`` rows of the discrete-phase rate for each level count."""
    n = inputs.cascade_mags.size if n_elements is None else n_elements
    rows = []
    for d in levels:
        inp = RateInputs(inputs.direct_mag, inputs.cascade_mags, inputs.tx_power, inputs.noise_power, int(d))
        rows.append((int(d), sinc_factor(int(d)), rate_discrete_asymptotic(inp, max(n, 1))))
    return rows
