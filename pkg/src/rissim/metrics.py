"""Per-user link metrics and empirical CDFs."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

THERMAL_DENSITY_DBM_HZ = -174.0


def dbm_to_watts(p_dbm):
    return 10.0 ** ((np.asarray(p_dbm, dtype=float) - 30.0) / 10.0)


def watts_to_dbm(p_w):
    with np.errstate(divide="ignore"):
        return 10.0 * np.log10(np.asarray(p_w, dtype=float)) + 30.0


def noise_power_dbm(bandwidth_hz: float, noise_figure_db: float = 9.0) -> float:
    return THERMAL_DENSITY_DBM_HZ + 10.0 * math.log10(bandwidth_hz) + noise_figure_db


def received_power(h_eq, tx_power: float) -> float:
    """Matched-filter received power ``P * ||h_eq||_F^2``."""
    h = np.asarray(h_eq)
    if h.size == 0:
        raise ValueError("empty channel")
    return float(tx_power * np.sum(np.abs(h) ** 2))


def coupling_loss_db(tx_power_dbm, rx_power_dbm):
    return np.asarray(tx_power_dbm, dtype=float) - np.asarray(rx_power_dbm, dtype=float)


def sinr(serving_rx: float, interferers_rx, noise: float) -> float:
    if not noise > 0:
        raise ValueError("noise power must be positive")
    return float(serving_rx / (float(np.sum(interferers_rx)) + noise))


def spectral_efficiency(sinr_linear):
    return np.log2(1.0 + np.asarray(sinr_linear, dtype=float))


@dataclass
class DropMetrics:
    """Per-user results; all arrays share the user axis."""

    coupling_loss_db: np.ndarray
    sinr_db: np.ndarray
    snr_db: np.ndarray
    spectral_eff: np.ndarray
    serving_sector: np.ndarray
    best_beam: np.ndarray  # -1 when no beam (direct only or not a codebook strategy)

    def __len__(self) -> int:
        return len(self.coupling_loss_db)

    @classmethod
    def concat(cls, parts) -> "DropMetrics":
        parts = list(parts)
        if not parts:
            raise ValueError("nothing to concatenate")
        return cls(*(np.concatenate([getattr(p, f) for p in parts]) for f in cls.__dataclass_fields__))


@dataclass(frozen=True)
class EmpiricalCdf:
    """Step CDF over distinct sample values plus the raw samples for percentiles."""

    sorted_values: np.ndarray
    probabilities: np.ndarray
    samples: np.ndarray

    def __len__(self) -> int:
        return len(self.sorted_values)

    def percentile(self, q):
        return np.percentile(self.samples, q)

    @property
    def median(self) -> float:
        return float(np.median(self.samples))


def empirical_cdf(values) -> EmpiricalCdf:
    """Empirical CDF; repeated values collapse into one step at their last rank."""
    x = np.sort(np.asarray(values, dtype=float).ravel())
    if x.size == 0:
        raise ValueError("empirical_cdf needs at least one value")
    if np.any(np.isnan(x)):
        raise ValueError("NaN in CDF input")
    last = np.r_[x[1:] != x[:-1], True]
    ranks = np.nonzero(last)[0] + 1
    return EmpiricalCdf(x[last], ranks / x.size, x)
