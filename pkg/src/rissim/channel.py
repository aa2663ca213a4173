"""Large- and small-scale channel synthesis for BS-user, BS-RIS and RIS-user links.

Path loss, LOS probability and shadowing follow the urban-macro (UMa)
profile. The small-scale part is a simplified cluster model: exponentially
decaying cluster powers, Gaussian cluster angles around the geometric line of
sight, Laplacian ray offsets within each cluster, uniform ray phases and, under
LOS, a specular ray carrying a Rician K-factor share. Each ray contributes a
rank-one term built from both panels' element patterns and steering vectors.
"""

from __future__ import annotations

import enum
import logging
import threading
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .arrays import AntennaPanel, DirectionLocal, direction_of, element_amplitude, phase_steps, spherical_unit_vector

log = logging.getLogger(__name__)

SPEED_OF_LIGHT = 299_792_458.0
MIN_D2D = 10.0
UMA_EFFECTIVE_ENV_HEIGHT = 1.0


@dataclass(frozen=True)
class EnvProfile:
    """Urban-macro propagation constants; every field can be overridden from config."""

    carrier_ghz: float = 2.0
    shadow_std_los: float = 4.0
    shadow_std_nlos: float = 6.0
    clusters_los: int = 8
    clusters_nlos: int = 12
    rays_per_cluster: int = 20
    k_factor_db: float = 9.0
    delay_scaling_los: float = 2.5
    delay_scaling_nlos: float = 2.3
    cluster_shadow_std: float = 3.0
    # cluster-centre spreads around the LOS direction (degrees)
    spread_asd: float = 15.0
    spread_zsd: float = 5.0
    spread_asa: float = 45.0
    spread_zsa: float = 10.0
    # intra-cluster ray spreads (degrees)
    ray_asd: float = 5.0
    ray_zsd: float = 3.0
    ray_asa: float = 11.0
    ray_zsa: float = 7.0
    force_los_bs_ris: bool = True
    force_los: bool = False
    single_path: bool = False

    @property
    def wavelength(self) -> float:
        return SPEED_OF_LIGHT / (self.carrier_ghz * 1e9)


class LinkRole(enum.Enum):
    DIRECT = "direct"  # H: BS -> user
    BS_TO_RIS = "bs_to_ris"  # G: BS -> RIS
    RIS_TO_USER = "ris_to_user"  # F: RIS -> user


@dataclass(frozen=True)
class LargeScale:
    pathloss_db: float
    shadow_db: float
    is_los: bool

    @property
    def loss_db(self) -> float:
        return self.pathloss_db + self.shadow_db


@dataclass(frozen=True)
class DopplerSpec:
    speed: float = 0.0  # m/s
    time: float = 0.0  # s
    heading: float = 0.0  # rad, direction of travel in the horizontal plane

    def __post_init__(self):
        if self.speed < 0:
            raise ValueError("speed must be non-negative")

    def velocity(self) -> np.ndarray:
        return self.speed * np.array([np.cos(self.heading), np.sin(self.heading), 0.0])


@dataclass(frozen=True)
class ClusterSet:
    """Small-scale parameters of one link.

    Angles are offsets (radians) from the geometric line of sight, ordered
    ``[aod_azimuth, aod_zenith, aoa_azimuth, aoa_zenith]``. ``los_power`` is the
    specular share; it and ``cluster_power`` together sum to one.
    """

    cluster_power: np.ndarray  # (C,)
    cluster_angles: np.ndarray  # (C, 4)
    ray_offsets: np.ndarray  # (C, R, 4)
    ray_phases: np.ndarray  # (C, R)
    los_power: float = 0.0

    @property
    def n_rays(self) -> int:
        return int(self.ray_phases.size) + (1 if self.los_power > 0 else 0)

    def rays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, bool]:
        """Flattened ``(power, angle_offsets, phases, has_specular)``; specular ray first."""
        n_c, n_r = self.ray_phases.shape if self.ray_phases.ndim == 2 else (0, 0)
        power = np.repeat(self.cluster_power / max(n_r, 1), n_r)
        angles = (self.cluster_angles[:, None, :] + self.ray_offsets).reshape(-1, 4)
        phases = self.ray_phases.reshape(-1)
        if self.los_power > 0:
            power = np.concatenate([[self.los_power], power])
            angles = np.vstack([np.zeros((1, 4)), angles])
            phases = np.concatenate([[0.0], phases])
        return power, angles, phases, self.los_power > 0


@dataclass(frozen=True)
class LinkChannel:
    matrix: np.ndarray  # (receive elements, transmit elements)
    large_scale: LargeScale
    role: LinkRole


class _ClampCounter:
    def __init__(self):
        self._lock = threading.Lock()
        self.count = 0

    def add(self, n: int) -> None:
        with self._lock:
            self.count += n


PATHLOSS_CLAMPS = _ClampCounter()


def los_probability(d2d):
    """UMa line-of-sight probability for terminals up to 13 m high."""
    d = np.asarray(d2d, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        p = 18.0 / d + np.exp(-d / 63.0) * (1.0 - 18.0 / d)
    p = np.where(d <= 18.0, 1.0, p)
    return float(p) if p.ndim == 0 else p


def breakpoint_distance(h_bs: float, h_ut: float, fc_ghz: float) -> float:
    hb = max(h_bs - UMA_EFFECTIVE_ENV_HEIGHT, 0.0)
    hu = max(h_ut - UMA_EFFECTIVE_ENV_HEIGHT, 0.0)
    return 4.0 * hb * hu * fc_ghz * 1e9 / SPEED_OF_LIGHT


def pathloss_uma_db(d2d, d3d, fc: float, h_bs: float, h_ut: float, los):
    """UMa path loss in dB.

    Distances below the 10 m model limit are clamped (2-D distance raised to
    10 m, 3-D distance recomputed) and counted in ``PATHLOSS_CLAMPS``.
    """
    d2 = np.asarray(d2d, dtype=float)
    d3 = np.asarray(d3d, dtype=float)
    los = np.asarray(los, dtype=bool)
    low = d2 < MIN_D2D
    if np.any(low):
        PATHLOSS_CLAMPS.add(int(np.count_nonzero(low)))
        log.debug("clamped %d link(s) below %.0f m", int(np.count_nonzero(low)), MIN_D2D)
        dh = np.sqrt(np.maximum(d3**2 - d2**2, 0.0))
        d2 = np.where(low, MIN_D2D, d2)
        d3 = np.where(low, np.hypot(MIN_D2D, dh), d3)
    lf = 20.0 * np.log10(fc)
    dbp = breakpoint_distance(h_bs, h_ut, fc)
    pl1 = 28.0 + 22.0 * np.log10(d3) + lf
    pl2 = 28.0 + 40.0 * np.log10(d3) + lf - 9.0 * np.log10(dbp**2 + (h_bs - h_ut) ** 2) if dbp > 0 else pl1
    pl_los = np.where(d2 <= dbp, pl1, pl2) if dbp > 0 else 28.0 + 40.0 * np.log10(d3) + lf
    pl_nlos = np.maximum(pl_los, 13.54 + 39.08 * np.log10(d3) + lf - 0.6 * (h_ut - 1.5))
    out = np.where(los, pl_los, pl_nlos)
    return float(out) if out.ndim == 0 else out


def draw_large_scale(
    d2d: float,
    d3d: float,
    h_tx: float,
    h_rx: float,
    env: EnvProfile,
    rng: np.random.Generator,
    force_los: bool | None = None,
) -> LargeScale:
    """LOS state, path loss and log-normal shadowing for one link.

    Always consumes one uniform and one normal draw, in that order.
    """
    u = rng.uniform()
    z = rng.standard_normal()
    if force_los is None:
        force_los = True if env.force_los else None
    is_los = bool(u < los_probability(d2d)) if force_los is None else bool(force_los)
    sigma = env.shadow_std_los if is_los else env.shadow_std_nlos
    pl = pathloss_uma_db(d2d, d3d, env.carrier_ghz, h_tx, h_rx, is_los)
    return LargeScale(float(pl), float(sigma * z), is_los)


def _wrap_angle(a):
    return np.pi - np.mod(np.pi - a, 2 * np.pi)


def synth_clusters(env: EnvProfile, los: bool, rng: np.random.Generator) -> ClusterSet:
    """Draw cluster powers, angles and ray phases for one link."""
    if env.single_path:
        empty = np.zeros((0,))
        return ClusterSet(empty, np.zeros((0, 4)), np.zeros((0, 0, 4)), np.zeros((0, 0)), los_power=1.0)
    n_c = env.clusters_los if los else env.clusters_nlos
    n_r = env.rays_per_cluster
    if n_c < 1 or n_r < 1:
        raise ValueError("need at least one cluster and one ray")
    r_tau = env.delay_scaling_los if los else env.delay_scaling_nlos
    tau = np.sort(-r_tau * np.log(rng.uniform(size=n_c)))
    tau -= tau[0]
    shadow = env.cluster_shadow_std * rng.standard_normal(n_c)
    power = np.exp(-tau * (r_tau - 1.0) / r_tau) * 10.0 ** (-shadow / 10.0)
    power /= power.sum()
    spreads = np.radians([env.spread_asd, env.spread_zsd, env.spread_asa, env.spread_zsa])
    centres = _wrap_angle(rng.standard_normal((n_c, 4)) * spreads)
    ray_scale = np.radians([env.ray_asd, env.ray_zsd, env.ray_asa, env.ray_zsa]) / np.sqrt(2.0)
    offsets = rng.laplace(size=(n_c, n_r, 4)) * ray_scale
    phases = np.pi - rng.uniform(0.0, 2 * np.pi, size=(n_c, n_r))
    los_power = 0.0
    if los:
        k = 10.0 ** (env.k_factor_db / 10.0)
        power = power / (k + 1.0)
        los_power = k / (k + 1.0)
        centres[0] = 0.0  # strongest cluster stays on the LOS direction
    return ClusterSet(power, centres, offsets, phases, los_power)


def stack_rays(cluster_sets) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Pad a list of ClusterSets to common ray count: ``(power, angles, phases, specular)``."""
    tables = [c.rays() for c in cluster_sets]
    n = max(t[0].size for t in tables)
    L = len(tables)
    power = np.zeros((L, n))
    angles = np.zeros((L, n, 4))
    phases = np.zeros((L, n))
    spec = np.zeros(L, dtype=bool)
    for i, (p, a, ph, s) in enumerate(tables):
        power[i, : p.size] = p
        angles[i, : p.size] = a
        phases[i, : p.size] = ph
        spec[i] = s
    return power, angles, phases, spec


def synth_links(
    tx_panel: AntennaPanel,
    rx_panel: AntennaPanel,
    tx_xyz: np.ndarray,
    rx_xyz: np.ndarray,
    ray_power: np.ndarray,
    ray_angles: np.ndarray,
    ray_phases: np.ndarray,
    specular: np.ndarray,
    loss_db: np.ndarray,
    env: EnvProfile,
    doppler: DopplerSpec | None = None,
    role: LinkRole = LinkRole.DIRECT,
) -> np.ndarray:
    """Batched link synthesis; returns ``(L, N_rx, N_tx)`` complex matrices.

    Ray tables are ``(L, R)`` (angles ``(L, R, 4)``), as produced by
    :func:`stack_rays`.
    """
    tx = np.atleast_2d(np.asarray(tx_xyz, dtype=float))
    rx = np.atleast_2d(np.asarray(rx_xyz, dtype=float))
    d = rx - tx
    d3d = np.linalg.norm(d, axis=-1)
    dep = direction_of(d)
    arr = direction_of(-d)
    dep_zen = dep.zenith[:, None] + ray_angles[..., 1]
    dep_az = dep.azimuth[:, None] + ray_angles[..., 0]
    arr_zen = arr.zenith[:, None] + ray_angles[..., 3]
    arr_az = arr.azimuth[:, None] + ray_angles[..., 2]
    v_dep = spherical_unit_vector(DirectionLocal(dep_zen, dep_az))
    v_arr = spherical_unit_vector(DirectionLocal(arr_zen, arr_az))
    v_tx = tx_panel.to_local(v_dep)
    v_rx = rx_panel.to_local(v_arr)

    amp = element_amplitude(tx_panel.pattern, direction_of(v_tx)) * element_amplitude(
        rx_panel.pattern, direction_of(v_rx)
    )
    phase = np.array(ray_phases, dtype=float)
    lam = env.wavelength
    phase[:, 0] = np.where(specular, -2 * np.pi * d3d / lam, phase[:, 0])
    if doppler is not None and role is not LinkRole.BS_TO_RIS and doppler.speed * doppler.time != 0:
        phase = phase + 2 * np.pi * (v_arr @ doppler.velocity()) * doppler.time / lam
    coef = np.sqrt(ray_power) * amp * np.exp(1j * phase)

    rx_py, rx_pz = phase_steps(rx_panel, v_rx)
    tx_py, tx_pz = phase_steps(tx_panel, v_tx)
    out = _kernels.ray_sum(coef, rx_py, rx_pz, tx_py, tx_pz, rx_panel.shape, tx_panel.shape)
    scale = 10.0 ** (-np.asarray(loss_db, dtype=float) / 20.0)
    return out * np.reshape(scale, (-1, 1, 1))


def synth_link(
    tx_panel: AntennaPanel,
    rx_panel: AntennaPanel,
    tx_xyz: np.ndarray,
    rx_xyz: np.ndarray,
    clusters: ClusterSet,
    large: LargeScale,
    env: EnvProfile,
    doppler: DopplerSpec | None = None,
    role: LinkRole = LinkRole.DIRECT,
) -> LinkChannel:
    """Synthesize one link; ``tx_xyz``/``rx_xyz`` are the (wrap-adjusted) end points."""
    power, angles, phases, spec = stack_rays([clusters])
    matrix = synth_links(
        tx_panel, rx_panel, tx_xyz, rx_xyz, power, angles, phases, spec, [large.loss_db], env, doppler, role
    )[0]
    return LinkChannel(matrix, large, role)


def _as_matrix(x) -> np.ndarray:
    return np.atleast_2d(x.matrix if isinstance(x, LinkChannel) else np.asarray(x))


def effective_channel(h_direct, f, g, theta) -> np.ndarray:
    """``H + F diag(exp(j theta)) G``; ``theta`` is a PhaseConfig or a phase vector."""
    h = _as_matrix(h_direct)
    fm = _as_matrix(f)
    gm = _as_matrix(g)
    phases = np.asarray(getattr(theta, "phases", theta), dtype=float)
    u, m = h.shape
    if fm.shape[0] != u or gm.shape[1] != m or fm.shape[1] != gm.shape[0] or phases.size != gm.shape[0]:
        raise ValueError(
            f"dimension mismatch: H {h.shape}, F {fm.shape}, G {gm.shape}, theta {phases.size}"
        )
    return h + (fm * np.exp(1j * phases)) @ gm
