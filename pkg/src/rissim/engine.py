"""Monte-Carlo driver: drops, attachment, RIS configuration, interference and aggregation.

Every random quantity in a drop comes from its own stream, keyed by
``(seed, drop, purpose, ...)``, so results do not depend on the strategy list,
the thread count or the order in which drops are evaluated.
"""

from __future__ import annotations

import logging
import math
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields, replace
from functools import cached_property

import numpy as np

from .arrays import AntennaPanel, ElementPattern, direction_of
from .channel import (
    DopplerSpec,
    EnvProfile,
    LinkRole,
    draw_large_scale,
    stack_rays,
    synth_clusters,
    synth_links,
)
from .geometry import NetworkLayout, UserDrop, build_hex_layout, drop_users, nearest_image_offsets, place_ris
from .metrics import (
    DropMetrics,
    EmpiricalCdf,
    coupling_loss_db,
    dbm_to_watts,
    empirical_cdf,
    noise_power_dbm,
    spectral_efficiency,
)
from .ris import ideal_phases, make_codebook, quantize_phases, random_phases

log = logging.getLogger(__name__)

STRATEGY_KINDS = ("no_ris", "random", "ideal", "discrete", "codebook")

# stream purposes
_S_DROP, _S_DIRECT, _S_RIS_USER, _S_BS_RIS, _S_SCHED, _S_RANDOM = range(6)


@dataclass(frozen=True)
class Strategy:
    kind: str
    levels: int | None = None
    beams: int | None = None

    def __post_init__(self):
        if self.kind not in STRATEGY_KINDS:
            raise ValueError(f"unknown strategy {self.kind!r}; expected one of {', '.join(STRATEGY_KINDS)}")
        if self.kind == "discrete" and (self.levels is None or self.levels < 1):
            raise ValueError("discrete strategy needs levels >= 1")
        if self.kind == "codebook" and (self.beams is None or self.beams < 1):
            raise ValueError("codebook strategy needs beams >= 1")

    @property
    def label(self) -> str:
        if self.kind == "discrete":
            return f"discrete{self.levels}"
        if self.kind == "codebook":
            return f"codebook{self.beams}"
        return self.kind

    @classmethod
    def parse(cls, text: str, levels: int | None = None, beams: int | None = None) -> "Strategy":
        """Accepts ``ideal``, ``discrete``, ``discrete16``, ``discrete:16``, ``codebook:8`` and so on."""
        m = re.fullmatch(r"\s*([a-z_]+?)(?::?(\d+))?\s*", text.lower())
        if not m:
            raise ValueError(f"cannot parse strategy {text!r}")
        kind, num = m.group(1), m.group(2)
        if num is not None:
            if kind == "discrete":
                levels = int(num)
            elif kind == "codebook":
                beams = int(num)
            else:
                raise ValueError(f"strategy {kind!r} takes no parameter")
        return cls(kind, levels if kind == "discrete" else None, beams if kind == "codebook" else None)


@dataclass(frozen=True)
class SimConfig:
    # layout
    isd: float = 500.0
    rings: int = 1
    bs_height: float = 25.0
    ris_height: float = 10.0
    ue_height: float = 1.5
    min_distance: float = 35.0
    downtilt: float = 12.0
    users_per_sector: int = 10
    # panels
    bs_horizontal: int = 10
    bs_vertical: int = 4
    ris_horizontal: int = 16
    ris_vertical: int = 16
    ue_antennas: int = 1
    spacing: float = 0.5
    # strategy
    strategy: str = "ideal"
    levels: int | None = None
    beams: int = 8
    codebook_span: float = 120.0
    codebook_zenith: float = 90.0
    # run
    drops: int = 20
    seed: int = 0
    tx_power_dbm: float = 43.0
    bandwidth_hz: float = 10e6
    noise_figure_db: float = 9.0
    interference: bool = True
    speed: float = 0.0
    time: float = 0.0
    env: EnvProfile = field(default_factory=EnvProfile)

    def __post_init__(self):
        for name in ("rings", "users_per_sector", "bs_horizontal", "bs_vertical", "ris_horizontal",
                     "ris_vertical", "drops", "beams"):
            if getattr(self, name) < (0 if name == "rings" else 1):
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")
        if self.ue_antennas != 1:
            raise ValueError("only single-antenna users are supported")
        if not (0 <= self.seed < 2**64):
            raise ValueError("seed must be an unsigned 64-bit integer")
        if self.levels is not None and self.levels < 1:
            raise ValueError(f"levels must be >= 1, got {self.levels}")
        self.default_strategy()  # validates strategy / levels

    def default_strategy(self) -> Strategy:
        return Strategy.parse(self.strategy, self.levels, self.beams)

    @cached_property
    def layout(self) -> NetworkLayout:
        return place_ris(build_hex_layout(self.isd, self.rings, self.bs_height, self.downtilt), self.ris_height)

    @property
    def noise_dbm(self) -> float:
        return noise_power_dbm(self.bandwidth_hz, self.noise_figure_db)

    def scaled(self, s: float) -> "SimConfig":
        """Copy with every length (ISD, heights, minimum distance) multiplied by ``s``."""
        return replace(
            self,
            isd=self.isd * s,
            bs_height=self.bs_height * s,
            ris_height=self.ris_height * s,
            ue_height=self.ue_height * s,
            min_distance=self.min_distance * s,
        )

    def as_dict(self) -> dict:
        out = {f.name: getattr(self, f.name) for f in fields(self) if f.name != "env"}
        out["env"] = {f.name: getattr(self.env, f.name) for f in fields(self.env)}
        return out


@dataclass
class DropChannels:
    """Per-drop channel snapshot (``S`` sectors, ``K`` users)."""

    h: np.ndarray  # (S, K, M) direct
    f: np.ndarray  # (S, K, N) RIS of sector s -> user
    g: np.ndarray  # (S, N, M) BS of sector s -> its own RIS
    users: UserDrop
    scheduled: np.ndarray  # (S,) scheduled user per sector


@dataclass
class DropResult:
    drop_index: int
    metrics: dict[str, DropMetrics]
    channels: DropChannels | None = None


def _rng(seed: int, *key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=tuple(int(k) for k in key)))


def _panels(cfg: SimConfig, layout: NetworkLayout):
    bs = [
        AntennaPanel(cfg.bs_horizontal, cfg.bs_vertical, cfg.spacing, cfg.spacing, s.boresight_azimuth, s.downtilt,
                     ElementPattern.SECTORAL_3GPP)
        for s in layout.sectors
    ]
    ris = [
        AntennaPanel(cfg.ris_horizontal, cfg.ris_vertical, cfg.spacing, cfg.spacing, r.boresight_azimuth, 0.0,
                     ElementPattern.PASSIVE_REFLECTOR)
        for r in layout.ris
    ]
    ue = AntennaPanel(1, 1, pattern=ElementPattern.OMNI)
    return bs, ris, ue


def _link_batch(cfg, seed, key_prefix, tx_xyz, rx_xyz, force_los):
    """Large-scale and cluster draws for a batch of links, one stream per link."""
    losses, sets = [], []
    for i, (tx, rx) in enumerate(zip(tx_xyz, rx_xyz)):
        rng = _rng(seed, *key_prefix, i)
        d2d = float(np.hypot(*(rx[:2] - tx[:2])))
        d3d = float(np.linalg.norm(rx - tx))
        ls = draw_large_scale(d2d, d3d, tx[2], rx[2], cfg.env, rng, force_los)
        losses.append(ls.loss_db)
        sets.append(synth_clusters(cfg.env, ls.is_los, rng))
    return np.array(losses), stack_rays(sets)


def synthesize_drop(cfg: SimConfig, drop_index: int, with_ris: bool = True) -> DropChannels:
    """Draw users and all H, F, G channels of one drop.

    With ``with_ris=False`` the RIS links are left at zero; the direct links,
    attachment and scheduling are unchanged because every link has its own stream.
    """
    layout = cfg.layout
    seed = cfg.seed
    users = drop_users(layout, cfg.users_per_sector, cfg.min_distance, _rng(seed, drop_index, _S_DROP), cfg.ue_height)
    bs_panels, ris_panels, ue_panel = _panels(cfg, layout)
    doppler = DopplerSpec(cfg.speed, cfg.time)
    ue_xyz = users.positions
    n_users = len(users)
    n_sec = layout.num_sectors
    bs_xyz = layout.sector_bs_xyz()
    ris_xyz = layout.ris_xyz()

    m = bs_panels[0].n_elements
    n = ris_panels[0].n_elements
    h = np.empty((n_sec, n_users, m), dtype=complex)
    f = np.zeros((n_sec, n_users, n), dtype=complex)
    g = np.zeros((n_sec, n, m), dtype=complex)

    # direct links: large-scale and clusters are per (site, user), shared by the site's sectors
    site_xyz = np.column_stack([layout.site_xy, np.full(layout.num_sites, cfg.bs_height)])
    off = nearest_image_offsets(layout, layout.site_xy, ue_xyz[:, :2])  # (sites, K, 2)
    for site in range(layout.num_sites):
        tx = np.repeat(site_xyz[site][None, :], n_users, axis=0)
        tx[:, :2] += off[site]
        loss, rays = _link_batch(cfg, seed, (drop_index, _S_DIRECT, site), tx, ue_xyz, None)
        for sec in range(3):
            s = 3 * site + sec
            h[s] = synth_links(bs_panels[s], ue_panel, tx, ue_xyz, *rays, loss, cfg.env, doppler,
                               LinkRole.DIRECT)[:, 0, :]

    off = nearest_image_offsets(layout, ris_xyz[:, :2], ue_xyz[:, :2])  # (S, K, 2)
    for s in range(n_sec if with_ris else 0):
        tx = np.repeat(ris_xyz[s][None, :], n_users, axis=0)
        tx[:, :2] += off[s]
        loss, rays = _link_batch(cfg, seed, (drop_index, _S_RIS_USER, s), tx, ue_xyz, None)
        f[s] = synth_links(ris_panels[s], ue_panel, tx, ue_xyz, *rays, loss, cfg.env, doppler,
                           LinkRole.RIS_TO_USER)[:, 0, :]

    force = True if cfg.env.force_los_bs_ris else None
    for s in range(n_sec if with_ris else 0):
        loss, rays = _link_batch(cfg, seed, (drop_index, _S_BS_RIS, s), bs_xyz[s : s + 1], ris_xyz[s : s + 1], force)
        g[s] = synth_links(bs_panels[s], ris_panels[s], bs_xyz[s : s + 1], ris_xyz[s : s + 1], *rays, loss, cfg.env,
                           None, LinkRole.BS_TO_RIS)[0]

    serving = attach_users(h)
    users.serving_sector = serving
    scheduled = schedule_users(serving, users.drop_sector, n_sec, _rng(seed, drop_index, _S_SCHED))
    return DropChannels(h, f, g, users, scheduled)


def attach_users(h: np.ndarray) -> np.ndarray:
    """Serving sector per user: maximum direct-link power ``||H||^2``, lowest index on ties."""
    power = np.sum(np.abs(h) ** 2, axis=-1)  # (S, K)
    return np.argmax(power, axis=0)


def schedule_users(serving: np.ndarray, drop_sector: np.ndarray, n_sectors: int, rng: np.random.Generator):
    """One uniformly chosen attached user per sector (users dropped there if none attached)."""
    out = np.empty(n_sectors, dtype=np.int64)
    for s in range(n_sectors):
        pool = np.flatnonzero(serving == s)
        if pool.size == 0:
            pool = np.flatnonzero(drop_sector == s)
        out[s] = pool[rng.integers(pool.size)]
    return out


def _mrt(h: np.ndarray) -> np.ndarray:
    nrm = np.linalg.norm(h)
    return np.conj(h) / nrm if nrm > 0 else np.full(h.shape, 1 / math.sqrt(h.size), dtype=complex)


def anchor_precoder(h: np.ndarray, f: np.ndarray, g: np.ndarray) -> np.ndarray:
    """Transmit vector used to reduce the multi-antenna link to per-element cascade terms.

    Picks MRT on the direct link or the dominant right singular vector of the
    cascade, whichever gives the larger co-phased amplitude ``|H w| + sum |r_n|``.
    """
    cascade = f[:, None] * g
    vh = np.linalg.svd(cascade, full_matrices=False)[2]
    best, best_val = None, -1.0
    for w in (_mrt(h), np.conj(vh[0])):
        val = abs(h @ w) + np.sum(np.abs(cascade @ w))
        if val > best_val:
            best, best_val = w, val
    return best


def select_best_beam(coeffs: np.ndarray, h: np.ndarray, f: np.ndarray, g: np.ndarray, tx_power: float = 1.0):
    """Best codebook beam by ``P ||h_eq||^2``; ``None`` when the direct link alone is stronger.

    ``coeffs`` is the ``(B, N)`` coefficient matrix of the codebook.
    """
    if len(coeffs) == 0:
        raise ValueError("empty codebook")
    heq = h[None, :] + (f[None, :] * coeffs) @ g  # (B, M)
    power = tx_power * np.sum(np.abs(heq) ** 2, axis=1)
    b = int(np.argmax(power))
    direct = tx_power * float(np.sum(np.abs(h) ** 2))
    if direct >= power[b]:
        return None, direct
    return b, float(power[b])


class _DropEvaluator:
    """RIS configuration and metrics for one drop, shared across strategies."""

    def __init__(self, cfg: SimConfig, ch: DropChannels, drop_index: int):
        self.cfg = cfg
        self.ch = ch
        self.drop_index = drop_index
        self._anchor: dict[tuple[int, int], np.ndarray] = {}
        self._codebooks: dict[tuple[int, int], np.ndarray] = {}
        self._random: dict[int, np.ndarray] = {}

    def anchor(self, s: int, k: int) -> np.ndarray:
        key = (s, k)
        if key not in self._anchor:
            self._anchor[key] = anchor_precoder(self.ch.h[s, k], self.ch.f[s, k], self.ch.g[s])
        return self._anchor[key]

    def codebook(self, s: int, n_beams: int) -> np.ndarray:
        key = (s, n_beams)
        if key not in self._codebooks:
            cfg = self.cfg
            layout = cfg.layout
            panel = AntennaPanel(cfg.ris_horizontal, cfg.ris_vertical, cfg.spacing, cfg.spacing,
                                 layout.ris[s].boresight_azimuth, 0.0, ElementPattern.PASSIVE_REFLECTOR)
            to_bs = layout.sectors[s].bs_position.as_array() - layout.ris[s].position.as_array()
            aoa = direction_of(panel.to_local(to_bs))
            cb = make_codebook(panel, aoa, n_beams, cfg.codebook_span, cfg.codebook_zenith)
            self._codebooks[key] = cb.coefficient_matrix()
        return self._codebooks[key]

    def random(self, s: int) -> np.ndarray:
        if s not in self._random:
            rng = _rng(self.cfg.seed, self.drop_index, _S_RANDOM, s)
            self._random[s] = random_phases(self.ch.g.shape[1], rng).coefficients
        return self._random[s]

    def configure(self, strategy: Strategy, s: int, k: int):
        """Reflection coefficients of sector ``s``'s RIS when serving user ``k`` (``None`` = RIS off)."""
        ch = self.ch
        if strategy.kind == "no_ris":
            return None, -1
        if strategy.kind == "random":
            return self.random(s), -1
        if strategy.kind == "codebook":
            coeffs = self.codebook(s, strategy.beams)
            b, _ = select_best_beam(coeffs, ch.h[s, k], ch.f[s, k], ch.g[s])
            return (None, -1) if b is None else (coeffs[b], b)
        w = self.anchor(s, k)
        cfg_ph = ideal_phases(complex(ch.h[s, k] @ w), ch.f[s, k] * (ch.g[s] @ w))
        if strategy.kind == "discrete":
            cfg_ph = quantize_phases(cfg_ph, strategy.levels)
        return cfg_ph.coefficients, -1

    def effective(self, s: int, users: np.ndarray, coeffs) -> np.ndarray:
        h = self.ch.h[s, users]
        if coeffs is None:
            return h
        return h + (self.ch.f[s, users] * coeffs) @ self.ch.g[s]

    def evaluate(self, strategy: Strategy) -> DropMetrics:
        cfg, ch = self.cfg, self.ch
        n_sec = ch.h.shape[0]
        n_users = ch.h.shape[1]
        p_tx = float(dbm_to_watts(cfg.tx_power_dbm))
        noise = float(dbm_to_watts(cfg.noise_dbm))
        serving = ch.users.serving_sector

        # every sector transmits to its own scheduled user
        sector_coeffs, precoders = [], np.empty((n_sec, ch.h.shape[2]), dtype=complex)
        for s in range(n_sec):
            coeffs, _ = self.configure(strategy, s, ch.scheduled[s])
            sector_coeffs.append(coeffs)
            precoders[s] = _mrt(self.effective(s, ch.scheduled[s : s + 1], coeffs)[0])

        signal = np.empty(n_users)
        beams = np.full(n_users, -1, dtype=np.int64)
        for k in range(n_users):
            s = serving[k]
            coeffs, beams[k] = self.configure(strategy, s, k)
            signal[k] = p_tx * np.sum(np.abs(self.effective(s, np.array([k]), coeffs)) ** 2)

        interference = np.zeros(n_users)
        if cfg.interference:
            everyone = np.arange(n_users)
            for j in range(n_sec):
                heq = self.effective(j, everyone, sector_coeffs[j])
                pj = p_tx * np.abs(heq @ precoders[j]) ** 2
                pj[serving == j] = 0.0
                interference += pj

        with np.errstate(divide="ignore"):
            rx_dbm = 10 * np.log10(signal) + 30.0
            snr = signal / noise
            sinr_lin = signal / (interference + noise)
            return DropMetrics(
                coupling_loss_db=coupling_loss_db(cfg.tx_power_dbm, rx_dbm),
                sinr_db=10 * np.log10(sinr_lin),
                snr_db=10 * np.log10(snr),
                spectral_eff=spectral_efficiency(sinr_lin),
                serving_sector=serving.copy(),
                best_beam=beams,
            )


def resolve_strategies(cfg: SimConfig, strategies=None) -> list[Strategy]:
    if strategies is None:
        return [cfg.default_strategy()]
    out = []
    for s in strategies:
        out.append(s if isinstance(s, Strategy) else Strategy.parse(s, cfg.levels, cfg.beams))
    return out


def run_drop(cfg: SimConfig, drop_index: int, strategies=None, keep_channels: bool = False) -> DropResult:
    strats = resolve_strategies(cfg, strategies)
    ch = synthesize_drop(cfg, drop_index, keep_channels or any(st.kind != "no_ris" for st in strats))
    ev = _DropEvaluator(cfg, ch, drop_index)
    metrics = {st.label: ev.evaluate(st) for st in strats}
    return DropResult(drop_index, metrics, ch if keep_channels else None)


@dataclass
class CampaignResult:
    config: SimConfig
    strategies: list[Strategy]
    metrics: dict[str, DropMetrics]

    def cdfs(self, label: str) -> dict[str, EmpiricalCdf]:
        m = self.metrics[label]
        return {
            "coupling_loss": empirical_cdf(m.coupling_loss_db),
            "sinr": empirical_cdf(m.sinr_db),
            "spectral_efficiency": empirical_cdf(m.spectral_eff),
        }

    def summary(self) -> dict:
        out = {}
        for label in self.metrics:
            stats = {}
            for name, cdf in self.cdfs(label).items():
                p5, p50, p95 = cdf.percentile([5, 50, 95])
                stats[name] = {"p5": float(p5), "p50": float(p50), "p95": float(p95)}
            stats["users"] = len(self.metrics[label])
            out[label] = stats
        return out


def run_campaign(cfg: SimConfig, strategies=None, threads: int = 1) -> CampaignResult:
    """Run ``cfg.drops`` drops (optionally on a thread pool) and concatenate in drop order."""
    strats = resolve_strategies(cfg, strategies)
    cfg.layout  # build once before threads share it

    def one(d):
        log.debug("drop %d", d)
        return run_drop(cfg, d, strats)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(one, range(cfg.drops)))
    else:
        results = [one(d) for d in range(cfg.drops)]
    metrics = {st.label: DropMetrics.concat(r.metrics[st.label] for r in results) for st in strats}
    return CampaignResult(cfg, strats, metrics)
