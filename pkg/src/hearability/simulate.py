"""Monte Carlo ground truth for hearability probabilities.

Samples deployments (Poisson or hex grid), applies the exact SINR
recipe with no analytic approximation, and estimates ``P_L`` and the
detectable-BS count ``Upsilon``.

Reproducibility contract: every realization ``i`` draws from
counter-based Philox streams keyed by ``(seed, i, role)``, one role per
kind of draw (geometry, activity, bands, shadowing, ...).  Results are
therefore bit-identical across worker counts and unchanged if new draw
roles are added later.

Threshold sweeps exploit that the per-BS SINRs do not depend on the
detection threshold: one pass stores per-realization SINR margins, then
any grid of ``beta/gamma`` values is answered by comparisons.
"""

from __future__ import annotations

import dataclasses
import enum
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .model import (
    Realization,
    Scenario,
    ShadowingSpec,
    effective_density,
    hex_grid_density,
)

__all__ = [
    "Deployment",
    "TruthMode",
    "SimConfig",
    "McEstimate",
    "sample_ppp",
    "sample_hex",
    "sample_conditional_bpp",
    "participation_metric",
    "estimate_pl",
    "estimate_pl_curve",
    "estimate_pl_reuse",
    "reuse_success_curve",
    "hearability_curve",
    "collect_margins",
    "collect_upsilon",
    "collect_band_cummins",
]

# Stream roles; their values are part of the reproducibility contract.
_ROLE_GEOMETRY = 0
_ROLE_ACTIVITY = 1
_ROLE_BANDS = 2
_ROLE_SHADOW = 3
_ROLE_OFFSET = 4
_ROLE_SCAN = 5
ROLE_E911 = 6


class Deployment(str, enum.Enum):
    PPP = "ppp"
    HEX = "hex"


class TruthMode(str, enum.Enum):
    """Which event defines Monte Carlo success.

    ``JOINT_ALL_L`` requires every one of the L nearest BSs to clear the
    threshold (the definition of P_L).  ``LAST_BS_ONLY`` checks only the
    L-th BS, the usual bottleneck.
    """

    JOINT_ALL_L = "joint"
    LAST_BS_ONLY = "last"


@dataclass(frozen=True)
class SimConfig:
    """Simulation controls, orthogonal to the network scenario.

    Attributes:
        realizations: number of independent deployments.
        seed: master seed for the keyed streams.
        expected_bs: mean number of BSs inside the sampling window; the
            window radius is chosen to make the window-edge truncation
            negligible for the first L BSs (requires >= 10 * L).
        deployment: Poisson or hex-grid placement.
        hex_isd: intersite distance of the hex lattice.
        shadow: log-normal shadowing.  For Poisson deployments shadowing
            enters analytically through the effective density; for hex
            grids it is drawn per link and folded into equivalent
            distances.
        truth_mode: success event for estimate_pl.
        upsilon_cap: largest detectable-count tracked by the Upsilon
            scan.
        coupled_activity: when True (default) the Upsilon scan reuses
            one uniform per BS across candidate participant counts;
            when False each candidate count redraws activity marks.
    """

    realizations: int
    seed: int
    expected_bs: int = 1000
    deployment: Deployment = Deployment.PPP
    hex_isd: float = 500.0
    shadow: ShadowingSpec = field(default_factory=ShadowingSpec)
    truth_mode: TruthMode = TruthMode.JOINT_ALL_L
    upsilon_cap: int = 32
    coupled_activity: bool = True

    def __post_init__(self) -> None:
        if not isinstance(self.realizations, (int, np.integer)) or self.realizations < 1:
            raise ValueError(f"realizations must be >= 1, got {self.realizations!r}")
        if not isinstance(self.seed, (int, np.integer)) or self.seed < 0:
            raise ValueError(f"seed must be a nonnegative integer, got {self.seed!r}")
        if not isinstance(self.expected_bs, (int, np.integer)) or self.expected_bs < 10:
            raise ValueError(f"expected_bs must be >= 10, got {self.expected_bs!r}")
        if not (self.hex_isd > 0.0 and math.isfinite(self.hex_isd)):
            raise ValueError(f"hex_isd must be positive, got {self.hex_isd}")
        if not isinstance(self.upsilon_cap, (int, np.integer)) or self.upsilon_cap < 1:
            raise ValueError(f"upsilon_cap must be >= 1, got {self.upsilon_cap!r}")

    def replace(self, **changes) -> "SimConfig":
        return dataclasses.replace(self, **changes)


@dataclass(frozen=True)
class McEstimate:
    """A Monte Carlo probability estimate with its binomial stderr."""

    estimate: float
    stderr: float
    n: int
    successes: int

    @staticmethod
    def from_successes(successes: int, n: int) -> "McEstimate":
        mean = successes / n
        return McEstimate(mean, math.sqrt(mean * (1.0 - mean) / n), n, successes)


def stream(seed: int, index: int, role: int) -> np.random.Generator:
    """Counter-based generator keyed by (seed, realization index, role)."""
    return np.random.Generator(
        np.random.Philox(np.random.SeedSequence(seed, spawn_key=(index, role)))
    )


def _check_window(scenario: Scenario, config: SimConfig) -> None:
    if config.expected_bs < 10 * scenario.L:
        raise ValueError(
            f"expected_bs={config.expected_bs} is too small for L={scenario.L}; "
            "need at least 10 * L so window-edge truncation stays negligible"
        )


def sample_ppp(scenario: Scenario, config: SimConfig, index: int) -> Realization:
    """Sample one Poisson deployment as distances from the device.

    Shadowing, when enabled, is applied through the effective-density
    transform so the sampled distances are already equivalent distances.
    """
    _check_window(scenario, config)
    lam_eff = effective_density(scenario.lam, scenario.alpha, config.shadow)
    window = math.sqrt(config.expected_bs / (lam_eff * math.pi))
    geom = stream(config.seed, index, _ROLE_GEOMETRY)
    n = int(geom.poisson(config.expected_bs))
    radii = window * np.sqrt(geom.random(n))
    radii.sort()
    u = stream(config.seed, index, _ROLE_ACTIVITY).random(n)
    activity = u < np.where(np.arange(n) < scenario.L, scenario.p, scenario.q)
    if scenario.K > 1:
        bands = stream(config.seed, index, _ROLE_BANDS).integers(
            1, scenario.K + 1, size=n
        )
    else:
        bands = np.ones(n, dtype=np.int64)
    return Realization(radii, activity, bands, u, window)


_HEX_CACHE: dict[tuple[float, int], np.ndarray] = {}


def _hex_lattice(isd: float, count: int) -> np.ndarray:
    """Triangular-lattice sites covering comfortably more than ``count``."""
    key = (isd, count)
    cached = _HEX_CACHE.get(key)
    if cached is not None:
        return cached
    density = hex_grid_density(isd)
    radius = math.sqrt(count / (density * math.pi)) * 1.25 + 2.0 * isd
    reach = int(math.ceil(radius / (isd * math.sqrt(3.0) / 2.0))) + 2
    m, n = np.meshgrid(np.arange(-reach, reach + 1), np.arange(-reach, reach + 1))
    m = m.ravel()
    n = n.ravel()
    x = isd * (m + 0.5 * n)
    y = isd * (math.sqrt(3.0) / 2.0) * n
    keep = x * x + y * y <= radius * radius
    sites = np.column_stack((x[keep], y[keep]))
    _HEX_CACHE[key] = sites
    return sites


def sample_hex(scenario: Scenario, config: SimConfig, index: int) -> Realization:
    """Sample one hex-grid deployment with per-link shadowing.

    The lattice is translated by a uniform offset inside one fundamental
    cell, equivalent to placing the user uniformly in a cell.  Per-link
    shadowing ``S`` is folded into equivalent distances
    ``S**(-1/alpha) * d`` so that sorting by distance is sorting by
    received power (strongest-BS ordering).
    """
    _check_window(scenario, config)
    isd = config.hex_isd
    sites = _hex_lattice(isd, config.expected_bs)
    u1, u2 = stream(config.seed, index, _ROLE_OFFSET).random(2)
    offset = u1 * np.array([isd, 0.0]) + u2 * np.array(
        [0.5 * isd, isd * math.sqrt(3.0) / 2.0]
    )
    pos = sites + offset
    d_phys = np.hypot(pos[:, 0], pos[:, 1])
    nearest = np.argpartition(d_phys, config.expected_bs)[: config.expected_bs]
    nearest = nearest[np.argsort(d_phys[nearest], kind="stable")]
    d_kept = d_phys[nearest]
    if config.shadow.enabled and config.shadow.sigma_db > 0.0:
        x_db = stream(config.seed, index, _ROLE_SHADOW).normal(
            0.0, config.shadow.sigma_db, size=config.expected_bs
        )
        shadow = 10.0 ** (x_db / 10.0)
        d_eq = shadow ** (-1.0 / scenario.alpha) * d_kept
    else:
        d_eq = d_kept
    order = np.argsort(d_eq, kind="stable")
    d_eq = d_eq[order]
    u = stream(config.seed, index, _ROLE_ACTIVITY).random(config.expected_bs)
    activity = u < np.where(
        np.arange(config.expected_bs) < scenario.L, scenario.p, scenario.q
    )
    if scenario.K > 1:
        bands = stream(config.seed, index, _ROLE_BANDS).integers(
            1, scenario.K + 1, size=config.expected_bs
        )
    else:
        bands = np.ones(config.expected_bs, dtype=np.int64)
    return Realization(d_eq, activity, bands, u, float(np.max(d_kept)))


def sample_conditional_bpp(
    region: str,
    count: int,
    inner_radius: float,
    outer_radius: float,
    rng: np.random.Generator,
) -> np.ndarray:
    """Distances of ``count`` uniform points on a disk or annulus.

    ``region`` is ``"disk"`` (inner radius ignored) or ``"annulus"``.
    Uniformity on the region means the squared radius is uniform between
    the squared bounds.  Returns unsorted distances.
    """
    if region not in ("disk", "annulus"):
        raise ValueError(f"region must be 'disk' or 'annulus', got {region!r}")
    if not isinstance(count, (int, np.integer)) or count < 0:
        raise ValueError(f"count must be a nonnegative integer, got {count!r}")
    if not (outer_radius > 0.0 and math.isfinite(outer_radius)):
        raise ValueError(f"outer_radius must be positive, got {outer_radius}")
    inner = 0.0 if region == "disk" else inner_radius
    if not (0.0 <= inner <= outer_radius):
        raise ValueError(
            f"inner_radius must lie in [0, outer_radius], got {inner_radius}"
        )
    u = rng.random(count)
    return np.sqrt(inner * inner + u * (outer_radius * outer_radius - inner * inner))


# --- per-realization statistics -------------------------------------------


def _received_powers(realization: Realization, scenario: Scenario) -> np.ndarray:
    return scenario.tx_power * realization.distances ** (-scenario.alpha)


def _joint_last_margins(
    pw: np.ndarray, u: np.ndarray, L: int, p: float, q: float, sigma2: float
) -> tuple[float, float]:
    """(min SINR over the L nearest, SINR of the L-th) for one realization."""
    if len(pw) < L:
        return (-math.inf, -math.inf)
    act_p = u[:L] < p
    act_q = u[L:] < q
    t_part = float(np.sum(pw[:L], where=act_p))
    t_bg = float(np.sum(pw[L:], where=act_q))
    denom = t_part - np.where(act_p, pw[:L], 0.0) + t_bg + sigma2
    with np.errstate(divide="ignore"):
        sinr = np.where(denom > 0.0, pw[:L] / denom, math.inf)
    return (float(np.min(sinr)), float(sinr[L - 1]))


def _leading_pass_count(
    pw: np.ndarray, u: np.ndarray, q: float, sigma2: float, thr: float, cap: int
) -> int:
    """Detectable count when muting equals load (p == q, single band).

    The per-BS SINR then does not depend on how many BSs participate,
    and it decreases with distance among active BSs, so the detectable
    set is the longest prefix of passing BSs.
    """
    act = u < q
    total = float(np.sum(pw, where=act))
    denom = total - np.where(act, pw, 0.0) + sigma2
    ok = pw >= thr * denom
    m = min(cap, len(pw))
    if m == 0:
        return 0
    head = ~ok[:m]
    return int(np.argmax(head)) if head.any() else m


def _band_sinr_cummin(
    pw: np.ndarray, u: np.ndarray, q: float, sigma2: float, cap: int
) -> np.ndarray:
    """Prefix-min SINR of the nearest band members (p == q), padded -inf."""
    act = u < q
    total = float(np.sum(pw, where=act))
    denom = total - np.where(act, pw, 0.0) + sigma2
    m = min(cap, len(pw))
    out = np.full(cap, -math.inf)
    if m == 0:
        return out
    with np.errstate(divide="ignore"):
        sinr = np.where(denom[:m] > 0.0, pw[:m] / denom[:m], math.inf)
    out[:m] = np.minimum.accumulate(sinr)
    return out


def participation_metric(
    realization: Realization,
    scenario: Scenario,
    cap: int = 32,
    independent_u: np.ndarray | None = None,
) -> int:
    """Number of detectable BSs Upsilon for one realization.

    Upsilon is the largest candidate participant count ``ell`` (up to
    ``cap``, per band, summed over bands) for which the device detects
    all ``ell`` nearest band members while exactly those participate.
    For ``p == q`` this is the longest prefix of band members whose SINR
    clears ``beta/gamma``, and ``P(Upsilon >= L)`` equals the
    joint-detection ``P_L``.

    By default the candidate counts share one activity uniform per BS
    (coupled scan).  ``independent_u`` of shape ``(cap, n_bs)`` supplies
    fresh marks per candidate count instead, for sensitivity studies.
    """
    thr = scenario.beta / scenario.gamma
    sigma2 = scenario.noise_sigma2
    pw_all = _received_powers(realization, scenario)
    total_count = 0
    for band in range(1, scenario.K + 1):
        if scenario.K > 1:
            sel = realization.bands == band
            pw = pw_all[sel]
            u = realization.activity_u[sel]
            u_mat = independent_u[:, sel] if independent_u is not None else None
        else:
            pw = pw_all
            u = realization.activity_u
            u_mat = independent_u
        if scenario.p == scenario.q and u_mat is None:
            total_count += _leading_pass_count(pw, u, scenario.q, sigma2, thr, cap)
            continue
        m = min(cap, len(pw))
        pw_m = pw * (u < scenario.p)
        pref_p = np.concatenate(([0.0], np.cumsum(pw_m)))
        pw_q = pw * (u < scenario.q)
        pref_q = np.concatenate(([0.0], np.cumsum(pw_q)))
        t_q = pref_q[-1]
        best = 0
        for ell in range(1, m + 1):
            u_ell = u if u_mat is None else u_mat[ell - 1]
            act = u_ell[:ell] < scenario.p
            if u_mat is None:
                near = pref_p[ell] - act * pw[:ell]
                far = t_q - pref_q[ell]
            else:
                near = float(np.sum(pw[:ell], where=act)) - act * pw[:ell]
                far = float(np.sum(pw[ell:], where=u_ell[ell:] < scenario.q))
            denom = near + far + sigma2
            if np.all(pw[:ell] >= thr * denom):
                best = ell
        total_count += best
    return total_count


# --- chunked collection across realizations -------------------------------


def _sample(scenario: Scenario, config: SimConfig, index: int) -> Realization:
    if config.deployment == Deployment.HEX:
        return sample_hex(scenario, config, index)
    return sample_ppp(scenario, config, index)


def _chunk_margins(
    scenario: Scenario, config: SimConfig, start: int, stop: int
) -> np.ndarray:
    out = np.empty((stop - start, 2))
    for i in range(start, stop):
        real = _sample(scenario, config, i)
        pw = _received_powers(real, scenario)
        out[i - start] = _joint_last_margins(
            pw, real.activity_u, scenario.L, scenario.p, scenario.q,
            scenario.noise_sigma2,
        )
    return out


def _chunk_upsilon(
    scenario: Scenario, config: SimConfig, start: int, stop: int
) -> np.ndarray:
    out = np.empty(stop - start, dtype=np.int64)
    for i in range(start, stop):
        real = _sample(scenario, config, i)
        independent = None
        if not config.coupled_activity:
            independent = stream(config.seed, i, _ROLE_SCAN).random(
                (config.upsilon_cap, len(real.distances))
            )
        out[i - start] = participation_metric(
            real, scenario, config.upsilon_cap, independent
        )
    return out


def _chunk_band_cummins(
    scenario: Scenario, config: SimConfig, start: int, stop: int
) -> np.ndarray:
    cap = config.upsilon_cap
    out = np.empty((stop - start, scenario.K, cap))
    for i in range(start, stop):
        real = _sample(scenario, config, i)
        pw_all = _received_powers(real, scenario)
        for band in range(1, scenario.K + 1):
            sel = real.bands == band if scenario.K > 1 else slice(None)
            out[i - start, band - 1] = _band_sinr_cummin(
                pw_all[sel], real.activity_u[sel], scenario.q,
                scenario.noise_sigma2, cap,
            )
    return out


_CHUNK_FUNCS = {
    "margins": _chunk_margins,
    "upsilon": _chunk_upsilon,
    "band_cummins": _chunk_band_cummins,
}


def _collect(
    scenario: Scenario, config: SimConfig, kind: str, workers: int
) -> np.ndarray:
    """Run the per-realization collector, optionally across processes.

    The keyed streams make the result independent of the chunking, so
    any worker count returns the same array.
    """
    n = config.realizations
    func = _CHUNK_FUNCS[kind]
    if workers <= 1:
        return func(scenario, config, 0, n)
    bounds = np.linspace(0, n, 4 * workers + 1, dtype=int)
    spans = [
        (int(a), int(b)) for a, b in zip(bounds[:-1], bounds[1:]) if b > a
    ]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        parts = list(
            pool.map(
                _collect_entry,
                [(scenario, config, kind, a, b) for a, b in spans],
            )
        )
    return np.concatenate(parts, axis=0)


def _collect_entry(args) -> np.ndarray:
    scenario, config, kind, start, stop = args
    return _CHUNK_FUNCS[kind](scenario, config, start, stop)


def collect_margins(
    scenario: Scenario, config: SimConfig, workers: int = 1
) -> np.ndarray:
    """Per-realization (joint, last-BS) SINR margins, shape (n, 2).

    The margins do not involve beta or gamma, so one collection answers
    an entire threshold sweep.
    """
    return _collect(scenario, config, "margins", workers)


def collect_upsilon(
    scenario: Scenario, config: SimConfig, workers: int = 1
) -> np.ndarray:
    """Per-realization detectable-BS counts, shape (n,)."""
    return _collect(scenario, config, "upsilon", workers)


def collect_band_cummins(
    scenario: Scenario, config: SimConfig, workers: int = 1
) -> np.ndarray:
    """Per-band prefix-min SINRs, shape (n, K, cap); requires p == q."""
    if scenario.p != scenario.q:
        raise ValueError("band prefix margins require p = q")
    return _collect(scenario, config, "band_cummins", workers)


def estimate_pl(
    scenario: Scenario, config: SimConfig, workers: int = 1
) -> McEstimate:
    """Monte Carlo estimate of P_L under the configured truth mode."""
    margins = collect_margins(scenario, config, workers)
    col = 0 if config.truth_mode == TruthMode.JOINT_ALL_L else 1
    thr = scenario.beta / scenario.gamma
    return McEstimate.from_successes(
        int(np.sum(margins[:, col] >= thr)), config.realizations
    )


def estimate_pl_curve(
    scenario: Scenario,
    config: SimConfig,
    thresholds: np.ndarray,
    workers: int = 1,
) -> list[McEstimate]:
    """P_L estimates for a grid of beta/gamma values from one collection."""
    margins = collect_margins(scenario, config, workers)
    col = 0 if config.truth_mode == TruthMode.JOINT_ALL_L else 1
    return [
        McEstimate.from_successes(
            int(np.sum(margins[:, col] >= thr)), config.realizations
        )
        for thr in np.asarray(thresholds, dtype=float)
    ]


def _counts_from_cummins(cummins: np.ndarray, thr: float) -> np.ndarray:
    """Detectable counts per realization given prefix-min SINR tensors."""
    return np.sum(cummins >= thr, axis=(1, 2))


def estimate_pl_reuse(
    scenario: Scenario, config: SimConfig, workers: int = 1
) -> McEstimate:
    """Monte Carlo P_L with detections accumulated across the K bands."""
    cummins = collect_band_cummins(scenario, config, workers)
    counts = _counts_from_cummins(cummins, scenario.beta / scenario.gamma)
    return McEstimate.from_successes(
        int(np.sum(counts >= scenario.L)), config.realizations
    )


def reuse_success_curve(
    scenario: Scenario,
    config: SimConfig,
    thresholds: np.ndarray,
    workers: int = 1,
) -> list[McEstimate]:
    """Reuse-accumulated P_L over a grid of beta/gamma values."""
    cummins = collect_band_cummins(scenario, config, workers)
    return [
        McEstimate.from_successes(
            int(np.sum(_counts_from_cummins(cummins, thr) >= scenario.L)),
            config.realizations,
        )
        for thr in np.asarray(thresholds, dtype=float)
    ]


def hearability_curve(
    scenario: Scenario,
    config: SimConfig,
    l_values: np.ndarray,
    workers: int = 1,
) -> list[McEstimate]:
    """P(Upsilon >= L) for each L in ``l_values`` from one collection."""
    counts = collect_upsilon(scenario, config, workers)
    return [
        McEstimate.from_successes(int(np.sum(counts >= l)), config.realizations)
        for l in np.asarray(l_values, dtype=int)
    ]
