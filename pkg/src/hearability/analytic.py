"""Closed-form bounds and integral approximations of P_L.

``P_L`` is the probability that a device detects all of its ``L``
nearest BSs, the quantity that governs whether network-based
positioning has enough anchors.  This module provides, in increasing
order of fidelity and cost:

* an upper bound from dropping all interference beyond the L-th BS
  (:func:`pl_upper_bound`) and its inversion into the minimum
  processing gain that guarantees a target ``P_L``
  (:func:`min_processing_gain`);
* a closed form for perfectly coordinated participants, ``p = 0``
  (:func:`pl_perfect_coord`);
* a dominant-interferer approximation that keeps the nearest active
  interferer exact and replaces the remaining interference with its
  conditional mean (:func:`pl_double_integral`, with the reduced
  single-integral forms :func:`pl_single_integral_general`,
  :func:`pl_alpha4`, and the near-field closed form
  :func:`pl_nearfield_alpha4`).

Detection of the bottleneck BS succeeds when its SIR, after the
processing gain, clears the demodulation threshold:
``SIR >= beta / gamma``.

Every evaluator is invariant to the BS density: the integral forms are
computed in coordinates normalized so ``lam * pi = 1``, which an exact
change of variables permits, so identical inputs at different densities
return bit-identical values.
"""

from __future__ import annotations

import enum
import math
from functools import lru_cache

import numpy as np

from .model import Scenario, pmf_omega
from .numerics import (
    DEFAULT_QUADRATURE,
    QuadratureSpec,
    bisect_monotone_array,
    erlang_quantile,
    find_root_monotone,
    integrate_adaptive,
    poisson_cdf,
)

__all__ = [
    "Method",
    "mean_i1",
    "mean_i2",
    "pl_upper_bound",
    "min_processing_gain",
    "pl_perfect_coord",
    "pl_double_integral",
    "pl_single_integral_general",
    "pl_alpha4",
    "pl_nearfield_alpha4",
    "evaluate",
]


class Method(str, enum.Enum):
    """Tags for the analytic evaluators, also used as CSV labels."""

    UPPER_BOUND = "UpperBound"
    PROC_GAIN_BOUND = "ProcGainBound"
    PERFECT_COORD = "PerfectCoord"
    DOUBLE_INTEGRAL = "DoubleIntegral"
    SINGLE_INTEGRAL_GENERAL = "SingleIntegralGeneral"
    SINGLE_INTEGRAL_ALPHA4 = "SingleIntegralAlpha4"
    NEAR_FIELD_ALPHA4 = "NearFieldAlpha4"


def _clamp01(value: float) -> float:
    """Clamp to [0, 1], absorbing quadrature rounding at the 1e-12 level."""
    return min(1.0, max(0.0, value))


def _floor_with_tol(x: float) -> int:
    """Floor that forgives representation error just below an integer."""
    nearest = round(x)
    if abs(x - nearest) <= 1e-12 * max(1.0, abs(x)):
        return int(nearest)
    return int(math.floor(x))


def mean_i1(r1_hat: float, rl: float, omega: int, scenario: Scenario) -> float:
    """Mean interference from active participants beyond the nearest one.

    Conditioned on the L-th BS distance ``rl``, the nearest active
    participant distance ``r1_hat`` and ``omega`` active participants,
    the remaining ``omega - 1`` actives are uniform on the annulus
    between the two radii; averaging the power law over that annulus
    gives the closed form.  Returns 0 for ``omega <= 1``.
    """
    if not isinstance(omega, (int, np.integer)) or omega < 0:
        raise ValueError(f"omega must be a nonnegative integer, got {omega!r}")
    if not (rl > 0.0 and math.isfinite(rl)):
        raise ValueError(f"rl must be positive and finite, got {rl}")
    if not (0.0 < r1_hat <= rl):
        raise ValueError(f"r1_hat must lie in (0, rl], got {r1_hat} with rl={rl}")
    if omega <= 1:
        return 0.0
    alpha = scenario.alpha
    power = scenario.tx_power
    if rl - r1_hat <= 1e-9 * rl:
        # Removable singularity: the annulus degenerates to the circle.
        return power * (omega - 1) * rl**-alpha
    num = rl ** (2.0 - alpha) - r1_hat ** (2.0 - alpha)
    den = rl * rl - r1_hat * r1_hat
    return 2.0 * power * (omega - 1) / (2.0 - alpha) * num / den


def mean_i2(rl: float, scenario: Scenario) -> float:
    """Mean interference from load-q BSs beyond the L-th, given R_L = rl.

    Campbell's theorem over the thinned PPP outside radius ``rl``.
    """
    if not (rl > 0.0 and math.isfinite(rl)):
        raise ValueError(f"rl must be positive and finite, got {rl}")
    alpha = scenario.alpha
    return (
        2.0
        * scenario.tx_power
        * math.pi
        * scenario.q
        * scenario.lam
        / (alpha - 2.0)
        * rl ** (2.0 - alpha)
    )


def pl_upper_bound(scenario: Scenario) -> float:
    """Closed-form upper bound on P_L from near-field interference only.

    Ignoring all interference beyond the L-th BS and lower-bounding each
    active participant's distance by the bottleneck distance yields, for
    ``omega`` active interferers, the detection probability
    ``(1 - (gamma/beta - (omega-1))**(-2/alpha))**omega``; averaging
    over the binomial law of ``omega`` up to
    ``chi = min(L-1, floor(gamma/beta))`` gives the bound.
    """
    gb = scenario.gamma / scenario.beta
    L, alpha, p = scenario.L, scenario.alpha, scenario.p
    chi = min(L - 1, _floor_with_tol(gb))
    total = 0.0
    for omega in range(0, chi + 1):
        weight = pmf_omega(omega, L, p)
        if weight == 0.0:
            continue
        if omega == 0:
            total += weight
            continue
        margin = gb - (omega - 1)
        base = 1.0 - margin ** (-2.0 / alpha)
        total += weight * max(0.0, base) ** omega
    return _clamp01(total)


def min_processing_gain(target_pl: float, L: int, alpha: float, beta: float) -> float:
    """Smallest processing gain for which the upper bound reaches target_pl.

    Inverts the uncoordinated (``p = 1``) near-field bound, so the
    result is necessary: below this gain not even the optimistic bound
    attains the target.  Returned on linear scale.
    """
    if not (0.0 < target_pl < 1.0):
        raise ValueError(f"target_pl must lie in (0, 1), got {target_pl}")
    if not isinstance(L, (int, np.integer)) or L < 2:
        raise ValueError(f"L must be an integer >= 2, got {L!r}")
    if not (alpha > 2.0):
        raise ValueError(f"alpha must exceed 2, got {alpha}")
    if not (beta > 0.0):
        raise ValueError(f"beta must be positive, got {beta}")
    return beta * (
        (1.0 - target_pl ** (1.0 / (L - 1))) ** (-alpha / 2.0) + L - 2.0
    )


def pl_perfect_coord(scenario: Scenario) -> float:
    """P_L when participants are perfectly muted (p = 0).

    Only the load-q far field interferes; replacing that interference by
    its conditional mean turns the detection event into a Poisson tail:
    ``1 - poisson_cdf(L - 1, (alpha-2) * gamma / (2 q beta))``.
    Returns 1 for ``q = 0`` (no interference at all).
    """
    if scenario.q == 0.0:
        return 1.0
    mu = (scenario.alpha - 2.0) * scenario.gamma / (2.0 * scenario.q * scenario.beta)
    return _clamp01(1.0 - poisson_cdf(scenario.L - 1, mu))


# --- dominant-interferer machinery (normalized coordinates, lam*pi = 1) ---


def _sir_normalized(t, r, omega: int, alpha: float, q: float):
    """Approximate SIR of the L-th BS in normalized coordinates.

    ``t`` is the nearest-active-interferer distance, ``r`` the L-th BS
    distance, both scaled so that ``lam * pi = 1``.  The nearest active
    interferer is kept exact; the other ``omega - 1`` actives and the
    load-q far field enter through their conditional means.
    Elementwise over arrays; monotone increasing in ``t``.
    """
    num = r**-alpha
    t_term = t**-alpha
    if omega >= 2:
        with np.errstate(divide="ignore", invalid="ignore"):
            diff2 = r * r - t * t
            j1_raw = (
                (2.0 * (omega - 1) / (2.0 - alpha))
                * (r ** (2.0 - alpha) - t ** (2.0 - alpha))
                / diff2
            )
        j1 = np.where(diff2 <= 1e-12 * r * r, (omega - 1) * num, j1_raw)
    else:
        j1 = 0.0
    j2 = (2.0 * q / (alpha - 2.0)) * r ** (2.0 - alpha)
    return num / (t_term + j1 + j2)


@lru_cache(maxsize=256)
def _verify_sir_monotone(alpha: float, omega: int, q: float) -> None:
    """Assert the normalized SIR grows with the dominant distance.

    The indicator inversion inside :func:`pl_double_integral` relies on
    this direction; it is checked numerically on a coarse grid the first
    time each parameter combination is used, and a violation aborts with
    a diagnostic rather than silently mis-integrating.
    """
    for r in (0.03, 0.3, 1.0, 3.0, 10.0):
        t = np.linspace(1e-6 * r, r * (1.0 - 1e-9), 257)
        sir = _sir_normalized(t, r, omega, alpha, q)
        drops = np.diff(sir) < -1e-12 * np.abs(sir[:-1])
        if np.any(drops):
            i = int(np.argmax(drops))
            raise RuntimeError(
                "SIR is not monotone in the dominant-interferer distance for "
                f"alpha={alpha}, omega={omega}, q={q}: decrease near t={t[i]:.6g} "
                f"of r={r}; the indicator inversion is invalid here"
            )


def _boundary_t(r: np.ndarray, omega: int, alpha: float, q: float, thr: float):
    """Dominant-interferer distance at which the SIR crosses ``thr``.

    Valid for ``r`` strictly below the support limit, where the bracket
    [r * 1e-9, r] straddles the crossing.  The lower endpoint truncates
    a region of conditional mass below 1e-17, far under quadrature
    tolerance.
    """
    lo = r * 1e-9
    return bisect_monotone_array(
        lambda t: _sir_normalized(t, r, omega, alpha, q) >= thr, lo, r, iterations=64
    )


def pl_double_integral(
    scenario: Scenario, quad: QuadratureSpec = DEFAULT_QUADRATURE
) -> float:
    """Dominant-interferer approximation of P_L, general path loss.

    For each count ``omega >= 1`` of active near interferers, the
    detection event is inverted into a threshold on the nearest active
    interferer distance; its conditional tail has a closed form, leaving
    one smooth outer integral over the L-th BS distance.  The
    ``omega = 0`` term is the perfect-coordination value.  The nominal
    inner/outer double integral therefore costs a single quadrature per
    ``omega``.
    """
    L, alpha, p, q = scenario.L, scenario.alpha, scenario.p, scenario.q
    thr = scenario.beta / scenario.gamma
    gb = 1.0 / thr
    total = pmf_omega(0, L, p) * pl_perfect_coord(scenario)
    if L < 2:
        return _clamp01(total)
    # Normalized coordinates (lam * pi = 1): an exact change of variables,
    # so the result is independent of the density.
    r_tail = math.sqrt(erlang_quantile(L, 1.0, quad.tail_quantile))
    log_norm = math.log(2.0) - math.lgamma(L)
    for omega in range(1, L):
        weight = pmf_omega(omega, L, p)
        if weight == 0.0 or gb <= omega:
            continue
        _verify_sir_monotone(alpha, omega, q)
        if q > 0.0:
            # Beyond this radius even a vanishing dominant term cannot
            # lift the SIR over the threshold.
            r_star = math.sqrt((alpha - 2.0) * (gb - omega) / (2.0 * q))
        else:
            r_star = math.inf
        upper = min(r_star * (1.0 - 1e-12), r_tail)
        if upper <= 0.0:
            continue

        def integrand(r_arr: np.ndarray, _omega: int = omega) -> np.ndarray:
            t = _boundary_t(r_arr, _omega, alpha, q, thr)
            mass = np.maximum(0.0, (r_arr * r_arr - t * t) / (r_arr * r_arr)) ** _omega
            s = r_arr * r_arr
            log_pdf = -s + L * np.log(s) + log_norm - np.log(r_arr)
            return mass * np.exp(log_pdf)

        total += weight * integrate_adaptive(integrand, 0.0, upper, quad)
    return _clamp01(total)


def _h_ratio(x: float, omega: int, alpha: float, q: float) -> float:
    """Inverse normalized SIR as a function of the ratio x = R_L / R1_hat.

    ``h(1) = omega + 2q/(alpha-2)`` and h grows like ``x**alpha``;
    detection of the bottleneck BS corresponds to ``h(x) <= gamma/beta``.
    """
    x2 = x * x
    if abs(x2 - 1.0) <= 1e-12:
        middle = float(omega - 1)
    else:
        middle = (2.0 * (omega - 1) / (2.0 - alpha)) * (x2 - x**alpha) / (x2 - 1.0)
    return x**alpha + middle + 2.0 * q * x2 / (alpha - 2.0)


@lru_cache(maxsize=256)
def _verify_h_monotone(alpha: float, omega: int, q: float) -> None:
    """Assert h is increasing in x so its threshold crossing is unique."""
    xs = np.geomspace(1.0 + 1e-9, 1e4, 513)
    hs = np.array([_h_ratio(float(x), omega, alpha, q) for x in xs])
    drops = np.diff(hs) < -1e-10 * np.abs(hs[:-1])
    if np.any(drops):
        i = int(np.argmax(drops))
        raise RuntimeError(
            f"h(x) is not monotone for alpha={alpha}, omega={omega}, q={q}: "
            f"decrease near x={xs[i]:.6g}; the threshold inversion is invalid"
        )


def pl_single_integral_general(
    scenario: Scenario, quad: QuadratureSpec = DEFAULT_QUADRATURE
) -> float:
    """Ratio-form approximation of P_L for general path loss exponents.

    Scaling the far-field mean by the mean squared nearest-interferer
    distance leaves the SIR a function of the single ratio
    ``X = R_L / R1_hat`` alone.  The resulting x-integral of the ratio
    density against the detection indicator telescopes into the closed
    form ``(1 - x***-2)**omega`` at the crossing point ``x*``, so no
    quadrature is needed, only a root find per omega.  Least reliable of
    the integral forms, but the cheapest.
    """
    L, alpha, p, q = scenario.L, scenario.alpha, scenario.p, scenario.q
    gb = scenario.gamma / scenario.beta
    total = pmf_omega(0, L, p) * pl_perfect_coord(scenario)
    root_tol = min(1e-12, quad.rel_tol)
    for omega in range(1, L):
        weight = pmf_omega(omega, L, p)
        if weight == 0.0:
            continue
        _verify_h_monotone(alpha, omega, q)
        if _h_ratio(1.0, omega, alpha, q) >= gb:
            continue
        hi = 2.0
        for _ in range(200):
            if _h_ratio(hi, omega, alpha, q) > gb:
                break
            hi *= 2.0
        x_star = find_root_monotone(
            lambda x: _h_ratio(x, omega, alpha, q) - gb, 1.0, hi, tol=root_tol * hi
        )
        total += weight * (1.0 - x_star**-2.0) ** omega
    return _clamp01(total)


def pl_alpha4(scenario: Scenario, quad: QuadratureSpec = DEFAULT_QUADRATURE) -> float:
    """Single-integral dominant-interferer approximation, exact at alpha = 4.

    At ``alpha = 4`` the inner threshold inversion of
    :func:`pl_double_integral` is a quadratic in ``(R_L/R1_hat)**2``, so
    the double integral collapses algebraically (no extra approximation)
    to one integral against the Erlang law of ``pi * lam * R_L**2``.
    """
    if scenario.alpha != 4.0:
        raise ValueError(
            f"this evaluator requires alpha = 4 exactly, got {scenario.alpha}"
        )
    L, p, q = scenario.L, scenario.p, scenario.q
    gb = scenario.gamma / scenario.beta
    total = pmf_omega(0, L, p) * pl_perfect_coord(scenario)
    if L < 2:
        return _clamp01(total)
    s_tail = erlang_quantile(L, 1.0, quad.tail_quantile)
    log_norm = -math.lgamma(L)
    chi = min(L - 1, _floor_with_tol(gb))
    for omega in range(1, chi + 1):
        weight = pmf_omega(omega, L, p)
        if weight == 0.0:
            continue
        s_up = (gb - omega) / q if q > 0.0 else math.inf
        upper = min(s_up, s_tail)
        if upper <= 0.0:
            continue

        def integrand(s: np.ndarray, _omega: int = omega) -> np.ndarray:
            # y_star >= 1 on the domain; the sqrt argument is the
            # quadratic discriminant of the threshold inversion.
            y_star = np.sqrt(gb - q * s + (_omega - 1) ** 2 / 4.0) - (_omega - 1) / 2.0
            base = np.maximum(0.0, 1.0 - 1.0 / y_star)
            log_pdf = -s + (L - 1) * np.log(s) + log_norm
            return base**_omega * np.exp(log_pdf)

        total += weight * integrate_adaptive(integrand, 0.0, upper, quad)
    return _clamp01(total)


def pl_nearfield_alpha4(scenario: Scenario) -> float:
    """Closed-form near-field approximation of P_L at alpha = 4.

    Drops the far field entirely (valid when the near field dominates,
    i.e. small gamma/beta); the remaining Erlang integral is exact and
    closed form.  At ``p = 1`` this returns 0 once
    ``beta >= gamma / (L - 1)``.
    """
    if scenario.alpha != 4.0:
        raise ValueError(
            f"this evaluator requires alpha = 4 exactly, got {scenario.alpha}"
        )
    L, p = scenario.L, scenario.p
    gb = scenario.gamma / scenario.beta
    chi = min(L - 1, _floor_with_tol(gb))
    total = 0.0
    for omega in range(0, chi + 1):
        weight = pmf_omega(omega, L, p)
        if weight == 0.0:
            continue
        if omega == 0:
            total += weight
            continue
        y_star = math.sqrt(gb + (omega - 1) ** 2 / 4.0) - (omega - 1) / 2.0
        base = max(0.0, 1.0 - 1.0 / y_star)
        total += weight * base**omega
    return _clamp01(total)


_EVALUATORS = {
    Method.UPPER_BOUND: lambda scen, quad: pl_upper_bound(scen),
    Method.PERFECT_COORD: lambda scen, quad: pl_perfect_coord(scen),
    Method.DOUBLE_INTEGRAL: pl_double_integral,
    Method.SINGLE_INTEGRAL_GENERAL: pl_single_integral_general,
    Method.SINGLE_INTEGRAL_ALPHA4: pl_alpha4,
    Method.NEAR_FIELD_ALPHA4: lambda scen, quad: pl_nearfield_alpha4(scen),
}


def evaluate(
    method: Method, scenario: Scenario, quad: QuadratureSpec = DEFAULT_QUADRATURE
) -> float:
    """Dispatch to the evaluator tagged by ``method``; result in [0, 1].

    ``Method.PROC_GAIN_BOUND`` maps a target probability to a gain, not
    a scenario to a probability, so it is rejected here; call
    :func:`min_processing_gain` directly.
    """
    if method == Method.PROC_GAIN_BOUND:
        raise ValueError(
            "ProcGainBound computes a minimum processing gain, not a "
            "probability; use min_processing_gain(target_pl, L, alpha, beta)"
        )
    try:
        evaluator = _EVALUATORS[Method(method)]
    except (KeyError, ValueError):
        raise ValueError(f"unknown method {method!r}") from None
    return evaluator(scenario, quad)
