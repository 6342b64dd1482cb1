"""Large-system closed forms: powers, utilities, Pareto targets, admission.

In the limit K, N -> infinity with K/N -> alpha, the SIR of every user
depends on the spreading sequences only through the load alpha. The balanced
received power that puts every user at SIR gamma, the load-dependent utility
factor Gamma, the feasibility bound per receiver, the cooperative (Pareto)
target SIR, and the total-utility-maximizing load all come out in closed form
or as one-dimensional root solves.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .efficiency import (GAMMA_BRACKET, EfficiencyModel, eff_derivative,
                         eff_value, solve_gamma_star)
from .exceptions import InfeasibleLoadError, SolverError
from .rootfind import bisect, scan_brackets
from .system import ReceiverKind, SystemParams

FIXED_POINT_TOL = 1e-10
FIXED_POINT_MAX_ITER = 10_000


@dataclass(frozen=True)
class AsymptoticResult:
    """One large-system operating point of a receiver at a given load."""

    alpha: float
    gamma_target: float
    Gamma: float          # load penalty, in (0, 1]
    q: float              # W, balanced received power
    utility_coeff: float  # bits/joule per unit squared channel gain


def feasibility_bound(kind: ReceiverKind, gamma: float) -> float:
    """Maximum load below which SIR gamma is reachable by all users."""
    if gamma <= 0:
        raise ValueError(f"gamma must be positive, got {gamma}")
    if kind is ReceiverKind.MATCHED_FILTER:
        return 1.0 / gamma
    if kind is ReceiverKind.DECORRELATOR:
        return 1.0
    return 1.0 + 1.0 / gamma


def _check_feasible(kind: ReceiverKind, alpha: float, gamma: float) -> None:
    bound = feasibility_bound(kind, gamma)
    if alpha >= bound:
        raise InfeasibleLoadError(
            f"load alpha={alpha:g} infeasible for {kind.value}: "
            f"requires alpha < {bound:g} at gamma={gamma:g}")


def gamma_factor(kind: ReceiverKind, alpha: float, gamma_star: float) -> float:
    """Load penalty Gamma in (0, 1]: MF 1 - a g*, DE 1 - a, MMSE 1 - a g*/(1+g*)."""
    _check_feasible(kind, alpha, gamma_star)
    if kind is ReceiverKind.MATCHED_FILTER:
        return 1.0 - alpha * gamma_star
    if kind is ReceiverKind.DECORRELATOR:
        return 1.0 - alpha
    return 1.0 - alpha * gamma_star / (1.0 + gamma_star)


def balanced_received_power(kind: ReceiverKind, alpha: float, gamma: float,
                            sigma2: float) -> float:
    """Common received power q = gamma sigma2 / Gamma that balances all SIRs at gamma."""
    return gamma * sigma2 / gamma_factor(kind, alpha, gamma)


def equilibrium_power_large(kind: ReceiverKind, alpha: float, gamma_star: float,
                            sigma2: float, h2: float) -> float:
    """Per-user transmit power q/h^2 achieving gamma_star at load alpha."""
    if h2 <= 0:
        raise ValueError(f"h2 must be positive, got {h2}")
    return balanced_received_power(kind, alpha, gamma_star, sigma2) / h2


def equilibrium_utility_large(kind: ReceiverKind, alpha: float,
                              params: SystemParams, model: EfficiencyModel,
                              gamma_star: float, h2: float) -> float:
    """Equilibrium utility L R f(g*) h^2 Gamma / (M g* sigma2), bits/joule."""
    return (params.L * params.R * eff_value(model, gamma_star) * h2
            / (params.M * gamma_star * params.sigma2)
            * gamma_factor(kind, alpha, gamma_star))


def operating_point(kind: ReceiverKind, alpha: float, params: SystemParams,
                    model: EfficiencyModel,
                    gamma_target: float | None = None) -> AsymptoticResult:
    """Bundle the large-system quantities at one (receiver, load) point.

    Defaults to the non-cooperative target SIR; pass a cooperative target to
    evaluate the social-optimum point instead. Raises on infeasible loads.
    """
    if gamma_target is None:
        gamma_target = solve_gamma_star(model)
    Gamma = gamma_factor(kind, alpha, gamma_target)
    q = gamma_target * params.sigma2 / Gamma
    coeff = (params.L / params.M) * params.R * eff_value(model, gamma_target) / q
    return AsymptoticResult(alpha=alpha, gamma_target=gamma_target,
                            Gamma=Gamma, q=q, utility_coeff=coeff)


def mmse_sir_fixed_point_large(received_powers, k: int, sigma2: float,
                               N_effective: float) -> float:
    """Solve the large-system MMSE SIR fixed point for user k.

    gamma = b / (sigma2 + (1/N) sum_{j!=k} a_j b / (b + a_j gamma)) where
    b = p_k h_k^2 and a_j are the interferers' received powers. The map is
    increasing and bounded by b/sigma2, so a damped iteration started there
    descends monotonically onto the fixed point.
    """
    rec = np.asarray(received_powers, dtype=float)
    if np.any(rec < 0):
        raise ValueError("received powers must be nonnegative")
    b = rec[k]
    others = np.delete(rec, k)
    g = b / sigma2
    for _ in range(FIXED_POINT_MAX_ITER):
        interference = np.sum(others * b / (b + others * g)) / N_effective
        g_next = 0.5 * g + 0.5 * b / (sigma2 + interference)
        if abs(g_next - g) <= FIXED_POINT_TOL * g:
            return float(g_next)
        g = g_next
    raise SolverError("MMSE SIR fixed point did not converge")


def mmse_pareto_gap(gamma: float, alpha: float) -> float:
    """Factor g(gamma) = 1 - alpha gamma / ((1+gamma)^2 - alpha gamma^2)."""
    denom = (1.0 + gamma) ** 2 - alpha * gamma ** 2
    if denom <= 0:
        raise ValueError(
            f"(1+gamma)^2 - alpha gamma^2 must be positive, got {denom:g}")
    return 1.0 - alpha * gamma / denom


def _pareto_residual(kind: ReceiverKind, alpha: float, model: EfficiencyModel):
    """Stationarity residual of f(gamma)/q(gamma) for the cooperative target."""
    if kind is ReceiverKind.MATCHED_FILTER:
        return lambda g: eff_value(model, g) - g * (1.0 - alpha * g) * eff_derivative(model, g)
    return lambda g: (eff_value(model, g)
                      - g * mmse_pareto_gap(g, alpha) * eff_derivative(model, g))


def _pareto_upper(kind: ReceiverKind, alpha: float) -> float:
    """Upper search limit keeping q(gamma) and the residual well defined."""
    lo, hi = GAMMA_BRACKET
    margin = 1.0 - 1e-9
    if kind is ReceiverKind.MATCHED_FILTER:
        return min(hi, margin / alpha)  # q^MF diverges at gamma = 1/alpha
    if alpha > 1.0:
        # q^MMSE pole at gamma = 1/(alpha-1); g(..) pole at 1/(sqrt(alpha)-1)
        return min(hi, margin / (alpha - 1.0), margin / (math.sqrt(alpha) - 1.0))
    return hi


def solve_pareto_target(kind: ReceiverKind, alpha: float,
                        model: EfficiencyModel, tol: float = 1e-9) -> float:
    """Target SIR of the equal-weight, SIR-balanced cooperative optimum.

    For the decorrelator the cooperative and non-cooperative targets coincide,
    so the plain tangent solve is returned. Otherwise all upward crossings of
    the stationarity residual are refined and the one maximizing f(gamma)/q is
    kept, which guards against spurious stationary points.
    """
    if alpha < 0:
        raise ValueError(f"alpha must be nonnegative, got {alpha}")
    if kind is ReceiverKind.DECORRELATOR or alpha == 0.0:
        return solve_gamma_star(model, tol)
    residual = _pareto_residual(kind, alpha, model)
    lo = GAMMA_BRACKET[0]
    hi = _pareto_upper(kind, alpha)
    brackets = scan_brackets(residual, lo, hi)
    if not brackets:
        raise SolverError(
            f"no stationary point of f/q on [{lo:g}, {hi:g}] for {kind.value} "
            f"at alpha={alpha:g}")
    roots = [bisect(residual, a, b, tol) for a, b in brackets]

    def ratio(g: float) -> float:
        return eff_value(model, g) / balanced_received_power(kind, alpha, g, 1.0)

    return max(roots, key=ratio)


def pareto_utility(kind: ReceiverKind, alpha: float, params: SystemParams,
                   model: EfficiencyModel, h2: float) -> float:
    """Per-user utility at the cooperative SIR-balanced optimum."""
    g_opt = solve_pareto_target(kind, alpha, model)
    q = balanced_received_power(kind, alpha, g_opt, params.sigma2)
    return (params.L / params.M) * params.R * eff_value(model, g_opt) * h2 / q


def optimal_load(kind: ReceiverKind, gamma_star: float, m: int = 1) -> float:
    """Load maximizing total utility per degree of freedom (solves Gamma = 1/2).

    With m receive antennas the effective load is alpha/m for the matched
    filter and MMSE receiver, so their admission limits scale with m; the
    decorrelator pools power only and stays at 1/2.
    """
    if gamma_star <= 0:
        raise ValueError(f"gamma_star must be positive, got {gamma_star}")
    if m < 1:
        raise ValueError(f"m must be a positive integer, got {m}")
    if kind is ReceiverKind.MATCHED_FILTER:
        return m / (2.0 * gamma_star)
    if kind is ReceiverKind.DECORRELATOR:
        return 0.5
    return m * (0.5 + 1.0 / (2.0 * gamma_star))
