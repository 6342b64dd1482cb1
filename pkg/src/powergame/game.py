"""Best-response power iteration to the SIR-balanced Nash equilibrium.

Because the output SIR of every linear receiver considered here is
proportional to the user's own transmit power at fixed interference, the
exact best response to a target SIR g* is the multiplicative correction
p <- min(p * g*/gamma, Pmax). Sweeping that update synchronously over all
users is a standard interference-function iteration and converges to the
unique fixed point from any positive start.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .efficiency import EfficiencyModel, solve_gamma_star
from .exceptions import InfeasibleUserError
from .system import (ChannelRealization, ReceiverKind, SystemParams,
                     decorrelator_sirs, matched_filter_sirs, mmse_sirs,
                     output_sir, receiver_filter, utility, _zf_columns)

INITIAL_POWER_FRACTION = 1e-2  # starting powers as a fraction of Pmax
DEFAULT_POWER_TOL = 1e-9
DEFAULT_MAX_ITER = 500


@dataclass
class EquilibriumResult:
    powers: np.ndarray     # W
    sirs: np.ndarray
    utilities: np.ndarray  # bits/joule
    iterations: int
    converged: bool
    clamped_users: frozenset


def best_response_power(k: int, powers, realization: ChannelRealization,
                        kind: ReceiverKind, gamma_star: float, sigma2: float,
                        Pmax: float) -> float:
    """One exact best-response step for user k against the current powers.

    The kind-specific filter is recomputed from the current interferer powers,
    the resulting SIR is measured, and the power that would hit gamma_star is
    returned (clamped at Pmax). Exact because gamma is linear in p_k.
    """
    powers = np.asarray(powers, dtype=float)
    heff = _single_antenna_gains(realization)
    c = receiver_filter(kind, k, realization.S, heff, powers, sigma2)
    g = output_sir(c, k, realization.S, heff, powers, sigma2)
    if g <= 0.0:
        raise InfeasibleUserError(k)
    return float(min(powers[k] * gamma_star / g, Pmax))


def _single_antenna_gains(realization: ChannelRealization) -> np.ndarray:
    if realization.H.shape[0] != 1:
        raise ValueError("realization has multiple receive antennas; "
                         "use multiantenna.solve_equilibrium_ma")
    return realization.H[0]


def make_sir_engine(kind: ReceiverKind, S: np.ndarray, heff: np.ndarray,
                    sigma2: float) -> Callable[[np.ndarray], np.ndarray]:
    """Return a powers -> SIRs function with filter structure precomputed.

    Matched filter and decorrelator geometry does not depend on powers, so
    their crosscorrelation pieces are built once. MMSE refactorizes per call
    (the filter tracks the interference), sharing one factorization across
    users. Each engine reproduces receiver_filter + output_sir exactly.
    """
    if kind is ReceiverKind.MATCHED_FILTER:
        gram_sq = (S.T @ S) ** 2
        np.fill_diagonal(gram_sq, 0.0)
        return lambda p: matched_filter_sirs(S, heff, p, sigma2, gram_sq=gram_sq)
    if kind is ReceiverKind.DECORRELATOR:
        noise_diag = np.diag(_zf_columns(S)).copy()
        return lambda p: decorrelator_sirs(S, heff, p, sigma2, noise_diag=noise_diag)
    return lambda p: mmse_sirs(S, heff, p, sigma2)


def solve_from_engine(sirs_fn: Callable[[np.ndarray], np.ndarray], K: int,
                      params: SystemParams, model: EfficiencyModel,
                      gamma_star: float, sir_tol: float = 1e-6,
                      power_tol: float = DEFAULT_POWER_TOL,
                      max_iter: int = DEFAULT_MAX_ITER) -> EquilibriumResult:
    """Run synchronous best-response sweeps until the powers settle."""
    Pmax = params.Pmax
    p = np.full(K, INITIAL_POWER_FRACTION * Pmax)
    iterations = 0
    settled = False
    for iterations in range(1, max_iter + 1):
        g = sirs_fn(p)
        if np.any(g <= 0.0):
            raise InfeasibleUserError(int(np.argmax(g <= 0.0)))
        p_new = np.minimum(p * gamma_star / g, Pmax)
        delta = float(np.max(np.abs(p_new - p) / p))
        p = p_new
        if delta < power_tol:
            settled = True
            break

    sirs = sirs_fn(p)
    clamped = frozenset(np.flatnonzero(p >= Pmax * (1.0 - 1e-12)).tolist())
    unclamped = [k for k in range(K) if k not in clamped]
    sir_ok = all(abs(sirs[k] - gamma_star) / gamma_star <= sir_tol for k in unclamped)
    utilities = np.array([utility(p[k], sirs[k], params, model) for k in range(K)])
    return EquilibriumResult(powers=p, sirs=sirs, utilities=utilities,
                             iterations=iterations,
                             converged=settled and sir_ok,
                             clamped_users=clamped)


def solve_equilibrium(realization: ChannelRealization, kind: ReceiverKind,
                      params: SystemParams, model: EfficiencyModel,
                      sir_tol: float = 1e-6, max_iter: int = DEFAULT_MAX_ITER,
                      gamma_star: float | None = None,
                      power_tol: float = DEFAULT_POWER_TOL) -> EquilibriumResult:
    """Drive all users to the SIR-balanced equilibrium for one realization.

    Stops when the largest relative power change over a sweep drops below
    power_tol or when max_iter sweeps have run; non-convergence is reported
    through the result, not raised, so Monte Carlo harnesses can decide.
    """
    heff = _single_antenna_gains(realization)
    if gamma_star is None:
        gamma_star = solve_gamma_star(model)
    engine = make_sir_engine(kind, realization.S, heff, params.sigma2)
    return solve_from_engine(engine, realization.S.shape[1], params, model,
                             gamma_star, sir_tol, power_tol, max_iter)


def verify_nash(result: EquilibriumResult, realization: ChannelRealization,
                kind: ReceiverKind, params: SystemParams,
                model: EfficiencyModel, probe_grid_size: int = 16,
                rel_tol: float = 1e-6) -> bool:
    """Probe unilateral deviations and confirm no user can gain.

    Each user's power is swept over a multiplicative grid 0.5x .. 2x of its
    equilibrium value (capped at Pmax) with everyone else frozen; the filter
    is derived from the frozen interference, which is exact since no filter
    depends on the deviating user's own power.
    """
    heff = _single_antenna_gains(realization)
    S, sigma2 = realization.S, params.sigma2
    K = S.shape[1]
    for k in range(K):
        c = receiver_filter(kind, k, S, heff, result.powers, sigma2)
        base = result.utilities[k]
        probe = result.powers.copy()
        for factor in np.geomspace(0.5, 2.0, probe_grid_size):
            p_k = min(result.powers[k] * factor, params.Pmax)
            probe[k] = p_k
            g = output_sir(c, k, S, heff, probe, sigma2)
            if utility(p_k, g, params, model) > base * (1.0 + rel_tol):
                return False
    return True
