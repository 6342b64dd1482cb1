"""Finite-dimension uplink model: spreading, gains, linear receivers, SIR.

The received chip vector is r = sum_k sqrt(p_k) h_k b_k s_k + w with unit-norm
random spreading sequences s_k (entries +-1/sqrt(N)) and white noise of power
sigma2 per chip. A linear receiver c for user k sees

    gamma_k = p_k h_k^2 (c's_k)^2 / (sigma2 c'c + sum_{j!=k} p_j h_j^2 (c's_j)^2)

which is what everything below computes. No symbol-level noise is ever drawn;
all results are deterministic functions of (S, h, p, sigma2).
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .efficiency import EfficiencyModel, eff_value
from .exceptions import SingularSpreadingError

COND_LIMIT = 1e12  # condition estimate above which S'S is declared singular


class ReceiverKind(Enum):
    MATCHED_FILTER = "MF"
    DECORRELATOR = "DE"
    MMSE = "MMSE"


@dataclass(frozen=True)
class SystemParams:
    """Static system parameters.

    K      number of users
    N      processing gain (spreading sequence length)
    sigma2 noise power, W
    R      transmission rate, bits/s
    L      information bits per packet
    M      total bits per packet (L <= M)
    Pmax   transmit power cap, W
    m      receive antennas
    """

    K: int
    N: int
    sigma2: float
    R: float
    L: int
    M: int
    Pmax: float
    m: int = 1

    def __post_init__(self):
        if self.K < 1 or self.N < 1 or self.m < 1:
            raise ValueError("K, N and m must be positive integers")
        if self.L < 1 or self.M < 1 or self.L > self.M:
            raise ValueError(f"need 1 <= L <= M, got L={self.L}, M={self.M}")
        if self.sigma2 <= 0 or self.R <= 0 or self.Pmax <= 0:
            raise ValueError("sigma2, R and Pmax must be positive")


@dataclass
class ChannelRealization:
    """One draw of spreading sequences and channel amplitude gains."""

    S: np.ndarray          # N x K, unit-norm columns
    H: np.ndarray          # m x K, amplitude gains
    distances: np.ndarray  # K, meters

    def __post_init__(self):
        self.S = np.asarray(self.S, dtype=float)
        self.H = np.atleast_2d(np.asarray(self.H, dtype=float))
        self.distances = np.asarray(self.distances, dtype=float)
        if self.S.shape[1] != self.H.shape[1]:
            raise ValueError("S and H disagree on the number of users")
        if np.any(self.H <= 0):
            raise ValueError("all channel gains must be strictly positive")


def generate_spreading(N: int, K: int, rng: np.random.Generator) -> np.ndarray:
    """Draw an N x K matrix of i.i.d. +-1/sqrt(N) chips (unit-norm columns)."""
    if N < 1 or K < 1:
        raise ValueError("N and K must be positive")
    chips = rng.integers(0, 2, size=(N, K)) * 2 - 1
    return chips / np.sqrt(N)


def generate_gains(distances, m: int, rng: np.random.Generator,
                   mean_semantics: str = "amplitude") -> np.ndarray:
    """Draw an m x K matrix of i.i.d. Rayleigh channel amplitude gains.

    The per-user distribution is tied to distance d through the 0.3/d^2 law.
    With ``mean_semantics="amplitude"`` the amplitude mean E[h] equals
    0.3/d^2 (Rayleigh mean = scale * sqrt(pi/2)); with ``"mean_square"`` the
    power mean E[h^2] equals 0.3/d^2 instead (E[h^2] = 2 scale^2).
    """
    d = np.asarray(distances, dtype=float)
    if np.any(d <= 0):
        raise ValueError("distances must be strictly positive")
    mean = 0.3 / d ** 2
    if mean_semantics == "amplitude":
        scale = mean * np.sqrt(2.0 / np.pi)
    elif mean_semantics == "mean_square":
        scale = np.sqrt(mean / 2.0)
    else:
        raise ValueError(f"unknown mean_semantics {mean_semantics!r}")
    return rng.rayleigh(scale=np.broadcast_to(scale, (m, d.size)))


def _zf_columns(S: np.ndarray) -> np.ndarray:
    """Inverse crosscorrelation matrix (S'S)^-1 with a rank guard."""
    N, K = S.shape
    if K > N:
        raise SingularSpreadingError(f"decorrelator needs K <= N, got K={K}, N={N}")
    G = S.T @ S
    if np.linalg.cond(G) > COND_LIMIT:
        raise SingularSpreadingError("spreading crosscorrelation matrix is singular")
    return np.linalg.inv(G)


def receiver_filter(kind: ReceiverKind, k: int, S: np.ndarray, heff: np.ndarray,
                    p: np.ndarray, sigma2: float) -> np.ndarray:
    """Coefficient vector of user k's receiver.

    Matched filter: c = s_k. Decorrelator: k-th column of S (S'S)^-1, which
    zero-forces all interferers. MMSE: A_k^-1 s_k with
    A_k = sum_{j!=k} p_j h_j^2 s_j s_j' + sigma2 I; the scalar prefactor of
    the textbook expression is dropped because the output SIR is invariant
    under scaling of c.
    """
    if kind is ReceiverKind.MATCHED_FILTER:
        return S[:, k].copy()
    if kind is ReceiverKind.DECORRELATOR:
        return S @ _zf_columns(S)[:, k]
    p = np.asarray(p, dtype=float)
    if np.any(p < 0):
        raise ValueError("powers must be nonnegative for the MMSE filter")
    w = p * np.asarray(heff, dtype=float) ** 2
    w[k] = 0.0  # A_k excludes the user's own signature, so c is free of p_k
    A = (S * w) @ S.T + sigma2 * np.eye(S.shape[0])
    return np.linalg.solve(A, S[:, k])


def output_sir(c: np.ndarray, k: int, S: np.ndarray, heff: np.ndarray,
               p: np.ndarray, sigma2: float) -> float:
    """Output SIR of user k for an arbitrary filter c (scale invariant)."""
    c = np.asarray(c, dtype=float)
    if not np.any(c):
        raise ValueError("filter vector must be nonzero")
    cross = c @ S
    rec = np.asarray(p, dtype=float) * np.asarray(heff, dtype=float) ** 2
    signal = rec[k] * cross[k] ** 2
    interference = rec * cross ** 2
    denom = sigma2 * (c @ c) + interference.sum() - interference[k]
    return float(signal / denom)


def utility(p_k: float, gamma_k: float, params: SystemParams,
            model: EfficiencyModel) -> float:
    """Energy efficiency u = (L/M) R f(gamma) / p in bits per joule."""
    if p_k <= 0:
        raise ValueError(f"transmit power must be positive, got {p_k}")
    return (params.L / params.M) * params.R * eff_value(model, gamma_k) / p_k


# ---------------------------------------------------------------------------
# Whole-vector SIR evaluation. These return the same numbers as
# receiver_filter + output_sir for every user, but share the expensive
# factorizations so the equilibrium sweeps stay fast at N ~ a few hundred.
# ---------------------------------------------------------------------------

def matched_filter_sirs(S, heff, p, sigma2, gram_sq=None) -> np.ndarray:
    """SIRs of all users under per-user matched filtering.

    ``gram_sq`` may carry a precomputed elementwise square of S'S with zeroed
    diagonal; passing it avoids rebuilding the K x K matrix every sweep.
    """
    rec = np.asarray(p, float) * np.asarray(heff, float) ** 2
    if gram_sq is None:
        G = S.T @ S
        gram_sq = G ** 2
        np.fill_diagonal(gram_sq, 0.0)
    own = np.einsum("nk,nk->k", S, S)  # s_k's_k, equals 1 for unit-norm columns
    return rec * own ** 2 / (sigma2 * own + gram_sq @ rec)


def decorrelator_sirs(S, heff, p, sigma2, noise_diag=None) -> np.ndarray:
    """SIRs under zero-forcing: gamma_k = p_k h_k^2 / (sigma2 [(S'S)^-1]_kk)."""
    rec = np.asarray(p, float) * np.asarray(heff, float) ** 2
    if noise_diag is None:
        noise_diag = np.diag(_zf_columns(S)).copy()
    return rec / (sigma2 * noise_diag)


def mmse_sirs(S, heff, p, sigma2) -> np.ndarray:
    """SIRs of all users under per-user MMSE filtering.

    Uses the rank-one downdate identity: with A = S diag(p h^2) S' + sigma2 I
    (all users included), s_k' A_k^-1 s_k = q_k / (1 - p_k h_k^2 q_k) where
    q_k = s_k' A^-1 s_k, so a single factorization serves every user.
    """
    rec = np.asarray(p, float) * np.asarray(heff, float) ** 2
    A = (S * rec) @ S.T + sigma2 * np.eye(S.shape[0])
    q = np.einsum("nk,nk->k", S, np.linalg.solve(A, S))
    ratio = rec * q  # equals gamma/(1+gamma), always in [0, 1)
    return ratio / (1.0 - ratio)


def sir_all_users(kind: ReceiverKind, S, heff, p, sigma2) -> np.ndarray:
    if kind is ReceiverKind.MATCHED_FILTER:
        return matched_filter_sirs(S, heff, p, sigma2)
    if kind is ReceiverKind.DECORRELATOR:
        return decorrelator_sirs(S, heff, p, sigma2)
    return mmse_sirs(S, heff, p, sigma2)


def utility_vs_power_curve(k: int, realization: ChannelRealization,
                           kind: ReceiverKind, other_powers, p_grid,
                           params: SystemParams, model: EfficiencyModel):
    """Utility of user k along a power grid with all other powers frozen.

    The filter is independent of the user's own power for all three receiver
    kinds (the MMSE matrix A_k excludes user k), so it is derived once from
    the frozen interference and reused across the grid.
    """
    p_grid = np.asarray(p_grid, dtype=float)
    if np.any(p_grid <= 0) or np.any(np.diff(p_grid) <= 0):
        raise ValueError("power grid must be strictly positive and increasing")
    heff = realization.H[0]
    powers = np.asarray(other_powers, dtype=float).copy()
    c = receiver_filter(kind, k, realization.S, heff, powers, params.sigma2)
    curve = []
    for p_k in p_grid:
        powers[k] = p_k
        g = output_sir(c, k, realization.S, heff, powers, params.sigma2)
        curve.append((float(p_k), utility(float(p_k), g, params, model)))
    return curve
