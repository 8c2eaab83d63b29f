"""Closed-form step sizes and communication-round bound evaluators.

All round-count evaluators are ORDER-LEVEL: the hidden big-O constants are
normalized to 1, so the outputs are for trend comparison (how the count
scales with K, rho, delta, ...), never absolute round predictions. Each
evaluator uses exactly the logarithm its bound carries: log(1/(mu*eps))
for the strongly convex / PL tracking bounds, log(1/eps) for the
over-parameterized least-squares bounds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

__all__ = [
    "TheoryError",
    "RegimeError",
    "BoundInputs",
    "stepsize_thm1",
    "rounds_dgt_scvx",
    "rounds_dgt_pl",
    "zeta",
    "rounds_dgd_pl",
    "rounds_dgd_ols",
    "rounds_dgt_ols",
    "optimal_k",
]


class TheoryError(ValueError):
    pass


class RegimeError(TheoryError):
    pass


@dataclass(frozen=True)
class BoundInputs:
    L: float
    mu: float
    delta: float = 0.0
    beta: float = 0.0
    rho: float = 0.0
    K: int = 0
    epsilon: float = 1e-6

    def __post_init__(self):
        if self.mu <= 0 or self.L < self.mu:
            raise TheoryError("need L >= mu > 0")
        if not 0.0 <= self.rho < 1.0:
            raise TheoryError("need 0 <= rho < 1")
        if self.delta < 0 or self.beta < 0:
            raise TheoryError("delta and beta must be >= 0")
        if self.K < 0:
            raise TheoryError("K must be >= 0")
        if self.epsilon <= 0:
            raise TheoryError("epsilon must be > 0")


def stepsize_thm1(b: BoundInputs) -> float:
    """Explicit tuned step size for local gradient tracking:

    eta = 1 / (2 (L + K mu/(1-rho) + K delta/(1-rho) + rho K (L+delta)/(1-rho)^2))
    """
    gap = 1.0 - b.rho
    denom = b.L + b.K * b.mu / gap + b.K * b.delta / gap \
        + b.rho * b.K * (b.L + b.delta) / gap ** 2
    return 1.0 / (2.0 * denom)


def _log_mu_eps(b: BoundInputs) -> float:
    return math.log(1.0 / (b.mu * b.epsilon))


def _log_eps(b: BoundInputs) -> float:
    return math.log(1.0 / b.epsilon)


def rounds_dgt_scvx(b: BoundInputs) -> float:
    """Round count for local gradient tracking, strongly convex average loss:

    (L/(mu(K+1)) + (delta+mu)/(mu(1-rho)) + rho(delta+L)/((1-rho)^2 mu)) log(1/(mu eps))
    """
    gap = 1.0 - b.rho
    core = b.L / (b.mu * (b.K + 1)) + (b.delta + b.mu) / (b.mu * gap) \
        + b.rho * (b.delta + b.L) / (gap ** 2 * b.mu)
    return core * _log_mu_eps(b)


def rounds_dgt_pl(b: BoundInputs) -> float:
    """PL generalization: beta enters both network terms; beta=0 reduces
    exactly to the strongly convex bound."""
    gap = 1.0 - b.rho
    core = b.L / (b.mu * (b.K + 1)) + (b.delta + b.beta + b.mu) / (b.mu * gap) \
        + b.rho * (b.delta + b.L + b.beta) / (gap ** 2 * b.mu)
    return core * _log_mu_eps(b)


def zeta(b: BoundInputs) -> float:
    """Restricted-heterogeneity margin 1 - (delta/mu)^2; requires delta < mu."""
    if b.delta >= b.mu:
        raise RegimeError(
            f"restricted-heterogeneity bound inapplicable: delta={b.delta} >= mu={b.mu}"
        )
    return 1.0 - (b.delta / b.mu) ** 2


def rounds_dgd_pl(b: BoundInputs) -> float:
    """Round count for local DGD in the shared-minimizer PL regime:

    (L/(mu(K+1) zeta) + 1/(1-rho) + (beta+rho^2 L)/(mu(1-rho)^2 zeta^2)) log(1/(mu eps))
    """
    z = zeta(b)
    gap = 1.0 - b.rho
    core = b.L / (b.mu * (b.K + 1) * z) + 1.0 / gap \
        + (b.beta + b.rho ** 2 * b.L) / (b.mu * gap ** 2 * z ** 2)
    return core * _log_mu_eps(b)


def rounds_dgd_ols(b: BoundInputs) -> float:
    """Local DGD on over-parameterized least squares (no delta < mu needed):

    (L/(mu(K+1)) + delta^2/(mu^2 (1-rho))) log(1/eps)
    """
    core = b.L / (b.mu * (b.K + 1)) + b.delta ** 2 / (b.mu ** 2 * (1.0 - b.rho))
    return core * _log_eps(b)


def rounds_dgt_ols(b: BoundInputs) -> float:
    """Local gradient tracking on over-parameterized least squares
    (PL bound with beta = 0 and log(1/eps))."""
    gap = 1.0 - b.rho
    core = b.L / (b.mu * (b.K + 1)) + (b.delta + b.mu) / (b.mu * gap) \
        + b.rho * (b.delta + b.L) / (gap ** 2 * b.mu)
    return core * _log_eps(b)


def optimal_k(b: BoundInputs) -> int:
    """Local-update count beyond which extra local steps stop paying off:

    K_star = floor(L (1-rho)^2 / (rho (L-mu) + delta + mu)), clamped >= 0.
    """
    denom = b.rho * (b.L - b.mu) + b.delta + b.mu
    if denom <= 0:
        raise TheoryError("K_star denominator must be positive")
    return max(0, math.floor(b.L * (1.0 - b.rho) ** 2 / denom))
