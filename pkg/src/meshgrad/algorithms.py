"""Local DGD and local DGT as deterministic round-based state machines.

Both optimizers run K ADDITIONAL local gradient updates per communication
round, so one round costs K+1 gradient evaluations per agent: the (K+1)-th
evaluation is fused into the gossip averaging step. With K = 0 they reduce
to standard DGD and to the adapt-then-combine form of gradient tracking.

One round of local DGD on the stacked iterate X (d x m, one column per
agent), with gradF(X) the column-wise local gradients:

    for k in 0..K-1:  X <- X - eta * gradF(X)
    X <- (X - eta * gradF(X)) @ W

One round of local DGT with tracking matrix Y (X_r, Y_r are the round-start
values):

    for k in 0..K-1:  X <- X - eta * (Y_r + gradF(X) - gradF(X_r))
    Y_K   = Y_r + gradF(X) - gradF(X_r)
    X_new = (X - eta * Y_K) @ W
    Y_new = (Y_K + gradF(X_new) - gradF(X)) @ W

Gradient tracking conserves the column mean: mean(Y) always equals the
mean of the local gradients at the current columns.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from . import problems
from .metrics import RoundMetrics, RunTrace, round_metrics
from .topology import MixingMatrix

__all__ = [
    "DGD",
    "DGT",
    "AlgorithmError",
    "DivergenceError",
    "TuningError",
    "AlgorithmState",
    "StoppingRule",
    "init",
    "step_round_dgd",
    "step_round_dgt",
    "step_round",
    "run",
    "tune_step_size",
    "default_step_grid",
]

DGD = "dgd"
DGT = "dgt"

DIVERGENCE_LIMIT = 1e100


class AlgorithmError(ValueError):
    pass


class DivergenceError(AlgorithmError):
    def __init__(self, round_index):
        super().__init__(f"iterate exceeded {DIVERGENCE_LIMIT:g} at round {round_index}")
        self.round_index = round_index


class TuningError(AlgorithmError):
    pass


@dataclass(frozen=True, eq=False)
class AlgorithmState:
    """Stacked iterates: column i of x (and y, for DGT) belongs to agent i."""

    algorithm: str
    x: np.ndarray
    y: np.ndarray | None
    round: int
    k_local: int
    eta: float


@dataclass(frozen=True)
class StoppingRule:
    max_rounds: int
    epsilon: float = 0.0
    measure: str = "avg_grad_norm"

    def __post_init__(self):
        if self.max_rounds < 1:
            raise AlgorithmError("max_rounds must be >= 1")
        if self.epsilon < 0:
            raise AlgorithmError("epsilon must be >= 0")


def init(p, w: MixingMatrix, algorithm: str, k_local: int, eta: float,
         x0_policy: str = "zeros", seed: int = 0) -> AlgorithmState:
    """Build the initial state; for DGT the tracking columns start at the
    local gradients y^i = grad f_i(x^i_0)."""
    if algorithm not in (DGD, DGT):
        raise AlgorithmError(f"unknown algorithm {algorithm!r}")
    if eta <= 0:
        raise AlgorithmError("step size must be positive")
    if k_local < 0:
        raise AlgorithmError("K must be >= 0")
    if w.m != p.m:
        raise AlgorithmError(f"mixing matrix has m={w.m}, problem has m={p.m}")
    d, m = p.d, p.m
    if x0_policy == "zeros":
        x = np.zeros((d, m))
    elif x0_policy == "shared_random":
        rng = np.random.Generator(np.random.PCG64(seed))
        x = np.tile(rng.standard_normal(d)[:, None], (1, m))
    elif x0_policy == "per_agent_random":
        rng = np.random.Generator(np.random.PCG64(seed))
        x = rng.standard_normal((d, m))
    else:
        raise AlgorithmError(f"unknown x0 policy {x0_policy!r}")
    y = problems.gradient_matrix(p, x) if algorithm == DGT else None
    return AlgorithmState(algorithm=algorithm, x=x, y=y, round=0,
                          k_local=k_local, eta=eta)


def _check_finite(x: np.ndarray, round_index: int) -> None:
    if not np.all(np.abs(x) <= DIVERGENCE_LIMIT):
        raise DivergenceError(round_index)


def step_round_dgd(state: AlgorithmState, p, w: MixingMatrix):
    """One communication round of local DGD.

    Returns (new_state, inner_iterates) where inner_iterates holds the K+1
    stacked points x_{r,0..K} visited during the round.
    """
    if state.algorithm != DGD:
        raise AlgorithmError("state is not a DGD state")
    eta = state.eta
    x = state.x
    inner = [x]
    for _ in range(state.k_local):
        x = x - eta * problems.gradient_matrix(p, x)
        _check_finite(x, state.round)
        inner.append(x)
    x_new = (x - eta * problems.gradient_matrix(p, x)) @ w.w
    _check_finite(x_new, state.round)
    return replace(state, x=x_new, round=state.round + 1), inner


def step_round_dgt(state: AlgorithmState, p, w: MixingMatrix):
    """One communication round of local DGT (compact stacked form)."""
    if state.algorithm != DGT:
        raise AlgorithmError("state is not a DGT state")
    eta = state.eta
    x_r, y_r = state.x, state.y
    g_r = problems.gradient_matrix(p, x_r)
    x = x_r
    g_x = g_r
    inner = [x]
    for _ in range(state.k_local):
        x = x - eta * (y_r + g_x - g_r)
        _check_finite(x, state.round)
        g_x = problems.gradient_matrix(p, x)
        inner.append(x)
    y_k = y_r + g_x - g_r
    x_new = (x - eta * y_k) @ w.w
    _check_finite(x_new, state.round)
    y_new = (y_k + problems.gradient_matrix(p, x_new) - g_x) @ w.w
    return replace(state, x=x_new, y=y_new, round=state.round + 1), inner


def step_round(state: AlgorithmState, p, w: MixingMatrix):
    step = step_round_dgd if state.algorithm == DGD else step_round_dgt
    return step(state, p, w)


def run(state: AlgorithmState, p, w: MixingMatrix, stop: StoppingRule,
        f_star=None, x_star=None, track_error: bool = True,
        metrics_sink=None) -> RunTrace:
    """Drive the optimizer until the stop measure is reached or max_rounds.

    Records one RoundMetrics row per communication round, including the
    r=0 pre-step row. A diverging run is recorded with termination
    'diverged' (its partial trace is returned, not raised).
    `track_error=False` skips the Gamma_r / G_r / D_r diagnostics, which
    need extra full-gradient sweeps; use it for step-size tuning.
    """
    config = {
        "algorithm": state.algorithm,
        "K": state.k_local,
        "eta": state.eta,
        "rho": w.rho,
        "measure": stop.measure,
        "epsilon": stop.epsilon,
        "max_rounds": stop.max_rounds,
    }
    trace = RunTrace(config=config)

    def record(row: RoundMetrics) -> None:
        trace.rounds.append(row)
        if metrics_sink is not None:
            metrics_sink(row)

    def row_at(inner=()):
        return round_metrics(p, state, inner_iterates=inner, f_star=f_star,
                             x_star=x_star, track_error=track_error)

    while True:
        boundary = round_metrics(p, state, inner_iterates=(), f_star=f_star,
                                 x_star=x_star, track_error=False)
        if boundary.measure(stop.measure) <= stop.epsilon:
            record(row_at() if track_error else boundary)
            trace.termination = "reached_epsilon"
            return trace
        if state.round >= stop.max_rounds:
            record(row_at() if track_error else boundary)
            trace.termination = "max_rounds"
            return trace
        try:
            new_state, inner = step_round(state, p, w)
        except DivergenceError:
            record(row_at() if track_error else boundary)
            trace.termination = "diverged"
            return trace
        record(row_at(inner) if track_error else boundary)
        state = new_state


def default_step_grid(L: float, count: int = 8) -> list:
    """Log-spaced step-size grid on [1e-2/L, 1/L]."""
    return list(np.geomspace(1e-2 / L, 1.0 / L, count))


def tune_step_size(p, w: MixingMatrix, algorithm: str, k_local: int,
                   grid, stop: StoppingRule, x0_policy: str = "zeros",
                   seed: int = 0, f_star=None, x_star=None):
    """Pick the grid step size that reaches epsilon in the fewest rounds.

    Runs that never reach epsilon (or diverge) rank after all successful
    runs, ordered by final measure (divergent runs last). Ties break
    toward the larger step size. Returns (eta_best, trace_best).
    """
    grid = [float(g) for g in grid]
    if not grid or any(g <= 0 for g in grid):
        raise TuningError("grid must be a nonempty list of positive step sizes")

    best_key = None
    best = None
    for eta in grid:
        state = init(p, w, algorithm, k_local, eta, x0_policy=x0_policy, seed=seed)
        trace = run(state, p, w, stop, f_star=f_star, x_star=x_star,
                    track_error=False)
        if trace.termination == "reached_epsilon":
            key = (0, trace.final.r, -eta)
        elif trace.termination == "diverged":
            key = (2, float("inf"), -eta)
        else:
            key = (1, trace.final.measure(stop.measure), -eta)
        if best_key is None or key < best_key:
            best_key = key
            best = (eta, trace)
    if best_key[0] == 2:
        raise TuningError("every step size on the grid diverged")
    return best
