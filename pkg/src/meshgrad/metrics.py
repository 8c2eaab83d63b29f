"""Per-round convergence diagnostics and trace post-processing.

The diagnostics per communication round r (agent columns x^i, average
x_bar, tracking columns y^i where present):

    F_r     = f(x_bar^r) - f_star            (raw f(x_bar^r) if f_star unknown)
    S_r     = sum_i ||x^i - x_bar||^2        (consensus error)
    Gamma_r = (1/m) ||Y_r - grad_f(X_r)||^2  (tracking error; column i of
              grad_f(X_r) is the FULL average gradient at x^i)
    G_r     = (1/(m(K+1))) sum_i sum_k ||grad_f(x^i_{r,k})||^2
    D_r     = sum_i sum_k ||x^i_{r,k} - x_bar^r||^2  (local-update drift)

G_r and D_r sum over the K+1 inner iterates of round r; when the runner is
asked not to retain inner iterates they fall back to the k=0 values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import linalg, problems

__all__ = [
    "MetricsError",
    "OracleError",
    "RoundMetrics",
    "RunTrace",
    "round_metrics",
    "rounds_to_epsilon",
    "fit_linear_rate",
    "reference_optimum",
    "trace_to_csv",
]

MEASURES = ("avg_grad_norm", "suboptimality", "dist_min_norm")


class MetricsError(ValueError):
    pass


class OracleError(MetricsError):
    pass


@dataclass(frozen=True)
class RoundMetrics:
    r: int
    F_r: float
    f_star_known: bool
    S_r: float
    avg_grad_norm: float
    Gamma_r: float | None = None
    G_r: float | None = None
    D_r: float | None = None
    dist_min_norm: float | None = None
    grad_evals_per_agent: int = 0

    @property
    def comm_rounds(self) -> int:
        return self.r

    def measure(self, name: str) -> float:
        if name == "avg_grad_norm":
            return self.avg_grad_norm
        if name == "suboptimality":
            if not self.f_star_known:
                raise MetricsError("suboptimality measure requires a known f_star")
            return self.F_r
        if name == "dist_min_norm":
            if self.dist_min_norm is None:
                raise MetricsError("dist_min_norm measure requires x_star")
            return self.dist_min_norm
        raise MetricsError(f"unknown measure {name!r}")


@dataclass
class RunTrace:
    config: dict
    rounds: list = field(default_factory=list)
    termination: str = "max_rounds"  # reached_epsilon | max_rounds | diverged

    def measure_series(self, name: str) -> list:
        return [row.measure(name) for row in self.rounds]

    @property
    def final(self) -> RoundMetrics:
        return self.rounds[-1]


def round_metrics(p, state, inner_iterates=(), f_star=None, x_star=None,
                  track_error: bool = True) -> RoundMetrics:
    """Diagnostics at the start of round `state.round`.

    `inner_iterates` is the list of the K+1 stacked iterates X_{r,k} of the
    just-finished round (empty means: report G_r/D_r from k=0 only).
    `track_error` disables the Gamma_r / G_r / D_r computations (they need
    m extra full-gradient evaluations each) for cheap tuning runs.
    """
    x = state.x
    m = x.shape[1]
    x_bar = x.mean(axis=1)
    dev = x - x_bar[:, None]
    s_r = float((dev * dev).sum())
    g_bar = problems.average_gradient(p, x_bar)
    avg_grad_norm = float(np.linalg.norm(g_bar))

    f_val = problems.average_loss(p, x_bar)
    if f_star is not None:
        f_r, known = f_val - f_star, True
    else:
        f_r, known = f_val, False

    dist = None
    if x_star is not None:
        dist = float(np.linalg.norm(x_bar - x_star))

    gamma = g_r = d_r = None
    if track_error:
        if state.y is not None:
            grad_f_cols = np.column_stack(
                [problems.average_gradient(p, x[:, i]) for i in range(m)]
            )
            gamma = float(np.linalg.norm(state.y - grad_f_cols, "fro") ** 2) / m
        iters = list(inner_iterates) if len(inner_iterates) else [x]
        g_sum = 0.0
        d_sum = 0.0
        for xk in iters:
            for i in range(m):
                g_sum += float(
                    np.linalg.norm(problems.average_gradient(p, xk[:, i])) ** 2
                )
            dk = xk - x_bar[:, None]
            d_sum += float((dk * dk).sum())
        g_r = g_sum / (m * len(iters))
        d_r = d_sum

    return RoundMetrics(
        r=state.round,
        F_r=f_r,
        f_star_known=known,
        S_r=s_r,
        avg_grad_norm=avg_grad_norm,
        Gamma_r=gamma,
        G_r=g_r,
        D_r=d_r,
        dist_min_norm=dist,
        grad_evals_per_agent=state.round * (state.k_local + 1),
    )


def rounds_to_epsilon(trace: RunTrace, measure: str, epsilon: float):
    """Smallest round index whose measure is <= epsilon, or None."""
    for row in trace.rounds:
        if row.measure(measure) <= epsilon:
            return row.r
    return None


def fit_linear_rate(trace: RunTrace, measure: str, last_fraction: float = 0.5) -> dict:
    """OLS fit of ln(measure) against the round index on the trailing window.

    The window is the last `last_fraction` of the rounds, truncated at the
    first nonpositive measure value. slope < 0 indicates linear convergence
    with per-round factor exp(slope).
    """
    if not 0.0 < last_fraction <= 1.0:
        raise MetricsError("last_fraction must be in (0, 1]")
    rows = trace.rounds
    start = int(math.floor(len(rows) * (1.0 - last_fraction)))
    window = rows[start:]
    vals = []
    for row in window:
        v = row.measure(measure)
        if v <= 0.0:
            break
        vals.append((row.r, math.log(v)))
    if len(vals) < 5:
        raise MetricsError(
            f"need >= 5 positive measure values in window, got {len(vals)}"
        )
    rs = np.array([r for r, _ in vals], dtype=float)
    ys = np.array([y for _, y in vals])
    slope, intercept = np.polyfit(rs, ys, 1)
    pred = slope * rs + intercept
    ss_res = float(((ys - pred) ** 2).sum())
    ss_tot = float(((ys - ys.mean()) ** 2).sum())
    r_squared = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return {"slope": float(slope), "r_squared": r_squared}


def reference_optimum(p, grad_tol: float = 1e-12, max_iters: int = 1_000_000) -> dict:
    """Independent optimum oracle for F_r and dist_min_norm.

    Least squares (interpolation regime): x_star is the minimum norm
    solution of the stacked system and f_star = 0. Ridge logistic: f_star
    from a high-precision centralized gradient descent (step 1/L), x_star
    omitted.
    """
    if p.kind == problems.LEAST_SQUARES:
        a, b = problems.stacked_design(p)
        x_star = linalg.min_norm_solution(a, b)
        return {"f_star": 0.0, "x_star": x_star}

    consts = problems.measure_constants(p, delta_samples=0)
    step = 1.0 / consts.L
    x = np.zeros(p.d)
    for _ in range(max_iters):
        g = problems.average_gradient(p, x)
        if float(np.linalg.norm(g)) <= grad_tol:
            return {"f_star": problems.average_loss(p, x), "x_star": None}
        x -= step * g
    raise OracleError(
        f"centralized solve did not reach grad norm {grad_tol} in {max_iters} iters"
    )


CSV_HEADER = ("round,comm_rounds,grad_evals_per_agent,"
              "F_r,S_r,Gamma_r,G_r,D_r,avg_grad_norm,dist_min_norm")


def _cell(v) -> str:
    return "" if v is None else f"{v:.17g}"


def trace_to_csv(trace: RunTrace) -> str:
    lines = [CSV_HEADER]
    for row in trace.rounds:
        lines.append(",".join([
            str(row.r),
            str(row.comm_rounds),
            str(row.grad_evals_per_agent),
            _cell(row.F_r),
            _cell(row.S_r),
            _cell(row.Gamma_r),
            _cell(row.G_r),
            _cell(row.D_r),
            _cell(row.avg_grad_norm),
            _cell(row.dist_min_norm),
        ]))
    return "\n".join(lines) + "\n"
