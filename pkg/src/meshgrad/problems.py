"""Loss suite, synthetic data generators, LIBSVM ingestion, constants.

Two loss families are supported, matching the experiments this package
reproduces:

* ridge logistic regression (classification):
      f_i(x) = sum_j ln(1 + exp(-y_ij a_ij^T x)) + reg * ||x||^2
  Note the sample sum is NOT divided by n_i and the ridge coefficient is
  `reg` (not reg/2), so grad includes 2*reg*x.

* least squares (regression, typically over-parameterized):
      f_i(x) = 1/(2 n_i) ||A_i x - b_i||^2
"""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np

from . import linalg
from .topology import RNG_ALGORITHM  # noqa: F401  (re-exported for manifests)

__all__ = [
    "ProblemError",
    "LibsvmParseError",
    "Dataset",
    "Problem",
    "ProblemConstants",
    "loss_value",
    "loss_gradient",
    "gradient_matrix",
    "average_gradient",
    "average_loss",
    "generate_drlr_connectivity_scenario",
    "generate_drlr_heterogeneity_scenario",
    "generate_overparam_ols",
    "parse_libsvm",
    "serialize_libsvm",
    "densify",
    "partition_uniform",
    "partition_by_class",
    "labels_from_rule",
    "stacked_design",
    "dataset_to_csv",
    "measure_constants",
]

RIDGE_LOGISTIC = "ridge_logistic"
LEAST_SQUARES = "least_squares"


class ProblemError(ValueError):
    pass


class LibsvmParseError(ProblemError):
    def __init__(self, message, line_no):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


@dataclass(frozen=True, eq=False)
class Dataset:
    """Per-agent design matrices and labels.

    features[i] is (n_i, d); labels[i] is (n_i,). For classification the
    labels are in {-1, +1}; for regression they are the targets b_i.
    """

    features: tuple
    labels: tuple

    def __post_init__(self):
        if len(self.features) != len(self.labels) or not self.features:
            raise ProblemError("need one (features, labels) pair per agent")
        d = self.features[0].shape[1]
        for a, y in zip(self.features, self.labels):
            if a.ndim != 2 or a.shape[1] != d:
                raise ProblemError("all feature matrices must share dimension d")
            if a.shape[0] != y.shape[0] or a.shape[0] < 1:
                raise ProblemError("each agent needs n_i >= 1 labeled samples")

    @property
    def m(self) -> int:
        return len(self.features)

    @property
    def d(self) -> int:
        return self.features[0].shape[1]

    @property
    def sample_counts(self) -> tuple:
        return tuple(a.shape[0] for a in self.features)

    @property
    def total_samples(self) -> int:
        return sum(self.sample_counts)


@dataclass(frozen=True, eq=False)
class Problem:
    """A set of m local losses with value/gradient oracles."""

    kind: str
    data: Dataset
    reg: float = 0.0

    def __post_init__(self):
        if self.kind not in (RIDGE_LOGISTIC, LEAST_SQUARES):
            raise ProblemError(f"unknown problem kind {self.kind!r}")
        if self.reg < 0:
            raise ProblemError("ridge coefficient must be >= 0")
        if self.kind == RIDGE_LOGISTIC:
            for y in self.data.labels:
                if not np.all(np.isin(y, (-1.0, 1.0))):
                    raise ProblemError("classification labels must be -1/+1")

    @property
    def m(self) -> int:
        return self.data.m

    @property
    def d(self) -> int:
        return self.data.d


@dataclass(frozen=True)
class ProblemConstants:
    """Measured smoothness / convexity / heterogeneity constants.

    For least squares these are exact spectral quantities of the data
    covariances; for logistic losses L and mu are analytic bounds and
    delta is a sampled lower-bound estimate.
    """

    L: float
    mu: float
    delta: float
    beta: float = 0.0

    @property
    def zeta(self) -> float:
        return 1.0 - (self.delta / self.mu) ** 2


def _check_dim(p: Problem, x: np.ndarray) -> np.ndarray:
    x = linalg.as_vector(x)
    if x.shape[0] != p.d:
        raise ProblemError(f"x has dim {x.shape[0]}, problem has d={p.d}")
    return x


def loss_value(p: Problem, agent: int, x) -> float:
    x = _check_dim(p, x)
    a, y = p.data.features[agent], p.data.labels[agent]
    if p.kind == RIDGE_LOGISTIC:
        margins = -y * (a @ x)
        # log(1 + exp(t)) computed stably for large |t|
        vals = np.logaddexp(0.0, margins)
        return float(vals.sum() + p.reg * (x @ x))
    resid = a @ x - y
    return float(0.5 * (resid @ resid) / a.shape[0])


def loss_gradient(p: Problem, agent: int, x) -> np.ndarray:
    x = _check_dim(p, x)
    a, y = p.data.features[agent], p.data.labels[agent]
    if p.kind == RIDGE_LOGISTIC:
        margins = -y * (a @ x)
        sig = _sigmoid(margins)
        return a.T @ (-y * sig) + 2.0 * p.reg * x
    resid = a @ x - y
    return (a.T @ resid) / a.shape[0]


def _sigmoid(t: np.ndarray) -> np.ndarray:
    out = np.empty_like(t)
    pos = t >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-t[pos]))
    e = np.exp(t[~pos])
    out[~pos] = e / (1.0 + e)
    return out


def gradient_matrix(p: Problem, x_cols: np.ndarray) -> np.ndarray:
    """Stacked gradients [grad f_1(x^1), ..., grad f_m(x^m)], d x m.

    Column i of `x_cols` is agent i's point.
    """
    out = np.empty_like(x_cols)
    for i in range(p.m):
        out[:, i] = loss_gradient(p, i, x_cols[:, i])
    return out


def average_gradient(p: Problem, x) -> np.ndarray:
    """Gradient of f = (1/m) sum_i f_i at a common point x."""
    x = _check_dim(p, x)
    total = np.zeros(p.d)
    for i in range(p.m):
        total += loss_gradient(p, i, x)
    return total / p.m


def average_loss(p: Problem, x) -> float:
    x = _check_dim(p, x)
    return sum(loss_value(p, i, x) for i in range(p.m)) / p.m


# ---------------------------------------------------------------------------
# Synthetic data generators
# ---------------------------------------------------------------------------

def labels_from_rule(rng, a: np.ndarray, x_true: np.ndarray) -> np.ndarray:
    # s ~ 1 + U(0,1); y = +1 iff s <= 1 + exp(-a^T x_true)
    s = 1.0 + rng.random(a.shape[0])
    return np.where(s <= 1.0 + np.exp(-(a @ x_true)), 1.0, -1.0)


def generate_drlr_connectivity_scenario(m: int = 20, n: int = 1000, d: int = 5,
                                        seed: int = 0) -> Dataset:
    """Synthetic classification data with per-agent feature mean shifts.

    Agent i (1-based in the mean) draws features from
    N(0.2*i*1_d, 0.55*I_d); the planted local model is x_i = x_b + v_i
    with x_b, v_i standard normal. Labels follow the rejection rule on
    1 + exp(-a^T x_i).
    """
    rng = np.random.Generator(np.random.PCG64(seed))
    x_b = rng.standard_normal(d)
    feats, labs = [], []
    for i in range(1, m + 1):
        v_i = rng.standard_normal(d)
        x_i = x_b + v_i
        a = 0.2 * i + np.sqrt(0.55) * rng.standard_normal((n, d))
        feats.append(a)
        labs.append(labels_from_rule(rng, a, x_i))
    return Dataset(tuple(feats), tuple(labs))


def generate_drlr_heterogeneity_scenario(m: int = 20, n: int = 100, d: int = 80,
                                         delta_gen: float = 0.99,
                                         seed: int = 0) -> Dataset:
    """Classification data with controlled cross-agent feature similarity.

    Agent 1 draws standard normal features; agent i >= 2 reuses agent 1's
    features plus delta_gen times a fresh standard normal perturbation.
    delta_gen = 0 (identical agents) is allowed for testing.
    """
    if delta_gen < 0:
        raise ProblemError("delta_gen must be >= 0")
    rng = np.random.Generator(np.random.PCG64(seed))
    x_b = rng.standard_normal(d)
    a1 = rng.standard_normal((n, d))
    feats, labs = [], []
    for i in range(m):
        v_i = rng.standard_normal(d)
        x_i = x_b + v_i
        a = a1 if i == 0 else a1 + delta_gen * rng.standard_normal((n, d))
        feats.append(a)
        labs.append(labels_from_rule(rng, a, x_i))
    return Dataset(tuple(feats), tuple(labs))


def generate_overparam_ols(m: int, n_per_agent: int, d: int,
                           heterogeneity: float = 0.0, seed: int = 0) -> Problem:
    """Planted interpolation least-squares instance with d > m*n_per_agent.

    Agent i's rows are N(mu_i, I_d) with ||mu_i|| spread controlled by the
    `heterogeneity` knob; b_i = A_i x_planted for a shared planted model,
    so all agents interpolate at x_planted.
    """
    n_total = m * n_per_agent
    if n_total >= d:
        raise ProblemError(f"over-parameterized regime needs m*n < d, got {n_total} >= {d}")
    rng = np.random.Generator(np.random.PCG64(seed))
    x_planted = rng.standard_normal(d)
    feats, labs = [], []
    for i in range(m):
        mean_i = heterogeneity * i * rng.standard_normal(d) / np.sqrt(d)
        a = mean_i + rng.standard_normal((n_per_agent, d))
        feats.append(a)
        labs.append(a @ x_planted)
    return Problem(LEAST_SQUARES, Dataset(tuple(feats), tuple(labs)))


def stacked_design(p: Problem) -> tuple:
    """All agents' rows stacked into one (N, d) system, with targets."""
    a = np.vstack(p.data.features)
    b = np.concatenate(p.data.labels)
    return a, b


# ---------------------------------------------------------------------------
# LIBSVM format
# ---------------------------------------------------------------------------

def parse_libsvm(stream) -> list:
    """Parse LIBSVM text into [(label, [(index, value), ...]), ...].

    Labels are mapped to {-1.0, +1.0}: accepts -1/+1 and 0/1 conventions,
    with 0 mapped to -1. Feature indices are 1-based and must be strictly
    increasing per line. Raises LibsvmParseError with the 1-based line
    number of the first offending line.
    """
    if isinstance(stream, str):
        stream = io.StringIO(stream)
    records = []
    saw_line = False
    for line_no, raw in enumerate(stream, start=1):
        line = raw.strip()
        if not line:
            continue
        saw_line = True
        tokens = line.split()
        try:
            label_val = float(tokens[0])
        except ValueError:
            raise LibsvmParseError(f"malformed label {tokens[0]!r}", line_no) from None
        if label_val in (1.0, -1.0):
            label = label_val
        elif label_val == 0.0:
            label = -1.0
        else:
            raise LibsvmParseError(f"unsupported label {tokens[0]!r}", line_no)
        pairs = []
        prev_idx = 0
        for tok in tokens[1:]:
            idx_s, _, val_s = tok.partition(":")
            try:
                idx = int(idx_s)
                val = float(val_s)
            except ValueError:
                raise LibsvmParseError(f"malformed token {tok!r}", line_no) from None
            if idx <= prev_idx:
                raise LibsvmParseError(
                    f"non-increasing index {idx} after {prev_idx}", line_no
                )
            prev_idx = idx
            pairs.append((idx, val))
        records.append((label, pairs))
    if not saw_line:
        raise LibsvmParseError("empty file", 1)
    return records


def serialize_libsvm(records) -> str:
    lines = []
    for label, pairs in records:
        parts = [f"{int(label):+d}"] + [f"{idx}:{val!r}" for idx, val in pairs]
        lines.append(" ".join(parts))
    return "\n".join(lines) + "\n"


def densify(records, d: int) -> tuple:
    """Turn parsed LIBSVM records into a dense (N, d) matrix and labels."""
    n = len(records)
    feats = np.zeros((n, d))
    labels = np.empty(n)
    for row, (label, pairs) in enumerate(records):
        labels[row] = label
        for idx, val in pairs:
            if idx > d:
                raise ProblemError(f"feature index {idx} exceeds d={d}")
            feats[row, idx - 1] = val
    return feats, labels


# ---------------------------------------------------------------------------
# Partitioning
# ---------------------------------------------------------------------------

def partition_uniform(features: np.ndarray, labels: np.ndarray, m: int,
                      seed: int = 0) -> Dataset:
    """Shuffled equal split of N samples over m agents (drops remainder)."""
    n = features.shape[0]
    per = n // m
    if per < 1:
        raise ProblemError(f"cannot split {n} samples over {m} agents")
    order = np.random.Generator(np.random.PCG64(seed)).permutation(n)
    feats, labs = [], []
    for i in range(m):
        idx = order[i * per:(i + 1) * per]
        feats.append(features[idx])
        labs.append(labels[idx])
    return Dataset(tuple(feats), tuple(labs))


def partition_by_class(features: np.ndarray, labels: np.ndarray,
                       class_counts) -> Dataset:
    """Deterministic split by label: class_counts[i] = (n_pos, n_neg).

    Samples are assigned to agents in file order within each class.
    """
    pos_idx = np.flatnonzero(labels == 1.0)
    neg_idx = np.flatnonzero(labels == -1.0)
    need_pos = sum(c[0] for c in class_counts)
    need_neg = sum(c[1] for c in class_counts)
    if need_pos > pos_idx.size or need_neg > neg_idx.size:
        raise ProblemError(
            f"insufficient class counts: need {need_pos}+/{need_neg}-, "
            f"have {pos_idx.size}+/{neg_idx.size}-"
        )
    feats, labs = [], []
    p_at = n_at = 0
    for n_pos, n_neg in class_counts:
        idx = np.concatenate([pos_idx[p_at:p_at + n_pos], neg_idx[n_at:n_at + n_neg]])
        if idx.size < 1:
            raise ProblemError("each agent needs at least one sample")
        p_at += n_pos
        n_at += n_neg
        feats.append(features[idx])
        labs.append(labels[idx])
    return Dataset(tuple(feats), tuple(labs))


def dataset_to_csv(ds: Dataset) -> str:
    """CSV sidecar: header agent,sample,label,f0..f{d-1}."""
    header = "agent,sample,label," + ",".join(f"f{k}" for k in range(ds.d))
    lines = [header]
    for i, (a, y) in enumerate(zip(ds.features, ds.labels)):
        for j in range(a.shape[0]):
            row = ",".join(repr(float(v)) for v in a[j])
            lines.append(f"{i},{j},{repr(float(y[j]))},{row}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Problem constants
# ---------------------------------------------------------------------------

_EIG_REL_TOL = 1e-10


def measure_constants(p: Problem, delta_samples: int = 100, seed: int = 0) -> ProblemConstants:
    """Measure L, mu, delta (and beta = 0) for the problem.

    Least squares: exact spectral quantities of the per-agent covariances
    C_i = A_i^T A_i / n_i; L and mu are the largest and smallest NONZERO
    eigenvalue of the mean covariance, delta = max_i ||C_i - C_mean||_2.

    Ridge logistic: L is the analytic upper bound
    (1/m) sum_i lambda_max(sum_j a a^T)/4 + 2*reg, mu = 2*reg, and delta
    is a sampled lower-bound estimate from gradient difference quotients.
    """
    if p.kind == LEAST_SQUARES:
        covs = [a.T @ a / a.shape[0] for a in p.data.features]
        c_mean = sum(covs) / p.m
        eigs = np.linalg.eigvalsh(c_mean)
        lam_max = float(eigs[-1])
        if lam_max <= 0:
            raise ProblemError("zero data: mean covariance has no nonzero eigenvalue")
        nonzero = eigs[eigs > _EIG_REL_TOL * lam_max]
        mu = float(nonzero[0])
        delta = max(
            float(np.abs(np.linalg.eigvalsh(c - c_mean)).max()) for c in covs
        )
        return ProblemConstants(L=lam_max, mu=mu, delta=delta, beta=0.0)

    # ridge logistic
    lam_sum = 0.0
    for a in p.data.features:
        lam_sum += float(np.linalg.eigvalsh(a.T @ a)[-1])
    L = 0.25 * lam_sum / p.m + 2.0 * p.reg
    mu = 2.0 * p.reg
    rng = np.random.Generator(np.random.PCG64(seed))
    delta = 0.0
    for _ in range(delta_samples):
        x = rng.standard_normal(p.d)
        y = rng.standard_normal(p.d)
        gap = np.linalg.norm(x - y)
        if gap < 1e-12:
            continue
        gfx, gfy = average_gradient(p, x), average_gradient(p, y)
        for i in range(p.m):
            dx = gfx - loss_gradient(p, i, x)
            dy = gfy - loss_gradient(p, i, y)
            delta = max(delta, float(np.linalg.norm(dx - dy)) / gap)
    return ProblemConstants(L=L, mu=mu, delta=delta, beta=0.0)
