"""Declarative experiment configuration (TOML).

A config file has four sections. A complete annotated sample ships as
`examples_config/fig1_top.toml` in the repository root.

    [experiment]        name, seed, output
    [problem]           kind/scenario and its generator parameters
    [topology]          kind, m, p (scalar or list => one point per value),
                        weights ("metropolis" | "uniform")
    [run]               algorithms, K list, step_size policy, stop rule

Validation is static (no data is generated); `validate` reports every
problem found, each tagged with its field path.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from . import problems, topology

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "TopologyPoint",
    "load_config",
    "validate_config",
    "build_problem",
    "build_topology_points",
]

ALGORITHMS = ("dgd", "dgt")
SCENARIOS = ("drlr_connectivity", "drlr_heterogeneity", "overparam_ols", "libsvm")
TOPOLOGY_KINDS = ("ring", "complete", "erdos_renyi")
WEIGHT_SCHEMES = ("metropolis", "uniform")
MEASURES = ("avg_grad_norm", "suboptimality", "dist_min_norm")
STEP_POLICIES = ("grid", "thm1")


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    name: str
    seed: int
    output: str
    problem: dict
    topology: dict
    run: dict
    errors: list = field(default_factory=list)

    # Derived per-component seeds: fixed offsets from the master seed so
    # randomness sources can be ablated independently.
    @property
    def topology_seed(self) -> int:
        return self.seed + 1

    @property
    def data_seed(self) -> int:
        return self.seed + 2


def load_config(path: str) -> ExperimentConfig:
    with open(path, "rb") as fh:
        raw = tomllib.load(fh)
    exp = raw.get("experiment", {})
    cfg = ExperimentConfig(
        name=exp.get("name", "experiment"),
        seed=int(exp.get("seed", 0)),
        output=exp.get("output", "out"),
        problem=raw.get("problem", {}),
        topology=raw.get("topology", {}),
        run=raw.get("run", {}),
    )
    cfg.errors = validate_config(cfg)
    return cfg


def _check(errors, cond, path, message):
    if not cond:
        errors.append(f"{path}: {message}")


def validate_config(cfg: ExperimentConfig) -> list:
    """Static validation; returns a list of 'field.path: message' strings."""
    errs = []
    p, t, r = cfg.problem, cfg.topology, cfg.run

    scenario = p.get("scenario")
    _check(errs, scenario in SCENARIOS, "problem.scenario",
           f"unknown scenario {scenario!r} (expected one of {SCENARIOS})")
    _check(errs, float(p.get("reg", 0.0)) >= 0, "problem.reg", "must be >= 0")
    if scenario == "libsvm":
        path = p.get("path")
        _check(errs, bool(path), "problem.path", "LIBSVM file path is required")
        if path:
            import os
            _check(errs, os.path.exists(path), "problem.path",
                   f"file not found: {path}")
        _check(errs, int(p.get("d", 0)) >= 1, "problem.d", "dimension d is required")
        part = p.get("partition", "uniform")
        _check(errs, part in ("uniform", "by_class"), "problem.partition",
               f"unknown partition scheme {part!r}")
        if part == "by_class":
            _check(errs, bool(p.get("class_counts")), "problem.class_counts",
                   "per-agent [pos, neg] counts are required for by_class")
    elif scenario == "overparam_ols":
        m = int(p.get("m", 0))
        n = int(p.get("n_per_agent", 0))
        d = int(p.get("d", 0))
        _check(errs, m >= 1 and n >= 1 and d >= 1, "problem",
               "m, n_per_agent, d are required")
        _check(errs, m * n < d, "problem.d",
               f"over-parameterized regime needs m*n_per_agent < d ({m * n} >= {d})")
    elif scenario is not None and scenario.startswith("drlr"):
        _check(errs, int(p.get("m", 20)) >= 2, "problem.m", "need m >= 2")
        _check(errs, int(p.get("n", 1)) >= 1, "problem.n", "need n >= 1")
        _check(errs, int(p.get("d", 1)) >= 1, "problem.d", "need d >= 1")
        if scenario == "drlr_heterogeneity":
            _check(errs, float(p.get("delta_gen", 1.0)) >= 0,
                   "problem.delta_gen", "must be >= 0")

    kind = t.get("kind")
    _check(errs, kind in TOPOLOGY_KINDS, "topology.kind",
           f"unknown topology {kind!r} (expected one of {TOPOLOGY_KINDS})")
    _check(errs, int(t.get("m", 0)) >= 2, "topology.m", "need m >= 2")
    weights = t.get("weights", "metropolis")
    _check(errs, weights in WEIGHT_SCHEMES, "topology.weights",
           f"unknown weight scheme {weights!r}")
    if weights == "uniform":
        _check(errs, kind == "complete", "topology.weights",
               "uniform weights require the complete topology")
    if kind == "erdos_renyi":
        ps = t.get("p", [])
        ps = ps if isinstance(ps, list) else [ps]
        _check(errs, len(ps) > 0, "topology.p", "edge probability is required")
        for i, pv in enumerate(ps):
            _check(errs, 0.0 < float(pv) <= 1.0, f"topology.p[{i}]",
                   "must be in (0, 1]")

    algos = r.get("algorithms", [])
    _check(errs, bool(algos), "run.algorithms", "need at least one algorithm")
    for i, a in enumerate(algos):
        _check(errs, a in ALGORITHMS, f"run.algorithms[{i}]",
               f"unknown algorithm {a!r}")
    ks = r.get("K", [])
    _check(errs, bool(ks) or ks == [0], "run.K", "need at least one K value")
    for i, k in enumerate(ks):
        _check(errs, isinstance(k, int) and k >= 0, f"run.K[{i}]",
               f"K must be a nonnegative integer, got {k!r}")
    step = r.get("step_size", "grid")
    if isinstance(step, str):
        _check(errs, step in STEP_POLICIES, "run.step_size",
               f"unknown step-size policy {step!r}")
    else:
        _check(errs, float(step) > 0, "run.step_size", "fixed step size must be > 0")
    measure = r.get("measure", "avg_grad_norm")
    _check(errs, measure in MEASURES, "run.measure",
           f"unknown measure {measure!r}")
    if measure == "dist_min_norm":
        _check(errs, scenario == "overparam_ols", "run.measure",
               "dist_min_norm needs a least-squares problem with a known x_star")
    _check(errs, float(r.get("epsilon", 0.0)) >= 0, "run.epsilon", "must be >= 0")
    _check(errs, int(r.get("max_rounds", 1)) >= 1, "run.max_rounds", "must be >= 1")
    return errs


def build_problem(cfg: ExperimentConfig) -> problems.Problem:
    p = cfg.problem
    scenario = p["scenario"]
    seed = cfg.data_seed
    reg = float(p.get("reg", 0.0))
    if scenario == "drlr_connectivity":
        ds = problems.generate_drlr_connectivity_scenario(
            m=int(p.get("m", 20)), n=int(p.get("n", 1000)),
            d=int(p.get("d", 5)), seed=seed)
        return problems.Problem(problems.RIDGE_LOGISTIC, ds, reg=reg)
    if scenario == "drlr_heterogeneity":
        ds = problems.generate_drlr_heterogeneity_scenario(
            m=int(p.get("m", 20)), n=int(p.get("n", 100)),
            d=int(p.get("d", 80)), delta_gen=float(p.get("delta_gen", 0.99)),
            seed=seed)
        return problems.Problem(problems.RIDGE_LOGISTIC, ds, reg=reg)
    if scenario == "overparam_ols":
        return problems.generate_overparam_ols(
            m=int(p["m"]), n_per_agent=int(p["n_per_agent"]), d=int(p["d"]),
            heterogeneity=float(p.get("heterogeneity", 0.0)), seed=seed)
    if scenario == "libsvm":
        with open(p["path"]) as fh:
            records = problems.parse_libsvm(fh)
        feats, labels = problems.densify(records, int(p["d"]))
        if p.get("partition", "uniform") == "uniform":
            ds = problems.partition_uniform(feats, labels, int(p["m"]), seed=seed)
        else:
            counts = [tuple(c) for c in p["class_counts"]]
            ds = problems.partition_by_class(feats, labels, counts)
        return problems.Problem(problems.RIDGE_LOGISTIC, ds, reg=reg)
    raise ConfigError(f"unknown scenario {scenario!r}")


@dataclass(frozen=True, eq=False)
class TopologyPoint:
    label: str
    mixing: topology.MixingMatrix


def build_topology_points(cfg: ExperimentConfig) -> list:
    t = cfg.topology
    kind = t["kind"]
    m = int(t["m"])
    weights = t.get("weights", "metropolis")

    def weigh(g):
        if weights == "uniform":
            return topology.uniform_weights(g)
        return topology.metropolis_weights(g)

    if kind == "ring":
        return [TopologyPoint("ring", weigh(topology.ring(m)))]
    if kind == "complete":
        return [TopologyPoint("complete", weigh(topology.complete(m)))]
    ps = t["p"]
    ps = ps if isinstance(ps, list) else [ps]
    points = []
    for pv in ps:
        g = topology.erdos_renyi(m, float(pv), seed=cfg.topology_seed,
                                 max_resamples=int(t.get("max_resamples", 100)))
        points.append(TopologyPoint(f"er_p{pv:g}", weigh(g)))
    return points
