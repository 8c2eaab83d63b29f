"""Local-update decentralized gradient methods over mesh networks.

Simulation library and CLI for local DGD and local gradient tracking
(DGT) with K extra gradient steps per communication round, plus graph /
mixing-matrix construction, loss oracles and data generators,
per-round convergence diagnostics, and closed-form bound evaluators.
"""

from . import algorithms, linalg, metrics, problems, theory, topology

__version__ = "0.1.0"

__all__ = ["algorithms", "linalg", "metrics", "problems", "theory", "topology"]
