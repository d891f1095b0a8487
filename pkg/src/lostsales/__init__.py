"""Lost-sales inventory control: simulators, feedback-graph side experiences,
curiosity-driven off-policy RL, heuristic baselines, and exact oracles."""

__version__ = "0.1.0"

from .kernels import BACKEND as kernel_backend  # noqa: F401
