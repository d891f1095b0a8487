"""Kernel backend selection.

Prefers the compiled extension; falls back to the pure-Python twin when
the extension is unavailable or LOSTSALES_PURE_PYTHON=1 is set. Both
backends are bit-identical (see tests/test_kernels.py); the compiled one
is just faster (see benchmarks/bench_kernels.py).
"""

from __future__ import annotations

import os

from . import _kernels_py

if os.environ.get("LOSTSALES_PURE_PYTHON") == "1":
    _impl = _kernels_py
else:
    try:
        from . import _kernels as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = _kernels_py

BACKEND = _impl.BACKEND
rollout_table_policy = _impl.rollout_table_policy
rollout_action_sequence = _impl.rollout_action_sequence
q_learning_episode = _impl.q_learning_episode


def backends() -> dict:
    """Both backends by name, for parity tests and benchmarks."""
    out = {"python": _kernels_py}
    try:
        from . import _kernels

        out["compiled"] = _kernels
    except ImportError:
        pass
    return out
