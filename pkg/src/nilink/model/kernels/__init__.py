"""Kernel backend selection.

``NILINK_BACKEND`` picks the implementation: ``numba`` (jitted loops),
``numpy`` (pure-numpy fallback), or ``auto`` (numba when importable,
default). Both backends expose identical functions and agree numerically;
``benchmarks/kernel_bench.py`` compares their throughput.
"""

from __future__ import annotations

import logging
import os

logger = logging.getLogger(__name__)

PROB_EPS = 1e-7

_choice = os.environ.get("NILINK_BACKEND", "auto").lower()
if _choice not in ("auto", "numba", "numpy"):
    raise ValueError(f"NILINK_BACKEND must be auto, numba, or numpy, not {_choice!r}")

if _choice in ("auto", "numba"):
    try:
        from . import numba_backend as _impl
        BACKEND = "numba"
    except ImportError:
        if _choice == "numba":
            raise
        from . import numpy_backend as _impl
        BACKEND = "numpy"
        logger.warning("numba unavailable, using the pure-numpy kernel fallback")
else:
    from . import numpy_backend as _impl
    BACKEND = "numpy"

mean_pool = _impl.mean_pool
scatter_add_rows = _impl.scatter_add_rows
sigmoid = _impl.sigmoid
focal_loss_value = _impl.focal_loss_value
focal_grad_logits = _impl.focal_grad_logits
bce_value = _impl.bce_value
adam_step = _impl.adam_step
