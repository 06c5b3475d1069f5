"""Select the loop implementation.

Set SMOOTHCI_BACKEND=numpy to run the pure-numpy path; the default uses numba
when it imports cleanly.
"""

import logging
import os

logger = logging.getLogger(__name__)

REQUESTED = os.environ.get("SMOOTHCI_BACKEND", "numba").strip().lower()
if REQUESTED not in {"numba", "numpy"}:
    raise ImportError(f"SMOOTHCI_BACKEND must be 'numba' or 'numpy', got {REQUESTED!r}")

if REQUESTED == "numba":
    try:
        from . import _loops_numba as loops
        BACKEND = "numba"
    except ImportError:  # pragma: no cover - numba is a hard dependency in practice
        logger.warning("numba unavailable, falling back to the numpy backend")
        from . import _loops_numpy as loops
        BACKEND = "numpy"
else:
    from . import _loops_numpy as loops
    BACKEND = "numpy"

__all__ = ["BACKEND", "loops"]
