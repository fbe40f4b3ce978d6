"""Backend dispatch for the numeric hot loops.

The compiled Cython extension is preferred when importable; the numpy
fallback in _pure.py is the reference implementation and is always present.
Selection happens once, at import, so a process never mixes backends.

Override with SUBCOMPOSE_BACKEND=pure|compiled|auto (default auto);
"compiled" raises if the extension is missing.
"""

from __future__ import annotations

import logging
import os

from . import _pure

logger = logging.getLogger(__name__)

_choice = os.environ.get("SUBCOMPOSE_BACKEND", "auto").strip().lower()
if _choice not in {"auto", "compiled", "pure"}:
    logger.warning("unknown SUBCOMPOSE_BACKEND=%r, using auto", _choice)
    _choice = "auto"

BACKEND = "pure"
_impl = _pure
if _choice != "pure":
    try:
        from . import _speedups as _impl  # type: ignore[no-redef]

        BACKEND = "compiled"
    except ImportError:
        if _choice == "compiled":
            raise
        logger.info("compiled kernels unavailable, using pure numpy fallback")

pairwise_cosine = _impl.pairwise_cosine
lda_estep = _impl.lda_estep

__all__ = ["BACKEND", "pairwise_cosine", "lda_estep"]
