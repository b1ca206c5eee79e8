"""Backend selection for the hot kernels.

The compiled Cython core is preferred; the pure-numpy fallback is used when
the extension is unavailable or when CHSTEP_FORCE_FALLBACK is set.  Both
backends expose the same functions and are compared in tests/benchmarks.
"""

import os

if os.environ.get("CHSTEP_FORCE_FALLBACK"):
    from ._fallback import cube, doc_theta_matrix, max_abs_diff

    BACKEND = "numpy"
else:
    try:
        from ._core import cube, doc_theta_matrix, max_abs_diff

        BACKEND = "cython"
    except ImportError:
        from ._fallback import cube, doc_theta_matrix, max_abs_diff

        BACKEND = "numpy"

__all__ = ["BACKEND", "cube", "doc_theta_matrix", "max_abs_diff"]
