"""Pick the compiled kernels when built, else the pure-Python twins.

Set ``PHKM_PURE_PYTHON=1`` to force the fallback.
"""

import os

BACKEND = "python"

if os.environ.get("PHKM_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from phkm._kernels import anti_transpose, reduce_boundary, rips_cliques

        BACKEND = "cython"
    except ImportError:
        pass

if BACKEND == "python":
    from phkm._kernels_py import anti_transpose, reduce_boundary, rips_cliques

__all__ = ["BACKEND", "anti_transpose", "reduce_boundary", "rips_cliques"]
