"""Mesh kernel backend selection.

The compiled extension is preferred when built; setting MINSURF_PURE_PYTHON
to a nonempty value forces the pure-Python kernels (useful for benchmarking
and for environments without a compiler).
"""

import os

if os.environ.get("MINSURF_PURE_PYTHON"):
    from . import _mesh_kernels_py as impl
else:
    try:
        from . import _mesh_kernels_cy as impl  # type: ignore[attr-defined]
    except ImportError:
        from . import _mesh_kernels_py as impl

BACKEND = impl.BACKEND
dijkstra = impl.dijkstra
unfold_pass = impl.unfold_pass
profile_sums = impl.profile_sums
