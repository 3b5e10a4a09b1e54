"""Kernel backend selection.

The compiled extension ``saddlescar._kernels`` is used when it imports;
otherwise the pure-Python versions in ``_kernels_py`` are. Setting
``SADDLESCAR_PURE_PYTHON=1`` forces the fallback.
"""

import os

from . import _kernels_py

python_backend = _kernels_py
compiled_backend = None

if os.environ.get("SADDLESCAR_PURE_PYTHON", "") != "1":
    try:
        from . import _kernels as compiled_backend
    except ImportError:
        compiled_backend = None

backend = compiled_backend if compiled_backend is not None else python_backend
BACKEND = "cython" if backend is compiled_backend else "python"

tangent_flow = backend.tangent_flow
kdk_linear = backend.kdk_linear
