"""Hot-loop kernels: compiled when available, pure Python otherwise.

Set ``MWJOIN_PURE_PYTHON=1`` to force the fallback.
"""

import os

from . import probe_py

IMPLEMENTATION = "python"
probe_chain = probe_py.probe_chain

if os.environ.get("MWJOIN_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _probe
    except ImportError:
        pass
    else:
        probe_chain = _probe.probe_chain
        IMPLEMENTATION = "cython"


def available() -> dict:
    """Importable kernel implementations by name."""
    impls = {"python": probe_py.probe_chain}
    try:
        from . import _probe
    except ImportError:
        return impls
    impls["cython"] = _probe.probe_chain
    return impls
