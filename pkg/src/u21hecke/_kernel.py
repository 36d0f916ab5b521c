"""Kernel dispatch: compiled extension if present, pure Python otherwise.

Set U21HECKE_PURE=1 to force the fallback.
"""

import os

from . import _pure

if os.environ.get("U21HECKE_PURE") == "1":
    backend = _pure
else:
    try:
        from . import _core as backend  # type: ignore[no-redef]
    except ImportError:
        backend = _pure

INF = _pure.INF
BACKEND_NAME = backend.BACKEND_NAME


def make_ctx(tower):
    """Table context for a tower, cached on the tower object."""
    ctx = getattr(tower, "_kernel_ctx", None)
    if ctx is None or getattr(tower, "_kernel_backend", None) is not BACKEND_NAME:
        ctx = backend.TableCtx(tower.add, tower.neg, tower.mul, tower.inv, tower.frob)
        tower._kernel_ctx = ctx
        tower._kernel_backend = BACKEND_NAME
    return ctx
