"""Kernel selection.

The compiled extension is used when it imports; otherwise, or when
``JMX_PURE_PYTHON`` is set to a non-empty value other than ``0``, the
numpy fallback is used. ``BACKEND`` names the active choice.
"""

import os

from . import _fallback

_force_pure = os.environ.get("JMX_PURE_PYTHON", "") not in ("", "0")

try:
    if _force_pure:
        raise ImportError("pure-Python backend requested")
    from . import _kernels as _impl
except ImportError:
    _impl = _fallback

BACKEND = "compiled" if _impl is not _fallback else "python"

tql2 = _impl.tql2
ratio_stages = _impl.ratio_stages
transfer_matrices = _impl.transfer_matrices
RATIO_FIELDS = _fallback.RATIO_FIELDS


def implementations():
    """Return ``{name: module}`` for every importable backend."""
    impls = {"python": _fallback}
    try:
        from . import _kernels
    except ImportError:
        pass
    else:
        impls["compiled"] = _kernels
    return impls
