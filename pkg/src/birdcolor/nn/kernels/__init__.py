"""Conv kernel dispatch: compiled extension when available, numpy fallback
otherwise. Set BIRDCOLOR_KERNELS=python|ext to force a backend (the default
"auto" prefers the extension)."""

import os

from . import _kernels_py

_preference = os.environ.get("BIRDCOLOR_KERNELS", "auto").lower()
if _preference not in ("auto", "python", "ext"):
    raise ValueError(f"BIRDCOLOR_KERNELS must be auto|python|ext, got {_preference!r}")

_impl = _kernels_py
if _preference in ("auto", "ext"):
    try:
        from . import _conv_ext as _impl  # type: ignore[no-redef]
    except ImportError:
        if _preference == "ext":
            raise

conv2d_forward = _impl.conv2d_forward
conv2d_backward_input = _impl.conv2d_backward_input
conv2d_backward_weights = _impl.conv2d_backward_weights


def backend() -> str:
    """Name of the active kernel backend ("python" or "ext")."""
    return _impl.BACKEND


def available_backends() -> dict:
    """Implementation modules by name, for parity tests and benchmarks."""
    impls = {"python": _kernels_py}
    try:
        from . import _conv_ext

        impls["ext"] = _conv_ext
    except ImportError:
        pass
    return impls
