"""Kernel dispatch: the compiled extension when importable, numpy otherwise.

Set ``GROUPOIDAL_PURE_PYTHON=1`` to force the numpy fallback.
"""
import os

import numpy as np

from . import _pykernels

BACKEND = "python"
_impl = _pykernels
if os.environ.get("GROUPOIDAL_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:
        _impl = _pykernels


def _idx(a):
    return np.ascontiguousarray(a, dtype=np.intp)


def _cx(a):
    return np.ascontiguousarray(a, dtype=np.complex128)


def convolve(f, g, ii, jj, kk, n):
    """Dense convolution over a flat table of composable position triples."""
    return _impl.convolve(_cx(f), _cx(g), _idx(ii), _idx(jj), _idx(kk), n)


def gram(phi, inv, comp):
    """``M[i, j] = phi[t_i^-1 ∘ t_j]`` where composable, else 0."""
    return _impl.gram(_cx(phi), _idx(inv), _idx(comp))


def decoherence_sum(phi, inv, comp, a_pos, b_pos):
    return _impl.decoherence_sum(_cx(phi), _idx(inv), _idx(comp), _idx(a_pos), _idx(b_pos))


def convolve_many(f, g, ii, jj, kk, n):
    """Row-wise :func:`convolve` for stacks of shape ``(rows, n)``."""
    return _impl.convolve_many(_cx(f), _cx(g), _idx(ii), _idx(jj), _idx(kk), n)
