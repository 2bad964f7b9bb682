"""Reference numpy implementations of the numeric kernels."""
import numpy as np


def convolve(f, g, ii, jj, kk, n):
    out = np.zeros(n, dtype=np.complex128)
    np.add.at(out, kk, f[ii] * g[jj])
    return out


def gram(phi, inv, comp):
    rows = comp[inv]
    return np.where(rows >= 0, phi[rows], 0.0).astype(np.complex128)


def decoherence_sum(phi, inv, comp, a_pos, b_pos):
    if len(a_pos) == 0 or len(b_pos) == 0:
        return 0j
    block = comp[np.ix_(inv[a_pos], b_pos)]
    return complex(np.where(block >= 0, phi[block], 0.0).sum())


def convolve_many(f, g, ii, jj, kk, n):
    """Row-wise convolution of two stacks of coefficient vectors."""
    out = np.zeros((f.shape[0], n), dtype=np.complex128)
    np.add.at(out.T, kk, (f[:, ii] * g[:, jj]).T)
    return out
