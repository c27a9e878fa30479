"""Hot loops of the finite-difference back-propagation.

Two interchangeable implementations live here: numba-compiled kernels and a
pure numpy fallback that vectorizes over energies instead.  The default is
numba when it imports; set ``SCATTER1D_NO_NUMBA=1`` to force numpy.
"""
from __future__ import annotations

import os

import numpy as np

import warnings

try:
    import numba
    warnings.filterwarnings("ignore", message="The TBB threading layer")
    HAS_NUMBA = True
except ImportError:  # pragma: no cover
    numba = None
    HAS_NUMBA = False

USE_NUMBA = HAS_NUMBA and os.environ.get("SCATTER1D_NO_NUMBA", "").strip().lower() not in ("1", "true", "yes")
BACKEND = "numba" if USE_NUMBA else "numpy"


def set_threads(n: int | None = None) -> int:
    """Apply SCATTER1D_THREADS (or ``n``) to the numba pool; returns the count in use."""
    if n is None:
        env = os.environ.get("SCATTER1D_THREADS")
        n = int(env) if env else None
    if not HAS_NUMBA:
        return 1
    if n is not None:
        numba.set_num_threads(max(1, min(int(n), numba.config.NUMBA_NUM_THREADS)))
    return numba.get_num_threads()


def _extract(psi0, psi1, x1, K, dx):
    # psi = A e^{iKx} + B e^{-iKx} sampled at x1 - dx and x1
    ep = np.exp(1j * K * dx)
    em = np.exp(-1j * K * dx)
    d = ep - em
    A = (ep * psi1 - psi0) / d * np.exp(-1j * K * x1)
    B = -(em * psi1 - psi0) / d * np.exp(1j * K * x1)
    return A, B


# numpy reference ----------------------------------------------------------

def coefficients_numpy(v, x, energies, c2m):
    """Return (A, B) for every energy, all sharing the grid ``x``."""
    E = np.asarray(energies, dtype=float)
    K = np.sqrt(c2m * E)
    n = x.size
    h2 = (x[1] - x[0]) ** 2 * c2m
    psi_next = np.exp(1j * K * x[n - 1])
    psi = np.exp(1j * K * x[n - 2])
    for i in range(n - 2, 0, -1):
        f = 2.0 - h2 * (E - v[i])
        psi, psi_next = f * psi - psi_next, psi
    return _extract(psi, psi_next, x[1], K, x[1] - x[0])


def wavefunction_numpy(v, x, E, c2m):
    K = np.sqrt(c2m * E)
    n = x.size
    h2 = (x[1] - x[0]) ** 2 * c2m
    out = np.empty(n, dtype=complex)
    out[n - 1] = np.exp(1j * K * x[n - 1])
    out[n - 2] = np.exp(1j * K * x[n - 2])
    f = 2.0 - h2 * (E - v)
    for i in range(n - 2, 0, -1):
        out[i - 1] = f[i] * out[i] - out[i + 1]
    return out


# numba --------------------------------------------------------------------

if HAS_NUMBA:
    @numba.njit(cache=True, parallel=True)
    def _coefficients_nb(v, x, E, c2m):
        m = E.size
        n = x.size
        dx = x[1] - x[0]
        h2 = dx * dx * c2m
        A = np.empty(m, dtype=np.complex128)
        B = np.empty(m, dtype=np.complex128)
        for j in numba.prange(m):
            K = np.sqrt(c2m * E[j])
            psi_next = np.exp(1j * K * x[n - 1])
            psi = np.exp(1j * K * x[n - 2])
            for i in range(n - 2, 0, -1):
                nxt = (2.0 - h2 * (E[j] - v[i])) * psi - psi_next
                psi_next = psi
                psi = nxt
            ep = np.exp(1j * K * dx)
            em = np.exp(-1j * K * dx)
            d = ep - em
            A[j] = (ep * psi_next - psi) / d * np.exp(-1j * K * x[1])
            B[j] = -(em * psi_next - psi) / d * np.exp(1j * K * x[1])
        return A, B

    @numba.njit(cache=True)
    def _wavefunction_nb(v, x, E, c2m):
        n = x.size
        dx = x[1] - x[0]
        h2 = dx * dx * c2m
        K = np.sqrt(c2m * E)
        out = np.empty(n, dtype=np.complex128)
        out[n - 1] = np.exp(1j * K * x[n - 1])
        out[n - 2] = np.exp(1j * K * x[n - 2])
        for i in range(n - 2, 0, -1):
            out[i - 1] = (2.0 - h2 * (E - v[i])) * out[i] - out[i + 1]
        return out

    def coefficients_numba(v, x, energies, c2m):
        return _coefficients_nb(np.ascontiguousarray(v, dtype=np.float64),
                                np.ascontiguousarray(x, dtype=np.float64),
                                np.ascontiguousarray(energies, dtype=np.float64), float(c2m))

    def wavefunction_numba(v, x, E, c2m):
        return _wavefunction_nb(np.ascontiguousarray(v, dtype=np.float64),
                                np.ascontiguousarray(x, dtype=np.float64), float(E), float(c2m))


def coefficients(v, x, energies, c2m, backend: str | None = None):
    b = backend or BACKEND
    if b == "numba":
        if not HAS_NUMBA:
            raise RuntimeError("numba backend requested but numba is not installed")
        return coefficients_numba(v, x, energies, c2m)
    return coefficients_numpy(v, x, np.asarray(energies, dtype=float), c2m)


def wavefunction(v, x, E, c2m, backend: str | None = None):
    if (backend or BACKEND) == "numba":
        return wavefunction_numba(v, x, E, c2m)
    return wavefunction_numpy(v, x, E, c2m)
