"""Free and full retarded Green functions, on-shell T-matrix elements, Born series."""
from __future__ import annotations

import numpy as np
from scipy.integrate import cumulative_trapezoid, trapezoid

from .errors import GridMismatch, InvalidEnergy, MissingWavefunction, OrderUnsupported, TNearZero
from .fdsolver import ScatteringSolution
from .model import DEFAULT, Constants, Potential


def free_green(E, x, y, branch: int = +1, constants: Constants = DEFAULT):
    """G0^{+-}(x, y) = (-+i) m/(hbar^2 K) exp(+-iK|x-y|)."""
    if np.any(np.asarray(E) <= 0):
        raise InvalidEnergy("free Green function needs E > 0")
    s = 1 if branch > 0 else -1
    K = constants.wavenumber(E)
    pref = -s * 1j * constants.mass / (constants.hbar**2 * K)
    return pref * np.exp(s * 1j * K * np.abs(np.asarray(x) - np.asarray(y)))


def _sample(sol: ScatteringSolution, psi: np.ndarray, x):
    """Grid values at x; off-node points use 4-point Lagrange interpolation."""
    g = sol.grid
    x = np.atleast_1d(np.asarray(x, dtype=float))
    t = (x - g.x[0]) / g.dx
    i = np.clip(np.floor(t).astype(int) - 1, 0, g.x.size - 4)
    u = t - i
    out = np.zeros(x.shape, dtype=complex)
    for j in range(4):
        wj = np.ones_like(u)
        for m in range(4):
            if m != j:
                wj *= (u - m) / (j - m)
        out += wj * psi[i + j]
    return out


def _pair(plus, minus, constants):
    for s in (plus, minus):
        if s.psi is None:
            raise MissingWavefunction("Green function needs stored wavefunctions")
    if plus.energy != minus.energy or plus.grid.x.size != minus.grid.x.size:
        raise GridMismatch("retarded Green function needs both solutions on one grid")
    if plus.direction < 0 < minus.direction:
        plus, minus = minus, plus
    if abs(plus.T) < 1e-14:
        raise TNearZero("T vanished; the solutions are inconsistent")
    return plus, minus, plus.normalized_psi(constants), minus.normalized_psi(constants)


def full_green_retarded(plus: ScatteringSolution, minus: ScatteringSolution, x, y,
                        constants: Constants = DEFAULT):
    """G+(x, y) assembled from the right- and left-incident states.

    For x >= y it is -(2 pi i / T) psi_minus(y) psi_plus(x); the other ordering
    swaps the roles.
    """
    plus, minus, pp, pm = _pair(plus, minus, constants)
    x, y = np.broadcast_arrays(np.atleast_1d(np.asarray(x, float)), np.atleast_1d(np.asarray(y, float)))
    hi = np.maximum(x, y)
    lo = np.minimum(x, y)
    g = -(2j * np.pi / plus.T) * _sample(plus, pm, lo) * _sample(plus, pp, hi)
    return g if g.size > 1 else complex(g[0])


def advanced_from_retarded(value):
    # psi^- = conj(psi^+) for real potentials
    return np.conj(value)


def green_endpoint_identity(plus: ScatteringSolution, minus: ScatteringSolution, a: float,
                            constants: Constants = DEFAULT):
    """(G+(-a, a), (-i) m/(hbar^2 K) T e^{2iKa}); the two should agree."""
    lhs = full_green_retarded(plus, minus, -a, a, constants)
    K = plus.K
    rhs = -1j * constants.mass / (constants.hbar**2 * K) * plus.T * np.exp(2j * K * a)
    return complex(lhs), complex(rhs)


def derivative_jump(plus, minus, y: float, constants: Constants = DEFAULT) -> complex:
    """dG/dx(y+0, y) - dG/dx(y-0, y) from second-order one-sided differences."""
    h = plus.grid.dx
    g = full_green_retarded(plus, minus, y + h * np.arange(-2, 3), y, constants)
    right = (-3 * g[2] + 4 * g[3] - g[4]) / (2 * h)
    left = (3 * g[2] - 4 * g[1] + g[0]) / (2 * h)
    return complex(right - left)


def onshell_t_matrix(solution: ScatteringSolution, eta: int, a: float,
                     constants: Constants = DEFAULT, potential: Potential | None = None) -> complex:
    """<phi_{E eta}| V |psi+_{E(+1)}> by the trapezoid rule on the FD grid within [-a, a].

    Expected: (i/2pi)(T - 1) for eta = +1 and (i/2pi) R for eta = -1.
    """
    if solution.psi is None:
        raise MissingWavefunction("on-shell T-matrix needs the wavefunction")
    if potential is None:
        raise ValueError("potential is required")
    x = solution.grid.x
    m = np.abs(x) <= a + 1e-9 * solution.grid.dx
    xs = x[m]
    K = solution.K
    f = np.exp(-1j * eta * K * xs) * potential(xs) * solution.psi[m]
    return complex(constants.mass / (2 * np.pi * constants.hbar**2 * K) * trapezoid(f, xs))


def born_transmission(potential: Potential, E: float, order: int = 1,
                      constants: Constants = DEFAULT, n_points: int = 4001) -> complex:
    """Born approximation to T through first or second order.

    The scattering state is iterated once through the free retarded kernel;
    the |y - z| split makes the inner integral two running sums.
    """
    if order not in (1, 2):
        raise OrderUnsupported(f"Born order {order} not supported (1 or 2)")
    if E <= 0:
        raise InvalidEnergy("E must be positive")
    K = float(constants.wavenumber(E))
    a = potential.a
    x = np.linspace(-a, a, n_points)
    v = potential(x)
    psi = np.exp(1j * K * x)
    if order == 2:
        left = cumulative_trapezoid(v, x, initial=0.0)  # int_{z<y} V
        g = v * np.exp(2j * K * x)
        right_all = trapezoid(g, x)
        right = right_all - cumulative_trapezoid(g, x, initial=0.0)  # int_{z>y} V e^{2iKz}
        scatter = np.exp(1j * K * x) * left + np.exp(-1j * K * x) * right
        psi = psi - 1j * constants.mass / (constants.hbar**2 * K) * scatter
    tmat = constants.mass / (2 * np.pi * constants.hbar**2 * K) * trapezoid(np.exp(-1j * K * x) * v * psi, x)
    return complex(1.0 - 2j * np.pi * tmat)
