"""Stationary scattering by finite-difference back-propagation.

The outgoing plane wave is seeded on the far right, the three-point recursion
carries it through the potential, and the incoming/reflected amplitudes are
read off the two leftmost grid points.  Dividing by the incoming amplitude
turns the seed into T.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import DegenerateExtraction, GridMismatch, GridTooCoarse, InvalidEnergy, TNearZero
from .model import DEFAULT, Constants, Potential

DEFAULT_DX = 1e-3
KDX_GUARD = 0.5


@dataclass(frozen=True)
class Grid:
    x: np.ndarray
    dx: float

    @property
    def L(self) -> float:
        return float(self.x[-1])

    def index(self, x0: float) -> int:
        return int(round((x0 - self.x[0]) / self.dx))


def make_grid(a: float, k_min: float, dx: float = DEFAULT_DX, pad: float | None = None) -> Grid:
    """Symmetric grid on [-L, L] with L >= a + pad, pad defaulting to two wavelengths."""
    if pad is None:
        pad = 4.0 * np.pi / k_min
    m = int(np.ceil((a + pad) / dx))
    x = dx * np.arange(-m, m + 1, dtype=float)
    return Grid(x, dx)


@dataclass
class ScatteringSolution:
    energy: float
    K: float
    direction: int
    T: complex
    R: complex
    grid: Grid | None = None
    psi: np.ndarray | None = None  # psi-tilde samples, unnormalized

    @property
    def dx(self):
        return None if self.grid is None else self.grid.dx

    def normalized_psi(self, constants: Constants = DEFAULT) -> np.ndarray:
        if self.psi is None:
            from .errors import MissingWavefunction
            raise MissingWavefunction("solution was computed without keep_psi")
        return np.sqrt(constants.mass / (2 * np.pi * constants.hbar**2 * self.K)) * self.psi


def _check(E, K, dx):
    E = np.atleast_1d(np.asarray(E, dtype=float))
    if np.any(~(E > 0)):
        raise InvalidEnergy(f"energies must be positive, got min {E.min()!r}")
    if np.max(K) * dx >= KDX_GUARD:
        raise GridTooCoarse(f"K*dx = {np.max(K) * dx:.3g} exceeds {KDX_GUARD}")


def _finish(A, B, E, K, dx):
    d = np.abs(np.exp(1j * K * dx) - np.exp(-1j * K * dx))
    if np.any(d < 1e-14):
        raise DegenerateExtraction(f"K*dx is a multiple of pi at E = {E[np.argmin(d)]}")
    T = 1.0 / A
    if np.any(np.abs(T) < 1e-14):
        raise TNearZero(f"|T| < 1e-14 at E = {E[np.argmin(np.abs(T))]}")
    return T, B / A


def _solve(potential, E, dx, constants, pad, keep_psi, direction, backend):
    E = float(E)
    K = float(constants.wavenumber(E)) if E > 0 else 0.0
    _check(E, K, dx)
    grid = make_grid(potential.a, K, dx, pad)
    # the left-incident problem is the right-incident one for V(-x)
    v = potential(grid.x) if direction > 0 else potential(-grid.x)
    A, B = _kernels.coefficients(v, grid.x, np.array([E]), constants.c2m, backend)
    T, R = _finish(A, B, np.array([E]), np.array([K]), dx)
    psi = None
    if keep_psi:
        psi = _kernels.wavefunction(v, grid.x, E, constants.c2m, backend) * T[0]
        if direction < 0:
            psi = psi[::-1].copy()
    return ScatteringSolution(E, K, direction, complex(T[0]), complex(R[0]),
                              grid if keep_psi else None, psi)


def solve_right_incident(potential: Potential, E: float, dx: float = DEFAULT_DX,
                         constants: Constants = DEFAULT, pad: float | None = None,
                         keep_psi: bool = True, backend: str | None = None) -> ScatteringSolution:
    """Wave incident from the left moving right: e^{iKx} + R e^{-iKx} on the left, T e^{iKx} on the right."""
    return _solve(potential, E, dx, constants, pad, keep_psi, +1, backend)


def solve_left_incident(potential: Potential, E: float, dx: float = DEFAULT_DX,
                        constants: Constants = DEFAULT, pad: float | None = None,
                        keep_psi: bool = True, backend: str | None = None) -> ScatteringSolution:
    """Mirror image: e^{-iKx} + R e^{iKx} on the right, T e^{-iKx} on the left."""
    return _solve(potential, E, dx, constants, pad, keep_psi, -1, backend)


@dataclass
class ScanResult:
    E: np.ndarray
    T: np.ndarray
    R: np.ndarray

    @property
    def T2(self):
        return np.abs(self.T) ** 2

    @property
    def R2(self):
        return np.abs(self.R) ** 2

    @property
    def unitarity_residual(self):
        return np.abs(self.T2 + self.R2 - 1.0)

    def __len__(self):
        return self.E.size

    def __iter__(self):
        return iter(zip(self.E, self.T, self.R))


def transmission_scan(potential: Potential, energies, dx: float = DEFAULT_DX,
                      constants: Constants = DEFAULT, pad: float | None = None,
                      direction: int = +1, threads: int | None = None,
                      backend: str | None = None) -> ScanResult:
    """T and R over an energy grid.

    All energies share one grid, padded for the smallest wavenumber, so the
    result does not depend on how the work is split between threads.
    """
    E = np.asarray(energies, dtype=float).ravel()
    if E.size == 0:
        return ScanResult(E, np.empty(0, complex), np.empty(0, complex))
    bad = ~(E > 0)
    if bad.any():
        raise InvalidEnergy(f"non-positive energy in scan: E = {E[bad][0]!r}")
    K = constants.wavenumber(E)
    _check(E, K, dx)
    grid = make_grid(potential.a, K.min(), dx, pad)
    v = potential(grid.x) if direction > 0 else potential(-grid.x)
    _kernels.set_threads(threads)
    A, B = _kernels.coefficients(v, grid.x, E, constants.c2m, backend)
    T, R = _finish(A, B, E, K, dx)
    return ScanResult(E, T, R)


@dataclass
class WronskianReport:
    values: np.ndarray
    expected: complex
    max_dev_constant: float
    max_dev_expected: float


def wronskian(plus: ScatteringSolution, minus: ScatteringSolution,
              constants: Constants = DEFAULT) -> WronskianReport:
    """w = psi_minus d(psi_plus) - psi_plus d(psi_minus) of the normalized states.

    The derivative is taken as the forward difference of the discrete pair
    (the lattice Wronskian), which the three-point recursion conserves exactly.
    Values sit on grid midpoints.
    """
    if plus.grid is None or minus.grid is None or plus.psi is None or minus.psi is None:
        from .errors import MissingWavefunction
        raise MissingWavefunction("wronskian needs stored wavefunctions")
    if plus.energy != minus.energy or plus.grid.x.size != minus.grid.x.size \
            or plus.grid.dx != minus.grid.dx:
        raise GridMismatch("solutions differ in energy or grid")
    p = plus.normalized_psi(constants)
    q = minus.normalized_psi(constants)
    w = (q[:-1] * p[1:] - p[:-1] * q[1:]) / plus.grid.dx
    expected = 1j * constants.mass * plus.T / (np.pi * constants.hbar**2)
    ref = abs(expected)
    return WronskianReport(w, expected,
                           float(np.max(np.abs(w - np.mean(w))) / ref),
                           float(np.max(np.abs(w - expected)) / ref))


@dataclass
class Peak:
    E: float
    T2: float
    fwhm: float | None
    E_sampled: float
    half_left: float | None = None
    half_right: float | None = None

    @property
    def sharp(self) -> bool:
        return self.fwhm is not None


def _half_crossing(f, E0, h, side, max_halfwidth):
    from scipy.optimize import brentq

    prev, d = 0.0, 1e-7
    while d <= max_halfwidth:
        if f(E0 + side * d) < h:
            return brentq(lambda s: f(E0 + side * s) - h, prev, d, xtol=1e-14, rtol=1e-12)
        prev, d = d, 2 * d
    if f(E0 + side * max_halfwidth) < h:
        return brentq(lambda s: f(E0 + side * s) - h, prev, max_halfwidth, xtol=1e-14, rtol=1e-12)
    return None


def find_peaks(potential: Potential, scan: ScanResult, dx: float = DEFAULT_DX,
               constants: Constants = DEFAULT, min_height: float = 0.5,
               max_halfwidth: float = 0.1, backend: str | None = None) -> list[Peak]:
    """Locate and measure sharp |T|^2 maxima of a scan.

    Every interior local maximum of the sampled curve is polished by a bounded
    maximization between its neighbours.  A peak counts as sharp when the
    polished height reaches ``min_height`` and |T|^2 falls to half of it on
    both sides within ``max_halfwidth``.  Non-sharp maxima are returned with
    ``fwhm = None``.
    """
    from scipy.optimize import minimize_scalar

    E, T2 = scan.E, scan.T2
    pad = 4 * np.pi / float(constants.wavenumber(E.min()))

    def f(e):
        return transmission_scan(potential, np.array([e]), dx, constants, pad, backend=backend).T2[0]

    out = []
    for i in range(1, E.size - 1):
        if not (T2[i] > T2[i - 1] and T2[i] >= T2[i + 1]):
            continue
        r = minimize_scalar(lambda e: -f(e), bounds=(E[i - 1], E[i + 1]), method="bounded",
                            options={"xatol": 1e-13})
        Ep, hp = float(r.x), float(-r.fun)
        if T2[i] > hp:
            Ep, hp = float(E[i]), float(T2[i])
        pk = Peak(Ep, hp, None, float(E[i]))
        if hp >= min_height:
            lo = _half_crossing(f, Ep, hp / 2, -1, max_halfwidth)
            hi = _half_crossing(f, Ep, hp / 2, +1, max_halfwidth) if lo is not None else None
            if lo is not None and hi is not None:
                pk.half_left, pk.half_right, pk.fwhm = Ep - lo, Ep + hi, lo + hi
        out.append(pk)
    return out


def sharp_peaks(*args, **kw) -> list[Peak]:
    return [p for p in find_peaks(*args, **kw) if p.sharp]
