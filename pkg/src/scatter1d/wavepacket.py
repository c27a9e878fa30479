"""Time evolution by expansion over stationary scattering states.

psi(t, x) = sum_j w_j F(k_j) exp(-i hbar k_j^2 t / 2m) psi~_{k_j}(x), with
psi~ taken from the FD solver inside the box and from its asymptotic form
(plane waves weighted by T and R) outside.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.polynomial import legendre as npleg
from scipy.integrate import trapezoid
from scipy.interpolate import CubicSpline

from . import _kernels
from .errors import BranchDomainError, NodeMismatch, SupportTouchesZero
from .fdsolver import DEFAULT_DX, make_grid, transmission_scan
from .model import DEFAULT, Constants, Potential


@dataclass
class SpectralWavepacket:
    k: np.ndarray
    w: np.ndarray
    F: np.ndarray
    k0: float
    sigma_k: float
    norm_const: float

    @property
    def support(self):
        return self.k0 - 6 * self.sigma_k, self.k0 + 6 * self.sigma_k

    def amplitude(self, k):
        """Closed-form F(k), zero outside the quadrature interval."""
        k = np.asarray(k, dtype=float)
        lo, hi = self.support
        f = self.norm_const * np.exp(-((k - self.k0) ** 2) / (4 * self.sigma_k**2))
        return np.where((k >= lo) & (k <= hi), f, 0.0)

    def norm(self) -> float:
        return float(2 * np.pi * np.sum(self.w * np.abs(self.F) ** 2))

    def mean_k(self) -> float:
        return float(2 * np.pi * np.sum(self.w * self.k * np.abs(self.F) ** 2))


def _panels(lo, hi, refine, n_nodes, n_panel):
    """Breakpoints graded geometrically toward each (k_c, width) in ``refine``."""
    br = {lo, hi}
    fine = set()
    for kc, g in refine:
        d = g
        while lo < kc - d and kc + d < hi and d < 0.1 * (hi - lo):
            br.update((kc - d, kc + d))
            d *= 3
        fine.update(b for b in br if abs(b - kc) < 0.1 * (hi - lo))
    br = np.array(sorted(br))
    nodes, weights = [], []
    for a, b in zip(br[:-1], br[1:]):
        graded = a in fine and b in fine
        n = n_panel if graded else max(n_panel, int(round(n_nodes * (b - a) / (hi - lo))))
        u, w = npleg.leggauss(n)
        nodes.append(0.5 * (a + b) + 0.5 * (b - a) * u)
        weights.append(0.5 * (b - a) * w)
    return np.concatenate(nodes), np.concatenate(weights)


def gaussian_packet(k0: float = 1.2, sigma_k: float = 0.08, n_nodes: int = 257,
                    refine=(), n_panel: int = 16) -> SpectralWavepacket:
    """Gaussian in k whose |F|^2 has standard deviation sigma_k, normalized so 2 pi int |F|^2 = 1.

    Nodes are Gauss-Legendre over [k0 - 6 sigma, k0 + 6 sigma].  ``refine`` is an
    optional list of (k_c, width) pairs, typically narrow resonances; around
    each one the interval is split into panels whose widths grow by a factor of
    three starting from ``width``.  The packet is centred on x = 0 at t = 0.
    """
    if not (sigma_k > 0 and k0 - 5 * sigma_k > 0):
        raise SupportTouchesZero(f"k0 - 5 sigma = {k0 - 5 * sigma_k:.3g} must be positive")
    lo, hi = k0 - 6 * sigma_k, k0 + 6 * sigma_k
    if refine:
        k, w = _panels(lo, hi, list(refine), n_nodes, n_panel)
    else:
        u, w = npleg.leggauss(n_nodes)
        k = 0.5 * (lo + hi) + 0.5 * (hi - lo) * u
        w = 0.5 * (hi - lo) * w
    g = np.exp(-((k - k0) ** 2) / (4 * sigma_k**2))
    c = 1.0 / np.sqrt(2 * np.pi * np.sum(w * g * g))
    return SpectralWavepacket(k, w, (c * g).astype(complex), float(k0), float(sigma_k), float(c))


def resonance_refinement(potential: Potential, k0: float, sigma_k: float, n_nodes: int = 257,
                         dx: float = DEFAULT_DX, constants: Constants = DEFAULT, n_scan: int = 2000):
    """(k_res, width_k) of FD transmission peaks too narrow for the plain node spacing."""
    from .fdsolver import sharp_peaks

    lo, hi = max(k0 - 6 * sigma_k, 1e-6), k0 + 6 * sigma_k
    E = constants.energy(np.linspace(lo, hi, n_scan))
    scan = transmission_scan(potential, E, dx, constants)
    out = []
    for pk in sharp_peaks(potential, scan, dx, constants):
        kr = float(constants.wavenumber(pk.E))
        gk = pk.fwhm * constants.mass / (constants.hbar**2 * kr)
        if gk < 4 * (hi - lo) / n_nodes:
            out.append((kr, gk))
    return out


@dataclass
class StationaryStates:
    k: np.ndarray
    T: np.ndarray
    R: np.ndarray
    a: float
    x_inner: np.ndarray
    psi_inner: np.ndarray  # (n_nodes, n_inner)

    def evaluate(self, x) -> np.ndarray:
        """psi~_k(x) for every node, shape (n_nodes, len(x))."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        k = self.k[:, None]
        out = np.empty((self.k.size, x.size), dtype=complex)
        left = x < -self.a
        right = x > self.a
        mid = ~(left | right)
        out[:, left] = np.exp(1j * k * x[left]) + self.R[:, None] * np.exp(-1j * k * x[left])
        out[:, right] = self.T[:, None] * np.exp(1j * k * x[right])
        if mid.any():
            out[:, mid] = self._interp(x[mid])
        return out

    def _interp(self, x):
        xi = self.x_inner
        h = xi[1] - xi[0]
        t = (x - xi[0]) / h
        i = np.clip(np.floor(t).astype(int) - 1, 0, xi.size - 4)
        u = t - i
        out = 0
        for j in range(4):
            wj = np.ones_like(u)
            for m in range(4):
                if m != j:
                    wj = wj * (u - m) / (j - m)
            out = out + wj * self.psi_inner[:, i + j]
        return out


def stationary_states(packet: SpectralWavepacket, potential: Potential, dx: float = DEFAULT_DX,
                      constants: Constants = DEFAULT, stride: int = 10,
                      backend: str | None = None) -> StationaryStates:
    """FD states at the packet nodes.  Inside the box psi~ is kept every ``stride`` points."""
    E = constants.energy(packet.k)
    grid = make_grid(potential.a, packet.k.min(), dx)
    v = potential(grid.x)
    scan = transmission_scan(potential, E, dx, constants, backend=backend)
    c = (grid.x.size - 1) // 2
    m = int(np.ceil(potential.a / dx / stride)) + 2
    idx = c + stride * np.arange(-m, m + 1)
    psi = np.empty((E.size, idx.size), dtype=complex)
    for j, e in enumerate(E):
        psi[j] = _kernels.wavefunction(v, grid.x, e, constants.c2m, backend)[idx] * scan.T[j]
    return StationaryStates(packet.k.copy(), scan.T, scan.R, float(potential.a), grid.x[idx], psi)


def propagate(packet: SpectralWavepacket, states: StationaryStates, t: float, x,
              constants: Constants = DEFAULT, chunk: int = 4096) -> np.ndarray:
    if states.k.shape != packet.k.shape or not np.allclose(states.k, packet.k, rtol=0, atol=1e-14):
        raise NodeMismatch("stationary states were computed on different k nodes")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    phase = np.exp(-1j * constants.hbar * packet.k**2 * t / (2 * constants.mass))
    coef = packet.w * packet.F * phase
    out = np.empty(x.size, dtype=complex)
    for s in range(0, x.size, chunk):
        out[s:s + chunk] = coef @ states.evaluate(x[s:s + chunk])
    return out


def free_propagate(packet: SpectralWavepacket, t: float, x, constants: Constants = DEFAULT) -> np.ndarray:
    x = np.atleast_1d(np.asarray(x, dtype=float))
    phase = np.exp(-1j * constants.hbar * packet.k**2 * t / (2 * constants.mass))
    return (packet.w * packet.F * phase) @ np.exp(1j * packet.k[:, None] * x[None, :])


def norm(psi, x) -> float:
    return float(trapezoid(np.abs(psi) ** 2, x))


def branch_populations(packet: SpectralWavepacket, T, R):
    """(2 pi int |F|^2 |T|^2 dk, 2 pi int |F|^2 |R|^2 dk) by the packet quadrature."""
    wf = 2 * np.pi * packet.w * np.abs(packet.F) ** 2
    return float(np.sum(wf * np.abs(T) ** 2)), float(np.sum(wf * np.abs(R) ** 2))


@dataclass
class CoefficientCurve:
    """Cubic interpolants of T(k) and R(k) over a scan."""

    k: np.ndarray
    T: np.ndarray
    R: np.ndarray

    def __post_init__(self):
        self._t = CubicSpline(self.k, self.T)
        self._r = CubicSpline(self.k, self.R)

    def t(self, k):
        return self._t(k)

    def r(self, k):
        return self._r(k)


def coefficient_curve(potential: Potential, packet: SpectralWavepacket, n: int = 4001,
                      dx: float = DEFAULT_DX, constants: Constants = DEFAULT) -> CoefficientCurve:
    lo, hi = packet.support
    k = np.linspace(lo, hi, n)
    scan = transmission_scan(potential, constants.energy(k), dx, constants)
    return CoefficientCurve(k, scan.T, scan.R)


def spa_branch(packet: SpectralWavepacket, curve: CoefficientCurve, t: float, x, branch: str,
               a: float, constants: Constants = DEFAULT) -> np.ndarray:
    """Leading stationary-phase form of one asymptotic branch.

    transmitted: x > a, t > 0;  incoming: x < -a, t < 0;  reflected: x < -a, t > 0.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    m, hb = constants.mass, constants.hbar
    if branch == "transmitted":
        ok = t > 0 and np.all(x > a)
    elif branch in ("incoming", "reflected"):
        ok = (t < 0 if branch == "incoming" else t > 0) and np.all(x < -a)
    else:
        raise ValueError(f"unknown branch {branch!r}")
    if not ok:
        raise BranchDomainError(f"{branch} branch is not defined at t = {t:g} for these x")

    ks = m * x / (hb * t)
    pref = np.sqrt(2 * np.pi * m / (hb * abs(t))) * np.exp(1j * m * x * x / (2 * hb * t))
    lo, hi = packet.support
    if branch == "transmitted":
        amp = np.exp(-0.25j * np.pi) * packet.amplitude(ks) * _clip_eval(curve.t, ks, lo, hi)
    elif branch == "incoming":
        amp = np.exp(0.25j * np.pi) * packet.amplitude(ks)
    else:
        amp = np.exp(-0.25j * np.pi) * packet.amplitude(-ks) * _clip_eval(curve.r, -ks, lo, hi)
    return pref * amp


def _clip_eval(f, k, lo, hi):
    inside = (k >= lo) & (k <= hi)
    out = np.zeros(k.shape, dtype=complex)
    out[inside] = f(k[inside])
    return out
