"""Siegert pseudostates in a finite spectral basis.

The outgoing-wave condition at x = +-a turns the box Hamiltonian into the
quadratic eigenproblem (A + lam B + lam^2) c = 0, lam = i k, which is solved
through its 2N x 2N companion matrix.  Eigenvectors are scaled with the
unconjugated bilinear form, after which Green functions and transmission are
plain sums over all 2N states.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import legendre as npleg

from .errors import (DefectivePencil, EigensolveFailure, InvalidEnergy, InvalidSize, OutOfBox,
                     PoleProximityWarning, SupportExceedsBox, WindowUncovered, ZeroEigenvalue)
from .model import DEFAULT, Constants, Potential

LAMBDA_ZERO_TOL = 1e-10
DEGENERACY_TOL = 1e-10
QEP_RESIDUAL_TOL = 1e-6
BOX_TOLERANCE = 1e-6
POLE_TOL = 1e-12


@dataclass(frozen=True)
class BasisSet:
    """Orthonormal real basis on [-a, a].

    ``legendre``: sqrt((2n+1)/(2a)) P_n(x/a).
    ``fourier``: the span of exp(i n pi x/a)/sqrt(2a) written as the real set
    1/sqrt(2a), cos(n pi x/a)/sqrt(a), sin(n pi x/a)/sqrt(a), ordered by n.
    """

    kind: str
    a: float
    N: int
    n_quad: int
    nodes: np.ndarray = field(repr=False, compare=False)
    weights: np.ndarray = field(repr=False, compare=False)

    def _legendre(self, x, deriv):
        u = np.asarray(x, dtype=float) / self.a
        P = npleg.legvander(u, self.N - 1).T
        s = np.sqrt((2 * np.arange(self.N) + 1) / (2 * self.a))[:, None]
        if not deriv:
            return s * P
        dP = np.zeros_like(P)
        # P'_{n+1} = P'_{n-1} + (2n+1) P_n
        for n in range(self.N - 1):
            dP[n + 1] = (dP[n - 1] if n >= 1 else 0.0) + (2 * n + 1) * P[n]
        return s * dP / self.a

    def _fourier(self, x, deriv):
        x = np.asarray(x, dtype=float)
        out = np.empty((self.N, x.size))
        out[0] = 0.0 if deriv else 1.0 / np.sqrt(2 * self.a)
        for j in range(1, self.N):
            q = ((j + 1) // 2) * np.pi / self.a
            if j % 2:
                out[j] = -q * np.sin(q * x) if deriv else np.cos(q * x)
            else:
                out[j] = q * np.cos(q * x) if deriv else np.sin(q * x)
        out[1:] /= np.sqrt(self.a)
        return out

    def values(self, x) -> np.ndarray:
        """Basis functions at ``x``, shape (N, len(x))."""
        x = np.atleast_1d(x)
        return self._legendre(x, False) if self.kind == "legendre" else self._fourier(x, False)

    def derivatives(self, x) -> np.ndarray:
        x = np.atleast_1d(x)
        return self._legendre(x, True) if self.kind == "legendre" else self._fourier(x, True)

    def boundary(self, side: int) -> np.ndarray:
        """b(+a) for side=+1 and b(-a) for side=-1."""
        n = np.arange(self.N)
        if self.kind == "legendre":
            return np.sqrt((2 * n + 1) / (2 * self.a)) * float(side) ** n
        return self.values(np.array([side * self.a]))[:, 0]

    def gram(self) -> np.ndarray:
        b = self.values(self.nodes)
        return (b * self.weights) @ b.T


def build_basis(kind: str = "legendre", a: float = 15.0, N: int = 40, n_quad: int | None = None) -> BasisSet:
    kind = kind.lower()
    if kind not in ("legendre", "fourier"):
        raise ValueError(f"unknown basis kind {kind!r}")
    if N < 2:
        raise InvalidSize(f"basis needs N >= 2, got {N}")
    if not a > 0:
        raise InvalidSize(f"box half-width must be positive, got {a}")
    nq = n_quad or 2 * N + 16
    u, w = npleg.leggauss(nq)
    return BasisSet(kind, float(a), int(N), nq, a * u, a * w)


@dataclass
class SiegertMatrices:
    H: np.ndarray
    L: np.ndarray
    A: np.ndarray
    B: np.ndarray
    basis: BasisSet
    constants: Constants


def boundary_matrix(basis: BasisSet, constants: Constants = DEFAULT) -> np.ndarray:
    bp, bm = basis.boundary(+1), basis.boundary(-1)
    return constants.hbar**2 / (2 * constants.mass) * (np.outer(bp, bp) + np.outer(bm, bm))


def build_matrices(potential: Potential, basis: BasisSet, constants: Constants = DEFAULT,
                   range_tolerance: float = BOX_TOLERANCE) -> SiegertMatrices:
    a = basis.a
    edge = float(np.max(np.abs(potential(np.array([-a, a])))))
    if edge > range_tolerance:
        raise SupportExceedsBox(f"|V(+-{a:g})| = {edge:.3g} exceeds {range_tolerance:g}")
    x, w = basis.nodes, basis.weights
    b = basis.values(x)
    db = basis.derivatives(x)
    H = constants.hbar**2 / (2 * constants.mass) * (db * w) @ db.T + (b * (w * potential(x))) @ b.T
    H = 0.5 * (H + H.T)
    L = boundary_matrix(basis, constants)
    return SiegertMatrices(H, L, constants.c2m * H, -constants.c2m * L, basis, constants)


@dataclass
class SiegertSpectrum:
    lam: np.ndarray          # 2N eigenvalues, lam = i k
    c: np.ndarray            # (N, 2N) normalized coefficient columns
    basis: BasisSet
    B: np.ndarray
    constants: Constants = DEFAULT
    A: np.ndarray | None = None
    qep_residual: float = np.nan
    structure_residual: float = np.nan

    @property
    def k(self):
        return -1j * self.lam

    @property
    def E(self):
        return self.constants.hbar**2 * self.k**2 / (2 * self.constants.mass)

    def __len__(self):
        return self.lam.size

    def phi(self, x) -> np.ndarray:
        """phi_n(x) for all states, shape (2N, len(x))."""
        return self.c.T @ self.basis.values(x)

    def phi_boundary(self):
        """(phi_n(-a), phi_n(+a))."""
        return self.c.T @ self.basis.boundary(-1), self.c.T @ self.basis.boundary(+1)

    def to_dict(self) -> dict:
        pm, pp = self.phi_boundary()
        cls = classify_spectrum(self)
        return {
            "basis": {"kind": self.basis.kind, "a": self.basis.a, "N": self.basis.N, "n_quad": self.basis.n_quad},
            "constants": {"hbar": self.constants.hbar, "mass": self.constants.mass},
            "qep_residual": self.qep_residual,
            "structure_residual": self.structure_residual,
            "states": [
                {"lambda": [l.real, l.imag], "k": [kk.real, kk.imag], "E": [e.real, e.imag],
                 "class": cls.label(n), "phi_minus_a": [m.real, m.imag], "phi_plus_a": [p.real, p.imag],
                 "c_re": self.c[:, n].real.tolist(), "c_im": self.c[:, n].imag.tolist()}
                for n, (l, kk, e, m, p) in enumerate(zip(self.lam, self.k, self.E, pm, pp))
            ],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SiegertSpectrum":
        b = d["basis"]
        basis = build_basis(b["kind"], b["a"], b["N"], b.get("n_quad"))
        consts = Constants(**d["constants"])
        st = d["states"]
        lam = np.array([complex(*s["lambda"]) for s in st])
        c = np.array([np.array(s["c_re"]) + 1j * np.array(s["c_im"]) for s in st]).T
        B = -consts.c2m * boundary_matrix(basis, consts)
        return cls(lam, c, basis, B, consts, None, d.get("qep_residual", np.nan),
                   d.get("structure_residual", np.nan))


def companion(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    N = A.shape[0]
    return np.block([[np.zeros((N, N)), np.eye(N)], [-A, -B]])


def solve_qep(matrices: SiegertMatrices, qep_tol: float = QEP_RESIDUAL_TOL) -> SiegertSpectrum:
    A, B = matrices.A, matrices.B
    if A.shape != B.shape or A.shape[0] != A.shape[1]:
        raise InvalidSize("A and B must be square and of equal size")
    N = A.shape[0]
    try:
        lam, vec = np.linalg.eig(companion(A, B))
    except np.linalg.LinAlgError as exc:
        raise EigensolveFailure(str(exc)) from exc
    if not np.all(np.isfinite(lam)):
        raise EigensolveFailure("non-finite eigenvalues")
    small = np.abs(lam) < LAMBDA_ZERO_TOL
    if small.any():
        raise ZeroEigenvalue(f"{small.sum()} eigenvalue(s) with |lambda| < {LAMBDA_ZERO_TOL:g}")
    gap = np.abs(lam[:, None] - lam[None, :]) + np.diag(np.full(lam.size, np.inf))
    if gap.min() < DEGENERACY_TOL:
        raise DefectivePencil(f"eigenvalues closer than {DEGENERACY_TOL:g}")

    order = np.lexsort((lam.imag, lam.real))
    lam, vec = lam[order], vec[:, order]
    c = vec[:N]
    cn = np.linalg.norm(c, axis=0)
    structure = float(np.max(np.linalg.norm(vec[N:] - lam * c, axis=0) / cn))

    res = np.linalg.norm(A @ c + lam * (B @ c) + lam**2 * c, axis=0) / cn
    qres = float(res.max())
    if qres > qep_tol:
        raise DefectivePencil(f"QEP residual {qres:.3g} exceeds {qep_tol:g}")

    s = 2 * lam * np.sum(c * c, axis=0) + np.einsum("in,ij,jn->n", c, B, c)
    c = c * np.sqrt(2 * lam / s)
    return SiegertSpectrum(lam, c, matrices.basis, B, matrices.constants, A, qres, structure)


def siegert_spectrum(potential: Potential, N: int = 40, a: float = 15.0, kind: str = "legendre",
                     constants: Constants = DEFAULT, range_tolerance: float = BOX_TOLERANCE) -> SiegertSpectrum:
    basis = build_basis(kind, a, N)
    return solve_qep(build_matrices(potential, basis, constants, range_tolerance))


# identities -----------------------------------------------------------------

def qep_residuals(spec: SiegertSpectrum) -> np.ndarray:
    c, lam = spec.c, spec.lam
    r = spec.A @ c + lam * (spec.B @ c) + lam**2 * c
    return np.linalg.norm(r, axis=0) / np.linalg.norm(c, axis=0)


def normalization_residual(spec: SiegertSpectrum) -> float:
    """max |(l_n + l_m) c_n.c_m + c_n.B.c_m - 2 l_n delta_nm| over all pairs."""
    c, lam = spec.c, spec.lam
    G = (lam[:, None] + lam[None, :]) * (c.T @ c) + c.T @ spec.B @ c
    G[np.diag_indices_from(G)] -= 2 * lam
    return float(np.max(np.abs(G)))


def closure_residuals(spec: SiegertSpectrum) -> dict:
    c, lam = spec.c, spec.lam
    N = c.shape[0]
    return {
        "sum_cc/lambda": float(np.max(np.abs((c / lam) @ c.T))),
        "sum_cc-2I": float(np.max(np.abs(c @ c.T - 2 * np.eye(N)))),
        "sum_lambda_cc+2B": float(np.max(np.abs((c * lam) @ c.T + 2 * spec.B))),
    }


def m_inverse(spec: SiegertSpectrum, lam) -> np.ndarray:
    """sum_n c_n c_n^T / (2 l_n (lam - l_n))."""
    return (spec.c / (2 * spec.lam * (lam - spec.lam))) @ spec.c.T


def m_inverse_residual(spec: SiegertSpectrum, lams) -> float:
    N = spec.c.shape[0]
    worst = 0.0
    for l in np.atleast_1d(lams):
        M = spec.A + l * spec.B + l * l * np.eye(N)
        worst = max(worst, float(np.max(np.abs(M @ m_inverse(spec, l) - np.eye(N)))))
    return worst


def conjugation_asymmetry(spec: SiegertSpectrum) -> float:
    """Largest distance from a conjugated eigenvalue to the nearest eigenvalue."""
    d = np.abs(np.conj(spec.lam)[:, None] - spec.lam[None, :])
    return float(d.min(axis=1).max())


# Green function and transmission ---------------------------------------------

def _k_of(E, constants):
    E = np.asarray(E, dtype=float)
    if np.any(E <= 0):
        raise InvalidEnergy("Siegert sums are evaluated at E > 0")
    return constants.wavenumber(E)


def _pole_check(k, kn):
    d = np.min(np.abs(np.atleast_1d(k)[:, None] - kn[None, :]))
    if d < POLE_TOL:
        warnings.warn(f"energy within {d:.2g} of a Siegert pole", PoleProximityWarning, stacklevel=3)


def siegert_green(spec: SiegertSpectrum, E: float, x, y):
    """G+(x, y) = (m/hbar^2) sum_n phi_n(x) phi_n(y) / (k_n (k - k_n))."""
    a = spec.basis.a
    xs, ys = np.atleast_1d(np.asarray(x, float)), np.atleast_1d(np.asarray(y, float))
    if np.any(np.abs(xs) > a * (1 + 1e-12)) or np.any(np.abs(ys) > a * (1 + 1e-12)):
        raise OutOfBox(f"Green function arguments must lie in [-{a:g}, {a:g}]")
    k = float(_k_of(E, spec.constants))
    kn = spec.k
    _pole_check(k, kn)
    wts = 1.0 / (kn * (k - kn))
    px, py = spec.phi(xs), spec.phi(ys)
    g = spec.constants.mass / spec.constants.hbar**2 * np.einsum("n,nx,nx->x", wts, *np.broadcast_arrays(px, py))
    return complex(g[0]) if g.size == 1 else g


def siegert_transmission(spec: SiegertSpectrum, E):
    """T(E) = i k exp(-2ika) sum_n phi_n(-a) phi_n(a) / (k_n (k - k_n))."""
    k = _k_of(E, spec.constants)
    scalar = k.ndim == 0
    k = np.atleast_1d(k)
    kn = spec.k
    _pole_check(k, kn)
    pm, pp = spec.phi_boundary()
    s = ((pm * pp / kn)[None, :] / (k[:, None] - kn[None, :])).sum(axis=1)
    T = 1j * k * np.exp(-2j * k * spec.basis.a) * s
    return complex(T[0]) if scalar else T


# classification and resonances -------------------------------------------------

@dataclass
class Classification:
    bound: np.ndarray
    antibound: np.ndarray
    resonance_pairs: list
    other: np.ndarray

    @property
    def resonances(self) -> np.ndarray:
        return np.array([p[0] for p in self.resonance_pairs], dtype=int)

    def label(self, n: int) -> str:
        if n in self.bound:
            return "bound"
        if n in self.antibound:
            return "antibound"
        for r, m in self.resonance_pairs:
            if n == r:
                return "resonance"
            if n == m:
                return "resonance-mirror"
        return "other"


def classify_spectrum(spec: SiegertSpectrum, tol_axis: float | None = None) -> Classification:
    k = spec.k
    tol = (1e-6 if tol_axis is None else tol_axis) * (1 + np.abs(k))
    on_axis = np.abs(k.real) <= tol
    bound = np.nonzero(on_axis & (k.imag > 0))[0]
    antibound = np.nonzero(on_axis & (k.imag < 0))[0]
    res = np.nonzero((k.real > tol) & (k.imag < 0))[0]
    mirrors = set(np.nonzero((k.real < -tol) & (k.imag < 0))[0].tolist())
    pairs = []
    for r in res:
        if not mirrors:
            break
        cand = np.array(sorted(mirrors))
        j = cand[np.argmin(np.abs(k[cand] + np.conj(k[r])))]
        if abs(k[j] + np.conj(k[r])) <= 1e-6 * (1 + abs(k[r])):
            pairs.append((int(r), int(j)))
            mirrors.discard(j)
    used = set(bound) | set(antibound) | {i for p in pairs for i in p}
    other = np.array([n for n in range(k.size) if n not in used], dtype=int)
    return Classification(bound, antibound, pairs, other)


def find_resonance(spec: SiegertSpectrum, E_guess: float, cls: Classification | None = None) -> int:
    """Index of the classified resonance closest to E_guess in the complex plane."""
    cls = cls or classify_spectrum(spec)
    idx = cls.resonances
    if idx.size == 0:
        raise LookupError("spectrum has no resonances")
    return int(idx[np.argmin(np.abs(spec.E[idx] - E_guess))])


@dataclass
class ResonanceRecord:
    E_res: float
    Gamma: float
    k: complex
    Q: float
    fit_rms: float
    index: int = -1


def breit_wigner_q(spec: SiegertSpectrum, index: int) -> float:
    pm, pp = spec.phi_boundary()
    Gamma = -2 * spec.E[index].imag
    k = spec.k[index]
    c = spec.constants
    return float(abs(c.hbar**2 * k / c.mass * 2 / Gamma * pm[index] * pp[index]) ** 2)


def lorentzian(E, E_res, Gamma, Q=1.0):
    h = 0.5 * Gamma
    return Q * h * h / ((np.asarray(E) - E_res) ** 2 + h * h)


def breit_wigner_report(spec: SiegertSpectrum, fd_E, fd_T2, index: int,
                        window: float = 2.0, min_samples: int = 5) -> ResonanceRecord:
    """Compare the Lorentzian of state ``index`` with an FD |T|^2 curve.

    The curve must span E_res +- 5 Gamma and contain at least ``min_samples``
    points inside the +-window*Gamma fit region.
    """
    E_n = spec.E[index]
    E_res, Gamma = float(E_n.real), float(-2 * E_n.imag)
    if not (E_res > 0 and Gamma > 0):
        raise ValueError(f"state {index} is not a resonance (E = {E_n})")
    fd_E = np.asarray(fd_E, dtype=float)
    fd_T2 = np.asarray(fd_T2, dtype=float)
    sel = np.abs(fd_E - E_res) <= window * Gamma
    if fd_E.min() > E_res - 5 * Gamma or fd_E.max() < E_res + 5 * Gamma or sel.sum() < min_samples:
        raise WindowUncovered(f"FD curve does not resolve E_res = {E_res:.6g}, Gamma = {Gamma:.3g}")
    Q = breit_wigner_q(spec, index)
    rms = float(np.sqrt(np.mean((lorentzian(fd_E[sel], E_res, Gamma, Q) - fd_T2[sel]) ** 2)))
    return ResonanceRecord(E_res, Gamma, complex(spec.k[index]), Q, rms, int(index))
