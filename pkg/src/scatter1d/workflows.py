"""Multi-step computations shared by the CLI and the validation suite."""
from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from . import green, siegert
from .fdsolver import (find_peaks, solve_left_incident, solve_right_incident, transmission_scan,
                       wronskian)
from .model import Constants, Potential


def local_fd_curve(potential, E_res, Gamma, dx, constants, n=401, span=5.0):
    """Dense FD |T|^2 samples over E_res +- span*Gamma."""
    lo = max(E_res - span * Gamma, 1e-12)
    E = np.linspace(lo, E_res + span * Gamma, n)
    return E, transmission_scan(potential, E, dx, constants).T2


def resonance_table(spec, potential, emin, emax, dx, constants, max_gamma=0.1):
    rows = []
    cls = siegert.classify_spectrum(spec)
    for i in cls.resonances:
        E = spec.E[i]
        G = -2 * E.imag
        if not (emin <= E.real <= emax and 0 < G <= max_gamma):
            continue
        fe, ft = local_fd_curve(potential, E.real, G, dx, constants)
        rec = siegert.breit_wigner_report(spec, fe, ft, int(i))
        rows.append(asdict(rec) | {"k": [rec.k.real, rec.k.imag]})
    return rows


@dataclass
class Comparison:
    E: np.ndarray
    T_fd: np.ndarray
    T_siegert: np.ndarray
    unitarity_worst: float
    resonances: list = field(default_factory=list)

    @property
    def diff(self):
        return np.abs(self.T_fd - self.T_siegert)

    def summary(self) -> dict:
        d = self.diff
        return {"points": int(self.E.size), "max_abs_diff": float(d.max()),
                "argmax_E": float(self.E[np.argmax(d)]), "unitarity_worst": self.unitarity_worst,
                "resonances": self.resonances}


def compare_routes(potential: Potential, energies, N=40, a=15.0, kind="legendre", dx=1e-3,
                   constants: Constants = Constants(), range_tolerance=1e-6,
                   with_resonances=True) -> Comparison:
    energies = np.asarray(energies, dtype=float)
    scan = transmission_scan(potential, energies, dx, constants)
    spec = siegert.siegert_spectrum(potential, N, a, kind, constants, range_tolerance)
    Ts = siegert.siegert_transmission(spec, energies)
    res = []
    if with_resonances:
        res = resonance_table(spec, potential, energies.min(), energies.max(), dx, constants)
    return Comparison(energies, scan.T, Ts, float(scan.unitarity_residual.max()), res)


def green_report(potential: Potential, E: float, dx=1e-3, constants: Constants = Constants(),
                 spectrum=None) -> dict:
    """Residuals of the Green-function, Wronskian and on-shell identities at one energy."""
    plus = solve_right_incident(potential, E, dx, constants)
    minus = solve_left_incident(potential, E, dx, constants)
    a = potential.a
    w = wronskian(plus, minus, constants)
    lhs, rhs = green.green_endpoint_identity(plus, minus, a, constants)
    jump = green.derivative_jump(plus, minus, 0.0, constants)
    tp = green.onshell_t_matrix(plus, +1, a, constants, potential)
    tm = green.onshell_t_matrix(plus, -1, a, constants, potential)
    rng = np.linspace(-0.9 * a, 0.9 * a, 7)
    xs, ys = np.meshgrid(rng, rng[::-1])
    g1 = green.full_green_retarded(plus, minus, xs.ravel(), ys.ravel(), constants)
    g2 = green.full_green_retarded(plus, minus, ys.ravel(), xs.ravel(), constants)
    out = {
        "E": E, "T": [plus.T.real, plus.T.imag],
        "wronskian_constancy": w.max_dev_constant,
        "wronskian_vs_T": w.max_dev_expected,
        "direction_T_diff": abs(plus.T - minus.T),
        "endpoint_rel": abs(lhs - rhs) / abs(rhs),
        "jump_rel": abs(jump - constants.c2m) / constants.c2m,
        "onshell_plus": abs(tp - 1j / (2 * np.pi) * (plus.T - 1)),
        "onshell_minus": abs(tm - 1j / (2 * np.pi) * plus.R),
        "symmetry": float(np.max(np.abs(g1 - g2))),
    }
    if spectrum is not None:
        sa = spectrum.basis.a
        gs = siegert.siegert_green(spectrum, E, 0.0, 0.0)
        g0 = green.full_green_retarded(plus, minus, 0.0, 0.0, constants)
        out["siegert_green_center_rel"] = abs(gs - g0) / abs(g0)
        gsa = siegert.siegert_green(spectrum, E, -sa, sa)
        K = plus.K
        closed = -1j * constants.mass / (constants.hbar**2 * K) * plus.T * np.exp(2j * K * sa)
        out["siegert_endpoint_rel"] = abs(gsa - closed) / abs(closed)
    return out


@dataclass
class Check:
    name: str
    value: float
    limit: float

    @property
    def ok(self) -> bool:
        return bool(np.isfinite(self.value) and self.value <= self.limit)

    def line(self) -> str:
        return f"{'PASS' if self.ok else 'FAIL'}  {self.name:<34s} {self.value:.3e}  (limit {self.limit:.0e})"


def validation_checks(cfg) -> list[Check]:
    """The invariant suite behind ``validate``; each check is one residual and its limit."""
    from . import wavepacket

    pot = cfg.potential()
    c = cfg.constants
    dx = cfg.fd_dx
    E = np.linspace(cfg.scan_emin, cfg.scan_emax, cfg.compare_n)
    checks = []

    scan = transmission_scan(pot, E, dx, c, cfg.pad)
    checks.append(Check("unitarity", float(scan.unitarity_residual.max()), 1e-6))
    half = transmission_scan(pot, E, dx / 2, c, cfg.pad)
    checks.append(Check("fd grid convergence |T(dx)-T(dx/2)|", float(np.abs(half.T - scan.T).max()), 1e-4))
    left = transmission_scan(pot, E[::4], dx, c, cfg.pad, direction=-1)
    checks.append(Check("direction symmetry of T", float(np.abs(left.T - scan.T[::4]).max()), 1e-8))

    gr = green_report(pot, 0.5, dx, c)
    checks.append(Check("wronskian constancy", gr["wronskian_constancy"], 1e-6))
    checks.append(Check("wronskian = i m T / (pi hbar^2)", gr["wronskian_vs_T"], 1e-6))
    checks.append(Check("green endpoint identity", gr["endpoint_rel"], 1e-3))
    checks.append(Check("green derivative jump", gr["jump_rel"], 0.05))
    checks.append(Check("on-shell T-matrix (eta=+1)", gr["onshell_plus"], 1e-5))
    checks.append(Check("on-shell T-matrix (eta=-1)", gr["onshell_minus"], 1e-5))

    spec = siegert.siegert_spectrum(pot, cfg.siegert_n, cfg.siegert_a, cfg.siegert_basis, c,
                                    cfg.siegert_range_tolerance)
    checks.append(Check("siegert QEP residual", float(siegert.qep_residuals(spec).max()), 1e-8))
    checks.append(Check("siegert normalization", siegert.normalization_residual(spec), 1e-8))
    for k, v in siegert.closure_residuals(spec).items():
        checks.append(Check(f"siegert closure {k}", v, 1e-8))
    lam = [0.3 + 0.2j, -0.7 + 0.4j, 1.1 - 0.5j, 0.05 + 1.3j, -1.6 - 0.9j]
    checks.append(Check("siegert M(lambda)^-1", siegert.m_inverse_residual(spec, lam), 1e-6))
    Ts = siegert.siegert_transmission(spec, E)
    checks.append(Check("siegert vs FD transmission", float(np.abs(Ts - scan.T).max()), 1e-3))

    pk = wavepacket.gaussian_packet(cfg.wavepacket_k0, cfg.wavepacket_sigma, cfg.wavepacket_nodes)
    st = wavepacket.stationary_states(pk, pot, dx, c)
    pt, pr = wavepacket.branch_populations(pk, st.T, st.R)
    checks.append(Check("wavepacket population sum rule", abs(pt + pr - 1), 1e-4))
    return checks
