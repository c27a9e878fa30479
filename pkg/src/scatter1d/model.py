"""Physical constants, potentials, energy grids and support-range detection."""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import InvalidEnergy, RangeNotFound

DEFAULT_RANGE_THRESHOLD = 1e-12


@dataclass(frozen=True)
class Constants:
    hbar: float = 1.0
    mass: float = 1.0

    def __post_init__(self):
        if not (self.hbar > 0 and self.mass > 0):
            raise ValueError("hbar and mass must be positive")

    @property
    def c2m(self) -> float:
        """2m/hbar^2, the factor that turns energies into squared wavenumbers."""
        return 2.0 * self.mass / self.hbar**2

    def wavenumber(self, E):
        return np.sqrt(2.0 * self.mass * np.asarray(E, dtype=float)) / self.hbar

    def energy(self, k):
        return (self.hbar * k) ** 2 / (2.0 * self.mass)


DEFAULT = Constants()


@dataclass(frozen=True)
class Potential:
    """A real potential given by a vectorized evaluator and a support half-width.

    ``a`` is the half-width of the symmetric box [-a, a] outside of which the
    potential is treated as zero.
    """

    func: Callable[[np.ndarray], np.ndarray]
    a: float
    tag: str = "custom"
    meta: dict = field(default_factory=dict, compare=False)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return np.broadcast_to(np.asarray(self.func(x), dtype=float), x.shape).copy()

    def scaled(self, s: float) -> "Potential":
        f = self.func
        return Potential(lambda x: s * f(x), self.a, f"{s:g}*{self.tag}", dict(self.meta))


def _jolanta(x):
    return (0.5 * x * x - 0.8) * np.exp(-0.1 * x * x)


def jolanta_potential(threshold: float = DEFAULT_RANGE_THRESHOLD) -> Potential:
    """V(x) = (x^2/2 - 0.8) exp(-x^2/10), with a chosen by :func:`detect_range`."""
    return Potential(_jolanta, detect_range(_jolanta, threshold), "jolanta")


def zero_potential(a: float = 1.0) -> Potential:
    return Potential(np.zeros_like, a, "zero")


def square_barrier(v0: float = 1.0, half_width: float = 0.5) -> Potential:
    # strict inequality so the support ends exactly at the edge
    return Potential(lambda x: np.where(np.abs(x) < half_width, v0, 0.0), half_width,
                     "square", {"v0": v0, "half_width": half_width})


def step_well(v_left: float = 0.4, v_right: float = -0.3, half_width: float = 1.0) -> Potential:
    """Asymmetric test potential: a step inside [-w, w] that is zero outside."""
    def f(x):
        inside = np.abs(x) < half_width
        return np.where(inside & (x < 0), v_left, 0.0) + np.where(inside & (x >= 0), v_right, 0.0)
    return Potential(f, half_width, "stepwell")


def tabulated_potential(source, tag: str = "table") -> Potential:
    """Cubic interpolation of (x, V) samples, zero outside the table.

    ``source`` is a CSV path with columns x,V or a pair of arrays.
    """
    from scipy.interpolate import CubicSpline

    if isinstance(source, (str, bytes)) or hasattr(source, "__fspath__"):
        with open(source, newline="") as fh:
            rows = [r for r in csv.reader(fh) if r]
        try:
            float(rows[0][0])
        except ValueError:
            rows = rows[1:]
        xs = np.array([float(r[0]) for r in rows])
        vs = np.array([float(r[1]) for r in rows])
    else:
        xs, vs = (np.asarray(s, dtype=float) for s in source)
    order = np.argsort(xs)
    xs, vs = xs[order], vs[order]
    spline = CubicSpline(xs, vs)
    lo, hi = xs[0], xs[-1]

    def f(x):
        out = np.zeros_like(x)
        m = (x >= lo) & (x <= hi)
        out[m] = spline(x[m])
        return out

    return Potential(f, float(max(abs(lo), abs(hi))), tag)


def detect_range(func, threshold: float = DEFAULT_RANGE_THRESHOLD,
                 step: float = 0.01, bound: float = 100.0) -> float:
    """Smallest sampled a with |V(x)| < threshold for every sample |x| >= a up to ``bound``."""
    if threshold <= 0:
        raise ValueError("threshold must be positive")
    n = int(round(bound / step)) + 1
    xs = step * np.arange(n)
    v = np.maximum(np.abs(func(xs)), np.abs(func(-xs)))
    bad = np.nonzero(v >= threshold)[0]
    if bad.size == 0:
        return 0.0
    if bad[-1] >= n - 1:
        raise RangeNotFound(f"|V| >= {threshold:g} persists up to x = {bound:g}")
    return float(xs[bad[-1] + 1])


def energy_grid(emin: float, emax: float, n: int) -> np.ndarray:
    if n < 1 or emin <= 0 or (n > 1 and emax <= emin):
        raise InvalidEnergy(f"bad energy grid [{emin}, {emax}] x {n}")
    return np.linspace(emin, emax, n)


def wavenumbers(energies, constants: Constants = DEFAULT) -> np.ndarray:
    return constants.wavenumber(energies)


REGISTRY = {
    "jolanta": jolanta_potential,
    "zero": lambda threshold=None: zero_potential(),
    "square": lambda threshold=None: square_barrier(),
    "stepwell": lambda threshold=None: step_well(),
}


def get_potential(name: str, threshold: float = DEFAULT_RANGE_THRESHOLD,
                  table: str | None = None, scale: float = 1.0) -> Potential:
    if name == "table":
        if not table:
            raise ValueError("potential 'table' needs a CSV path")
        pot = tabulated_potential(table)
    elif name in REGISTRY:
        pot = REGISTRY[name](threshold=threshold)
    else:
        raise ValueError(f"unknown potential {name!r}; choose from {sorted(REGISTRY) + ['table']}")
    return pot if scale == 1.0 else pot.scaled(scale)
