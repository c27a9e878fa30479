"""Transmission in one dimension by finite differences and Siegert pseudostates."""
from .model import Constants, Potential, detect_range, energy_grid, jolanta_potential, square_barrier, step_well, zero_potential
from .fdsolver import solve_left_incident, solve_right_incident, transmission_scan, wronskian

__version__ = "0.1.0"
