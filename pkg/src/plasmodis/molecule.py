"""Two-surface molecular data on the FEDVR grid: ground (X) and excited (B)
potential curves, the X-B transition dipole, and derived quantities
(excitation energy, Franck-Condon point, vibrational eigenstates).

An analytic Morse-based surrogate molecule is provided for tests and as the
default when no tabulated curves are supplied. Its topology mirrors the
physical situation of interest: the vertical excitation energy lies below the
dissociation limit of the excited curve (photoexcitation alone cannot
dissociate), and the excitation energy V_B - V_X has an interior minimum.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.linalg import eigh
from scipy.optimize import minimize_scalar

from .errors import DataConsistencyError, ParameterError, PhysicsError
from .grid import FEDVRGrid, interpolate_table, kinetic_operator, load_curve_table, sample_on_grid

__all__ = [
    "PotentialCurve",
    "TransitionDipole",
    "MoleculeModel",
    "SurrogateParams",
    "load_molecule",
    "surrogate_molecule",
    "excitation_energy",
    "minimum_excitation_energy",
    "vibrational_levels",
    "vibrational_ground_state",
    "franck_condon_point",
]


@dataclass(frozen=True)
class PotentialCurve:
    label: str               # "X" or "B"
    values: np.ndarray       # hartree, on grid nodes
    source: str              # "tabulated" or "surrogate"


@dataclass(frozen=True)
class TransitionDipole:
    values: np.ndarray       # e*bohr, on grid nodes


@dataclass(frozen=True)
class MoleculeModel:
    grid: FEDVRGrid
    v_x: PotentialCurve
    v_b: PotentialCurve
    dipole: TransitionDipole
    reduced_mass: float      # electron masses

    def __post_init__(self):
        for curve in (self.v_x.values, self.v_b.values, self.dipole.values):
            if len(curve) != self.grid.n_basis:
                raise ParameterError("curve not sampled on the model grid")
            if not np.all(np.isfinite(curve)):
                raise DataConsistencyError("curve contains non-finite values")
        if self.reduced_mass <= 0:
            raise ParameterError(f"reduced mass must be positive, got {self.reduced_mass}")
        omega = self.v_b.values - self.v_x.values
        if np.any(omega <= 0):
            r_bad = self.grid.nodes[np.argmin(omega)]
            raise DataConsistencyError(
                f"excitation energy V_B - V_X is not positive everywhere "
                f"(min {omega.min():.3e} hartree near R = {r_bad:.2f} bohr)"
            )


def load_molecule(vx_file, vb_file, dip_file, grid, reduced_mass):
    """Build a MoleculeModel from tabulated-curve files (spline-interpolated)."""
    v_x = interpolate_table(load_curve_table(vx_file), grid)
    v_b = interpolate_table(load_curve_table(vb_file), grid)
    dip = np.abs(interpolate_table(load_curve_table(dip_file), grid))
    return MoleculeModel(
        grid=grid,
        v_x=PotentialCurve("X", v_x, "tabulated"),
        v_b=PotentialCurve("B", v_b, "tabulated"),
        dipole=TransitionDipole(dip),
        reduced_mass=float(reduced_mass),
    )


@dataclass(frozen=True)
class SurrogateParams:
    """Morse ground state plus a shifted, shallower Morse excited state.

    Defaults give an H2-like topology: X well depth 0.17 hartree at R0 = 1.4,
    vertical excitation ~11.5 eV (below the B dissociation limit ~13.1 eV),
    and min(V_B - V_X) ~ 6.5 eV near R = 3.8 bohr.
    """

    d_x: float = 0.17        # X well depth (hartree)
    a_x: float = 1.0         # X Morse range parameter (1/bohr)
    r0_x: float = 1.4        # X equilibrium distance (bohr)
    e_b: float = 0.36        # B minimum energy above the X minimum (hartree)
    d_b: float = 0.12        # B well depth (hartree)
    a_b: float = 0.45        # B Morse range parameter (1/bohr)
    r0_b: float = 2.6        # B equilibrium distance (bohr)
    mu_max: float = 1.6      # peak transition dipole (e*bohr)
    mu_peak_r: float = 3.1   # position of the dipole maximum (bohr)
    constant_dipole: bool = False  # use mu(R) = 1 e*bohr for analytic checks
    reduced_mass: float = 918.076336

    def v_x(self, r):
        return self.d_x * (1.0 - np.exp(-self.a_x * (np.asarray(r) - self.r0_x))) ** 2

    def v_b(self, r):
        return self.e_b + self.d_b * (1.0 - np.exp(-self.a_b * (np.asarray(r) - self.r0_b))) ** 2

    def mu(self, r):
        r = np.asarray(r, dtype=float)
        if self.constant_dipole:
            return np.ones_like(r)
        x = r / self.mu_peak_r
        return self.mu_max * x * np.exp(1.0 - x)

    def morse_levels_x(self, n_levels):
        """Closed-form Morse spectrum of the ground surface (above its minimum)."""
        omega0 = self.a_x * np.sqrt(2.0 * self.d_x / self.reduced_mass)
        n = np.arange(n_levels) + 0.5
        return omega0 * n - (omega0 * n) ** 2 / (4.0 * self.d_x)


def surrogate_molecule(params: SurrogateParams, grid: FEDVRGrid) -> MoleculeModel:
    """Analytic surrogate molecule evaluated at the grid nodes."""
    return MoleculeModel(
        grid=grid,
        v_x=PotentialCurve("X", sample_on_grid(grid, params.v_x), "surrogate"),
        v_b=PotentialCurve("B", sample_on_grid(grid, params.v_b), "surrogate"),
        dipole=TransitionDipole(np.abs(sample_on_grid(grid, params.mu))),
        reduced_mass=params.reduced_mass,
    )


def excitation_energy(model):
    """omega_m(R) = V_B(R) - V_X(R) at the grid nodes (hartree)."""
    return model.v_b.values - model.v_x.values


def minimum_excitation_energy(model):
    """(min omega_m, location) refined with a spline between nodes."""
    omega = excitation_energy(model)
    spline = CubicSpline(model.grid.nodes, omega)
    i = int(np.argmin(omega))
    lo = model.grid.nodes[max(i - 1, 0)]
    hi = model.grid.nodes[min(i + 1, len(omega) - 1)]
    if lo == hi:
        return float(omega[i]), float(model.grid.nodes[i])
    res = minimize_scalar(spline, bounds=(lo, hi), method="bounded")
    return float(res.fun), float(res.x)


def _surface_values(model, surface):
    if surface == "X":
        return model.v_x.values
    if surface == "B":
        return model.v_b.values
    raise ParameterError(f"surface must be 'X' or 'B', got {surface!r}")


def vibrational_levels(model, surface, n_levels):
    """Lowest vibrational eigenpairs of T + V_surface.

    Returns (energies, wavefunctions) with wavefunctions as columns,
    normalized basis-coefficient vectors.
    """
    v = _surface_values(model, surface)
    t = kinetic_operator(model.grid, model.reduced_mass).toarray()
    h = t + np.diag(v)
    energies, vectors = eigh(h, subset_by_index=(0, n_levels - 1))
    return energies, vectors


def vibrational_ground_state(model, surface="X"):
    """Lowest eigenpair of T + V_surface; raises if the state is unbound.

    The wavefunction is normalized to 1 and sign-fixed positive at its
    largest-amplitude node.
    """
    energies, vectors = vibrational_levels(model, surface, 1)
    e0 = float(energies[0])
    chi = vectors[:, 0]
    asymptote = float(_surface_values(model, surface)[-1])
    if e0 >= asymptote:
        raise PhysicsError(
            f"surface {surface} has no bound state on the grid "
            f"(E0 = {e0:.6f} >= asymptote {asymptote:.6f} hartree)"
        )
    peak = np.argmax(np.abs(chi))
    if chi[peak] < 0:
        chi = -chi
    chi = chi / np.linalg.norm(chi)
    return e0, chi


def franck_condon_point(model):
    """Position of the (spline-refined) interior minimum of V_X."""
    nodes = model.grid.nodes
    v = model.v_x.values
    i = int(np.argmin(v))
    if i == 0 or i == len(v) - 1:
        raise PhysicsError("V_X minimum lies at the domain edge")
    spline = CubicSpline(nodes, v)
    res = minimize_scalar(spline, bounds=(nodes[i - 1], nodes[i + 1]), method="bounded")
    return float(res.x)
