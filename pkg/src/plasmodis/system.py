"""Coupled light-matter operators on the electronic-photonic x nuclear space.

Channel convention (fixed everywhere): index 0 = |X,0> (ground, no photon,
zero excitations), 1 = |B,0> (molecule excited), 2 = |X,1> (plasmon excited).
The one-excitation sector stacks [B0; X1], each of length n_basis, in that
order. The rotating-wave Hamiltonian conserves the excitation number, so the
two sectors only communicate through the cavity jump |X,0><X,1| (rate kappa)
and the absorber dissipators feeding the per-channel dissociation tallies.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse import bmat, csr_matrix, diags

from .errors import ParameterError
from .grid import FEDVRGrid, kinetic_operator
from .molecule import MoleculeModel, excitation_energy
from .plasmon import PlasmonMode

__all__ = [
    "CHANNELS",
    "CAPConfig",
    "StateSpace",
    "SystemOperators",
    "assemble",
    "clamped_operators",
    "polaritonic_curves",
    "induced_decay_rate",
]

CHANNELS = ("X0", "B0", "X1")


@dataclass(frozen=True)
class CAPConfig:
    """Quartic complex absorbing potential V_abs(R) = C (R - r_abs)^4 for R > r_abs."""

    strength: float = 1e-4   # hartree / bohr^4
    r_abs: float = 12.0      # bohr

    def __post_init__(self):
        if self.strength < 0:
            raise ParameterError("CAP strength must be non-negative")

    def values(self, r):
        r = np.asarray(r, dtype=float)
        return self.strength * np.clip(r - self.r_abs, 0.0, None) ** 4


@dataclass(frozen=True)
class StateSpace:
    grid: FEDVRGrid
    channels: tuple = CHANNELS

    @property
    def n_basis(self):
        return self.grid.n_basis

    @property
    def n_total(self):
        return 3 * self.grid.n_basis


@dataclass(frozen=True)
class SystemOperators:
    """Assembled Hamiltonian blocks, effective Hamiltonians, and dissipators.

    h11/h11_eff act on the stacked [B0; X1] one-excitation vector, h00/h00_eff
    on the X0 block. cap_rates (2 V_abs(R_i)) feed the per-channel dissipated
    tallies; the cavity jump maps X1 -> X0 node by node with rate kappa.
    """

    space: StateSpace
    kappa: float                  # hartree
    omega_p: float                # hartree
    coupling: np.ndarray          # g(R) = E_1ph * mu(R), hartree
    v_abs: np.ndarray             # CAP values at nodes, hartree
    cap_mask: np.ndarray          # (3,) 0/1 per channel, CHANNELS order
    h00: csr_matrix               # Hermitian, T + V_X
    h11: csr_matrix               # Hermitian one-excitation block
    h00_eff: csr_matrix           # h00 - i V_abs
    h11_eff: csr_matrix           # h11 - (i/2) kappa P_X1 - i V_abs
    v_x: np.ndarray
    v_b: np.ndarray

    @property
    def n(self):
        return self.space.n_basis

    @property
    def cap_rates(self):
        """Per-node dissipator rates 2 V_abs(R_i) (before the channel mask)."""
        return 2.0 * self.v_abs

    def channel_rates(self, channel_index):
        """Per-node dissipator rates for one channel (CHANNELS order)."""
        return self.cap_mask[channel_index] * self.cap_rates


def assemble(model: MoleculeModel, mode: PlasmonMode, cap: CAPConfig,
             cap_channels=CHANNELS) -> SystemOperators:
    """Build the full and effective Hamiltonians on the model grid.

    Diagonal channel potentials are V_X, V_B and V_X + omega_p; the only
    off-diagonal coupling is g(R) = E_1ph * mu_XB(R) between |B,0> and |X,1>.
    The absorber can be restricted to a subset of channels (cap_channels),
    which is mainly useful for attribution tests.
    """
    grid = model.grid
    t = kinetic_operator(grid, model.reduced_mass)
    v_x = model.v_x.values
    v_b = model.v_b.values
    omega_p = mode.omega_p_au
    kappa = mode.kappa_au
    g = mode.e_1ph_au * model.dipole.values
    v_abs = cap.values(grid.nodes)
    for ch in cap_channels:
        if ch not in CHANNELS:
            raise ParameterError(f"unknown channel {ch!r} in cap_channels")
    cap_mask = np.array([1.0 if ch in cap_channels else 0.0 for ch in CHANNELS])

    h_b0 = t + diags(v_b)
    h_x1 = t + diags(v_x + omega_p)
    g_diag = diags(g)
    h11 = bmat([[h_b0, g_diag], [g_diag, h_x1]], format="csr")
    h00 = (t + diags(v_x)).tocsr()

    n = grid.n_basis
    cap_diag = diags(np.concatenate([cap_mask[1] * v_abs, cap_mask[2] * v_abs]))
    proj_x1 = diags(np.concatenate([np.zeros(n), np.ones(n)]))
    h11_eff = (h11.astype(complex) - 0.5j * kappa * proj_x1 - 1j * cap_diag).tocsr()
    h00_eff = (h00.astype(complex) - 1j * diags(cap_mask[0] * v_abs)).tocsr()

    return SystemOperators(
        space=StateSpace(grid=grid),
        kappa=kappa,
        omega_p=omega_p,
        coupling=g,
        v_abs=v_abs,
        cap_mask=cap_mask,
        h00=h00,
        h11=h11.tocsr(),
        h00_eff=h00_eff,
        h11_eff=h11_eff,
        v_x=v_x,
        v_b=v_b,
    )


def clamped_operators(omega_m, omega_p, g, kappa, v_x=0.0):
    """Single-node (clamped-nuclei) operators for the dissipative two-level
    problem: no kinetic energy, no absorber. All arguments in hartree.

    Useful for comparing against the closed-form damped-Rabi solution.
    """
    grid = FEDVRGrid(
        r_min=0.0, r_max=1.0, n_elements=1, order=3,
        nodes=np.array([0.5]), weights=np.array([1.0]),
        element_boundaries=np.array([0.0, 1.0]), n_basis=1,
        elem_points=np.array([[0.0, 0.5, 1.0]]),
        elem_weights=np.array([[1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0]]),
    )
    v_x_arr = np.array([float(v_x)])
    v_b_arr = v_x_arr + omega_m
    h00 = csr_matrix(np.array([[v_x]], dtype=float))
    h11 = csr_matrix(np.array([[v_b_arr[0], g], [g, v_x + omega_p]], dtype=float))
    h11_eff = csr_matrix(h11.toarray().astype(complex) - 0.5j * kappa * np.diag([0.0, 1.0]))
    return SystemOperators(
        space=StateSpace(grid=grid),
        kappa=float(kappa),
        omega_p=float(omega_p),
        coupling=np.array([float(g)]),
        v_abs=np.zeros(1),
        cap_mask=np.ones(3),
        h00=h00,
        h11=h11,
        h00_eff=h00.astype(complex),
        h11_eff=h11_eff,
        v_x=v_x_arr,
        v_b=v_b_arr,
    )


@dataclass(frozen=True)
class PolaritonicCurves:
    """R-resolved complex eigenvalues of the one-excitation 2x2 potential
    block of h_eff (kinetic energy excluded), ordered by eigenvector
    continuity along R. weight_x1 is the plasmonic hybridization weight
    |<X,1|v>|^2 of each branch."""

    r: np.ndarray
    energies: np.ndarray      # (n_nodes, 2), complex
    weight_x1: np.ndarray     # (n_nodes, 2), in [0, 1]


def _two_level_eigen(a, b, g):
    """Eigenvalues and X1-weights of [[a, g], [g, b]] (a, b complex, g real)."""
    mean = 0.5 * (a + b)
    root = np.sqrt((0.5 * (a - b)) ** 2 + g ** 2 + 0j)
    lam = np.array([mean + root, mean - root])
    weights = np.empty(2)
    for k in (0, 1):
        if g == 0.0:
            weights[k] = 0.0 if abs(lam[k] - a) <= abs(lam[k] - b) else 1.0
        else:
            d = lam[k] - a
            weights[k] = abs(d) ** 2 / (g ** 2 + abs(d) ** 2)
    return lam, weights


def polaritonic_curves(ops: SystemOperators) -> PolaritonicCurves:
    r = ops.space.grid.nodes
    n = len(r)
    energies = np.empty((n, 2), dtype=complex)
    weight_x1 = np.empty((n, 2))
    prev_vec = None
    for i in range(n):
        a = ops.v_b[i]
        b = ops.v_x[i] + ops.omega_p - 0.5j * ops.kappa
        g = ops.coupling[i]
        lam, w = _two_level_eigen(a, b, g)
        vecs = []
        for k in (0, 1):
            if g == 0.0:
                v = np.array([1.0, 0.0]) if w[k] < 0.5 else np.array([0.0, 1.0])
            else:
                v = np.array([g, lam[k] - a], dtype=complex)
                v = v / np.linalg.norm(v)
            vecs.append(v)
        if prev_vec is None:
            # start on the molecular branch: B-like (low X1 weight) first
            order = np.argsort(w)
        else:
            overlap = np.abs([vecs[k] @ prev_vec[0].conj() for k in (0, 1)])
            order = (np.argmax(overlap), 1 - np.argmax(overlap))
        energies[i] = lam[list(order)]
        weight_x1[i] = w[list(order)]
        prev_vec = [vecs[order[0]], vecs[order[1]]]
    return PolaritonicCurves(r=r, energies=energies, weight_x1=weight_x1)


def induced_decay_rate(ops: SystemOperators):
    """kappa_B*(R) = -2 Im of the B-like polaritonic eigenvalue (hartree).

    The B-like branch is selected per node as the one with the larger
    molecular (|B,0>) character. Returns an (n_nodes, 2) array of (R, rate).
    """
    curves = polaritonic_curves(ops)
    b_like = np.argmin(curves.weight_x1, axis=1)
    rates = -2.0 * np.imag(curves.energies[np.arange(len(curves.r)), b_like])
    return np.column_stack([curves.r, rates])
