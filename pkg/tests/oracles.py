"""Independent numerical oracles used by the test suite.

Everything here is deliberately implemented with methods different from the
package internals (finite differences instead of FEDVR, closed forms instead
of ODE integration) so agreement is meaningful.
"""

import numpy as np
from scipy.linalg import eigh


def numerov_levels(v_func, r_min, r_max, mass, n_levels, n_points=1500):
    """Bound-state energies by the matrix Numerov method on a uniform grid.

    Solves (-1/2m) psi'' + V psi = E psi with Dirichlet boundaries via the
    generalized symmetric eigenproblem (-K/2m + M V) psi = E M psi, where K is
    the three-point Laplacian and M the Numerov weighting tridiag(1,10,1)/12.
    O(h^4) accurate.
    """
    r = np.linspace(r_min, r_max, n_points + 2)[1:-1]
    h = r[1] - r[0]
    n = len(r)
    k = (np.diag(np.full(n - 1, 1.0), -1) - 2.0 * np.eye(n)
         + np.diag(np.full(n - 1, 1.0), 1)) / h ** 2
    m = (np.diag(np.full(n - 1, 1.0), -1) + 10.0 * np.eye(n)
         + np.diag(np.full(n - 1, 1.0), 1)) / 12.0
    a = -k / (2.0 * mass) + m @ np.diag(v_func(r))
    a = 0.5 * (a + a.T)
    energies = eigh(a, m, eigvals_only=True, subset_by_index=(0, n_levels - 1))
    return energies


def damped_rabi_amplitudes(t, omega_m, omega_p, g, kappa):
    """Closed-form single-excitation amplitudes (c_B, c_X1) for the clamped
    dissipative two-level problem with initial state |B,0>.

    H_eff = [[omega_m, g], [g, omega_p - i kappa/2]]; the complex Rabi
    frequency is Omega = sqrt(g^2 + Delta^2) with Delta half the complex
    detuning.
    """
    t = np.asarray(t, dtype=float)
    mu = 0.5 * (omega_m + omega_p - 0.5j * kappa)
    delta = 0.5 * (omega_m - omega_p + 0.5j * kappa)
    omega = np.sqrt(g ** 2 + delta ** 2 + 0j)
    if abs(omega) < 1e-300:
        sinc = t  # sin(Omega t)/Omega -> t
        cos = np.ones_like(t)
    else:
        sinc = np.sin(omega * t) / omega
        cos = np.cos(omega * t)
    phase = np.exp(-1j * mu * t)
    c_b = phase * (cos - 1j * delta * sinc)
    c_x1 = phase * (-1j * g * sinc)
    return c_b, c_x1


def particle_in_box_levels(length, mass, n_levels):
    n = np.arange(1, n_levels + 1)
    return (n * np.pi / length) ** 2 / (2.0 * mass)


def harmonic_levels(omega, n_levels):
    return omega * (np.arange(n_levels) + 0.5)
