"""Unit conversions. Everything internal is in Hartree atomic units
(hbar = e = m_e = 1, 4*pi*eps0 = 1); these constants convert at the
boundaries (file input, config, CSV output).
"""

# CODATA 2018
HARTREE_EV = 27.211386245988          # 1 hartree in eV
BOHR_M = 0.529177210903e-10           # 1 bohr in m
BOHR_NM = BOHR_M * 1e9
AU_TIME_S = 2.4188843265857e-17       # atomic unit of time in s
FS_AU = 1e-15 / AU_TIME_S             # 1 fs in atomic time units  (~41.341)
PROTON_MASS = 1836.15267343           # proton mass in electron masses
H2_REDUCED_MASS = PROTON_MASS / 2.0   # H2 nuclear reduced mass, m_p/2

EV_J = 1.602176634e-19
HBAR_SI = 1.054571817e-34             # J s
HBAR_EVS = 6.582119569e-16            # eV s
EPS0_SI = 8.8541878128e-12            # F/m


def ev_to_au(e):
    return e / HARTREE_EV


def au_to_ev(e):
    return e * HARTREE_EV


def fs_to_au(t):
    return t * FS_AU


def au_to_fs(t):
    return t / FS_AU


def mv_per_bohr_to_au(field):
    """Field in mV/bohr to atomic units.

    1 mV/bohr = 1e-3 V / bohr; in a.u. the field unit is hartree/(e*bohr),
    so 1 mV/bohr = 1e-3 eV/(e*bohr) = 1e-3/HARTREE_EV a.u.
    """
    return field * 1e-3 / HARTREE_EV


def au_to_mv_per_bohr(field):
    return field * 1e3 * HARTREE_EV


def mv_per_bohr_to_v_per_m(field):
    """mV/bohr to V/m (1 mV/bohr is approx 18.9 MV/m)."""
    return field * 1e-3 / BOHR_M


def mode_lifetime_fs(kappa_ev):
    """tau = hbar/kappa in fs for kappa in eV."""
    return HBAR_EVS / kappa_ev * 1e15


def mode_volume_nm3(omega_p_ev, e_1ph_mv_per_bohr):
    """Effective mode volume hbar*omega_p / (2 eps0 E_1ph^2) in nm^3."""
    e_si = e_1ph_mv_per_bohr * 1e-3 / BOHR_M   # V/m
    v_m3 = omega_p_ev * EV_J / (2.0 * EPS0_SI * e_si ** 2)
    return v_m3 * 1e27
