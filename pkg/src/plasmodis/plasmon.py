"""Quasistatic spectral density of a dipole near a Drude metal nanosphere and
extraction of lossy pseudomode parameters (omega_p, kappa, E_1ph) from its
dominant Lorentzian peak.

The scattered Green's function is the quasistatic multipole sum; for a dipole
at distance r from the sphere center,

    n.ImG.n = c^2/(4 pi w^2 eps_h) * sum_l c_l Im(alpha_l) / r^(2l+4),
    alpha_l = a^(2l+1) l (eps - eps_h) / (l eps + (l+1) eps_h),

with c_l = (l+1)^2 for a radial dipole and l(l+1)/2 for a tangential one.
Frequencies are handled in eV, lengths in nm, and the returned spectral
density J/mu^2 is in eV/(e*bohr)^2 so that the Lorentzian area is directly
g^2 = (E_1ph * mu)^2 for mu in e*bohr.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import curve_fit

from . import units
from .errors import ConvergenceError, FitQualityError, ParameterError

__all__ = [
    "DrudeMetal",
    "SphereEmitterGeometry",
    "PlasmonMode",
    "spectral_density",
    "fit_pseudomode",
    "mode_from_values",
]

# J/mu^2 [eV/(e*bohr)^2] = _J_PREFACTOR / eps_h * S  with S = sum in 1/nm^3
_J_PREFACTOR = (
    units.EV_J * (units.BOHR_M) ** 2 / (4.0 * np.pi ** 2 * units.EPS0_SI) * 1e27
)


@dataclass(frozen=True)
class DrudeMetal:
    plasma_frequency: float   # eV
    damping_rate: float       # eV

    def __post_init__(self):
        if self.plasma_frequency <= 0 or self.damping_rate <= 0:
            raise ParameterError("Drude parameters must be positive")

    def permittivity(self, omega_ev):
        w = np.asarray(omega_ev, dtype=complex)
        return 1.0 - self.plasma_frequency ** 2 / (w * (w + 1j * self.damping_rate))


@dataclass(frozen=True)
class SphereEmitterGeometry:
    radius: float                 # nm
    background_index: float       # refractive index of host
    emitter_distance: float       # nm, surface to emitter
    dipole_orientation: str = "radial"   # or "tangential"
    multipole_cutoff: int = 2000

    def __post_init__(self):
        if self.radius <= 0 or self.emitter_distance <= 0:
            raise ParameterError("radius and emitter distance must be positive")
        if self.multipole_cutoff < 1:
            raise ParameterError("multipole cutoff must be >= 1")
        if self.dipole_orientation not in ("radial", "tangential"):
            raise ParameterError(
                f"dipole orientation must be 'radial' or 'tangential', "
                f"got {self.dipole_orientation!r}"
            )


@dataclass(frozen=True)
class PlasmonMode:
    """Quantized pseudomode triple plus derived quantities."""

    omega_p: float            # eV
    kappa: float              # eV
    e_1ph: float              # mV/bohr
    fit_residual: float | None = None

    def __post_init__(self):
        if self.omega_p <= 0 or self.kappa <= 0:
            raise ParameterError("omega_p and kappa must be positive")
        if self.e_1ph < 0:
            raise ParameterError("E_1ph must be non-negative")

    @property
    def tau_fs(self):
        """Mode lifetime hbar/kappa in fs."""
        return units.mode_lifetime_fs(self.kappa)

    @property
    def mode_volume_nm3(self):
        """Effective mode volume hbar*omega_p/(2 eps0 E_1ph^2)."""
        return units.mode_volume_nm3(self.omega_p, self.e_1ph)

    # atomic-unit accessors used during operator assembly
    @property
    def omega_p_au(self):
        return units.ev_to_au(self.omega_p)

    @property
    def kappa_au(self):
        return units.ev_to_au(self.kappa)

    @property
    def e_1ph_au(self):
        return units.mv_per_bohr_to_au(self.e_1ph)


def mode_from_values(omega_p, kappa, e_1ph):
    """PlasmonMode from directly specified parameters (eV, eV, mV/bohr)."""
    return PlasmonMode(omega_p=float(omega_p), kappa=float(kappa), e_1ph=float(e_1ph))


def multipole_term(metal, geom, omega_ev, l):
    """Contribution of multipole order l to J/mu^2 (eV/(e*bohr)^2)."""
    eps_h = geom.background_index ** 2
    eps = metal.permittivity(omega_ev)
    r = geom.radius + geom.emitter_distance
    # alpha_l / r^(2l+4) = (a/r)^(2l+4) / a^3 * [resonant factor]; the ratio
    # form avoids overflow of a^(2l+1) at high l
    geometric = (geom.radius / r) ** (2 * l + 4) / geom.radius ** 3
    resonant = l * (eps - eps_h) / (l * eps + (l + 1) * eps_h)
    if geom.dipole_orientation == "radial":
        c_l = (l + 1) ** 2
    else:
        c_l = l * (l + 1) / 2.0
    return _J_PREFACTOR / eps_h * c_l * geometric * np.imag(resonant)


def spectral_density(metal, geom, omega_range, rel_tol=1e-3):
    """Spectral density J(omega)/mu^2 over the given frequencies (eV).

    The multipole sum is truncated adaptively: terms are added until the tail
    estimate drops below rel_tol of the running sum at every frequency, or
    the cutoff ceiling is hit (ConvergenceError). Returns an (N, 2) array of
    (omega [eV], J/mu^2 [eV/(e*bohr)^2]).
    """
    omega = np.asarray(omega_range, dtype=float)
    if omega.ndim != 1 or len(omega) == 0:
        raise ParameterError("omega_range must be a non-empty 1D sequence")
    if np.any(omega <= 0) or np.any(np.diff(omega) <= 0):
        raise ParameterError("omega_range must be positive and strictly increasing")

    ratio = ((geom.radius + geom.emitter_distance) / geom.radius) ** 2  # > 1
    total = np.zeros_like(omega)
    converged = False
    for l in range(1, geom.multipole_cutoff + 1):
        term = multipole_term(metal, geom, omega, l)
        total += term
        # geometric tail bound: subsequent terms shrink at least ~1/ratio
        # once the (l+1)^2 growth is negligible against (a/r)^(2l)
        tail = np.abs(term) * (1.0 + 2.0 / l) / (ratio - 1.0)
        if l >= 2 and np.all(tail <= rel_tol * np.maximum(np.abs(total), 1e-300)):
            converged = True
            break
    if not converged:
        raise ConvergenceError(
            f"multipole sum not converged to {rel_tol:g} within "
            f"l <= {geom.multipole_cutoff}"
        )
    if np.any(total < -1e-12 * total.max()):
        raise ConvergenceError("spectral density came out negative; check parameters")
    return np.column_stack([omega, np.maximum(total, 0.0)])


def _lorentzian(omega, area, omega_p, kappa):
    return area * (kappa / (2.0 * np.pi)) / ((omega - omega_p) ** 2 + kappa ** 2 / 4.0)


def fit_pseudomode(spectrum, mu_probe=1.0, max_residual=0.05):
    """Fit a single Lorentzian to the dominant peak of a spectral density.

    `spectrum` is an (N, 2) table of (omega [eV], J [eV * (e*bohr)^-2 * mu_probe^2]);
    it is divided by mu_probe^2 before fitting, so passing the output of
    :func:`spectral_density` with mu_probe = 1 is the common case. The fit
    window is +-3 estimated linewidths around the maximum, which keeps the
    low-frequency dipole-mode shoulder out. E_1ph follows from the fitted
    area, area = (E_1ph * mu)^2 for mu = 1 e*bohr.
    """
    spectrum = np.asarray(spectrum, dtype=float)
    if spectrum.ndim != 2 or spectrum.shape[1] != 2 or spectrum.shape[0] < 5:
        raise ParameterError("spectrum must be an (N >= 5) x 2 array")
    if mu_probe <= 0:
        raise ParameterError("mu_probe must be positive")
    omega = spectrum[:, 0]
    j = spectrum[:, 1] / mu_probe ** 2

    i_peak = int(np.argmax(j))
    peak = j[i_peak]
    if peak <= 0:
        raise FitQualityError("spectrum has no positive peak")
    # FWHM estimate from half-maximum crossings around the peak
    above = j >= 0.5 * peak
    lo = i_peak
    while lo > 0 and above[lo - 1]:
        lo -= 1
    hi = i_peak
    while hi < len(j) - 1 and above[hi + 1]:
        hi += 1
    kappa0 = max(omega[hi] - omega[lo], 2.0 * np.median(np.diff(omega)))
    window = (omega >= omega[i_peak] - 3.0 * kappa0) & (omega <= omega[i_peak] + 3.0 * kappa0)
    if window.sum() < 5:
        raise FitQualityError("too few points inside the fit window")

    # fit the peak-normalized spectrum so convergence is scale invariant
    j_norm = j[window] / peak
    p0 = [np.pi * kappa0 / 2.0, omega[i_peak], kappa0]
    try:
        popt, _ = curve_fit(
            _lorentzian, omega[window], j_norm, p0=p0,
            bounds=([0.0, omega[0], 0.0], [np.inf, omega[-1], np.inf]),
            maxfev=10000,
        )
    except RuntimeError as exc:
        raise FitQualityError(f"Lorentzian fit did not converge: {exc}") from exc
    area, omega_p, kappa = popt
    area *= peak
    residual = float(np.sqrt(np.mean((j_norm - _lorentzian(omega[window], *popt)) ** 2)))
    if residual > max_residual:
        raise FitQualityError(
            f"relative fit residual {residual:.3g} exceeds {max_residual:g}; "
            "spectrum is not a single dominant Lorentzian"
        )
    e_1ph = 1e3 * np.sqrt(area)  # eV/(e*bohr) -> mV/bohr
    return PlasmonMode(
        omega_p=float(omega_p), kappa=float(kappa), e_1ph=float(e_1ph),
        fit_residual=residual,
    )
