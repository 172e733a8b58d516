import numpy as np
import pytest

from plasmodis.errors import ParameterError
from plasmodis.molecule import surrogate_molecule, SurrogateParams
from plasmodis.plasmon import mode_from_values
from plasmodis.system import (CAPConfig, CHANNELS, assemble, clamped_operators,
                              induced_decay_rate, polaritonic_curves)


def test_cap_profile():
    cap = CAPConfig(strength=1e-4, r_abs=12.0)
    r = np.array([5.0, 12.0, 13.0, 14.0])
    np.testing.assert_allclose(cap.values(r), [0.0, 0.0, 1e-4, 16e-4])
    with pytest.raises(ParameterError):
        CAPConfig(strength=-1.0)


def test_hamiltonian_structure(small_ops, small_model, default_mode):
    n = small_ops.n
    h11 = small_ops.h11.toarray()
    assert np.abs(h11 - h11.T).max() == 0.0
    # photon-dressed ground curve: X1 diagonal block is h00 + omega_p
    np.testing.assert_allclose(
        h11[n:, n:], small_ops.h00.toarray() + np.eye(n) * default_mode.omega_p_au,
        atol=1e-14,
    )
    # coupling is diagonal in R and proportional to the transition dipole
    coupling_block = h11[:n, n:]
    np.testing.assert_allclose(
        np.diag(coupling_block),
        default_mode.e_1ph_au * small_model.dipole.values,
    )
    np.testing.assert_allclose(coupling_block - np.diag(np.diag(coupling_block)), 0.0)


def test_effective_hamiltonian_antihermitian_part(small_ops, default_mode):
    n = small_ops.n
    anti = (small_ops.h11_eff - small_ops.h11_eff.conj().T).toarray() / (-2j)
    # X1 channel carries kappa/2 plus the absorber; B0 only the absorber
    np.testing.assert_allclose(np.diag(anti)[:n], small_ops.v_abs, atol=1e-15)
    np.testing.assert_allclose(
        np.diag(anti)[n:], 0.5 * default_mode.kappa_au + small_ops.v_abs, atol=1e-15
    )


def test_zero_coupling_decouples(small_model, small_cap):
    mode = mode_from_values(6.4, 0.476, 0.0)
    ops = assemble(small_model, mode, small_cap)
    n = ops.n
    assert np.abs(ops.h11.toarray()[:n, n:]).max() == 0.0
    np.testing.assert_array_equal(ops.coupling, 0.0)


def test_cap_channel_mask(small_model, default_mode, small_cap):
    ops = assemble(small_model, default_mode, small_cap, cap_channels=("B0",))
    np.testing.assert_array_equal(ops.cap_mask, [0.0, 1.0, 0.0])
    assert np.all(ops.channel_rates(0) == 0.0)
    assert np.any(ops.channel_rates(1) > 0.0)
    # h00_eff Hermitian when the X0 absorber is off
    h00 = ops.h00_eff.toarray()
    assert np.abs(h00 - h00.conj().T).max() == 0.0
    with pytest.raises(ParameterError):
        assemble(small_model, default_mode, small_cap, cap_channels=("Q7",))


def test_eigenvalue_sum_rule(small_ops, default_mode):
    curves = polaritonic_curves(small_ops)
    total = -2.0 * curves.energies.imag.sum(axis=1)
    np.testing.assert_allclose(total, default_mode.kappa_au, atol=1e-12)


def test_branch_weights_sum_to_one(small_ops):
    curves = polaritonic_curves(small_ops)
    np.testing.assert_allclose(curves.weight_x1.sum(axis=1), 1.0, atol=1e-12)
    assert np.all(curves.weight_x1 >= 0.0)


def test_polaritonic_curves_continuous(small_ops):
    curves = polaritonic_curves(small_ops)
    jumps = np.abs(np.diff(curves.energies, axis=0))
    node_spacing = np.diff(curves.r).max()
    # continuity ordering keeps each branch smooth on the R grid
    assert jumps.max() < 0.6 * node_spacing * 10  # hartree-scale slope bound
    # the B-like branch starts with molecular character
    assert curves.weight_x1[0, 0] < 0.5 < curves.weight_x1[0, 1]


def test_clamped_resonant_splitting():
    g, kappa = 0.01, 0.02
    ops = clamped_operators(omega_m=0.25, omega_p=0.25, g=g, kappa=kappa)
    curves = polaritonic_curves(ops)
    split = abs(curves.energies[0, 0].real - curves.energies[0, 1].real)
    assert split == pytest.approx(2.0 * np.sqrt(g ** 2 - kappa ** 2 / 16.0),
                                  abs=1e-14)


def test_clamped_exceptional_point():
    # at g = kappa/4 the two eigenvalues coalesce
    kappa = 0.02
    ops = clamped_operators(omega_m=0.25, omega_p=0.25, g=kappa / 4.0, kappa=kappa)
    curves = polaritonic_curves(ops)
    assert abs(curves.energies[0, 0] - curves.energies[0, 1]) < 1e-14


@pytest.mark.parametrize("delta_over_kappa", [-2.0, -1.0, 0.0, 0.5, 2.0])
def test_weak_coupling_lorentzian_rate(delta_over_kappa):
    """kappa_B* approaches 4 g^2 kappa / (4 delta^2 + kappa^2) for g << kappa."""
    kappa = 0.02
    g = kappa / 40.0
    delta = delta_over_kappa * kappa
    ops = clamped_operators(omega_m=0.25 + delta, omega_p=0.25, g=g, kappa=kappa)
    rate = induced_decay_rate(ops)[0, 1]
    lorentzian = 4.0 * g ** 2 * kappa / (4.0 * delta ** 2 + kappa ** 2)
    assert rate == pytest.approx(lorentzian, rel=0.01)


def test_zero_coupling_rate_vanishes():
    ops = clamped_operators(omega_m=0.3, omega_p=0.25, g=0.0, kappa=0.02)
    assert induced_decay_rate(ops)[0, 1] == pytest.approx(0.0, abs=1e-16)


def test_induced_rate_peaks_on_resonance(small_model, small_cap):
    """The decay-rate ridge follows the resonance omega_m(R) = omega_p."""
    from plasmodis.molecule import excitation_energy
    from plasmodis.units import HARTREE_EV
    mode = mode_from_values(8.0, 0.476, 70.0)
    ops = assemble(small_model, mode, small_cap)
    rates = induced_decay_rate(ops)
    omega_m = excitation_energy(small_model) * HARTREE_EV
    r_peak = rates[np.argmax(rates[:, 1]), 0]
    # resonance locations: sign changes of omega_m(R) - omega_p
    sign_flip = np.nonzero(np.diff(np.sign(omega_m - 8.0)))[0]
    crossings = 0.5 * (rates[sign_flip, 0] + rates[sign_flip + 1, 0])
    assert len(crossings) > 0
    assert np.min(np.abs(crossings - r_peak)) < 0.5


def test_channel_order():
    assert CHANNELS == ("X0", "B0", "X1")
