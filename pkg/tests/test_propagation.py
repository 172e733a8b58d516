import numpy as np
import pytest

from oracles import damped_rabi_amplitudes
from plasmodis.errors import IntegrityError, ParameterError
from plasmodis.molecule import franck_condon_point, vibrational_ground_state
from plasmodis.propagation import (DensityState, IntegratorConfig,
                                   dense_oracle_propagate, initial_state,
                                   propagate, pure_state_effective_propagate,
                                   rhs)
from plasmodis.system import assemble, clamped_operators
from plasmodis.units import FS_AU


def _clamped_state(which="X1"):
    psi = np.array([1.0, 0.0], complex) if which == "B0" else np.array([0.0, 1.0], complex)
    return DensityState(rho_11=np.outer(psi, psi.conj()),
                        rho_00=np.zeros((1, 1), complex),
                        dissipated=np.zeros(3))


def test_initial_state_is_pure_vertical_promotion(small_model):
    state = initial_state(small_model)
    n = small_model.grid.n_basis
    assert state.trace_total() == pytest.approx(1.0, abs=1e-12)
    assert state.purity() == pytest.approx(1.0, abs=1e-12)
    # all population on |B,0>, none on |X,1> or the ground block
    assert np.trace(state.rho_11[:n, :n]).real == pytest.approx(1.0, abs=1e-12)
    assert np.abs(state.rho_11[n:, n:]).max() == 0.0
    assert np.abs(state.rho_00).max() == 0.0
    # <R> at t=0 sits at the Franck-Condon point within the zero-point spread
    _, chi0 = vibrational_ground_state(small_model, "X")
    r_mean = float(chi0 @ (small_model.grid.nodes * chi0))
    assert r_mean == pytest.approx(franck_condon_point(small_model), abs=0.05)


def test_rhs_trace_derivative_vanishes_in_unitary_limit(small_model):
    from plasmodis.plasmon import mode_from_values
    from plasmodis.system import CAPConfig
    # kappa -> tiny (exact zero is outside the mode validation) and CAP off
    mode = mode_from_values(6.4, 1e-12, 70.0)
    ops = assemble(small_model, mode, CAPConfig(strength=0.0))
    state = initial_state(small_model)
    deriv = rhs(state, ops)
    assert abs(np.trace(deriv.rho_11) + np.trace(deriv.rho_00)
               + deriv.dissipated.sum()) < 1e-12


def test_rhs_trace_conserved_with_dissipators(small_ops, small_model):
    state = propagate(initial_state(small_model), small_ops, 5.0,
                      IntegratorConfig(method="spectral")).final_state
    deriv = rhs(state, small_ops)
    total = np.trace(deriv.rho_11).real + np.trace(deriv.rho_00).real \
        + deriv.dissipated.sum()
    assert abs(total) < 1e-12


def test_spectral_matches_rk(small_model, small_ops):
    state0 = initial_state(small_model)
    res_sp = propagate(state0, small_ops, 20.0, IntegratorConfig(method="spectral"))
    res_rk = propagate(state0, small_ops, 20.0,
                       IntegratorConfig(method="rk", rel_tol=1e-9, abs_tol=1e-11))
    np.testing.assert_allclose(res_sp.populations, res_rk.populations, atol=1e-8)
    np.testing.assert_allclose(res_sp.tallies, res_rk.tallies, atol=1e-8)


def test_block_solver_matches_dense_oracle(small_model, small_ops):
    state0 = initial_state(small_model)
    final = propagate(state0, small_ops, 25.0,
                      IntegratorConfig(method="spectral")).final_state
    oracle = dense_oracle_propagate(state0, small_ops, 25.0)
    assert np.abs(final.rho_11 - oracle.rho_11).max() < 1e-8
    assert np.abs(final.rho_00 - oracle.rho_00).max() < 1e-8
    assert np.abs(final.dissipated - oracle.dissipated).max() < 1e-10
    # oracle output stays Hermitian
    assert np.abs(oracle.rho_11 - oracle.rho_11.conj().T).max() < 1e-10


def test_dense_oracle_size_guard(small_ops, small_model):
    from plasmodis.grid import build_grid
    from plasmodis.molecule import SurrogateParams, surrogate_molecule
    from plasmodis.plasmon import mode_from_values
    from plasmodis.system import CAPConfig
    grid = build_grid(0.5, 17.0, 30, 6)   # 149 basis functions
    model = surrogate_molecule(SurrogateParams(), grid)
    ops = assemble(model, mode_from_values(6.4, 0.476, 70.0), CAPConfig())
    with pytest.raises(ParameterError):
        dense_oracle_propagate(initial_state(model), ops, 1.0)


def test_pure_state_route_reproduces_rho11(small_model, small_ops):
    state0 = initial_state(small_model)
    n = small_model.grid.n_basis
    psi0 = np.zeros(2 * n, complex)
    _, chi0 = vibrational_ground_state(small_model, "X")
    psi0[:n] = chi0
    times, psis = pure_state_effective_propagate(psi0, small_ops, 15.0,
                                                 rel_tol=1e-12, abs_tol=1e-14)
    final = propagate(state0, small_ops, 15.0,
                      IntegratorConfig(method="spectral")).final_state
    rho_from_psi = np.outer(psis[-1], psis[-1].conj())
    assert np.abs(rho_from_psi - final.rho_11).max() < 1e-10
    # norm non-increasing
    norms = np.linalg.norm(psis, axis=1)
    assert np.all(np.diff(norms) <= 1e-12)


def test_pure_state_norm_constant_without_loss(small_model):
    from plasmodis.plasmon import mode_from_values
    from plasmodis.system import CAPConfig
    mode = mode_from_values(6.4, 1e-12, 70.0)
    ops = assemble(small_model, mode, CAPConfig(strength=0.0))
    n = small_model.grid.n_basis
    psi0 = np.zeros(2 * n, complex)
    _, chi0 = vibrational_ground_state(small_model, "X")
    psi0[:n] = chi0
    _, psis = pure_state_effective_propagate(psi0, ops, 10.0,
                                             rel_tol=1e-12, abs_tol=1e-14)
    norms = np.linalg.norm(psis, axis=1)
    np.testing.assert_allclose(norms, 1.0, atol=1e-10)


def test_exponential_cavity_decay():
    kappa = 0.005
    ops = clamped_operators(omega_m=0.25, omega_p=0.25, g=0.0, kappa=kappa)
    res = propagate(_clamped_state("X1"), ops, 20.0,
                    IntegratorConfig(method="spectral"))
    expected = np.exp(-kappa * res.times * FS_AU)
    np.testing.assert_allclose(res.populations[2], expected, atol=1e-12)
    np.testing.assert_allclose(res.populations[0], 1.0 - expected, atol=1e-12)
    np.testing.assert_array_equal(res.tallies, 0.0)


def test_damped_rabi_closed_form():
    omega_m, omega_p, g, kappa = 0.26, 0.25, 0.004, 0.006
    ops = clamped_operators(omega_m=omega_m, omega_p=omega_p, g=g, kappa=kappa)
    res = propagate(_clamped_state("B0"), ops, 20.0,
                    IntegratorConfig(method="rk", rel_tol=1e-10, abs_tol=1e-12,
                                     output_stride=0.5))
    c_b, c_x1 = damped_rabi_amplitudes(res.times * FS_AU, omega_m, omega_p,
                                       g, kappa)
    np.testing.assert_allclose(res.populations[1], np.abs(c_b) ** 2, atol=1e-6)
    np.testing.assert_allclose(res.populations[2], np.abs(c_x1) ** 2, atol=1e-6)


def test_tallies_monotone_and_attributed(small_model, default_mode, small_cap):
    from plasmodis.system import CHANNELS
    state0 = initial_state(small_model)
    for k, ch in enumerate(CHANNELS):
        ops = assemble(small_model, default_mode, small_cap, cap_channels=(ch,))
        res = propagate(state0, ops, 15.0, IntegratorConfig(method="spectral"))
        assert np.all(np.diff(res.tallies, axis=1) >= -1e-14)
        others = [j for j in range(3) if j != k]
        assert res.tallies[k, -1] > 0.0
        np.testing.assert_allclose(res.tallies[others], 0.0, atol=1e-15)


def test_trace_conservation_and_positivity(small_model, small_ops):
    res = propagate(initial_state(small_model), small_ops, 40.0,
                    IntegratorConfig(method="spectral"))
    assert np.abs(res.trace_total - 1.0).max() < 1e-8
    final = res.final_state
    final.check(tol=1e-8)
    for rho in (final.rho_11, final.rho_00):
        assert np.linalg.eigvalsh(rho).min() >= -1e-9


def test_rk_positivity_at_every_sample(small_model, small_ops):
    res = propagate(initial_state(small_model), small_ops, 10.0,
                    IntegratorConfig(method="rk", rel_tol=1e-10, abs_tol=1e-12),
                    observers={
                        "min_eig": lambda s: min(
                            np.linalg.eigvalsh(s.rho_11).min(),
                            np.linalg.eigvalsh(s.rho_00).min(),
                        )
                    })
    assert res.observables["min_eig"].min() >= -1e-9


def test_t_final_zero_returns_initial_observables(small_model, small_ops):
    state0 = initial_state(small_model)
    res = propagate(state0, small_ops, 0.0, IntegratorConfig())
    assert len(res.times) == 1
    assert res.populations[1, 0] == pytest.approx(1.0, abs=1e-12)
    np.testing.assert_array_equal(res.tallies, 0.0)


def test_densities_recorded_and_normalized(small_model, small_ops):
    res = propagate(initial_state(small_model), small_ops, 5.0,
                    IntegratorConfig(method="spectral", record_densities=True))
    assert set(res.densities) == {"X0", "B0", "X1"}
    for ch, dens in res.densities.items():
        assert dens.shape == (len(res.times), small_ops.n)
    total = sum(res.densities[ch].sum(axis=1) for ch in res.densities)
    np.testing.assert_allclose(total + res.tallies.sum(axis=0), 1.0, atol=1e-8)


def test_spectral_requires_pure_block(small_model, small_ops):
    state0 = initial_state(small_model)
    n = small_model.grid.n_basis
    mixed = DensityState(
        rho_11=0.5 * state0.rho_11 + 0.5 * np.diag(np.eye(2 * n)[2 * n - 1]),
        rho_00=np.zeros((n, n), complex),
        dissipated=np.zeros(3),
    )
    with pytest.raises(ParameterError):
        propagate(mixed, small_ops, 1.0, IntegratorConfig(method="spectral"))
    # auto falls back to rk and conserves trace
    res = propagate(mixed, small_ops, 1.0, IntegratorConfig(method="auto"))
    assert np.abs(res.trace_total - 1.0).max() < 1e-8


def test_integrator_config_validation():
    with pytest.raises(ParameterError):
        IntegratorConfig(rel_tol=0.0)
    with pytest.raises(ParameterError):
        IntegratorConfig(output_stride=-1.0)
    with pytest.raises(ParameterError):
        IntegratorConfig(method="leapfrog")
