import math

import numpy as np
import pytest

import squidsim as sq
from squidsim import BathParams, CODATA2018, ParameterError, StepSizeError


def random_density(dim, seed):
    rng = np.random.default_rng(seed)
    m = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = m @ m.conj().T
    return rho / np.trace(rho).real


def test_bath_occupation_limits(standard_scales):
    assert sq.bath_occupation(
        BathParams(temperature=0.0, damping=0.1).resolved(standard_scales)) == 0.0
    m = sq.bath_occupation(
        BathParams(temperature=1.0, damping=0.1).resolved(standard_scales))
    # independent hand evaluation of 1/(exp(hbar omega / kB T) - 1)
    assert m == pytest.approx(1.9603e-3, rel=1e-3)


def test_bath_occupation_ln2_point():
    omega_b = 5.0e11
    temp = CODATA2018.hbar * omega_b / (CODATA2018.boltzmann * math.log(2.0))
    m = sq.bath_occupation(BathParams(temperature=temp, damping=0.0,
                                      frequency=omega_b))
    assert m == pytest.approx(1.0, rel=1e-12)


def test_bath_validation():
    with pytest.raises(ParameterError):
        BathParams(temperature=-1.0, damping=0.1)
    with pytest.raises(ParameterError):
        BathParams(temperature=1.0, damping=-0.1)
    with pytest.raises(ParameterError):
        sq.bath_occupation(BathParams(temperature=1.0, damping=0.1))


def test_generator_vanishes_on_eigenstate_projector():
    ring = sq.standard_ring(0.3)
    scales = sq.derive_scales(ring)
    h = sq.build_fock_hamiltonian(ring, scales, 80)
    res = sq.eigensolve(h, 3)
    v = res.eigenvectors[:, 1].astype(complex)
    rho = np.outer(v, v.conj())
    bath = BathParams(temperature=1.0, damping=0.0).resolved(scales)
    out = sq.lindblad_generator(rho, h, sq.annihilation(80), bath)
    assert np.max(np.abs(out)) < 1e-10


def test_generator_trace_and_hermiticity():
    dim = 30
    rho = random_density(dim, 5)
    h = np.diag(np.arange(dim) + 0.5)
    bath = BathParams(temperature=1.0, damping=0.08, frequency=8.165e11)
    out = sq.lindblad_generator(rho, h, sq.annihilation(dim), bath)
    assert abs(np.trace(out)) < 1e-10
    assert sq.hermiticity_defect(out) < 1e-10


def test_generator_dimension_mismatch():
    bath = BathParams(temperature=1.0, damping=0.1, frequency=1e11)
    with pytest.raises(ParameterError):
        sq.lindblad_generator(np.eye(4) / 4.0, np.eye(5), sq.annihilation(5),
                              bath)


def test_amplitude_damping_rate_of_fock1():
    dim = 12
    rho = np.zeros((dim, dim), dtype=complex)
    rho[1, 1] = 1.0
    g = 0.37
    bath = BathParams(temperature=0.0, damping=g, frequency=1e11)
    out = sq.lindblad_generator(rho, np.zeros((dim, dim)),
                                sq.annihilation(dim), bath)
    n_op = sq.number_operator(dim)
    dn = np.trace(n_op @ out).real
    assert dn == pytest.approx(-g, abs=1e-12)


def test_occupation_relaxation_identity():
    # d<n>/dtau = -g (<n> - M) for any rho when H commutes with n; the
    # identity belongs to the untruncated algebra, so keep the random state
    # clear of the truncation edge
    dim, occupied = 25, 15
    rho = np.zeros((dim, dim), dtype=complex)
    rho[:occupied, :occupied] = random_density(occupied, 9)
    g = 0.12
    bath = BathParams(temperature=1.3, damping=g, frequency=7.0e11)
    m_occ = sq.bath_occupation(bath)
    out = sq.lindblad_generator(rho, np.zeros((dim, dim)),
                                sq.annihilation(dim), bath)
    n_op = sq.number_operator(dim)
    dn = np.trace(n_op @ out).real
    n_mean = np.trace(n_op @ rho).real
    assert dn == pytest.approx(-g * (n_mean - m_occ), rel=1e-10, abs=1e-12)


def test_propagator_matches_reference_generator():
    # one RK4 step of the ladder-structured fast path against the plain
    # matrix-product generator
    dim = 40
    ring = sq.standard_ring(0.25)
    scales = sq.derive_scales(ring)
    h = sq.build_fock_hamiltonian(ring, scales, dim).astype(complex)
    rho = random_density(dim, 21)
    bath = BathParams(temperature=1.0, damping=0.05).resolved(scales)
    a = sq.annihilation(dim)
    dtau = 1e-3

    def rk4_reference(r):
        k1 = sq.lindblad_generator(r, h, a, bath)
        k2 = sq.lindblad_generator(r + 0.5 * dtau * k1, h, a, bath)
        k3 = sq.lindblad_generator(r + 0.5 * dtau * k2, h, a, bath)
        k4 = sq.lindblad_generator(r + dtau * k3, h, a, bath)
        out = r + dtau / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        out = 0.5 * (out + out.conj().T)
        return out / np.trace(out).real

    expected = rk4_reference(rho.astype(complex))
    traj = sq.propagate(rho, h, bath, dtau=dtau, tau_max=dtau,
                        snapshot_stride=1)
    assert np.max(np.abs(traj.snapshots[-1] - expected)) < 1e-13


def test_thermalization_to_bath_occupation():
    ring = sq.SquidParams(5e-15, 3e-10, 0.0)
    scales = sq.derive_scales(ring)
    dim = 32
    h = sq.build_fock_hamiltonian(ring, scales, dim)
    psi = sq.coherent_state(1j, dim)
    rho0 = np.outer(psi, psi.conj())
    bath = BathParams(temperature=1.0, damping=0.05).resolved(scales)
    traj = sq.propagate(rho0, h, bath, dtau=0.005, tau_max=200.0,
                        record_stride=100)
    m_occ = sq.bath_occupation(bath)
    assert abs(traj.occupation[-1] - m_occ) < 1e-3
    assert traj.max_trace_correction < 1e-8
    assert np.all(np.diff(traj.times) > 0.0)

    # decay rate of the analytically damped oscillator
    mask = traj.times < 80.0
    slope = np.polyfit(traj.times[mask],
                       np.log(traj.occupation[mask] - m_occ + 1e-300), 1)[0]
    assert -slope == pytest.approx(0.05, rel=0.03)


def test_closed_system_purity_and_energy():
    ring = sq.standard_ring(0.5)
    scales = sq.derive_scales(ring)
    dim = 160
    h = sq.build_fock_hamiltonian(ring, scales, dim)
    res = sq.eigensolve(h, 2)
    cat = sq.phase_superposition(res.eigenvectors[:, 0],
                                 res.eigenvectors[:, 1], 0.0)
    rho0 = np.outer(cat, cat.conj())
    bath = BathParams(temperature=1.0, damping=0.0).resolved(scales)
    traj = sq.propagate(rho0, h, bath, dtau=0.005, tau_max=10.0,
                        record_stride=50, snapshot_stride=500)
    assert np.max(np.abs(traj.purity - 1.0)) < 1e-6
    energies = [np.trace(h @ r).real for r in traj.snapshots]
    assert np.max(np.abs(np.diff(energies))) < 1e-6
    defects = [sq.hermiticity_defect(r) for r in traj.snapshots]
    assert max(defects) < 1e-9


def test_decoherence_rate_ordering():
    ring = sq.standard_ring(0.5)
    scales = sq.derive_scales(ring)
    dim = 160
    h = sq.build_fock_hamiltonian(ring, scales, dim)
    res = sq.eigensolve(h, 1)
    psi = res.eigenvectors[:, 0].astype(complex)
    rho0 = np.outer(psi, psi.conj())
    x = np.linspace(-12, 12, 193)
    negativity = {}
    for g in (0.01, 0.1):
        bath = BathParams(temperature=1.0, damping=g).resolved(scales)
        traj = sq.propagate(rho0, h, bath, dtau=0.005, tau_max=4.0,
                            record_stride=200, snapshot_stride=400)
        vols = []
        for rho in traj.snapshots[1:]:
            fld = sq.wigner_function(rho, x, x)
            vols.append(sq.phase_space_diagnostics(fld).negativity_volume)
        negativity[g] = vols
    for strong, weak in zip(negativity[0.1], negativity[0.01]):
        assert strong < weak


def test_step_size_guard():
    dim = 60
    ring = sq.standard_ring(0.5)
    scales = sq.derive_scales(ring)
    h = sq.build_fock_hamiltonian(ring, scales, dim)
    rho0 = np.zeros((dim, dim), dtype=complex)
    rho0[0, 0] = 1.0
    bath = BathParams(temperature=1.0, damping=0.3).resolved(scales)
    with pytest.raises(StepSizeError):
        sq.propagate(rho0, h, bath, dtau=0.2, tau_max=3.0)


def test_pure_state_propagation_matches_density_matrix():
    ring = sq.standard_ring(0.49)
    scales = sq.derive_scales(ring)
    dim = 120
    h = sq.build_fock_hamiltonian(ring, scales, dim)
    res = sq.eigensolve(h, 2)
    psi = sq.phase_superposition(res.eigenvectors[:, 0],
                                 res.eigenvectors[:, 1], 0.4)
    bath = BathParams(temperature=1.0, damping=0.0).resolved(scales)
    rho_traj = sq.propagate(np.outer(psi, psi.conj()), h, bath,
                            dtau=0.005, tau_max=2.0, record_stride=40)
    psi_traj = sq.propagate_state(psi, h, dtau=0.005, tau_max=2.0,
                                  record_stride=40)
    # the two fixed-step integrators differ at the local-truncation level
    assert np.max(np.abs(rho_traj.mean_x - psi_traj.mean_x)) < 1e-7
    assert np.max(np.abs(rho_traj.var_x - psi_traj.var_x)) < 1e-7
    assert np.max(np.abs(psi_traj.norm - 1.0)) < 1e-8


def test_spectral_evolution_matches_rk4():
    ring = sq.standard_ring(0.49)
    scales = sq.derive_scales(ring)
    dim = 120
    h = sq.build_fock_hamiltonian(ring, scales, dim)
    res = sq.eigensolve(h)
    psi = sq.phase_superposition(res.eigenvectors[:, 0],
                                 res.eigenvectors[:, 1], 0.0)
    tau = 1.5
    exact = sq.evolve_closed_spectral(psi, res, tau)
    rk4 = sq.propagate_state(psi, h, dtau=0.001, tau_max=tau).final_state
    overlap = abs(np.vdot(exact, rk4))
    assert overlap == pytest.approx(1.0, abs=1e-8)


def test_state_observables_examples():
    dim = 16
    vac = np.zeros((dim, dim), dtype=complex)
    vac[0, 0] = 1.0
    obs = sq.state_observables(vac)
    assert obs.var_x == pytest.approx(0.5, abs=1e-12)
    assert obs.purity == pytest.approx(1.0, abs=1e-12)
    mixed = np.diag([0.5, 0.5]).astype(complex)
    assert sq.state_observables(mixed).purity == pytest.approx(0.5, abs=1e-12)


def test_trajectory_csv_columns(tmp_path):
    ring = sq.SquidParams(5e-15, 3e-10, 0.0)
    scales = sq.derive_scales(ring)
    h = sq.build_fock_hamiltonian(ring, scales, 8)
    rho0 = np.zeros((8, 8), dtype=complex)
    rho0[0, 0] = 1.0
    bath = BathParams(temperature=1.0, damping=0.1).resolved(scales)
    traj = sq.propagate(rho0, h, bath, dtau=0.01, tau_max=0.1)
    out = tmp_path / "traj.csv"
    with open(out, "w") as fh:
        traj.write_csv(fh)
    header = out.read_text().splitlines()[0]
    assert header == "tau,mean_x,mean_p,var_x,var_p,occupation,trace,purity"
