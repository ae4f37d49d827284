import numpy as np
import pytest

from qresp import qmat
from qresp import reservoir as rv


RNG = np.random.default_rng(777)


# ---------------------------------------------------------------------------
# Hamiltonian construction


def test_assemble_sk_hamiltonian_two_qubit_oracle():
    # H = J X(x)X + (f0/2) Z(x)I + (f1/2) I(x)Z, written out by hand
    j = 0.3
    f0, f1 = 0.1, -0.2
    couplings = np.zeros((2, 2))
    couplings[1, 0] = j
    h = rv.assemble_sk_hamiltonian(couplings, np.array([f0, f1]))
    expected = (
        j * np.kron(qmat.X, qmat.X)
        + 0.5 * f0 * np.kron(qmat.Z, qmat.I2)
        + 0.5 * f1 * np.kron(qmat.I2, qmat.Z)
    )
    assert np.allclose(h, expected, atol=1e-14)


def test_build_sk_hamiltonian_hermitian_and_deterministic():
    cfg = rv.SkHamiltonianConfig(seed=9)
    h1 = rv.build_sk_hamiltonian(cfg)
    h2 = rv.build_sk_hamiltonian(cfg)
    assert np.array_equal(h1, h2)
    assert np.allclose(h1, h1.conj().T)


def test_build_sk_hamiltonian_respects_bounds():
    cfg = rv.SkHamiltonianConfig(n_qubits=3, j_scale=2.0, field_width=0.5, global_field=0.0, seed=4)
    h = rv.build_sk_hamiltonian(cfg)
    # the XX couplings and Z fields are bounded, so is every matrix entry
    assert np.max(np.abs(h)) <= 3 * 1.0 + 1.5 * 0.5


def test_sk_config_validation():
    with pytest.raises(ValueError):
        rv.SkHamiltonianConfig(n_qubits=0)
    with pytest.raises(ValueError):
        rv.SkHamiltonianConfig(j_scale=-1.0)


# ---------------------------------------------------------------------------
# axis frame and input encoding


def test_axis_frame_diagonalizes_axis_operator():
    rng = np.random.default_rng(3)
    for _ in range(20):
        axis = rv.AxisConfig(azimuth=rng.uniform(0, 2 * np.pi), polar=rng.uniform(0, np.pi))
        frame = rv.axis_frame_unitary(axis)
        diag = frame @ axis.operator @ frame.conj().T
        assert np.allclose(diag, qmat.Z, atol=1e-12), axis


def test_axis_frame_identity_at_north_pole():
    for az in (0.0, 1.0, 4.5):
        frame = rv.axis_frame_unitary(rv.AxisConfig(azimuth=az, polar=0.0))
        assert np.allclose(frame, np.eye(2), atol=1e-12)


def test_axis_unit_vector():
    axis = rv.AxisConfig(azimuth=np.pi / 2, polar=np.pi / 2)
    assert np.allclose(axis.unit_vector, [0, 1, 0], atol=1e-12)


def test_input_unitary_trivial_at_u_one():
    # arccos(1) = 0: no rotation at all
    axis = rv.AxisConfig(azimuth=0.9, polar=1.3)
    u = rv.input_unitary(1.0, axis)
    assert np.allclose(u, np.eye(2), atol=1e-12)


def test_input_unitary_rejects_out_of_range():
    with pytest.raises(ValueError):
        rv.input_unitary(1.2, rv.AxisConfig())


def test_encoded_state_expectation_along_z_axis():
    # at the +Z axis the rotation is about Z and leaves |0><0| untouched
    axis = rv.AxisConfig(polar=0.0)
    for u in (-0.8, 0.0, 0.3):
        sigma = rv.encoded_state(u, axis)
        assert np.allclose(sigma, np.diag([1, 0j]), atol=1e-12)


def test_encoded_state_is_pure_and_traces_input():
    rng = np.random.default_rng(8)
    axis = rv.AxisConfig(azimuth=0.4, polar=2.0)
    for u in rng.uniform(-1, 1, 5):
        sigma = rv.encoded_state(u, axis)
        qmat.check_density_matrix(sigma)
        assert abs(np.trace(sigma @ sigma).real - 1.0) < 1e-12
        # rotation by arccos(u) about the axis tilts <n.sigma> of |0> by u... the
        # component along the rotation axis never moves:
        n_op = axis.operator
        fixed = np.trace(n_op @ rv.encoded_state(1.0, axis)).real
        assert abs(np.trace(n_op @ sigma).real - fixed) < 1e-12


def test_reset_encode_keeps_marginal_and_replaces_subsystem():
    rho = qmat.haar_random_pure_state(2, RNG)
    axis = rv.AxisConfig(azimuth=1.1, polar=0.7)
    u = 0.25
    out = rv.reset_encode(rho, u, axis, reset_subsystem=(1,))
    assert np.allclose(qmat.partial_trace(out, [1]), qmat.partial_trace(rho, [1]), atol=1e-12)
    assert np.allclose(qmat.partial_trace(out, [0]), rv.encoded_state(u, axis), atol=1e-12)


def test_reset_encode_leading_subsystem():
    rho = qmat.haar_random_pure_state(2, RNG)
    axis = rv.AxisConfig(azimuth=0.3, polar=1.9)
    out = rv.reset_encode(rho, -0.4, axis, reset_subsystem=(0,))
    assert np.allclose(qmat.partial_trace(out, [0]), qmat.partial_trace(rho, [0]), atol=1e-12)
    assert np.allclose(qmat.partial_trace(out, [1]), rv.encoded_state(-0.4, axis), atol=1e-12)


# ---------------------------------------------------------------------------
# reservoir step maps


def test_ns_reservoir_step_is_cptp_on_samples():
    model = rv.NsReservoir(rv.NsModelConfig(hamiltonian=rv.SkHamiltonianConfig(seed=2)))
    rho = qmat.haar_random_pure_state(2, RNG)
    for u in (-0.9, 0.0, 0.7):
        rho = model.step(rho, u)
        qmat.check_density_matrix(rho)


def test_ns_reservoir_unitary_matches_hamiltonian():
    cfg = rv.NsModelConfig(hamiltonian=rv.SkHamiltonianConfig(seed=2))
    model = rv.NsReservoir(cfg)
    h = rv.build_sk_hamiltonian(cfg.hamiltonian)
    assert np.allclose(model.unitary, qmat.evolution_unitary(h), atol=1e-12)


def test_damping_kraus_completeness_exact():
    for gamma in (0.0, 0.3, 1.0):
        k0, k1 = rv.damping_kraus(gamma)
        total = k0.conj().T @ k0 + k1.conj().T @ k1
        assert np.array_equal(total, np.eye(2))


def test_amplitude_damping_fixed_point():
    # gamma = 1 sends any qubit-0 marginal to |0><0|
    rho = qmat.haar_random_pure_state(2, RNG)
    out = rv.amplitude_damping_qubit0(rho, 1.0)
    assert np.allclose(qmat.partial_trace(out, [1]), np.diag([1, 0j]), atol=1e-12)


def test_amplitude_damping_identity_at_zero():
    rho = qmat.haar_random_pure_state(2, RNG)
    assert np.allclose(rv.amplitude_damping_qubit0(rho, 0.0), rho, atol=1e-14)


def test_subset_reservoir_matches_manual_composition():
    cfg = rv.SubsetModelConfig(damping_rate=0.35, cnot_exponent=0.6)
    model = rv.SubsetReservoir(cfg)
    rho = qmat.haar_random_pure_state(2, RNG)
    u = 0.1
    manual = model.local_unitary @ rho @ model.local_unitary.conj().T
    manual = rv.amplitude_damping_qubit0(manual, cfg.damping_rate)
    manual = model.entangler @ manual @ model.entangler.conj().T
    r = rv.ry(np.arccos(u))
    u_in = np.kron(r, r)
    manual = u_in @ manual @ u_in.conj().T
    assert np.allclose(model.step(rho, u), manual, atol=1e-12)


def test_subset_config_validation():
    with pytest.raises(ValueError):
        rv.SubsetModelConfig(damping_rate=1.5)


def test_depolarizing_reservoir_contracts_to_identity():
    model = rv.DepolarizingReservoir(0.25)
    rho = qmat.haar_random_pure_state(2, RNG)
    maxmix = np.eye(4) / 4
    d_prev = qmat.trace_distance(rho, maxmix)
    for _ in range(5):
        rho = model.step(rho, 0.0)
        d = qmat.trace_distance(rho, maxmix)
        assert abs(d - 0.75 * d_prev) < 1e-12
        d_prev = d


# ---------------------------------------------------------------------------
# trajectories and readout


def test_run_reservoir_shapes_and_basis():
    model = rv.NsReservoir(rv.NsModelConfig(hamiltonian=rv.SkHamiltonianConfig(seed=1)))
    inputs = RNG.uniform(-1, 1, 12)
    traj = rv.run_reservoir(model, inputs, np.eye(4, dtype=complex) / 4)
    assert traj.values.shape == (12, 16)
    assert traj.basis[0] == "II"
    assert np.allclose(traj.values[:, 0], 1.0, atol=1e-10)  # identity expectation
    assert len(traj) == 12


def test_run_reservoir_names_failing_step():
    model = rv.SubsetReservoir(rv.SubsetModelConfig())
    with pytest.raises(RuntimeError, match="time index 2"):
        rv.run_reservoir(model, [0.0, 0.5, 3.0], np.eye(4, dtype=complex) / 4)


def test_pauli_expectations_roundtrip():
    basis = qmat.all_pauli_strings(2)
    rho = qmat.haar_random_pure_state(2, RNG)
    vals = rv.pauli_expectations(rho, qmat.pauli_basis_matrices(basis))
    back = rv.state_from_expectations(basis, vals)
    assert np.allclose(back, rho, atol=1e-12)


# ---------------------------------------------------------------------------
# classical references


def test_classical_plain_converges_from_two_starts():
    cfg = rv.ClassicalRefConfig(kind="plain")
    u = RNG.uniform(-1, 1, 300)
    ya = rv.run_classical_reference(cfg, u, np.full(20, 0.4))
    yb = rv.run_classical_reference(cfg, u, -np.full(20, 0.4))
    assert np.linalg.norm(ya[-1] - yb[-1]) < 1e-8


def test_classical_scaled_identity():
    u = RNG.uniform(-1, 1, 200)
    y0 = RNG.standard_normal(20) * 0.1
    plain = rv.run_classical_reference(rv.ClassicalRefConfig(kind="plain"), u, y0)
    t = np.arange(1, 201)
    for c in (0.9, 1.1):
        scaled = rv.run_classical_reference(rv.ClassicalRefConfig(kind="scaled", rate=c), u, y0)
        assert np.max(np.abs(scaled / c ** t[:, None] - plain)) < 1e-9


def test_classical_biased_identity():
    u = RNG.uniform(-1, 1, 200)
    y0 = RNG.standard_normal(20) * 0.1
    plain = rv.run_classical_reference(rv.ClassicalRefConfig(kind="plain"), u, y0)
    t = np.arange(1, 201)
    biased = rv.run_classical_reference(rv.ClassicalRefConfig(kind="biased", rate=0.05), u, y0)
    assert np.max(np.abs(biased - 0.05 * t[:, None] - plain)) < 1e-9


def test_classical_config_validation():
    with pytest.raises(ValueError):
        rv.ClassicalRefConfig(kind="warped")
    with pytest.raises(ValueError):
        rv.ClassicalRefConfig(size=0)
