"""Reservoir models and trajectory execution.

Two quantum models are provided:

* ``NsReservoir`` -- an SK-Hamiltonian reservoir driven by reset-input
  encoding: one subsystem is replaced each step by an input-parametrized
  pure state, then the whole register evolves under exp(-iH).
* ``SubsetReservoir`` -- a two-qubit reservoir with local random
  unitaries, amplitude damping on qubit 0 and a fractional-CNOT
  entangler, driven by a product R_Y input rotation.

``ClassicalReference`` implements contracting tanh echo-state networks
with optional per-step scaling (y_t = c^t x_t) or bias (y_t = x_t + b t),
and ``DepolarizingReservoir`` is the analytically solvable toy channel
used in the property suites.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import qmat
from .qmat import I2, X, Z


# ---------------------------------------------------------------------------
# single-qubit rotations (half-angle convention)

def rz(angle: float) -> np.ndarray:
    """Rotation about Z by `angle` on the Bloch sphere."""
    return np.array([[np.exp(-0.5j * angle), 0], [0, np.exp(0.5j * angle)]])


def ry(angle: float) -> np.ndarray:
    """Rotation about Y by `angle` on the Bloch sphere."""
    c, s = np.cos(angle / 2), np.sin(angle / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


# ---------------------------------------------------------------------------
# configs

@dataclass(frozen=True)
class SkHamiltonianConfig:
    """All-to-all random XX couplings plus longitudinal fields."""

    n_qubits: int = 2
    j_scale: float = 1.0
    field_width: float = 0.312
    global_field: float = 0.013
    seed: int = 0

    def __post_init__(self):
        if self.n_qubits < 2:
            raise ValueError("n_qubits must be at least 2")
        if self.j_scale <= 0:
            raise ValueError("j_scale must be positive")
        if self.field_width < 0:
            raise ValueError("field_width must be nonnegative")


@dataclass(frozen=True)
class AxisConfig:
    """Bloch-sphere rotation axis given by azimuth in [0, 2pi) and polar in [0, pi]."""

    azimuth: float = 0.0
    polar: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.polar <= np.pi + 1e-12:
            raise ValueError(f"polar angle {self.polar} outside [0, pi]")

    @property
    def unit_vector(self) -> np.ndarray:
        return np.array(
            [
                np.sin(self.polar) * np.cos(self.azimuth),
                np.sin(self.polar) * np.sin(self.azimuth),
                np.cos(self.polar),
            ]
        )

    @property
    def operator(self) -> np.ndarray:
        """The axis observable n . (X, Y, Z)."""
        nx, ny, nz = self.unit_vector
        return nx * qmat.X + ny * qmat.Y + nz * qmat.Z


@dataclass(frozen=True)
class NsModelConfig:
    hamiltonian: SkHamiltonianConfig = field(default_factory=SkHamiltonianConfig)
    axis: AxisConfig = field(default_factory=AxisConfig)
    reset_subsystem: tuple[int, ...] = (1,)

    def __post_init__(self):
        a = tuple(sorted(set(self.reset_subsystem)))
        object.__setattr__(self, "reset_subsystem", a)
        n = self.hamiltonian.n_qubits
        if not a:
            raise ValueError("reset subsystem must be nonempty")
        if len(a) >= n or any(q < 0 or q >= n for q in a):
            raise ValueError(f"reset subsystem {a} must be a strict subset of 0..{n - 1}")


@dataclass(frozen=True)
class SubsetModelConfig:
    damping_rate: float = 0.0
    cnot_exponent: float = 0.0
    u0_seed: int = 0
    u1_seed: int = 5

    def __post_init__(self):
        if not 0.0 <= self.damping_rate <= 1.0:
            raise ValueError(f"damping_rate {self.damping_rate} outside [0, 1]")
        if not np.isfinite(self.cnot_exponent):
            raise ValueError("cnot_exponent must be finite")


# ---------------------------------------------------------------------------
# SK Hamiltonian

def assemble_sk_hamiltonian(couplings: np.ndarray, local_fields: np.ndarray) -> np.ndarray:
    """H = sum_{i>j} J_ij X_i X_j + 1/2 sum_i f_i Z_i for explicit parameter arrays.

    `couplings` is an (n, n) array read on the strict lower triangle
    (J[i, j] for i > j); `local_fields` holds h + D_i per qubit.
    """
    n = len(local_fields)
    dim = 2**n

    def embed(op: np.ndarray, qubit: int) -> np.ndarray:
        m = np.eye(1, dtype=complex)
        for q in range(n):
            m = np.kron(m, op if q == qubit else I2)
        return m

    h = np.zeros((dim, dim), dtype=complex)
    for i in range(n):
        for j in range(i):
            if couplings[i, j] != 0.0:
                h += couplings[i, j] * (embed(X, i) @ embed(X, j))
    for i in range(n):
        h += 0.5 * local_fields[i] * embed(Z, i)
    return h


def build_sk_hamiltonian(cfg: SkHamiltonianConfig) -> np.ndarray:
    """Sample couplings and fields from the config seed and assemble the Hamiltonian."""
    rng = np.random.default_rng(cfg.seed)
    n = cfg.n_qubits
    half = cfg.j_scale / 2
    couplings = np.zeros((n, n))
    for i in range(n):
        for j in range(i):
            couplings[i, j] = rng.uniform(-half, half)
    local = cfg.global_field + rng.uniform(-cfg.field_width * half, cfg.field_width * half, size=n)
    return assemble_sk_hamiltonian(couplings, local)


# ---------------------------------------------------------------------------
# reset-input encoding

def axis_to_euler(axis: AxisConfig) -> tuple[float, float, float]:
    """Angles (Theta, Phi, Lambda) such that u3(...) maps the axis operator onto Z.

    Theta is the polar angle; Lambda = pi - azimuth carries the azimuth
    (it acts innermost in the u3 factorization, so it is the angle that
    rotates the axis into the x-z plane); Phi = azimuth - pi is a gauge
    choice that makes u3 the identity at the north pole.
    """
    return axis.polar, axis.azimuth - np.pi, np.pi - axis.azimuth


def u3(theta: float, phi: float, lam: float) -> np.ndarray:
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array(
        [
            [c, -np.exp(1j * lam) * s],
            [np.exp(1j * phi) * s, np.exp(1j * (phi + lam)) * c],
        ]
    )


def axis_frame_unitary(axis: AxisConfig) -> np.ndarray:
    """u3 for the axis: satisfies U3 (n . sigma) U3^dag = Z."""
    return u3(*axis_to_euler(axis))


def input_unitary(u: float, axis: AxisConfig) -> np.ndarray:
    """Rotation by arccos(u) about the given axis: U3^dag Rz(arccos u) U3."""
    if not -1.0 <= u <= 1.0:
        raise ValueError(f"input {u} outside [-1, 1]")
    frame = axis_frame_unitary(axis)
    return frame.conj().T @ rz(np.arccos(u)) @ frame


def encoded_state(u: float, axis: AxisConfig, n_qubits: int = 1) -> np.ndarray:
    """sigma_A(u; axis) = U |0><0|^{tensor n} U^dag with the same U on each qubit."""
    enc = input_unitary(u, axis)
    single = enc @ np.diag([1.0 + 0j, 0.0]) @ enc.conj().T
    sigma = single
    for _ in range(n_qubits - 1):
        sigma = np.kron(sigma, single)
    return sigma


def reset_encode(rho: np.ndarray, u: float, axis: AxisConfig, reset_subsystem=(1,)) -> np.ndarray:
    """Replace the reset subsystem by the input-encoded pure state.

    tr_A(rho) (x) sigma_A, with tensor factors permuted back to the
    original qubit ordering.
    """
    n = qmat.n_qubits_of(rho)
    a = tuple(sorted(set(reset_subsystem)))
    rest = qmat.partial_trace(rho, a, n)
    sigma = encoded_state(u, axis, n_qubits=len(a))
    combined = np.kron(rest, sigma)
    kept = [q for q in range(n) if q not in a]
    current_order = kept + list(a)  # qubit labels of combined, left to right
    source = [current_order.index(q) for q in range(n)]
    if source == list(range(n)):
        return combined
    return qmat.permute_qubits(combined, source)


class NsReservoir:
    """SK-Hamiltonian reservoir with reset-input encoding; exp(-iH) compiled once."""

    def __init__(self, config: NsModelConfig):
        self.config = config
        self.hamiltonian = build_sk_hamiltonian(config.hamiltonian)
        self.unitary = qmat.evolution_unitary(self.hamiltonian)
        self.n_qubits = config.hamiltonian.n_qubits

    def step(self, rho: np.ndarray, u: float) -> np.ndarray:
        encoded = reset_encode(rho, u, self.config.axis, self.config.reset_subsystem)
        return self.unitary @ encoded @ self.unitary.conj().T


# ---------------------------------------------------------------------------
# amplitude damping / fractional CNOT model

def damping_kraus(gamma: float) -> tuple[np.ndarray, np.ndarray]:
    """Kraus pair of the single-qubit amplitude damping channel."""
    if not 0.0 <= gamma <= 1.0:
        raise ValueError(f"damping rate {gamma} outside [0, 1]")
    k0 = np.array([[1, 0], [0, np.sqrt(1 - gamma)]], dtype=complex)
    k1 = np.array([[0, np.sqrt(gamma)], [0, 0]], dtype=complex)
    return k0, k1


def amplitude_damping_qubit0(rho: np.ndarray, gamma: float) -> np.ndarray:
    """Apply amplitude damping to qubit 0, identity on the rest."""
    n = qmat.n_qubits_of(rho)
    k0, k1 = damping_kraus(gamma)
    rest = np.eye(2 ** (n - 1), dtype=complex)
    a0 = np.kron(k0, rest)
    a1 = np.kron(k1, rest)
    return a0 @ rho @ a0.conj().T + a1 @ rho @ a1.conj().T


class SubsetReservoir:
    """Two-qubit reservoir: local Haar unitaries, damping on qubit 0, fractional CNOT."""

    def __init__(self, config: SubsetModelConfig):
        self.config = config
        u0 = qmat.haar_random_unitary(2, np.random.default_rng(config.u0_seed))
        u1 = qmat.haar_random_unitary(2, np.random.default_rng(config.u1_seed))
        self.local_unitary = np.kron(u0, u1)
        self.entangler = qmat.cnot_power(config.cnot_exponent)
        self.n_qubits = 2

    def system_step(self, rho: np.ndarray) -> np.ndarray:
        """Non-input-driven part: local unitaries, damping, then the entangler."""
        rho = self.local_unitary @ rho @ self.local_unitary.conj().T
        rho = amplitude_damping_qubit0(rho, self.config.damping_rate)
        return self.entangler @ rho @ self.entangler.conj().T

    def step(self, rho: np.ndarray, u: float) -> np.ndarray:
        if not -1.0 <= u <= 1.0:
            raise ValueError(f"input {u} outside [-1, 1]")
        rho = self.system_step(rho)
        r = ry(np.arccos(u))
        u_in = np.kron(r, r)
        return u_in @ rho @ u_in.conj().T


class DepolarizingReservoir:
    """Toy channel rho -> (1-eps) U rho U^dag + eps I/d; trace distance to I/d decays as (1-eps)^t."""

    def __init__(self, epsilon: float, n_qubits: int = 2, seed: int = 0):
        if not 0.0 <= epsilon <= 1.0:
            raise ValueError(f"epsilon {epsilon} outside [0, 1]")
        self.epsilon = epsilon
        self.n_qubits = n_qubits
        dim = 2**n_qubits
        self.unitary = qmat.haar_random_unitary(dim, np.random.default_rng(seed))
        self.mixed = np.eye(dim, dtype=complex) / dim

    def step(self, rho: np.ndarray, u: float) -> np.ndarray:
        rotated = self.unitary @ rho @ self.unitary.conj().T
        return (1 - self.epsilon) * rotated + self.epsilon * self.mixed


# ---------------------------------------------------------------------------
# readout

@dataclass
class ReadoutTrajectory:
    """Time-major matrix of Pauli expectations: values[t, k] = tr(P_k rho_{t+1})."""

    basis: tuple[str, ...]
    values: np.ndarray

    def __len__(self) -> int:
        return self.values.shape[0]


def pauli_expectations(rho: np.ndarray, basis_matrices: np.ndarray) -> np.ndarray:
    """Real expectation values tr(P rho) for a stacked (B, d, d) operator array."""
    return np.einsum("bij,ji->b", basis_matrices, rho).real


def run_reservoir(model, inputs, rho0: np.ndarray, basis=None) -> ReadoutTrajectory:
    """Drive the model with the input sequence, recording readouts after each step."""
    if basis is None:
        basis = qmat.all_pauli_strings(model.n_qubits)
    basis = tuple(basis)
    ops = qmat.pauli_basis_matrices(basis)
    inputs = np.asarray(inputs, dtype=float)
    values = np.empty((len(inputs), len(basis)))
    rho = rho0
    for t, u in enumerate(inputs):
        try:
            rho = model.step(rho, u)
        except Exception as exc:
            raise RuntimeError(f"reservoir step failed at time index {t}: {exc}") from exc
        row = pauli_expectations(rho, ops)
        if np.max(np.abs(row)) > 1.0 + 1e-9:
            raise RuntimeError(f"readout out of range at time index {t}")
        values[t] = row
    return ReadoutTrajectory(basis=basis, values=values)


def state_from_expectations(basis, expectations) -> np.ndarray:
    """Reconstruct a 2-qubit state from the full Pauli expectation vector."""
    ops = qmat.pauli_basis_matrices(basis)
    dim = ops.shape[1]
    rho = np.zeros((dim, dim), dtype=complex)
    for val, op in zip(expectations, ops):
        rho += val * op
    return rho / dim


# ---------------------------------------------------------------------------
# classical reference systems

@dataclass(frozen=True)
class ClassicalRefConfig:
    """Contracting tanh ESN, optionally with explicit per-step scaling or bias."""

    kind: str = "plain"  # plain | scaled | biased
    rate: float = 1.0  # c for scaled, b for biased
    size: int = 20
    spectral_radius: float = 0.9
    seed: int = 0

    def __post_init__(self):
        if self.kind not in ("plain", "scaled", "biased"):
            raise ValueError(f"unknown kind {self.kind!r}")
        if self.kind == "scaled" and self.rate <= 0:
            raise ValueError("scaled system requires a positive rate")
        if self.size < 1:
            raise ValueError("reservoir size must be positive")
        if not 0.0 < self.spectral_radius < 1.0:
            raise ValueError("inner map must be contracting (spectral radius in (0, 1))")


class ClassicalReference:
    """x_{t+1} = tanh(W x_t + w_in u_t), wrapped by scaling c^t or bias b t."""

    def __init__(self, config: ClassicalRefConfig):
        self.config = config
        rng = np.random.default_rng(config.seed)
        w = rng.standard_normal((config.size, config.size))
        radius = np.max(np.abs(np.linalg.eigvals(w)))
        self.w = w * (config.spectral_radius / radius)
        self.w_in = rng.standard_normal(config.size)

    def inner(self, x: np.ndarray, u: float) -> np.ndarray:
        return np.tanh(self.w @ x + self.w_in * u)

    def run(self, inputs, y0: np.ndarray) -> np.ndarray:
        """Trajectory of y_1..y_T (time-major)."""
        cfg = self.config
        inputs = np.asarray(inputs, dtype=float)
        out = np.empty((len(inputs), cfg.size))
        y = np.asarray(y0, dtype=float)
        for t, u in enumerate(inputs):
            if cfg.kind == "scaled":
                y = cfg.rate ** (t + 1) * self.inner(y / cfg.rate**t, u)
            elif cfg.kind == "biased":
                y = self.inner(y - cfg.rate * t, u) + cfg.rate * (t + 1)
            else:
                y = self.inner(y, u)
            if not np.all(np.isfinite(y)):
                raise OverflowError(f"classical reference overflowed at step {t}")
            out[t] = y
        return out


def run_classical_reference(config: ClassicalRefConfig, inputs, y0) -> np.ndarray:
    return ClassicalReference(config).run(inputs, y0)
