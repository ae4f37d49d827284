"""ESP diagnostics: windowed statistics, ESP / non-stationary ESP indicators,
and their subset variants, with ensemble averaging over input sequences and
Haar-random initial-state pairs.

Time indices are 0-based row indices into a readout trajectory; a window of
size w is available from index w-1 onward, and the reference window for the
non-stationary indicator is the earliest valid one (index w-1).
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from . import qmat
from .reservoir import ReadoutTrajectory, run_reservoir

VARIANCE_UNDERFLOW = 1e-30


def _values(traj) -> np.ndarray:
    if isinstance(traj, ReadoutTrajectory):
        return traj.values
    return np.asarray(traj, dtype=float)


@dataclass(frozen=True)
class WindowStats:
    window: int
    mean: np.ndarray
    variance: np.ndarray


def windowed_stats(series, t: int, w: int) -> WindowStats:
    """Per-component mean and population variance of the w rows ending at index t."""
    values = _values(series)
    if w < 1:
        raise ValueError("window must be positive")
    if t < w - 1 or t >= len(values):
        raise ValueError(f"index {t} lacks a full window of {w} in history of {len(values)}")
    block = values[t - w + 1 : t + 1]
    mean = block.mean(axis=0)
    variance = np.mean((block - mean) ** 2, axis=0)
    return WindowStats(window=w, mean=mean, variance=variance)


def variance_norm(series, t: int, w: int, columns=None) -> float:
    """Euclidean norm of the windowed variance vector, optionally on selected columns."""
    values = _values(series)
    if columns is not None:
        values = values[:, columns]
    return float(np.linalg.norm(windowed_stats(values, t, w).variance))


def esp_indicator(traj_a, traj_b, s0_dist: float, t: int, columns=None) -> float:
    """Readout distance at time t, normalized by the initial-state distance."""
    if s0_dist <= 0.0:
        raise ValueError("initial states must differ (s0_dist > 0)")
    a, b = _values(traj_a), _values(traj_b)
    if columns is not None:
        a, b = a[:, columns], b[:, columns]
    return float(np.linalg.norm(a[t] - b[t])) / s0_dist


def ns_esp_indicator(traj_a, traj_b, s0_dist: float, w: int, t: int, columns=None) -> float:
    """ESP indicator rescaled by the ratio of reference to current windowed variance.

    The variance entering numerator and denominator is the smaller of the
    two trajectories' windowed-variance norms; the reference time is the
    earliest index with a full window.  A denominator below the underflow
    threshold yields +inf, the documented sentinel for variance collapse.
    """
    ref_t = w - 1
    if t < ref_t:
        raise ValueError(f"time {t} precedes the earliest full window {ref_t}")
    var_ref = min(variance_norm(traj_a, ref_t, w, columns), variance_norm(traj_b, ref_t, w, columns))
    var_now = min(variance_norm(traj_a, t, w, columns), variance_norm(traj_b, t, w, columns))
    base = esp_indicator(traj_a, traj_b, s0_dist, t, columns)
    if var_now < VARIANCE_UNDERFLOW:
        return np.inf
    return base * np.sqrt(var_ref) / np.sqrt(var_now)


@dataclass
class IndicatorTrace:
    """Indicator traces averaged over an ensemble; ns values start at index w-1."""

    times: np.ndarray
    esp_values: np.ndarray
    ns_values: np.ndarray
    window: int

    @property
    def final_esp(self) -> float:
        return float(self.esp_values[-1])

    @property
    def final_ns(self) -> float:
        return float(self.ns_values[-1])


def _pair_traces(traj_a, traj_b, s0_dist, w, columns):
    a, b = _values(traj_a), _values(traj_b)
    if columns is not None:
        a, b = a[:, columns], b[:, columns]
    dist = np.linalg.norm(a - b, axis=1)
    esp = dist / s0_dist

    def var_norms(v):
        # two-pass sliding variance per column, windows ending at w-1..T-1
        blocks = np.lib.stride_tricks.sliding_window_view(v, w, axis=0)
        mean = blocks.mean(axis=-1, keepdims=True)
        var = np.mean((blocks - mean) ** 2, axis=-1)
        return np.linalg.norm(var, axis=1)

    vmin = np.minimum(var_norms(a), var_norms(b))
    ref = vmin[0]
    ns = np.where(
        vmin < VARIANCE_UNDERFLOW,
        np.inf,
        esp[w - 1 :] * np.sqrt(ref / np.maximum(vmin, VARIANCE_UNDERFLOW)),
    )
    return esp, ns


def indicator_ensemble(
    model,
    n_inputs: int,
    n_states: int,
    seq_len: int,
    w: int,
    rng: np.random.Generator,
    basis=None,
    columns=None,
) -> IndicatorTrace:
    """Average indicators over input sequences x unordered initial-state pairs.

    Inputs are Uniform[-1, 1]; initial states are Haar-random pure states.
    The initial-state distance is the Hilbert-Schmidt distance between the
    density matrices.  With the paper defaults (4 sequences, 3 states) this
    averages 12 indicator traces.
    """
    if n_states < 2:
        raise ValueError("need at least two initial states")
    input_sets = rng.uniform(-1.0, 1.0, size=(n_inputs, seq_len))
    states = [qmat.haar_random_pure_state(model.n_qubits, rng) for _ in range(n_states)]

    esp_sum = np.zeros(seq_len)
    ns_sum = np.zeros(seq_len - w + 1)
    count = 0
    for inputs in input_sets:
        trajectories = [run_reservoir(model, inputs, rho, basis) for rho in states]
        for i, j in combinations(range(n_states), 2):
            s0_dist = qmat.hilbert_schmidt_distance(states[i], states[j])
            esp, ns = _pair_traces(trajectories[i], trajectories[j], s0_dist, w, columns)
            esp_sum += esp
            ns_sum += ns
            count += 1
    return IndicatorTrace(
        times=np.arange(seq_len),
        esp_values=esp_sum / count,
        ns_values=ns_sum / count,
        window=w,
    )


def subset_indicator_ensemble(model, selection, *args, **kwargs) -> IndicatorTrace:
    """indicator_ensemble restricted to selected readout columns.

    `selection` is a nonempty sequence of column indices into the readout
    basis (or None for all columns, in which case this reduces to
    indicator_ensemble exactly).
    """
    if selection is not None and len(selection) == 0:
        raise ValueError("subset selection must be nonempty")
    return indicator_ensemble(model, *args, columns=selection, **kwargs)


# ---------------------------------------------------------------------------
# standard subset selections over a Pauli-string basis

def subsystem_selection(basis, kept_qubits) -> list[int]:
    """Columns whose Pauli string is identity outside the kept qubits."""
    kept = set(kept_qubits)
    return [
        i
        for i, s in enumerate(basis)
        if all(c == "I" for q, c in enumerate(s) if q not in kept)
    ]


def damping_subsystem_selection(basis) -> list[int]:
    """Strings acting as identity on qubit 1 (read out qubit 0 only)."""
    return subsystem_selection(basis, {0})


def non_damping_subsystem_selection(basis) -> list[int]:
    """Strings acting as identity on qubit 0 (read out qubit 1 only)."""
    return subsystem_selection(basis, {1})


def entangling_selection(basis) -> list[int]:
    """Strings non-identity on every qubit."""
    return [i for i, s in enumerate(basis) if "I" not in s]
