"""Parameter-field sweeps and the command-line entry point.

Two grid experiments are provided:

* ``ns_esp_axis_grid`` -- sweep the Bloch-sphere input-rotation axis of the
  SK-Hamiltonian reset-encoding reservoir on an azimuth x polar grid.
* ``subset_gamma_p_grid`` -- sweep the (damping rate, CNOT exponent) plane
  of the two-qubit damping/entangling reservoir.

Each grid point is evaluated independently with a seed derived from
(master seed, point index), so results are deterministic for a given config
regardless of worker count, and adding points never reshuffles existing
ones.  Completed points are appended to a JSONL checkpoint next to the
output file; re-running a config resumes from it.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from . import benchmarks, espmetrics, qmat
from .reservoir import (
    AxisConfig,
    NsModelConfig,
    NsReservoir,
    SkHamiltonianConfig,
    SubsetModelConfig,
    SubsetReservoir,
    run_reservoir,
)

EXPERIMENTS = ("ns_esp_axis_grid", "subset_gamma_p_grid", "classical_reference")

METRICS = (
    "esp",
    "ns_esp",
    "narma2",
    "narma10",
    "mc",
    "ipc",
    "rank",
    "ns_esp_damping",
    "ns_esp_nondamping",
)

HAMILTONIAN_PRESETS = {
    "H1": {"j_scale": 1.0, "field_width": 0.312, "global_field": 0.013},
    "H2": {"j_scale": 1.0, "field_width": 1.05, "global_field": 0.013},
    "H3": {"j_scale": 1.0, "field_width": 24.8, "global_field": 0.377},
    "H4": {"j_scale": 1.0, "field_width": 47.5, "global_field": 57.2},
    "H5": {"j_scale": 1.0, "field_width": 0.0305, "global_field": 48.3},
}

EXIT_OK = 0
EXIT_CONFIG_ERROR = 1
EXIT_PARTIAL_FAILURE = 2


@dataclass(frozen=True)
class SweepConfig:
    experiment: str = "ns_esp_axis_grid"
    metrics: tuple[str, ...] = ("esp", "ns_esp")
    preset: str = "H1"
    azimuth_count: int = 60
    polar_count: int = 30
    gamma_count: int = 21
    p_count: int = 21
    seed: int = 0
    workers: int = 1
    out_path: str = "field.csv"
    # desk-scale sequence lengths
    indicator_len: int = 200
    indicator_window: int = 10
    indicator_inputs: int = 4
    indicator_states: int = 3
    narma_len: int = 20_000
    narma_sequences: int = 5
    mc_len: int = 100_000
    mc_washout: int = 30_000
    mc_max_delay: int = 50
    rank_len: int = 10_000
    rank_washout: int = 3_000
    rank_threshold: float = 1e-6
    ipc_budget: tuple[tuple[int, int], ...] = ((1, 50), (2, 20), (3, 10))
    ipc_surrogates: int = 20

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ValueError(f"unknown experiment {self.experiment!r}")
        if not self.metrics:
            raise ValueError("metric set must be nonempty")
        unknown = [m for m in self.metrics if m not in METRICS]
        if unknown:
            raise ValueError(f"unknown metrics {unknown}")
        if self.preset not in HAMILTONIAN_PRESETS:
            raise ValueError(f"unknown preset {self.preset!r}")
        if min(self.azimuth_count, self.polar_count, self.gamma_count, self.p_count) < 2:
            raise ValueError("grid resolutions must be at least 2")
        if self.workers < 1:
            raise ValueError("workers must be at least 1")


@dataclass
class FieldResult:
    coord_names: tuple[str, str]
    coords: list  # (u, v) per point, grid order
    metrics: tuple[str, ...]
    values: list  # dict per point
    errors: list  # error string or None per point
    config: dict


def flatten_sphere(azimuth_count: int, polar_count: int) -> list[tuple[float, float]]:
    """Row-major (azimuth, polar) grid: polar 0 (north) to pi (south) inclusive,
    azimuth 0 to 2pi exclusive."""
    if azimuth_count < 2 or polar_count < 2:
        raise ValueError("grid resolutions must be at least 2")
    polars = np.linspace(0.0, np.pi, polar_count)
    azimuths = np.linspace(0.0, 2 * np.pi, azimuth_count, endpoint=False)
    return [(float(u), float(v)) for v in polars for u in azimuths]


def gamma_p_grid(gamma_count: int, p_count: int) -> list[tuple[float, float]]:
    """Row-major (p, gamma) grid over [0, 1]^2, gamma varying across rows."""
    if gamma_count < 2 or p_count < 2:
        raise ValueError("grid resolutions must be at least 2")
    gammas = np.linspace(0.0, 1.0, gamma_count)
    ps = np.linspace(0.0, 1.0, p_count)
    return [(float(p), float(g)) for g in gammas for p in ps]


def grid_coordinates(cfg: SweepConfig) -> list[tuple[float, float]]:
    if cfg.experiment == "subset_gamma_p_grid":
        return gamma_p_grid(cfg.gamma_count, cfg.p_count)
    return flatten_sphere(cfg.azimuth_count, cfg.polar_count)


def point_seed_sequence(master_seed: int, index: int) -> np.random.SeedSequence:
    """Stable per-point randomness root; independent of grid resolution changes."""
    return np.random.SeedSequence(entropy=(master_seed, index))


def _build_model(cfg: SweepConfig, coord: tuple[float, float]):
    if cfg.experiment == "subset_gamma_p_grid":
        p, gamma = coord
        return SubsetReservoir(
            SubsetModelConfig(
                damping_rate=gamma,
                cnot_exponent=p,
                u0_seed=cfg.seed * 2 + 1,
                u1_seed=cfg.seed * 2 + 2,
            )
        )
    azimuth, polar = coord
    ham = SkHamiltonianConfig(seed=cfg.seed, **HAMILTONIAN_PRESETS[cfg.preset])
    return NsReservoir(NsModelConfig(hamiltonian=ham, axis=AxisConfig(azimuth=azimuth, polar=polar)))


def _narma_rnmse(model, cfg: SweepConfig, order: int, rng: np.random.Generator) -> float:
    """RNMSE averaged over several NARMA target sequences."""
    basis = qmat.all_pauli_strings(model.n_qubits)
    split = benchmarks.SplitSpec()
    scores = []
    for _ in range(cfg.narma_sequences):
        u = rng.uniform(0.0, 0.5, size=cfg.narma_len)
        target = benchmarks.narma_generate(u, order)
        rho0 = qmat.haar_random_pure_state(model.n_qubits, rng)
        traj = run_reservoir(model, u, rho0, basis)
        fit = benchmarks.train_linear_readout(traj, target, split)
        scores.append(benchmarks.rnmse(fit.test_target, fit.predictions))
    return float(np.mean(scores))


def evaluate_point(cfg: SweepConfig, index: int, coord: tuple[float, float]) -> dict:
    """Compute every requested metric at one grid point."""
    root = point_seed_sequence(cfg.seed, index)
    streams = {name: np.random.default_rng(child) for name, child in
               zip(METRICS, root.spawn(len(METRICS)))}
    model = _build_model(cfg, coord)
    basis = qmat.all_pauli_strings(model.n_qubits)
    values: dict[str, float] = {}

    indicator_metrics = {"esp", "ns_esp"} & set(cfg.metrics)
    if indicator_metrics:
        trace = espmetrics.indicator_ensemble(
            model,
            cfg.indicator_inputs,
            cfg.indicator_states,
            cfg.indicator_len,
            cfg.indicator_window,
            streams["esp"],
            basis,
        )
        if "esp" in cfg.metrics:
            values["esp"] = trace.final_esp
        if "ns_esp" in cfg.metrics:
            values["ns_esp"] = trace.final_ns
    for name, selector in (
        ("ns_esp_damping", espmetrics.damping_subsystem_selection),
        ("ns_esp_nondamping", espmetrics.non_damping_subsystem_selection),
    ):
        if name in cfg.metrics:
            trace = espmetrics.subset_indicator_ensemble(
                model,
                selector(basis),
                cfg.indicator_inputs,
                cfg.indicator_states,
                cfg.indicator_len,
                cfg.indicator_window,
                streams[name],
                basis,
            )
            values[name] = trace.final_ns
    if "narma2" in cfg.metrics:
        values["narma2"] = _narma_rnmse(model, cfg, 2, streams["narma2"])
    if "narma10" in cfg.metrics:
        values["narma10"] = _narma_rnmse(model, cfg, 10, streams["narma10"])

    needs_long_run = {"mc", "ipc"} & set(cfg.metrics)
    if needs_long_run:
        rng = streams["mc"]
        u = rng.uniform(-1.0, 1.0, size=cfg.mc_len)
        rho0 = qmat.haar_random_pure_state(model.n_qubits, rng)
        traj = run_reservoir(model, u, rho0, basis)
        if "mc" in cfg.metrics:
            values["mc"] = benchmarks.mc_report(u, traj, cfg.mc_max_delay, cfg.mc_washout).total
        if "ipc" in cfg.metrics:
            ipc_cfg = benchmarks.IpcConfig(budget=cfg.ipc_budget, surrogate_count=cfg.ipc_surrogates)
            values["ipc"] = benchmarks.ipc_report(u, traj, ipc_cfg, cfg.mc_washout, streams["ipc"]).total
    if "rank" in cfg.metrics:
        rng = streams["rank"]
        u = rng.uniform(-1.0, 1.0, size=cfg.rank_len + cfg.rank_washout)
        rho0 = qmat.haar_random_pure_state(model.n_qubits, rng)
        traj = run_reservoir(model, u, rho0, basis)
        values["rank"] = float(
            benchmarks.trajectory_rank(traj, cfg.rank_threshold, cfg.rank_washout).raw
        )
    return values


def _point_task(args):
    cfg, index, coord = args
    try:
        return index, evaluate_point(cfg, index, coord), None
    except Exception as exc:  # recorded in-field, the sweep continues
        return index, {}, f"{type(exc).__name__}: {exc}"


def checkpoint_path(out_path: str) -> str:
    return out_path + ".checkpoint.jsonl"


def _load_checkpoint(path: str) -> dict:
    done = {}
    if os.path.exists(path):
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                row = json.loads(line)
                done[row["index"]] = (row["values"], row.get("error"))
    return done


def run_sweep(cfg: SweepConfig, resume: bool = True) -> FieldResult:
    """Evaluate every grid point, resuming from the checkpoint when present."""
    coords = grid_coordinates(cfg)
    ckpt = checkpoint_path(cfg.out_path)
    done = _load_checkpoint(ckpt) if resume else {}

    pending = [(cfg, i, coords[i]) for i in range(len(coords)) if i not in done]
    results = dict(done)
    if pending:
        with open(ckpt, "a", encoding="utf-8") as fh:
            if cfg.workers == 1:
                finished = map(_point_task, pending)
            else:
                pool = ProcessPoolExecutor(max_workers=cfg.workers)
                finished = pool.map(_point_task, pending)
            for index, values, error in finished:
                results[index] = (values, error)
                fh.write(json.dumps({"index": index, "values": values, "error": error}) + "\n")
                fh.flush()
            if cfg.workers > 1:
                pool.shutdown()

    coord_names = ("p", "gamma") if cfg.experiment == "subset_gamma_p_grid" else ("azimuth", "polar")
    ordered = [results[i] for i in range(len(coords))]
    return FieldResult(
        coord_names=coord_names,
        coords=coords,
        metrics=tuple(cfg.metrics),
        values=[v for v, _ in ordered],
        errors=[e for _, e in ordered],
        config=asdict(cfg),
    )


# ---------------------------------------------------------------------------
# emission

def _fmt(x: float) -> str:
    if x != x:
        return "nan"
    if np.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.17g}"


def emit_field(result: FieldResult, path: str, fmt: str = "csv") -> None:
    """Write the field as CSV (one row per grid point) or JSON with metadata."""
    if not result.values or not result.metrics:
        raise ValueError("refusing to write an empty field")
    if fmt == "csv":
        lines = [",".join(result.coord_names + result.metrics + ("error",))]
        for (u, v), values, error in zip(result.coords, result.values, result.errors):
            cells = [_fmt(u), _fmt(v)]
            cells += [_fmt(values[m]) if m in values else "nan" for m in result.metrics]
            cells.append(error or "")
            lines.append(",".join(cells))
        body = "\n".join(lines) + "\n"
    elif fmt == "json":
        points = [
            {
                result.coord_names[0]: u,
                result.coord_names[1]: v,
                "metrics": values,
                "error": error,
            }
            for (u, v), values, error in zip(result.coords, result.values, result.errors)
        ]
        body = json.dumps({"config": result.config, "points": points}, indent=2) + "\n"
    else:
        raise ValueError(f"unknown format {fmt!r}")
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(body)
    except OSError as exc:
        raise OSError(f"cannot write field to {path}: {exc}") from exc


def parse_field_csv(path: str):
    """Read back an emitted CSV as (header, rows of floats, error column)."""
    with open(path, encoding="utf-8") as fh:
        lines = [ln.rstrip("\n") for ln in fh if ln.strip()]
    header = lines[0].split(",")
    rows, errors = [], []
    for line in lines[1:]:
        cells = line.split(",")
        rows.append([float(c) for c in cells[:-1]])
        errors.append(cells[-1] or None)
    return header, rows, errors


# ---------------------------------------------------------------------------
# CLI

def _config_from_args(args) -> SweepConfig:
    base: dict = {}
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            base = json.load(fh)
    if "metrics" in base:
        base["metrics"] = tuple(base["metrics"])
    if "ipc_budget" in base:
        base["ipc_budget"] = tuple(tuple(p) for p in base["ipc_budget"])
    cfg = SweepConfig(**base)
    overrides = {}
    if args.experiment:
        overrides["experiment"] = args.experiment
    if args.metrics:
        overrides["metrics"] = tuple(args.metrics.split(","))
    if args.out:
        overrides["out_path"] = args.out
    if args.workers is not None:
        overrides["workers"] = args.workers
    if args.seed is not None:
        overrides["seed"] = args.seed
    return replace(cfg, **overrides) if overrides else cfg


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="qresp-sweep",
        description="Grid sweeps of quantum-reservoir ESP indicators and benchmarks.",
    )
    parser.add_argument("--config", help="JSON config file with SweepConfig fields")
    parser.add_argument("--experiment", choices=EXPERIMENTS)
    parser.add_argument("--metrics", help="comma-separated metric names")
    parser.add_argument("--out", help="output file path")
    parser.add_argument("--workers", type=int)
    parser.add_argument("--seed", type=int)
    parser.add_argument("--format", choices=("csv", "json"), default="csv")
    args = parser.parse_args(argv)

    try:
        cfg = _config_from_args(args)
    except (ValueError, TypeError, OSError, json.JSONDecodeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG_ERROR

    result = run_sweep(cfg)
    emit_field(result, cfg.out_path, fmt=args.format)
    failures = sum(1 for e in result.errors if e)
    if failures:
        print(f"{failures} of {len(result.errors)} grid points failed", file=sys.stderr)
        return EXIT_PARTIAL_FAILURE
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
