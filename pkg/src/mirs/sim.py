"""Monte-Carlo trials and parameter sweeps.

Every trial draws its own channel from a seed derived from
``(base_seed, value_index, trial_index)``, so results do not depend on
execution order and a parallel run reproduces a serial one bit for bit.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import struct
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, asdict

import numpy as np

from mirs.channel import build_cascade
from mirs.metrics import received_power
from mirs.optimize import RandomPhase, SolverKind
from mirs.scenario import Scenario

__all__ = [
    "SweepSpec",
    "SweepRow",
    "SweepResult",
    "CSV_FIELDS",
    "derive_seed",
    "run_trial",
    "run_trials",
    "run_sweep",
]

CSV_FIELDS = ("variable", "value", "solver", "mean_snr_db", "stderr_db", "trials")

VARIABLES = ("d_r", "K", "M")

_SOLVER_STREAM = 1


def derive_seed(base: int, *indices: int) -> int:
    """64-bit seed from a base seed and a tuple of indices.

    BLAKE2b (8-byte digest) of the little-endian signed 64-bit encoding of
    ``(len(indices), base, *indices)``. Stable across platforms and
    Python versions, and sensitive to index order.
    """
    data = struct.pack(f"<{len(indices) + 2}q", len(indices), base, *indices)
    return int.from_bytes(hashlib.blake2b(data, digest_size=8).digest(), "little")


@dataclass(frozen=True)
class SweepSpec:
    variable: str
    values: tuple
    solvers: tuple

    def __post_init__(self):
        if self.variable not in VARIABLES:
            raise ValueError(f"variable must be one of {VARIABLES}, got {self.variable!r}")
        if len(self.values) == 0:
            raise ValueError("sweep needs at least one value")
        if any(b <= a for a, b in zip(self.values[:-1], self.values[1:])):
            raise ValueError("sweep values must be strictly increasing")
        if len(self.solvers) == 0:
            raise ValueError("sweep needs at least one solver")
        names = [s.name for s in self.solvers]
        if len(set(names)) != len(names):
            raise ValueError("duplicate solvers in sweep")


@dataclass(frozen=True)
class SweepRow:
    variable: str
    value: float
    solver: str
    mean_snr_db: float
    stderr_db: float
    trials: int


@dataclass(frozen=True)
class SweepResult:
    rows: tuple

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_FIELDS)
        for r in self.rows:
            writer.writerow([r.variable, _fmt(r.value), r.solver,
                             _fmt(r.mean_snr_db), _fmt(r.stderr_db), r.trials])
        return buf.getvalue()

    def to_json(self) -> str:
        rows = [{k: _json_num(v) for k, v in asdict(r).items()} for r in self.rows]
        return json.dumps(rows, indent=2) + "\n"

    def column(self, solver: str, field: str = "mean_snr_db") -> np.ndarray:
        return np.array([getattr(r, field) for r in self.rows if r.solver == solver])

    def values(self, solver: str) -> np.ndarray:
        return self.column(solver, "value")


def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def _json_num(v):
    if isinstance(v, float) and not math.isfinite(v):
        return repr(v)
    return v


def _scenario_at(scenario: Scenario, variable: str, value):
    """Scenario and UE distance for one sweep point."""
    if variable == "d_r":
        return scenario, float(value)
    return scenario.replace(**{variable: int(value)}), scenario.d_r_m


def run_trials(scenario: Scenario, d_r: float, solvers, trial_index: int,
               value_index: int = 0) -> list[float]:
    """Linear SNR of each solver on one shared channel realization."""
    seed = derive_seed(scenario.seed, value_index, trial_index)
    chain = build_cascade(scenario, rng=np.random.default_rng(seed), d_r=d_r)
    P, noise = scenario.p_tx, scenario.noise_power
    out = []
    for solver in solvers:
        solver_seed = None
        if isinstance(solver, RandomPhase) and solver.seed is None:
            solver_seed = derive_seed(scenario.seed, value_index, trial_index, _SOLVER_STREAM)
        sol = solver.solve(chain, P, solver_seed)
        out.append(received_power(chain, sol, scenario.evaluator) / noise)
    return out


def run_trial(scenario: Scenario, d_r: float, solver: SolverKind,
              trial_index: int, value_index: int = 0) -> float:
    """Linear SNR of one solver on trial `trial_index` at UE distance `d_r`."""
    return run_trials(scenario, d_r, (solver,), trial_index, value_index)[0]


def _job(args):
    scenario, d_r, solvers, value_index, start, stop = args
    return [run_trials(scenario, d_r, solvers, t, value_index) for t in range(start, stop)]


def _reduce(samples: np.ndarray, reducer: str) -> tuple[float, float]:
    n = samples.size
    if reducer == "db":
        with np.errstate(divide="ignore"):
            db = 10.0 * np.log10(samples)
        mean = float(np.mean(db))
        se = float(np.std(db, ddof=1) / math.sqrt(n)) if n > 1 else 0.0
        return mean, se
    mean_lin = float(np.mean(samples))
    if mean_lin <= 0:
        return -math.inf, 0.0
    se_lin = float(np.std(samples, ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    # delta method: d(10 log10 x) = 10 / (x ln 10) dx
    return 10.0 * math.log10(mean_lin), 10.0 / math.log(10.0) * se_lin / mean_lin


def run_sweep(scenario: Scenario, spec: SweepSpec, workers: int | None = None) -> SweepResult:
    """Mean SNR per (value, solver) over ``scenario.trials`` trials.

    With ``workers > 1`` blocks of trials are spread over a process pool.
    The reduction is an ordered fold by (value index, trial index), so the
    result does not depend on `workers`.
    """
    workers = scenario.workers if workers is None else workers
    trials = scenario.trials
    per_job = trials if workers <= 1 else max(1, math.ceil(trials / (4 * workers)))
    jobs = []
    for vi, value in enumerate(spec.values):
        sc, d_r = _scenario_at(scenario, spec.variable, value)
        for start in range(0, trials, per_job):
            jobs.append((sc, d_r, tuple(spec.solvers), vi, start, min(start + per_job, trials)))

    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(_job, jobs))
    else:
        chunks = [_job(j) for j in jobs]
    per_value = [[] for _ in spec.values]
    for job, chunk in zip(jobs, chunks):
        per_value[job[3]].extend(chunk)

    rows = []
    for value, samples in zip(spec.values, per_value):
        arr = np.asarray(samples, dtype=float)  # (trials, solvers)
        for si, solver in enumerate(spec.solvers):
            mean, se = _reduce(arr[:, si], scenario.reducer)
            rows.append(SweepRow(spec.variable, value, solver.name, mean, se,
                                 scenario.trials))
    rows.sort(key=lambda r: (r.value, r.solver))
    return SweepResult(tuple(rows))
