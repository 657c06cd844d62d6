"""Solve orchestration: initialization, stepping loop, termination, verification.

A solve never trusts the dynamics: any satisfying assignment detected by the
kernels is re-checked with the plain-Python clause evaluator before being
reported. Budget exhaustion is an outcome, not an error (the dynamics cannot
certify unsatisfiability).
"""
from __future__ import annotations

import time
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import cnf, kernels
from .cnf import Instance
from .dynamics import Params, SolverState, extract_assignment
from .errors import ConfigError, ContractError
from .generator import SOLVER_STREAM, rng_for

SAT = "SAT"
BUDGET_EXHAUSTED = "budget_exhausted"

_DTYPES = {"float32": np.float32, "float64": np.float64}


@dataclass(frozen=True)
class SolveConfig:
    """Stepping budget, check cadence, seed, and numeric precision for a solve.

    ``params=None`` derives instance-wired defaults (zeta by clause ratio,
    xl_max = 1e4 * M) at solve time.
    """

    params: Params | None = None
    max_steps: int = 10_000_000
    check_every: int = 1
    seed: int = 0
    precision: str = "float64"

    def __post_init__(self):
        if self.max_steps < 1:
            raise ConfigError(f"max_steps must be >= 1, got {self.max_steps}")
        if self.check_every < 1:
            raise ConfigError(f"check_every must be >= 1, got {self.check_every}")
        if self.precision not in _DTYPES:
            raise ConfigError(f"precision must be one of {sorted(_DTYPES)}, got {self.precision}")
        if self.seed < 0:
            raise ConfigError(f"seed must be a non-negative integer, got {self.seed}")

    def resolve_params(self, instance: Instance) -> Params:
        return self.params if self.params is not None else Params.for_instance(instance)

    @property
    def dtype(self):
        return _DTYPES[self.precision]


@dataclass(frozen=True)
class RunRecord:
    """Result of one solve; ``assignment`` is present only for SAT outcomes."""

    outcome: str
    assignment: tuple[bool, ...] | None
    steps: int
    wall_time: float
    seed: int
    instance_digest: str
    cycles: int | None = None
    saturation: dict[str, int] | None = None

    def to_dict(self) -> dict:
        d = {
            "outcome": self.outcome,
            "assignment": list(self.assignment) if self.assignment is not None else None,
            "steps": self.steps,
            "wall_time": self.wall_time,
            "seed": self.seed,
            "instance_digest": self.instance_digest,
        }
        if self.cycles is not None:
            d["cycles"] = self.cycles
        if self.saturation is not None:
            d["saturation"] = dict(self.saturation)
        return d


class TraceRow(NamedTuple):
    t: int
    unsat_clauses: int
    max_clause_value: float
    max_xl: float


def initialize(instance: Instance, config: SolveConfig) -> SolverState:
    """Seeded start state: v uniform in [-1, 1], xl = 1, xs = clamp(C(v0))."""
    dtype = config.dtype
    params = config.resolve_params(instance)
    p = params.packed(dtype)
    rng = rng_for(config.seed, SOLVER_STREAM)
    v = (rng.random(instance.num_vars) * 2.0 - 1.0).astype(dtype)
    m = instance.num_clauses
    if m:
        c0 = kernels.clause_values(instance.var_idx, instance.polarities.astype(dtype), v, p)
        xs = np.minimum(np.maximum(c0, p[kernels.EPS]), p[kernels.ONE] - p[kernels.EPS])
    else:
        xs = np.zeros(0, dtype=dtype)
    xl = np.full(m, 1.0, dtype=dtype)
    return SolverState(v=v, xs=xs, xl=xl, t=0)


def _verified_assignment(instance: Instance, state: SolverState) -> tuple[bool, ...]:
    assignment = extract_assignment(state)
    if not cnf.evaluate(instance, assignment):
        raise ContractError("kernel satisfaction check disagrees with the clause evaluator")
    return assignment


def solve(instance: Instance, config: SolveConfig, backend: str | None = None) -> RunRecord:
    """Step until the sign assignment satisfies the formula or the budget ends."""
    start = time.perf_counter()
    params = config.resolve_params(instance)
    state = initialize(instance, config)
    dtype = config.dtype
    found, steps = kernels.run_inplace(
        instance.var_idx,
        instance.polarities.astype(dtype),
        state.v,
        state.xs,
        state.xl,
        params.packed(dtype),
        tie_first=params.tie_first,
        max_steps=config.max_steps,
        check_every=config.check_every,
        t0=0,
        backend=backend,
    )
    state.t = steps
    assignment = _verified_assignment(instance, state) if found else None
    wall = time.perf_counter() - start
    return RunRecord(
        outcome=SAT if found else BUDGET_EXHAUSTED,
        assignment=assignment,
        steps=steps,
        wall_time=wall,
        seed=config.seed,
        instance_digest=instance.digest,
    )


def _trace_row(instance: Instance, state: SolverState, p: np.ndarray) -> TraceRow:
    m = instance.num_clauses
    if m == 0:
        return TraceRow(state.t, 0, 0.0, 0.0)
    idx = instance.var_idx
    qf = instance.polarities.astype(state.v.dtype)
    lit_sat = (state.v[idx] >= 0) == (qf > 0)
    unsat = int(m - np.count_nonzero(np.any(lit_sat, axis=1)))
    cvals = kernels.clause_values(idx, qf, state.v, p)
    return TraceRow(state.t, unsat, float(np.max(cvals)), float(np.max(state.xl)))


def solve_traced(
    instance: Instance,
    config: SolveConfig,
    trace_every: int = 1,
    backend: str | None = None,
) -> tuple[RunRecord, list[TraceRow]]:
    """As ``solve``, additionally sampling diagnostics every ``trace_every`` steps.

    Rows land at global steps trace_every, 2*trace_every, ... plus a final row
    at the termination step, giving ceil(steps / trace_every) rows in total.
    """
    if trace_every < 1:
        raise ConfigError(f"trace_every must be >= 1, got {trace_every}")
    start = time.perf_counter()
    params = config.resolve_params(instance)
    state = initialize(instance, config)
    dtype = config.dtype
    idx = instance.var_idx
    qf = instance.polarities.astype(dtype)
    p = params.packed(dtype)

    rows: list[TraceRow] = []
    found = False
    t = 0
    while t < config.max_steps and not found:
        window = min(trace_every, config.max_steps - t)
        found, k = kernels.run_inplace(
            idx, qf, state.v, state.xs, state.xl, p,
            tie_first=params.tie_first,
            max_steps=window,
            check_every=config.check_every,
            t0=t,
            backend=backend,
        )
        t += k
        state.t = t
        rows.append(_trace_row(instance, state, p))

    assignment = _verified_assignment(instance, state) if found else None
    wall = time.perf_counter() - start
    record = RunRecord(
        outcome=SAT if found else BUDGET_EXHAUSTED,
        assignment=assignment,
        steps=t,
        wall_time=wall,
        seed=config.seed,
        instance_digest=instance.digest,
    )
    return record, rows
