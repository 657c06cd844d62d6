"""Batch experiment driver: scaling sweeps, allometric fits, time projection,
and the LUT resource model.

A sweep generates planted instances per (N, ratio) point, solves each with
the chosen engine, and tabulates steps, host wall time, interval cycles, and
the projected hardware time at the modeled clock. Medians per point feed a
log-log least-squares fit whose slope is the scaling exponent. Projected
hardware time is a model (steps * (M+1) intervals at the clock rate), not a
measurement, and is labeled as such in the outputs.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import hwemu
from .errors import ConfigError, DomainError
from .generator import GeneratorConfig, batch
from .solver import SolveConfig, solve

# Default base seed for sweeps. The scaling-shape and monotonicity checks in
# the test suite hold at this pinned seed (they are seed-specific statements
# about 10-instance medians).
DEFAULT_BASE_SEED = 2200

DEFAULT_CLOCK_HZ = 1e8

COLUMNS = ("N", "ratio", "seed", "steps", "wall_s", "cycles", "projected_hw_s", "outcome")


@dataclass(frozen=True)
class SweepSpec:
    """One scaling experiment: sizes x ratios, ``instances`` runs per point."""

    sizes: tuple[int, ...]
    ratios: tuple[float, ...] = (4.3, 7.0)
    instances: int = 10
    engine: str = "float"
    base_seed: int = DEFAULT_BASE_SEED
    max_steps: int = 10_000_000
    p0: float = 0.08
    precision: str = "float64"

    def __post_init__(self):
        if not self.sizes:
            raise ConfigError("sizes must be non-empty")
        if any(n < 3 for n in self.sizes):
            raise ConfigError(f"sizes must be >= 3, got {self.sizes}")
        if list(self.sizes) != sorted(self.sizes):
            raise ConfigError(f"sizes must be ascending, got {self.sizes}")
        if self.instances < 1:
            raise ConfigError(f"instances must be >= 1, got {self.instances}")
        if self.engine not in ("float", "hw"):
            raise ConfigError(f"engine must be 'float' or 'hw', got {self.engine!r}")

    def to_dict(self) -> dict:
        return {
            "sizes": list(self.sizes),
            "ratios": list(self.ratios),
            "instances": self.instances,
            "engine": self.engine,
            "base_seed": self.base_seed,
            "max_steps": self.max_steps,
            "p0": self.p0,
            "precision": self.precision,
        }


@dataclass(frozen=True)
class ResultRow:
    """One solved instance in a sweep table (stable column order)."""

    n: int
    ratio: float
    seed: int
    steps: int
    wall_s: float
    cycles: int
    projected_hw_s: float
    outcome: str

    def as_tuple(self):
        return (
            self.n, self.ratio, self.seed, self.steps,
            self.wall_s, self.cycles, self.projected_hw_s, self.outcome,
        )


@dataclass(frozen=True)
class FitResult:
    """Power-law fit T ~ prefactor * N**exponent from a log-log regression."""

    exponent: float
    prefactor: float
    exponent_stderr: float
    points: tuple[tuple[float, float], ...]

    def to_dict(self) -> dict:
        return {
            "exponent": self.exponent,
            "prefactor": self.prefactor,
            "exponent_stderr": self.exponent_stderr,
            "points": [list(p) for p in self.points],
        }


def project_hw_time(
    steps: int,
    num_clauses: int,
    clock_hz: float = DEFAULT_CLOCK_HZ,
    cycles_per_interval: int = 1,
) -> float:
    """Seconds for ``steps`` macro steps of M+1 intervals at the given clock."""
    if steps < 0:
        raise DomainError(f"steps must be >= 0, got {steps}")
    if num_clauses < 0 or clock_hz <= 0 or cycles_per_interval <= 0:
        raise DomainError("num_clauses must be >= 0; clock and cycles_per_interval positive")
    return steps * (num_clauses + 1) * cycles_per_interval / clock_hz


def run_sweep(spec: SweepSpec) -> list[ResultRow]:
    """Solve every instance of the sweep; deterministic given the base seed.

    Seeds enumerate runs in (size, ratio, instance) order starting from
    ``base_seed``; each run's seed feeds both instance generation and solver
    initialization (on separate RNG streams). Budget exhaustion is recorded
    as an outcome, never raised. Rows come back sorted by (N, ratio, seed).
    """
    rows: list[ResultRow] = []
    offset = 0
    for n in spec.sizes:
        for ratio in spec.ratios:
            gen = GeneratorConfig(num_vars=n, ratio=ratio, p0=spec.p0, seed=spec.base_seed + offset)
            offset += spec.instances
            for planted in batch(gen, spec.instances):
                inst = planted.instance
                cfg = SolveConfig(
                    max_steps=spec.max_steps,
                    seed=planted.seed,
                    precision=spec.precision,
                )
                if spec.engine == "hw":
                    rec = hwemu.solve_hw(inst, cfg)
                    cycles = rec.cycles
                else:
                    rec = solve(inst, cfg)
                    cycles = rec.steps * (inst.num_clauses + 1)
                rows.append(
                    ResultRow(
                        n=n,
                        ratio=ratio,
                        seed=planted.seed,
                        steps=rec.steps,
                        wall_s=rec.wall_time,
                        cycles=cycles,
                        projected_hw_s=project_hw_time(rec.steps, inst.num_clauses),
                        outcome=rec.outcome,
                    )
                )
    rows.sort(key=lambda r: (r.n, r.ratio, r.seed))
    return rows


def medians(rows: list[ResultRow], ratio: float, value: str = "steps") -> list[tuple[int, float]]:
    """Per-size medians of one column, restricted to one ratio."""
    if value not in ("steps", "wall_s", "cycles", "projected_hw_s"):
        raise DomainError(f"cannot aggregate column {value!r}")
    sizes = sorted({r.n for r in rows if r.ratio == ratio})
    out = []
    for n in sizes:
        vals = [getattr(r, value) for r in rows if r.n == n and r.ratio == ratio]
        out.append((n, float(np.median(vals))))
    return out


def fit_allometric(points: list[tuple[float, float]]) -> FitResult:
    """Least-squares line on (ln N, ln median); slope is the exponent."""
    if len(points) < 3:
        raise DomainError(f"allometric fit needs >= 3 points, got {len(points)}")
    if any(n <= 0 or y <= 0 for n, y in points):
        raise DomainError("allometric fit requires strictly positive points")
    x = np.log([p[0] for p in points])
    y = np.log([p[1] for p in points])
    xm, ym = x.mean(), y.mean()
    sxx = float(np.sum((x - xm) ** 2))
    if sxx == 0.0:
        raise DomainError("allometric fit requires at least two distinct N values")
    slope = float(np.sum((x - xm) * (y - ym)) / sxx)
    intercept = float(ym - slope * xm)
    resid = y - (slope * x + intercept)
    s2 = float(np.sum(resid**2)) / (len(points) - 2)
    stderr = math.sqrt(max(s2, 0.0) / sxx)
    return FitResult(
        exponent=slope,
        prefactor=math.exp(intercept),
        exponent_stderr=stderr,
        points=tuple((float(n), float(v)) for n, v in points),
    )


@dataclass(frozen=True)
class ResourceModel:
    """Piecewise-linear LUT usage versus problem size, plus board capacities.

    The small-N regime f1 hands over to the slower large-N regime f2 at their
    crossover; the observed one-off dip near N=4000 is deliberately ignored.
    """

    f1_intercept: int = 5226
    f1_slope: int = 582
    f2_intercept: int = 134147
    f2_slope: int = 132
    boards: dict = field(
        default_factory=lambda: {"XC7A100T": 63_400, "VU9P": 1_182_000}
    )

    @property
    def crossover(self) -> float:
        return (self.f2_intercept - self.f1_intercept) / (self.f1_slope - self.f2_slope)

    def f1(self, n: int) -> int:
        return self.f1_intercept + self.f1_slope * n

    def f2(self, n: int) -> int:
        return self.f2_intercept + self.f2_slope * n


DEFAULT_RESOURCE_MODEL = ResourceModel()


def estimate_luts(n: int, model: ResourceModel = DEFAULT_RESOURCE_MODEL) -> int:
    """LUTs needed for N variables: f1 below the f1/f2 crossover, f2 above."""
    if n < 1:
        raise DomainError(f"N must be >= 1, got {n}")
    return model.f1(n) if n < model.crossover else model.f2(n)


def max_vars_for_capacity(capacity: int, model: ResourceModel = DEFAULT_RESOURCE_MODEL) -> int:
    """Largest N whose estimated LUT usage fits within ``capacity``."""
    if capacity < estimate_luts(1, model):
        raise DomainError(f"capacity {capacity} cannot fit even N=1")
    n_star = model.crossover
    n2 = (capacity - model.f2_intercept) // model.f2_slope
    if n2 >= n_star:
        return int(n2)
    return int((capacity - model.f1_intercept) // model.f1_slope)


def export_results(rows: list[ResultRow], format: str = "csv") -> str:
    """Render the sweep table with the stable column order."""
    if not rows:
        raise DomainError("cannot export an empty results table")
    if format == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(COLUMNS)
        for r in rows:
            writer.writerow(r.as_tuple())
        return buf.getvalue()
    if format == "json":
        return json.dumps(
            {"columns": list(COLUMNS), "results": [dict(zip(COLUMNS, r.as_tuple())) for r in rows]},
            indent=2,
        ) + "\n"
    raise DomainError(f"unknown export format {format!r}")


def parse_results(text: str, format: str = "csv") -> list[ResultRow]:
    """Inverse of ``export_results`` (for the fit subcommand and round trips)."""

    def row_from(values: dict) -> ResultRow:
        return ResultRow(
            n=int(values["N"]),
            ratio=float(values["ratio"]),
            seed=int(values["seed"]),
            steps=int(values["steps"]),
            wall_s=float(values["wall_s"]),
            cycles=int(values["cycles"]),
            projected_hw_s=float(values["projected_hw_s"]),
            outcome=str(values["outcome"]),
        )

    if format == "csv":
        reader = csv.DictReader(io.StringIO(text))
        return [row_from(rec) for rec in reader]
    if format == "json":
        payload = json.loads(text)
        return [row_from(rec) for rec in payload["results"]]
    raise DomainError(f"unknown export format {format!r}")
