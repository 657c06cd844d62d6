"""Random planted hard 3-SAT instances.

Construction: start from the all-true assignment, draw M clauses whose
negation pattern (0, 1, or 2 negated literals) follows probabilities
(p0, 3*p1, 3*p2) with p1 = (1-4*p0)/6 and p2 = (1+2*p0)/6, then re-randomize
the hidden solution by flipping each variable with probability 1/2. Clauses
with three negated literals are never produced, so the planted assignment
satisfies the formula by construction.

All randomness comes from numpy's PCG64 bit generator seeded through
``SeedSequence([seed, stream_tag])``, which is reproducible across platforms.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .cnf import Clause, Instance, Literal, evaluate
from .errors import ConfigError

# Stream tags keep the clause-sampling stream disjoint from other consumers
# (e.g. solver initialization) that reuse the same user-facing seed.
GENERATOR_STREAM = 0
SOLVER_STREAM = 1


def rng_for(seed: int, stream: int) -> np.random.Generator:
    """PCG64 generator for (seed, stream); the package-wide RNG convention."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, stream])))


@dataclass(frozen=True)
class GeneratorConfig:
    num_vars: int
    ratio: float
    p0: float = 0.08
    seed: int = 0

    def __post_init__(self):
        if self.num_vars < 3:
            raise ConfigError(f"num_vars must be >= 3 for 3-SAT, got {self.num_vars}")
        if not (0.077 < self.p0 < 0.25):
            raise ConfigError(f"p0 must lie in (0.077, 0.25), got {self.p0}")
        p1, p2 = self.p1, self.p2
        if not (0.0 < p1 < 1.0 and 0.0 < p2 < 1.0):
            raise ConfigError(f"derived p1={p1}, p2={p2} outside (0, 1)")
        if abs(self.p0 + 3.0 * p1 + 3.0 * p2 - 1.0) > 1e-12:
            raise ConfigError("pattern probabilities do not sum to 1")
        if self.num_clauses < 1:
            raise ConfigError(
                f"ratio {self.ratio} with num_vars {self.num_vars} yields no clauses"
            )
        if self.seed < 0:
            raise ConfigError(f"seed must be a non-negative integer, got {self.seed}")

    @property
    def p1(self) -> float:
        return (1.0 - 4.0 * self.p0) / 6.0

    @property
    def p2(self) -> float:
        return (1.0 + 2.0 * self.p0) / 6.0

    @property
    def num_clauses(self) -> int:
        return round(self.ratio * self.num_vars)


@dataclass(frozen=True)
class PlantedInstance:
    instance: Instance
    planted: tuple[bool, ...]
    seed: int

    def __post_init__(self):
        if not evaluate(self.instance, self.planted):
            raise ConfigError("planted assignment does not satisfy the instance")


def _sample_distinct3(rng: np.random.Generator, num_vars: int) -> tuple[int, int, int]:
    """Three distinct variable indices, uniform without replacement.

    Rejection on raw ``integers`` draws keeps the stream portable (no reliance
    on numpy's higher-level ``choice`` internals).
    """
    v0 = int(rng.integers(0, num_vars))
    v1 = int(rng.integers(0, num_vars))
    while v1 == v0:
        v1 = int(rng.integers(0, num_vars))
    v2 = int(rng.integers(0, num_vars))
    while v2 == v0 or v2 == v1:
        v2 = int(rng.integers(0, num_vars))
    return v0, v1, v2


def _sample_clause(
    rng: np.random.Generator, num_vars: int, p0: float, p1: float
) -> tuple[tuple[int, int, int], tuple[int, int, int]]:
    """One pre-flip clause: variable triple and polarities (+1/-1).

    Negation count k in {0, 1, 2} has probabilities (p0, 3*p1, 3*(p2)); the
    negated slot (k=1) or the non-negated slot (k=2) is uniform over the 3
    positions. Three negations are never produced.
    """
    vs = _sample_distinct3(rng, num_vars)
    r = float(rng.random())
    pol = [1, 1, 1]
    if r < p0:
        pass
    elif r < p0 + 3.0 * p1:
        pol[int(rng.integers(0, 3))] = -1
    else:
        keep = int(rng.integers(0, 3))
        for s in range(3):
            if s != keep:
                pol[s] = -1
    return vs, (pol[0], pol[1], pol[2])


def generate(config: GeneratorConfig) -> PlantedInstance:
    """Draw one planted instance. Deterministic given the config."""
    rng = rng_for(config.seed, GENERATOR_STREAM)
    m = config.num_clauses
    drawn = [_sample_clause(rng, config.num_vars, config.p0, config.p1) for _ in range(m)]

    flips = rng.random(config.num_vars) < 0.5
    planted = tuple(bool(b) for b in ~flips)

    clauses = []
    for vs, pol in drawn:
        lits = tuple(
            Literal(v, -p if flips[v] else p) for v, p in zip(vs, pol)
        )
        clauses.append(Clause(lits))
    instance = Instance(config.num_vars, tuple(clauses))
    return PlantedInstance(instance, planted, config.seed)


def batch(config: GeneratorConfig, count: int) -> list[PlantedInstance]:
    """``count`` instances from consecutive seeds, with no pre-selection."""
    if count < 1:
        raise ConfigError(f"count must be >= 1, got {count}")
    return [generate(replace(config, seed=config.seed + i)) for i in range(count)]
