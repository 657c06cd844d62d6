"""Memcomputing right-hand sides, clamping, and forward-Euler stepping.

The model couples one continuous variable per Boolean variable with two
memory variables per clause. Each clause m with literals (i, j, k) and
polarities q contributes, through its clause function

    C_m = 1/2 * min(1 - q_i v_i, 1 - q_j v_j, 1 - q_k v_k),

a gradient-like term G and a rigidity term R to dv of its variables, while
the memory variables follow

    dxs_m = beta * (xs_m + eps) * (C_m - gamma)
    dxl_m = alpha * (C_m - delta).

States are clamped componentwise: v to [-1, 1], xs to [eps, 1-eps], xl to
[1, xl_max]. The scalar functions here are the readable reference for the
per-clause pieces; trajectories are produced by the fused kernels.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import kernels
from .cnf import Instance
from .errors import ConfigError, ContractError

DEFAULT_DT = 2.0 ** -5

# zeta is tied to the clause ratio; the split point is the midpoint between
# the two regimes the model is normally run at (ratios 4.3 and 7).
ZETA_SPLIT_RATIO = 5.65
ZETA_HIGH_RATIO = 0.1
ZETA_LOW_RATIO = 0.001


@dataclass(frozen=True)
class Params:
    """Model constants, time step, and x_l clamp ceiling."""

    alpha: float = 5.0
    beta: float = 20.0
    gamma: float = 0.25
    delta: float = 0.05
    epsilon: float = 1e-3
    zeta: float = 0.1
    dt: float = DEFAULT_DT
    xl_max: float = 1e4
    rigidity_ties: str = "all"  # "all" | "first"

    def __post_init__(self):
        for name in ("alpha", "beta", "gamma", "delta", "epsilon", "zeta", "dt"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be > 0, got {getattr(self, name)}")
        if self.epsilon >= 0.5:
            raise ConfigError(f"epsilon must be < 0.5, got {self.epsilon}")
        if self.xl_max < 1:
            raise ConfigError(f"xl_max must be >= 1, got {self.xl_max}")
        if self.rigidity_ties not in ("all", "first"):
            raise ConfigError(f"rigidity_ties must be 'all' or 'first', got {self.rigidity_ties}")

    @classmethod
    def for_instance(cls, instance: Instance, **overrides) -> "Params":
        """Defaults wired to an instance: xl_max = 1e4*M, zeta by clause ratio."""
        m = instance.num_clauses
        if overrides.get("zeta") is None:
            ratio = m / instance.num_vars
            overrides["zeta"] = ZETA_HIGH_RATIO if ratio >= ZETA_SPLIT_RATIO else ZETA_LOW_RATIO
        if overrides.get("xl_max") is None:
            overrides["xl_max"] = 1e4 * max(m, 1)
        return cls(**{k: v for k, v in overrides.items() if v is not None})

    def packed(self, dtype=np.float64) -> np.ndarray:
        return kernels.pack_params(
            self.alpha, self.beta, self.gamma, self.delta, self.epsilon,
            self.zeta, self.dt, self.xl_max, dtype=dtype,
        )

    @property
    def tie_first(self) -> bool:
        return self.rigidity_ties == "first"


@dataclass
class SolverState:
    """Continuous variables v (N,), memory variables xs, xl (M,), step count t."""

    v: np.ndarray
    xs: np.ndarray
    xl: np.ndarray
    t: int = 0

    def __post_init__(self):
        if self.xs.shape != self.xl.shape:
            raise ContractError("xs and xl must have identical shapes")

    def copy(self) -> "SolverState":
        return SolverState(self.v.copy(), self.xs.copy(), self.xl.copy(), self.t)

    def satisfies_bounds(self, params: Params) -> bool:
        return (
            bool(np.all((self.v >= -1.0) & (self.v <= 1.0)))
            and bool(np.all((self.xs >= params.epsilon) & (self.xs <= 1.0 - params.epsilon)))
            and bool(np.all((self.xl >= 1.0) & (self.xl <= params.xl_max)))
        )


@dataclass
class Derivatives:
    dv: np.ndarray
    dxs: np.ndarray
    dxl: np.ndarray


def _slot_of(instance: Instance, m: int, n: int) -> int:
    for slot, lit in enumerate(instance.clauses[m].literals):
        if lit.var_index == n:
            return slot
    raise ContractError(f"variable {n} does not occur in clause {m}")


def clause_value(instance: Instance, v: Sequence[float], m: int) -> float:
    """C_m in [0, 1]: 0 when some literal is exactly satisfied, 1 at maximum violation."""
    lits = instance.clauses[m].literals
    return 0.5 * min(1.0 - lit.polarity * v[lit.var_index] for lit in lits)


def gradient_term(instance: Instance, v: Sequence[float], m: int, n: int) -> float:
    """G_{n,m}: half the polarity times the smaller of the other literals' terms."""
    slot = _slot_of(instance, m, n)
    lits = instance.clauses[m].literals
    others = [lits[s] for s in range(3) if s != slot]
    return 0.5 * lits[slot].polarity * min(
        1.0 - lit.polarity * v[lit.var_index] for lit in others
    )


def rigidity_term(
    instance: Instance, v: Sequence[float], m: int, n: int, ties: str = "all"
) -> float:
    """R_{n,m}: half (q - v_n) when literal n attains the clause minimum, else 0.

    Attainment is exact equality of the computed values. With ties="all"
    every minimum-attaining literal receives its term; with ties="first"
    only the lowest-index attaining slot does.
    """
    slot = _slot_of(instance, m, n)
    lits = instance.clauses[m].literals
    terms = [1.0 - lit.polarity * v[lit.var_index] for lit in lits]
    tmin = min(terms)
    attaining = [s for s in range(3) if terms[s] == tmin]
    hit = slot in attaining if ties == "all" else slot == attaining[0]
    if not hit:
        return 0.0
    return 0.5 * (lits[slot].polarity - v[n])


def _qf(instance: Instance, dtype) -> np.ndarray:
    return instance.polarities.astype(dtype)


def derivatives(
    instance: Instance, state: SolverState, params: Params, backend: str | None = None
) -> Derivatives:
    """Full right-hand side; per-variable sums accumulate in ascending clause order."""
    dtype = state.v.dtype
    dv, dxs, dxl = kernels.derivatives_arrays(
        instance.var_idx,
        _qf(instance, dtype),
        state.v,
        state.xs,
        state.xl,
        params.packed(dtype),
        tie_first=params.tie_first,
        backend=backend,
    )
    return Derivatives(dv, dxs, dxl)


def euler_step(
    instance: Instance, state: SolverState, params: Params, backend: str | None = None
) -> SolverState:
    """One clamped forward-Euler step; clamping follows the full update."""
    out = state.copy()
    dtype = out.v.dtype
    kernels.run_inplace(
        instance.var_idx,
        _qf(instance, dtype),
        out.v,
        out.xs,
        out.xl,
        params.packed(dtype),
        tie_first=params.tie_first,
        max_steps=1,
        check_every=0,
        backend=backend,
    )
    out.t = state.t + 1
    return out


def extract_assignment(state: SolverState) -> tuple[bool, ...]:
    """Boolean n is true iff v_n >= 0 (zero maps to true)."""
    return tuple(bool(b) for b in (state.v >= 0))
