"""Independent reference implementations used as test oracles.

Everything here re-derives results through the most literal route available
(exhaustive enumeration, naive double loops over clause structure, exact
rational arithmetic) and never calls the package's optimized code paths.
"""
from __future__ import annotations

from fractions import Fraction

import numpy as np


def exhaustive_sat(instance) -> bool:
    """Brute-force satisfiability over all 2**N assignments (small N only)."""
    n = instance.num_vars
    assert n <= 20
    for bits in range(1 << n):
        assignment = [(bits >> i) & 1 == 1 for i in range(n)]
        ok = True
        for clause in instance.clauses:
            if not any(
                assignment[lit.var_index] == (lit.polarity == 1) for lit in clause.literals
            ):
                ok = False
                break
        if ok:
            return True
    return False


def naive_derivatives(instance, v, xs, xl, alpha, beta, gamma, delta, epsilon, zeta,
                      tie_first=False):
    """Right-hand sides via the O(N*M) double loop over clause structure.

    Per-variable contributions accumulate in ascending clause order with the
    same operand grouping as the definition, so the result is comparable
    bit for bit with any correctly ordered implementation.
    """
    n_vars = instance.num_vars
    clauses = instance.clauses
    m_count = len(clauses)
    dv = [0.0] * n_vars
    dxs = [0.0] * m_count
    dxl = [0.0] * m_count

    for m, clause in enumerate(clauses):
        lits = clause.literals
        terms = [1.0 - lit.polarity * v[lit.var_index] for lit in lits]
        tmin = min(terms)
        c = 0.5 * tmin
        dxs[m] = beta * (xs[m] + epsilon) * (c - gamma)
        dxl[m] = alpha * (c - delta)

    for n in range(n_vars):
        acc = 0.0
        for m, clause in enumerate(clauses):
            lits = clause.literals
            slots = [s for s in range(3) if lits[s].var_index == n]
            if not slots:
                continue
            terms = [1.0 - lit.polarity * v[lit.var_index] for lit in lits]
            tmin = min(terms)
            attain = [terms[s] == tmin for s in range(3)]
            if tie_first:
                first = attain.index(True)
                attain = [s == first for s in range(3)]
            g_scale = xl[m] * xs[m]
            r_scale = (1.0 + zeta * xl[m]) * (1.0 - xs[m])
            for s in slots:
                others = [terms[t] for t in range(3) if t != s]
                g = 0.5 * lits[s].polarity * min(others[0], others[1])
                r = 0.5 * (lits[s].polarity - v[n]) if attain[s] else 0.0
                acc += g_scale * g + r_scale * r
        dv[n] = acc

    return np.array(dv), np.array(dxs), np.array(dxl)


def mulshift_round_even_exact(a: int, b: int, s: int) -> int:
    """Exact (a*b) / 2**s rounded to nearest even, via stdlib Fraction."""
    return round(Fraction(a * b, 1 << s))


def count_unsat(instance, assignment) -> int:
    """Number of clauses with no literal matching its polarity."""
    bad = 0
    for clause in instance.clauses:
        if not any(
            bool(assignment[lit.var_index]) == (lit.polarity == 1) for lit in clause.literals
        ):
            bad += 1
    return bad


def random_state_arrays(rng, instance, epsilon, xl_max, dtype=np.float64):
    """A random state satisfying the clamp invariants."""
    n, m = instance.num_vars, instance.num_clauses
    v = (rng.random(n) * 2.0 - 1.0).astype(dtype)
    xs = (epsilon + rng.random(m) * (1.0 - 2.0 * epsilon)).astype(dtype)
    # log-uniform over [1, xl_max] so large memory values are exercised too
    xl = np.exp(rng.random(m) * np.log(xl_max)).astype(dtype)
    xl = np.minimum(np.maximum(xl, 1.0), xl_max)
    return v, xs, xl


def random_instance(rng, num_vars=None, num_clauses=None):
    """A random well-formed 3-SAT instance drawn directly from the types."""
    from memsat.cnf import Clause, Instance, Literal

    n = int(num_vars if num_vars is not None else rng.integers(3, 21))
    m = int(num_clauses if num_clauses is not None else rng.integers(1, 4 * n + 1))
    clauses = []
    for _ in range(m):
        vs = rng.choice(n, size=3, replace=False)
        pols = rng.choice([-1, 1], size=3)
        clauses.append(Clause(tuple(Literal(int(a), int(p)) for a, p in zip(vs, pols))))
    return Instance(n, tuple(clauses))
