import numpy as np
import pytest

from memsat.cnf import Clause, Instance, Literal


def make_instance(num_vars, clause_specs):
    """Instance from [(var, pol), (var, pol), (var, pol)] triples."""
    clauses = tuple(
        Clause(tuple(Literal(v, p) for v, p in spec)) for spec in clause_specs
    )
    return Instance(num_vars, clauses)


@pytest.fixture
def triple_pos():
    """Single clause (x1 or x2 or x3), all positive."""
    return make_instance(3, [[(0, 1), (1, 1), (2, 1)]])


@pytest.fixture
def unsat_toy():
    """x and not-x, each padded with two fresh variables in all polarities.

    Eight 3-clauses over three variables; unsatisfiable (verified by
    enumeration in the tests that use it).
    """
    specs = []
    for px in (1, -1):
        for pa in (1, -1):
            for pb in (1, -1):
                specs.append([(0, px), (1, pa), (2, pb)])
    return make_instance(3, specs)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
