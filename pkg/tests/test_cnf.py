import numpy as np
import pytest

import oracles
from conftest import make_instance
from memsat.cnf import (
    Clause,
    Instance,
    Literal,
    evaluate,
    parse_dimacs,
    serialize_dimacs,
)
from memsat.errors import ContractError, DimacsError
from memsat.generator import GeneratorConfig, generate


class TestTypes:
    def test_literal_polarity_validated(self):
        Literal(0, 1)
        Literal(5, -1)
        with pytest.raises(ContractError):
            Literal(0, 0)
        with pytest.raises(ContractError):
            Literal(-1, 1)

    def test_clause_requires_three_distinct_vars(self):
        Clause((Literal(0, 1), Literal(1, -1), Literal(2, 1)))
        with pytest.raises(ContractError):
            Clause((Literal(0, 1), Literal(0, -1), Literal(2, 1)))

    def test_instance_rejects_out_of_range_vars(self):
        with pytest.raises(ContractError):
            make_instance(2, [[(0, 1), (1, 1), (2, 1)]])
        with pytest.raises(ContractError):
            Instance(0, ())

    def test_occurrence_index_is_inverse_of_clauses(self, rng):
        for _ in range(20):
            inst = oracles.random_instance(rng)
            occ = inst.occurrence_index
            total = sum(len(pairs) for pairs in occ.values())
            assert total == 3 * inst.num_clauses
            for var, pairs in occ.items():
                for m, slot in pairs:
                    assert inst.clauses[m].literals[slot].var_index == var
                assert [m for m, _ in pairs] == sorted(m for m, _ in pairs)
            seen = {(m, s) for pairs in occ.values() for m, s in pairs}
            assert len(seen) == 3 * inst.num_clauses


class TestEvaluate:
    def test_positive_literal_satisfies(self, triple_pos):
        assert evaluate(triple_pos, [True, False, False]) is True

    def test_all_false_fails_all_positive_clause(self, triple_pos):
        assert evaluate(triple_pos, [False, False, False]) is False

    def test_negated_literal(self):
        inst = make_instance(3, [[(0, -1), (1, 1), (2, 1)]])
        assert evaluate(inst, [False, False, False]) is True
        assert evaluate(inst, [True, False, False]) is False

    def test_length_mismatch_rejected(self, triple_pos):
        with pytest.raises(ContractError):
            evaluate(triple_pos, [True, False])

    def test_planted_instances_satisfied(self):
        for seed in range(30):
            planted = generate(GeneratorConfig(num_vars=12, ratio=4.3, seed=seed))
            assert evaluate(planted.instance, planted.planted) is True

    def test_pure_and_matches_unsat_count_oracle(self, rng):
        for _ in range(50):
            inst = oracles.random_instance(rng)
            assignment = [bool(b) for b in rng.integers(0, 2, inst.num_vars)]
            first = evaluate(inst, assignment)
            assert evaluate(inst, assignment) == first
            assert first == (oracles.count_unsat(inst, assignment) == 0)


class TestParse:
    def test_direct_encoding(self):
        inst = parse_dimacs("p cnf 3 1\n1 -2 3 0")
        assert inst.num_vars == 3
        assert inst.num_clauses == 1
        lits = inst.clauses[0].literals
        assert [(l.var_index, l.polarity) for l in lits] == [(0, 1), (1, -1), (2, 1)]

    def test_comments_and_multiline_clauses(self):
        text = "c a comment\np cnf 4 2\n1 2 3 0\nc mid comment\n-1 -2\n4 0\n"
        inst = parse_dimacs(text)
        assert inst.num_clauses == 2
        assert inst.clauses[1].literals[2].var_index == 3

    def test_accepts_bytes(self):
        inst = parse_dimacs(b"p cnf 3 1\n1 2 3 0\n")
        assert inst.num_vars == 3

    def test_two_literal_clause_rejected(self):
        with pytest.raises(DimacsError) as exc:
            parse_dimacs("p cnf 2 1\n1 2 0")
        assert exc.value.line == 2

    def test_four_literal_clause_rejected(self):
        with pytest.raises(DimacsError):
            parse_dimacs("p cnf 4 1\n1 2 3 4 0")

    def test_malformed_header(self):
        with pytest.raises(DimacsError) as exc:
            parse_dimacs("p dnf 3 1\n1 2 3 0")
        assert exc.value.line == 1
        with pytest.raises(DimacsError):
            parse_dimacs("p cnf three 1\n1 2 3 0")

    def test_literal_out_of_range(self):
        with pytest.raises(DimacsError) as exc:
            parse_dimacs("p cnf 3 1\n1 2 4 0")
        assert exc.value.line == 2

    def test_clause_count_mismatch(self):
        with pytest.raises(DimacsError):
            parse_dimacs("p cnf 3 2\n1 2 3 0")

    def test_unterminated_clause(self):
        with pytest.raises(DimacsError):
            parse_dimacs("p cnf 3 1\n1 2 3")

    def test_repeated_variable_rejected(self):
        with pytest.raises(DimacsError):
            parse_dimacs("p cnf 3 1\n1 -1 2 0")

    def test_missing_header(self):
        with pytest.raises(DimacsError):
            parse_dimacs("1 2 3 0")


class TestSerialize:
    def test_canonical_form(self):
        inst = make_instance(3, [[(0, 1), (1, -1), (2, 1)]])
        assert serialize_dimacs(inst) == "p cnf 3 1\n1 -2 3 0\n"

    def test_empty_clause_list(self):
        inst = Instance(5, ())
        assert serialize_dimacs(inst) == "p cnf 5 0\n"
        assert parse_dimacs(serialize_dimacs(inst)) == inst

    def test_round_trip_on_100_generated_instances(self):
        for seed in range(100):
            planted = generate(GeneratorConfig(num_vars=15, ratio=4.3, seed=seed))
            inst = planted.instance
            again = parse_dimacs(serialize_dimacs(inst))
            assert again == inst

    def test_digest_stable_and_content_addressed(self, triple_pos):
        a = triple_pos.digest
        assert a == triple_pos.digest
        other = make_instance(3, [[(0, 1), (1, 1), (2, -1)]])
        assert other.digest != a

    def test_packed_arrays_match_structure(self, rng):
        inst = oracles.random_instance(rng)
        for m, clause in enumerate(inst.clauses):
            for s, lit in enumerate(clause.literals):
                assert inst.var_idx[m, s] == lit.var_index
                assert inst.polarities[m, s] == lit.polarity
        assert inst.var_idx.dtype == np.int64
