"""3-SAT instances: construction, Boolean evaluation, DIMACS CNF round trip.

Variable indices are 0-based internally and 1-based in DIMACS text.
Every clause holds exactly three literals over pairwise-distinct variables.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np

from .errors import ContractError, DimacsError


@dataclass(frozen=True)
class Literal:
    """A variable occurrence with polarity +1 (positive) or -1 (negated)."""

    var_index: int
    polarity: int

    def __post_init__(self):
        if self.var_index < 0:
            raise ContractError(f"var_index must be >= 0, got {self.var_index}")
        if self.polarity not in (1, -1):
            raise ContractError(f"polarity must be +1 or -1, got {self.polarity}")


@dataclass(frozen=True)
class Clause:
    """Disjunction of exactly three literals over distinct variables."""

    literals: tuple[Literal, Literal, Literal]

    def __post_init__(self):
        if len(self.literals) != 3:
            raise ContractError(f"clause must have exactly 3 literals, got {len(self.literals)}")
        vs = [lit.var_index for lit in self.literals]
        if len(set(vs)) != 3:
            raise ContractError(f"clause variables must be pairwise distinct, got {vs}")


def clause_of(*lits: tuple[int, int]) -> Clause:
    """Build a clause from three (var_index, polarity) pairs."""
    return Clause(tuple(Literal(v, p) for v, p in lits))


@dataclass(frozen=True)
class Instance:
    """An immutable 3-SAT formula with N variables and M clauses."""

    num_vars: int
    clauses: tuple[Clause, ...]

    def __post_init__(self):
        if self.num_vars < 1:
            raise ContractError(f"num_vars must be >= 1, got {self.num_vars}")
        for m, clause in enumerate(self.clauses):
            for lit in clause.literals:
                if lit.var_index >= self.num_vars:
                    raise ContractError(
                        f"clause {m} references variable {lit.var_index}, "
                        f"but num_vars={self.num_vars}"
                    )

    @property
    def num_clauses(self) -> int:
        return len(self.clauses)

    @cached_property
    def occurrence_index(self) -> dict[int, tuple[tuple[int, int], ...]]:
        """Map var_index -> ((clause index, slot), ...) in ascending clause order."""
        occ: dict[int, list[tuple[int, int]]] = {}
        for m, clause in enumerate(self.clauses):
            for slot, lit in enumerate(clause.literals):
                occ.setdefault(lit.var_index, []).append((m, slot))
        return {v: tuple(pairs) for v, pairs in occ.items()}

    @cached_property
    def var_idx(self) -> np.ndarray:
        """Variable indices as an (M, 3) int64 array (kernel layout)."""
        arr = np.zeros((len(self.clauses), 3), dtype=np.int64)
        for m, clause in enumerate(self.clauses):
            for slot, lit in enumerate(clause.literals):
                arr[m, slot] = lit.var_index
        arr.setflags(write=False)
        return arr

    @cached_property
    def polarities(self) -> np.ndarray:
        """Polarities q in {+1, -1} as an (M, 3) int8 array (kernel layout)."""
        arr = np.zeros((len(self.clauses), 3), dtype=np.int8)
        for m, clause in enumerate(self.clauses):
            for slot, lit in enumerate(clause.literals):
                arr[m, slot] = lit.polarity
        arr.setflags(write=False)
        return arr

    @cached_property
    def digest(self) -> str:
        """Content hash (sha256 of the canonical DIMACS serialization)."""
        return hashlib.sha256(serialize_dimacs(self).encode("ascii")).hexdigest()


def evaluate(instance: Instance, assignment: Sequence[bool]) -> bool:
    """True iff every clause has at least one literal matching its polarity.

    This is the ground-truth oracle: plain Python over the structural clause
    list, independent of any numerical code path.
    """
    if len(assignment) != instance.num_vars:
        raise ContractError(
            f"assignment length {len(assignment)} != num_vars {instance.num_vars}"
        )
    for clause in instance.clauses:
        for lit in clause.literals:
            if bool(assignment[lit.var_index]) == (lit.polarity == 1):
                break
        else:
            return False
    return True


def parse_dimacs(text: str | bytes) -> Instance:
    """Parse DIMACS CNF text into an Instance.

    Accepts comment lines (``c ...``), a single ``p cnf N M`` header, and
    whitespace-separated clauses terminated by 0 (clauses may span lines).
    Rejects anything that is not 3-SAT.
    """
    if isinstance(text, bytes):
        text = text.decode("ascii")

    num_vars = num_clauses = -1
    clauses: list[Clause] = []
    current: list[Literal] = []
    current_vars: set[int] = set()

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        if line.startswith("p"):
            if num_vars >= 0:
                raise DimacsError("duplicate header", lineno)
            parts = line.split()
            if len(parts) != 4 or parts[0] != "p" or parts[1] != "cnf":
                raise DimacsError(f"malformed header {line!r}", lineno)
            try:
                num_vars, num_clauses = int(parts[2]), int(parts[3])
            except ValueError:
                raise DimacsError(f"malformed header {line!r}", lineno) from None
            if num_vars < 1 or num_clauses < 0:
                raise DimacsError(f"header counts out of range: N={num_vars} M={num_clauses}", lineno)
            continue
        if num_vars < 0:
            raise DimacsError("clause data before 'p cnf' header", lineno)
        for tok in line.split():
            try:
                k = int(tok)
            except ValueError:
                raise DimacsError(f"invalid token {tok!r}", lineno) from None
            if k == 0:
                if len(current) != 3:
                    raise DimacsError(
                        f"clause has {len(current)} literals, 3-SAT requires exactly 3", lineno
                    )
                clauses.append(Clause(tuple(current)))
                current, current_vars = [], set()
                continue
            var = abs(k) - 1
            if var >= num_vars:
                raise DimacsError(f"literal {k} out of range for {num_vars} variables", lineno)
            if var in current_vars:
                raise DimacsError(f"variable {abs(k)} repeated within a clause", lineno)
            if len(current) == 3:
                raise DimacsError("clause has more than 3 literals before terminating 0", lineno)
            current.append(Literal(var, 1 if k > 0 else -1))
            current_vars.add(var)

    last = text.count("\n") + 1
    if num_vars < 0:
        raise DimacsError("missing 'p cnf' header", last)
    if current:
        raise DimacsError("unterminated clause at end of input", last)
    if len(clauses) != num_clauses:
        raise DimacsError(
            f"header declares {num_clauses} clauses, found {len(clauses)}", last
        )
    return Instance(num_vars, tuple(clauses))


def serialize_dimacs(instance: Instance) -> str:
    """Emit canonical DIMACS text; ``parse_dimacs`` is its left inverse."""
    lines = [f"p cnf {instance.num_vars} {instance.num_clauses}"]
    for clause in instance.clauses:
        lits = " ".join(
            str((lit.var_index + 1) * lit.polarity) for lit in clause.literals
        )
        lines.append(f"{lits} 0")
    return "\n".join(lines) + "\n"
