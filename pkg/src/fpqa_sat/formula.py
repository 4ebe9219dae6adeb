"""MAX-3SAT formulas and their Boolean objective polynomials.

Variables are 1-based in DIMACS text and in :class:`Literal`; the objective
polynomial indexes variables 0-based (``x0`` is DIMACS variable 1), which is
also the qubit index used downstream.
"""

from __future__ import annotations

from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations


class DimacsError(ValueError):
    """Malformed DIMACS input; ``line`` is 1-based (0 when not tied to a line)."""

    def __init__(self, message: str, line: int = 0):
        self.line = line
        super().__init__(f"line {line}: {message}" if line else message)


@dataclass(frozen=True, order=True)
class Literal:
    variable: int
    positive: bool = True

    def __post_init__(self):
        if self.variable < 1:
            raise ValueError(f"variable index must be >= 1, got {self.variable}")

    @classmethod
    def from_int(cls, value: int) -> Literal:
        if value == 0:
            raise ValueError("0 is not a literal")
        return cls(abs(value), value > 0)

    def __int__(self) -> int:
        return self.variable if self.positive else -self.variable

    @property
    def index(self) -> int:
        """0-based variable index (the qubit the literal lives on)."""
        return self.variable - 1

    def __str__(self) -> str:
        return f"x{self.index}" if self.positive else f"~x{self.index}"


Clause = tuple[Literal, Literal, Literal]


def make_clause(values: Iterable[int | Literal]) -> Clause:
    """Build a clause, rejecting widths other than 3 and repeated variables."""
    lits = tuple(v if isinstance(v, Literal) else Literal.from_int(int(v)) for v in values)
    if len(lits) != 3:
        raise ValueError(f"clause must have exactly 3 literals, got {len(lits)}")
    seen: dict[int, Literal] = {}
    for lit in lits:
        prev = seen.get(lit.variable)
        if prev is not None:
            kind = "duplicate" if prev == lit else "complementary"
            raise ValueError(f"{kind} literals in clause {[int(x) for x in lits]}")
        seen[lit.variable] = lit
    return lits  # type: ignore[return-value]


@dataclass(frozen=True)
class SatFormula:
    num_variables: int
    clauses: tuple[Clause, ...] = ()

    def __post_init__(self):
        if self.num_variables < 0:
            raise ValueError("num_variables must be >= 0")
        clauses = tuple(make_clause(c) for c in self.clauses)
        for c in clauses:
            for lit in c:
                if lit.variable > self.num_variables:
                    raise ValueError(
                        f"variable {lit.variable} exceeds num_variables={self.num_variables}"
                    )
        object.__setattr__(self, "clauses", clauses)

    @classmethod
    def from_lists(cls, num_variables: int, clauses: Iterable[Iterable[int]]) -> SatFormula:
        return cls(num_variables, tuple(make_clause(c) for c in clauses))

    def as_lists(self) -> list[list[int]]:
        return [[int(lit) for lit in c] for c in self.clauses]

    def satisfied_count(self, assignment: Sequence[int]) -> int:
        """Number of clauses satisfied by a 0/1 assignment indexed by 0-based variable."""
        total = 0
        for clause in self.clauses:
            if any(bool(assignment[lit.index]) == lit.positive for lit in clause):
                total += 1
        return total

    def __len__(self) -> int:
        return len(self.clauses)


def parse_dimacs(text: str | Iterable[str]) -> SatFormula:
    """Parse a DIMACS CNF document whose clauses all have width 3.

    Clauses may span lines; each is terminated by ``0``. ``c`` lines and the
    SATLIB trailer (``%`` followed by a lone ``0``) are ignored.
    """
    lines = text.splitlines() if isinstance(text, str) else list(text)
    num_vars = num_clauses = None
    clauses: list[Clause] = []
    pending: list[int] = []
    pending_line = 0
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        if line.startswith("%"):
            break
        if line.startswith("p"):
            parts = line.split()
            if num_vars is not None:
                raise DimacsError("duplicate problem line", lineno)
            if len(parts) != 4 or parts[1] != "cnf":
                raise DimacsError(f"malformed header {line!r}, expected 'p cnf <vars> <clauses>'", lineno)
            try:
                num_vars, num_clauses = int(parts[2]), int(parts[3])
            except ValueError:
                raise DimacsError(f"malformed header {line!r}", lineno) from None
            if num_vars < 0 or num_clauses < 0:
                raise DimacsError("negative counts in header", lineno)
            continue
        if num_vars is None:
            raise DimacsError("clause before 'p cnf' header", lineno)
        for tok in line.split():
            try:
                value = int(tok)
            except ValueError:
                raise DimacsError(f"unexpected token {tok!r}", lineno) from None
            if not pending:
                pending_line = lineno
            if value == 0:
                clauses.append(_checked_clause(pending, num_vars, pending_line))
                pending = []
                continue
            pending.append(value)
    if num_vars is None:
        raise DimacsError("missing 'p cnf' header")
    if pending:
        clauses.append(_checked_clause(pending, num_vars, pending_line))
    if num_clauses is not None and len(clauses) != num_clauses:
        raise DimacsError(f"header declares {num_clauses} clauses, found {len(clauses)}")
    return SatFormula(num_vars, tuple(clauses))


def _checked_clause(values: list[int], num_vars: int, lineno: int) -> Clause:
    if len(values) != 3:
        raise DimacsError(f"clause length {len(values)} != 3", lineno)
    for v in values:
        if abs(v) > num_vars:
            raise DimacsError(f"variable {abs(v)} out of range 1..{num_vars}", lineno)
    try:
        return make_clause(values)
    except ValueError as exc:
        raise DimacsError(str(exc), lineno) from None


def to_dimacs(formula: SatFormula, comments: Sequence[str] = ()) -> str:
    out = [f"c {c}" for c in comments]
    out.append(f"p cnf {formula.num_variables} {len(formula.clauses)}")
    out.extend(" ".join(str(int(lit)) for lit in c) + " 0" for c in formula.clauses)
    return "\n".join(out) + "\n"


Monomial = tuple[int, ...]


@dataclass(frozen=True)
class ObjectivePolynomial:
    """Multilinear polynomial over {0,1} variables with exact coefficients.

    ``terms`` maps a sorted tuple of distinct 0-based variable indices to a
    nonzero coefficient; the degree-0 part lives in ``constant``.
    """

    terms: Mapping[Monomial, Fraction] = field(default_factory=dict)
    constant: Fraction = Fraction(0)

    def __post_init__(self):
        clean: dict[Monomial, Fraction] = {}
        for key, coeff in self.terms.items():
            mono = tuple(sorted(key))
            if not 1 <= len(mono) <= 3 or len(set(mono)) != len(mono):
                raise ValueError(f"invalid monomial {key!r}")
            coeff = Fraction(coeff)
            if coeff:
                clean[mono] = clean.get(mono, Fraction(0)) + coeff
        object.__setattr__(self, "terms", {k: v for k, v in sorted(clean.items()) if v})
        object.__setattr__(self, "constant", Fraction(self.constant))

    def __add__(self, other: ObjectivePolynomial) -> ObjectivePolynomial:
        merged = dict(self.terms)
        for k, v in other.terms.items():
            merged[k] = merged.get(k, Fraction(0)) + v
        return ObjectivePolynomial(merged, self.constant + other.constant)

    def evaluate(self, assignment: Sequence[int]) -> Fraction:
        total = self.constant
        for mono, coeff in self.terms.items():
            if all(assignment[i] for i in mono):
                total += coeff
        return total

    @property
    def degree(self) -> int:
        return max((len(k) for k in self.terms), default=0)

    def variables(self) -> set[int]:
        return {i for k in self.terms for i in k}

    def ordered_terms(self) -> list[tuple[Monomial, Fraction]]:
        """Terms sorted by (degree, variable tuple)."""
        return sorted(self.terms.items(), key=lambda kv: (len(kv[0]), kv[0]))


def clause_objective(clause: Sequence[Literal | int]) -> ObjectivePolynomial:
    """Satisfied-indicator polynomial ``1 - prod(1 - v(l))`` of one clause."""
    clause = make_clause(clause)
    # 1 - v(l) is x for a negative literal and 1 - x for a positive one;
    # expand prod(a_i + b_i x_i) over subsets.
    factors = [(Fraction(1), Fraction(-1)) if lit.positive else (Fraction(0), Fraction(1)) for lit in clause]
    product: dict[Monomial, Fraction] = {}
    for size in range(4):
        for subset in combinations(range(3), size):
            coeff = Fraction(1)
            for i in range(3):
                coeff *= factors[i][1] if i in subset else factors[i][0]
            if coeff:
                product[tuple(sorted(clause[i].index for i in subset))] = coeff
    constant = 1 - product.pop((), Fraction(0))
    return ObjectivePolynomial({k: -v for k, v in product.items()}, constant)


def formula_objective(formula: SatFormula) -> ObjectivePolynomial:
    terms: dict[Monomial, Fraction] = {}
    constant = Fraction(0)
    for clause in formula.clauses:
        part = clause_objective(clause)
        constant += part.constant
        for k, v in part.terms.items():
            terms[k] = terms.get(k, Fraction(0)) + v
    return ObjectivePolynomial(terms, constant)
