"""DIMACS parsing and the DPLL oracle."""

import itertools
import random

import pytest

from gridppm.sat import (CNFFormula, ParseError, evaluates, format_dimacs,
                         parse_dimacs, solve_sat)


def truth_table_sat(f):
    for bits in itertools.product([False, True], repeat=f.nvars):
        rho = {v: bits[v - 1] for v in range(1, f.nvars + 1)}
        if evaluates(f, rho):
            return rho
    return None


def test_parse_simple():
    f = parse_dimacs("p cnf 1 1\n1 0\n")
    assert f.nvars == 1 and f.clauses == ((1,),)


def test_parse_comments_and_multiline_clauses():
    f = parse_dimacs("c hello\np cnf 3 2\n1 -2\n3 0\n-1 2 -3 0\n")
    assert f.clauses == ((1, -2, 3), (-1, 2, -3))


def test_parse_errors():
    with pytest.raises(ParseError):
        parse_dimacs("p cnf 1 1\n1\n")  # missing terminator
    with pytest.raises(ParseError):
        parse_dimacs("1 0\n")  # clause before header
    with pytest.raises(ParseError):
        parse_dimacs("p cnf 1 1\n2 0\n")  # out of range
    with pytest.raises(ParseError) as err:
        parse_dimacs("p cnf 1 1\nx 0\n")
    assert err.value.line == 2


def test_roundtrip():
    rng = random.Random(0)
    for _ in range(30):
        n = rng.randint(1, 5)
        clauses = tuple(
            tuple(rng.choice([-1, 1]) * rng.randint(1, n)
                  for _ in range(rng.randint(1, 3)))
            for _ in range(rng.randint(0, 6)))
        f = CNFFormula(n, clauses)
        assert parse_dimacs(format_dimacs(f)) == f


def test_solve_basics():
    assert solve_sat(parse_dimacs("p cnf 1 2\n1 0\n-1 0\n")) is None
    rho = solve_sat(parse_dimacs("p cnf 2 1\n1 2 0\n"))
    assert rho is not None and (rho[1] or rho[2])
    assert solve_sat(CNFFormula(0, ())) == {}


def test_solve_agrees_with_truth_tables():
    rng = random.Random(42)
    for _ in range(150):
        n = rng.randint(1, 4)
        clauses = tuple(
            tuple(rng.choice([-1, 1]) * v
                  for v in rng.sample(range(1, n + 1),
                                      rng.randint(1, min(3, n))))
            for _ in range(rng.randint(0, 8)))
        f = CNFFormula(n, clauses)
        got = solve_sat(f)
        want = truth_table_sat(f)
        assert (got is None) == (want is None)
        if got is not None:
            assert evaluates(f, got)
