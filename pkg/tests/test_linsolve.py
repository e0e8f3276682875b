"""Exact sparse solver: solutions, nullspaces, and Farkas witnesses."""

import random

from graded_zcr.linsolve import (
    apply_columns,
    check_solution,
    check_witness,
    solve_sparse,
    witness_dot,
)
from graded_zcr.superscalar import GaussianRational, rational


def G(n, d=1, i=0):
    return GaussianRational(rational(n, d), rational(i, 1))


def random_system(rng, nrows=8, ncols=10, density=0.3):
    columns = {}
    for c in range(ncols):
        col = {}
        for r in range(nrows):
            if rng.random() < density:
                v = G(rng.randint(-4, 4), rng.randint(1, 3), rng.randint(-2, 2))
                if v:
                    col[r] = v
        columns[f"c{c}"] = col
    return columns


def test_consistent_systems_random():
    rng = random.Random(3141)
    for _ in range(120):
        columns = random_system(rng)
        x0 = {
            c: G(rng.randint(-3, 3), 1, rng.randint(-1, 1))
            for c in columns
            if rng.random() < 0.5
        }
        rhs = apply_columns(columns, x0)
        out = solve_sparse(columns, rhs)
        assert out.is_solution
        assert check_solution(columns, rhs, out.particular)
        for vec in out.nullspace:
            assert apply_columns(columns, vec) == {}
        # solution plus any nullspace vector still solves
        if out.nullspace:
            combined = dict(out.particular)
            for k, v in out.nullspace[0].items():
                combined[k] = combined.get(k, G(0)) + v
            assert check_solution(columns, rhs, combined)


def test_rank_nullity():
    rng = random.Random(59)
    for _ in range(60):
        columns = random_system(rng)
        out = solve_sparse(columns, {})
        assert out.is_solution
        assert len(out.pivot_columns) + len(out.free_columns) == len(columns)
        assert len(out.nullspace) == len(out.free_columns)


def test_both_branches_verified():
    rng = random.Random(777)
    feasible = infeasible = 0
    for k in range(200):
        columns = random_system(rng, nrows=7, ncols=5, density=0.35)
        if k % 2:
            # in-span target: guaranteed feasible
            x0 = {c: G(rng.randint(-3, 3)) for c in columns}
            rhs = apply_columns(columns, x0)
        else:
            # random target: overdetermined, essentially always infeasible
            rhs = {
                r: G(rng.randint(-3, 3), 1, rng.randint(-1, 1))
                for r in range(7)
            }
            rhs = {k2: v for k2, v in rhs.items() if v}
        out = solve_sparse(columns, rhs)
        if out.is_solution:
            feasible += 1
            assert check_solution(columns, rhs, out.particular)
        else:
            infeasible += 1
            assert check_witness(columns.values(), rhs, out.witness)
            assert witness_dot(out.witness, rhs)
    assert feasible > 10 and infeasible > 10


def test_empty_and_trivial():
    out = solve_sparse({}, {})
    assert out.is_solution and out.particular == {}
    out = solve_sparse({}, {"r": G(1)})
    assert not out.is_solution
    assert witness_dot(out.witness, {"r": G(1)})
    out = solve_sparse({"c": {"r": G(2)}}, {"r": G(6)})
    assert out.is_solution and out.particular == {"c": G(3)}
