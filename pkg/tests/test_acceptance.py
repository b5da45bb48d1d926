"""Acceptance run: ``pytest tests/test_acceptance.py`` (or run this file directly).

Every test carries a ``criterion(k)`` marker; the terminal summary prints one
PASS/FAIL line per criterion together with the measured quantities.
"""

import random
import sys
import time

import numpy as np
import pytest
import sympy as sp

from rdlie.classify import classify, table_basis, table_normal_form
from rdlie.cli import run_command
from rdlie.conslaws import (conservation_laws, divergence, transform_conserved_vector,
                            verify_divergence)
from rdlie.equation import make_equation
from rdlie.equivgroup import (NoWitness, PointTransformation, apply, build_transformation,
                              decide_admissible, equations_match, ghat_psi,
                              verify_admissible_relations)
from rdlie.expr import evaluate_array, num_equivalent, t, u, x
from rdlie.numeric import (Grid, conserved_integral_drift, grid_residual, max_error,
                           observed_orders, solve_pde)
from rdlie.reduce import (PHI, PHI_W, OMEGA, case_equation, exact_solution, list_reductions,
                          pull_back, reduce_equation, reduction_generators)
from rdlie.symmetry import VectorField, commutator, is_symmetry

R = sp.Rational
UNIT = (1.0, 2.0)


def crit(k):
    return pytest.mark.criterion(k)


# ---------------------------------------------------------------------------
# 1. symmetry generators of the fixed rows

FIXED_ROWS = (
    [(1, n, 3, dict(f=1 + x ** 2, h=x)) for n in (1, 2, -1)]
    + [(3, n, 5, dict(eps=e)) for n in (1, 2, -1, R(-4, 3)) for e in (1, -1)]
    + [(4, n, 1, dict(f=1 + x ** 2, eps=2)) for n in (1, 2, -1)]
    + [(6, n, 1, dict(eps=e)) for n in (1, 2, -1) for e in (1, -1)]
    + [(7, R(-4, 3), 1, dict(eps=e)) for e in (1, -1)]
    + [(9, n, None, dict(alpha=a)) for n in (1, 2, -1) for a in (-1, 1)]
    + [(10, n, None, dict(eps=e)) for n in (1, 2, -1) for e in (1, -1)]
    + [(11, n, None, {}) for n in (1, 2, -1)]
    + [(12, R(-4, 3), R(-1, 3), dict(alpha=a)) for a in (-1, 1)]
    + [(13, R(-4, 3), None, {})]
)


@crit(1)
def test_fixed_rows_generators_are_symmetries(record_property):
    start, checked, bad = time.perf_counter(), 0, []
    for case, n, m, params in FIXED_ROWS:
        eq = table_normal_form(case, n, m, params)
        for X in table_basis(case, n, eq.m, params):
            checked += 1
            if not is_symmetry(X, eq, points=100, x_range=UNIT):
                bad.append((case, n, str(X)))
    elapsed = time.perf_counter() - start
    record_property("generators", checked)
    record_property("runtime_s", round(elapsed, 1))
    assert not bad, bad
    assert elapsed < 30


# ---------------------------------------------------------------------------
# 2. rows 2 and 5 through the antiderivative table

TUPLES = [(1, 0, 1, 0), (0, 1, 0, 1), (0, 0, 1, 1)]


@crit(2)
@pytest.mark.parametrize("abcd", TUPLES)
def test_tuple_rows_generators_are_symmetries(abcd, record_property):
    a, b, c, d = abcd
    for case, m, extra in ((2, 3, dict(p=1)), (5, 1, dict(eps=1))):
        params = dict(a=a, b=b, c=c, d=d, **extra)
        eq = table_normal_form(case, 1, m, params)
        for X in table_basis(case, 1, m, params):
            assert is_symmetry(X, eq, points=100, x_range=UNIT), (case, abcd, X)
    record_property(f"tuple{abcd}", "ok")


# ---------------------------------------------------------------------------
# 3. classifier on random Moebius images of the normal forms

IMAGE_ROWS = [
    (2, 1, 3, dict(a=1, b=0, c=1, d=0, p=1)), (2, 1, 3, dict(a=0, b=1, c=0, d=1, p=1)),
    (2, 1, 3, dict(a=0, b=0, c=1, d=1, p=1)), (3, 2, 5, dict(eps=1)), (3, 1, 3, dict(eps=-1)),
    (5, 1, 1, dict(a=0, b=1, c=0, d=1, eps=1)), (6, 2, 1, dict(eps=1)), (6, 1, 1, dict(eps=-1)),
    (7, R(-4, 3), 1, dict(eps=-1)), (7, R(-4, 3), 1, dict(eps=1)), (9, 1, 2, dict(alpha=-1)),
    (9, 2, 3, dict(alpha=1)), (10, 1, 2, dict(eps=-1)), (10, 2, 3, dict(eps=1)),
    (11, 1, None, {}), (11, 2, None, {}), (13, R(-4, 3), None, {}),
    (12, R(-4, 3), R(-1, 3), dict(alpha=2)), (5, 1, 1, dict(a=1, b=0, c=1, d=0, eps=-1)),
    (3, R(1, 2), 3, dict(eps=1)),
]


def random_moebius(rng):
    """Unimodular integer matrix with a pole off [1, 2] and a positive image of [1, 2]."""
    while True:
        M = sp.eye(2)
        for _ in range(2):
            k = rng.choice([-2, -1, 1, 2])
            M = M * (sp.Matrix([[1, k], [0, 1]]) if rng.random() < 0.5
                     else sp.Matrix([[1, 0], [k, 1]]))
        d3, d4, d5, d6 = M
        if d5 == 0 or 0.8 <= -d6 / d5 <= 2.2:
            continue
        if all((d3 * v + d4) / (d5 * v + d6) > R(1, 10) for v in (1, 2)):
            return d3, d4, d5, d6


def image_cases(seed=0):
    rng = random.Random(seed)
    for case, n, m, params in IMAGE_ROWS:
        d3, d4, d5, d6 = random_moebius(rng)
        d7 = R(rng.randint(2, 8), 4)
        d1 = R(rng.choice([1, 2, 3]), 2)
        g = build_transformation("G1", dict(n=n, delta1=d1, delta3=d3, delta4=d4, delta5=d5,
                                            delta6=d6, delta7=d7))
        yield case, table_normal_form(case, n, m, params), g


@crit(3)
def test_classifier_recovers_random_images(record_property):
    correct, mapped_back, total = 0, 0, 0
    for case, nf, g in image_cases():
        total += 1
        image = apply(g, nf)
        domain = tuple(sorted(float(g.X.subs(x, v)) for v in UNIT))
        res = classify(image, domain=domain)
        correct += res.case_id == case
        back = apply(res.normalizer, image, domain=domain)
        mapped_back += all(num_equivalent(getattr(back, k), getattr(nf, k), res.domain, 32,
                                          tol=1e-8) for k in "fh")
    record_property("case_id", f"{correct}/{total}")
    record_property("normalized", f"{mapped_back}/{total}")
    assert total == 20 and correct == total and mapped_back == total


# ---------------------------------------------------------------------------
# 4. conservation-law spaces

@crit(4)
@pytest.mark.parametrize("f, h, n, m, dim", [
    (1, 0, 1, 2, 2),
    (1, -1, 1, 2, 2),
    (1, -x ** -2, 1, 2, 2),
    (1 + x ** 2, 2 * (1 + x ** 2), 1, 1, 2),
    (1, 1, 3, 2, 0),
])
def test_conservation_law_dimensions(f, h, n, m, dim, record_property):
    eq = make_equation(f, 1, h, n, m)
    laws = conservation_laws(eq)
    record_property(eq.literal(), len(laws))
    assert len(laws) == dim
    for cv in laws:
        assert divergence(cv, eq) == 0


# ---------------------------------------------------------------------------
# 5. exact solutions and reduced ODEs

@crit(5)
@pytest.mark.parametrize("case, branch, consts, tspan", [
    (9, "stationary", dict(n=1, alpha=-1, C=3), (0.0, 1.0)),
    (9, "9.2", dict(n=2, alpha=0, C=10), (0.0, 1.0)),
    (12, "12.4", dict(alpha=-3, C1=1, C2=0), (0.0, 1.0)),
])
def test_exact_solution_grid_residuals(case, branch, consts, tspan, record_property):
    sol = exact_solution(case, branch, consts)
    if branch == "9.2":
        assert sp.simplify(sol.u - x * (10 - 4 * t) ** R(-1, 2)) == 0
    if branch == "12.4":
        assert sp.simplify(sol.u - sp.sin(x) ** -3) == 0
    res = grid_residual(sol.equation, sol.u, Grid(*UNIT, 200, *tspan))
    record_property(branch, f"{res:.1e}")
    assert res < 1e-12


@crit(5)
def test_reduced_odes_are_solved_by_the_closed_forms():
    C, P = sp.symbols("C P", positive=True)
    n, alpha = sp.Symbol("n", positive=True), sp.Symbol("alpha", real=True)
    a92 = next(a for a in list_reductions(9, n) if a.row == "9.2")
    ode = reduce_equation(case_equation(9, n, alpha), a92)
    # phi = P^(-1/n) with P = C - (alpha n + 2 + 4/n) omega, so dP/domega = -rate
    rate = alpha * n + 2 + 4 / n
    phi = P ** (-1 / n)
    on = ode.subs(PHI_W, sp.diff(phi, P) * -rate).subs(PHI, phi)
    assert sp.simplify(on) == 0
    a122 = next(a for a in list_reductions(12) if a.row == "12.2")
    ode = reduce_equation(case_equation(12, None, alpha), a122)
    phi = (C + (R(4, 3) * alpha - R(1, 4)) * OMEGA) ** R(3, 4)
    on = ode.subs(PHI_W, sp.diff(phi, OMEGA)).subs(PHI, phi)
    assert sp.simplify(on) == 0


# ---------------------------------------------------------------------------
# 6. numerical cross-check

PM = make_equation(1, 1, 0, 1)
PM_SOL = x ** 2 / (6 * (1 - t))


@crit(6)
def test_numerical_solution_error_and_order(record_property):
    err200 = max_error(solve_pde(PM, PM_SOL, Grid(*UNIT, 200, 0.0, 0.5)), PM_SOL)
    sizes = [51, 101, 201]
    errs = [max_error(solve_pde(PM, PM_SOL, Grid(*UNIT, k, 0.0, 0.5), snapshots=6), PM_SOL)
            for k in sizes]
    orders = observed_orders(errs, [k - 1 for k in sizes])
    record_property("max_err_nx200", f"{err200:.2e}")
    record_property("orders", ",".join(f"{p:.3f}" for p in orders))
    assert err200 < 1e-4
    assert all(1.8 <= p <= 2.2 for p in orders)


@crit(6)
def test_zero_flux_mass_drift(record_property):
    sol = solve_pde(PM, x ** 2 / 6, Grid(*UNIT, 200, 0.0, 0.5, "zero-flux"))
    mass = next(cv for cv in conservation_laws(PM) if cv.characteristic == 1)
    drift = conserved_integral_drift(sol, mass, PM)
    record_property("mass_drift", f"{drift:.1e}")
    assert drift < 1e-6


# ---------------------------------------------------------------------------
# 7. pull-back through the linear-source map

@crit(7)
@pytest.mark.parametrize("eps", [1, -1])
def test_pull_back_through_linear_source_map(eps, record_property):
    sol = exact_solution(9, "9.2", dict(n=1, alpha=0, C=8))
    tr = build_transformation("additional", dict(eps=eps, n=1))
    back = pull_back(sol, tr)
    target = make_equation(1, 1, eps, 1, 1)
    assert equations_match(back.equation, target)
    res = grid_residual(target, back.u, Grid(*UNIT, 200, 0.0, 0.5))
    record_property(f"eps={eps}", f"{res:.1e}")
    assert res < 1e-8


# ---------------------------------------------------------------------------
# 8. continuity of the gauge function through n = -1

@crit(8)
@pytest.mark.parametrize("side", [1, -1])
def test_gauge_function_is_continuous_at_minus_one(side, record_property):
    d3, d4 = R(1, 2), R(1, 4)
    psi = ghat_psi(-1 + side * sp.Float(1e-6, 30), 1, d3, d4)
    xs = np.linspace(0.0, 1.0, 101)
    gap = float(np.max(np.abs(evaluate_array(psi, {"x": xs}) - np.exp(0.5 * xs + 0.25))))
    record_property(f"side={side:+d}", f"{gap:.1e}")
    assert gap < 1e-4


# ---------------------------------------------------------------------------
# 9. admissible-transformation branches

@crit(9)
def test_exponent_mismatch_has_no_witness():
    d = decide_admissible(make_equation(1, 1, 1, 1, 3), make_equation(1, 1, 1, 2, 3))
    assert isinstance(d.witness, NoWitness)


@crit(9)
def test_linear_to_quadratic_source_witness():
    eq1 = make_equation(1, 1, 1, 1, 1)
    eq2 = make_equation((5 * x) ** R(-7, 5), 1, 3 / (25 * x ** 2), 1, 2)
    d = decide_admissible(eq1, eq2)
    assert d.branch == "(1,n+1)" and isinstance(d.witness, PointTransformation)
    # the h = 0 detour shows up as an exponential time map
    assert d.witness.T.has(sp.exp)
    assert equations_match(apply(d.witness, eq1), eq2)
    assert verify_admissible_relations(d.witness, eq1, eq2).passed
    for cv in conservation_laws(eq1):
        moved = transform_conserved_vector(d.witness, cv, eq2)
        assert verify_divergence(moved, eq2, x_range=UNIT)


@crit(9)
def test_unsupported_family_is_refused_with_exit_three(capsys):
    code = run_command(["admissible", "--eq", "f=2+sin(x); g=1; h=1; n=1; m=3",
                        "--eq2", "f=1; g=1; h=1; n=1; m=3"])
    assert code == 3 and "unsupported" in capsys.readouterr().err


# ---------------------------------------------------------------------------
# 10. commutators of the reduction triples

@crit(10)
@pytest.mark.parametrize("case", [9, 12])
def test_reduction_triples_commute(case):
    X1, X2, X3 = reduction_generators(case)
    zero = VectorField(0, 0, 0)
    assert commutator(X1, X2) == X1
    assert commutator(X1, X3) == zero
    assert commutator(X2, X3) == zero


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
