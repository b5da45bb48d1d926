"""Closed-form antiderivatives and inverses for the families the class needs.

No general integrator: a short table (polynomials, powers of linear forms,
exponentials of linear forms, partial fractions with linear and irreducible
quadratic factors) and a matching set of invertible one-variable maps.
Anything else raises instead of guessing.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np
import sympy as sp

from .expr import as_rational, evaluate_array, simplify, strip_abs, x

__all__ = ["NotIntegrable", "NotInvertible", "antiderivative", "exp_antiderivative",
           "invert_function"]


class NotIntegrable(ValueError):
    pass


class NotInvertible(ValueError):
    pass


def _linear(expr, var):
    """(a, b) with expr == a*var + b, or None."""
    expr = sp.expand(expr)
    if not expr.is_polynomial(var) or sp.degree(expr, var) != 1:
        return None
    a = expr.coeff(var, 1)
    return a, sp.expand(expr - a * var)


def _nonzero(e) -> bool:
    e = sp.simplify(e)
    return e != 0 and e.is_zero is not True


def _positive_side(lin, var, ref=1.5):
    """L or -L, whichever is positive at the reference point (ln|L| convention)."""
    probe = lin.subs(var, ref)
    if probe.is_number and probe < 0:
        return -lin
    return lin


def _power_rule(coeff, base, p, var):
    lin = _linear(base, var)
    if lin is None or p.has(var):
        return None
    a, _ = lin
    if sp.simplify(p + 1) == 0:
        return coeff * sp.log(_positive_side(base, var)) / a
    if not _nonzero(p + 1):
        return None
    return coeff * base ** (p + 1) / (a * (p + 1))


def _quadratic_term(term, var):
    num, den = sp.fraction(sp.together(term))
    num, den = sp.expand(num), sp.expand(den)
    if not (num.is_polynomial(var) and den.is_polynomial(var)):
        return None
    if sp.degree(den, var) != 2 or sp.degree(num, var) > 1:
        return None
    q, r, s = (den.coeff(var, k) for k in (2, 1, 0))
    alpha, beta = num.coeff(var, 1), num.coeff(var, 0)
    disc = sp.simplify(4 * q * s - r ** 2)
    rest = beta - alpha * r / (2 * q)
    log_part = alpha / (2 * q) * sp.log(den)
    if disc.is_positive:
        root = sp.sqrt(disc)
        return log_part + 2 * rest / root * sp.atan((2 * q * var + r) / root)
    if disc.is_negative:
        root = sp.sqrt(-disc)
        ratio = (2 * q * var + r - root) / (2 * q * var + r + root)
        return alpha / (2 * q) * sp.log(den) + rest / root * sp.log(ratio)
    return None


def _table(term, var):
    if not term.has(var):
        return term * var
    coeff, rest = term.as_independent(var, as_Add=False)
    rest = strip_abs(rest)
    if rest.is_polynomial(var):
        return coeff * sp.integrate(rest, var)
    if rest.func is sp.exp:
        lin = _linear(rest.args[0], var)
        if lin is not None:
            return coeff * rest / lin[0]
    if rest.is_Pow and rest.base.func is sp.cos and rest.exp == -2:
        lin = _linear(rest.base.args[0], var)
        if lin is not None:
            return coeff * sp.tan(rest.base.args[0]) / lin[0]
    if rest.is_Pow:
        found = _power_rule(coeff, rest.base, rest.exp, var)
        if found is not None:
            return found
    found = _quadratic_term(term, var)
    if found is not None:
        return found
    return None


def _linear_bases(e, var):
    """Roots of the maximal polynomial pieces of e, each a power of one linear form."""
    roots = set()

    def walk(sub):
        if not sub.has(var):
            return True
        if sub.is_polynomial(var):
            rs = sp.roots(sp.Poly(sub, var))
            if len(rs) != 1 or sum(rs.values()) != sp.degree(sub, var):
                return False
            roots.add(sp.nsimplify(next(iter(rs))))
            return True
        if sub.is_Add:
            factored = sp.factor(sub)
            if factored != sub and not factored.is_Add:
                return walk(factored)
            return False
        return all(walk(a) for a in sub.args)

    return roots if walk(sp.sympify(e)) else None


def _single_linear_power(e, var, ref=1.5):
    """e = C*(s*(var - r))**k with s*(var - r) > 0 near ref, or None."""
    roots = _linear_bases(e, var)
    if not roots or len(roots) != 1:
        return None
    (r,) = roots
    side = 1 if ref > r else -1
    L = side * (var - r)
    probes = [r + side * v for v in (0.5, 1.0, 2.0)]
    try:
        ks = [side * float((L * sp.diff(e, var) / e).subs(var, pv).evalf()) for pv in probes]
    except (TypeError, ValueError):
        return None
    if not all(np.isfinite(ks)) or max(ks) - min(ks) > 1e-9 * (1 + abs(ks[0])):
        return None
    k = sp.Rational(Fraction(ks[0]).limit_denominator(1000))
    if abs(float(k) - ks[0]) > 1e-9:
        return None
    C = sp.nsimplify(sp.simplify(e.subs(var, r + side)))
    if not C.is_number or C == 0:
        return None
    return C, L, k, side


def antiderivative(e, var=x, ref=1.5) -> sp.Expr:
    """Antiderivative from the pattern table, integration constant zero.

    ``ln`` of a linear form is returned as ``ln(L)``: results hold on the
    side of each pole where L > 0. For a single power of a linear form the
    side is the one containing ``ref``.
    """
    e = sp.sympify(e)
    if e == 0:
        return sp.S.Zero
    rf = as_rational(e, var)
    if rf:
        try:
            e = sp.apart(rf.to_expr(), var)
        except (sp.PolynomialError, NotImplementedError):
            e = rf.to_expr()
        terms = sp.Add.make_args(sp.expand(e, deep=False))
        return _integrate_terms(terms, var)
    try:
        return _integrate_terms(sp.Add.make_args(e), var)
    except NotIntegrable:
        pass
    found = _single_linear_power(e, var, float(ref))
    if found is not None:
        C, L, k, side = found
        if k == -1:
            return C * sp.log(L) / side
        return C * L ** (k + 1) / (side * (k + 1))
    return _integrate_terms(sp.Add.make_args(sp.expand(e)), var)


def _integrate_terms(terms, var):
    total = sp.S.Zero
    for term in terms:
        found = _table(term, var)
        if found is None:
            raise NotIntegrable(f"no table antiderivative for {term}")
        total += found
    return total


def exp_antiderivative(e, var=x) -> sp.Expr:
    """exp of the antiderivative with logarithmic terms turned into powers."""
    F = sp.expand(antiderivative(e, var), log=False)
    powers, rest = sp.S.One, sp.S.Zero
    for term in sp.Add.make_args(F):
        coeff, core = term.as_independent(var, as_Add=False)
        if core.func is sp.log:
            powers *= core.args[0] ** coeff
        else:
            rest += term
    return powers * sp.exp(rest)


# ---------------------------------------------------------------------------
# inverses

def _round_trip(candidate, forward, var, y, domain) -> bool:
    grid = np.linspace(domain[0], domain[1], 23)
    with np.errstate(all="ignore"):
        image = evaluate_array(forward, {var.name: grid})
        back = evaluate_array(candidate, {y.name: image})
    ok = np.isfinite(back)
    return bool(ok.sum() > 10 and np.allclose(back[ok], grid[ok], rtol=1e-9, atol=1e-9))


def _pattern_inverse(F, var, y):
    lin = _linear(F, var)
    if lin is not None:
        a, b = lin
        return (y - b) / a
    num, den = sp.fraction(sp.together(F))
    ln, ld = _linear(num, var), _linear(den, var)
    if ln is not None and ld is not None:
        (a, b), (c, d) = ln, ld
        return (d * y - b) / (a - c * y)
    const, core = F.as_independent(var, as_Add=True)
    scale, core = core.as_independent(var, as_Add=False)
    if core.func is sp.exp:
        lin = _linear(core.args[0], var)
        if lin is not None:
            return (sp.log((y - const) / scale) - lin[1]) / lin[0]
    if core.func is sp.log:
        lin = _linear(core.args[0], var)
        if lin is not None:
            return (sp.exp((y - const) / scale) - lin[1]) / lin[0]
    if core.func is sp.tan:
        lin = _linear(core.args[0], var)
        if lin is not None:
            return (sp.atan((y - const) / scale) - lin[1]) / lin[0]
    if core.is_Pow and not core.exp.has(var):
        lin = _linear(core.base, var)
        if lin is not None:
            return (((y - const) / scale) ** (1 / core.exp) - lin[1]) / lin[0]
    return None


def invert_function(F, var=x, y=None, *, numeric_bindings=None,
                    domain=(1.0, 2.0)) -> sp.Expr:
    """Solve y = F(var) for var in closed form.

    Candidates are accepted when they round-trip numerically on ``domain``
    (after binding any symbolic constants via ``numeric_bindings``).
    """
    F = sp.sympify(F)
    y = y if y is not None else sp.Dummy("y", real=True)
    if not F.has(var):
        raise NotInvertible(f"{F} does not depend on {var}")
    candidates = []
    found = _pattern_inverse(F, var, y)
    if found is not None:
        candidates.append(found)
    try:
        candidates += [s for s in sp.solve(sp.Eq(y, F), var)
                       if not s.has(sp.LambertW, sp.RootOf, sp.CRootOf)]
    except (NotImplementedError, ValueError):
        pass
    if not candidates:
        raise NotInvertible(f"no closed-form inverse of {F}")
    check_F, subs = F, dict(numeric_bindings or {})
    free = (F.free_symbols - {var})
    if free - set(subs):
        missing = free - set(subs)
        subs.update({s: sp.Rational(7, 5) + sp.Rational(k, 7) for k, s in enumerate(sorted(missing, key=str))})
    check_F = F.subs(subs)
    for cand in candidates:
        if _round_trip(cand.subs(subs), check_F, var, y, domain):
            return simplify(cand)
    if len(candidates) == 1 and found is not None:
        return simplify(found)
    raise NotInvertible(f"no inverse of {F} passes the round-trip check")
