"""Similarity reductions of the two three-dimensional rows (inverse-square source and the
n = -4/3 exponential-density row), their reduced ODEs and closed-form solutions."""

from __future__ import annotations

from dataclasses import dataclass, field

import sympy as sp

from .equation import RDEquation, make_equation, residual
from .equivgroup import PointTransformation, apply, invert
from .expr import is_zero, simplify, symbol, t, tidy, to_text, u, x
from .symmetry import VectorField

__all__ = ["Ansatz", "ExactSolution", "CaseMismatch", "BranchError", "OMEGA", "PHI",
           "PHI_W", "PHI_WW", "list_reductions", "reduce_equation", "exact_solution",
           "pull_back", "case_equation", "reduction_generators"]

OMEGA = sp.Symbol("omega", positive=True)
PHI = sp.Symbol("phi", positive=True)
PHI_W = sp.Symbol("phi_w", real=True)
PHI_WW = sp.Symbol("phi_ww", real=True)
_S = sp.Symbol("s", real=True)
_PHI_WWW = sp.Symbol("phi_www", real=True)

n_sym, alpha_sym = symbol("n"), symbol("alpha")
mu_sym, nu_sym = symbol("mu"), symbol("nu")


class CaseMismatch(ValueError):
    pass


class BranchError(ValueError):
    pass


@dataclass(frozen=True)
class Ansatz:
    """u = prefactor(t,x) * phi(omega(t,x)); ``t_of``/``x_of`` invert to (omega, s).

    Two-dimensional rows have omega = 0 and phi standing for the constant C.
    """
    row: str
    subalgebra: str
    omega: sp.Expr
    prefactor: sp.Expr
    t_of: sp.Expr
    x_of: sp.Expr
    case: int

    @property
    def template(self) -> sp.Expr:
        return self.prefactor * PHI

    def to_json(self) -> dict:
        return {"row": self.row, "subalgebra": self.subalgebra, "omega": to_text(self.omega),
                "template": to_text(self.template)}


@dataclass
class ExactSolution:
    u: sp.Expr
    equation: RDEquation
    validity: str = ""
    constants: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"u": to_text(self.u), "equation": self.equation.literal(),
                "validity": self.validity}


# ---------------------------------------------------------------------------
# rows

def case_equation(case: int, n=None, alpha=None) -> RDEquation:
    alpha = alpha_sym if alpha is None else sp.sympify(alpha)
    if case == 9:
        n = n_sym if n is None else sp.sympify(n)
        return make_equation(1, 1, alpha * x ** -2, n, n + 1)
    if case == 12:
        return make_equation(sp.exp(x), 1, alpha, sp.Rational(-4, 3), sp.Rational(-1, 3))
    raise CaseMismatch(f"reductions are tabulated for rows 9 and 12, not {case}")


def reduction_generators(case: int, n=None) -> tuple[VectorField, VectorField, VectorField]:
    """(X1, X2, X3) with [X1, X2] = X1 and X3 central; subalgebra tags refer to these."""
    if case == 9:
        n = n_sym if n is None else sp.sympify(n)
        return (VectorField(1, 0, 0), VectorField(t, 0, -u / n),
                VectorField(0, x, 2 * u / n))
    if case == 12:
        q = sp.Rational(3, 4)
        return VectorField(1, 0, 0), VectorField(t, 0, q * u), VectorField(0, 1, -q * u)
    raise CaseMismatch(f"reductions are tabulated for rows 9 and 12, not {case}")


def list_reductions(case: int, n=None) -> list[Ansatz]:
    """One-dimensional reductions (both signs where the subalgebra has one) and the
    stationary two-dimensional ansatz."""
    mu = mu_sym
    if case == 9:
        n = n_sym if n is None else sp.sympify(n)
        rows = [Ansatz("9.1", "X2 - mu*X3", x * t ** mu, t ** (-(1 + 2 * mu) / n),
                       _S, OMEGA * _S ** -mu, 9),
                Ansatz("9.2", "X3", t, x ** (2 / n), OMEGA, _S, 9)]
        for sign, tag in ((1, "+"), (-1, "-")):
            rows.append(Ansatz(f"9.3{tag}", f"X3 {tag} X1", x * sp.exp(-sign * t),
                               sp.exp(sign * 2 * t / n), _S, OMEGA * sp.exp(sign * _S), 9))
        rows.append(Ansatz("9.4", "X1", x, sp.S.One, _S, OMEGA, 9))
        rows.append(Ansatz("9.D", "<X1, X3 - nu*X2>", sp.S.Zero, x ** ((nu_sym + 2) / n),
                           t, _S, 9))
        return rows
    if case == 12:
        q = sp.Rational(3, 4)
        rows = [Ansatz("12.1", "X2 - mu*X3", x + mu * sp.log(t), t ** (q * (mu + 1)),
                       _S, OMEGA - mu * sp.log(_S), 12),
                Ansatz("12.2", "X3", t, sp.exp(-q * x), OMEGA, _S, 12)]
        for sign, tag in ((1, "+"), (-1, "-")):
            rows.append(Ansatz(f"12.3{tag}", f"X3 {tag} X1", x - sign * t,
                               sp.exp(-sign * q * t), _S, OMEGA + sign * _S, 12))
        rows.append(Ansatz("12.4", "X1", x, sp.S.One, _S, OMEGA, 12))
        rows.append(Ansatz("12.D", "<X1, X3 - nu*X2>", sp.S.Zero,
                           sp.exp(-sp.Rational(3, 4) * (nu_sym + 1) * x), t, _S, 12))
        return rows
    raise CaseMismatch(f"reductions are tabulated for rows 9 and 12, not {case}")


def stationary_exponent_equation(case: int, n=None, alpha=None):
    """Algebraic condition on sigma for u = C x^sigma (row 9) or C e^(sigma x) (row 12)."""
    s = symbol("sigma")
    alpha = alpha_sym if alpha is None else sp.sympify(alpha)
    if case == 9:
        n = n_sym if n is None else sp.sympify(n)
        return s, (n + 1) * s ** 2 - s + alpha
    return s, s ** 2 - 3 * alpha


# ---------------------------------------------------------------------------
# reduction

def _matches(eq: RDEquation, case: int) -> bool:
    if case == 9:
        return (eq.f == 1 and sp.simplify(eq.m - eq.n - 1) == 0
                and not tidy(eq.h * x ** 2).has(x))
    return (eq.n == sp.Rational(-4, 3) and sp.simplify(eq.f - sp.exp(x)) == 0
            and not eq.h.has(x) and (eq.h == 0 or eq.m == sp.Rational(-1, 3)))


def _chain(G, var, omega_d):
    """Total derivative along u = A phi(omega) with phi, phi_w, phi_ww as jet symbols."""
    return (sp.diff(G, var) + sp.diff(G, PHI) * PHI_W * omega_d
            + sp.diff(G, PHI_W) * PHI_WW * omega_d + sp.diff(G, PHI_WW) * _PHI_WWW * omega_d)


def reduce_equation(eq: RDEquation, a: Ansatz) -> sp.Expr:
    """Reduced ODE in (omega, phi, phi_w, phi_ww), normalized to a common-factor-free form."""
    if not _matches(eq, a.case):
        raise CaseMismatch(f"equation {eq} is not of row {a.case}")
    n = eq.n
    U = a.prefactor * PHI
    w_t, w_x = sp.diff(a.omega, t), sp.diff(a.omega, x)
    U_t = _chain(U, t, w_t)
    U_x = _chain(U, x, w_x)
    flux = U ** n * U_x
    E = eq.f * U_t - _chain(flux, x, w_x) - eq.h * U ** eq.m
    E = sp.expand(sp.powsimp(sp.expand(E), force=True))
    E = E.subs({t: a.t_of, x: a.x_of}, simultaneous=True)
    E = sp.expand(sp.powsimp(sp.expand_power_base(sp.expand(E), force=True), force=True))
    terms = sp.Add.make_args(E)
    _, lead = terms[0].as_independent(_S, as_Add=False)
    quotient = sp.expand(E / lead)
    reduced = quotient.subs(_S, 1)
    reduced = tidy(sp.powdenest(sp.expand_power_base(reduced, force=True), force=True))
    if not is_zero(quotient - reduced, positive=("u", "s", "omega", "phi")):
        raise CaseMismatch(f"ansatz {a.row} does not reduce the equation")
    return reduced


# ---------------------------------------------------------------------------
# exact solutions

def _residual_ok(eq: RDEquation, u_expr) -> bool:
    return is_zero(residual(eq, u_expr), x_range=(1.0, 2.0))


def _alpha_prime(n, alpha):
    return 1 - 4 * alpha * (n + 1)


def exact_solution(case: int, branch: str, constants: dict | None = None) -> ExactSolution:
    """Closed-form solution of a tabulated branch; residual is checked on construction.

    Branches: "stationary", "9.2", "9.4", "12.2", "12.4".  ``constants`` supplies n,
    alpha, C, C1, C2 (defaults C=1, C1=1, C2=0) and optionally ``sigma`` or ``regime``.
    """
    c = {k: sp.nsimplify(v) if isinstance(v, float) else sp.sympify(v)
         for k, v in (constants or {}).items()}
    n = c.get("n", sp.Rational(-4, 3) if case == 12 else n_sym)
    alpha = c.get("alpha", alpha_sym)
    C, C1, C2 = c.get("C", sp.S.One), c.get("C1", sp.S.One), c.get("C2", sp.S.Zero)
    eq = case_equation(case, n, alpha)
    regime = c.get("regime")
    if case == 9 and branch == "stationary":
        s, poly = stationary_exponent_equation(9, n, alpha)
        if "sigma" in c:
            sigma = c["sigma"]
            if not is_zero(poly.subs(s, sigma)):
                raise BranchError(f"sigma={sigma} does not solve {poly} = 0")
        else:
            disc = _alpha_prime(n, alpha)
            if disc.is_number and disc < 0:
                raise BranchError("no real stationary exponent for alpha' < 0")
            sigma = (1 + sp.sqrt(disc)) / (2 * (n + 1))
        sol, validity = C * x ** sigma, f"(n+1)sigma^2 - sigma + alpha = 0, sigma={sigma}"
    elif case == 12 and branch == "stationary":
        if alpha.is_number and alpha < 0:
            raise BranchError("sigma^2 = 3 alpha has no real root for alpha < 0")
        sigma = c.get("sigma", sp.sqrt(3 * alpha))
        if not is_zero(sigma ** 2 - 3 * alpha):
            raise BranchError(f"sigma={sigma} does not satisfy sigma^2 = 3 alpha")
        sol, validity = C * sp.exp(sigma * x), f"sigma^2 = 3 alpha, sigma={sigma}"
    elif case == 9 and branch == "9.2":
        phi = (C - (alpha * n + 2 + 4 / n) * t) ** (-1 / n)
        sol, validity = x ** (2 / n) * phi, "C - (alpha n + 2 + 4/n) t > 0"
    elif case == 9 and branch == "9.4":
        ap = _alpha_prime(n, alpha)
        actual = _regime(ap)
        _check_regime(regime, actual, "alpha'")
        w = x
        if actual == "zero":
            sol = C1 * w ** (1 / (2 * (n + 1))) * (sp.log(w) + C2) ** (1 / (n + 1))
        elif actual == "positive":
            k1, k2 = (1 + sp.sqrt(ap)) / 2, (1 - sp.sqrt(ap)) / 2
            sol = (C1 * w ** k1 + C2 * w ** k2) ** (1 / (n + 1))
        else:
            sig = sp.sqrt(-ap) / 2
            sol = (w ** (1 / (2 * (n + 1)))
                   * (C1 * sp.sin(sig * sp.log(w)) + C2 * sp.cos(sig * sp.log(w))) ** (1 / (n + 1)))
        validity = f"alpha' = 1 - 4 alpha (n+1) {_REGIME_TEXT[actual]}"
    elif case == 12 and branch == "12.2":
        phi = (C + (sp.Rational(4, 3) * alpha - sp.Rational(1, 4)) * t) ** sp.Rational(3, 4)
        sol, validity = sp.exp(-sp.Rational(3, 4) * x) * phi, "C + (4 alpha/3 - 1/4) t > 0"
    elif case == 12 and branch == "12.4":
        actual = _regime(alpha)
        _check_regime(regime, actual, "alpha")
        w = x
        if actual == "zero":
            sol = C1 * (w + C2) ** -3
        elif actual == "positive":
            k = sp.sqrt(alpha / 3)
            sol = (C1 * sp.exp(k * w) + C2 * sp.exp(-k * w)) ** -3
        else:
            sig = sp.sqrt(-alpha / 3)
            sol = (C1 * sp.sin(sig * w) + C2 * sp.cos(sig * w)) ** -3
        validity = f"alpha {_REGIME_TEXT[actual]}"
    else:
        raise BranchError(f"no closed form for case {case}, branch {branch!r}")
    out = ExactSolution(sol, eq, validity, c)
    if _all_bound(sol, eq) and not _residual_ok(eq, sol):
        raise BranchError(f"residual check failed for {to_text(sol)}")
    return out


_REGIME_TEXT = {"zero": "= 0", "positive": "> 0", "negative": "< 0"}


def _regime(value):
    value = sp.sympify(value)
    if not value.is_number:
        raise BranchError(f"sign of {value} is not determined; bind the constants")
    if value == 0:
        return "zero"
    return "positive" if value > 0 else "negative"


def _check_regime(requested, actual, label):
    if requested is not None and str(requested) != actual:
        raise BranchError(f"branch for {label} {_REGIME_TEXT[str(requested)]} requested, "
                          f"but {label} {_REGIME_TEXT[actual]}")


def _all_bound(sol, eq) -> bool:
    free = set()
    for e in (sol, eq.f, eq.h, eq.n, eq.m):
        free |= sp.sympify(e).free_symbols
    return free <= {t, x}


def pull_back(sol: ExactSolution, tr: PointTransformation) -> ExactSolution:
    """Solution of the pre-image equation: u = sol(T(t), X(x)) / V(t, x).

    ``tr`` maps the pre-image equation onto ``sol.equation``.
    """
    pre = apply(invert(tr), sol.equation)
    u_new = tidy(sol.u.xreplace({t: tr.T, x: tr.X}) / tr.V)
    return ExactSolution(u_new, pre, sol.validity, dict(sol.constants))
