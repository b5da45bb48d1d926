"""Local conservation laws of gauged equations and their transformation rules."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import sympy as sp

from .calculus import NotIntegrable, antiderivative
from .equation import RDEquation, jet_operator, u_t_on_shell
from .equivgroup import PointTransformation, _x_inverse, invert_function
from .expr import sampling_seed, evaluate_array, is_zero, simplify, t, tidy, to_text, u, u_t, u_x, x
from .symmetry import VectorField, is_symmetry, total_t, total_x

__all__ = ["ConservedVector", "NoClosedFormFundamentalPair", "NotASymmetry",
           "fundamental_pair", "conservation_laws", "divergence", "verify_divergence",
           "characteristic_of", "characteristic_identity", "transform_conserved_vector",
           "lie_derivative_conserved_vector", "same_span"]


class NoClosedFormFundamentalPair(ValueError):
    """The multiplier ODE has no tabulated solution; ``ode`` holds it."""

    def __init__(self, message, ode=None):
        super().__init__(message)
        self.ode = ode


class NotASymmetry(ValueError):
    pass


@dataclass(frozen=True)
class ConservedVector:
    F: sp.Expr
    G: sp.Expr
    characteristic: sp.Expr

    def to_json(self) -> dict:
        return {"F": to_text(self.F), "G": to_text(self.G),
                "characteristic": to_text(self.characteristic)}


# ---------------------------------------------------------------------------
# multiplier ODE  phi'' + k(x) phi = 0

def _euler_pair(k2):
    """phi'' + k2/x^2 phi = 0 via x^s with s(s-1) + k2 = 0."""
    disc = sp.nsimplify(1 - 4 * k2)
    if disc > 0:
        r = sp.sqrt(disc)
        return x ** ((1 + r) / 2), x ** ((1 - r) / 2)
    if disc == 0:
        return sp.sqrt(x), sp.sqrt(x) * sp.log(x)
    nu = sp.sqrt(-disc) / 2
    return sp.sqrt(x) * sp.cos(nu * sp.log(x)), sp.sqrt(x) * sp.sin(nu * sp.log(x))


def fundamental_pair(k):
    """Two independent solutions of phi'' + k(x) phi = 0 for k in {0, const, c/x^2}."""
    k = tidy(sp.sympify(k))
    if k == 0:
        return sp.S.One, x
    if not k.has(x):
        if k.free_symbols:
            raise NoClosedFormFundamentalPair("sign of the constant coefficient is unknown",
                                              _ode(k))
        if k < 0:
            r = sp.sqrt(-k)
            return sp.exp(r * x), sp.exp(-r * x)
        r = sp.sqrt(k)
        return sp.cos(r * x), sp.sin(r * x)
    c = tidy(k * x ** 2)
    if not c.has(x) and not c.free_symbols:
        return _euler_pair(c)
    raise NoClosedFormFundamentalPair(f"no closed-form solutions of phi'' + ({to_text(k)}) phi = 0",
                                      _ode(k))


def _ode(k):
    phi = sp.Function("phi")
    return sp.Eq(phi(x).diff(x, 2) + k * phi(x), 0)


# ---------------------------------------------------------------------------
# construction

def _law(eq: RDEquation, phi, weight=sp.S.One, source_flux=sp.S.Zero) -> ConservedVector:
    n = eq.n
    phi_x = sp.diff(phi, x)
    if n == -1:
        G = -phi * u_x / u + phi_x * sp.log(u) + source_flux
    else:
        G = -phi * u ** n * u_x + phi_x * u ** (n + 1) / (n + 1)
    return ConservedVector(simplify(weight * phi * eq.f * u), simplify(weight * G),
                           simplify(weight * phi))


def conservation_laws(eq: RDEquation) -> list[ConservedVector]:
    """Basis of the space of conservation laws (empty when only trivial laws exist)."""
    n, m, h = eq.n, eq.m, eq.h
    if not eq.gauged:
        raise ValueError("conservation laws are listed for g = 1")
    if sp.simplify(m - (n + 1)) == 0:
        if n == -1:
            laws = []
            for phi in (x, sp.S.One):
                try:
                    extra = -antiderivative(tidy(phi * h)) if h != 0 else sp.S.Zero
                except NotIntegrable as exc:
                    raise NoClosedFormFundamentalPair(str(exc), _ode(0)) from exc
                laws.append(_law(eq, phi, source_flux=extra))
            return laws
        pair = fundamental_pair((n + 1) * h)
        return [_law(eq, phi) for phi in pair]
    if m == 1 and h != 0:
        mu = tidy(h / eq.f)
        if not mu.has(x):
            w = sp.exp(-mu * t)
            return [_law(eq, x, w), _law(eq, sp.S.One, w)]
    return []


# ---------------------------------------------------------------------------
# verification

def divergence(cv: ConservedVector, eq: RDEquation | None = None) -> sp.Expr:
    """D_t F + D_x G, restricted to solutions of ``eq`` when given."""
    div = total_t(cv.F) + total_x(cv.G)
    if eq is not None:
        div = div.xreplace({u_t: u_t_on_shell(eq)})
    div = simplify(div)
    if div != 0 and sp.cancel(sp.together(div)) == 0:
        return sp.S.Zero
    return div


def verify_divergence(cv: ConservedVector, eq: RDEquation, *, x_range=(0.5, 2.0)) -> bool:
    return is_zero(divergence(cv, eq), x_range=x_range)


def characteristic_of(cv: ConservedVector, eq: RDEquation) -> sp.Expr:
    """lambda with D_t F + D_x G = lambda * (equation), read off the u_t coefficient."""
    return tidy(sp.diff(total_t(cv.F) + total_x(cv.G), u_t) / eq.f)


def characteristic_identity(cv: ConservedVector, eq: RDEquation) -> bool:
    div = total_t(cv.F) + total_x(cv.G)
    return is_zero(div - cv.characteristic * jet_operator(eq))


# ---------------------------------------------------------------------------
# transformations

def transform_conserved_vector(tr: PointTransformation, cv: ConservedVector,
                               image: RDEquation) -> ConservedVector:
    """Conserved vector of the image equation: F/X_x and G/T_t in the new variables."""
    T_t, X_x = tr.jacobian_factors()
    V = tr.V
    y = sp.Dummy("tt", real=True)
    T_inv = t if tr.T == t else invert_function(tr.T, t, y, domain=(0.1, 0.9)).xreplace({y: t})
    X_inv = _x_inverse(tr.X)
    U, U_x = sp.Dummy("U", positive=True), sp.Dummy("U_x", real=True)
    old_ux = X_x * U_x / V - U * sp.diff(V, x) / V ** 2
    F = cv.F / X_x
    G = cv.G / T_t
    swap = {u_x: old_ux, u: U / V}
    back = {t: T_inv, x: X_inv}
    F, G = (sp.sympify(e).xreplace(swap).xreplace(back).xreplace({U: u, U_x: u_x})
            for e in (F, G))
    F, G = tidy(F), tidy(G)
    out = ConservedVector(F, G, sp.S.Zero)
    return ConservedVector(F, G, characteristic_of(out, image))


def lie_derivative_conserved_vector(X: VectorField, cv: ConservedVector,
                                    eq: RDEquation, *, check: bool = True) -> ConservedVector:
    """Action of a symmetry on a conserved vector (first prolongation)."""
    if check and not is_symmetry(X, eq):
        raise NotASymmetry(f"{X} is not a symmetry of {eq}")
    tau, xi, eta = X.tau, X.xi, X.eta
    eta_x = total_x(eta) - u_t * total_x(tau) - u_x * total_x(xi)
    eta_t = total_t(eta) - u_t * total_t(tau) - u_x * total_t(xi)

    def act(E):
        return (tau * sp.diff(E, t) + xi * sp.diff(E, x) + eta * sp.diff(E, u)
                + eta_x * sp.diff(E, u_x) + eta_t * sp.diff(E, u_t))

    F, G = cv.F, cv.G
    F_new = -act(F) + total_x(tau) * G - total_x(xi) * F
    G_new = -act(G) + total_t(xi) * F - total_t(tau) * G
    shell = {u_t: u_t_on_shell(eq)}
    F_new, G_new = (simplify(sp.sympify(e).xreplace(shell)) for e in (F_new, G_new))
    out = ConservedVector(F_new, G_new, sp.S.Zero)
    return ConservedVector(F_new, G_new, characteristic_of(out, eq))


def same_span(a: list[ConservedVector], b: list[ConservedVector], *, seed: int | None = None,
              x_range=(1.0, 2.0), tol: float = 1e-8) -> bool:
    """Equal spans modulo trivial laws, compared through sampled characteristics."""
    if len(a) != len(b):
        return False
    if not a:
        return True
    rng = np.random.default_rng(sampling_seed() if seed is None else seed)
    env = {"t": rng.uniform(0.1, 0.9, 24), "x": rng.uniform(*x_range, 24)}

    def rows(vs):
        return np.stack([np.broadcast_to(evaluate_array(v.characteristic, env), (24,))
                         for v in vs])

    A, B = rows(a), rows(b)
    ra = np.linalg.matrix_rank(A, tol * np.abs(A).max())
    rab = np.linalg.matrix_rank(np.vstack([A, B]), tol * np.abs(np.vstack([A, B])).max())
    return bool(ra == rab == len(a))
