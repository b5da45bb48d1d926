"""The class f(x) u_t = (g(x) u^n u_x)_x + h(x) u^m as a value type."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import sympy as sp

from .expr import (evaluate_array, is_zero, parse, simplify, t, tidy, to_text, u, u_t,
                   u_x, u_xx, x)

__all__ = ["RDEquation", "InvalidEquation", "make_equation", "parse_equation",
           "residual", "jet_operator", "u_t_on_shell", "gauge_to_g1"]


class InvalidEquation(ValueError):
    pass


@dataclass(frozen=True)
class RDEquation:
    f: sp.Expr
    g: sp.Expr
    h: sp.Expr
    n: sp.Expr
    m: sp.Expr

    def literal(self) -> str:
        return "; ".join(f"{k}={to_text(getattr(self, k))}" for k in "fghnm")

    def __str__(self) -> str:
        return self.literal()

    @property
    def gauged(self) -> bool:
        return sp.simplify(self.g - 1) == 0

    def subs(self, bindings) -> "RDEquation":
        b = {sp.Symbol(k, real=True) if isinstance(k, str) else k: v for k, v in bindings.items()}
        return make_equation(*(sp.sympify(getattr(self, k)).subs(b) for k in "fghnm"))

    def to_json(self) -> dict:
        return {k: to_text(getattr(self, k)) for k in "fghnm"}


def _vanishes_on_samples(e) -> bool:
    e = sp.sympify(e)
    if e == 0:
        return True
    free = e.free_symbols - {x}
    if free:
        return False
    vals = evaluate_array(e, {"x": np.linspace(0.5, 3.0, 41)})
    vals = vals[np.isfinite(vals)]
    return vals.size > 0 and bool(np.all(vals == 0))


def make_equation(f, g, h, n, m=None) -> RDEquation:
    """Validated equation; h == 0 forces m = n + 1."""
    f, g, h, n = (tidy(sp.sympify(v)) for v in (f, g, h, n))
    if n.is_zero or sp.simplify(n) == 0:
        raise InvalidEquation("n=0 excluded")
    if _vanishes_on_samples(f) or _vanishes_on_samples(g):
        raise InvalidEquation("f*g must not vanish")
    if h == 0 or _vanishes_on_samples(h):
        h, m = sp.S.Zero, n + 1
    if m is None:
        raise InvalidEquation("m is required when h is nonzero")
    return RDEquation(f, g, h, n, sp.sympify(sp.nsimplify(m) if isinstance(m, float) else m))


def parse_equation(literal: str) -> RDEquation:
    """Parse ``f=<expr>; g=<expr>; h=<expr>; n=<expr>; m=<expr>``.

    g defaults to 1, h to 0, f to 1; m may be omitted when h is 0.
    """
    parts = {}
    for chunk in literal.split(";"):
        if not chunk.strip():
            continue
        key, sep, value = chunk.partition("=")
        key = key.strip()
        if not sep or key not in ("f", "g", "h", "n", "m"):
            raise InvalidEquation(f"bad equation component {chunk.strip()!r}")
        parts[key] = parse(value)
    if "n" not in parts:
        raise InvalidEquation("n is required")
    return make_equation(parts.get("f", 1), parts.get("g", 1), parts.get("h", 0),
                         parts["n"], parts.get("m"))


def residual(eq: RDEquation, sol) -> sp.Expr:
    """f*u_t - (g*u^n*u_x)_x - h*u^m for an explicit u(t, x)."""
    sol = sp.sympify(sol)
    flux = eq.g * sol ** eq.n * sp.diff(sol, x)
    return simplify(eq.f * sp.diff(sol, t) - sp.diff(flux, x) - eq.h * sol ** eq.m)


def jet_operator(eq: RDEquation) -> sp.Expr:
    """The equation's left side minus right side on second-order jet variables."""
    n, g = eq.n, eq.g
    return (eq.f * u_t - g * u ** n * u_xx - n * g * u ** (n - 1) * u_x ** 2
            - sp.diff(g, x) * u ** n * u_x - eq.h * u ** eq.m)


def u_t_on_shell(eq: RDEquation) -> sp.Expr:
    n, g = eq.n, eq.g
    rhs = (g * u ** n * u_xx + n * g * u ** (n - 1) * u_x ** 2
           + sp.diff(g, x) * u ** n * u_x + eq.h * u ** eq.m)
    return rhs / eq.f


def gauge_to_g1(eq: RDEquation):
    """Map g to 1 with x~ = int dx/g; returns (gauged equation, transformation)."""
    from .calculus import antiderivative
    from .equivgroup import PointTransformation, apply

    if eq.gauged:
        tr = PointTransformation(t, x, sp.S.One, "custom", {})
        return eq, tr
    X = antiderivative(1 / eq.g, x)
    tr = PointTransformation(t, X, sp.S.One, "custom", {"gauge": True})
    return apply(tr, eq), tr


def is_exact_solution(eq: RDEquation, sol) -> bool:
    return is_zero(residual(eq, sol))
