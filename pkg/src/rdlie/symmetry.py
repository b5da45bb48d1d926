"""Lie point symmetries: second prolongation, invariance tests, classification."""

from __future__ import annotations

from dataclasses import dataclass, field

import sympy as sp

from .equation import RDEquation, jet_operator, u_t_on_shell
from .expr import sampling_seed, is_zero, simplify, t, tidy, to_text, u, u_t, u_tx, u_x, u_xx, u_xxx, x

__all__ = ["VectorField", "total_x", "total_t", "prolong2_residual", "is_symmetry",
           "commutator", "in_span", "classify"]


@dataclass(frozen=True)
class VectorField:
    tau: sp.Expr = sp.S.Zero
    xi: sp.Expr = sp.S.Zero
    eta: sp.Expr = sp.S.Zero

    def __post_init__(self):
        for name in ("tau", "xi", "eta"):
            object.__setattr__(self, name, sp.sympify(getattr(self, name)))

    def __add__(self, other):
        return VectorField(self.tau + other.tau, self.xi + other.xi, self.eta + other.eta)

    def __sub__(self, other):
        return VectorField(self.tau - other.tau, self.xi - other.xi, self.eta - other.eta)

    def __rmul__(self, c):
        return VectorField(c * self.tau, c * self.xi, c * self.eta)

    def apply_to(self, F) -> sp.Expr:
        return self.tau * sp.diff(F, t) + self.xi * sp.diff(F, x) + self.eta * sp.diff(F, u)

    def simplified(self) -> "VectorField":
        return VectorField(tidy(self.tau), tidy(self.xi), tidy(self.eta))

    def is_zero_field(self) -> bool:
        return all(is_zero(c) for c in (self.tau, self.xi, self.eta))

    def __str__(self):
        parts = []
        for coeff, d in ((self.tau, "D_t"), (self.xi, "D_x"), (self.eta, "D_u")):
            coeff = tidy(coeff)
            if coeff != 0:
                parts.append(f"({to_text(coeff)})*{d}")
        return " + ".join(parts) or "0"

    def to_json(self) -> dict:
        return {"tau": to_text(self.tau), "xi": to_text(self.xi), "eta": to_text(self.eta)}


# jet coordinates of order <= 3 used in total derivatives
u_tt = sp.Symbol("u_tt", real=True)
u_txx = sp.Symbol("u_txx", real=True)
u_ttx = sp.Symbol("u_ttx", real=True)


def total_x(F) -> sp.Expr:
    return (sp.diff(F, x) + u_x * sp.diff(F, u) + u_tx * sp.diff(F, u_t)
            + u_xx * sp.diff(F, u_x) + u_txx * sp.diff(F, u_tx) + u_xxx * sp.diff(F, u_xx))


def total_t(F) -> sp.Expr:
    return (sp.diff(F, t) + u_t * sp.diff(F, u) + u_tt * sp.diff(F, u_t)
            + u_tx * sp.diff(F, u_x) + u_ttx * sp.diff(F, u_tx) + u_txx * sp.diff(F, u_xx))


def _prolongation(X: VectorField):
    tau, xi, eta = X.tau, X.xi, X.eta
    eta_t = total_t(eta) - u_t * total_t(tau) - u_x * total_t(xi)
    eta_x = total_x(eta) - u_t * total_x(tau) - u_x * total_x(xi)
    eta_xx = total_x(eta_x) - u_tx * total_x(tau) - u_xx * total_x(xi)
    return eta_t, eta_x, eta_xx


def prolong2_residual(X: VectorField, eq: RDEquation) -> sp.Expr:
    """Second prolongation of X applied to the equation, restricted to solutions."""
    E = jet_operator(eq)
    eta_t, eta_x, eta_xx = _prolongation(X)
    action = (X.tau * sp.diff(E, t) + X.xi * sp.diff(E, x) + X.eta * sp.diff(E, u)
              + eta_t * sp.diff(E, u_t) + eta_x * sp.diff(E, u_x) + eta_xx * sp.diff(E, u_xx))
    ut = u_t_on_shell(eq)
    shell = {u_t: ut}
    if action.has(u_tx):
        shell[u_tx] = total_x(ut)
    return simplify(action.xreplace(shell))


def is_symmetry(X: VectorField, eq: RDEquation, *, bindings=None, points: int = 100,
                seed: int | None = None, x_range=(0.5, 2.0)) -> bool:
    return is_zero(prolong2_residual(X, eq), bindings=bindings, points=points, seed=seed,
                   x_range=x_range)


def commutator(X: VectorField, Y: VectorField) -> VectorField:
    comps = []
    for a, b in ((X.tau, Y.tau), (X.xi, Y.xi), (X.eta, Y.eta)):
        comps.append(simplify(X.apply_to(b) - Y.apply_to(a)))
    return VectorField(*comps)


def in_span(Z: VectorField, basis: list[VectorField], *, points: int = 12,
            seed: int | None = None, tol: float = 1e-9) -> bool:
    """Least-squares membership test of Z in the span of ``basis``."""
    import numpy as np
    from .expr import evaluate_array

    rng = np.random.default_rng(sampling_seed() if seed is None else seed)
    env = {"t": rng.uniform(0.5, 1.5, points), "x": rng.uniform(1.0, 2.0, points),
           "u": rng.uniform(0.5, 2.0, points)}

    def sample(F):
        return np.concatenate([evaluate_array(c, env) for c in (F.tau, F.xi, F.eta)])

    z = sample(Z)
    if not basis:
        return bool(np.max(np.abs(z)) < tol)
    A = np.stack([sample(B) for B in basis], axis=1)
    coef, *_ = np.linalg.lstsq(A, z, rcond=None)
    return bool(np.max(np.abs(A @ coef - z)) <= tol * (1 + np.max(np.abs(z))))


def classify(eq: RDEquation, **kwargs):
    """Table row of a gauged equation; see ``rdlie.classify.classify``."""
    from .classify import classify as _classify
    return _classify(eq, **kwargs)
