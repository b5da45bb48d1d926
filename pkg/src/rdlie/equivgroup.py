"""Point transformations t~=T(t), x~=X(x), u~=V(t,x) u acting on the class.

Every group element is stored by its forward maps.  ``apply`` works for any
such triple: it derives the image coefficients directly from the chain rule
and rejects triples that do not map the class into itself.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np
import sympy as sp

from .calculus import NotIntegrable, NotInvertible, antiderivative, invert_function
from .equation import RDEquation, make_equation
from .expr import (as_rational, evaluate_array, is_zero, num_equivalent, parse, simplify,
                   strip_abs, symbol, t, tidy, to_text, u, x)

__all__ = [
    "GROUPS", "PointTransformation", "ConstraintViolation", "MissingBinding",
    "InadmissibleTransformation", "UnsupportedFamily", "NoWitness", "build_transformation",
    "ghat_psi", "apply", "equation_multiplier", "compose", "invert", "identity",
    "AdmissibilityReport", "verify_admissible_relations", "AdmissibleDecision",
    "decide_admissible", "equations_match",
]

GROUPS = ("G", "Ghat", "G1", "Gmn1", "G1mn1", "Gm1const", "additional", "custom")


class ConstraintViolation(ValueError):
    pass


class MissingBinding(ValueError):
    pass


class InadmissibleTransformation(ValueError):
    pass


class UnsupportedFamily(ValueError):
    pass


@dataclass(frozen=True)
class PointTransformation:
    T: sp.Expr
    X: sp.Expr
    V: sp.Expr
    group: str = "custom"
    params: Mapping = field(default_factory=dict, compare=False)

    def __post_init__(self):
        for name in ("T", "X", "V"):
            object.__setattr__(self, name, sp.sympify(getattr(self, name)))

    def to_json(self) -> dict:
        params = {k: (to_text(v) if isinstance(v, sp.Basic) else v)
                  for k, v in sorted(self.params.items())}
        return {"group": self.group, "T": to_text(self.T), "X": to_text(self.X),
                "V": to_text(self.V), "params": params}

    @classmethod
    def from_json(cls, data: Mapping) -> "PointTransformation":
        return cls(parse(data["T"]), parse(data["X"]), parse(data["V"]),
                   data.get("group", "custom"), dict(data.get("params", {})))

    def jacobian_factors(self):
        return sp.diff(self.T, t), sp.diff(self.X, x)


def identity() -> PointTransformation:
    return PointTransformation(t, x, sp.S.One, "custom", {})


# ---------------------------------------------------------------------------
# construction

def _get(params, name, default=None):
    if name in params:
        v = params[name]
        return parse(v) if isinstance(v, str) else sp.sympify(v)
    if default is None:
        raise MissingBinding(f"missing parameter {name!r}")
    return sp.sympify(default)


def _nonzero(value, label):
    if value.is_number and value == 0:
        raise ConstraintViolation(f"{label} must be nonzero")


def ghat_psi(n, g, delta3, delta4) -> sp.Expr:
    """Multiplier of the generalized extended group built from F = d3*int dx/g + d4."""
    F = delta3 * antiderivative(1 / sp.sympify(g), x) + delta4
    n = sp.sympify(n)
    if n == -1:
        return sp.exp(F)
    return (1 - (n + 1) * F) ** (-1 / (n + 1))


_REF = sp.Rational(3, 2)


def _positive_part(e):
    """|e| written without Abs on the working domain."""
    e = tidy(e)
    try:
        sign = sp.sign(e.subs(x, _REF))
    except TypeError:
        sign = 1
    return tidy(-e) if sign == -1 else e


def _t_branch(n, alpha, alpha_t, d1, d2):
    if alpha == 0:
        rhs = d1 * t + d2
    else:
        rhs = d1 * (sp.exp(n * alpha * t) - 1) / (n * alpha) + d2
    if alpha_t == 0:
        return rhs
    return sp.log(1 + n * alpha_t * rhs) / (n * alpha_t)


def build_transformation(group: str, params: Mapping) -> PointTransformation:
    """Group element from named parameters (delta0..delta7, phi, psi, n, g, eps, ...)."""
    if group not in GROUPS:
        raise ValueError(f"unknown group tag {group!r}")
    p = dict(params)
    d = {k: _get(p, f"delta{k}", dflt) for k, dflt in
         ((0, 1), (1, 1), (2, 0))}
    if group == "G":
        d3 = _get(p, "delta3", 1)
        _nonzero(d[1], "delta1"), _nonzero(d3, "delta3")
        phi = _get(p, "phi", x)
        return PointTransformation(d[1] * t + d[2], phi, d3, group, p)
    if group == "Ghat":
        n = _get(p, "n")
        psi = ghat_psi(n, _get(p, "g", 1), _get(p, "delta3", 0), _get(p, "delta4", 0))
        return PointTransformation(d[1] * t + d[2], _get(p, "phi", x), tidy(psi), group, p)
    if group == "G1":
        n = _get(p, "n")
        _nonzero(d[1], "delta1")
        if n == -1:
            d3, d4, d5, d6 = (_get(p, f"delta{k}", v) for k, v in ((3, 1), (4, 0), (5, 1), (6, 0)))
            _nonzero(d3, "delta3"), _nonzero(d5, "delta5")
            return PointTransformation(d[1] * t + d[2], d3 * x + d4, d5 * sp.exp(d6 * x), group, p)
        d3, d4, d5, d6, d7 = (_get(p, f"delta{k}", v) for k, v in
                              ((3, 1), (4, 0), (5, 0), (6, 1), (7, 1)))
        det = sp.simplify(d3 * d6 - d4 * d5)
        if det.is_number and abs(det) != 1:
            raise ConstraintViolation(f"delta3*delta6-delta4*delta5 must be +-1, got {det}")
        _nonzero(d7, "delta7")
        phi = (d3 * x + d4) / (d5 * x + d6)
        phi_x = _positive_part(sp.diff(phi, x))
        V = strip_abs(tidy(d7 * phi_x ** (1 / (2 * n + 2))), _REF)
        return PointTransformation(d[1] * t + d[2], tidy(phi), tidy(V), group, p)
    if group == "Gmn1":
        psi = _get(p, "psi")
        return PointTransformation(d[1] * t + d[2], _get(p, "phi", x), psi, group, p)
    if group == "G1mn1":
        n = _get(p, "n")
        psi = _get(p, "psi")
        if "phi" in p:
            phi = _get(p, "phi")
            if not is_zero(d[0] * sp.diff(phi, x) - psi ** (2 * n + 2)):
                raise ConstraintViolation("delta0*phi_x must equal psi^(2n+2)")
        else:
            phi = antiderivative(tidy(psi ** (2 * n + 2)) / d[0], x)
        return PointTransformation(d[1] * t + d[2], tidy(phi), psi, group, p)
    if group == "Gm1const":
        n = _get(p, "n")
        alpha, alpha_t = _get(p, "alpha", 0), _get(p, "alpha_tilde", 0)
        T = _t_branch(n, alpha, alpha_t, d[1], d[2])
        T_t = tidy(sp.diff(T, t))
        if T_t == 0:
            raise ConstraintViolation("T_t must be nonzero")
        if "psi" in p or n == -1:
            X = _get(p, "phi", x)
            psi = _get(p, "psi", 1)
        else:
            d3, d4, d5, d6, d7 = (_get(p, f"delta{k}", v) for k, v in
                                  ((3, 1), (4, 0), (5, 0), (6, 1), (7, 1)))
            X = tidy((d3 * x + d4) / (d5 * x + d6))
            psi = d7 * _positive_part(sp.diff(X, x)) ** (1 / (2 * n + 2))
        V = tidy(_positive_part(T_t) ** (-1 / n) * psi)
        return PointTransformation(tidy(T), X, V, group, p)
    if group == "additional":
        n, eps = _get(p, "n"), _get(p, "eps")
        _nonzero(eps, "eps")
        return PointTransformation(sp.exp(eps * n * t) / (eps * n), x, sp.exp(-eps * t), group, p)
    return PointTransformation(_get(p, "T", t), _get(p, "X", x), _get(p, "V", 1), group, p)


# ---------------------------------------------------------------------------
# action on equations

def _separate(W):
    """W(t,x) = time_part(t) * space_part(x), or None."""
    W = tidy(W)
    parts = sp.separatevars(W, symbols=[t, x], dict=True, force=True)
    if parts is None:
        return None
    return parts["coeff"] * parts[t], parts[x]


def _x_inverse(X, bindings=None):
    if X == x:
        return x
    y = sp.Dummy("xt", positive=True)
    try:
        inv = invert_function(X, x, y, numeric_bindings=bindings)
    except NotInvertible as exc:
        raise NotInvertible(f"inverse of X={X} is outside the expression language") from exc
    return inv.xreplace({y: x})


def _in_new_x(e, X_inverse, ref):
    if X_inverse == x:
        return tidy(strip_abs(e, ref))
    return tidy(strip_abs(tidy(e).xreplace({x: X_inverse}), ref))


def _image_ref(X, domain):
    mid = (domain[0] + domain[1]) / 2
    try:
        return float(X.subs(x, mid))
    except (TypeError, ValueError):
        return mid


def _sampled_constant(e, domain) -> bool:
    if e.free_symbols - {x}:
        return False
    vals = evaluate_array(e, {"x": np.linspace(domain[0], domain[1], 9)})
    if not np.all(np.isfinite(vals)) or not np.any(vals):
        return False
    return bool(np.ptp(vals) <= 1e-9 * np.max(np.abs(vals)))


def _multiplier_data(tr: PointTransformation, eq: RDEquation, delta0=None, domain=(1.0, 2.0)):
    n = eq.n
    W = tidy(1 / tr.V)
    sep = _separate(W)
    if sep is None:
        raise InadmissibleTransformation("V must factor into a function of t times a function of x")
    W_time, _ = sep
    T_t, X_x = tr.jacobian_factors()
    c = tidy(W_time ** (2 * n + 2))
    A = tidy(eq.g * W ** (2 * n + 2) * X_x / c)
    if A.has(t):
        raise InadmissibleTransformation("image g depends on t")
    if delta0 is not None:
        kappa = sp.sympify(delta0)
    elif not A.has(x) or _sampled_constant(A, domain):
        # kept symbolic so that g~ = kappa*A is exactly 1
        kappa = 1 / A
    else:
        kappa = sp.S.One
    lam = tidy(c * X_x * W ** (-(n + 1)) / kappa)
    g_new = sp.S.One if kappa == 1 / A else tidy(kappa * A)
    return W, T_t, X_x, lam, g_new


def equation_multiplier(tr: PointTransformation, eq: RDEquation, delta0=None) -> sp.Expr:
    """Lambda(t,x) with E[u] = Lambda * E~[u~] for the image operator E~."""
    return _multiplier_data(tr, eq, delta0)[3]


def apply(tr: PointTransformation, eq: RDEquation, *, delta0=None,
          domain=(1.0, 2.0)) -> RDEquation:
    """Image equation of ``eq`` under ``tr``, re-expressed in the new x.

    Writes u = W U with W = 1/V.  Matching the diffusion term fixes the
    equation multiplier up to a constant; the leftover terms must collapse
    to a single power of U, which becomes the image source term.
    """
    n, m = eq.n, eq.m
    W, T_t, X_x, lam, g_new = _multiplier_data(tr, eq, delta0, domain)
    f_new = tidy(eq.f * W * T_t / lam)
    W_t, W_x = sp.diff(W, t), sp.diff(W, x)
    pieces = {}

    def add(power, coeff):
        for key in pieces:
            if sp.simplify(key - power) == 0:
                pieces[key] += coeff
                return
        pieces[power] = coeff

    add(n + 1, sp.diff(eq.g * W ** n * W_x, x))
    add(m, eq.h * W ** m)
    add(sp.S.One, -eq.f * W_t)
    live = {}
    for power, coeff in pieces.items():
        coeff = tidy(coeff / lam)
        if coeff != 0 and not is_zero(coeff, x_range=tuple(domain)):
            live[power] = coeff
    if len(live) > 1:
        raise InadmissibleTransformation(
            "source terms with exponents " + ", ".join(map(str, live)) + " do not combine")
    if live:
        (m_new, h_new), = live.items()
    else:
        m_new, h_new = n + 1, sp.S.Zero
    for label, coeff in (("f", f_new), ("g", g_new), ("h", h_new)):
        if coeff.has(t) and not is_zero(sp.diff(coeff, t), x_range=tuple(domain)):
            raise InadmissibleTransformation(f"image {label} depends on t")
    X_inv = _x_inverse(tr.X)
    ref = _image_ref(tr.X, domain)
    f_img, g_img, h_img = (_in_new_x(c.subs(t, 0) if c.has(t) else c, X_inv, ref)
                           for c in (f_new, g_new, h_new))
    return make_equation(f_img, g_img, h_img, n, m_new if h_img != 0 else None)


def compose(a: PointTransformation, b: PointTransformation) -> PointTransformation:
    """a after b."""
    T = tidy(a.T.xreplace({t: b.T}))
    X = tidy(a.X.xreplace({x: b.X}))
    V = tidy(a.V.xreplace({t: b.T, x: b.X}) * b.V)
    return PointTransformation(T, X, V, "custom", {"composed": [a.group, b.group]})


def invert(a: PointTransformation) -> PointTransformation:
    if a.T == t:
        T_inv = t
    else:
        y = sp.Dummy("tt", real=True)
        T_inv = invert_function(a.T, t, y, domain=(0.1, 0.9)).xreplace({y: t})
    X_inv = _x_inverse(a.X)
    V = tidy(1 / a.V.xreplace({t: T_inv, x: X_inv}))
    return PointTransformation(tidy(T_inv), X_inv, strip_abs(V), "custom",
                               {"inverse_of": a.group})


# ---------------------------------------------------------------------------
# admissibility

@dataclass
class AdmissibilityReport:
    checks: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(ok for _, ok in self.checks)

    def failures(self) -> list[str]:
        return [name for name, ok in self.checks if not ok]


def verify_admissible_relations(tr: PointTransformation, eq: RDEquation,
                                target: RDEquation) -> AdmissibilityReport:
    """Check the determining relations a connecting transformation must satisfy."""
    rep = AdmissibilityReport()
    n = eq.n
    rep.checks.append(("n~=n", sp.simplify(target.n - n) == 0))
    T_t, X_x = tr.jacobian_factors()
    V = tr.V
    V_x = sp.diff(V, x)
    f_t = target.f.xreplace({x: tr.X})
    h_t = target.h.xreplace({x: tr.X})
    rep.checks.append(("2(n+1)X_xV_x = X_xxV",
                       is_zero(2 * (n + 1) * X_x * V_x - sp.diff(X_x, x) * V)))
    rep.checks.append(("V^n = (f~/f) X_x^2/T_t",
                       is_zero(V ** n - f_t / eq.f * X_x ** 2 / T_t)))
    split = (f_t / eq.f * V / T_t * eq.h * u ** eq.m + f_t * sp.diff(V, t) / T_t * u
             - sp.diff(V ** n * V_x / X_x, x) / X_x * u ** (n + 1)
             - h_t * V ** target.m * u ** target.m)
    rep.checks.append(("split relation", is_zero(split)))
    return rep


class NoWitness:
    def __init__(self, reason: str):
        self.reason = reason

    def __bool__(self):
        return False

    def __repr__(self):
        return f"NoWitness({self.reason!r})"


@dataclass
class AdmissibleDecision:
    branch: str
    witness: PointTransformation | NoWitness
    reason: str = ""
    image: RDEquation | None = None


def _refuse(branch: str, reason: str) -> AdmissibleDecision:
    return AdmissibleDecision(branch, NoWitness(reason), reason)


def equations_match(a: RDEquation, b: RDEquation, domain=(1.0, 2.0)) -> bool:
    if sp.simplify(a.n - b.n) != 0 or sp.simplify(a.m - b.m) != 0:
        return False
    return all(num_equivalent(getattr(a, k), getattr(b, k), domain, 64, tol=1e-8)
               for k in "fgh")


def _check_family(eq: RDEquation):
    for label in ("f", "h"):
        c = getattr(eq, label)
        if c == 0 or not c.has(x):
            continue
        if not as_rational(sp.diff(c, x) / c):
            raise UnsupportedFamily(f"{label}={to_text(c)} is outside the supported families")


def _ratio_constant(eq: RDEquation):
    if eq.h == 0:
        return None
    r = tidy(eq.h / eq.f)
    return None if r.has(x) else r


def _to_h_zero(eq: RDEquation):
    mu = _ratio_constant(eq)
    tr = build_transformation("additional", {"n": eq.n, "eps": mu})
    return tr, apply(tr, eq)


def decide_admissible(eq1: RDEquation, eq2: RDEquation) -> AdmissibleDecision:
    """Branch of the (m, m~) pair plus a connecting transformation when one is found.

    Both equations are normalized by the classifier; equal normal forms give
    the witness inv(N2) o N1, with an extra detour through h=0 when m=1 is
    paired with m~=n+1.
    """
    from .symmetry import classify

    for eq in (eq1, eq2):
        if not eq.gauged:
            raise UnsupportedFamily("equations must be gauged to g=1")
        if not eq.n.is_number:
            raise UnsupportedFamily("n must be numeric")
        _check_family(eq)
    if sp.simplify(eq1.n - eq2.n) != 0:
        return _refuse("none", "n~=n violated")
    n = eq1.n
    m1, m2 = eq1.m, eq2.m
    if sp.simplify(m1 - m2) == 0:
        branch = "m~=m"
    elif (m1, m2) == (1, n + 1):
        branch = "(1,n+1)"
    elif (m1, m2) == (n + 1, 1):
        branch = "(n+1,1)"
    else:
        return _refuse("none", "m~ must equal m, or (m,m~) in {(1,n+1),(n+1,1)}")
    if equations_match(eq1, eq2):
        return AdmissibleDecision(branch, identity(), "identical equations", eq2)

    def reduce_side(eq, detour):
        pre = identity()
        if detour:
            if _ratio_constant(eq) is None:
                return None, None
            pre, eq = _to_h_zero(eq)
        res = classify(eq)
        return compose(res.normalizer, pre), res

    detour1 = branch == "(1,n+1)" or (branch == "m~=m" and m1 == 1 and
                                      _ratio_constant(eq1) is not None and
                                      _ratio_constant(eq2) is not None)
    detour2 = branch == "(n+1,1)" or (branch == "m~=m" and detour1)
    N1, r1 = reduce_side(eq1, detour1)
    N2, r2 = reduce_side(eq2, detour2)
    if N1 is None or N2 is None:
        return _refuse(branch, "(h/f)_x must vanish for the m=1 side")
    if r1.case_id != r2.case_id or not equations_match(r1.normal_form, r2.normal_form):
        return _refuse(branch, "normal forms differ")
    witness = compose(invert(N2), N1)
    image = apply(witness, eq1)
    if not equations_match(image, eq2):
        return _refuse(branch, "composite failed to reproduce the target")
    return AdmissibleDecision(branch, PointTransformation(witness.T, witness.X, witness.V,
                                                          "custom", {"branch": branch}),
                              "", image)
