"""Expression layer: parsing, printing, canonical simplification and numerics.

Expressions are sympy trees.  The module fixes the variable symbols, the
small surface grammar used on the command line, and the evaluation semantics
(``|base|**p`` for non-integer exponents).
"""

from __future__ import annotations

import os
import re
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping

import numpy as np
import sympy as sp
from sympy.printing.str import StrPrinter

__all__ = [
    "t", "x", "u", "u_t", "u_x", "u_xx", "u_tx", "u_tt", "u_xxx",
    "JET", "VARIABLES", "ParseError", "EvaluationError", "DomainExhausted",
    "parse", "to_text", "differentiate", "simplify", "substitute", "evaluate",
    "evaluate_array", "RationalFunc", "NotRational", "NOT_RATIONAL",
    "as_rational", "num_equivalent", "is_zero", "symbol", "strip_abs", "tidy",
    "sampling_seed", "set_sampling_seed",
]

t = sp.Symbol("t", real=True)
x = sp.Symbol("x", positive=True)
u = sp.Symbol("u", positive=True)
u_t = sp.Symbol("u_t", real=True)
u_x = sp.Symbol("u_x", real=True)
u_xx = sp.Symbol("u_xx", real=True)
u_tx = sp.Symbol("u_tx", real=True)
u_tt = sp.Symbol("u_tt", real=True)
u_xxx = sp.Symbol("u_xxx", real=True)

JET = (u_t, u_x, u_xx, u_tx, u_tt, u_xxx)
VARIABLES = {s.name: s for s in (t, x, u) + JET}
CONSTANTS = {"pi": sp.pi, "E": sp.E}


def symbol(name: str) -> sp.Symbol:
    """Variable symbol if ``name`` is reserved, else a plain symbolic constant."""
    return VARIABLES.get(name) or sp.Symbol(name, real=True)


# ---------------------------------------------------------------------------
# parsing

class ParseError(ValueError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} at byte {offset}")
        self.offset = offset


def _sqrt(e):
    return sp.Pow(e, sp.Rational(1, 2))


FUNCTIONS: dict[str, Callable] = {
    "exp": sp.exp, "ln": sp.log, "sin": sp.sin, "cos": sp.cos, "tan": sp.tan,
    "atan": sp.atan, "abs": sp.Abs, "sqrt": _sqrt, "sign": sp.sign,
}

_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+\.\d*|\.\d+|\d+)|(?P<id>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<op>\*\*|[-+*/^()−]))"
)


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            raise ParseError(f"unexpected character {text[pos:].lstrip()[0]!r}",
                             _byte_offset(text, pos + len(text[pos:]) - len(text[pos:].lstrip())))
        kind = m.lastgroup
        value = m.group(kind)
        start = _byte_offset(text, m.start(kind))
        if kind == "op":
            value = {"−": "-", "**": "^"}.get(value, value)
        tokens.append((kind, value, start))
        pos = m.end()
    tokens.append(("end", "", _byte_offset(text, len(text))))
    return tokens


def _byte_offset(text: str, index: int) -> int:
    return len(text[:index].encode("utf-8"))


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value: str):
        kind, val, off = self.take()
        if val != value or kind == "end" and value:
            raise ParseError(f"expected {value!r}, found {val or 'end of input'!r}", off)

    def expr(self):
        node = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            rhs = self.term()
            node = node + rhs if op == "+" else node - rhs
        return node

    def term(self):
        node = self.unary()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.take()[1]
            rhs = self.unary()
            node = node * rhs if op == "*" else node / rhs
        return node

    def unary(self):
        if self.peek() [:2] == ("op", "-"):
            self.take()
            return -self.power()
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek()[:2] == ("op", "^"):
            self.take()
            return sp.Pow(base, self.unary())
        return base

    def atom(self):
        kind, val, off = self.take()
        if kind == "num":
            return sp.Rational(val)
        if kind == "id":
            if self.peek()[:2] == ("op", "("):
                if val not in FUNCTIONS:
                    raise ParseError(f"unknown function {val!r}", off)
                self.take()
                arg = self.expr()
                self.expect(")")
                return FUNCTIONS[val](arg)
            if val in FUNCTIONS:
                raise ParseError(f"function {val!r} used without argument", off)
            if val in CONSTANTS:
                return CONSTANTS[val]
            return symbol(val)
        if (kind, val) == ("op", "("):
            node = self.expr()
            self.expect(")")
            return node
        raise ParseError(f"unexpected {val or 'end of input'!r}", off)


def parse(text: str) -> sp.Expr:
    """Parse the surface grammar into a canonical expression."""
    if not text or not text.strip():
        raise ParseError("empty input", 0)
    p = _Parser(text)
    node = p.expr()
    kind, val, off = p.peek()
    if kind != "end":
        raise ParseError(f"unexpected trailing {val!r}", off)
    return sp.sympify(node)


# ---------------------------------------------------------------------------
# printing

class _GrammarPrinter(StrPrinter):
    def _print_log(self, e):
        return f"ln({self._print(e.args[0])})"

    def _print_Abs(self, e):
        return f"abs({self._print(e.args[0])})"

    def _print_Exp1(self, e):
        return "E"


_PRINTER = _GrammarPrinter({"order": "lex"})


def to_text(e) -> str:
    """Render an expression in the surface grammar (parse(to_text(e)) == e)."""
    return _PRINTER.doprint(sp.sympify(e)).replace("**", "^")


# ---------------------------------------------------------------------------
# canonical simplification

def simplify(e) -> sp.Expr:
    """Bottom-up canonicalization: expand, collect powers, cancel exp/ln pairs.

    Idempotent by construction: rewriting repeats until a fixpoint.  An
    expansion that swells the expression more than twentyfold is abandoned
    and the input is returned unchanged.
    """
    e = sp.sympify(e)
    start = e
    limit = 20 * max(sp.count_ops(e), 50)
    for _ in range(6):
        new = sp.powsimp(sp.expand(e, power_exp=False, power_base=False, log=False),
                         combine="exp")
        if new == e:
            break
        if sp.count_ops(new) > limit:
            return start
        e = new
    return e


def _denest(e):
    # (b^a)^c -> b^(a*c) for b > 0; exponents here are real by construction
    return e.replace(lambda a: a.is_Pow and a.base.is_Pow and a.base.base.is_positive,
                     lambda a: sp.Pow(a.base.base, sp.cancel(a.base.exp * a.exp)))


def _cancel_exponents(e):
    return e.replace(lambda a: a.is_Pow and not a.exp.is_Number,
                     lambda a: sp.Pow(a.base, sp.factor(sp.cancel(a.exp))))


def _factor_bases(e):
    def fold(a):
        base = sp.factor(sp.cancel(sp.together(a.base)))
        return sp.Pow(base, a.exp)
    return e.replace(lambda a: (a.is_Pow and not a.exp.is_Integer and a.base.is_Add
                                and a.base.has(x) and a.base.is_rational_function(x)), fold)


def tidy(e) -> sp.Expr:
    """Heavier normalization used on transformed coefficients.

    Denests powers, cancels rational exponents in symbolic constants and
    merges equal bases; falls back to ``simplify`` semantics otherwise.
    """
    e = sp.sympify(e)
    if e.is_Number:
        return e
    e = _cancel_exponents(_denest(sp.powdenest(e)))
    e = _cancel_over_radicals(e)
    e = simplify(sp.powsimp(e, force=False))
    e = _cancel_exponents(e)
    if e.is_rational_function(x) and not e.is_polynomial(x):
        e = sp.factor(sp.cancel(e))
    e = _factor_bases(sp.powsimp(e))
    e = _cancel_over_radicals(e)
    if e.is_Add and e.has(x):
        alt = _factor_bases(sp.factor(sp.together(e)))
        if sp.count_ops(alt) < sp.count_ops(e):
            e = alt
    return e


def _cancel_over_radicals(e):
    """Cancel e as a rational function of x and its fractional-power atoms."""
    roots = [a for a in e.atoms(sp.Pow)
             if a.has(x) and a.exp.is_Rational and not a.exp.is_Integer]
    if not roots or any(a.has(sp.Abs) for a in roots):
        return e
    dummies = {r: sp.Dummy() for r in roots}
    flat = e.xreplace(dummies)
    gens = [x, *dummies.values()]
    if not flat.is_rational_function(*gens) or flat.free_symbols - set(gens):
        return e
    out = sp.factor(sp.cancel(flat)).xreplace({d: r for r, d in dummies.items()})
    return out if sp.count_ops(out) <= sp.count_ops(e) else e


def differentiate(e, v) -> sp.Expr:
    """Partial derivative; jet variables count as independent symbols."""
    if isinstance(v, str):
        v = symbol(v)
    return simplify(sp.diff(sp.sympify(e), v))


def substitute(e, v, r) -> sp.Expr:
    if isinstance(v, str):
        v = symbol(v)
    return simplify(sp.sympify(e).xreplace({v: sp.sympify(r)}))


def strip_abs(e, ref: float = 1.5) -> sp.Expr:
    """Replace |L| by +-L using the sign of L at the reference point x=ref.

    Symbolic constants inside L are taken as making L positive.  Fractional
    powers of rational functions are split into powers of factors that are
    positive at ``ref``, so no negative base survives under a root.
    """
    def fix(arg):
        try:
            val = float(arg.subs(x, ref))
        except (TypeError, ValueError):
            return arg
        return -arg if val < 0 else arg
    e = sp.sympify(e).replace(sp.Abs, fix)
    return e.replace(lambda a: a.is_Pow and _splittable(a), lambda a: _split_root(a, ref))


def _splittable(p) -> bool:
    q = p.exp
    return (q.is_Rational and not q.is_Integer and p.base.has(x)
            and p.base.free_symbols == {x} and p.base.is_rational_function(x))


def _split_root(p, ref):
    base, q = sp.cancel(sp.together(p.base)), p.exp
    num, den = sp.fraction(base)
    c_num, f_num = sp.factor_list(num, x)
    c_den, f_den = sp.factor_list(den, x)
    coeff = sp.Rational(c_num) / sp.Rational(c_den) if c_num.is_Rational and c_den.is_Rational \
        else None
    if coeff is None:
        return p
    out = []
    for factors, sign in ((f_num, 1), (f_den, -1)):
        for f, k in factors:
            try:
                val = float(f.subs(x, ref))
            except (TypeError, ValueError):
                return p
            if val == 0:
                return p
            if val < 0:
                f, coeff = -f, coeff * (-1) ** k
            out.append(f ** (sign * k * q))
    if coeff <= 0:
        return p
    return sp.Mul(coeff ** q, *out)


# ---------------------------------------------------------------------------
# numerics

_SEED = [int(os.environ.get("RDLIE_SEED", "0"))]


def sampling_seed() -> int:
    """Default seed for the sampled zero and equivalence tests."""
    return _SEED[0]


def set_sampling_seed(seed: int) -> None:
    _SEED[0] = int(seed)


class EvaluationError(ArithmeticError):
    pass


class DomainExhausted(RuntimeError):
    pass


_UNARY = {
    sp.exp: np.exp, sp.log: np.log, sp.sin: np.sin, sp.cos: np.cos,
    sp.tan: np.tan, sp.atan: np.arctan, sp.Abs: np.abs, sp.sign: np.sign,
    sp.sinh: np.sinh, sp.cosh: np.cosh, sp.tanh: np.tanh, sp.asin: np.arcsin,
    sp.acos: np.arccos,
}


def _binding_table(bindings: Mapping) -> dict[str, object]:
    return {(k if isinstance(k, str) else k.name): v for k, v in bindings.items()}


def _power(b, p):
    b = np.asarray(b, dtype=float)
    p = np.asarray(p, dtype=float)
    integral = np.equal(np.round(p), p)
    if np.all(integral):
        return np.power(b, p)
    magnitude = np.power(np.abs(b), p)
    if np.any(integral):
        return np.where(integral, np.power(b, np.where(integral, p, 1.0)), magnitude)
    return magnitude


def _walk(e, env, strict: bool):
    if e.is_Number or e.is_NumberSymbol:
        return np.float64(float(e))
    if e.is_Symbol:
        try:
            return env[e.name]
        except KeyError:
            raise EvaluationError(f"unbound symbol {e.name!r}") from None
    args = [_walk(a, env, strict) for a in e.args]
    if e.is_Add:
        out = args[0]
        for a in args[1:]:
            out = out + a
    elif e.is_Mul:
        out = args[0]
        for a in args[1:]:
            out = out * a
    elif e.is_Pow:
        b, p = args
        if strict and np.any((np.asarray(b) == 0) & (np.asarray(p) < 0)):
            raise EvaluationError(f"division by zero in {to_text(e)}")
        out = _power(b, p)
    elif e.func in _UNARY:
        if strict and e.func is sp.log and np.any(np.asarray(args[0]) <= 0):
            raise EvaluationError(f"ln of non-positive value in {to_text(e)}")
        out = _UNARY[e.func](args[0])
    elif e.func is sp.atan2:
        out = np.arctan2(*args)
    else:
        raise EvaluationError(f"cannot evaluate {e.func.__name__}")
    if strict and not np.all(np.isfinite(out)):
        raise EvaluationError(f"non-finite value in {to_text(e)}")
    return out


def evaluate(e, bindings: Mapping) -> float:
    """Strict scalar evaluation; poles and domain errors raise EvaluationError."""
    env = {k: np.float64(v) for k, v in _binding_table(bindings).items()}
    with np.errstate(all="ignore"):
        return float(_walk(sp.sympify(e), env, strict=True))


def evaluate_array(e, bindings: Mapping) -> np.ndarray:
    """Vectorized evaluation; singular points come back as nan/inf."""
    env = {k: np.asarray(v, dtype=float) for k, v in _binding_table(bindings).items()}
    with np.errstate(all="ignore"):
        out = _walk(sp.sympify(e), env, strict=False)
    shape = np.broadcast_shapes(*(np.shape(v) for v in env.values())) if env else ()
    return np.broadcast_to(np.asarray(out, dtype=float), shape).copy()


def _free_names(*exprs) -> list[str]:
    names = set()
    for e in exprs:
        names |= {s.name for s in sp.sympify(e).free_symbols}
    return sorted(names)


def num_equivalent(a, b, domain: tuple[float, float] = (-2.0, 2.0), trials: int = 64,
                   *, tol: float = 1e-9, bindings: Mapping | None = None,
                   seed: int | None = None) -> bool:
    """Sampled equality check: |a-b| <= tol*(1+|a|) at ``trials`` regular points.

    Every free symbol not in ``bindings`` is sampled uniformly from ``domain``.
    Singular samples are discarded and redrawn.
    """
    fixed = _binding_table(bindings or {})
    free = [n for n in _free_names(a, b) if n not in fixed]
    rng = np.random.default_rng(sampling_seed() if seed is None else seed)
    lo, hi = domain
    good = 0
    batch = max(trials, 16)
    for _ in range(50):
        env = dict(fixed)
        for name in free:
            env[name] = rng.uniform(lo, hi, batch)
        if not free:
            env["__dummy"] = np.zeros(batch)
        va = evaluate_array(a, env)
        vb = evaluate_array(b, env)
        ok = np.isfinite(va) & np.isfinite(vb)
        va, vb = va[ok], vb[ok]
        take = min(trials - good, va.size)
        va, vb = va[:take], vb[:take]
        if np.any(np.abs(va - vb) > tol * (1 + np.abs(va))):
            return False
        good += take
        if good >= trials:
            return True
    if good == 0:
        raise DomainExhausted("every sample point was singular")
    return True


def is_zero(e, *, bindings: Mapping | None = None, points: int = 100, seed: int | None = None,
            rel_tol: float = 1e-9, positive: Iterable[str] = ("u",),
            x_range: tuple[float, float] = (0.5, 2.0)) -> bool:
    """Symbolic zero test with a relative numeric fallback.

    Numerically the value is compared against the sum of absolute term
    magnitudes, so large cancelling terms do not mask a residual.
    """
    e = sp.sympify(e)
    if e == 0:
        return True
    e = simplify(e)
    if e == 0:
        return True
    if e.is_rational_function() and sp.cancel(sp.together(e)) == 0:
        return True
    if sp.count_ops(e) < 5000 and sp.cancel(sp.together(e)) == 0:
        return True
    fixed = _binding_table(bindings or {})
    rng = np.random.default_rng(sampling_seed() if seed is None else seed)
    terms = sp.Add.make_args(sp.expand(e, deep=False))
    free = [n for n in _free_names(e) if n not in fixed]
    pos = set(positive)
    checked = 0
    for _ in range(20):
        env = dict(fixed)
        for name in free:
            if name == "x":
                env[name] = rng.uniform(*x_range, points)
            elif name in pos or name == "t":
                env[name] = rng.uniform(0.5, 2.0, points)
            else:
                env[name] = rng.uniform(-2.0, 2.0, points)
        if not free:
            env["__dummy"] = np.zeros(points)
        total = evaluate_array(e, env)
        scale = np.zeros_like(total)
        for term in terms:
            scale += np.abs(evaluate_array(term, env))
        ok = np.isfinite(total) & np.isfinite(scale)
        if np.any(np.abs(total[ok]) > rel_tol * (1 + scale[ok])):
            return False
        checked += int(ok.sum())
        if checked >= points:
            return True
    return checked > 0


# ---------------------------------------------------------------------------
# rational functions

@dataclass(frozen=True)
class RationalFunc:
    numerator: sp.Expr
    denominator: sp.Expr
    var: sp.Symbol = x

    def to_expr(self) -> sp.Expr:
        return self.numerator / self.denominator

    def degrees(self) -> tuple[int, int]:
        return (sp.Poly(self.numerator, self.var).degree() if self.numerator != 0 else -1,
                sp.Poly(self.denominator, self.var).degree())

    def coeffs(self, which: str, degree: int) -> list[sp.Expr]:
        """Coefficients of numerator/denominator, lowest power first, padded."""
        poly = sp.Poly(getattr(self, which), self.var)
        cs = list(reversed(poly.all_coeffs())) if not poly.is_zero else [sp.S.Zero]
        return (cs + [sp.S.Zero] * (degree + 1))[: degree + 1]


class NotRational:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __bool__(self):
        return False

    def __repr__(self):
        return "NOT_RATIONAL"


NOT_RATIONAL = NotRational()


def as_rational(e, var=x) -> RationalFunc | NotRational:
    """Co-prime numerator/denominator pair in ``var`` with monic denominator."""
    e = sp.sympify(e)
    if e.has(sp.Abs):
        e = strip_abs(e)
    try:
        num, den = sp.fraction(sp.cancel(sp.together(e), var))
    except sp.PolynomialError:
        return NOT_RATIONAL
    if not (num.is_polynomial(var) and den.is_polynomial(var)):
        return NOT_RATIONAL
    pn, pd = sp.Poly(num, var), sp.Poly(den, var)
    g = sp.gcd(pn, pd)
    if g.degree() > 0:
        pn, pd = sp.div(pn, g)[0], sp.div(pd, g)[0]
    lc = pd.LC()
    num = sp.expand(sp.cancel(pn.as_expr() / lc))
    den = sp.expand(sp.cancel(pd.as_expr() / lc))
    return RationalFunc(num, den, var)
