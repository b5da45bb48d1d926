"""Numerical cross-checks: method-of-lines integration, grid residuals,
conserved-integral drift and finite symmetry orbits."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np
import sympy as sp

from .calculus import NotIntegrable, antiderivative
from .conslaws import ConservedVector
from .equation import RDEquation
from .expr import EvaluationError, evaluate_array, t, u, x
from .symmetry import VectorField

__all__ = ["Grid", "NumericalSolution", "NumericalFailure", "UnsupportedFlow", "solve_pde",
           "grid_residual", "conserved_integral_drift", "symmetry_orbit_check",
           "finite_transform", "max_error", "observed_orders"]

DIRICHLET = "dirichlet"
ZERO_FLUX = "zero-flux"
FLOOR = 1e-12


class NumericalFailure(RuntimeError):
    """Step-size underflow, positivity loss or a singular coefficient."""


class UnsupportedFlow(ValueError):
    pass


@dataclass(frozen=True)
class Grid:
    x0: float = 1.0
    x1: float = 2.0
    nx: int = 200
    t0: float = 0.0
    t1: float = 0.5
    boundary: str = DIRICHLET

    def __post_init__(self):
        if self.nx < 16:
            raise ValueError("nx must be at least 16")
        if not self.x1 > self.x0:
            raise ValueError("empty x interval")
        if self.t1 < self.t0:
            raise ValueError("t1 precedes t0")
        if self.boundary not in (DIRICHLET, ZERO_FLUX):
            raise ValueError(f"unknown boundary mode {self.boundary!r}")

    @property
    def nodes(self) -> np.ndarray:
        return np.linspace(self.x0, self.x1, self.nx)

    @property
    def dx(self) -> float:
        return (self.x1 - self.x0) / (self.nx - 1)

    @property
    def weights(self) -> np.ndarray:
        """Trapezoid weights, which are also the control-volume widths."""
        w = np.full(self.nx, self.dx)
        w[0] = w[-1] = self.dx / 2
        return w


@dataclass
class NumericalSolution:
    grid: Grid
    times: list
    values: np.ndarray
    dt_history: list = field(default_factory=list)
    positivity_violations: int = 0
    # per-step boundary traces: columns t, u(x0), u(x1), u_x(x0), u_x(x1)
    boundary_trace: np.ndarray | None = None

    def write_csv(self, target) -> None:
        """Rows t,x,u to a path or an open text stream."""
        if hasattr(target, "write"):
            self._rows(target)
            return
        with open(target, "w", newline="") as fh:
            self._rows(fh)

    def _rows(self, fh):
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t", "x", "u"])
        for k, tk in enumerate(self.times):
            for xi, ui in zip(self.grid.nodes, self.values[k]):
                w.writerow([repr(float(tk)), repr(float(xi)), repr(float(ui))])


def _coefficient(e, nodes, label):
    vals = evaluate_array(e, {"x": nodes})
    if not np.all(np.isfinite(vals)):
        raise NumericalFailure(f"{label} is singular on the grid")
    return vals


def _numeric_exponent(e, label):
    try:
        return float(e)
    except TypeError:
        raise NumericalFailure(f"{label} must be bound to a number") from None


def _edge_slopes(v, dx):
    left = (-3 * v[0] + 4 * v[1] - v[2]) / (2 * dx)
    right = (3 * v[-1] - 4 * v[-2] + v[-3]) / (2 * dx)
    return left, right


def solve_pde(eq: RDEquation, u0, grid: Grid, *, reference=None, snapshots: int = 51,
              cfl: float = 0.4, positivity_tol: float = 1e-8) -> NumericalSolution:
    """Vertex-centred finite volumes with explicit RK4.

    ``reference`` (an expression in t, x) supplies Dirichlet data; it
    defaults to ``u0``, which may itself depend on t.
    """
    nodes, dx = grid.nodes, grid.dx
    f = _coefficient(eq.f, nodes, "f")
    g = _coefficient(eq.g, nodes, "g")
    h = _coefficient(eq.h, nodes, "h") if eq.h != 0 else np.zeros_like(nodes)
    n = _numeric_exponent(eq.n, "n")
    m = _numeric_exponent(eq.m, "m")
    vol = grid.weights
    dirichlet = grid.boundary == DIRICHLET
    ref = sp.sympify(reference if reference is not None else u0)

    edges = np.array([grid.x0, grid.x1])

    def edge_values(fn, tk):
        with np.errstate(all="ignore"):
            vals = np.broadcast_to(np.asarray(fn(tk, edges), dtype=float), (2,)).copy()
        if not np.all(np.isfinite(vals)):
            raise NumericalFailure("boundary data is singular")
        return vals

    edge_fn = sp.lambdify((t, x), ref, "numpy")
    # boundary nodes follow the reference inside every RK stage, not just at step ends
    edge_rate = sp.lambdify((t, x), sp.diff(ref, t), "numpy")

    def boundary(tk):
        return edge_values(edge_fn, tk)

    def rhs(v, tk):
        gun = g * v ** n
        face = 0.5 * (gun[1:] + gun[:-1]) * (v[1:] - v[:-1]) / dx
        net = np.zeros_like(v)
        net[:-1] += face
        net[1:] -= face
        out = net / (f * vol)
        if eq.h != 0:
            out += h * v ** m / f
        if dirichlet:
            out[[0, -1]] = edge_values(edge_rate, tk)
        return out

    v = evaluate_array(sp.sympify(u0).subs(t, grid.t0), {"x": nodes, "t": grid.t0})
    if not np.all(np.isfinite(v)) or np.any(v <= 0):
        raise NumericalFailure("initial data must be finite and positive")
    if dirichlet:
        v[[0, -1]] = boundary(grid.t0)
    out_times = np.linspace(grid.t0, grid.t1, max(snapshots, 2))
    frames, dts, traces, violations = [v.copy()], [], [], 0
    tk = grid.t0
    min_f = f.min()

    def trace(tk, v):
        if dirichlet:
            lo, hi = _edge_slopes(v, dx)
        else:
            lo = hi = 0.0
        traces.append((tk, v[0], v[-1], lo, hi))

    trace(tk, v)
    for target in out_times[1:]:
        while tk < target - 1e-15 * max(1.0, abs(target)):
            dt = cfl * dx ** 2 * min_f / np.max(g * v ** n)
            dt = min(dt, target - tk)
            if dt < 1e-14 * max(1.0, grid.t1 - grid.t0) and tk + dt < target:
                raise NumericalFailure(f"step size underflow at t={tk}")
            k1 = rhs(v, tk)
            k2 = rhs(v + 0.5 * dt * k1, tk + 0.5 * dt)
            k3 = rhs(v + 0.5 * dt * k2, tk + 0.5 * dt)
            k4 = rhs(v + dt * k3, tk + dt)
            v = v + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
            tk += dt
            if dirichlet:
                v[[0, -1]] = boundary(tk)
            if not np.all(np.isfinite(v)):
                raise NumericalFailure(f"non-finite values at t={tk}")
            low = v < FLOOR
            if np.any(low):
                if np.min(v) < -positivity_tol * np.max(np.abs(v)):
                    raise NumericalFailure(f"positivity lost at t={tk}: min u = {np.min(v)}")
                violations += int(low.sum())
                v[low] = FLOOR
            dts.append(dt)
            trace(tk, v)
        tk = float(target)
        frames.append(v.copy())
    return NumericalSolution(grid, [float(s) for s in out_times], np.array(frames), dts,
                             violations, np.array(traces))


def max_error(sol: NumericalSolution, exact) -> float:
    """Largest nodal deviation from an exact solution over all stored times."""
    worst = 0.0
    for tk, row in zip(sol.times, sol.values):
        ref = evaluate_array(exact, {"t": tk, "x": sol.grid.nodes})
        worst = max(worst, float(np.max(np.abs(row - ref))))
    return worst


def observed_orders(errors, sizes) -> list[float]:
    """log2-type ratios between successive refinements."""
    return [float(np.log(errors[k] / errors[k + 1]) / np.log(sizes[k + 1] / sizes[k]))
            for k in range(len(errors) - 1)]


def grid_residual(eq: RDEquation, sol, grid: Grid, *, times: int = 11) -> float:
    """max |f u_t - (g u^n u_x)_x - h u^m| over the grid nodes and sampled times."""
    sol = sp.sympify(sol)
    flux = eq.g * sol ** eq.n * sp.diff(sol, x)
    res = eq.f * sp.diff(sol, t) - sp.diff(flux, x) - eq.h * sol ** eq.m
    tt, xx = np.meshgrid(np.linspace(grid.t0, grid.t1, times), grid.nodes, indexing="ij")
    vals = evaluate_array(res, {"t": tt, "x": xx})
    if not np.all(np.isfinite(vals)):
        raise EvaluationError("residual is singular on the grid")
    return float(np.max(np.abs(vals)))


def _field_on(expr, tk, nodes, v, vx):
    return np.broadcast_to(evaluate_array(expr, {"t": tk, "x": nodes, "u": v, "u_x": vx}),
                           np.shape(nodes))


def conserved_integral_drift(sol: NumericalSolution, cv: ConservedVector,
                             eq: RDEquation | None = None) -> float:
    """Relative drift of the integral of F after crediting the boundary flux of G."""
    grid = sol.grid
    nodes, w = grid.nodes, grid.weights
    integrals = []
    for tk, row in zip(sol.times, sol.values):
        vx = np.gradient(row, grid.dx, edge_order=2)
        if grid.boundary == ZERO_FLUX:
            vx[0] = vx[-1] = 0.0
        integrals.append(float(np.sum(w * _field_on(cv.F, tk, nodes, row, vx))))
    tr = sol.boundary_trace
    ends = np.array([grid.x0, grid.x1])
    jumps = np.array([np.diff(evaluate_array(cv.G, {"t": row[0], "x": ends, "u": row[1:3],
                                                    "u_x": row[3:5]}))[0] for row in tr])
    cumulative = np.concatenate([[0.0], np.cumsum(0.5 * (jumps[1:] + jumps[:-1])
                                                 * np.diff(tr[:, 0]))])
    flux_at = np.interp(sol.times, tr[:, 0], cumulative)
    base = integrals[0]
    scale = max(abs(base), max(abs(i) for i in integrals), 1e-300)
    return max(abs(i - base + fa) for i, fa in zip(integrals, flux_at)) / scale


# ---------------------------------------------------------------------------
# finite symmetry transformations

def _mobius_flow(q0, q1, q2, s):
    """(A, B, C, D) with exp(s * (q0 + q1 x + q2 x^2) d/dx) acting as (Ax+B)/(Cx+D)."""
    M = sp.Matrix([[q1 / 2, q0], [-q2, -q1 / 2]])
    E = sp.simplify((s * M).exp())
    return E[0, 0], E[0, 1], E[1, 0], E[1, 1]


def _path_integral(rate, speed, var, start, end, eps):
    """Integral of rate along a flow line of d/ds var = speed from start to end."""
    if rate == 0:
        return sp.S.Zero
    if speed == 0:
        return rate * eps
    try:
        P = antiderivative(sp.cancel(rate / speed), var)
    except NotIntegrable as exc:
        raise UnsupportedFlow(str(exc)) from exc
    return P.subs(var, end) - P.subs(var, start)


def _split_rate(r):
    """r(t, x) = a(t) + b(x), or UnsupportedFlow."""
    r = sp.expand(r)
    a = sp.Add(*[term for term in sp.Add.make_args(r) if not term.has(x)])
    b = sp.expand(r - a)
    if b.has(t):
        raise UnsupportedFlow("eta/u is not a sum of a t-part and an x-part")
    return a, b


def finite_transform(X: VectorField, sol, eps) -> sp.Expr:
    """Image of u = sol(t, x) under the flow exp(eps X)."""
    sol = sp.sympify(sol)
    eps = sp.nsimplify(eps)
    if eps == 0:
        return sol
    tau, xi, eta = (sp.expand(c) for c in (X.tau, X.xi, X.eta))
    rate = sp.cancel(eta / u)
    if rate.has(u) or xi.has(t) or xi.has(u) or tau.has(x) or tau.has(u):
        raise UnsupportedFlow("flow outside the closed-form families")
    if not xi.is_polynomial(x) or sp.degree(xi, x) > 2:
        raise UnsupportedFlow("xi must be at most quadratic in x")
    poly_t = tau.is_polynomial(t) and sp.degree(tau, t) <= 1
    if poly_t:
        a0, a1 = tau.coeff(t, 0), tau.coeff(t, 1)
        if a1 == 0:
            t_back = t - a0 * eps
        else:
            t_back = (t + a0 / a1) * sp.exp(-a1 * eps) - a0 / a1
        rate_t, rate_x = _split_rate(rate)
        grow_t = _path_integral(rate_t, tau, t, t_back, t, eps)
    else:
        # tau = A exp(k t), eta = c tau u
        A_k = sp.cancel(sp.diff(tau, t) / tau)
        if A_k.has(t) or A_k.has(x) or xi != 0:
            raise UnsupportedFlow("tau must be affine in t or a pure exponential in t")
        c = sp.cancel(rate / tau)
        if c.has(t) or c.has(x):
            raise UnsupportedFlow("eta/u must be a constant multiple of tau")
        A = sp.simplify(tau / sp.exp(A_k * t))
        k = A_k
        # e^{-k t(s)} = e^{-k t0} - k A s
        t_back = -sp.log(sp.exp(-k * t) + k * A * eps) / k
        rate_x, grow_t = sp.S.Zero, c * (t - t_back)
    q0, q1, q2 = (xi.coeff(x, j) for j in range(3))
    if xi == 0:
        x_back = x
    else:
        A_, B_, C_, D_ = _mobius_flow(q0, q1, q2, -eps)
        x_back = (A_ * x + B_) / (C_ * x + D_)
    grow_x = _path_integral(rate_x, xi, x, x_back, x, eps)
    return sol.subs({t: t_back, x: x_back}, simultaneous=True) * sp.exp(grow_t + grow_x)


def symmetry_orbit_check(eq: RDEquation, X: VectorField, sol, eps: float, grid: Grid) -> float:
    """Grid residual of the solution moved along the flow of X by eps."""
    return grid_residual(eq, finite_transform(X, sol, eps), grid)
