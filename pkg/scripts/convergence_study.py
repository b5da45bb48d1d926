"""Grid refinement for u_t = (u u_x)_x against u = x^2/(6(1-t)).

    python3 scripts/convergence_study.py [--levels 4] [--t1 0.5] [--csv out.csv]
"""

import argparse
import csv

from rdlie.conslaws import conservation_laws
from rdlie.equation import make_equation
from rdlie.expr import t, x
from rdlie.numeric import Grid, conserved_integral_drift, max_error, observed_orders, solve_pde

EQ = make_equation(1, 1, 0, 1)
EXACT = x ** 2 / (6 * (1 - t))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--levels", type=int, default=4)
    ap.add_argument("--coarsest", type=int, default=26, help="node count of the coarsest grid")
    ap.add_argument("--t1", type=float, default=0.5)
    ap.add_argument("--csv", help="write nx, dx, error, order rows here")
    args = ap.parse_args()
    sizes = [(args.coarsest - 1) * 2 ** k + 1 for k in range(args.levels)]
    laws = conservation_laws(EQ)
    rows = []
    for nx in sizes:
        grid = Grid(1.0, 2.0, nx, 0.0, args.t1)
        sol = solve_pde(EQ, EXACT, grid, snapshots=11)
        drift = max(conserved_integral_drift(sol, cv, EQ) for cv in laws)
        rows.append([nx, grid.dx, max_error(sol, EXACT), drift])
    orders = [float("nan")] + observed_orders([r[2] for r in rows], [r[0] - 1 for r in rows])
    print(f"{'nx':>6} {'dx':>10} {'max error':>12} {'order':>7} {'law drift':>10}")
    for (nx, dx, err, drift), p in zip(rows, orders):
        print(f"{nx:6d} {dx:10.3e} {err:12.4e} {p:7.3f} {drift:10.2e}")
    zf = solve_pde(EQ, x ** 2 / 6, Grid(1.0, 2.0, 200, 0.0, args.t1, "zero-flux"))
    mass = next(cv for cv in laws if cv.characteristic == 1)
    print(f"zero-flux mass drift (nx=200): {conserved_integral_drift(zf, mass, EQ):.2e}")
    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["nx", "dx", "max_error", "order", "drift"])
            for (nx, dx, err, drift), p in zip(rows, orders):
                w.writerow([nx, dx, err, p, drift])


if __name__ == "__main__":
    main()
