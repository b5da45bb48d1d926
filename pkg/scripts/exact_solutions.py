"""Grid residuals of the closed-form solutions, a numerical cross-check of one
of them, and the pull-back through the linear-source map.

    python3 scripts/exact_solutions.py [--nx 200]
"""

import argparse

from rdlie.equivgroup import build_transformation
from rdlie.expr import to_text
from rdlie.numeric import Grid, grid_residual, max_error, solve_pde
from rdlie.reduce import BranchError, exact_solution, pull_back

SOLUTIONS = [
    (9, "stationary", dict(n=1, alpha=-1, C=3)),
    (9, "stationary", dict(n=2, alpha=-3)),
    (9, "9.2", dict(n=2, alpha=0, C=10)),
    (9, "9.2", dict(n=1, alpha=-1, C=4)),
    (9, "9.4", dict(n=1, alpha=1, C1=1, C2=2)),
    (9, "9.4", dict(n=1, alpha=-1, C1=1, C2=1)),
    (12, "stationary", dict(alpha=3)),
    (12, "12.2", dict(alpha=1, C=2)),
    (12, "12.4", dict(alpha=-3, C1=1, C2=0)),
    (12, "12.4", dict(alpha=3, C1=1, C2=1)),
]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--nx", type=int, default=200)
    args = ap.parse_args()
    grid = Grid(1.0, 2.0, args.nx, 0.0, 0.5)
    for case, branch, consts in SOLUTIONS:
        try:
            sol = exact_solution(case, branch, consts)
        except BranchError as exc:
            print(f"row {case} {branch:10s} skipped: {exc}")
            continue
        res = grid_residual(sol.equation, sol.u, grid)
        print(f"row {case} {branch:10s} residual {res:9.2e}  u = {to_text(sol.u)}")
    sol = exact_solution(9, "9.2", dict(n=1, alpha=-1, C=4))
    run = solve_pde(sol.equation, sol.u, Grid(1.0, 2.0, args.nx, 0.0, 0.5))
    print(f"numerical vs 9.2 closed form: max error {max_error(run, sol.u):.2e}")
    base = exact_solution(9, "9.2", dict(n=1, alpha=0, C=8))
    for eps in (1, -1):
        back = pull_back(base, build_transformation("additional", dict(eps=eps, n=1)))
        res = grid_residual(back.equation, back.u, grid)
        print(f"pull-back eps={eps:+d}: {back.equation.literal()}  residual {res:.2e}")


if __name__ == "__main__":
    main()
