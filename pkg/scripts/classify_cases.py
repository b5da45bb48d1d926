"""Classify every table normal form and one Moebius image of it.

    python3 scripts/classify_cases.py [--json]
"""

import argparse
import json
import time

import sympy as sp

from rdlie.classify import classify, table_normal_form
from rdlie.equivgroup import apply, build_transformation, equations_match
from rdlie.expr import x

R = sp.Rational
ROWS = [
    (1, 1, 3, dict(f=1 + x ** 2, h=x)),
    (2, 1, 3, dict(a=1, b=0, c=1, d=0, p=1)),
    (2, 1, 3, dict(a=0, b=1, c=0, d=1, p=1)),
    (2, 1, 3, dict(a=0, b=0, c=1, d=1, p=1)),
    (3, 2, 5, dict(eps=1)),
    (4, 1, 1, dict(f=1 + x ** 2, eps=2)),
    (5, 1, 1, dict(a=0, b=1, c=0, d=1, eps=1)),
    (6, 2, 1, dict(eps=-1)),
    (7, R(-4, 3), 1, dict(eps=1)),
    (8, 1, 2, dict(h=1 + x ** 2)),
    (9, 1, 2, dict(alpha=-1)),
    (10, 2, 3, dict(eps=1)),
    (11, 1, None, {}),
    (12, R(-4, 3), R(-1, 3), dict(alpha=2)),
    (13, R(-4, 3), None, {}),
]
MAP = dict(delta1=R(3, 2), delta3=2, delta4=1, delta5=1, delta6=1, delta7=R(5, 4))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--json", action="store_true")
    args = ap.parse_args()
    report = []
    for case, n, m, params in ROWS:
        nf = table_normal_form(case, n, m, params)
        start = time.perf_counter()
        direct = classify(nf)
        g = build_transformation("G1", dict(n=n, **MAP))
        domain = tuple(sorted(float(g.X.subs(x, v)) for v in (1.0, 2.0)))
        image = apply(g, nf)
        res = classify(image, domain=domain)
        back = apply(res.normalizer, image, domain=domain)
        report.append({
            "row": case, "equation": nf.literal(), "direct": direct.case_id,
            "image": res.case_id, "normal_form": res.normal_form.literal(),
            "normalizer_maps_back": equations_match(back, res.normal_form, res.domain),
            "warnings": res.warnings, "seconds": round(time.perf_counter() - start, 2),
        })
    if args.json:
        print(json.dumps(report, indent=2))
        return
    for r in report:
        flag = "ok" if r["direct"] == r["image"] == r["row"] and r["normalizer_maps_back"] else "!!"
        print(f"{flag} row {r['row']:2d}  direct {r['direct']:2d}  image {r['image']:2d}  "
              f"{r['seconds']:6.2f}s  {r['equation']}")
        for w in r["warnings"]:
            print(f"     warning: {w}")


if __name__ == "__main__":
    main()
