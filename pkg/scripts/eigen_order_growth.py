"""Measured vanishing order of degree-floor(sqrt(lam)) eigenfunctions against the bound C(1 + lam^(2/3)).

Uses perfect squares lam = k^2 up to 1024 so the gap between the order
(~ lam^(1/2)) and the bound (~ lam^(2/3)) is visible on a log-log plot. Past
k = 32 the sup over the smallest sampled radius underflows and the order
can no longer be resolved.

    python scripts/eigen_order_growth.py --out results/eigen_order
"""

import argparse
import os

from carleman_lab import experiments as ex
from carleman_lab.report import write_rows, write_svg_plot


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="results/eigen_order")
    args = ap.parse_args()
    lams = tuple(k * k for k in range(4, 33, 2))
    out = ex.eigen_order_experiment(ms=(1, 2), lams=lams)
    print(out.line())
    os.makedirs(args.out, exist_ok=True)
    write_rows(os.path.join(args.out, "eigen_order.csv"), out.rows)
    series = {}
    for r in out.rows:
        series.setdefault(f"{r['family']} order", ([], []))
        series.setdefault(f"{r['family']} bound", ([], []))
        series[f"{r['family']} order"][0].append(r["lambda_or_k"])
        series[f"{r['family']} order"][1].append(r["measured_order"])
        series[f"{r['family']} bound"][0].append(r["lambda_or_k"])
        series[f"{r['family']} bound"][1].append(r["bound"])
    write_svg_plot(os.path.join(args.out, "eigen_order.svg"), series, "vanishing order against the bound",
                   "lambda", "order")
    for r in out.rows:
        print(f"{r['family']}  lambda = {r['lambda_or_k']:>8}  order = {r['measured_order']:8.3f}  "
              f"bound = {r['bound']:10.3f}  {'ok' if r['passed'] else 'VIOLATED'}")


if __name__ == "__main__":
    main()
