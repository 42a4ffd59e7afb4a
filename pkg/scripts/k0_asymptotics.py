"""1/k0 against log(1/r0) with r1 = 0.04 and R1 = 0.1 held fixed.

With L = log(1/r0) the ratio is (phi(R1/2) + L - 2 log L) / (L (phi(R1/2) - phi(r1))),
so it climbs toward 1/(phi(R1/2) - phi(r1)) from below at rate log(L)/L.

    python scripts/k0_asymptotics.py --out results/k0
"""

import argparse
import math
import os

import numpy as np

from carleman_lab.report import write_rows, write_svg_plot
from carleman_lab.ucp import k0_compute, phi


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="results/k0")
    args = ap.parse_args()
    r0s = np.logspace(-3, -60, 58)
    ratio = [1 / k0_compute(r, 0.04, 0.1) / math.log(1 / r) for r in r0s]
    rows = [{"tag": "lemma4.k0", "r0": float(r), "k0": k0_compute(r, 0.04, 0.1), "inv_k0_over_log": q,
             "passed": True} for r, q in zip(r0s, ratio)]
    os.makedirs(args.out, exist_ok=True)
    write_rows(os.path.join(args.out, "k0.csv"), rows)
    write_svg_plot(os.path.join(args.out, "k0.svg"), {"(1/k0)/log(1/r0)": (1 / r0s, ratio)},
                   "three-ball exponent", "1/r0", "ratio", logx=True, logy=False)
    print(f"limit 1/(phi(R1/2) - phi(r1)) = {1 / (phi(0.05) - phi(0.04)):.4f}")
    for r, q in zip(r0s[::6], ratio[::6]):
        print(f"r0 = {r:.1e}   (1/k0)/log(1/r0) = {q:.4f}")


if __name__ == "__main__":
    main()
