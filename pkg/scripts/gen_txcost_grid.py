#!/usr/bin/env python3
"""One-off generator for the transaction-cost market grid data.

Discretizes a standard normal capped at M into n equal-probability cells
(n = 4, 8, 16), takes the quantile midpoints x_k = Phi^{-1}((2k+1)/(2n))
capped at M, and freezes e_k = exp(x_k) as rationals with 30 significant
digits.  At these n the cap never binds (Phi(3) > 31/32).

The library never recomputes these: the frozen rationals are the model.
Rerun only to regenerate src/conerisk/data/txcost_grid.json.
"""

import json
import pathlib
from fractions import Fraction

import mpmath

mpmath.mp.dps = 50

M = 3
SIG_DIGITS = 30
SIZES = (4, 8, 16)


def phi_inv(u):
    return mpmath.sqrt(2) * mpmath.erfinv(2 * u - 1)


def to_rational_30(x) -> str:
    s = mpmath.nstr(x, SIG_DIGITS, strip_zeros=False)
    f = Fraction(s)
    return f"{f.numerator}/{f.denominator}"


def main():
    grids = {}
    for n in SIZES:
        eks = []
        for k in range(n):
            u = mpmath.mpf(2 * k + 1) / (2 * n)
            x = min(phi_inv(u), mpmath.mpf(M))
            eks.append(to_rational_30(mpmath.e**x))
        grids[str(n)] = eks
    out = {
        "description": "exp of equal-probability quantile midpoints of a "
                       "standard normal capped at M, frozen to 30 "
                       "significant digits",
        "M": M,
        "sig_digits": SIG_DIGITS,
        "grids": grids,
    }
    path = (pathlib.Path(__file__).resolve().parent.parent
            / "src" / "conerisk" / "data" / "txcost_grid.json")
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(out, indent=2) + "\n")
    print(f"wrote {path}")


if __name__ == "__main__":
    main()
