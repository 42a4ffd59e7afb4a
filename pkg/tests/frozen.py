"""Reference values computed once by independent means and frozen here.

Each entry notes how it was obtained so it can be regenerated.
"""

from fractions import Fraction

# phi(r) = log r + 2 log|log r| at r = 0.05, evaluated with mpmath at 30 digits
PHI_005 = -0.80135487282409359

# k0 = (phi(R1/2) - phi(r1)) / (phi(R1/2) - phi(r0)) for (r0, r1, R1) = (0.001, 0.04, 0.1), mpmath
K0_REFERENCE = 0.035454112918367436

# symbol of r^4 Delta^2 on r^a Y_2 in three dimensions, expanded by sympy (ascending powers of a)
BIHARMONIC_SYMBOL_K2_N3 = (24.0, 14.0, -13.0, -2.0, 1.0)

# exponents for (n, m, s, alpha0) = (3, 1, inf, 0): nu and the decay exponent at infinity
NU_BASELINE = Fraction(2, 3)
THETA_BASELINE = Fraction(4, 3)

# fourth-order accurate centered weights for the second derivative (Fornberg 1988, table 1)
D2_ACC4 = (-1 / 12, 4 / 3, -5 / 2, 4 / 3, -1 / 12)
