"""The frontier of achievable (alpha, beta) pairs for the biased binary coin.

Left-prefix tables are extremal: for each count of zero leaves, they give
the largest alpha and the smallest beta.  The curve they trace stays a
fixed distance from (1/2, 1/2), and every other table lands on the far side
of it.
"""

from fractions import Fraction

from svx import dominates_curve_point, f_delta_curve, phi_set
from svx.binary_sv import binary_spec, curve_gap, verify_prefix_optimality

for delta in (Fraction(1, 4), Fraction(1, 3), Fraction(45, 100)):
    pts = f_delta_curve(delta, 12)
    print(f"delta={delta}: {len(pts)} curve points, Chebyshev gap to the center {curve_gap(pts):.4f}")

delta = Fraction(1, 3)
for n in range(1, 4):
    rep = verify_prefix_optimality(delta, n)
    print(f"n={n}: prefix tables extremal among all {2 ** 2 ** n} tables: {rep.ok}")

curve = f_delta_curve(delta, 12)
phi = phi_set(binary_spec(delta), 3)
print("every depth-3 pair dominates some curve point:", bool(dominates_curve_point(phi.as_array(), curve).all()))
