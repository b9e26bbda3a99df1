"""Why no deterministic extractor works on a biased binary coin chosen adversarially.

The source emits bits whose bias the adversary picks from {1/3, 2/3} at
every step.  We show the three pieces of evidence the library produces:
the verdict, the exact optimal adversary against a concrete extractor, and
the certificate that keeps every achievable (alpha, beta) pair away from a
fair bit.
"""

from fractions import Fraction

from svx import alpha_beta, build_g_certificate, check_g_dominates, optimal_strategy, phi_set, verdict
from svx.binary_sv import binary_spec, left_prefix_table

spec = binary_spec(Fraction(1, 3))
v = verdict(spec)
print(f"verdict: {v.status} ({v.note})")

# A natural extractor on three bits: output 0 on the first three strings.
table = left_prefix_table(3, 3)
ab = alpha_beta(spec, table)
print(f"prefix table 000,001,010 -> 0: Pr[0] ranges over [{ab.alpha}, {ab.beta}]")

# The adversary that pushes Pr[0] up is a depth-3 decision tree over dice.
tree = optimal_strategy(spec, table, "max")
print("adversary choices by history:", {"".join(map(str, h)) or "-": d for h, d in tree.choice.items()})

# Every table on up to 4 bits, all at once: the cloud of achievable pairs.
cert = build_g_certificate(spec)
print(f"spread constant {cert.delta_exact}, certificate epsilon {cert.epsilon}")
for n in range(1, 5):
    phi = phi_set(spec, n)
    print(f"n={n}: {len(phi.points):3d} distinct pairs, all above g: {check_g_dominates(cert, phi)}")
print(f"so every extractor misses a fair bit by at least {cert.margin():.4f} in one direction")
