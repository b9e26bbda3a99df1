"""Extracting nearly fair bits when the dice leave a zero-mean direction.

Two dice over three symbols cannot span the simplex, so some function psi
has mean zero under both.  Summing psi over the stream gives a martingale
whatever the adversary does, and its exit side is an almost fair bit.
"""

from svx import MartingaleConfig, bias_bracket, extract_bits, find_psi, sample_sequence
from svx.extractor import WalkSignStrategy, simulate_walks
from svx.instances import three_symbol

spec = three_symbol()
w = find_psi(spec)
print("psi:", [str(x) for x in w.values], " means:", [str(m) for m in w.means])

cfg = MartingaleConfig(20, 20000)
br = bias_bracket(cfg, w)
print(f"guaranteed Pr[1] in [{br.lo:.4f}, {br.hi:.4f}] (tail allowance {br.tail:.2e})")

# One stream against an adversary that always pushes the walk back toward zero.
# A short block keeps this sequential run quick.
short = MartingaleConfig(6, 300)
adv = WalkSignStrategy.for_spec(spec, w)
k = 16
stream = sample_sequence(spec, adv, k * short.block_length, seed=1)
bits = extract_bits(w, short, stream, k)
print("bits:", "".join(str(b.bit) for b in bits))

# Many walks, vectorized, against three adversaries.  Here psi takes the
# value -1 with probability 1/4 under either die, so the walk has the same
# law whatever the adversary does and the three rows coincide.
for policy in ("uniform", "constant:1", "adaptive-sign"):
    s = simulate_walks(spec, w, cfg, 4000, policy, seed=0).summary()
    print(f"{policy:>13}: freq(1) = {s['freq_one']:.3f}, E[Y_tau] = {s['mean_y_tau']:+.3f}, "
          f"mean stop = {s['mean_tau']:.0f}")
