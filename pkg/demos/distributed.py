"""Two parties reading correlated views of one adversarial source.

If the views share a nontrivial common part, both parties can compute it
locally and run the same martingale extractor on it, agreeing on every
bit.  If the only shared structure is a noisy coin, the certificate shows
that agreement and fairness cannot both be had.
"""

from svx import MartingaleConfig, bias_bracket, common_extract, distributed_verdict, maximal_correlation
from svx.instances import copied, dsbs, erasure, three_symbol

rep = distributed_verdict(erasure())
print(f"erasure channel: {rep.status}")
print(f"  rho per die {[round(r, 4) for r in rep.rho_per_die]}, certificate epsilon {rep.certificate.epsilon:.3g}")

js = copied(three_symbol())
rep = distributed_verdict(js)
print(f"copied three-symbol source: {rep.status}")
cfg = MartingaleConfig(18, 5000)
res = common_extract(js, cfg, 200, seed=3, report=rep)
br = bias_bracket(cfg, res.witness)
mean = sum(res.alice) / len(res.alice)
print(f"  200 bits, agreement {res.agreement}, freq(1) {mean:.3f}, bracket [{br.lo:.3f}, {br.hi:.3f}]")

for eps in (0.0, 0.1, 0.3, 0.5):
    print(f"maximal correlation of DSBS({eps}): {maximal_correlation(dsbs(eps)).rho:.4f}")
