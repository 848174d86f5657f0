"""
Ranking candidate distribution families
=======================================

Fit Weibull, gamma and generalized extreme value families to one sample
by maximum likelihood, then rank them by the divergence between the
smoothed empirical density and each fitted density.
"""

from windinfo.distributions import rank_families
from windinfo.synthetic import generate_known_density_sample

# Draw from a Weibull density with shape 3.5 and scale 3.5 (a plausible
# daily wind-speed shape), then pretend we do not know where it came from.
x = generate_known_density_sample("weibull", (3.5, 3.5), 4000, seed=42)

reports = rank_families(x)
print(f"sample of {x.size} values, mean {x.mean():.3f}")
print(f"{'family':<10}{'params':<32}{'log_lik':>12}{'kl_nats':>10}  converged")
for r in reports:
    params = ", ".join(f"{p:.4f}" for p in r.params.values)
    print(f"{r.family:<10}{params:<32}{r.log_likelihood:>12.2f}"
          f"{r.kl_divergence:>10.4f}  {r.converged}")

best = reports[0]
print(f"\nbest family: {best.family} "
      f"(true generator was weibull with shape 3.5, scale 3.5)")
print("a misspecified family may report converged=False: the flag is the")
print("optimizer's own stopping criterion, the row is still best-so-far")
