"""
Restriction and boundary exponents by Monte Carlo
=================================================

Small runs so the script finishes in a couple of minutes; the acceptance
suite uses the full path counts.
"""
from slecft import (
    SleParams,
    analytic_avoid_probability,
    boundary_exponent_fit,
    half_disk,
    martingale_check,
    restriction_record,
    vertical_slit,
)

# P[SLE(8/3) avoids A] = phi_A'(0)^(5/8)
for h in (vertical_slit(1.0, 0.5), half_disk(2.0, 1.0)):
    p = SleParams(8 / 3, T=4 * h.reach**2, n_steps=8000)
    rec = restriction_record(p, h, 1000)
    print(f"{h.kind:14s} MC {rec.estimate:.4f} +- {rec.stderr:.4f}   exact {analytic_avoid_probability(h):.4f}")

# hitting a slit of height eps sqrt 2 at x = 1 decays like eps^(8/kappa - 1)
fit = boundary_exponent_fit(6.0, 1.0, [0.1, 0.2, 0.4], 400, T=8.0, n_steps=8000)
print(f"kappa=6: s_hat = {fit.s_hat:.3f} +- {fit.stderr:.3f}  (theory {fit.s_theory:.3f})")
print(fit.csv())

# g'(x)^2 alpha / (g(x) - W)^2 keeps its mean while the curve is far from x
rec = martingale_check(SleParams(8 / 3, T=0.02, n_steps=1000), 1.0, 4000)
print(f"martingale: {rec.estimate:.4f} +- {rec.stderr:.4f}  vs  {rec.analytic}")
