"""
Bounds in genuine quasi-Banach and p-Banach settings
====================================================

The error bound of the direct method depends on the codomain's geometry in
two interchangeable ways: through the modulus of concavity K, or through
the exponent p of a p-norm.  This demo runs a constant-budget experiment
in the l^{1/2} plane (a real quasi-norm with K = 2), the p-norm route at
p = 1/2, and checks that the K = 1 and p = 1 formulas are the same thing.
"""

import numpy as np

import quadstab as qs
import quadstab.harness as h

# constant budget, codomain = l^{1/2} on R^2 (K = 2 < (n-1)^2 = 4)
res = h.run_preset("constant-quasinorm", write_csv=False)
theta = res.summary["control"]["theta"]
print(f"l^(1/2) plane, constant budget theta = {theta:.4f}")
print(f"bound (n+2) K theta / (n [(n-1)^2 - K]) = 5 theta / 3 = {5 * theta / 3:.4f}")
worst = max(r.deviation for r in res.rows)
print(f"worst observed deviation over {len(res.rows)} probes: {worst:.4f}   "
      f"all within bound: {res.exit_code == 0}")

# the same space through the p-norm route, power budget r = 1
res_p = h.run_preset("pnorm-phalf", write_csv=False)
eps = res_p.summary["control"]["epsilon"]
print(f"\np = 1/2 route, fitted eps = {eps:.4f}")
print(f"closed form (n+2) eps |x| / (n [2^(2p) - 2^p]^(1/p)) at |x|=1: "
      f"{qs.closed_form_bounds(3, 'power', 'forward', norm_x=1.0, p=0.5, epsilon=eps, r=1.0):.4f}")
print(f"all probes within bound: {res_p.exit_code == 0}")

# K = 1 and p = 1 give identical numbers, series and closed form alike
phi = qs.power(1.0, 1.5)
x = np.array([2.0])
sk = qs.series_bound_forward(phi, 4, 1.0, x, 1e-15)
sp = qs.series_bound_forward_p(phi, 4, 1.0, x, 1e-15)
print(f"\nK=1 vs p=1 series at n=4, r=1.5, |x|=2: {sk:.12f} vs {sp:.12f}")
res_eq = h.run_preset("k1-equals-p1", write_csv=False)
print(f"grid agreement: {res_eq.summary['text']} over {len(res_eq.rows)} points")

# K enters the convergence condition, not just the bound: at K = 2 the
# forward power series needs r < 2 - log_2(K) = 1
print(f"\nregimes at K=2, n=3: r=0.5 -> {qs.power_regime(3, 2.0, 0.5)}, "
      f"r=1.5 -> {qs.power_regime(3, 2.0, 1.5)}, r=3.5 -> {qs.power_regime(3, 2.0, 3.5)}")
