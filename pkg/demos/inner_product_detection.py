"""
Detecting inner-product norms
=============================

Among all norms, the ones coming from an inner product are exactly those
whose square satisfies the quadratic identities.  Plugging Q = ||.||^2 into
either the shifted two-variable identity (mode "b", integer a with
|a| != 1) or the n-point centroid identity (mode "c") gives a numerical
detector: inner-product norms pass on every sample, anything else is
refuted by an explicit witness pair.
"""

import quadstab as qs

cases = [
    ("euclidean R^2", qs.euclidean(2)),
    ("weighted(1,3)", qs.weighted([1.0, 3.0])),
    ("l1 R^2", qs.l1(2)),
    ("l^{1/2} R^2", qs.lp_quasi(0.5, 2)),
]

print("mode b (a = 2), 4000 samples per norm:")
for name, spec in cases:
    res = qs.inner_product_characterization(spec, "b", 2, trials=4000, seed=0)
    if res.passed:
        print(f"  {name:16s} inner product: sup residual {res.sup_residual:.2e}")
    else:
        x, y = res.witness[0], res.witness[1]
        print(f"  {name:16s} NOT inner product: witness x={x.tolist()}, y={y.tolist()}, "
              f"residual {res.witness_residual:+.3f}")

print("\nmode c (n = 3) on the Euclidean plane:")
res = qs.inner_product_characterization(qs.euclidean(2), "c", 3, trials=4000, seed=1)
print(f"  passed={res.passed}, sup residual {res.sup_residual:.2e}")

# the l1 witness is the canonical basis pair: 9 + 9 + 4 - 12 - 6 = 4
print("\nl1 arithmetic at x=(1,0), y=(0,1), a=2:")
print("  |2x+y|^2 + |x+2y|^2 + |x-y|^2 - 3|x+y|^2 - 3(|x|^2+|y|^2) = 9+9+4-12-6 = 4")
