"""
Where the guarantees stop
=========================

The constant-budget bound (n+2) K theta / (n [(n-1)^2 - K]) has a
denominator that crosses zero at K = (n-1)^2, and for a power budget the
window -log_(n-1) K <= r - 2 <= log_(n-1) K admits neither rescaling
scheme.  Both regions are first-class rejections carrying the tag
"open-problem region": the machinery refuses to print a number it cannot
guarantee.
"""

import quadstab as qs
import quadstab.harness as h

n, theta = 3, 1.0
print(f"constant budget at n = {n}: bound vs K (denominator (n-1)^2 - K):")
for K in (1.0, 2.0, 3.0, 3.5, 3.9, 3.99, 4.0, 4.5):
    denom = (n - 1) ** 2 - K
    try:
        bound = qs.closed_form_bounds(n, "constant", "forward", K=K, theta=theta)
        print(f"  K = {K:5.2f}  denominator = {denom:+6.2f}  bound = {bound:10.4f}")
    except qs.OpenProblemError:
        print(f"  K = {K:5.2f}  denominator = {denom:+6.2f}  REJECTED (open-problem region)")

print("\npower budget at n = 3, K = 2: the dead zone is 1 <= r <= 3")
for r in (0.5, 0.99, 1.0, 2.0, 3.0, 3.01, 4.0):
    print(f"  r = {r:5.2f} -> {qs.power_regime(3, 2.0, r)}")

# the preset exits with the expected-rejection code (4)
res = h.run_preset("open-problem-deadzone", write_csv=False)
print(f"\npreset 'open-problem-deadzone': exit code {res.exit_code}")
for entry in res.summary["sweep"]:
    tag = "ok" if entry["bound"] is not None else "rejected"
    print(f"  K = {entry['K']:4.1f}  denominator = {entry['denominator']:+5.2f}  {tag}")
