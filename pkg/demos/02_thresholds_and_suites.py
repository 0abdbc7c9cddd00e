"""Pinching thresholds from exact arithmetic, then a pass over the oracle suites."""

from fractions import Fraction

from smcflab.pinching import auxiliary_function_check, threshold_solve, threshold_table
from smcflab.suites import run_suites

for row in threshold_table([Fraction(1, 2), Fraction(3, 5), Fraction(2, 3)]):
    print(f"{row['case']:<16} root {row['root']:<16} bound {row['stated_bound']:<8} "
          f"margin {row['margin']:<10} certified {row['certified']}")

r = threshold_solve("Thm51_Hnonzero")
print("\nexact root:", r.root_exact)

for name in ("exp", "linear", "constant"):
    s = auxiliary_function_check(name).summary()
    print(f"f = {name:<8} passed {s['passed']!s:<5}  max violation {s['max_violation'] + 0.0:.3g}")

print()
for res in run_suites(20000, seed=1):
    print(f"{res.name:<20} violations {res.violations}  worst margin {res.worst_margin:+.3e}")
