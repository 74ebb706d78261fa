"""
Exact sign-flip tests and hemisphere asymmetry
==============================================

Five paired differences, all positive, give the smallest one-sided p an
exact sign-flip test can produce with n = 5: 1/32. The asymmetry helper
then turns a flat result table into left-minus-right series.
"""

from collections import namedtuple

import numpy as np

from brainalign.stats import (
    lh_rh_asymmetry,
    one_sample_ttest,
    sign_flip_permutation_test,
)

d = np.array([0.11, 0.24, 0.05, 0.30, 0.18])
res = sign_flip_permutation_test(d, sidedness="one")
print(f"all-positive n=5: p = {res.p_value} ({res.method}), "
      f"mean diff = {res.statistic:.3f}")
assert res.p_value == 1 / 32

# a tiny result table: one model, three subjects, one ROI pair
Row = namedtuple("Row", "model subject roi layer rho")
rows = []
for s, (lh, rh) in enumerate([(0.52, 0.31), (0.47, 0.40), (0.55, 0.28)]):
    rows.append(Row("m", f"s{s}", "LH_IFG", 3, lh))
    rows.append(Row("m", f"s{s}", "RH_IFG", 3, rh))

series = lh_rh_asymmetry(rows, pairs=[("LH_IFG", "RH_IFG")], per="subject")
diff = series[("LH_IFG", "RH_IFG")]
print(f"LH-RH diffs per subject: {np.round(diff.values, 2)}")

t = one_sample_ttest(diff.values)
print(f"one-sample t = {t.statistic:.2f}, two-sided p = {t.p_value:.4f}")
