"""
Treatment effects after double selection
========================================

Selecting controls only for the outcome equation can drop a confounder
that matters mostly through the treatment. Double selection also selects
for the treatment equation and keeps the union.
"""

import numpy as np

from doubleselect.numerics import RngStream
from doubleselect.selection import (
    post_double_selection,
    post_double_selection_ridge,
    post_single_selection,
)

###############################################################################
# A confounder with a weak direct effect on the outcome
# -----------------------------------------------------
rng = np.random.default_rng(2)
n, p = 200, 150
X = rng.standard_normal((n, p))
d = 1.0 * X[:, 0] + rng.standard_normal(n)
y = 0.5 * d + 0.3 * X[:, 0] + X[:, 1] + rng.standard_normal(n)
Xc = np.column_stack([np.ones(n), X])  # intercept first

###############################################################################
# Single and double selection
# ---------------------------
single = post_single_selection(y, d, Xc)
double = post_double_selection(y, d, Xc)
print(f"post-single : alpha {single.alpha_hat:.3f}  CI {np.round(single.ci, 3)}")
print(f"post-double : alpha {double.alpha_hat:.3f}  CI {np.round(double.ci, 3)}")

###############################################################################
# The selected sets, with column 0 the intercept (always kept).
sets = double.selection
print("treatment equation:", sets.treatment)
print("outcome equation  :", sets.outcome)
print("union             :", sets.union)

###############################################################################
# Both standard errors
# --------------------
# The plug-in sandwich uses degrees-of-freedom adjusted residuals, the
# jackknife weights each squared residual by its leverage.
print(f"se plug-in {double.se_plugin:.4f}, se jackknife {double.se_jackknife:.4f}")

###############################################################################
# Forcing controls into the final regression
# ------------------------------------------
forced = post_double_selection(y, d, Xc, amelioration=[5, 6])
print("union with amelioration set:", forced.selection.union)

###############################################################################
# The ridge variant adds a cross-validated ridge fit of the treatment as
# one more candidate control. The stream makes the fold split reproducible.
ridge = post_double_selection_ridge(y, d, Xc, stream=RngStream(seed=7))
print(f"ridge variant: alpha {ridge.alpha_hat:.3f}, ridge column selected: "
      f"{Xc.shape[1] in ridge.selection.union}")
