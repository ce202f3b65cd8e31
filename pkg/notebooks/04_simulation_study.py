"""
A small Monte Carlo study
=========================

Run the three designs at a couple of reduced-form R^2 combinations and
compare the five estimators. Replication counts are kept small so the
script finishes in about a minute; raise ``REPS`` for smoother numbers.
"""

import numpy as np

from doubleselect.simulation import DesignSpec, run_grid, studentized_samples

REPS = 60

###############################################################################
# Design 1: homoscedastic, coefficients decaying like (1/j)^2
# -----------------------------------------------------------
reports = run_grid(1, [(0.0, 0.8), (0.8, 0.8)], reps=REPS, seed=3)
for rep in reports:
    print(f"design {rep.design}  R2_y={rep.r2_y}  R2_d={rep.r2_d}")
    for name, s in rep.estimators.items():
        print(f"  {name:>24}: rmse {s.rmse:.3f}  bias {s.bias:+.3f}  "
              f"rejection {s.rejection_rate:.2f}  excluded {s.exclusions}")

###############################################################################
# Designs 2 and 3 at the strongest confounding level
# --------------------------------------------------
for design in (2, 3):
    (rep,) = run_grid(design, [(0.8, 0.8)], reps=REPS, seed=3,
                      estimators=("ds-oracle", "post-lasso", "double-selection"))
    rates = {k: round(v.rejection_rate, 2) for k, v in rep.estimators.items()}
    print(f"design {design}: rejection rates {rates}")

###############################################################################
# Studentized statistics
# ----------------------
# The distance to N(0, 1) is small for double selection and large for
# post-single selection when the treatment equation is strong.
spec = DesignSpec(1, r2_y=0.8, r2_d=0.8, seed=4)
for est in ("post-lasso", "double-selection"):
    t, ks = studentized_samples(spec, 100, est)
    print(f"{est:>17}: KS distance {ks:.3f}, mean t {np.mean(t):+.2f}")
