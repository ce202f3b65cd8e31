"""
Data-driven penalty loadings
============================

Heteroscedastic noise calls for coefficient-specific penalty loadings.
The iterated estimate starts from a conservative guess and refines it
from Post-Lasso residuals.
"""

import numpy as np

from doubleselect.penalty import PenaltyConfig, estimate_loadings

###############################################################################
# Noise whose scale depends on the first regressor
# ------------------------------------------------
rng = np.random.default_rng(1)
n, p = 200, 100
X = rng.standard_normal((n, p))
y = X[:, 0] - 0.5 * X[:, 1] + np.abs(X[:, 0]) * rng.standard_normal(n)

###############################################################################
# Compare the four selectors
# --------------------------
for selector in ("iterated-lasso", "sqrt-lasso-iterated",
                 "sqrt-lasso-homoscedastic", "sqrt-lasso-conservative"):
    est = estimate_loadings(X, y, PenaltyConfig(selector=selector))
    print(f"{selector:>25}: lambda {est.lam:7.2f}, support {est.fit.support.tolist()}, "
          f"updates {est.iterations}, converged {est.converged}")

###############################################################################
# The iterated loading of the first regressor is larger than the others,
# because its cross-moment with the squared residual is larger.
est = estimate_loadings(X, y, PenaltyConfig())
print("loading of x1:", round(est.loadings[0], 3))
print("median loading of the rest:", round(float(np.median(est.loadings[1:])), 3))
print("change per update:", ["%.1e" % h for h in est.history])
