"""
Lasso and Square-root Lasso by coordinate descent
=================================================

Fit both programs on a small synthetic problem, then check the fits
against their optimality certificates.
"""

import numpy as np

from doubleselect.lasso import LassoProblem, kkt_residual, post_lasso_refit, solve
from doubleselect.penalty import lasso_lambda, sqrt_lasso_lambda

###############################################################################
# A sparse signal in 50 candidate regressors
# ------------------------------------------
rng = np.random.default_rng(0)
n, p = 80, 50
X = rng.standard_normal((n, p))
beta = np.zeros(p)
beta[[0, 3, 7]] = [1.5, -1.0, 0.75]
y = X @ beta + rng.standard_normal(n)

###############################################################################
# The default penalty levels differ by a factor of two, because the
# square-root objective is measured on the scale of a standard deviation.
lam = lasso_lambda(n, p)
lam_sqrt = sqrt_lasso_lambda(n, p)
print(f"lasso lambda = {lam:.3f}, sqrt-lasso lambda = {lam_sqrt:.3f}")

###############################################################################
# Solve both programs with unit loadings
# --------------------------------------
# The Lasso penalty scales with the noise level, so here it is multiplied
# by the true noise standard deviation (one). The square-root version does
# not need that.
loadings = np.ones(p)
fit = solve(LassoProblem(X, y, lam, loadings, "lasso"))
fit_sqrt = solve(LassoProblem(X, y, lam_sqrt, loadings, "sqrt-lasso"))
for name, f in [("lasso", fit), ("sqrt-lasso", fit_sqrt)]:
    print(f"{name:>10}: support {f.support.tolist()}, sweeps {f.iterations}, "
          f"KKT residual {f.kkt_residual:.1e}, converged {f.converged}")

###############################################################################
# The certificate is recomputed from scratch, so it also catches a bad point.
bad = fit.beta.copy()
bad[fit.support[0]] += 0.1
print("perturbed KKT residual:", kkt_residual(LassoProblem(X, y, lam, loadings), bad))

###############################################################################
# Post-Lasso removes the shrinkage on the selected coefficients.
refit = post_lasso_refit(X, y, fit.support)
print("lasso    :", np.round(fit.beta[fit.support], 3))
print("post-OLS :", np.round(refit.coefficients, 3))
