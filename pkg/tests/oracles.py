"""Brute-force reference solutions used by the solver tests."""

import itertools

import numpy as np
from scipy.optimize import minimize


def lasso_enumeration(X, y, lam, loadings):
    """Exact weighted-Lasso minimum by enumerating every sign pattern.

    For a fixed pattern s in {-1, 0, 1}^p the objective is a quadratic on the
    active set with minimizer G_AA^{-1} (b_A - t_A s_A / 2); patterns whose
    solution has the wrong signs are discarded. Returns (objective, beta).
    """
    n, p = X.shape
    G = X.T @ X / n
    b = X.T @ y / n
    t = lam * np.asarray(loadings) / n

    def obj(beta):
        r = y - X @ beta
        return np.mean(r**2) + np.sum(t * np.abs(beta))

    best = (obj(np.zeros(p)), np.zeros(p))
    for signs in itertools.product((-1, 0, 1), repeat=p):
        s = np.array(signs, dtype=float)
        A = np.flatnonzero(s)
        if A.size == 0:
            continue
        try:
            bA = np.linalg.solve(G[np.ix_(A, A)], b[A] - 0.5 * t[A] * s[A])
        except np.linalg.LinAlgError:
            continue
        if np.any(np.sign(bA) != s[A]):
            continue
        beta = np.zeros(p)
        beta[A] = bA
        val = obj(beta)
        if val < best[0]:
            best = (val, beta)
    return best


def sqrt_lasso_orthants(X, y, lam, loadings):
    """Square-root Lasso minimum by smooth minimization over each closed orthant."""
    n, p = X.shape
    t = lam * np.asarray(loadings) / n
    best = (np.inf, None)
    for signs in itertools.product((-1.0, 1.0), repeat=p):
        s = np.array(signs)

        def f(u):
            beta = s * u
            r = y - X @ beta
            q = np.sqrt(np.mean(r**2))
            grad = s * (-(X.T @ r) / n / q) + t
            return q + np.dot(t, u), grad

        res = minimize(f, np.zeros(p) + 1e-3, jac=True, method="L-BFGS-B",
                       bounds=[(0, None)] * p, options={"ftol": 1e-15, "gtol": 1e-12, "maxiter": 5000})
        if res.fun < best[0]:
            best = (float(res.fun), s * res.x)
    return best
