"""Numba coordinate-descent kernels for the Lasso and Square-root Lasso.

Both kernels solve

    lasso:       min  En[(y - X b)^2]       + (lam / n) * sum_j w_j |b_j|
    sqrt-lasso:  min  sqrt(En[(y - X b)^2]) + (lam / n) * sum_j w_j |b_j|

by cyclic exact coordinate minimization. ``pen`` holds ``lam * w_j / n``.
The covariance kernel works on G = X'X / n and g = X'y / n; the streaming
kernel keeps the residual vector instead of G.
"""

import numpy as np
from numba import njit

LASSO = 0
SQRT_LASSO = 1


@njit(cache=True)
def _coordinate_min(kind, a, c, q0, mu):
    # a = En[x_j^2], c = En[x_j r_j] with r_j the partial residual,
    # q0 = En[r_j^2], mu = penalty weight on |b_j|.
    if a <= 0.0:
        return 0.0
    if kind == LASSO:
        thr = 0.5 * mu
        if c > thr:
            return (c - thr) / a
        if c < -thr:
            return (c + thr) / a
        return 0.0
    # sqrt-lasso: zero iff |c| <= mu * sqrt(q0)
    if abs(c) <= mu * np.sqrt(q0) or a <= mu * mu:
        return 0.0
    s2 = q0 - c * c / a
    if s2 < 0.0:
        s2 = 0.0
    shift = mu * np.sqrt(s2) / np.sqrt(a * (a - mu * mu))
    if c > 0.0:
        return c / a - shift
    return c / a + shift


@njit(cache=True)
def _kkt_from_grad(kind, beta, e_corr, Q, pen, floor2):
    # e_corr[j] = En[x_j e] with e the full residual.
    worst = 0.0
    if kind == LASSO:
        scale = 2.0
    else:
        denom = max(Q, floor2)
        scale = 1.0 / np.sqrt(denom) if denom > 0.0 else 0.0
    for j in range(beta.shape[0]):
        g = scale * e_corr[j]
        if beta[j] == 0.0:
            v = abs(g) - pen[j]
            if v < 0.0:
                v = 0.0
        elif beta[j] > 0.0:
            v = abs(g - pen[j])
        else:
            v = abs(g + pen[j])
        if v > worst:
            worst = v
    return worst


@njit(cache=True)
def _objective(kind, Q, beta, pen, floor2):
    l1 = 0.0
    for j in range(beta.shape[0]):
        l1 += pen[j] * abs(beta[j])
    if kind == LASSO:
        return Q + l1
    return np.sqrt(max(Q, floor2)) + l1


@njit(cache=True)
def cd_covariance(kind, G, g, yy, pen, beta, max_sweeps, change_tol, kkt_tol, floor2, history):
    """Covariance-update coordinate descent. Returns (sweeps, kkt)."""
    p = beta.shape[0]
    gb = G @ beta
    Q = yy - 2.0 * np.dot(g, beta) + np.dot(beta, gb)
    kkt = np.inf
    for sweep in range(max_sweeps):
        max_change = 0.0
        for j in range(p):
            a = G[j, j]
            if a <= 0.0:
                if beta[j] != 0.0:
                    beta[j] = 0.0
                continue
            ej = g[j] - gb[j]
            bj = beta[j]
            c = ej + a * bj
            q0 = Q + 2.0 * bj * ej + a * bj * bj
            if q0 < floor2:
                q0 = floor2
            new = _coordinate_min(kind, a, c, q0, pen[j])
            delta = new - bj
            if delta != 0.0:
                Q = Q - 2.0 * delta * ej + a * delta * delta
                for k in range(p):
                    gb[k] += G[k, j] * delta
                beta[j] = new
                if abs(delta) > max_change:
                    max_change = abs(delta)
        binf = 0.0
        for j in range(p):
            if abs(beta[j]) > binf:
                binf = abs(beta[j])
        history[sweep] = _objective(kind, Q, beta, pen, floor2)
        if max_change <= change_tol * (1.0 + binf):
            # refresh running quantities before certifying
            gb = G @ beta
            Q = yy - 2.0 * np.dot(g, beta) + np.dot(beta, gb)
            kkt = _kkt_from_grad(kind, beta, g - gb, Q, pen, floor2)
            if kkt <= kkt_tol or (kind == SQRT_LASSO and Q <= floor2):
                return sweep + 1, kkt
    gb = G @ beta
    Q = yy - 2.0 * np.dot(g, beta) + np.dot(beta, gb)
    kkt = _kkt_from_grad(kind, beta, g - gb, Q, pen, floor2)
    return max_sweeps, kkt


@njit(cache=True)
def cd_streaming(kind, X, y, col_ms, pen, beta, max_sweeps, change_tol, kkt_tol, floor2, history):
    """Residual-update coordinate descent for wide designs. Returns (sweeps, kkt)."""
    n, p = X.shape
    r = y - X @ beta
    Q = np.dot(r, r) / n
    kkt = np.inf
    for sweep in range(max_sweeps):
        max_change = 0.0
        for j in range(p):
            a = col_ms[j]
            if a <= 0.0:
                if beta[j] != 0.0:
                    beta[j] = 0.0
                continue
            ej = 0.0
            for i in range(n):
                ej += X[i, j] * r[i]
            ej /= n
            bj = beta[j]
            c = ej + a * bj
            q0 = Q + 2.0 * bj * ej + a * bj * bj
            if q0 < floor2:
                q0 = floor2
            new = _coordinate_min(kind, a, c, q0, pen[j])
            delta = new - bj
            if delta != 0.0:
                Q = Q - 2.0 * delta * ej + a * delta * delta
                for i in range(n):
                    r[i] -= X[i, j] * delta
                beta[j] = new
                if abs(delta) > max_change:
                    max_change = abs(delta)
        binf = 0.0
        for j in range(p):
            if abs(beta[j]) > binf:
                binf = abs(beta[j])
        history[sweep] = _objective(kind, Q, beta, pen, floor2)
        if max_change <= change_tol * (1.0 + binf):
            r = y - X @ beta
            Q = np.dot(r, r) / n
            kkt = _kkt_from_grad(kind, beta, X.T @ r / n, Q, pen, floor2)
            if kkt <= kkt_tol or (kind == SQRT_LASSO and Q <= floor2):
                return sweep + 1, kkt
    r = y - X @ beta
    Q = np.dot(r, r) / n
    kkt = _kkt_from_grad(kind, beta, X.T @ r / n, Q, pen, floor2)
    return max_sweeps, kkt
