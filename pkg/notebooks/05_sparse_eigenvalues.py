"""
Sparse eigenvalues of a design
==============================

Identification rests on the Gram matrix being well conditioned over small
supports. The diagnostic enumerates every support of size m exactly.
"""

import numpy as np

from doubleselect.diagnostics import gram_matrix, sparse_eigenvalues
from doubleselect.errors import CapacityError
from doubleselect.numerics import toeplitz_correlation

###############################################################################
# Population Toeplitz design
# --------------------------
M = toeplitz_correlation(12, 0.5)
for m in (1, 2, 4, 12):
    r = sparse_eigenvalues(M, m)
    print(f"m={m:2d}: phi_min {r.phi_min:.4f}  phi_max {r.phi_max:.4f}  "
          f"({r.method}, {r.subsets} supports)")

###############################################################################
# A duplicated column makes the 2-sparse minimum eigenvalue zero.
rng = np.random.default_rng(5)
X = rng.standard_normal((100, 6))
X = np.column_stack([X, X[:, 2]])
print("duplicated column:", sparse_eigenvalues(gram_matrix(X), 2).phi_min)

###############################################################################
# Enumeration is capped; past the cap the error names the subset count.
try:
    sparse_eigenvalues(toeplitz_correlation(40, 0.5), 8)
except CapacityError as exc:
    print("capacity:", exc)
