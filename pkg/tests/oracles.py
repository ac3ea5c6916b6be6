"""Reference solvers used only by the tests."""
import itertools
import math

import numpy as np


def joint_rows(beta, n0):
    """Rows of ``|sum_J beta_k x_k| <= n0 sqrt(sum_J beta_k)`` as ``A x <= b``."""
    K = len(beta)
    A, b = [], []
    for size in range(1, K + 1):
        for J in itertools.combinations(range(K), size):
            r = np.zeros(K)
            r[list(J)] = np.asarray(beta)[list(J)]
            bound = n0 * math.sqrt(sum(beta[j] for j in J))
            A += [r, -r]
            b += [bound, bound]
    return np.array(A), np.array(b)


def vertex_max(c, A, b, rtol=1e-9):
    """Maximum of ``c @ x`` over the bounded polytope ``A x <= b`` by visiting every vertex."""
    K = A.shape[1]
    best, arg = -math.inf, None
    scale = np.where(b > 0, b, 1.0)
    for rows in itertools.combinations(range(A.shape[0]), K):
        M = A[list(rows)]
        if abs(np.linalg.det(M)) < 1e-300 or np.linalg.cond(M) > 1e12:
            continue
        x = np.linalg.solve(M, b[list(rows)])
        if np.all((A @ x - b) / scale <= rtol):
            v = float(c @ x)
            if v > best:
                best, arg = v, x
    return best, arg


def linprog_max(c, A, b):
    from scipy.optimize import linprog

    res = linprog(-np.asarray(c), A_ub=A, b_ub=b, bounds=[(None, None)] * A.shape[1], method="highs")
    assert res.status == 0, res.message
    return -res.fun, res.x
