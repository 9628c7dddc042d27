"""Sparse direct solves: UMFPACK through cvxopt, SuperLU as a fallback."""

import numpy as np
from scipy.sparse.linalg import splu

from ..errors import SingularSystem

try:
    from cvxopt import matrix as _cvx_matrix
    from cvxopt import spmatrix as _cvx_spmatrix
    from cvxopt import umfpack as _umfpack
except ImportError:  # pragma: no cover - cvxopt is a declared dependency
    _umfpack = None


def available_backends():
    return ("umfpack", "superlu") if _umfpack is not None else ("superlu",)


class _Umfpack:
    def __init__(self, A):
        A = A.tocoo()
        self.n = A.shape[0]
        self.M = _cvx_spmatrix(_cvx_matrix(A.data.astype(float)), _cvx_matrix(A.row.astype(np.int64), tc="i"),
                               _cvx_matrix(A.col.astype(np.int64), tc="i"), A.shape)
        try:
            sym = _umfpack.symbolic(self.M)
            self.F = _umfpack.numeric(self.M, sym)
        except ArithmeticError as exc:
            raise SingularSystem(f"UMFPACK factorization failed: {exc}") from None

    def solve(self, b):
        x = _cvx_matrix(np.asarray(b, dtype=float).copy())
        _umfpack.solve(self.M, self.F, x)
        return np.array(x).ravel()


class _SuperLU:
    def __init__(self, A, permc_spec="COLAMD"):
        try:
            self.lu = splu(A.tocsc(), permc_spec=permc_spec)
        except RuntimeError as exc:
            raise SingularSystem(f"SuperLU factorization failed: {exc}") from None

    def solve(self, b):
        return self.lu.solve(np.asarray(b, dtype=float))


def factorize(A, backend="auto", permc_spec="COLAMD"):
    if backend == "auto":
        backend = available_backends()[0]
    if backend == "umfpack":
        if _umfpack is None:
            raise SingularSystem("UMFPACK backend requested but cvxopt is not installed")
        return _Umfpack(A)
    if backend == "superlu":
        return _SuperLU(A, permc_spec)
    raise ValueError(f"unknown linear solver backend {backend!r}")


def solve(A, b, backend="auto", permc_spec="COLAMD"):
    x = factorize(A, backend, permc_spec).solve(b)
    if not np.all(np.isfinite(x)):
        raise SingularSystem("linear solve produced non-finite values")
    return x
