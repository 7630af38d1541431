"""Dense real-matrix primitives with explicit tolerance contracts.

All rank decisions and factorizations used elsewhere in the package go
through this module, so tolerance policy lives in exactly one place.
Tolerances are relative (scaled by a norm of the input): the matrices
handled downstream range from O(1) frames to monodromies of size
O(e^{cT}), and absolute thresholds would break on either end.

Everything here is pure and reentrant; inputs are never mutated.
"""

import numpy as np
import scipy.linalg

from .errors import DimensionError, RankDeficiencyError, SingularMatrixError

#: Relative singularity threshold for :func:`inverse`.
TOL_SINGULAR = 1e-12

#: Method used by :func:`nullspace`; recorded for reproducibility.
NULLSPACE_METHOD = "svd"


def as_matrix(data, rows=None, cols=None):
    """Validate and return a 2-D float array.

    Parameters
    ----------
    data : array_like
        Matrix entries, row-major.
    rows, cols : int, optional
        Expected shape; checked when given.

    Returns
    -------
    ndarray
        A float64 copy with writeback disabled (matrices are treated as
        immutable values throughout the package).

    Raises
    ------
    DimensionError
        If `data` is not 2-D or does not match the expected shape.
    ValueError
        If any entry is NaN or infinite.
    """
    m = np.array(data, dtype=float)
    if m.ndim != 2:
        raise DimensionError(f"expected a 2-D matrix, got ndim={m.ndim}")
    if rows is not None and m.shape[0] != rows:
        raise DimensionError(f"expected {rows} rows, got {m.shape[0]}")
    if cols is not None and m.shape[1] != cols:
        raise DimensionError(f"expected {cols} columns, got {m.shape[1]}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix entries must be finite (no NaN/Inf)")
    m.flags.writeable = False
    return m


def _require_square(m, op):
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionError(f"{op} requires a square matrix, got shape {m.shape}")
    return m


def det(m):
    """Determinant via LU with partial pivoting (LAPACK)."""
    m = _require_square(m, "det")
    return float(np.linalg.det(m))


def scale(m):
    """Matrix scale used in singularity tests: the maximum row sum (inf-norm)."""
    m = np.asarray(m, dtype=float)
    if m.size == 0:
        return 0.0
    return float(np.max(np.sum(np.abs(m), axis=1)))


def inverse(m, tol_singular=TOL_SINGULAR):
    """Invert a square matrix, refusing inputs singular to tolerance.

    Raises
    ------
    SingularMatrixError
        If ``|det(m)| <= tol_singular * scale(m)``.  The error carries the
        determinant value.
    """
    m = _require_square(m, "inverse")
    if m.shape[0] == 0:
        return np.zeros((0, 0))
    d = det(m)
    if abs(d) <= tol_singular * max(scale(m), np.finfo(float).tiny):
        raise SingularMatrixError(
            f"matrix singular to tolerance (det={d:.3e}, scale={scale(m):.3e})", det=d
        )
    return np.linalg.inv(m)


def nullspace(m, tol):
    """Orthonormal basis of the numerical nullspace.

    The nullspace is ``{v : ||m v|| <= tol * ||m||}`` with the spectral
    norm; membership is decided on singular values with the relative
    threshold `tol`.

    Parameters
    ----------
    m : array_like, shape (r, c)
    tol : float
        Relative singular-value threshold, > 0.

    Returns
    -------
    ndarray, shape (c, k)
        Columns form an orthonormal basis; k = 0 gives a (c, 0) array.
    """
    if tol <= 0:
        raise ValueError("nullspace tolerance must be positive")
    m = np.asarray(m, dtype=float)
    if m.ndim != 2:
        raise DimensionError(f"nullspace expects a matrix, got ndim={m.ndim}")
    c = m.shape[1]
    if m.size == 0 or not np.any(m):
        return np.eye(c)
    sigma, vt = np.linalg.svd(m, full_matrices=True)[1:]
    smax = sigma[0] if sigma.size else 0.0
    rank = int(np.sum(sigma > tol * smax))
    return vt[rank:].T.copy()


def orthonormalize(vectors, rtol=1e-12):
    """Gram-Schmidt with a re-orthogonalization pass.

    Parameters
    ----------
    vectors : array_like, shape (d, k)
        Columns are the vectors to orthonormalize; must be linearly
        independent to tolerance.
    rtol : float
        A vector whose residual after projection is below ``rtol`` times
        its original norm counts as dependent.

    Returns
    -------
    ndarray, shape (d, k)
        Orthonormal columns spanning the same subspace, pairwise inner
        products below 1e-12.

    Raises
    ------
    RankDeficiencyError
        If the input columns are dependent to tolerance.
    """
    v = np.atleast_2d(np.asarray(vectors, dtype=float))
    if v.ndim != 2:
        raise DimensionError("orthonormalize expects vectors as matrix columns")
    d, k = v.shape
    q = np.zeros((d, k))
    for j in range(k):
        w = v[:, j].copy()
        norm0 = np.linalg.norm(w)
        if norm0 == 0.0:
            raise RankDeficiencyError(f"column {j} is zero")
        # Two projection passes: classical GS loses orthogonality for
        # nearly dependent inputs, the second pass restores it.
        for _ in range(2):
            w -= q[:, :j] @ (q[:, :j].T @ w)
        norm = np.linalg.norm(w)
        if norm <= rtol * norm0:
            raise RankDeficiencyError(
                f"column {j} dependent on previous columns (residual {norm / norm0:.3e})"
            )
        q[:, j] = w / norm
    return q


def extend_basis(base, candidates, rtol=1e-10):
    """Extend an orthonormal set by Gram-Schmidt over candidate columns.

    Candidates that are dependent on the current set (residual below
    ``rtol`` of their norm) are skipped instead of raising; the result
    keeps `base` as its leading columns.  Deterministic in the candidate
    column order.
    """
    base = np.asarray(base, dtype=float)
    d = base.shape[0]
    cols = [base[:, j] for j in range(base.shape[1])]
    for j in range(candidates.shape[1]):
        w = candidates[:, j].astype(float).copy()
        norm0 = np.linalg.norm(w)
        if norm0 == 0.0:
            continue
        for _ in range(2):
            for u in cols:
                w -= u * (u @ w)
        norm = np.linalg.norm(w)
        if norm > rtol * norm0:
            cols.append(w / norm)
    return np.column_stack(cols) if cols else np.zeros((d, 0))


def expm(m):
    """Matrix exponential (scaling-and-squaring with Pade approximants)."""
    m = _require_square(m, "expm")
    return scipy.linalg.expm(m)
