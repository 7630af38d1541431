"""Independent spectral references used to verify the determinant/trace pipeline.

Three oracles: transcendental-equation roots for the scalar mixed
(Dirichlet/Robin) problem, finite-difference eigenvalues for definite
Dirichlet problems, and tail estimation for truncated spectral sums.
None of them touches the Hamiltonian flow or the projection machinery,
so agreement with the trace pipeline is a genuine cross-check.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.special

from .coeffs import CoeffPath, constant
from .errors import UnsupportedOracleError
from .flow import _eval_path_batch

_ROOT_MAX_ITER = 200


def robin_roots(theta, T, K):
    """First K eigenvalues of y'' + lam y = 0, y(0)=0, cos(th) y(T) + sin(th) y'(T) = 0.

    Eigenvalues solve tan(s T) = -tan(theta) s with s = sqrt(lam); the
    k-th root satisfies (k - 1/2) pi < s_k T < k pi for theta in
    (0, pi/2).  Bisection runs on the pole-free form
    f(s) = sin(s T) + tan(theta) s cos(s T), whose sign at the bracket
    endpoints alternates, and refines each root to machine-level relative
    accuracy (well below the 1e-12 target).  The endpoint angles use the
    closed forms: theta = 0 gives (k pi / T)^2, theta = pi/2 gives
    ((k - 1/2) pi / T)^2.

    Parameters
    ----------
    theta : float
        Boundary angle in [0, pi/2].
    T : float
        Interval length, > 0.
    K : int
        Number of roots, >= 1.

    Returns
    -------
    ndarray, shape (K,)
        Eigenvalues in increasing order.
    """
    if not (0.0 <= theta <= np.pi / 2 + 1e-15):
        raise ValueError("theta must lie in [0, pi/2]")
    if T <= 0:
        raise ValueError("T must be positive")
    if K < 1:
        raise ValueError("K must be >= 1")
    k = np.arange(1, K + 1, dtype=float)
    if theta <= 1e-15:
        return (k * np.pi / T) ** 2
    if theta >= np.pi / 2 - 1e-15:
        return ((k - 0.5) * np.pi / T) ** 2

    tn = np.tan(theta)

    def f(s):
        return np.sin(s * T) + tn * s * np.cos(s * T)

    lo = (k - 0.5) * np.pi / T
    hi = k * np.pi / T
    flo = f(lo)
    for _ in range(_ROOT_MAX_ITER):
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        left = flo * fm <= 0.0
        hi = np.where(left, mid, hi)
        lo = np.where(left, lo, mid)
        flo = np.where(left, flo, fm)
        if np.all(hi - lo <= 4.0 * np.finfo(float).eps * np.maximum(hi, 1.0)):
            break
    s = 0.5 * (lo + hi)
    return s**2


def robin_residual(theta, T, s):
    """Residual |sin(sT) + tan(theta) s cos(sT)| of a candidate root s."""
    return float(abs(np.sin(s * T) + np.tan(theta) * s * np.cos(s * T)))


def fd_dirichlet_eigs(R, T, mesh, K):
    """First K eigenvalues of y'' + lam R(t) y = 0 with Dirichlet ends.

    Central second differences on `mesh` intervals give the generalized
    symmetric problem -D2 y = lam blockdiag(R(t_i)) y on the interior
    nodes.  The positive-definite mass block is folded in symmetrically
    (C = B^{-1/2} A B^{-1/2}), which keeps the bandwidth at 2n-1, and the
    K smallest eigenvalues come out of banded Sturm-sequence bisection.
    Accuracy is second order in the mesh width.

    Raises
    ------
    UnsupportedOracleError
        If R(t) is not positive definite at every interior node.  The
        trace formula itself has no such restriction; only this reference
        computation declines.
    """
    if not isinstance(R, CoeffPath):
        R = constant(R)
    if mesh < 64:
        raise ValueError("mesh must be >= 64")
    if K < 1:
        raise ValueError("K must be >= 1")
    n = R.n
    h = T / mesh
    t_int = np.linspace(h, T - h, mesh - 1)
    r_nodes = np.ascontiguousarray(_eval_path_batch(R, t_int))
    if K > n * (mesh - 1):
        raise ValueError("K exceeds the discretized problem size")

    w, v = np.linalg.eigh(r_nodes)
    if np.min(w) <= 0.0:
        raise UnsupportedOracleError(
            "R(t) must be positive definite at every node for the FD oracle"
        )

    if n == 1:
        r = r_nodes[:, 0, 0]
        diag = 2.0 / (h * h * r)
        off = -1.0 / (h * h * np.sqrt(r[:-1] * r[1:]))
        vals = scipy.linalg.eigh_tridiagonal(
            diag, off, select="i", select_range=(0, K - 1), eigvals_only=True
        )
        return np.asarray(vals)

    # S_i = R(t_i)^{-1/2}; diagonal blocks 2/h^2 S_i^2, coupling -1/h^2 S_i S_{i+1}.
    s_blocks = v @ (w[..., None] ** -0.5 * np.transpose(v, (0, 2, 1)))
    diag_blocks = (2.0 / (h * h)) * (s_blocks @ s_blocks)
    off_blocks = (-1.0 / (h * h)) * (s_blocks[:-1] @ s_blocks[1:])

    m_int = mesh - 1
    dim = n * m_int
    bw = 2 * n - 1
    band = np.zeros((bw + 1, dim))
    for a in range(n):
        cols = a + n * np.arange(m_int)
        for b in range(a, n):
            band[b - a, cols] = diag_blocks[:, b, a]
        # C[(i+1)n + b, i n + a] = (S_i S_{i+1})^T[b, a] = off_blocks[i, a, b]
        for b in range(n):
            band[n + b - a, cols[:-1]] = off_blocks[:, a, b]
    vals = scipy.linalg.eig_banded(
        band, lower=True, select="i", select_range=(0, K - 1), eigvals_only=True
    )
    return np.asarray(vals)


@dataclass(frozen=True)
class TailEstimate:
    """Estimated value of sum_{k>K} 1/lam_k^m for a Weyl-type spectrum."""

    order: int
    K: int
    value: float
    method: str

    def __post_init__(self):
        if self.value < 0:
            raise ValueError("tail estimate must be nonnegative")


def tail_sum(eigs, m, method="integral-comparison"):
    """Tail of sum 1/lam_k^m beyond the K supplied eigenvalues.

    Fits lam_k ~ c k^2 by least squares on lam_k / k^2 over the last
    quarter of the input and evaluates the model tail either by the
    integral comparison with midpoint correction
    (sum_{k>K} f(k) ~ integral_{K+1/2}^inf f) or, for
    method="asymptotic-fit", by the exact Hurwitz-zeta sum of the fitted
    model.  Refuses (rather than silently extrapolating) when the fit
    residual exceeds 10%, which signals non-quadratic growth.
    """
    eigs = np.asarray(eigs, dtype=float)
    K = eigs.size
    if K < 10:
        raise ValueError("tail estimation needs at least 10 eigenvalues")
    if np.any(np.diff(eigs) < 0):
        raise ValueError("eigenvalues must be sorted ascending")
    if m < 1:
        raise ValueError("order m must be >= 1")
    if method not in ("integral-comparison", "asymptotic-fit"):
        raise ValueError(f"unknown tail method: {method!r}")

    window = max(K // 4, 3)
    k_fit = np.arange(K - window + 1, K + 1, dtype=float)
    ratio = eigs[-window:] / k_fit**2
    c = float(np.mean(ratio))
    if c <= 0:
        raise UnsupportedOracleError("fitted growth coefficient is not positive")
    resid = float(np.max(np.abs(ratio - c)) / c)
    if resid > 0.10:
        raise UnsupportedOracleError(
            f"tail estimate refused: spectrum growth is not quadratic (fit residual {resid:.1%})"
        )

    if method == "integral-comparison":
        value = 1.0 / (c**m * (2 * m - 1) * (K + 0.5) ** (2 * m - 1))
    else:
        value = float(scipy.special.zeta(2 * m, K + 1)) / c**m
    return TailEstimate(order=m, K=K, value=value, method=method)
