"""Lagrangian frames, boundary presets, and the boundary-adapted projection.

The projection P(M) extracts the n x n block of M3 M M3^{-1} selected by
the intersection dimension k0 of the two boundary subspaces.  M3 is built
from an orthonormal symplectic basis adapted to Lambda_0 and a shear that
straightens the complement of the intersection inside Lambda_1; it is
symplectic with det = 1 (it is generally NOT orthogonal once the shear is
nontrivial, so only symplecticity is asserted here).
"""

from dataclasses import dataclass

import numpy as np

from . import numkernel
from .errors import ConstructionError, DimensionError

LAGRANGIAN_RTOL = 1e-10
INTERSECTION_TOL = 1e-10


def standard_J(n):
    """Standard symplectic structure [[0, -I], [I, 0]] in (x, y) block order.

    The sign convention is pinned by the first-order dynamics: with this J
    and the assembled Hamiltonian coefficient, the flow of y'' = 0 is the
    lower-triangular shear [[1, 0], [t, 1]].
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    j = np.zeros((2 * n, 2 * n))
    j[:n, n:] = -np.eye(n)
    j[n:, :n] = np.eye(n)
    return j


@dataclass(frozen=True)
class LagFrame:
    """Frame Z = (X; Y) of a Lagrangian subspace; columns span Lambda."""

    X: np.ndarray
    Y: np.ndarray

    def __post_init__(self):
        x = numkernel.as_matrix(self.X)
        y = numkernel.as_matrix(self.Y, rows=x.shape[0], cols=x.shape[1])
        if x.shape[0] != x.shape[1]:
            raise DimensionError("frame blocks must be n x n")
        object.__setattr__(self, "X", x)
        object.__setattr__(self, "Y", y)
        z = self.stacked
        dev = np.linalg.norm(x.T @ y - y.T @ x)
        if dev > LAGRANGIAN_RTOL * max(1.0, np.linalg.norm(z) ** 2):
            raise ConstructionError(f"frame violates X^T Y = Y^T X (deviation {dev:.3e})")
        sigma = np.linalg.svd(z, compute_uv=False)
        if sigma[-1] <= 1e-10 * sigma[0]:
            raise ConstructionError("frame columns rank-deficient to tolerance")

    @property
    def n(self):
        return self.X.shape[0]

    @property
    def stacked(self):
        """The 2n x n matrix (X; Y)."""
        return np.vstack([self.X, self.Y])

    def orthonormal_basis(self):
        """Orthonormal columns spanning the same subspace."""
        return numkernel.orthonormalize(self.stacked)


def frame_from_stacked(z):
    """Build a LagFrame from a 2n x n stacked matrix."""
    z = np.asarray(z, dtype=float)
    n = z.shape[1]
    if z.shape[0] != 2 * n:
        raise DimensionError(f"stacked frame must be 2n x n, got {z.shape}")
    return LagFrame(z[:n], z[n:])


@dataclass(frozen=True)
class BoundaryPair:
    """Boundary subspaces at t=0 and t=T, given by frames of the same n."""

    Z0: LagFrame
    Z1: LagFrame

    def __post_init__(self):
        if self.Z0.n != self.Z1.n:
            raise DimensionError("boundary frames must share the dimension n")

    @property
    def n(self):
        return self.Z0.n


def preset_dirichlet(n):
    """Frame (I; 0): the y = 0 condition."""
    return LagFrame(np.eye(n), np.zeros((n, n)))


def preset_neumann(n):
    """Frame (0; I): the x = 0 (natural) condition."""
    return LagFrame(np.zeros((n, n)), np.eye(n))


def preset_robin(theta):
    """Per-coordinate frame column (cos theta_i; -sin theta_i).

    theta may be a scalar (n=1) or a sequence of angles in [0, pi/2];
    theta=0 reduces to Dirichlet, theta=pi/2 spans the Neumann subspace.
    """
    th = np.atleast_1d(np.asarray(theta, dtype=float))
    if np.any(th < -1e-12) or np.any(th > np.pi / 2 + 1e-12):
        raise ValueError("robin angles must lie in [0, pi/2]")
    return LagFrame(np.diag(np.cos(th)), np.diag(-np.sin(th)))


def span_intersection(a, b, tol=INTERSECTION_TOL):
    """Dimension and orthonormal basis of span(a) ∩ span(b).

    Works on raw column-span matrices (no Lagrangian validation), so it
    also serves transported frames whose symplectic defect carries the
    integrator's roundoff.  Computed from the nullspace of the stacked
    matrix (Qa, -Qb) on orthonormalized inputs; nullspace vectors (u; v)
    satisfy Qa u = Qb v and map back through Qa.
    """
    qa = numkernel.orthonormalize(np.asarray(a, dtype=float))
    qb = numkernel.orthonormalize(np.asarray(b, dtype=float))
    stacked = np.hstack([qa, -qb])
    null = numkernel.nullspace(stacked, tol)
    k = null.shape[1]
    if k == 0:
        return 0, np.zeros((qa.shape[0], 0))
    vectors = qa @ null[: qa.shape[1], :]
    return k, numkernel.orthonormalize(vectors)


def intersection(Z0, Z1, tol=INTERSECTION_TOL):
    """Dimension and orthonormal basis of V0 = Lambda_0 ∩ Lambda_1.

    Near-intersections with principal angle below `tol` count as honest
    intersections: k0 changes the normalizer discretely, so the threshold
    is deliberately explicit rather than buried in the factorization.

    Returns
    -------
    (k0, basis) : (int, ndarray of shape (2n, k0))
    """
    return span_intersection(Z0.stacked, Z1.stacked, tol)


def _subtract_subspace(vectors, basis):
    """Orthonormal basis of span(vectors) ⊖ span(basis), basis orthonormal."""
    out = []
    for j in range(vectors.shape[1]):
        w = vectors[:, j].copy()
        for _ in range(2):
            w -= basis @ (basis.T @ w)
            for u in out:
                w -= u * (u @ w)
        norm = np.linalg.norm(w)
        if norm > 1e-10:
            out.append(w / norm)
    if not out:
        return np.zeros((vectors.shape[0], 0))
    return np.column_stack(out)


@dataclass(frozen=True)
class Normalizer:
    """Boundary-adapted symplectic change of basis and projection data.

    M1 is symplectic orthogonal; M3 = (I_{2k0} ◇ M2) M1 is symplectic with
    det 1.  tildeX1/tildeY1 are the (n-k0) blocks of the complement frame
    in M1 coordinates; Y-block invertibility is required for the shear.
    intersection_gap records the smallest singular value of the stacked
    frame matrix NOT counted as intersection (conditioning diagnostic).
    """

    k0: int
    M1: np.ndarray
    M3: np.ndarray
    M3inv: np.ndarray
    tildeX1: np.ndarray
    tildeY1: np.ndarray
    intersection_gap: float

    @property
    def n(self):
        return self.M1.shape[0] // 2


def build_normalizer(Z0, Z1, tol=INTERSECTION_TOL):
    """Construct the Normalizer for a boundary pair.

    Steps: orthonormal basis of V0 = Lambda_0 ∩ Lambda_1, extended along
    Z0's columns to an orthonormal basis d_1..d_n of Lambda_0, completed
    by the J-images to the symplectic orthogonal M1; the complement
    V1 = Lambda_1 ⊖ V0 expressed in M1 coordinates gives (X~1; Y~1), and
    the shear M2 = [[I, -X~1 Y~1^{-1}], [0, I]] straightens it; M3 glues
    the two.

    Raises
    ------
    ConstructionError
        If Y~1 is singular to tolerance, which signals an ill-conditioned
        frame pair (for exact Lagrangian data Y~1 is provably invertible).
    """
    n = Z0.n
    if Z1.n != n:
        raise DimensionError("frames must share n")
    J = standard_J(n)

    q0 = Z0.orthonormal_basis()
    q1 = Z1.orthonormal_basis()
    stacked = np.hstack([q0, -q1])
    sigma = np.linalg.svd(stacked, compute_uv=False)
    k0 = int(np.sum(sigma <= tol * sigma[0]))
    gap = float(sigma[2 * n - k0 - 1]) if k0 < 2 * n else 0.0
    if k0 == 0:
        v0 = np.zeros((2 * n, 0))
    else:
        null = numkernel.nullspace(stacked, tol)
        v0 = numkernel.orthonormalize(q0 @ null[:n, :])

    # d_1..d_n: V0 basis first, then Gram-Schmidt over Lambda_0's columns.
    d = numkernel.extend_basis(v0, q0)
    if d.shape[1] != n:
        raise ConstructionError(
            f"basis extension produced {d.shape[1]} vectors, expected {n}"
        )
    m1 = np.hstack([d, J @ d])

    n1 = n - k0
    if n1 > 0:
        v1 = _subtract_subspace(q1, v0)
        if v1.shape[1] != n1:
            raise ConstructionError(
                f"complement of V0 in Lambda_1 has dimension {v1.shape[1]}, expected {n1}"
            )
        w = m1.T @ v1
        tilde_x = w[k0:n, :]
        tilde_y = w[n + k0 :, :]
        try:
            shear_block = -tilde_x @ numkernel.inverse(tilde_y, tol_singular=1e-10)
        except Exception as err:
            raise ConstructionError(
                "Y-block of the complement frame is singular to tolerance; "
                "the boundary frames are too ill-conditioned to normalize"
            ) from err
        # Symmetrize: exactly symmetric shear keeps M3 symplectic to roundoff.
        shear_block = 0.5 * (shear_block + shear_block.T)
    else:
        tilde_x = np.zeros((0, 0))
        tilde_y = np.zeros((0, 0))
        shear_block = np.zeros((0, 0))

    shear = np.eye(2 * n)
    shear[k0:n, n + k0 :] = shear_block
    shear_inv = np.eye(2 * n)
    shear_inv[k0:n, n + k0 :] = -shear_block

    m3 = shear @ m1
    m3inv = m1.T @ shear_inv
    return Normalizer(
        k0=k0,
        M1=m1,
        M3=m3,
        M3inv=m3inv,
        tildeX1=tilde_x,
        tildeY1=tilde_y,
        intersection_gap=gap,
    )


def project(nrm, M):
    """The n x n block of M3 M M3^{-1}: rows k0+1..k0+n, columns 1..n.

    Reduces to the lower-left block when the boundary subspaces coincide
    (k0 = n) and to the upper-left block in the transversal case (k0 = 0).
    """
    M = np.asarray(M, dtype=float)
    n = nrm.n
    if M.shape != (2 * n, 2 * n):
        raise DimensionError(f"project expects a 2n x 2n matrix, got {M.shape}")
    a = nrm.M3 @ M @ nrm.M3inv
    return a[nrm.k0 : nrm.k0 + n, :n]
