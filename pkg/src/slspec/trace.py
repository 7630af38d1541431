"""Spectral power sums through traces of finite matrices.

G_k projects the k-th iterated integral of the perturbation, normalized
by the projected base monodromy; ordered compositions of m then combine
traces of G-products into sum_j 1/lam_j^m.  The m = 1, 2 closed forms
are implemented separately from the composition engine on purpose: the
redundancy catches sign errors in either route.
"""

from dataclasses import dataclass

import numpy as np

from . import numkernel
from .coeffs import CoeffPath, constant
from .errors import DegeneracyError, SingularMatrixError
from .flow import _eval_path_batch, iterated_integrals
from .symplectic import build_normalizer, project

MAX_ORDER = 12


def compositions(m):
    """Ordered compositions of m in lexicographic order, iteratively.

    There are 2^(m-1) of them; (1, 2) and (2, 1) count separately because
    matrix products do not commute.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    c = (1,) * m
    while True:
        yield c
        if len(c) == 1:
            return
        last = c[-1]
        c = c[:-2] + (c[-2] + 1,) + (1,) * (last - 1)


def compute_G(sys, bc, m, N, tol_singular=numkernel.TOL_SINGULAR):
    """G_1..G_m and the projected base monodromy P0.

    G_k = project(gamma_0(T) F_k) project(gamma_0(T))^{-1}; requires the
    projected monodromy to be invertible, which is the nondegeneracy of
    the boundary-value problem seen through the normalizer.

    Returns
    -------
    (G, P0) : (tuple of (n, n) ndarrays, ndarray)
    """
    if not 1 <= m <= MAX_ORDER:
        raise ValueError(f"trace order must be in 1..{MAX_ORDER}")
    flow0, iters = iterated_integrals(sys, m, N)
    nrm = build_normalizer(bc.Z0, bc.Z1)
    mono = flow0.monodromy
    p0 = project(nrm, mono)
    try:
        p0_inv = numkernel.inverse(p0, tol_singular=tol_singular)
    except SingularMatrixError as err:
        raise DegeneracyError(
            "projected base monodromy is singular to tolerance: "
            "0 is an eigenvalue of the boundary-value problem"
        ) from err
    g = tuple(project(nrm, mono @ f) @ p0_inv for f in iters.F)
    return g, p0


def power_sum(G, m):
    """sum_j 1/lam_j^m from G_1..G_m via the composition expansion.

    Enumerate ordered compositions (j_1, ..., j_k) of m, trace the
    products G_{j_1} ... G_{j_k}, and combine with weights m (-1)^k / k.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    if m > MAX_ORDER:
        raise ValueError(f"trace order capped at {MAX_ORDER}")
    if len(G) < m:
        raise ValueError(f"need G_1..G_{m}, got {len(G)} matrices")
    by_length = np.zeros(m + 1)
    for comp in compositions(m):
        prod = G[comp[0] - 1]
        for j in comp[1:]:
            prod = prod @ G[j - 1]
        by_length[len(comp)] += np.trace(prod)
    total = 0.0
    for k in range(1, m + 1):
        total += m * ((-1.0) ** k / k) * by_length[k]
    return float(total)


def power_sum_first(G):
    """Closed form for m=1: -Tr(G_1)."""
    return float(-np.trace(G[0]))


def power_sum_second(G):
    """Closed form for m=2: Tr(G_1^2) - 2 Tr(G_2)."""
    return float(np.trace(G[0] @ G[0]) - 2.0 * np.trace(G[1]))


@dataclass(frozen=True)
class TraceReport:
    """G matrices, power sums for orders 1..m, and run metadata."""

    order: int
    G: tuple
    power_sums: tuple
    P0: np.ndarray
    metadata: dict


def trace_report(sys, bc, m, N):
    """Full trace-formula evaluation: G_1..G_m and all power sums up to m."""
    g, p0 = compute_G(sys, bc, m, N)
    sums = tuple(power_sum(g, k) for k in range(1, m + 1))
    return TraceReport(
        order=m,
        G=g,
        power_sums=sums,
        P0=p0,
        metadata={"steps": int(N), "tol_singular": numkernel.TOL_SINGULAR},
    )


def robin_identity(theta, T):
    """Closed form of sum_k 1/lam_k for y''+lam y=0, y(0)=0, Robin angle theta at T.

    (3 T^2 sin(theta) + T^3 cos(theta)) / (6 (sin(theta) + T cos(theta)));
    theta=0 recovers sum 1/k^2 = pi^2/6 scaled by T, theta=pi/2 gives T^2/2.
    """
    if not (0.0 <= theta <= np.pi / 2 + 1e-15):
        raise ValueError("theta must lie in [0, pi/2]")
    if T <= 0:
        raise ValueError("T must be positive")
    s, c = np.sin(theta), np.cos(theta)
    return float((3.0 * T**2 * s + T**3 * c) / (6.0 * (s + T * c)))


def _positive_part(mats):
    """(R + |R|)/2 for a batch of symmetric matrices: clip eigenvalues at 0."""
    w, v = np.linalg.eigh(mats)
    w = np.clip(w, 0.0, None)
    return v @ (w[..., None] * np.swapaxes(v, -1, -2))


def conjugate_criterion(R, T, N=1024):
    """Sufficiency certificate for the absence of conjugate points on [0, T].

    Evaluates Tr(integral_0^T (t - t^2/T) R_+(t) dt) with R_+ the positive
    part of the curvature path, by composite Simpson on N intervals.
    A value below 1 certifies that y'' + R(t) y = 0 with Dirichlet ends
    has no nontrivial solution; a value >= 1 decides nothing.

    Returns
    -------
    (value, certified) : (float, bool)
    """
    if not isinstance(R, CoeffPath):
        R = constant(R)
    if T <= 0:
        raise ValueError("T must be positive")
    n_int = int(N)
    if n_int % 2:
        n_int += 1
    t = np.linspace(0.0, T, n_int + 1)
    r_plus = _positive_part(np.ascontiguousarray(_eval_path_batch(R, t)))
    integrand = (t - t * t / T) * np.trace(r_plus, axis1=1, axis2=2)
    weights = np.ones(n_int + 1)
    weights[1:-1:2] = 4.0
    weights[2:-1:2] = 2.0
    value = float((T / n_int) / 3.0 * np.sum(weights * integrand))
    return value, value < 1.0
