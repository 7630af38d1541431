"""Fundamental solutions, monodromy matrices, and iterated integrals.

Fixed-step classical RK4 on the matrix ODE gamma' = J B_lam(t) gamma.
Fixed stepping (rather than adaptive control) keeps runs reproducible and
lets the augmented system for the iterated integrals share stage values
with the base flow; a step-doubling comparison is available as a
diagnostic through the convergence tests, not as a controller.

Evaluations at distinct lam are independent; the batched entry points
integrate a whole array of spectral parameters in one pass, which is the
intended shape of an eigenvalue scan.

Coefficient smoothness note: RK4 is 4th order for smooth coefficient
paths; piecewise-linear SampledPath data degrades this to 2nd order.
"""

from dataclasses import dataclass

import numpy as np

from .coeffs import ConstantPath, PolynomialPath, SampledPath, eval_path
from .errors import SingularMatrixError
from .symplectic import standard_J
from . import numkernel

SYM_TOL = 1e-8
MIN_STEPS = 16


def _eval_path_batch(path, times):
    """Evaluate a coefficient path at an array of times, shape (K, n, n)."""
    k = times.size
    if isinstance(path, ConstantPath):
        return np.broadcast_to(path.matrix, (k,) + path.matrix.shape)
    if isinstance(path, PolynomialPath):
        acc = np.broadcast_to(path.coeffs[-1], (k,) + path.coeffs[-1].shape).copy()
        for c in path.coeffs[-2::-1]:
            acc = acc * times[:, None, None] + c
        return acc
    if isinstance(path, SampledPath):
        g = path.grid
        vals = np.stack(path.values)
        t = np.clip(times, g[0], g[-1])
        idx = np.clip(np.searchsorted(g, t, side="right") - 1, 0, g.size - 2)
        w = ((t - g[idx]) / (g[idx + 1] - g[idx]))[:, None, None]
        return (1.0 - w) * vals[idx] + w * vals[idx + 1]
    return np.stack([eval_path(path, float(t)) for t in times])


class StageTables:
    """Precomputed J B_0 and D at the 2N+1 RK4 stage times on [0, T].

    Building the tables once per (system, N) amortizes coefficient
    evaluation across every spectral parameter integrated with them.
    """

    def __init__(self, sys, N):
        if N < MIN_STEPS:
            raise ValueError(f"step count N must be >= {MIN_STEPS}")
        self.sys = sys
        self.N = int(N)
        self.h = sys.T / N
        n = sys.n
        times = np.linspace(0.0, sys.T, 2 * self.N + 1)
        p = _eval_path_batch(sys.P, times)
        q = _eval_path_batch(sys.Q, times)
        r = _eval_path_batch(sys.R, times)
        r1 = _eval_path_batch(sys.R1, times)

        dets = np.linalg.det(p)
        scales = np.max(np.sum(np.abs(p), axis=2), axis=1)
        bad = np.abs(dets) <= numkernel.TOL_SINGULAR * np.maximum(scales, 1e-300)
        if np.any(bad):
            i = int(np.argmax(bad))
            raise SingularMatrixError(
                f"P(t) singular at stage node t={times[i]:.6g}", det=float(dets[i])
            )
        pinv = np.linalg.inv(p)
        pinv_q = pinv @ q

        b0 = np.zeros((times.size, 2 * n, 2 * n))
        b0[:, :n, :n] = pinv
        b0[:, :n, n:] = -pinv_q
        b0[:, n:, :n] = -np.transpose(pinv_q, (0, 2, 1))
        b0[:, n:, n:] = np.transpose(q, (0, 2, 1)) @ pinv_q - r

        d = np.zeros((times.size, 2 * n, 2 * n))
        d[:, n:, n:] = -r1

        j = standard_J(n)
        self.J = j
        self.D = d
        self.JB0 = j @ b0
        self.JD = j @ d
        self.grid = times[::2]


@dataclass(frozen=True)
class FlowResult:
    """Fundamental solution sampled on a uniform grid.

    gamma[k] is gamma_lam at grid[k]; monodromy = gamma[-1].  The largest
    symplectic defect max_k ||gamma^T J gamma - J||_F over the nodes is
    monitoring output, not an enforced constraint; accuracy_warning is set
    when it exceeds 100x the symplectic tolerance.
    """

    lam: float
    grid: np.ndarray
    gamma: np.ndarray
    monodromy: np.ndarray
    max_symplectic_defect: float
    accuracy_warning: bool
    metadata: dict


@dataclass(frozen=True)
class IterIntegrals:
    """Time-ordered iterated integrals F_1..F_m of the perturbation kernel."""

    order: int
    F: tuple


def _rk4_sweep(tables, lams, keep_nodes=False):
    """Integrate gamma' = (JB0 + lam JD) gamma for all lam in one pass."""
    lams = np.atleast_1d(np.asarray(lams, dtype=float))
    L = lams.size
    dim = tables.JB0.shape[1]
    h = tables.h
    lam_col = lams[:, None, None]

    gamma = np.broadcast_to(np.eye(dim), (L, dim, dim)).copy()
    nodes = None
    if keep_nodes:
        nodes = np.empty((tables.N + 1, L, dim, dim))
        nodes[0] = gamma

    jb0, jd = tables.JB0, tables.JD
    a_right = jb0[0] + lam_col * jd[0]
    for i in range(tables.N):
        a0 = a_right
        a1 = jb0[2 * i + 1] + lam_col * jd[2 * i + 1]
        a_right = jb0[2 * i + 2] + lam_col * jd[2 * i + 2]
        k1 = a0 @ gamma
        k2 = a1 @ (gamma + (0.5 * h) * k1)
        k3 = a1 @ (gamma + (0.5 * h) * k2)
        k4 = a_right @ (gamma + h * k3)
        gamma = gamma + (h / 6.0) * (k1 + 2.0 * (k2 + k3) + k4)
        if keep_nodes:
            nodes[i + 1] = gamma
    return gamma, nodes


def _symplectic_defects(gammas, j):
    """Frobenius norm of gamma^T J gamma - J along the leading axis."""
    resid = np.swapaxes(gammas, -1, -2) @ j @ gammas - j
    return np.sqrt(np.sum(resid * resid, axis=(-2, -1)))


def monodromies(sys, lams, N, tables=None):
    """Monodromy matrices gamma_lam(T) for an array of lam, shape (L, 2n, 2n)."""
    if tables is None:
        tables = StageTables(sys, N)
    final, _ = _rk4_sweep(tables, lams)
    return final


def integrate_flow(sys, lam, N, sym_tol=SYM_TOL):
    """Fundamental solution of z' = J B_lam(t) z with gamma(0) = I.

    Classical fixed-step RK4; the solution is sampled at all N+1 grid
    nodes and the monodromy is the final node.  The symplectic defect is
    measured at every node and reported in the result; drift beyond
    100 * sym_tol raises no error but sets accuracy_warning.
    """
    tables = StageTables(sys, N)
    final, nodes = _rk4_sweep(tables, [lam], keep_nodes=True)
    gamma = nodes[:, 0]
    defects = _symplectic_defects(gamma, tables.J)
    max_defect = float(np.max(defects))
    return FlowResult(
        lam=float(lam),
        grid=tables.grid,
        gamma=gamma,
        monodromy=gamma[-1],
        max_symplectic_defect=max_defect,
        accuracy_warning=bool(max_defect > 100.0 * sym_tol),
        metadata={"N": tables.N, "sym_tol": sym_tol},
    )


def iterated_integrals(sys, m, N, sym_tol=SYM_TOL):
    """F_1..F_m by one RK4 pass over the augmented system.

    The base flow gamma_0 and the cascade H_k' = (J gamma_0^T D gamma_0) H_{k-1}
    (H_0 = I, H_k(0) = 0) integrate jointly, so each RK4 stage of H_k sees
    the stage value of gamma_0 rather than an interpolant; F_k = H_k(T).

    Returns
    -------
    (FlowResult, IterIntegrals)
        The lam=0 flow reused by the caller, and the integrals.
    """
    if m < 1:
        raise ValueError("order m must be >= 1")
    tables = StageTables(sys, N)
    dim = tables.JB0.shape[1]
    h = tables.h
    jb0, d_tab, j = tables.JB0, tables.D, tables.J

    # State: u[0] = gamma_0, u[k] = H_k for k = 1..m.
    u = np.zeros((m + 1, dim, dim))
    u[0] = np.eye(dim)
    nodes = np.empty((tables.N + 1, dim, dim))
    nodes[0] = u[0]

    def deriv(s, state):
        gam = state[0]
        jdhat = j @ (gam.T @ (d_tab[s] @ gam))
        out = np.empty_like(state)
        out[0] = jb0[s] @ gam
        out[1] = jdhat
        if m > 1:
            out[2:] = jdhat @ state[1:m]
        return out

    for i in range(tables.N):
        k1 = deriv(2 * i, u)
        k2 = deriv(2 * i + 1, u + (0.5 * h) * k1)
        k3 = deriv(2 * i + 1, u + (0.5 * h) * k2)
        k4 = deriv(2 * i + 2, u + h * k3)
        u = u + (h / 6.0) * (k1 + 2.0 * (k2 + k3) + k4)
        nodes[i + 1] = u[0]

    defects = _symplectic_defects(nodes, j)
    max_defect = float(np.max(defects))
    flow0 = FlowResult(
        lam=0.0,
        grid=tables.grid,
        gamma=nodes,
        monodromy=nodes[-1],
        max_symplectic_defect=max_defect,
        accuracy_warning=bool(max_defect > 100.0 * sym_tol),
        metadata={"N": tables.N, "sym_tol": sym_tol},
    )
    return flow0, IterIntegrals(order=m, F=tuple(u[1:]))
