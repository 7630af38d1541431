"""Shared fixtures: test systems, boundary pairs, and random generators."""

import numpy as np

from slspec.coeffs import ConstantPath, PolynomialPath, SLSystem, system_for_second_order
from slspec.symplectic import BoundaryPair, preset_dirichlet, preset_robin


def scalar_system(T, c=1.0):
    """y'' + lam c y = 0 on [0, T]."""
    return system_for_second_order(float(c), T)


def matrix_system(diag, T):
    """Decoupled y'' + lam diag(r_i) y = 0."""
    return system_for_second_order(ConstantPath(np.diag(np.asarray(diag, dtype=float))), T)


def dirichlet_bc(n=1):
    return BoundaryPair(preset_dirichlet(n), preset_dirichlet(n))


def robin_bc(theta, n=1):
    """Dirichlet at t=0, Robin angle theta at t=T (the paper's mixed family)."""
    return BoundaryPair(preset_dirichlet(n), preset_robin([theta] * n))


def general_constant_system(n=1, T=np.pi, seed=0):
    """Constant-coefficient system with nontrivial P, Q, R, R1 (P well-conditioned)."""
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((n, n))
    p = np.eye(n) + 0.3 * (a + a.T) / 2
    q = 0.4 * rng.standard_normal((n, n))
    r = rng.standard_normal((n, n))
    r = 0.5 * (r + r.T)
    r1 = rng.standard_normal((n, n))
    r1 = 0.5 * (r1 + r1.T)
    return SLSystem(
        n=n,
        T=T,
        P=ConstantPath(p),
        Q=ConstantPath(q),
        R=ConstantPath(r),
        R1=ConstantPath(r1),
    )


def polynomial_system(T=1.0):
    """Smooth time-dependent scalar system via polynomial paths."""
    one = np.eye(1)
    return SLSystem(
        n=1,
        T=T,
        P=ConstantPath(one),
        Q=PolynomialPath((0.0 * one, 0.2 * one)),
        R=PolynomialPath((0.5 * one, 0.0 * one, -0.3 * one)),
        R1=PolynomialPath((-1.0 * one, -0.5 * one)),
    )


def random_symplectic_orthogonal(n, rng):
    """Block form [[C, -S], [S, C]] with C + iS unitary."""
    z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    u, _ = np.linalg.qr(z)
    c, s = u.real, u.imag
    top = np.hstack([c, -s])
    bottom = np.hstack([s, c])
    return np.vstack([top, bottom])


def random_lagrangian_frame(n, rng):
    """Random symplectic-orthogonal image of the Dirichlet frame."""
    from slspec.symplectic import frame_from_stacked

    u = random_symplectic_orthogonal(n, rng)
    return frame_from_stacked(u[:, :n])
