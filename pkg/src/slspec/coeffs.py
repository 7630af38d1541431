"""Coefficient paths on [0, T] and assembly of the Hamiltonian coefficient.

A second-order system -(P y' + Q y)' + Q^T y' + (R + lam*R1) y = 0 is
described by four matrix-valued paths.  P, R, R1 must be symmetric and
P(t) invertible; both are validated on a probe grid at construction
(continuous verification is impossible, so violations between nodes go
undetected by design).
"""

from dataclasses import dataclass, field

import numpy as np

from . import numkernel
from .errors import DomainError, SingularMatrixError

SYMMETRY_RTOL = 1e-10
PROBE_POINTS = 64


class CoeffPath:
    """Base class for time-dependent n x n coefficient matrices."""

    n = None

    def eval(self, t):
        raise NotImplementedError

    def scaled(self, factor):
        """Path whose value is ``factor`` times this one at every t."""
        raise NotImplementedError


@dataclass(frozen=True)
class ConstantPath(CoeffPath):
    """Time-independent coefficient."""

    matrix: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "matrix", numkernel.as_matrix(self.matrix))
        if self.matrix.shape[0] != self.matrix.shape[1]:
            raise ValueError("coefficient matrices must be square")

    @property
    def n(self):
        return self.matrix.shape[0]

    def eval(self, t):
        return self.matrix

    def scaled(self, factor):
        return ConstantPath(factor * self.matrix)


@dataclass(frozen=True)
class PolynomialPath(CoeffPath):
    """Matrix polynomial sum_k c_k t^k, evaluated by Horner's rule."""

    coeffs: tuple

    def __post_init__(self):
        cs = tuple(numkernel.as_matrix(c) for c in self.coeffs)
        if not cs:
            raise ValueError("polynomial path needs at least one coefficient")
        n = cs[0].shape[0]
        for c in cs:
            if c.shape != (n, n):
                raise ValueError("all polynomial coefficients must be n x n")
        object.__setattr__(self, "coeffs", cs)

    @property
    def n(self):
        return self.coeffs[0].shape[0]

    def eval(self, t):
        acc = np.array(self.coeffs[-1])
        for c in self.coeffs[-2::-1]:
            acc = acc * t + c
        return acc

    def scaled(self, factor):
        return PolynomialPath(tuple(factor * c for c in self.coeffs))


@dataclass(frozen=True)
class SampledPath(CoeffPath):
    """Values on a strictly increasing grid, linear interpolation between nodes.

    Piecewise-linear data limits the integrator to second-order accuracy;
    use ConstantPath/PolynomialPath when smooth coefficients are available.
    """

    grid: np.ndarray
    values: tuple

    def __post_init__(self):
        g = np.asarray(self.grid, dtype=float)
        vals = tuple(numkernel.as_matrix(v) for v in self.values)
        if g.ndim != 1 or g.size != len(vals):
            raise ValueError("grid and values must have matching length")
        if g.size < 2 or np.any(np.diff(g) <= 0):
            raise ValueError("grid must be strictly increasing with >= 2 nodes")
        n = vals[0].shape[0]
        for v in vals:
            if v.shape != (n, n):
                raise ValueError("all sample matrices must be n x n")
        g.flags.writeable = False
        object.__setattr__(self, "grid", g)
        object.__setattr__(self, "values", vals)

    @property
    def n(self):
        return self.values[0].shape[0]

    def eval(self, t):
        g = self.grid
        if t < g[0] - 1e-12 * max(1.0, abs(g[-1])) or t > g[-1] + 1e-12 * max(1.0, abs(g[-1])):
            raise DomainError(f"t={t} outside sampled grid [{g[0]}, {g[-1]}]")
        t = min(max(t, g[0]), g[-1])
        i = int(np.searchsorted(g, t, side="right")) - 1
        i = min(max(i, 0), g.size - 2)
        w = (t - g[i]) / (g[i + 1] - g[i])
        return (1.0 - w) * self.values[i] + w * self.values[i + 1]

    def scaled(self, factor):
        return SampledPath(self.grid, tuple(factor * v for v in self.values))


def constant(matrix):
    """Shorthand constructor; accepts a scalar for n=1."""
    m = np.atleast_2d(np.asarray(matrix, dtype=float))
    return ConstantPath(m)


def eval_path(path, t, horizon=None):
    """Evaluate a coefficient path at time t.

    When `horizon` is given, requires 0 <= t <= horizon and raises
    DomainError otherwise; SampledPath additionally enforces its own grid
    bounds.  (Constant and polynomial paths carry no intrinsic domain, so
    the check happens here, where the system horizon is known.)
    """
    if horizon is not None and not (-1e-12 <= t <= horizon * (1 + 1e-12) + 1e-12):
        raise DomainError(f"t={t} outside [0, {horizon}]")
    return path.eval(t)


def _check_symmetric(m, name, t):
    dev = np.linalg.norm(m - m.T)
    if dev > SYMMETRY_RTOL * max(1.0, np.linalg.norm(m)):
        raise ValueError(f"{name}({t}) is not symmetric (deviation {dev:.3e})")


@dataclass(frozen=True)
class SLSystem:
    """Second-order system data: dimension, horizon, coefficient paths."""

    n: int
    T: float
    P: CoeffPath
    Q: CoeffPath
    R: CoeffPath
    R1: CoeffPath
    _validated: bool = field(default=False, repr=False, compare=False)

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("dimension n must be >= 1")
        if not (self.T > 0):
            raise ValueError("horizon T must be positive")
        for name in ("P", "Q", "R", "R1"):
            path = getattr(self, name)
            if path.n != self.n:
                raise ValueError(f"path {name} has dimension {path.n}, expected {self.n}")
        # Probe grid: symmetry of P, R, R1 and invertibility of P.  Checks
        # at evaluation nodes only; the paper's continuity assumption is
        # the user's responsibility between nodes.
        for t in np.linspace(0.0, self.T, PROBE_POINTS):
            p = self.P.eval(t)
            _check_symmetric(p, "P", t)
            _check_symmetric(self.R.eval(t), "R", t)
            _check_symmetric(self.R1.eval(t), "R1", t)
            d = numkernel.det(p)
            if abs(d) <= numkernel.TOL_SINGULAR * max(numkernel.scale(p), 1e-300):
                raise SingularMatrixError(f"P({t}) singular (det={d:.3e})", det=d)
        object.__setattr__(self, "_validated", True)


def assemble_B(sys, lam, t):
    """Hamiltonian coefficient B_lam(t) of the first-order form z' = J B z.

    Blocks: [[P^-1, -P^-1 Q], [-Q^T P^-1, Q^T P^-1 Q - R - lam*R1]].
    Symmetric by construction when P, R, R1 are.
    """
    p = eval_path(sys.P, t, sys.T)
    q = eval_path(sys.Q, t, sys.T)
    r = eval_path(sys.R, t, sys.T)
    r1 = eval_path(sys.R1, t, sys.T)
    try:
        pinv = numkernel.inverse(p)
    except SingularMatrixError as err:
        raise SingularMatrixError(f"P(t) singular at t={t}", det=err.det) from err
    pinv_q = pinv @ q
    top = np.hstack([pinv, -pinv_q])
    bottom = np.hstack([-pinv_q.T, q.T @ pinv_q - r - lam * r1])
    return np.vstack([top, bottom])


def assemble_D(sys, t):
    """Perturbation block diag(0, -R1(t)); B_lam = B_0 + lam * D."""
    r1 = eval_path(sys.R1, t, sys.T)
    n = sys.n
    d = np.zeros((2 * n, 2 * n))
    d[n:, n:] = -r1
    return d


def system_for_second_order(R, T, n=None):
    """Wrap y'' + lam * R(t) y = 0 as an SLSystem (P=I, Q=0, R=0, R1=-R)."""
    if not isinstance(R, CoeffPath):
        R = constant(R)
    if n is None:
        n = R.n
    eye = ConstantPath(np.eye(n))
    zero = ConstantPath(np.zeros((n, n)))
    return SLSystem(n=n, T=float(T), P=eye, Q=zero, R=zero, R1=R.scaled(-1.0))
