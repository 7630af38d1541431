"""The boundary determinant g(lam), its quotient, and real-eigenvalue location.

g(lam) = det(gamma_lam(T) Z0, Z1) vanishes exactly at the eigenvalues of
the boundary-value problem, and g(1)/g(0) equals the regularized spectral
product prod_j (1 - 1/lam_j).  The locator exists for verification: the
trace formula never needs located eigenvalues.  It covers real lam only;
for indefinite weight R1 complex eigenvalues are possible and out of its
scope.
"""

import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import DegeneracyError
from .flow import StageTables, _rk4_sweep
from .symplectic import span_intersection

REFINE_TOL = 1e-10
SCAN_POINTS = 400
DEFAULT_STEPS = 2048
MAX_REFINE_ITER = 200

#: Scan minima below this fraction of the scan's |g| scale become
#: even-order-zero candidates; acceptance after refinement is stricter.
MINIMA_CANDIDATE_REL = 1e-2
EVEN_ZERO_ACCEPT_REL = 1e-8

DEGENERACY_TOL = 1e-8
MULTIPLICITY_TOL = 1e-6


def _worker_count():
    """Scan fan-out width; SLSPEC_THREADS caps it, 0 or unset means auto."""
    raw = os.environ.get("SLSPEC_THREADS", "0")
    try:
        cap = int(raw)
    except ValueError:
        cap = 0
    if cap < 0:
        cap = 0
    auto = min(4, os.cpu_count() or 1)
    return cap if cap > 0 else auto


def _g_of_monodromies(monos, bc):
    z0 = bc.Z0.stacked
    z1 = bc.Z1.stacked
    left = monos @ z0
    right = np.broadcast_to(z1, left.shape)
    return np.linalg.det(np.concatenate([left, right], axis=2))


def _g_batch(tables, bc, lams, return_monodromies=False):
    monos, _ = _rk4_sweep(tables, lams)
    g = _g_of_monodromies(monos, bc)
    if return_monodromies:
        return g, monos
    return g


def hill_g(sys, bc, lam, N=DEFAULT_STEPS, tables=None):
    """det(gamma_lam(T) Z0, Z1): first n columns from the transported frame."""
    if tables is None:
        tables = StageTables(sys, N)
    return float(_g_batch(tables, bc, [lam])[0])


def hill_quotient(sys, bc, N=DEFAULT_STEPS):
    """g(1)/g(0), the determinant side of the spectral-product identity.

    Raises
    ------
    DegeneracyError
        If |g(0)| <= 1e-8 * max(1, ||gamma_0(T)||): zero is then an
        eigenvalue to tolerance and the quotient is meaningless.
    """
    tables = StageTables(sys, N)
    g, monos = _g_batch(tables, bc, [0.0, 1.0], return_monodromies=True)
    g0, g1 = float(g[0]), float(g[1])
    scale = max(1.0, float(np.linalg.norm(monos[0])))
    if abs(g0) <= DEGENERACY_TOL * scale:
        raise DegeneracyError(
            f"|g(0)|={abs(g0):.3e} below tolerance: 0 is an eigenvalue to tolerance"
        )
    return g1 / g0


@dataclass(frozen=True)
class Spectrum:
    """Located real eigenvalues with brackets, residuals, and multiplicity estimates.

    multiplicity_estimate reports the geometric intersection dimension at
    the located point (floored at 2 for sign-preserving even-order zeros);
    it is an estimate, never a certificate, and may undercount algebraic
    multiplicity for indefinite weights.
    """

    eigenvalues: tuple
    brackets: tuple
    multiplicity_estimate: tuple
    scan_range: tuple
    residuals: tuple

    def __len__(self):
        return len(self.eigenvalues)


def _bisect_brackets(tables, bc, lo, hi, f_lo, refine_tol, g_scale):
    """Vectorized sign-change bisection; returns roots and final brackets."""
    lo = lo.copy()
    hi = hi.copy()
    f_lo = f_lo.copy()
    for _ in range(MAX_REFINE_ITER):
        mid = 0.5 * (lo + hi)
        fm = _g_batch(tables, bc, mid)
        left = f_lo * fm <= 0.0
        hi = np.where(left, mid, hi)
        lo = np.where(left, lo, mid)
        f_lo = np.where(left, f_lo, fm)
        width_ok = hi - lo <= refine_tol * np.maximum(1.0, np.abs(mid))
        resid_ok = np.abs(fm) <= refine_tol * g_scale
        if np.all(width_ok & resid_ok) or np.all(
            hi - lo <= 4 * np.finfo(float).eps * np.maximum(np.abs(mid), 1.0)
        ):
            break
    mid = 0.5 * (lo + hi)
    return mid, lo, hi


_INV_PHI = (np.sqrt(5.0) - 1.0) / 2.0


def _golden_min(tables, bc, lo, hi, refine_tol):
    """Vectorized golden-section minimization of |g| on the given brackets."""
    a = lo.copy()
    b = hi.copy()
    x1 = b - _INV_PHI * (b - a)
    x2 = a + _INV_PHI * (b - a)
    f1 = np.abs(_g_batch(tables, bc, x1))
    f2 = np.abs(_g_batch(tables, bc, x2))
    for _ in range(MAX_REFINE_ITER):
        left = f1 < f2  # minimum bracketed in [a, x2]
        x1_old, x2_old = x1, x2
        f1_old, f2_old = f1, f2
        a = np.where(left, a, x1_old)
        b = np.where(left, x2_old, b)
        probe = np.where(left, b - _INV_PHI * (b - a), a + _INV_PHI * (b - a))
        fp = np.abs(_g_batch(tables, bc, probe))
        # The surviving interior point slides to the other side; the probe
        # fills the vacancy.
        x1 = np.where(left, probe, x2_old)
        x2 = np.where(left, x1_old, probe)
        f1 = np.where(left, fp, f2_old)
        f2 = np.where(left, f1_old, fp)
        if np.all(b - a <= refine_tol * np.maximum(1.0, np.abs(a))):
            break
    x = 0.5 * (a + b)
    fx = np.abs(_g_batch(tables, bc, x))
    return x, a, b, fx


def locate_eigenvalues(
    sys,
    bc,
    scan_range,
    scan_points=SCAN_POINTS,
    refine_tol=REFINE_TOL,
    N=DEFAULT_STEPS,
):
    """Scan g on a uniform grid and refine its zeros.

    Sign changes refine by bisection; local minima of |g| that dip below
    a small fraction of the scan scale (candidate even-order zeros, which
    do not flip the sign) refine by golden section and are kept only if
    the refined |g| is consistent with an actual zero.  Multiplicities
    are estimated from dim(gamma_lam(T) Lambda_0 ∩ Lambda_1).

    The scan fans out across threads; the SLSPEC_THREADS environment
    variable caps the width (0 = auto).  Results are deterministic for a
    given configuration regardless of the fan-out.
    """
    lo_r, hi_r = float(scan_range[0]), float(scan_range[1])
    if scan_points < 2:
        raise ValueError("scan_points must be >= 2")
    if not hi_r > lo_r:
        raise ValueError("scan_range must be an increasing pair")

    tables = StageTables(sys, N)
    grid = np.linspace(lo_r, hi_r, scan_points)

    workers = _worker_count()
    if workers > 1 and scan_points >= 4 * workers:
        chunks = np.array_split(grid, workers)
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda c: _g_batch(tables, bc, c), chunks))
        g = np.concatenate(parts)
    else:
        g = _g_batch(tables, bc, grid)

    if not np.all(np.isfinite(g)):
        raise ValueError("g(lambda) blew up on the scan grid; reduce the range or raise N")
    g_scale = float(np.max(np.abs(g)))
    if g_scale == 0.0:
        g_scale = 1.0

    sign_lo, sign_hi, sign_flo = [], [], []
    min_lo, min_hi = [], []
    for i in range(scan_points - 1):
        if g[i] == 0.0:
            continue  # grid point exactly on a zero: neighbours catch it
        if g[i] * g[i + 1] < 0.0:
            sign_lo.append(grid[i])
            sign_hi.append(grid[i + 1])
            sign_flo.append(g[i])
    for i in range(1, scan_points - 1):
        interior_min = abs(g[i]) < abs(g[i - 1]) and abs(g[i]) <= abs(g[i + 1])
        no_flip = g[i - 1] * g[i] > 0.0 and g[i] * g[i + 1] > 0.0
        if interior_min and no_flip and abs(g[i]) < MINIMA_CANDIDATE_REL * g_scale:
            min_lo.append(grid[i - 1])
            min_hi.append(grid[i + 1])

    found = []  # (lam, lo, hi, residual, from_minimum)
    if sign_lo:
        roots, b_lo, b_hi = _bisect_brackets(
            tables,
            bc,
            np.array(sign_lo),
            np.array(sign_hi),
            np.array(sign_flo),
            refine_tol,
            g_scale,
        )
        resid = np.abs(_g_batch(tables, bc, roots))
        for lam, a, b, r in zip(roots, b_lo, b_hi, resid):
            found.append((float(lam), float(a), float(b), float(r), False))
    if min_lo:
        xs, a_s, b_s, fs = _golden_min(
            tables, bc, np.array(min_lo), np.array(min_hi), refine_tol
        )
        for lam, a, b, r in zip(xs, a_s, b_s, fs):
            if r <= EVEN_ZERO_ACCEPT_REL * g_scale:
                found.append((float(lam), float(a), float(b), float(r), True))

    found.sort(key=lambda item: item[0])
    # Multiplicity estimates from the transported-frame intersection.
    mults = []
    if found:
        lams = np.array([item[0] for item in found])
        monos, _ = _rk4_sweep(tables, lams)
        z0 = bc.Z0.stacked
        z1 = bc.Z1.stacked
        for mono, item in zip(monos, found):
            dim, _ = span_intersection(mono @ z0, z1, tol=MULTIPLICITY_TOL)
            floor = 2 if item[4] else 1
            mults.append(max(dim, floor))

    return Spectrum(
        eigenvalues=tuple(item[0] for item in found),
        brackets=tuple((item[1], item[2]) for item in found),
        multiplicity_estimate=tuple(mults),
        scan_range=(lo_r, hi_r),
        residuals=tuple(item[3] for item in found),
    )


def truncated_product(spectrum, tail=None):
    """prod (1 - 1/lam_j)^mult over the given spectrum, tail-corrected.

    `spectrum` may be a Spectrum or a plain sequence of eigenvalues
    (multiplicity 1 each).  The tail correction multiplies by
    exp(-tail.value), using log(1 - x) ~ -x for the omitted terms; a
    missing tail means no correction.  An eigenvalue equal to 1 within
    1e-12 forces the product to 0 and emits a warning.
    """
    if isinstance(spectrum, Spectrum):
        eigs = np.asarray(spectrum.eigenvalues, dtype=float)
        mult = np.asarray(spectrum.multiplicity_estimate, dtype=float)
    else:
        eigs = np.asarray(spectrum, dtype=float)
        mult = np.ones_like(eigs)
    if np.any(eigs == 0.0):
        raise ValueError("truncated product undefined with a zero eigenvalue")
    if eigs.size == 0:
        base = 1.0
    else:
        unit = np.abs(eigs - 1.0) <= 1e-12 * np.maximum(1.0, np.abs(eigs))
        if np.any(unit):
            warnings.warn("eigenvalue equal to 1 within tolerance; product is 0")
            return 0.0
        base = float(np.prod((1.0 - 1.0 / eigs) ** mult))
    if tail is not None:
        base *= float(np.exp(-tail.value))
    return base
