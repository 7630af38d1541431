"""Eigenvalue statistics of Sturm-Liouville systems with separated boundary conditions.

The pipeline: coefficient paths assemble a linear Hamiltonian system,
whose fundamental solution and iterated perturbation integrals feed two
spectral summaries of the boundary-value problem: the determinant
quotient g(1)/g(0) equal to prod_j (1 - 1/lam_j), and trace formulas for
sum_j 1/lam_j^m at any order m.  Independent oracles (transcendental
roots, finite differences) verify both at desk scale.
"""

from .coeffs import (
    ConstantPath,
    PolynomialPath,
    SampledPath,
    SLSystem,
    assemble_B,
    assemble_D,
    constant,
    eval_path,
    system_for_second_order,
)
from .flow import FlowResult, IterIntegrals, integrate_flow, iterated_integrals, monodromies
from .hill import Spectrum, hill_g, hill_quotient, locate_eigenvalues, truncated_product
from .oracle import TailEstimate, fd_dirichlet_eigs, robin_roots, tail_sum
from .symplectic import (
    BoundaryPair,
    LagFrame,
    Normalizer,
    build_normalizer,
    intersection,
    preset_dirichlet,
    preset_neumann,
    preset_robin,
    project,
    standard_J,
)
from .trace import (
    TraceReport,
    compute_G,
    conjugate_criterion,
    power_sum,
    robin_identity,
    trace_report,
)

__version__ = "0.1.0"
