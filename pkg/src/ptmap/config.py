"""Central tolerance record.

Every numerical threshold used by the checks lives here so the acceptance
suite and the library agree on a single set of values.
"""
from dataclasses import dataclass


@dataclass(frozen=True)
class Tolerances:
    # lie core
    structure: float = 1e-12          # Jacobi, antisymmetry, commutator agreement
    reductive: float = 1e-12          # [k,k] in k, [k,p] in p, projector identities
    group_invariance: float = 1e-8    # Ad(exp(tx)) p in p for sampled x in k
    group_relation: float = 1e-10     # defining relations of matrix subgroups
    ad_skew: float = 1e-10
    homomorphism: float = 1e-10
    exp_log: float = 1e-10
    dexp_series_term: float = 1e-14
    dexp_fd: float = 1e-8
    # base geometry
    chart_roundtrip: float = 1e-9
    chart_newton_residual: float = 1e-10
    chart_newton_maxiter: int = 50
    fd_step: float = 1e-5
    frame_fd_step: float = 1e-6
    frame_agreement: float = 1e-6
    torsion: float = 1e-6
    geodesic_acceleration: float = 1e-6
    orbit_subalgebra: float = 1e-12
    orbit_equivariance: float = 1e-10
    # path space
    projection_exact: float = 1e-10
    parseval: float = 1e-10
    l2_slack: float = -1e-12
    # transport
    blowup_norm: float = 1e6
    transport_exact: float = 1e-10
    equivariance: float = 1e-7
    frame_roundtrip: float = 1e-7
    differential_fd_step: float = 1e-4
    differential_agreement: float = 1e-6
    affine_residual: float = 1e-6
    affine_negative: float = 1e-3
    min_order: float = 3.7
    # shape operators and spectra
    dual_route: float = 1e-12
    zero_diagonal: float = 1e-14
    austere: float = 1e-8
    trace_I: float = 1e-10
    zero_real_part: float = 1e-12
    eigen_grouping: float = 1e-8
    block_norm_slack: float = 1e-10
    decay_exponent: float = 1.0
    decay_exponent_window: float = 0.05
    eigen_cauchy: float = 1e-6
    linearity: float = 1e-13
    trace_II_basis_change: float = 1e-10
    orbit_consistency: float = 1e-9
    orbit_fiber_agreement: float = 1e-13
    trace_II_N_independence: float = 1e-13
    mean_curvature: float = 1e-4


TOL = Tolerances()
