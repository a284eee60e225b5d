"""Parallel transport maps over reductive homogeneous spaces at finite Fourier truncation.

The package is organised bottom-up:

* :mod:`ptmap.lie` matrix Lie algebras, exp/log/dexp, reductive pairs
* :mod:`ptmap.catalog` named algebras with splits and chart radii
* :mod:`ptmap.base` chart, invariant frame and covariant derivatives on G/K
* :mod:`ptmap.paths` truncated Fourier paths and sampled group paths
* :mod:`ptmap.transport` the transport map, gauge action, affine-submersion check
* :mod:`ptmap.shape` fiber and orbit shape operators, spectra, regularized traces
* :mod:`ptmap.verification` the acceptance suite as named checks
"""
from .config import TOL, Tolerances
from .errors import ConsistencyError, DomainError, InputError, NumericalError, PtmapError
from .lie import (ConnectionKind, LieAlgebra, ReductivePair, alpha, expm, logm,
                  nabla_bi_invariant, validate_reductive)
from .paths import FourierPath, GroupPath
from .base import Chart, OrbitSpec, chart_to_manifold, manifold_to_chart
from .transport import SolverConfig, TransportResult, gauge_action, solve_frame, solve_transport
from .shape import (CompatibleBasis, ShapeOperatorMatrix, SpectrumReport,
                    assemble_fiber_shape_operator, assemble_orbit_shape_operator, spectrum_report)
from . import catalog

__version__ = "0.1.0"
