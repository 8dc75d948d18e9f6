"""Free additive and multiplicative convolution of probability measures.

Measures on the real line, the half-line and the unit circle are combined
through their subordination functions; densities, atoms and free
indecomposability certificates are read off the boundary behaviour of the
transforms, and a random-matrix sampler provides an independent check.
"""

__version__ = "0.1.0"

from .atoms import AtomReport, analyze_atoms, atom_mass_probe, candidate_atoms, omega_boundary_limit, verify_atom_theorem
from .density import DensityGrid, boundary_value, interval_mass_estimate, recover_measure, stieltjes_invert
from .errors import (
    CarrierMismatchError,
    DomainError,
    EtaPoleError,
    FreeConvError,
    MeasureError,
    SpecSyntaxError,
    UnsupportedInputError,
)
from .evaluators import FreeConvolution, MeasureEvaluator
from .indecomposability import Certificate, certify_convolution, certify_indecomposable, gap_zeros, scan_gaps
from .measures import CircleMeasure, PosMeasure, RealMeasure, atomic, gap_mass, point_mass, validate
from .oracle import EigenSample, ks_distance, sample_additive, sample_mult_circle, sample_mult_pos
from .pieces import Arcsine, ArcUniform, MarchenkoPastur, Semicircle, Tabulated, TabulatedAngular, Uniform
from .specfile import load_measure, parse_measure_spec, save_measure, serialize_measure
from .subordination import (
    SubordinationSample,
    convolution_cauchy,
    convolution_eta,
    convolution_psi,
    solve_additive,
    solve_multiplicative_circle,
    solve_multiplicative_pos,
)
from .transforms import cauchy_transform, eta_transform, psi_transform, reciprocal_cauchy
