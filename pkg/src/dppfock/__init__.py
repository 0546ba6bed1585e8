"""Determinantal point processes, Fredholm determinants and finite wedge-space coherent states."""

from .dpp_finite import (
    FiniteDPP,
    count_distribution,
    correlation,
    expectation_brute,
    expectation_det,
    gram_brute,
    gram_det,
    multiplicative_functional,
    point_probability,
)
from .embedding import (
    doubling_projector,
    general_embedding_check,
    projector_embedding_check,
)
from .fock import BlockOperator, FockVector, SplitSpace, coherent_inner_det, coherent_state, fock_inner, vacuum
from .fredholm import PiecewiseSymbol, fredholm_det, gap_probability, trace_class_report
from .kernels import (
    DiscreteKernel,
    QuadratureRule,
    SpectralData,
    discretize,
    gauss_legendre,
    make_discrete_kernel,
    sine_kernel,
    spectral_decompose,
)
from .sampler import inclusion_audit, mc_expectation, sample, sample_batch

__version__ = "0.1.0"
