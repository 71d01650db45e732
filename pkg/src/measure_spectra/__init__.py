"""Negative spectra of -Δ + ε²Δ² + μ for point measures μ, with circle oracle and convergence harness."""

__version__ = "0.1.0"

from measure_spectra.green import KernelParams, decompose, free_green, green_eval, green_hat
from measure_spectra.measure import (
    CircleMeasure,
    CurveMeasure,
    ExplicitMeasure,
    IntervalDensity,
    PointMeasure,
    discretize_circle,
    discretize_curve,
    sample_random,
    weak_distance,
)
from measure_spectra.oracle import CircleSpec, circle_eigenvalue, circle_spectrum
from measure_spectra.spectral import (
    SchroedingerProblem,
    SolverOptions,
    SpectrumResult,
    eigenfunction,
    find_spectrum,
)

__all__ = [
    "CircleMeasure",
    "CircleSpec",
    "CurveMeasure",
    "ExplicitMeasure",
    "IntervalDensity",
    "KernelParams",
    "PointMeasure",
    "SchroedingerProblem",
    "SolverOptions",
    "SpectrumResult",
    "circle_eigenvalue",
    "circle_spectrum",
    "decompose",
    "discretize_circle",
    "discretize_curve",
    "eigenfunction",
    "find_spectrum",
    "free_green",
    "green_eval",
    "green_hat",
    "sample_random",
    "weak_distance",
]
