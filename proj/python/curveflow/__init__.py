"""Python bindings for the curveflow C++ core."""

from ._core import (
    CertificationError,
    ClassificationError,
    CompiledFlow,
    CurveflowError,
    MonitorBreach,
    ParseError,
    SpectralState,
    certify,
    closure_defect,
    compile_flow,
    dominance_check,
    enclosed_area,
    family_criteria,
    fit_rate,
    linear_eigenvalue,
    make_initial,
    max_delta,
    normalize_area,
    p_n_eps,
    p_n_eps_exact,
    reconstruct,
    rhs_direct,
    rhs_pseudospectral,
    run_experiment,
    seminorm,
    step,
    sup_p,
)

__version__ = "0.1.0"
