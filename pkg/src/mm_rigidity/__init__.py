"""Numerical toolkit for isoperimetric profiles, observable variance and
one-dimensional model spaces of metric measure spaces."""
from .domination import (
    build_monotone_transport,
    ic_check,
    icl_check,
    iso_dominance_check,
    sep_necessary_check,
)
from .errors import (
    ConstructionError,
    ContractError,
    CoverageError,
    DivergenceError,
    DomainError,
    MMError,
    NotInVError,
    NumericalError,
    PreconditionError,
    ResolutionError,
    SchemaError,
    SizeError,
)
from .lambdas import Lambda, get_lambda
from .measures1d import (
    DiscreteAtoms,
    Gaussian,
    GridDensity,
    GridSpec,
    ProfileCurve,
    SphericalModel,
    TransportMap,
    Uniform,
    cdf_eval,
    centered_second_moment,
    construct_from_phi,
    half_line_profile,
    interval_profile_1d,
    is_iso_simple,
    levy_distance,
    pushforward,
    quantile_eval,
    sep_measure,
    t_minus,
    t_plus,
    var_lambda,
)
from .mmspace import (
    FiniteMMSpace,
    LipschitzFunction,
    cheeger_constant,
    interval,
    profile_bruteforce,
    separation,
    sphere_angle,
    warped_product,
)
from .obsvar import (
    obsvar_bruteforce,
    obsvar_maximize,
    spectral_gap_check,
    verify_bound,
    verify_foliation,
)

__version__ = "0.1.0"
