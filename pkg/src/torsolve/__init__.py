"""Fourier-spectral solvability analysis for toroidal operator systems.

The package studies first-order systems L_j = D_{t_j} + c_j(t) P_j(D_x)
acting on p-forms over a split torus, at desk scale: finite frequency
boxes, exact rational arithmetic wherever the inputs allow it, and
empirically labeled verdicts everywhere a statement is asymptotic.
"""

from .errors import (
    BandwidthError,
    ClosednessError,
    CompatibilityError,
    ConfigError,
    DomainError,
    NoWitnessError,
    ResourceError,
    TorsolveError,
)
from .forms import (
    ConstPForm,
    FrequencyBox,
    TrigPForm,
    TrigPoly,
    freq_radius,
    is_exact,
    merge_sign,
    wedge_sign,
)
from .scalars import GaussianRational
from .symbols import (
    GrowthClass,
    SystemSpec,
    ToroidalSymbol,
    classify_growth,
    eval_symbol_slice,
    slice_norm,
    slice_norm_exact,
    system_from_json,
)
from .wedge_solver import wedge_compat, wedge_divide, wedge_general

__version__ = "0.1.0"
