"""System identification by regression: DMD, DMDc, SINDy and SINDy with control."""

__version__ = "0.1.0"

from .differentiation import (DerivativeEstimate, central_difference, differentiate,
                              tv_derivative)
from .dmd import DmdcResult, DmdResult, dmd, dmd_predict, dmdc
from .errors import (DataError, DivergenceError, GridError, IllConditionedWarning, IoError,
                     ParamError, RankError, SchemaError, ShapeError, SindycError, SizeError)
from .library import LibraryMatrix, LibrarySpec, TermDescriptor, build_spec, evaluate, term_name
from .regression import (CoefficientMatrix, ParetoCurve, lasso, least_squares, pareto_sweep,
                         stlsq)
from .sindy import (FeedbackLaw, SparseModel, identify, identify_feedback, load_model,
                    model_rhs, model_to_equations, sampled_input, save_model, simulate)
from .systems import (LorenzParams, LotkaVolterraParams, Signal, exact_derivatives,
                      lorenz_rhs, lotka_volterra_rhs, make_signal, make_system, rk4_integrate)
from .timeseries import (SnapshotPair, TimeSeries, load_timeseries, save_timeseries,
                         to_snapshot_pair)
