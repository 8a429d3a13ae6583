"""Dyadic covers, fine-cover costs and series verdicts for multiplicatively
psi-approximable points, with desk-scale empirical checks."""

__version__ = "0.1.0"

from .errors import (BudgetExceeded, CapExceeded, CoverOverflow, DomainError,  # noqa: F401
                     MultcoverError, OutOfRange, ParseError)
from .functions import (ApproximatingFunction, DimensionFunction, SlicedDimensionFunction,  # noqa: F401
                        check_condition_I, check_condition_II, lower_order_tau, parse_dimfn,
                        parse_psi)
from .hyperbola_cover import (HyperbolaRegion, cost_scaling_report, cover_cost,  # noqa: F401
                              exponent_set, materialize_cover, point_to_box)
from .finecover import (doubly_metric_cost_truncated, f_doubling_check,  # noqa: F401
                        finecover_cost_truncated)
from .series import (build_series_term, classify_powerlog, hausdorff_dimension,  # noqa: F401
                     verdict)
