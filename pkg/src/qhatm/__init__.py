"""Semi-analytic q-HATM series solver for time-fractional WBK shallow-water systems.

The solution is built as a truncated series in ``t**alpha`` at every node of
a 1-D grid: time is handled exactly (fractional power rule), space by
high-order central finite differences.
"""

from .analysis import (
    ConvergenceReport,
    ErrorTable,
    alpha_sweep,
    convergence_report,
    error_table,
    hcurve,
    run_preset,
    table_preset,
)
from .engine import (
    QhatmParams,
    SolutionBundle,
    assemble,
    default_grid,
    k_factor,
    qhatm_solve,
    qhatm_step,
    residual,
)
from .errors import (
    ConfigError,
    DomainError,
    HaloError,
    OrderMismatchError,
    QhatmError,
    SingularityError,
)
from .fracseries import AlphaSeries, series_add, series_caputo, series_eval, series_jalpha, series_mul
from .models import ModelSpec, alw_model, get_model, golden_iterates, mb_model, wbk_model
from .spatial import FieldSeries, GridSpec, fd_derivative, sample_field
from .specialfn import QuadratureSpec, caputo_oracle, gamma, rl_integral_oracle

__version__ = "0.1.0"
