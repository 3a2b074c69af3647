"""FX volatility smile construction, diagnostics and replication pricing.

The package covers the usual market-quote plumbing (delta conventions,
RR/BF pillars, strike solving), several smile representations (delta
polynomials, cubic splines, SVI, SABR, xSSVI), arbitrage diagnostics via
the Dupire denominator and implied density, and static replication pricing
of digitals, auto-quanto vanillas and variance swaps.  Pathological
representation choices are implemented faithfully rather than patched
over, so their failure modes can be measured.
"""

from .blackscholes import (
    ForwardContext,
    OptionKind,
    OptionSpec,
    PriceOutOfBoundsError,
    black_price,
    black_vega,
    implied_vol,
    norm_cdf,
    norm_inv_cdf,
    norm_pdf,
)
from .market import (
    AtmKind,
    DeltaConvention,
    DeltaMeasure,
    FixtureError,
    MixtureParams,
    NoSolutionError,
    PillarQuote,
    RrBfQuotes,
    SmileQuoteSet,
    atm_strike,
    convert_simple_rr_bf,
    forward_delta,
    load_fixture,
    mixture_call_price,
    mixture_implied_vol,
    mixture_quotes,
    reduced_delta,
    replace_pillars,
    strike_from_delta,
)
from .smiles import (
    Boundary,
    CubicSplineSmile,
    DeltaKind,
    DeltaPolynomial,
    Extrapolation,
    FixedPointDivergedError,
    FixedPointResult,
    FlatSmile,
    NegativeVarianceError,
    NoBracketError,
    SmileSection,
    SplineAxis,
    StrikeSolver,
    Transform,
    fit_delta_polynomial,
    fit_spline_smile,
    fixed_point_lookup,
    lookup_vol,
    negative_variance_intervals,
)
from .parametric import (
    CalibrationFailedError,
    SabrParams,
    SabrSmile,
    SviParams,
    SviSmile,
    XssviParams,
    XssviSmile,
    calibrate_sabr,
    calibrate_svi,
    calibrate_xssvi,
    sabr_vol,
    svi_total_variance,
    xssvi_total_variance,
)
from .arbitrage import (
    DensityCurve,
    GCurve,
    ScanReport,
    density,
    density_fd_oracle,
    g_function,
    scan_report,
)
from .pricing import (
    QuadratureError,
    ReplicationResult,
    VarSwapQuote,
    auto_quanto_price,
    digital_price,
    variance_swap_model_independent,
    variance_swap_replication,
)
from .models import MODEL_NAMES, build_smile, pillar_residuals

__all__ = [name for name in dir() if not name.startswith("_")]

__version__ = "0.1.0"
