"""Pass thresholds of the verification suites.

The asymptotic claims come without rates, so the bands are generous. Every
report prints the values it was judged with.
"""

import math

from ..montecarlo.estimators import AUTO_MODE_HITS, WILSON_MAX_HITS

RATIO_BAND = (0.7, 1.3)
TREND_POINTS = 3
TREND_SE_SLACK = 2.0

ESTIMATE_SLOPE_TOLERANCE = 0.1
HSERIES_SLOPE_TOLERANCE = 0.05
IDENTITY_REL_TOLERANCE = 1e-5

THEOREM3_MAX_DEVIATION = 0.3
SUPERCRITICAL_FACTOR = 5.0
EPS_RESID = 0.05
NU_BAND_SE = 3.0

DEFAULT_LAMBDAS = (0.1, math.log(2.0) / 2.0, 1.0)
DEFAULT_HORIZONS = (0, 25, 50, 100, 200)
DEFAULT_BATTERY_N = 3

EXIT_OK = 0
EXIT_HYPOTHESIS = 2
EXIT_VERDICT = 3

PASS = "pass"
FAIL = "fail"
COMPLETE = "complete"
OUTSIDE_HYPOTHESES = "outside hypotheses"


def thresholds() -> dict[str, object]:
    """All thresholds, as embedded in every report."""
    return {
        "ratio_band": list(RATIO_BAND),
        "trend_points": TREND_POINTS,
        "trend_se_slack": TREND_SE_SLACK,
        "estimate_slope_tolerance": ESTIMATE_SLOPE_TOLERANCE,
        "hseries_slope_tolerance": HSERIES_SLOPE_TOLERANCE,
        "identity_rel_tolerance": IDENTITY_REL_TOLERANCE,
        "theorem3_max_deviation": THEOREM3_MAX_DEVIATION,
        "supercritical_factor": SUPERCRITICAL_FACTOR,
        "eps_resid": EPS_RESID,
        "nu_band_se": NU_BAND_SE,
        "auto_mode_hits": AUTO_MODE_HITS,
        "wilson_max_hits": WILSON_MAX_HITS,
    }
