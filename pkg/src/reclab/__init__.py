"""reclab: a desk-scale laboratory for k-recurrence sets and their averages."""

from .fixedpoint import (
    AlphaSpec,
    Membership,
    Precision,
    PrecisionError,
    UnitValue,
    dist_to_integer,
    frac_npow,
    interval_test,
    realize,
)
from .lemma import LemmaSolution, solve_by_elimination, solve_canonical
from .sequences import SetStream, density, gen_Sk, gen_SkPrime, power_set
from .torus import (
    EpsilonBall,
    SkewSystem,
    TorusPoint,
    monte_carlo_return_check,
    nonrecurrence_certificate,
    orbit_last_coord,
    orbit_point,
    step,
    verify_orbit_identity,
)
from .averages import (
    ComplexAvg,
    WindowReport,
    block_sign_report,
    recurrence_average,
    weighted_average_diff,
    weyl_sum,
)
from .intersectivity import (
    APWitness,
    DenseSet,
    build_witness,
    find_ap,
    intersectivity_scan,
)

__version__ = "0.1.0"

__all__ = [
    "AlphaSpec",
    "APWitness",
    "ComplexAvg",
    "DenseSet",
    "EpsilonBall",
    "LemmaSolution",
    "Membership",
    "Precision",
    "PrecisionError",
    "SetStream",
    "SkewSystem",
    "TorusPoint",
    "UnitValue",
    "WindowReport",
    "block_sign_report",
    "build_witness",
    "density",
    "dist_to_integer",
    "find_ap",
    "frac_npow",
    "gen_Sk",
    "gen_SkPrime",
    "intersectivity_scan",
    "interval_test",
    "monte_carlo_return_check",
    "nonrecurrence_certificate",
    "orbit_last_coord",
    "orbit_point",
    "power_set",
    "realize",
    "recurrence_average",
    "solve_by_elimination",
    "solve_canonical",
    "step",
    "verify_orbit_identity",
    "weighted_average_diff",
    "weyl_sum",
]
