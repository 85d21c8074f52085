"""Numerical analysis of the Lengyel-Epstein cubic family.

    x' = (a - x)(1 + x^2) - 4xy,    y' = bx(1 + x^2 - y),    a, b > 0.
"""

__version__ = "0.1.0"

from ._backend import BACKEND, HAVE_COMPILED  # noqa: E402
from .model import (  # noqa: E402
    A1, A2, CURVES_MEET_A, EquilibriumKind, EquilibriumReport, Params, Region, RegionReport, State,
    basin_b, classify_equilibrium, dulac_certificate, dulac_divergence, equilibrium, hopf_b,
    jacobian, original_vector_field, region_membership, vector_field,
)
from .integrate import (  # noqa: E402
    Fate, IntegratorConfig, NoWitness, Orbit, basin_scan, escape_search, integrate, verify_invariance,
)
from .hopf import (  # noqa: E402
    HopfData, NotOnHopfCurve, bautin_a, hopf_data, hopf_scan, l1_sign_poly, lyapunov_l2,
)
from .cycles import (  # noqa: E402
    BracketFailure, CycleInfo, NoReturn, Section, Stability, count_cycles, find_cycles,
    floquet_multiplier, return_map, semistable_b, semistable_bracket,
)
from .infinity import (  # noqa: E402
    Chart, blowup_field, chart_u1_field, chart_u2_field, circle_equilibria, disk_projection,
    infinite_equilibria, semi_hyperbolic_reduce,
)
