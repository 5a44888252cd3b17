"""Widom factors of L_p extremal polynomials on intervals, arcs, the unit
circle and polynomial pre-images."""

from .measures import (CircularArc, DiscretizedMeasure, Interval, PreimageCircle,
                       PreimageReal, UnitCircle, add_atoms, apply_weight,
                       build_equilibrium, moment)
from .potential import CapacityResult, capacity, relative_entropy
from .extremal import (MonicPoly, VerblunskySequence, WidomRecord, extremality_residual,
                       lp_extremal, orthogonal_monic, sharpness_experiment,
                       verblunsky_from_measure, weak_star_probe, widom_record)
from .preimage import (PullbackSpec, ReflectionlessSpec, circle_power_extremal,
                       gamma_widom_value, lift_extremal, polynomial_roots, pullback,
                       reflectionless_measure, saturation_check, validate_spec)
from .arc import (ArcParams, arc_asymptotics, arc_verblunsky_closed, arc_widom_closed,
                  arc_widom_sequence, chebyshev_ratio, monotonicity_report, szego_check)

__version__ = "0.1.0"
