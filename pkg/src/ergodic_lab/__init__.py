"""ergodic-lab: numerical experiments with weighted composition operators on interval maps."""

__version__ = "0.1.0"

from .combinatorics import bell_partial, bell_table, faa_di_bruno, stirling_oracle
from .dynamics import (fixed_points, involution_defect, involution_from_even, invert_monotone,
                       orbit, stable_orbits)
from .ergodic import (DiagnosisConfig, DistributionSample, SeminormRequest, TestFunction,
                      WeightedSymbol, apply_power_derivative, cesaro_mean, cesaro_pairing,
                      check_cesaro_bound_condition, check_vanishing_condition, diagnose,
                      distribution_pairing, seminorm, vanishing_power_check)
from .expr import Expression, differentiate, evaluate, parse
from .intervals import CompactInterval, DomainInterval
from .jets import Jet, iterate_jets, jet_compose, jet_invert, jet_lift, jet_multiply
