"""Geometric Lorenz maps: shrinking-target Borel-Cantelli statistics,
extreme value laws, and rare-event point processes, numerically."""

from .params import ModelParams, BakerParams, DEFAULT_PARAMS
from .maps import (SectionPoint, lorenz_T, lorenz_T_prime, lorenz_F, baker_F,
                   return_time, iterate_orbit)
from .measure import (EmpiricalMeasure, build_empirical_measure, ulam_acim,
                      local_dimension)
from .borel_cantelli import build_targets, run_sbc, sp_diagnostic, \
    short_return_profile
from .evt import Observable, levels, block_maxima, gumbel_ks, d_prime_stat, \
    d3_stat, repp
from .flow import SuspensionPoint, advance_flow, mean_return_time, \
    segment_max_phi, flow_evl

__version__ = "0.1.0"
