"""Secrecy rate regions, rate splitting and a small random-coding simulator
for the two-user multiple-access wiretap channel."""

from .channel import DMWiretapChannel, MIBundle, load_channel, mi_bundle, save_channel, uniform_inputs
from .estimators import RateSplitter, SecrecyRateRegion
from .polytope import Polytope, RateTuple, contains_point, equals, fm_eliminate, is_subset, vertices
from .regions import RegionKind, build_region
from .simcode import CodeConfig, UserRates, exact_leakage, generate_codebooks, run_trials
from .splitmap import classify, counterexample_tuple, search_counterexample, transform

__all__ = [
    "DMWiretapChannel",
    "MIBundle",
    "Polytope",
    "RateSplitter",
    "RateTuple",
    "RegionKind",
    "SecrecyRateRegion",
    "CodeConfig",
    "UserRates",
    "build_region",
    "classify",
    "contains_point",
    "counterexample_tuple",
    "equals",
    "exact_leakage",
    "fm_eliminate",
    "generate_codebooks",
    "is_subset",
    "load_channel",
    "mi_bundle",
    "run_trials",
    "save_channel",
    "search_counterexample",
    "transform",
    "uniform_inputs",
    "vertices",
]
