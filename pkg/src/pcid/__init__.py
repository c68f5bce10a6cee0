"""Causal identification on periodic time-series graphs with latent confounders."""

from .admg import SegmentGraph, Vertex, ancestors, c_components, induced_subgraph, mutilate_incoming
from .bounded import (
    NOT_STABILIZED, AllShiftsResult, Compression, CutPlan, LayerSignature, compress_hedge,
    decide_all_shifts, decide_bounded, layer_signature, minimal_lookback, phi_cut,
)
from .errors import (
    DomainError, PcidError, PreconditionError, QueryError, RefusalError, ValidationError,
)
from .families import FamilyRequest, past_confounding, contemporaneous, generate, gw, gw_known_hedge, random_spec
from .ident import Hedge, IdResult, enumerate_hedges, id_decide, validate_hedge
from .periodic import (
    LatencyReduction, PeriodicSpec, distance, lookback_constant, reduce_latency, shift_set, unroll,
)

__version__ = "0.1.0"
