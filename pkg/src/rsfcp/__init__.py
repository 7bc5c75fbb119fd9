"""Distributed (1+eps)-approximation for row-sparse fractional covering and
column-sparse fractional packing LPs, with a CONGEST-model simulator."""

from .congest import build_network, run_distributed, run_phase_protocol
from .engine import Params, PhaseTrace, SolverState, apply_phase, rho, run, select, setup_params
from .instances import (
    GeneralInstance,
    InstanceError,
    NormalizedInstance,
    ParseError,
    PrimalDualSolution,
    SparseNonNegMatrix,
    a_max,
    gamma_d,
    gamma_p,
    gen_random_rs,
    gen_set_cover,
    gen_vertex_cover_lp,
    parse_instance,
    serialize_instance,
)
from .normalize import NormalizationMap, denormalize, normalize
from .verify import Certificate, audit_trace, certify, check_dual, check_primal, exact_opt

__all__ = [
    "Certificate",
    "GeneralInstance",
    "InstanceError",
    "NormalizationMap",
    "NormalizedInstance",
    "Params",
    "ParseError",
    "PhaseTrace",
    "PrimalDualSolution",
    "SolverState",
    "SparseNonNegMatrix",
    "a_max",
    "apply_phase",
    "audit_trace",
    "build_network",
    "certify",
    "check_dual",
    "check_primal",
    "denormalize",
    "exact_opt",
    "gamma_d",
    "gamma_p",
    "gen_random_rs",
    "gen_set_cover",
    "gen_vertex_cover_lp",
    "normalize",
    "parse_instance",
    "rho",
    "run",
    "run_distributed",
    "run_phase_protocol",
    "select",
    "serialize_instance",
    "setup_params",
]
