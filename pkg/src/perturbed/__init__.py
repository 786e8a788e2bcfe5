"""Embedding spanning structures in randomly perturbed graphs via absorption."""

from __future__ import annotations

from .absorption import build_auxiliary, build_reservoirs, resolve_switching, switch_many, switch_one
from .decomposition import Decomposition, decompose, verify
from .embedder import PipelineConfig, PipelineResult, embed_perturbed, hall_condition_check, rainbow_matching
from .graph_core import Embedding, Graph, HostSpec, gnp_sample, is_embedding, make_host
from .harness import compare_models, epsilon_of, janson_report, oracle_contains, sweep
from .targets import TargetSpec, parse_target, realize, suitable_family

__version__ = "0.1.0"

__all__ = [
    "Graph",
    "Embedding",
    "HostSpec",
    "TargetSpec",
    "Decomposition",
    "PipelineConfig",
    "PipelineResult",
    "gnp_sample",
    "make_host",
    "is_embedding",
    "parse_target",
    "realize",
    "suitable_family",
    "decompose",
    "verify",
    "build_reservoirs",
    "switch_one",
    "switch_many",
    "build_auxiliary",
    "resolve_switching",
    "embed_perturbed",
    "rainbow_matching",
    "hall_condition_check",
    "janson_report",
    "epsilon_of",
    "oracle_contains",
    "sweep",
    "compare_models",
]
