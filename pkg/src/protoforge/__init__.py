"""Enumerative counterexample-guided completion of protocol sketches."""
from .cegis import (Exhausted, Solved, SynthesisConfig, SynthesisStats, TimedOut, Trace,
                    Unrealizable, extra_check, report_stats, synthesize)
from .checker import CheckReport, Counterexample, TransitionLabel, format_counterexample, verify
from .config import load_config, synthesis_config
from .enumerate import Completion, Grammar, enumerate_cached, enumerate_joint, enumerate_naive
from .normal import normalize
from .prune import ConstraintSet, PruningConstraint, Term, encode, pcc_check
from .sketch import Protocol, Sketch, apply_completion, parse_sketch, serialize_protocol
from .values import InstanceBinding

__all__ = [
    "CheckReport", "Completion", "ConstraintSet", "Counterexample", "Exhausted", "Grammar",
    "InstanceBinding", "Protocol", "PruningConstraint", "Sketch", "Solved", "SynthesisConfig",
    "SynthesisStats", "Term", "TimedOut", "Trace", "TransitionLabel", "Unrealizable",
    "apply_completion", "encode", "enumerate_cached", "enumerate_joint", "enumerate_naive",
    "extra_check", "format_counterexample", "load_config", "normalize", "parse_sketch",
    "pcc_check", "report_stats", "serialize_protocol", "synthesis_config", "synthesize",
    "verify",
]
