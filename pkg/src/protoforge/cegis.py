"""Counterexample-guided synthesis loop.

The learner draws candidate completions from :func:`enumerate_joint` in
nondecreasing combined size and discards any that violate a known pruning
constraint.  Survivors are model checked; each counterexample becomes a new
constraint.  A candidate that passes the primary instance is re-checked on
every extra instance before it is accepted.
"""
from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field

from . import expr as E
from .checker import DEFAULT_STATE_CAP, Counterexample, verify
from .enumerate import Grammar, enumerate_joint
from .errors import StateSpaceLimitExceeded, ValidationError
from .prune import ConstraintSet, encode, violates
from .sketch import Sketch, apply_completion

log = logging.getLogger(__name__)


@dataclass
class SynthesisConfig:
    instance: object
    grammars: dict                      # hole name -> Grammar
    extra_instances: tuple = ()
    reduce: bool = True
    shortcircuit: bool = True
    strategy: str = "cached"
    timeout: float = 3600.0
    state_cap: int = DEFAULT_STATE_CAP
    max_combined_size: int | None = None
    int_bounds: tuple | None = None
    strict_no_repeat: bool = False      # raise on a repeated counterexample


@dataclass
class SynthesisStats:
    generated: int = 0
    pruned: int = 0
    model_checked: int = 0
    k_prime: int | None = None
    total_time: float = 0.0
    check_time: float = 0.0
    constraints: int = 0
    extra_check_failures: int = 0
    repeated: int = 0                   # counterexamples the verifier returned twice
    solved: bool = False


@dataclass
class Solved:
    completion: dict
    protocol: Sketch
    stats: SynthesisStats
    kind = "solved"


@dataclass
class Exhausted:
    stats: SynthesisStats
    kind = "exhausted"


@dataclass
class TimedOut:
    stats: SynthesisStats
    kind = "timeout"


@dataclass
class Unrealizable:
    run: Counterexample
    stats: SynthesisStats
    kind = "unrealizable"


@dataclass
class Trace:
    """What happened during a run; kept for audits and tests."""
    counterexamples: list = field(default_factory=list)   # (instance index, Counterexample)
    constraints: ConstraintSet = field(default_factory=ConstraintSet)
    checked: list = field(default_factory=list)            # completions sent to the verifier
    repeats: list = field(default_factory=list)            # (completion, instance index, Counterexample)


class RepeatedCounterexample(AssertionError):
    pass


def validate_config(sk: Sketch, cfg: SynthesisConfig) -> None:
    for h in sk.holes:
        g = cfg.grammars.get(h.name)
        if g is None:
            raise ValidationError(f"hole {h.name} has no grammar")
        if not isinstance(g, Grammar):
            raise ValidationError(f"grammar for {h.name} is not a Grammar")
        if g.start_type != h.output_type:
            raise ValidationError(f"grammar {g.name} produces {g.start_type}, hole {h.name} needs {h.output_type}")
        allowed = set(h.arg_names)
        for prods in g.productions.values():
            for t in prods:
                extra = E.free_names(t) - allowed
                if extra:
                    raise ValidationError(
                        f"grammar {g.name} uses {sorted(extra)}, which are not arguments of {h.name}")
    unknown = set(cfg.grammars) - {h.name for h in sk.holes}
    if unknown:
        raise ValidationError(f"grammars given for unknown holes {sorted(unknown)}")


def extra_check(p: Sketch, cfg: SynthesisConfig):
    """None when ``p`` passes every extra instance, else (report, index)."""
    for i, inst in enumerate(cfg.extra_instances):
        rep = verify(p, inst, state_cap=cfg.state_cap, int_bounds=cfg.int_bounds)
        if not rep.passed:
            return rep, i
    return None


def synthesize(sk: Sketch, cfg: SynthesisConfig, trace: Trace | None = None):
    validate_config(sk, cfg)
    t0 = time.perf_counter()
    stats = SynthesisStats()
    trace = trace if trace is not None else Trace()
    cs = trace.constraints
    fingerprints = set()

    def done(result):
        stats.total_time = time.perf_counter() - t0
        stats.constraints = len(cs)
        return result

    stream = enumerate_joint(sk.holes, cfg.grammars, cfg.reduce, cfg.shortcircuit,
                             cfg.max_combined_size, cfg.strategy)
    for x in stream:
        if time.perf_counter() - t0 > cfg.timeout:
            return done(TimedOut(stats))
        stats.generated += 1
        stats.k_prime = x.size
        if cs.check(x) is not None:
            stats.pruned += 1
            continue
        p = apply_completion(sk, x, check=False)
        stats.model_checked += 1
        trace.checked.append(x)
        c0 = time.perf_counter()
        try:
            rep = verify(p, cfg.instance, state_cap=cfg.state_cap, int_bounds=cfg.int_bounds)
            inst_idx, inst = -1, cfg.instance
            if rep.passed:
                ext = extra_check(p, cfg)
                if ext is None:
                    stats.check_time += time.perf_counter() - c0
                    stats.solved = True
                    log.info("solved at size %d: %r", x.size, x)
                    return done(Solved(x, p, stats))
                rep, inst_idx = ext
                inst = cfg.extra_instances[inst_idx]
                stats.extra_check_failures += 1
        except StateSpaceLimitExceeded as exc:
            raise StateSpaceLimitExceeded(str(exc), candidate=x) from None
        stats.check_time += time.perf_counter() - c0
        cex = rep.counterexample
        fp = (inst_idx, cex.fingerprint)
        if fp in fingerprints:
            # Possible only for non-optimal (deadlock/liveness/stuttering)
            # constraints: x avoids the earlier constraint yet shows the same run.
            if cfg.strict_no_repeat:
                raise RepeatedCounterexample(f"verifier repeated a counterexample for {x!r}")
            stats.repeated += 1
            trace.repeats.append((x, inst_idx, cex))
            log.warning("verifier repeated a %s counterexample for %r", cex.kind, x)
        fingerprints.add(fp)
        trace.counterexamples.append((inst_idx, cex))
        c = encode(cex, sk, x, inst)
        c.origin = f"{cex.kind}#{len(cs)}"
        if c.is_empty:
            return done(Unrealizable(cex, stats))
        if not violates(x, c):
            raise AssertionError(f"constraint from {cex.kind} counterexample does not prune {x!r}")
        cs.add(c)
        log.debug("candidate %r failed (%s); %d constraints", x, cex.kind, len(cs))
    return done(Exhausted(stats))


def report_stats(stats: SynthesisStats, kind: str | None = None) -> str:
    """key=value lines followed by a small table."""
    if stats.k_prime is None:
        k = "≥0"
    elif stats.solved:
        k = str(stats.k_prime)
    else:
        k = f"≥{stats.k_prime}"
    rows = []
    if kind is not None:
        rows.append(("result", kind))
    rows += [
        ("generated", str(stats.generated)),
        ("pruned", str(stats.pruned)),
        ("model_checked", str(stats.model_checked)),
        ("k_prime", k),
        ("total_time", f"{stats.total_time:.3f}"),
        ("check_time", f"{stats.check_time:.3f}"),
        ("constraints", str(stats.constraints)),
        ("extra_check_failures", str(stats.extra_check_failures)),
        ("repeated", str(stats.repeated)),
    ]
    lines = [f"{key}={val}" for key, val in rows]
    lines.append("")
    header = ("generated / model checked", "k'", "total / check time (s)")
    cells = (f"{stats.generated} / {stats.model_checked}", k,
             f"{stats.total_time:.2f} / {stats.check_time:.2f}")
    widths = [max(len(a), len(b)) for a, b in zip(header, cells)]
    lines.append(" | ".join(h.ljust(w) for h, w in zip(header, widths)))
    lines.append("-+-".join("-" * w for w in widths))
    lines.append(" | ".join(c.ljust(w) for c, w in zip(cells, widths)))
    return "\n".join(lines) + "\n"
