"""The bundled benchmark corpus and its runner.

Each case is a ``NAME.pspec`` sketch plus ``NAME.cfg`` configuration in the
``benchmarks`` package directory.  The family of a case is its name without the
last ``_suffix`` (``2pc_prepost`` belongs to ``2pc``).
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .cegis import Trace, report_stats, synthesize
from .checker import verify
from .config import LoadedConfig, load_config, synthesis_config
from .sketch import Sketch, apply_completion, completion_text, parse_sketch, serialize_protocol


def corpus_dir() -> Path:
    return Path(str(resources.files("protoforge") / "benchmarks"))


@dataclass
class BenchmarkCase:
    name: str
    spec_path: Path
    config_path: Path
    expected: str = "solved"

    @property
    def family(self) -> str:
        return self.name.rsplit("_", 1)[0] if "_" in self.name else self.name

    def load(self) -> tuple[Sketch, LoadedConfig]:
        sk = parse_sketch(self.spec_path.read_text())
        return sk, load_config(self.config_path, sk)

    @property
    def ground_truth(self) -> dict:
        return self.load()[1].ground_truth


def cases(filter: str | None = None) -> list:
    """Corpus cases matching ``filter`` (all when None).  An exact case name
    selects that case alone; otherwise family names and prefixes match."""
    d = corpus_dir()
    every = [BenchmarkCase(s.stem, s, s.with_suffix(".cfg")) for s in sorted(d.glob("*.pspec"))]
    if filter is None:
        return every
    exact = [c for c in every if c.name == filter]
    return exact or [c for c in every if filter == c.family or c.name.startswith(filter)]


@dataclass
class CaseResult:
    case: BenchmarkCase
    truth_ok: bool = False
    truth_detail: str = ""
    kind: str = ""
    completion: str = ""
    stats: object = None
    reverified: bool = False
    trace: Trace = field(default_factory=Trace)
    error: str = ""
    seconds: float = 0.0

    @property
    def ok(self) -> bool:
        return (not self.error and self.truth_ok and self.kind == self.case.expected
                and (self.kind != "solved" or self.reverified))


def check_ground_truth(case: BenchmarkCase) -> tuple[bool, str]:
    """Verify the case's ground truth on the primary and every extra instance."""
    sk, lc = case.load()
    p = apply_completion(sk, lc.ground_truth)
    notes = []
    for inst in [lc.instance, *lc.extra_instances]:
        rep = verify(p, inst, int_bounds=lc.int_bounds)
        notes.append(f"{inst.describe()}: {rep.verdict} ({rep.states_explored} states)")
        if not rep.passed:
            return False, "; ".join(notes)
    return True, "; ".join(notes)


def run_case(case: BenchmarkCase, **overrides) -> CaseResult:
    res = CaseResult(case)
    t0 = time.perf_counter()
    try:
        res.truth_ok, res.truth_detail = check_ground_truth(case)
        sk, lc = case.load()
        r = synthesize(sk, synthesis_config(lc, **overrides), res.trace)
        res.kind, res.stats = r.kind, r.stats
        if r.kind == "solved":
            res.completion = ", ".join(completion_text(r.completion).splitlines())
            # round-trip through text, as a file written by the CLI would be
            fresh = parse_sketch(serialize_protocol(r.protocol))
            res.reverified = all(verify(fresh, inst, int_bounds=lc.int_bounds).passed
                                 for inst in [lc.instance, *lc.extra_instances])
    except Exception as exc:    # collected per case; the runner keeps going
        res.error = f"{type(exc).__name__}: {exc}"
    res.seconds = time.perf_counter() - t0
    return res


def format_table(results) -> str:
    header = ("case", "truth", "result", "generated / model checked", "k'",
              "total / check time (s)", "repeats")
    rows = []
    for r in results:
        s = r.stats
        if s is None:
            rows.append((r.case.name, "ok" if r.truth_ok else "FAIL", r.kind or "error",
                         "-", "-", "-", "-"))
            continue
        k = str(s.k_prime) if s.solved else f"≥{s.k_prime or 0}"
        rows.append((r.case.name, "ok" if r.truth_ok else "FAIL", r.kind,
                     f"{s.generated} / {s.model_checked}", k,
                     f"{s.total_time:.2f} / {s.check_time:.2f}", str(s.repeated)))
    widths = [max(len(x) for x in col) for col in zip(header, *rows)]
    lines = [" | ".join(h.ljust(w) for h, w in zip(header, widths)),
             "-+-".join("-" * w for w in widths)]
    lines += [" | ".join(c.ljust(w) for c, w in zip(row, widths)) for row in rows]
    return "\n".join(lines) + "\n"


def run_corpus(filter: str | None = None, out=None, **overrides) -> tuple[list, bool]:
    """Run every matching case; returns (results, all ok).  When ``out`` is a
    writable stream, per-case details and the summary table go there."""
    results = []
    for case in cases(filter):
        r = run_case(case, **overrides)
        results.append(r)
        if out is not None:
            out.write(f"== {case.name}: {r.kind or 'error'}")
            out.write(f" {r.completion}\n" if r.completion else "\n")
            if r.error:
                out.write(f"   error: {r.error}\n")
            if not r.truth_ok:
                out.write(f"   ground truth failed: {r.truth_detail}\n")
            if r.stats is not None:
                out.write("".join("   " + ln + "\n"
                                  for ln in report_stats(r.stats).splitlines()[:9]))
    if out is not None:
        out.write("\n" + format_table(results))
    return results, bool(results) and all(r.ok for r in results)
