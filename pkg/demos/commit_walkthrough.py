"""Synthesize the VoteYes update of a small commit protocol, step by step.

Prints every candidate the verifier saw, the counterexample it returned and
the pruning constraint built from it, then the accepted completion.

    python demos/commit_walkthrough.py
"""
from protoforge import Trace, load_config, parse_sketch, report_stats, synthesize, synthesis_config
from protoforge.checker import format_counterexample
from protoforge.corpus import cases
from protoforge.sketch import completion_text

(case,) = cases("commit_post")
sketch = parse_sketch(case.spec_path.read_text())
loaded = load_config(case.config_path, sketch)
print(f"sketch holes: {[h.name + ' (' + h.kind + ')' for h in sketch.holes]}")
print(f"instance: {loaded.instance.describe()}\n")

trace = Trace()
result = synthesize(sketch, synthesis_config(loaded), trace)

for x, (_, cex), c in zip(trace.checked, trace.counterexamples, trace.constraints):
    print(f"candidate {x!r} fails:")
    print("  " + format_counterexample(cex).replace("\n", "\n  "))
    print(f"  constraint: {c}\n")

print(f"result: {result.kind}")
print(completion_text(result.completion))
print(report_stats(result.stats))
