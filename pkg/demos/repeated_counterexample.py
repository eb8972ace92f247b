"""A counterexample the verifier returns twice.

Stuttering constraints pin what a completion does at the stuck state.  They
cannot also say "or the action is disabled there", so a later candidate that
disables the action instead can reproduce the same stuck run.

    python demos/repeated_counterexample.py
"""
from protoforge import Trace, synthesize, synthesis_config
from protoforge.checker import format_counterexample
from protoforge.corpus import cases

(case,) = cases("consensus_prepost")
sketch, loaded = case.load()
trace = Trace()
result = synthesize(sketch, synthesis_config(loaded), trace)

for x, _, cex in trace.repeats:
    first = next(i for i, (_, c) in enumerate(trace.counterexamples) if c.fingerprint == cex.fingerprint)
    print(f"first shown by {trace.checked[first]!r}")
    print(f"constraint then added: {trace.constraints.constraints[first]}")
    print(f"shown again by {x!r}\n")
    print(format_counterexample(cex))
print(f"\nresult: {result.kind} {result.completion!r}, repeated={result.stats.repeated}")
