"""A completion that is right for three nodes but wrong for four.

The commit guard ``count = 3`` is enumerated before ``count = N``.  It passes
the three-node instance, fails the four-node extra instance, and the search
moves on to the general answer.

    python demos/extra_check.py
"""
from protoforge import Trace, synthesize, synthesis_config
from protoforge.checker import verify
from protoforge.corpus import cases
from protoforge.sketch import apply_completion

(case,) = cases("counting_extra")
sketch, loaded = case.load()
trace = Trace()
result = synthesize(sketch, synthesis_config(loaded), trace)

for x in trace.checked:
    p = apply_completion(sketch, x)
    verdicts = [verify(p, inst).verdict for inst in [loaded.instance, *loaded.extra_instances]]
    print(f"{x!r:24} 3 nodes: {verdicts[0]:4}  4 nodes: {verdicts[1]}")
print(f"\nextra-check rejections: {result.stats.extra_check_failures}")
print(f"accepted: {result.completion!r}")

blind = synthesize(sketch, synthesis_config(loaded, extra_instances=()))
print(f"without the extra instance the loop would stop at {blind.completion!r}")
