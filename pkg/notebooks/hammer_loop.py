"""
The hammer loop on one goal
===========================

Translate a goal, prove it with the builtin prover, turn the used
axioms into hints and rebuild an intuitionistic proof from them.
"""

from tthammer import atp, corpus, translate
from tthammer import reconstruct as rec

env = corpus.load_bundled()
name = "le_n_Sn"

problem = translate.build_problem(env, name)
result = atp.prove_builtin(problem, timeout=30)
print(result.status.value, "in", round(result.wall_time, 2), "s")
print("used:", sorted(result.used_axioms))

# %%
# Only lemmas and definitions survive as hints; typing axioms are
# implied by the encoding itself.
hints = rec.hints_from_used(problem, result.used_axioms, env)
print(hints)

# %%
# Reconstruction with and without the hints (two seconds each).
for h in (hints, rec.Hints()):
    out = rec.reconstruct(env, name, h, rec.Budget(depth=8, seconds=2))
    if isinstance(out, rec.ProofTrace):
        print("proof of depth", out.depth, "with", out.root.size(), "steps")
    else:
        print("Fail:", out.reason)

# %%
# The trace is plain JSON and replays through the independent checker.
trace = rec.reconstruct(env, name, hints, rec.Budget(depth=8, seconds=10))
text = rec.trace_to_text(trace)
print(len(text), "characters of JSON,", "replays:", rec.check_trace(rec.trace_from_text(text)))
