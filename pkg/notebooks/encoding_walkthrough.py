"""
From dependent types to first-order formulas
============================================

Load the bundled corpus, look at a few declarations and print the
first-order axioms each of them turns into.
"""

from tthammer import corpus, fol, translate
from tthammer.encoder import EncoderState

env = corpus.load_bundled()
print(len(env.decls), "declarations in the bundled corpus")

# %%
# A lemma about addition becomes a guarded universal statement.
st = EncoderState(env)
for a in translate.translate_decl(st, env.owner("plus_O_n")):
    print(a.kind, fol.axioms_to_tptp([a]).splitlines()[-1])

# %%
# An inductive type gives typing, injectivity, discrimination and
# inversion axioms.
for a in translate.translate_decl(st, env.owner("nat")):
    print(f"{a.kind:<15}", fol.axioms_to_tptp([a]).splitlines()[-1])

# %%
# A Set-valued definition whose body passes a proof around: the proof
# argument is erased and the lambda is lifted to a fresh constant.
for a in translate.translate_decl(st, env.owner("pred2")):
    print(f"{a.kind:<15}", fol.axioms_to_tptp([a]).splitlines()[-1])

# %%
# The full problem for one conjecture, with default premise selection.
print(fol.to_tptp(translate.build_problem(env, "le_n_Sn")))
