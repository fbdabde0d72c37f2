"""
Checking the procedures against brute force
===========================================

Each decision procedure has a small, slow oracle next to it. Here they
are compared on a few thousand inputs.
"""

import random

from tthammer import atp, oracle
from tthammer import reconstruct as rec
from tthammer.fol import Atom, Implies

# %%
# Intuitionistic provability against the IPC decision oracle.
budget = rec.Budget(depth=None, seconds=1e9)
agree = total = 0
for phi in oracle.enumerate_formulas(2, 3):
    total += 1
    found = isinstance(rec.prove_seq(rec.Sequent(frozenset(), phi), budget), rec.ProofTrace)
    agree += found == oracle.ipc_decide(phi)
print(f"IPC: {agree}/{total} agree")

A, B = Atom("A"), Atom("B")
peirce = Implies(Implies(Implies(A, B), A), A)
print("Peirce classically valid:", oracle.classically_valid(peirce),
      "intuitionistically provable:", oracle.ipc_decide(peirce))

# %%
# Congruence closure against ground completion.
rng = random.Random(0)
agree = 0
for _ in range(300):
    eqs, (l, r) = oracle.random_ground_instance(rng)
    agree += rec.congruence_close(eqs, (l, r)) == oracle.ground_congruent(eqs, l, r)
print(f"congruence: {agree}/300 agree")

# %%
# Clausification against finite models of size 1 and 2.
agree = total = 0
for f in oracle.enumerate_closed_formulas(max_connectives=1, max_quantifiers=1):
    clauses = [atp.clause_formula(c) for c in atp.clausify_formula(f)]
    for size in (1, 2):
        total += 1
        agree += oracle.satisfiable([f], size) == oracle.satisfiable(clauses, size)
print(f"clausification: {agree}/{total} agree")
