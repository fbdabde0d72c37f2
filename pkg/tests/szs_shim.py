"""Stand-in external prover: the builtin prover behind the TPTP/SZS interface."""

import sys

from tthammer import atp, fol

if __name__ == "__main__":
    p = fol.read_tptp(open(sys.argv[1]).read())
    print(atp.builtin_szs(p, atp.prove_builtin(p, timeout=float(sys.argv[2]) if len(sys.argv) > 2 else 30.0)))
