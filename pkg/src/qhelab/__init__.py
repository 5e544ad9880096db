"""Two-party quantum protocol laboratory.

Modules:
- qsim: dense simulation core (states, gates, measurement, information measures)
- harness: protocol engine (transcripts, symbolic teleportation, audits)
- rebit: rebit encoding, Y-diagonal expansions, the rotation gadget
- rebit_schemes: remote evaluation of Y-diagonal circuits (schemes 1 and 2)
- linpoly: linear-polynomial evaluation protocols (schemes 4, 7, 8, 9, 10)
- qhe_core: interactive Clifford+T evaluation (scheme 5) and traps (scheme 6)
- seclab: privacy analyzer and adversary bench
- cli: batch experiment runner
"""

__version__ = "0.1.0"
