"""Walk through one cascaded chain: build it, solve it, check the oracle.

Run with ``python3 demos/01_single_chain.py``.
"""

import math

import numpy as np

from mirs import (BruteForce, GainMode, Scenario, alignment_vectors, brute_force,
                  build_cascade, random_cascade, received_power, solve_closed_form)

# A small three-IRS chain with unit-variance gains and random angles.
rng = np.random.default_rng(0)
chain = random_cascade(rng, M=3, N=2, K=2)
print("hops:", [h.shape for h in chain.hops])
print("|mu|:", np.round(np.abs(chain.mus()), 4))

# Each IRS only sees one complex vector u_k; its optimal phases undo the
# phase of every entry, so the per-IRS sums become sum |u_k| = 1.
for k, u in enumerate(alignment_vectors(chain), start=1):
    print(f"u_{k} moduli:", np.round(np.abs(u), 4), " sum:", round(np.abs(u).sum(), 12))

P = 1.0
sol = solve_closed_form(chain, P)
p_cf = received_power(chain, sol)
print("closed form power       :", p_cf)
print("P * prod |mu|^2         :", P * np.prod(np.abs(chain.mus()) ** 2))

# Exhaustive search on a 16-level grid can only approach the closed form
# from below, and never by more than cos(pi/16)^(2K).
p_bf, _ = brute_force(chain, P, levels=16)
print("brute force (16 levels) :", p_bf)
print("lower bound             :", p_cf * math.cos(math.pi / 16) ** (2 * chain.K))

# The same machinery on the default 28 GHz geometry, with deterministic gains.
sc = Scenario(K=2, M=64, N=16, gain_mode=GainMode.DETERMINISTIC)
big = build_cascade(sc, d_r=10.0)
p = received_power(big, solve_closed_form(big, sc.p_tx))
print(f"SNR at d_r = 10 m, M = 64, K = 2: {10 * math.log10(p / sc.noise_power):.2f} dB")

# A brute-force solver object fits the same interface as the others.
print("solver name:", BruteForce(levels=8).name)
