"""Joint closed form against the baselines along the UE distance.

Run with ``python3 demos/03_baselines.py``.
"""

from mirs import (AlternatingOpt, ClosedForm, GainMode, GreedyQuantized, RandomPhase, Scenario,
                  SweepSpec, run_sweep)

sc = Scenario(K=3, M=32, N=16, gain_mode=GainMode.RANDOM, trials=200, d_r_points=6)
solvers = (ClosedForm(), AlternatingOpt(), GreedyQuantized(1), GreedyQuantized(2), RandomPhase())
res = run_sweep(sc, SweepSpec("d_r", tuple(sc.d_r_values()), solvers))

names = [s.name for s in solvers]
print("d_r [m] " + "".join(f"{n:>14}" for n in names))
for d in res.values("closed_form"):
    cells = [r.mean_snr_db for n in names for r in res.rows if r.solver == n and r.value == d]
    print(f"{d:7.1f} " + "".join(f"{c:14.2f}" for c in cells))

# Alternating optimization lands on the closed form for these rank-1 chains,
# quantization costs a little and random phases cost roughly 10*log10(M) per IRS.
