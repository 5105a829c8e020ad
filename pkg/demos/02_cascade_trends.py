"""How SNR moves with the number of IRSs and the elements per IRS.

The simulated closed form is printed next to the analytic expression.
Run with ``python3 demos/02_cascade_trends.py``.
"""

import numpy as np

from mirs import (AnalyticScenario, ClosedForm, GainMode, Scenario, SweepSpec, analytic_snr,
                  run_sweep)

# With power-consistent gains the simulated closed form sits on the analytic
# curve. Each extra hop multiplies the SNR by M^2 g0 / d_IRS^n, far below 1 at M = 1000.
sc = Scenario(M=1000, pl_d0_db=61.4, trials=2, evaluator="operator")
res = run_sweep(sc, SweepSpec("K", (1, 2, 3, 4), (ClosedForm(),)))
print("K   simulated dB   analytic dB")
for row in res.rows:
    a = analytic_snr(AnalyticScenario.from_scenario(sc.replace(K=int(row.value))))
    print(f"{row.value:<3} {row.mean_snr_db:>13.2f}   {10 * np.log10(a):>11.2f}")

# The literal convention squares every gain once more, so the drop per hop is steeper.
lit = sc.replace(gain_mode=GainMode.LITERAL)
res = run_sweep(lit, SweepSpec("K", (1, 2, 3, 4), (ClosedForm(),)))
print("literal convention, SNR dB per K:", np.round(res.column("closed_form"), 2))

# Doubling M multiplies the SNR by 2^(2K): 64 for three IRSs.
sc = Scenario(K=3, trials=2, evaluator="operator")
res = run_sweep(sc, SweepSpec("M", (250, 500, 1000, 2000), (ClosedForm(),)))
snr = res.column("closed_form")
print("\nM      SNR dB")
for m, s in zip(res.values("closed_form"), snr):
    print(f"{int(m):<6} {s:8.2f}")
print("dB step per doubling:", np.round(np.diff(snr), 6), " 10*log10(64) =",
      round(10 * np.log10(64), 6))
