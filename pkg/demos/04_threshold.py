"""When does one more IRS help?  The element-count threshold M_min.

Run with ``python3 demos/04_threshold.py``.
"""

import math

from mirs import AnalyticScenario, LinkBudget, Scenario, m_min, snr_gain_add_irs


def ratio_at(base, M):
    b = base.budget
    s = AnalyticScenario(base.d_t, base.d_r, base.d_irs, base.n, base.g0,
                         LinkBudget(b.p_tx, b.noise_power, b.N, M, b.K))
    return snr_gain_add_irs(s)


for n in (2.0, 2.3, 2.6, 3.0):
    base = AnalyticScenario.from_scenario(Scenario(n=n, pl_d0_db=61.4))
    mm = m_min(base)
    lo, hi = math.floor(mm) - 1, math.ceil(mm) + 1
    print(f"n = {n}: M_min = {mm:10.1f}   ratio({lo}) = {ratio_at(base, lo):.6f}"
          f"   ratio({hi}) = {ratio_at(base, hi):.6f}")

# The threshold grows like d_IRS^(n/2): spacing IRSs closer makes cascading cheaper.
for d in (5.0, 10.0, 20.0, 40.0):
    base = AnalyticScenario.from_scenario(Scenario(d_irs_m=d, pl_d0_db=61.4))
    print(f"d_IRS = {d:4.0f} m: M_min = {m_min(base):10.1f}")
