"""Cascaded multi-IRS mmWave link simulator and beamforming solvers."""

from mirs.channel import (AngleAssignment, CascadeChannel, GainMode, MultipathChannel,
                          PathLossLaw, Rank1Channel, array_response, build_cascade,
                          make_rank1, path_loss_db, random_cascade, sample_gain)
from mirs.metrics import (AnalyticScenario, LinkBudget, analytic_snr, closed_form_power,
                          m_min, received_power, snr, snr_db, snr_gain_add_irs)
from mirs.optimize import (AlternatingOpt, BeamformingSolution, BruteForce, ClosedForm,
                           GreedyQuantized, RandomPhase, alignment_vectors, brute_force,
                           mrt_precoder, parse_solver, phase_align, solve_alternating,
                           solve_closed_form, solve_greedy_quantized, solve_random_phase)
from mirs.scenario import Scenario, dbm_to_watt, watt_to_dbm
from mirs.sim import SweepResult, SweepSpec, derive_seed, run_sweep, run_trial

__version__ = "0.1.0"
