"""Received power, SNR and closed-form link-budget expressions."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from mirs.channel import CascadeChannel
from mirs.optimize import BeamformingSolution, alignment_vectors

__all__ = [
    "LinkBudget",
    "AnalyticScenario",
    "received_power",
    "closed_form_power",
    "snr",
    "snr_db",
    "analytic_snr",
    "snr_gain_add_irs",
    "m_min",
]


@dataclass(frozen=True)
class LinkBudget:
    p_tx: float
    noise_power: float
    N: int
    M: int
    K: int

    def __post_init__(self):
        if not (self.p_tx > 0 and self.noise_power > 0):
            raise ValueError("powers must be > 0")
        if min(self.N, self.M, self.K) < 1:
            raise ValueError("N, M and K must be >= 1")


@dataclass(frozen=True)
class AnalyticScenario:
    """Deterministic geometry for the closed-form SNR.

    ``literal_mode=True`` keeps the squared noise power of the published
    expression; otherwise the SNR is received power over noise power.
    """

    d_t: float
    d_r: float
    d_irs: float
    n: float
    g0: float
    budget: LinkBudget
    literal_mode: bool = False
    d0: float = 1.0

    def __post_init__(self):
        if min(self.d_t, self.d_r, self.d_irs) < self.d0:
            raise ValueError("distances must be >= d0")
        if not self.g0 > 0:
            raise ValueError("g0 must be > 0")

    @classmethod
    def from_scenario(cls, scenario, d_r: float | None = None,
                      literal_mode: bool = False) -> "AnalyticScenario":
        budget = LinkBudget(scenario.p_tx, scenario.noise_power,
                            scenario.N, scenario.M, scenario.K)
        law = scenario.path_loss_law
        return cls(scenario.d_t_m, scenario.d_r_m if d_r is None else d_r,
                   scenario.d_irs_m, scenario.n, law.g0, budget,
                   literal_mode, scenario.d0_m)


def received_power(chain: CascadeChannel, solution: BeamformingSolution,
                   method: str = "dense") -> float:
    """``|h_r^H Theta_K G_{K-1} ... Theta_1 t w|^2`` evaluated hop by hop.

    ``method="dense"`` multiplies the full hop matrices; ``"operator"``
    applies each hop as a linear map without materializing it, which is
    the same product at O(M) cost per rank-1 hop.
    """
    if solution.K != chain.K:
        raise ValueError(f"solution has {solution.K} IRSs, chain has {chain.K}")
    w = np.asarray(solution.w)
    if w.shape != (chain.N,):
        raise ValueError(f"precoder shape {w.shape} != ({chain.N},)")
    for th in solution.thetas:
        if np.shape(th) != (chain.M,):
            raise ValueError(f"phase vector shape {np.shape(th)} != ({chain.M},)")
    if method == "dense":
        ops = [h.dense().__matmul__ for h in chain.hops]
    elif method == "operator":
        ops = [h.apply for h in chain.hops]
    else:
        raise ValueError(f"unknown method {method!r}")
    v = ops[0](w)
    for k in range(1, chain.K + 1):
        v = ops[k](np.exp(1j * solution.thetas[k - 1]) * v)
    return float(abs(v[0]) ** 2)


def closed_form_power(chain: CascadeChannel, P: float) -> float:
    """``P (prod|mu| prod_k sum|u_k|)^2 ||beta_0||^2``, the aligned-chain power."""
    us = alignment_vectors(chain)
    amp = np.prod(np.abs(chain.mus())) * np.prod([np.sum(np.abs(u)) for u in us])
    return float(P * amp**2 * np.linalg.norm(chain.t.tx) ** 2)


def snr(p_rx: float, noise_power: float) -> float:
    if not noise_power > 0:
        raise ValueError("noise power must be > 0")
    return p_rx / noise_power


def snr_db(p_rx: float, noise_power: float) -> float:
    """SNR in dB; zero received power maps to ``-inf``."""
    g = snr(p_rx, noise_power)
    return 10.0 * math.log10(g) if g > 0 else -math.inf


def _distance_loss(s: AnalyticScenario) -> float:
    # prod of (d/d0)^n over all K+1 hops
    K = s.budget.K
    return ((s.d_r / s.d0) ** s.n * (s.d_t / s.d0) ** s.n
            * (s.d_irs / s.d0) ** (s.n * (K - 1)))


def analytic_snr(s: AnalyticScenario) -> float:
    """Closed-form SNR ``M^{2K} N P g0^{K+1} / (d_r^n d_t^n d_IRS^{n(K-1)} N0^q)``.

    ``q = 2`` in literal mode, ``q = 1`` otherwise. Unit antenna gains.
    """
    b = s.budget
    num = float(b.M) ** (2 * b.K) * b.N * b.p_tx * s.g0 ** (b.K + 1)
    noise = b.noise_power**2 if s.literal_mode else b.noise_power
    return num / (_distance_loss(s) * noise)


def snr_gain_add_irs(s: AnalyticScenario) -> float:
    """SNR ratio after appending one more IRS: ``M^2 g0 / (d_IRS/d0)^n``."""
    return float(s.budget.M) ** 2 * s.g0 / (s.d_irs / s.d0) ** s.n


def m_min(s: AnalyticScenario) -> float:
    """Element count at which adding an IRS leaves the SNR unchanged."""
    return math.sqrt((s.d_irs / s.d0) ** s.n / s.g0)
