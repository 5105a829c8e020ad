"""Scenario: geometry plus link-budget parameters of a cascaded multi-IRS link."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

import numpy as np

from mirs.channel import AngleAssignment, GainMode, PathLossLaw

__all__ = ["Scenario", "dbm_to_watt", "watt_to_dbm"]


def dbm_to_watt(dbm: float) -> float:
    return 10.0 ** ((dbm - 30.0) / 10.0)


def watt_to_dbm(watt: float) -> float:
    return 10.0 * np.log10(watt) + 30.0


@dataclass(frozen=True)
class Scenario:
    """Simulation scenario. Defaults describe the dense-urban 28 GHz setup.

    ``pl_d0_db=None`` derives the reference loss from the carrier
    frequency (free space at ``d0_m``). ``angles=None`` draws fresh
    angles for each realization. ``antenna_gains`` holds one
    ``(tx, rx)`` amplitude pair per hop, ``K + 1`` in total; ``None``
    means unit gains.
    """

    freq_hz: float = 28e9
    N: int = 128
    M: int = 1000
    K: int = 3
    p_dbm: float = 46.0
    noise_dbm: float = -94.0
    d_t_m: float = 20.0
    d_irs_m: float = 20.0
    d_r_start_m: float = 1.0
    d_r_stop_m: float = 100.0
    d_r_points: int = 100
    d_r_m: float = 50.0
    n: float = 2.0
    pl_d0_db: float | None = None
    d0_m: float = 1.0
    gain_mode: GainMode = GainMode.DETERMINISTIC
    antenna_gains: tuple | None = None
    angles: AngleAssignment | None = None
    trials: int = 10_000
    seed: int = 0
    reducer: str = "linear"
    evaluator: str = "dense"
    workers: int = field(default=1, compare=False)

    def __post_init__(self):
        if self.N < 1 or self.M < 1 or self.K < 1:
            raise ValueError("N, M and K must be >= 1")
        if self.d0_m <= 0:
            raise ValueError("d0_m must be > 0")
        if self.d_r_start_m < self.d0_m:
            raise ValueError("d_r range must start at or beyond d0")
        if self.d_r_stop_m < self.d_r_start_m:
            raise ValueError("d_r range stop must be >= start")
        if self.d_r_points < 1:
            raise ValueError("d_r_points must be >= 1")
        if min(self.d_t_m, self.d_irs_m, self.d_r_m) <= 0:
            raise ValueError("distances must be > 0")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.reducer not in ("linear", "db"):
            raise ValueError("reducer must be 'linear' or 'db'")
        if self.evaluator not in ("dense", "operator"):
            raise ValueError("evaluator must be 'dense' or 'operator'")
        if self.antenna_gains is not None and len(self.antenna_gains) != self.K + 1:
            raise ValueError(f"antenna_gains needs K+1={self.K + 1} (tx, rx) pairs")
        if self.angles is not None and self.angles.K != self.K:
            raise ValueError("angle assignment does not match K")

    def replace(self, **changes) -> "Scenario":
        return dataclasses.replace(self, **changes)

    @property
    def path_loss_law(self) -> PathLossLaw:
        if self.pl_d0_db is None:
            return PathLossLaw.free_space(self.freq_hz, self.n, self.d0_m)
        return PathLossLaw(self.pl_d0_db, self.n, self.d0_m)

    @property
    def p_tx(self) -> float:
        return dbm_to_watt(self.p_dbm)

    @property
    def noise_power(self) -> float:
        return dbm_to_watt(self.noise_dbm)

    def hop_antenna_gains(self) -> list[float]:
        """Amplitude product ``Lambda_t * Lambda_r`` of each hop."""
        if self.antenna_gains is None:
            return [1.0] * (self.K + 1)
        return [float(tx) * float(rx) for tx, rx in self.antenna_gains]

    def d_r_values(self) -> np.ndarray:
        return np.linspace(self.d_r_start_m, self.d_r_stop_m, self.d_r_points)
