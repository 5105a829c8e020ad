"""Array responses, path loss, complex gains and the cascaded channel chain.

A cascade for ``K`` IRSs is stored as ``K + 1`` hops::

    hops[0]      t    BS -> IRS_1        (M x N)
    hops[k]      G_k  IRS_k -> IRS_k+1   (M x M), k = 1 .. K-1
    hops[K]      h_r  IRS_K -> UE        (1 x M)

The UE has a single antenna, so the last hop is a rank-1 channel whose
receive response is the length-1 vector ``[1]``.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

if TYPE_CHECKING:
    from mirs.scenario import Scenario

__all__ = [
    "SPEED_OF_LIGHT",
    "GainMode",
    "PathLossLaw",
    "Rank1Channel",
    "MultipathChannel",
    "CascadeChannel",
    "AngleAssignment",
    "array_response",
    "is_normalized_response",
    "path_loss_db",
    "free_space_loss_db",
    "sample_gain",
    "make_rank1",
    "build_cascade",
    "random_cascade",
]

SPEED_OF_LIGHT = 299_792_458.0

_NORM_TOL = 1e-12


class GainMode(enum.Enum):
    """How the complex path gain of a hop is produced from its path loss.

    RANDOM
        ``g ~ CN(0, 10**(-PL/10))``.
    DETERMINISTIC
        ``g = 10**(-PL/20)``, the amplitude whose power equals the mean
        power of the random mode.
    LITERAL
        ``g = 10**(-PL/10)``, used as an amplitude. Reproduces the
        published closed-form curves, at the cost of counting the loss
        twice once the gain is squared.
    """

    RANDOM = "random"
    DETERMINISTIC = "deterministic"
    LITERAL = "literal"


def array_response(size: int, angle: float) -> np.ndarray:
    """Normalized response of a half-wavelength uniform linear array.

    Entry ``i`` is ``exp(1j * pi * i * sin(angle)) / sqrt(size)``.

    Parameters
    ----------
    size : int
        Number of array elements (>= 1).
    angle : float
        Angle of arrival or departure in radians.

    Returns
    -------
    np.ndarray
        Complex vector of shape ``(size,)`` with unit Euclidean norm.
    """
    size = int(size)
    if size < 1:
        raise ValueError(f"array size must be >= 1, got {size}")
    idx = np.arange(size)
    return np.exp(1j * np.pi * idx * np.sin(angle)) / np.sqrt(size)


def is_normalized_response(vec: np.ndarray, tol: float = _NORM_TOL) -> bool:
    """True when every entry of `vec` has modulus ``1/sqrt(len(vec))``."""
    vec = np.asarray(vec)
    if vec.ndim != 1 or vec.size == 0 or not np.all(np.isfinite(vec)):
        return False
    return bool(np.all(np.abs(np.abs(vec) - 1.0 / np.sqrt(vec.size)) <= tol))


@dataclass(frozen=True)
class PathLossLaw:
    """Log-distance path loss, positive-loss convention (dB)."""

    pl_d0_db: float
    exponent: float = 2.0
    d0_m: float = 1.0

    def __post_init__(self):
        if not math.isfinite(self.pl_d0_db):
            raise ValueError("pl_d0_db must be finite")
        if self.exponent < 0:
            raise ValueError("path-loss exponent must be >= 0")
        if self.d0_m <= 0:
            raise ValueError("reference distance must be > 0")

    @classmethod
    def free_space(cls, freq_hz: float, exponent: float = 2.0,
                   d0_m: float = 1.0) -> "PathLossLaw":
        """Law whose reference loss is the free-space loss at `d0_m`."""
        return cls(free_space_loss_db(freq_hz, d0_m), exponent, d0_m)

    @property
    def g0(self) -> float:
        """Linear reference gain ``10**(-PL_d0/10)``."""
        return 10.0 ** (-self.pl_d0_db / 10.0)


def free_space_loss_db(freq_hz: float, d_m: float = 1.0) -> float:
    """Friis loss ``20 log10(4 pi d / lambda)`` with ``lambda = c / f``."""
    if freq_hz <= 0 or d_m <= 0:
        raise ValueError("frequency and distance must be > 0")
    wavelength = SPEED_OF_LIGHT / freq_hz
    return 20.0 * math.log10(4.0 * math.pi * d_m / wavelength)


def path_loss_db(law: PathLossLaw, d: float) -> float:
    """Total loss in dB at distance `d` meters.

    Distances below the reference distance are clamped to it and a
    ``RuntimeWarning`` is issued.
    """
    if not d > 0:
        raise ValueError(f"distance must be > 0, got {d}")
    if d < law.d0_m:
        warnings.warn(f"distance {d} m below reference {law.d0_m} m; clamped",
                      RuntimeWarning, stacklevel=2)
        d = law.d0_m
    return law.pl_d0_db + 10.0 * law.exponent * math.log10(d / law.d0_m)


def sample_gain(mode: GainMode, pl_db: float,
                rng: np.random.Generator | None = None, size=None):
    """Complex gain of one path for a loss of `pl_db` dB.

    `rng` is required in ``GainMode.RANDOM``. With `size` given, an array
    of independent gains is returned (the deterministic modes broadcast).
    """
    if mode is GainMode.RANDOM:
        if rng is None:
            raise ValueError("random gain mode needs an rng")
        sigma = 10.0 ** (-pl_db / 20.0)
        x = rng.standard_normal(size)
        y = rng.standard_normal(size)
        return sigma / np.sqrt(2.0) * (x + 1j * y)
    if mode is GainMode.DETERMINISTIC:
        g = 10.0 ** (-pl_db / 20.0)
    elif mode is GainMode.LITERAL:
        g = 10.0 ** (-pl_db / 10.0)
    else:
        raise ValueError(f"unknown gain mode {mode!r}")
    if size is None:
        return complex(g)
    return np.full(size, g, dtype=complex)


@dataclass(frozen=True, eq=False)
class Rank1Channel:
    """Channel ``mu * rx @ tx^H`` stored by its factors."""

    mu: complex
    rx: np.ndarray
    tx: np.ndarray

    @property
    def shape(self) -> tuple[int, int]:
        return (self.rx.size, self.tx.size)

    def dense(self) -> np.ndarray:
        return self.mu * np.outer(self.rx, self.tx.conj())

    def apply(self, v: np.ndarray) -> np.ndarray:
        """``dense() @ v`` without forming the matrix."""
        return self.mu * self.rx * (self.tx.conj() @ v)


def make_rank1(mu: complex, rx, tx) -> Rank1Channel:
    """Validate two normalized array responses and wrap them."""
    rx = np.asarray(rx, dtype=complex)
    tx = np.asarray(tx, dtype=complex)
    for name, vec in (("rx", rx), ("tx", tx)):
        if not is_normalized_response(vec):
            raise ValueError(f"{name} is not a normalized array response")
    if not np.isfinite(mu):
        raise ValueError("mu must be finite")
    rx.setflags(write=False)
    tx.setflags(write=False)
    return Rank1Channel(complex(mu), rx, tx)


@dataclass(frozen=True, eq=False)
class MultipathChannel:
    """Sum of ``L`` planar paths, ``sqrt(rx*tx/L) * sum g_l a(aoa_l) a(aod_l)^H``."""

    gains: np.ndarray
    aoa: np.ndarray
    aod: np.ndarray
    rx_size: int
    tx_size: int

    def __post_init__(self):
        if not (self.gains.shape == self.aoa.shape == self.aod.shape):
            raise ValueError("gains, aoa and aod must have equal length")
        if self.gains.size < 1:
            raise ValueError("a multipath channel needs at least one path")

    @property
    def num_paths(self) -> int:
        return self.gains.size

    @property
    def shape(self) -> tuple[int, int]:
        return (self.rx_size, self.tx_size)

    @property
    def scale(self) -> float:
        return math.sqrt(self.rx_size * self.tx_size / self.num_paths)

    def dense(self) -> np.ndarray:
        out = np.zeros(self.shape, dtype=complex)
        for g, th, ph in zip(self.gains, self.aoa, self.aod):
            out += g * np.outer(array_response(self.rx_size, th),
                                array_response(self.tx_size, ph).conj())
        return self.scale * out

    def apply(self, v: np.ndarray) -> np.ndarray:
        return self.dense() @ v

    def as_rank1(self) -> Rank1Channel:
        """Single-path channel as a :class:`Rank1Channel`."""
        if self.num_paths != 1:
            raise ValueError("only single-path channels are rank-1")
        return make_rank1(self.scale * self.gains[0],
                          array_response(self.rx_size, self.aoa[0]),
                          array_response(self.tx_size, self.aod[0]))


Hop = Rank1Channel | MultipathChannel


@dataclass(frozen=True, eq=False)
class CascadeChannel:
    """Ordered hops ``t, G_1 .. G_{K-1}, h_r`` of one realization."""

    hops: tuple

    def __post_init__(self):
        if len(self.hops) < 2:
            raise ValueError("a cascade needs at least t and h_r (K >= 1)")
        for a, b in zip(self.hops[:-1], self.hops[1:]):
            if b.shape[1] != a.shape[0]:
                raise ValueError(f"hop shapes {a.shape} -> {b.shape} do not chain")
        if self.hops[-1].shape[0] != 1:
            raise ValueError("last hop must end at a single-antenna UE")

    @property
    def K(self) -> int:
        return len(self.hops) - 1

    @property
    def M(self) -> int:
        return self.hops[0].shape[0]

    @property
    def N(self) -> int:
        return self.hops[0].shape[1]

    @property
    def t(self) -> Hop:
        return self.hops[0]

    @property
    def G(self) -> tuple:
        return tuple(self.hops[1:-1])

    @property
    def h_r(self) -> Hop:
        return self.hops[-1]

    @property
    def is_rank1(self) -> bool:
        return all(isinstance(h, Rank1Channel) for h in self.hops)

    def mus(self) -> np.ndarray:
        return np.array([h.mu for h in self.hops])

    def dense_hops(self) -> list[np.ndarray]:
        return [h.dense() for h in self.hops]


@dataclass(frozen=True)
class AngleAssignment:
    """Angles in radians, one row per hop.

    ``aoa[k]`` feeds the receive response of hop ``k`` (k = 0 .. K-1; the
    single-antenna UE needs none) and ``aod[k]`` its transmit response
    (k = 0 .. K). Each entry is a scalar for single-path hops or a
    sequence of per-path angles.
    """

    aoa: tuple
    aod: tuple

    def __post_init__(self):
        if len(self.aod) != len(self.aoa) + 1:
            raise ValueError("need K angles of arrival and K+1 angles of departure")

    @property
    def K(self) -> int:
        return len(self.aoa)

    @classmethod
    def uniform(cls, K: int, rng: np.random.Generator,
                num_paths: int = 1) -> "AngleAssignment":
        """Draw every angle uniformly on ``[-pi/2, pi/2]``."""
        shape = (K + 1, 2) if num_paths == 1 else (K + 1, 2, num_paths)
        draw = rng.uniform(-np.pi / 2, np.pi / 2, size=shape)
        aoa = tuple(_as_angle(a) for a in draw[:K, 0])
        aod = tuple(_as_angle(a) for a in draw[:, 1])
        return cls(aoa, aod)


def _as_angle(a):
    return float(a) if np.ndim(a) == 0 else tuple(float(x) for x in a)


def _hop_sizes(K: int, M: int, N: int) -> list[tuple[int, int]]:
    return [(M, N)] + [(M, M)] * (K - 1) + [(1, M)]


def build_cascade(scenario: "Scenario", mode: GainMode | None = None,
                  angles: AngleAssignment | None = None, rng=None, *,
                  d_r: float | None = None, num_paths: int = 1) -> CascadeChannel:
    """Draw one realization of the cascade described by `scenario`.

    Parameters
    ----------
    scenario : Scenario
        Geometry and system parameters.
    mode : GainMode, optional
        Overrides ``scenario.gain_mode``.
    angles : AngleAssignment, optional
        Fixed angles. When omitted the scenario's angles are used, or drawn
        uniformly from `rng` if the scenario has none.
    rng : numpy Generator or int, optional
        Randomness source; an int is used as a seed. Defaults to
        ``scenario.seed``.
    d_r : float, optional
        Distance IRS_K -> UE; defaults to ``scenario.d_r_m``.
    num_paths : int
        Paths per hop. With 1 every hop is a :class:`Rank1Channel`,
        otherwise a :class:`MultipathChannel`.

    Notes
    -----
    Draw order is fixed (angles, then gains hop by hop) so a given seed
    always yields the same chain.
    """
    K, M, N = scenario.K, scenario.M, scenario.N
    if K < 1:
        raise ValueError(f"need at least one IRS, got K={K}")
    if num_paths < 1:
        raise ValueError("num_paths must be >= 1")
    mode = scenario.gain_mode if mode is None else mode
    d_r = scenario.d_r_m if d_r is None else d_r
    if rng is None or isinstance(rng, (int, np.integer)):
        rng = np.random.default_rng(scenario.seed if rng is None else int(rng))

    if angles is None:
        angles = scenario.angles
    if angles is None:
        angles = AngleAssignment.uniform(K, rng, num_paths)
    if angles.K != K:
        raise ValueError(f"angle assignment is for K={angles.K}, scenario has K={K}")

    law = scenario.path_loss_law
    distances = [scenario.d_t_m] + [scenario.d_irs_m] * (K - 1) + [d_r]
    sizes = _hop_sizes(K, M, N)
    ant = scenario.hop_antenna_gains()

    hops = []
    for k, ((rx_size, tx_size), d) in enumerate(zip(sizes, distances)):
        pl = path_loss_db(law, d)
        aoa = angles.aoa[k] if k < K else 0.0
        aod = angles.aod[k]
        if num_paths == 1:
            g = sample_gain(mode, pl, rng)
            mu = math.sqrt(rx_size * tx_size) * g * ant[k]
            hops.append(make_rank1(mu, array_response(rx_size, _scalar(aoa)),
                                   array_response(tx_size, _scalar(aod))))
        else:
            gains = sample_gain(mode, pl, rng, size=num_paths) * ant[k]
            hops.append(MultipathChannel(
                np.asarray(gains, dtype=complex),
                np.broadcast_to(np.asarray(aoa, dtype=float), (num_paths,)).copy(),
                np.broadcast_to(np.asarray(aod, dtype=float), (num_paths,)).copy(),
                rx_size, tx_size))
    return CascadeChannel(tuple(hops))


def _scalar(a) -> float:
    if np.ndim(a) == 0:
        return float(a)
    if len(a) != 1:
        raise ValueError("single-path hop given several angles")
    return float(a[0])


def random_cascade(rng: np.random.Generator, M: int, N: int, K: int,
                   num_paths: int = 1) -> CascadeChannel:
    """Chain with unit-variance CN(0, 1) path gains and uniform angles.

    Path loss is left out, which keeps test instances well scaled.
    """
    angles = AngleAssignment.uniform(K, rng, num_paths)
    hops = []
    for k, (rx_size, tx_size) in enumerate(_hop_sizes(K, M, N)):
        aoa = angles.aoa[k] if k < K else 0.0
        g = sample_gain(GainMode.RANDOM, 0.0, rng, size=num_paths)
        hop = MultipathChannel(g, np.broadcast_to(np.asarray(aoa, float), (num_paths,)).copy(),
                               np.broadcast_to(np.asarray(angles.aod[k], float), (num_paths,)).copy(),
                               rx_size, tx_size)
        hops.append(hop.as_rank1() if num_paths == 1 else hop)
    return CascadeChannel(tuple(hops))
