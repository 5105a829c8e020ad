"""Joint IRS phase / BS precoder design.

On a rank-1 cascade the end-to-end scalar channel factors as::

    y = (prod_k mu_k) * prod_k (theta_k . u_k) * (beta_0^H w)

with ``u_k = conj(beta_k) * alpha_{k-1}``. Each IRS can therefore be aligned
on its own and the precoder follows by MRT, which is what
:func:`solve_closed_form` does. The remaining solvers are baselines and a
brute-force oracle used to check it.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from mirs.channel import CascadeChannel, Rank1Channel

__all__ = [
    "UnsupportedChannelError",
    "SearchSpaceTooLarge",
    "BeamformingSolution",
    "ClosedForm",
    "RandomPhase",
    "GreedyQuantized",
    "AlternatingOpt",
    "BruteForce",
    "alignment_vectors",
    "phase_align",
    "mrt_precoder",
    "factored_amplitude",
    "effective_channel",
    "solve_closed_form",
    "solve_greedy_quantized",
    "solve_random_phase",
    "solve_alternating",
    "brute_force",
    "solve",
    "parse_solver",
]

BRUTE_FORCE_LIMIT = 10**8


class UnsupportedChannelError(ValueError):
    """Raised when a rank-1-only solver is handed a multipath hop."""


class SearchSpaceTooLarge(ValueError):
    """Raised when an exhaustive search would exceed its guard."""


@dataclass(frozen=True, eq=False)
class BeamformingSolution:
    """Precoder `w` and one phase vector (radians) per IRS.

    `power_history` and `converged` are only filled in by iterative solvers.
    """

    w: np.ndarray
    thetas: tuple
    power_history: tuple = ()
    converged: bool = True

    @property
    def K(self) -> int:
        return len(self.thetas)

    def coefficients(self) -> list[np.ndarray]:
        """Unit-modulus reflection coefficients ``exp(1j*theta_k)``."""
        return [np.exp(1j * th) for th in self.thetas]


def _require_rank1(chain: CascadeChannel):
    if not chain.is_rank1:
        raise UnsupportedChannelError("solver needs single-path (rank-1) hops")


def alignment_vectors(chain: CascadeChannel) -> list[np.ndarray]:
    """Per-IRS vectors ``u_k`` such that IRS k contributes ``sum_i e^{j theta_i} u_i``.

    IRS k receives through ``alpha_{k-1}`` (rx side of hop k-1) and
    re-radiates through ``beta_k`` (tx side of hop k).
    """
    _require_rank1(chain)
    hops = chain.hops
    return [hops[k].tx.conj() * hops[k - 1].rx for k in range(1, chain.K + 1)]


def phase_align(u: np.ndarray) -> np.ndarray:
    """Phases ``-arg(u)``; zero entries get phase 0."""
    u = np.asarray(u, dtype=complex)
    theta = -np.angle(u)
    theta[u == 0] = 0.0
    return theta


def mrt_precoder(beta0: np.ndarray, P: float) -> np.ndarray:
    """Maximum ratio transmission ``sqrt(P) * beta0 / ||beta0||``.

    `beta0` is the channel written as a column, so the scalar seen by the
    receiver is ``beta0^H w``.
    """
    beta0 = np.asarray(beta0, dtype=complex)
    norm = np.linalg.norm(beta0)
    if norm == 0:
        raise ValueError("MRT of a zero channel is undefined")
    if not P > 0:
        raise ValueError("transmit power must be > 0")
    return math.sqrt(P) * beta0 / norm


def factored_amplitude(chain: CascadeChannel, thetas, w) -> complex:
    """End-to-end amplitude from the factored per-IRS product form."""
    us = alignment_vectors(chain)
    out = np.prod(chain.mus())
    for th, u in zip(thetas, us):
        out *= np.exp(1j * np.asarray(th)) @ u
    return complex(out * (chain.t.tx.conj() @ np.asarray(w)))


def effective_channel(chain: CascadeChannel, thetas, hops=None) -> np.ndarray:
    """Row ``h_r^H Theta_K G_{K-1} ... Theta_1 t`` (length N) for fixed phases."""
    hops = chain.dense_hops() if hops is None else hops
    row = hops[-1][0]
    for k in range(chain.K, 0, -1):
        row = (row * np.exp(1j * thetas[k - 1])) @ hops[k - 1]
    return row


def _mrt_on_row(row: np.ndarray, P: float, fallback: np.ndarray) -> np.ndarray:
    if np.linalg.norm(row) == 0:
        return fallback
    return mrt_precoder(row.conj(), P)


def solve_closed_form(chain: CascadeChannel, P: float) -> BeamformingSolution:
    """Align every IRS to its ``u_k`` and precode by MRT on ``beta_0``."""
    thetas = tuple(phase_align(u) for u in alignment_vectors(chain))
    return BeamformingSolution(mrt_precoder(chain.t.tx, P), thetas)


def _quantize(u: np.ndarray, bits: int) -> np.ndarray:
    levels = 2**bits
    grid = 2 * np.pi * np.arange(levels) / levels
    # per element: grid phase maximizing Re(e^{j phi} u_i); argmax keeps the lowest index on ties
    score = np.real(np.exp(1j * grid)[None, :] * u[:, None])
    return grid[np.argmax(score, axis=1)]


def solve_greedy_quantized(chain: CascadeChannel, P: float,
                           bits: int) -> BeamformingSolution:
    """IRS-by-IRS alignment with phases restricted to a ``2**bits`` grid."""
    if bits < 1:
        raise ValueError("bits must be >= 1")
    thetas = tuple(_quantize(u, bits) for u in alignment_vectors(chain))
    return BeamformingSolution(mrt_precoder(chain.t.tx, P), thetas)


def solve_random_phase(chain: CascadeChannel, P: float,
                       seed=None) -> BeamformingSolution:
    """Uniform random phases, MRT on the resulting end-to-end channel."""
    rng = np.random.default_rng(seed)
    thetas = tuple(rng.uniform(0.0, 2 * np.pi, chain.M) for _ in range(chain.K))
    row = effective_channel(chain, thetas)
    fallback = np.zeros(chain.N, dtype=complex)
    return BeamformingSolution(_mrt_on_row(row, P, fallback), thetas)


def _dominant_directions(hop) -> tuple[np.ndarray, np.ndarray]:
    """Dominant left (receive) and right (transmit) singular vectors of a hop."""
    if isinstance(hop, Rank1Channel):
        return hop.rx, hop.tx
    u, _, vh = np.linalg.svd(hop.dense())
    return u[:, 0], vh[0].conj()


def solve_alternating(chain: CascadeChannel, P: float, max_iters: int = 100,
                      tol: float = 1e-10) -> BeamformingSolution:
    """Coordinate ascent over IRS 1..K then the precoder.

    Starts from each IRS aligned between the dominant singular directions
    of its incoming and outgoing hops, with the precoder on the dominant
    transmit direction of ``t``. Each IRS block update is the exact
    maximizer given everything else, and the precoder update is MRT on the
    current end-to-end channel, so the power sequence is nondecreasing.
    Works for multipath hops.
    """
    if max_iters < 1:
        raise ValueError("max_iters must be >= 1")
    hops = chain.dense_hops()
    K = chain.K
    dirs = [_dominant_directions(h) for h in chain.hops]
    thetas = [phase_align(dirs[k][1].conj() * dirs[k - 1][0]) for k in range(1, K + 1)]
    w = math.sqrt(P) * dirs[0][1]

    def amplitude():
        v = hops[0] @ w
        for k in range(1, K + 1):
            v = hops[k] @ (np.exp(1j * thetas[k - 1]) * v)
        return v[0]

    history = [abs(amplitude()) ** 2]
    converged = False
    for _ in range(max_iters):
        for k in range(1, K + 1):
            upstream = hops[0] @ w
            for j in range(1, k):
                upstream = hops[j] @ (np.exp(1j * thetas[j - 1]) * upstream)
            downstream = hops[K][0]
            for j in range(K, k, -1):
                downstream = (downstream * np.exp(1j * thetas[j - 1])) @ hops[j - 1]
            z = downstream * upstream
            if np.any(z != 0):
                thetas[k - 1] = np.where(z != 0, -np.angle(z), thetas[k - 1])
        w = _mrt_on_row(effective_channel(chain, thetas, hops), P, w)
        power = abs(amplitude()) ** 2
        prev = history[-1]
        history.append(power)
        if power > 0 and power - prev <= tol * power:
            converged = True
            break
    return BeamformingSolution(w, tuple(thetas), tuple(history), converged)


def brute_force(chain: CascadeChannel, P: float, levels: int, *,
                use_symmetry: bool = True, limit: int = BRUTE_FORCE_LIMIT,
                chunk: int = 1 << 21):
    """Exhaustive search over per-element phases on a uniform grid.

    Every combination is scored by the exact dense chain with an MRT
    precoder on the resulting end-to-end channel, i.e. ``P * ||h_eff||^2``.

    With `use_symmetry` the first element of every IRS is pinned to phase
    0. Rotating all phases of one IRS by a grid step multiplies the
    end-to-end channel by a unit-modulus scalar, so this drops only
    duplicates of the same power.

    Returns
    -------
    best_power : float
    thetas : tuple of np.ndarray
        Maximizing phases. Ties go to the lexicographically lowest grid
        index over ``(theta_1, ..., theta_K)``.
    """
    if levels < 2:
        raise ValueError("levels must be >= 2")
    K, M = chain.K, chain.M
    free = M - 1 if use_symmetry else M
    per_irs = levels**free
    total = per_irs**K
    if total > limit:
        raise SearchSpaceTooLarge(
            f"{levels}^({free}*{K}) = {total} combinations exceeds {limit}")

    hops = chain.dense_hops()
    grid = np.exp(2j * np.pi * np.arange(levels) / levels)
    codes = np.array(list(itertools.product(range(levels), repeat=free)),
                     dtype=np.int64).reshape(per_irs, free)
    if use_symmetry:
        codes = np.hstack([np.zeros((per_irs, 1), dtype=np.int64), codes])
    patterns = grid[codes]  # (per_irs, M)

    # Rows for IRS K .. 2 in lexicographic order of (q_2, ..., q_K) flattened
    # with q_2 slowest; IRS 1 is handled in the inner block.
    rows = hops[K][0][None, :]
    outer_codes = np.zeros((1, 0), dtype=np.int64)
    for k in range(K, 1, -1):
        rows = (rows[:, None, :] * patterns[None, :, :]).reshape(-1, M) @ hops[k - 1]
        outer_codes = np.hstack([
            np.repeat(outer_codes, per_irs, axis=0),
            np.tile(np.arange(per_irs), outer_codes.shape[0])[:, None],
        ])
    # outer_codes columns are (q_K, ..., q_2); reorder to (q_2, ..., q_K)
    outer_codes = outer_codes[:, ::-1]

    t = hops[0]
    best_power = -np.inf
    best_key = None
    step = max(1, chunk // (per_irs * max(M, chain.N)))
    for start in range(0, rows.shape[0], step):
        block = rows[start:start + step]
        # (b, per_irs, N): row_b * pattern_q @ t
        eff = np.einsum("bm,qm,mn->bqn", block, patterns, t, optimize=True)
        power = P * np.sum(eff.real**2 + eff.imag**2, axis=2)
        local = power.max()
        if local < best_power:
            continue
        b_idx, q_idx = np.nonzero(power == local)
        keys = sorted((int(q),) + tuple(int(c) for c in outer_codes[start + b])
                      for b, q in zip(b_idx, q_idx))
        if local > best_power or keys[0] < best_key:
            best_power, best_key = float(local), keys[0]

    thetas = tuple(2 * np.pi * codes[q] / levels for q in best_key)
    return best_power, thetas


# --- solver kinds ---------------------------------------------------------

@dataclass(frozen=True)
class ClosedForm:
    name: str = field(default="closed_form", init=False)

    def solve(self, chain, P, seed=None):
        return solve_closed_form(chain, P)


@dataclass(frozen=True)
class RandomPhase:
    seed: int | None = None
    name: str = field(default="random_phase", init=False)

    def solve(self, chain, P, seed=None):
        return solve_random_phase(chain, P, self.seed if seed is None else seed)


@dataclass(frozen=True)
class GreedyQuantized:
    bits: int = 2

    def __post_init__(self):
        if self.bits < 1:
            raise ValueError("bits must be >= 1")

    @property
    def name(self) -> str:
        return f"greedy_q{self.bits}"

    def solve(self, chain, P, seed=None):
        return solve_greedy_quantized(chain, P, self.bits)


@dataclass(frozen=True)
class AlternatingOpt:
    max_iters: int = 100
    tol: float = 1e-10
    name: str = field(default="alternating", init=False)

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")

    def solve(self, chain, P, seed=None):
        return solve_alternating(chain, P, self.max_iters, self.tol)


@dataclass(frozen=True)
class BruteForce:
    levels: int = 16

    def __post_init__(self):
        if self.levels < 2:
            raise ValueError("levels must be >= 2")

    @property
    def name(self) -> str:
        return f"brute_force_l{self.levels}"

    def solve(self, chain, P, seed=None):
        _, thetas = brute_force(chain, P, self.levels)
        row = effective_channel(chain, thetas)
        return BeamformingSolution(
            _mrt_on_row(row, P, np.zeros(chain.N, dtype=complex)), thetas)


SolverKind = ClosedForm | RandomPhase | GreedyQuantized | AlternatingOpt | BruteForce


def solve(kind: SolverKind, chain: CascadeChannel, P: float,
          seed=None) -> BeamformingSolution:
    return kind.solve(chain, P, seed)


def parse_solver(name: str) -> SolverKind:
    """Solver from its CLI name.

    Accepted: ``closed_form``, ``random_phase``, ``alternating``,
    ``greedy_q<bits>`` and ``brute_force_l<levels>``.
    """
    name = name.strip()
    if name == "closed_form":
        return ClosedForm()
    if name == "random_phase":
        return RandomPhase()
    if name == "alternating":
        return AlternatingOpt()
    for prefix, cls in (("greedy_q", GreedyQuantized), ("brute_force_l", BruteForce)):
        if name.startswith(prefix) and name[len(prefix):].isdigit():
            return cls(int(name[len(prefix):]))
    raise ValueError(f"unknown solver {name!r}")
