"""Position-space time evolution of coined walks on Z^d.

Storage
-------
With +-1 displacements every coordinate of a site reached after t steps
has the parity of t, so the occupied sites form the sublattice

    m = -t + 2 j,   j in {0, ..., t}^d.

A :class:`WalkState` stores exactly that sublattice as a dense array of
shape ``(c, t+1, ..., t+1)`` (component axis first).  A step applies the
coin to every site and writes component i into the new ``(t+2)^d`` array
shifted by ``(e_i + 1) / 2`` along each axis.  Sites outside the light cone
and off the parity sublattice are never stored and are exact zeros.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from functools import reduce

import numpy as np
from numpy.typing import NDArray

from .coins import CoinOperator, CoinState

__all__ = [
    "DEFAULT_MEM_CAP",
    "MemoryCapExceeded",
    "WalkState",
    "ReturnSeries",
    "ProductWalk",
    "memory_cap",
    "direct_memory_estimate",
    "init_state",
    "step",
    "return_probability",
    "position_distribution",
    "probability_box",
    "total_norm",
    "evolve_collect",
    "evolve_product",
    "evolve_auto",
]

DEFAULT_MEM_CAP = 8 * 2**30
MAX_DIRECT_DIM = 3


class MemoryCapExceeded(MemoryError):
    pass


def memory_cap() -> int:
    """Byte cap for the direct engine (``QWRECUR_MEM_CAP_BYTES`` overrides)."""
    env = os.environ.get("QWRECUR_MEM_CAP_BYTES")
    return int(env) if env else DEFAULT_MEM_CAP


def direct_memory_estimate(c: int, d: int, t_max: int) -> int:
    # current state, coined copy and the next state live at once
    return 3 * 16 * c * (t_max + 2) ** d


@dataclass(frozen=True, eq=False)
class WalkState:
    """Amplitude field psi(m, t) on the parity sublattice of the light cone."""

    t: int
    amplitudes: NDArray[np.complex128]

    @property
    def c(self) -> int:
        return self.amplitudes.shape[0]

    @property
    def d(self) -> int:
        return self.amplitudes.ndim - 1

    def index_of(self, m) -> tuple[int, ...] | None:
        """Sublattice index of site m, or None if m carries no amplitude."""
        m = np.asarray(m, dtype=int).reshape(self.d)
        shifted = m + self.t
        if np.any(shifted % 2) or np.any(np.abs(m) > self.t):
            return None
        return tuple(int(x) for x in shifted // 2)

    def amplitude_at(self, m) -> NDArray[np.complex128]:
        idx = self.index_of(m)
        if idx is None:
            return np.zeros(self.c, dtype=complex)
        return self.amplitudes[(slice(None),) + idx].copy()

    def sites(self) -> NDArray[np.int64]:
        """(n, d) array of the stored sites, row-major over the sublattice."""
        axis = -self.t + 2 * np.arange(self.t + 1)
        grids = np.meshgrid(*([axis] * self.d), indexing="ij")
        return np.stack([g.ravel() for g in grids], axis=1)


@dataclass
class ReturnSeries:
    """p0(t) at even physical step counts t = 0, 2, 4, ..."""

    t: NDArray[np.int64]
    p0: NDArray[np.float64]
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.t = np.asarray(self.t, dtype=np.int64)
        self.p0 = np.asarray(self.p0, dtype=np.float64)
        if self.t.shape != self.p0.shape:
            raise ValueError("t and p0 must have equal length")
        if self.t.size and (np.any(self.t % 2) or np.any(np.diff(self.t) <= 0)):
            raise ValueError("t must be strictly increasing even step counts")

    def __len__(self) -> int:
        return self.t.size

    @property
    def terms(self) -> NDArray[np.float64]:
        """p0 at the positive even times (the t = 0 entry dropped)."""
        return self.p0[self.t > 0]

    def window(self, t_lo: int, t_hi: int) -> ReturnSeries:
        m = (self.t >= t_lo) & (self.t <= t_hi)
        return ReturnSeries(self.t[m], self.p0[m], dict(self.metadata))


def init_state(coin: CoinOperator, psi0: CoinState | NDArray) -> WalkState:
    if not isinstance(psi0, CoinState):
        psi0 = CoinState(psi0)
    if psi0.c != coin.c:
        raise ValueError(f"initial state has {psi0.c} components, coin needs {coin.c}")
    if not coin.displacements.is_unit_diagonal():
        raise ValueError("position-space engine requires displacements with entries ±1")
    amps = np.asarray(psi0.amplitudes, dtype=complex).reshape((coin.c,) + (1,) * coin.d)
    return WalkState(0, amps.copy())


def _shift_slices(coin: CoinOperator, t: int) -> list[tuple]:
    offsets = (coin.displacements.array + 1) // 2
    return [(i,) + tuple(slice(o, o + t + 1) for o in off) for i, off in enumerate(offsets)]


def _advance(amps: NDArray, matrix: NDArray, slices: list[tuple]) -> NDArray:
    c = amps.shape[0]
    t = amps.shape[1] - 1
    coined = np.tensordot(matrix, amps, axes=(1, 0))
    new = np.zeros((c,) + (t + 2,) * (amps.ndim - 1), dtype=complex)
    for i, sl in enumerate(slices):
        new[sl] = coined[i]
    return new


def step(state: WalkState, coin: CoinOperator) -> WalkState:
    """One step: coin on every site, then component i moves by e_i."""
    if state.c != coin.c or state.d != coin.d:
        raise ValueError("state and coin dimensions differ")
    new = _advance(state.amplitudes, coin.matrix, _shift_slices(coin, state.t))
    return WalkState(state.t + 1, new)


def _origin_p0(amps: NDArray, t: int) -> float:
    if t % 2:
        return 0.0
    h = t // 2
    v = amps[(slice(None),) + (h,) * (amps.ndim - 1)]
    return float(np.vdot(v, v).real)


def return_probability(state: WalkState) -> float:
    return _origin_p0(state.amplitudes, state.t)


def total_norm(state: WalkState) -> float:
    a = state.amplitudes
    return float(np.vdot(a, a).real)


def position_distribution(state: WalkState) -> dict[tuple[int, ...], float]:
    """Map site -> p(m, t) over the stored sublattice (zeros included)."""
    p = np.sum(np.abs(state.amplitudes) ** 2, axis=0).ravel()
    return {tuple(int(x) for x in m): float(v) for m, v in zip(state.sites(), p)}


def probability_box(state: WalkState) -> NDArray[np.float64]:
    """p(m, t) on the full box [-t, t]^d; index ``m + t`` along each axis."""
    p = np.sum(np.abs(state.amplitudes) ** 2, axis=0)
    box = np.zeros((2 * state.t + 1,) * state.d)
    box[(slice(None, None, 2),) * state.d] = p
    return box


def _state_list(psi0) -> list:
    return [[float(z.real), float(z.imag)] for z in np.asarray(psi0, dtype=complex)]


def evolve_collect(
    coin: CoinOperator,
    psi0: CoinState | NDArray,
    t_max: int,
    snapshot_times=None,
    mem_cap: int | None = None,
) -> tuple[ReturnSeries, dict[int, NDArray[np.float64]]]:
    """Run the direct engine to ``t_max`` and collect p0 at even times.

    Returns the series and a dict of probability boxes (see
    :func:`probability_box`) at the requested snapshot times.  The final
    norm deviation is recorded in ``series.metadata["norm_deviation"]``.
    """
    if t_max < 0:
        raise ValueError("t_max must be non-negative")
    if coin.d > MAX_DIRECT_DIM:
        raise MemoryCapExceeded(
            f"direct engine supports d ≤ {MAX_DIRECT_DIM} (got d={coin.d}); "
            "use the product engine for tensor-product coins"
        )
    cap = memory_cap() if mem_cap is None else mem_cap
    need = direct_memory_estimate(coin.c, coin.d, t_max)
    if need > cap:
        raise MemoryCapExceeded(
            f"direct engine needs ~{need / 2**30:.2f} GiB for t_max={t_max}, "
            f"cap is {cap / 2**30:.2f} GiB; use the product engine "
            "(or raise QWRECUR_MEM_CAP_BYTES)"
        )
    snaps = set(int(s) for s in (snapshot_times or ()))
    state = init_state(coin, psi0)
    amps = state.amplitudes
    matrix = coin.matrix
    times, p0 = [0], [1.0]
    snapshots = {}
    if 0 in snaps:
        snapshots[0] = probability_box(state)
    for t in range(t_max):
        amps = _advance(amps, matrix, _shift_slices(coin, t))
        if (t + 1) % 2 == 0:
            times.append(t + 1)
            p0.append(_origin_p0(amps, t + 1))
        if t + 1 in snaps:
            snapshots[t + 1] = probability_box(WalkState(t + 1, amps))
    norm = float(np.vdot(amps, amps).real)
    meta = {
        "coin": coin.label,
        "state": _state_list(psi0),
        "engine": "direct",
        "t_max": t_max,
        "norm_deviation": abs(norm - 1.0),
    }
    return ReturnSeries(np.array(times), np.array(p0), meta), snapshots


@dataclass(frozen=True)
class ProductWalk:
    """Independent (coin, state) blocks whose joint walk is their product."""

    blocks: tuple[tuple[CoinOperator, CoinState], ...]

    def __post_init__(self):
        blocks = tuple(
            (coin, s if isinstance(s, CoinState) else CoinState(s)) for coin, s in self.blocks
        )
        for coin, s in blocks:
            if coin.c != s.c:
                raise ValueError("block state dimension does not match its coin")
        object.__setattr__(self, "blocks", blocks)

    @property
    def d(self) -> int:
        return sum(coin.d for coin, _ in self.blocks)

    @classmethod
    def from_joint(cls, coin: CoinOperator, psi0: CoinState | NDArray, tol: float = 1e-10):
        """Split a tensor-product coin and a joint state into blocks.

        Raises ValueError when the joint state does not factor across the
        coin's blocks.
        """
        factors = coin.block_factors
        psi = np.asarray(psi0, dtype=complex).ravel()
        if psi.size != coin.c:
            raise ValueError("initial state dimension does not match the coin")
        states = []
        rest = psi
        for f in factors[:-1]:
            u, s, vh = np.linalg.svd(rest.reshape(f.c, -1), full_matrices=False)
            if s.size > 1 and s[1] > tol * max(s[0], 1.0):
                raise ValueError("product engine requires product-form initial state")
            states.append(CoinState(u[:, 0]))
            rest = s[0] * vh[0]
        states.append(CoinState(rest / np.linalg.norm(rest)))
        return cls(tuple(zip(factors, states)))

    def joint_coin(self) -> CoinOperator:
        from .coins import tensor_coin

        return tensor_coin([coin for coin, _ in self.blocks])

    def joint_state(self) -> CoinState:
        return CoinState(reduce(np.kron, (s.amplitudes for _, s in self.blocks)))


def evolve_product(walk: ProductWalk, t_max: int) -> ReturnSeries:
    """p0(t) as the product of the blocks' return probabilities."""
    series = [evolve_collect(coin, s, t_max)[0] for coin, s in walk.blocks]
    p0 = reduce(np.multiply, (s.p0 for s in series))
    meta = {
        "coin": "tensor[" + ",".join(coin.label for coin, _ in walk.blocks) + "]",
        "state": _state_list(walk.joint_state()),
        "engine": "product",
        "t_max": t_max,
        "norm_deviation": max(s.metadata["norm_deviation"] for s in series),
    }
    return ReturnSeries(series[0].t.copy(), p0, meta)


def evolve_auto(coin: CoinOperator, psi0, t_max: int, engine: str = "auto") -> ReturnSeries:
    """Pick the direct or product engine; never approximates silently."""
    if engine == "direct":
        return evolve_collect(coin, psi0, t_max)[0]
    if engine == "product":
        return evolve_product(ProductWalk.from_joint(coin, psi0), t_max)
    if engine != "auto":
        raise ValueError(f"unknown engine {engine!r}")
    fits = direct_memory_estimate(coin.c, coin.d, t_max) <= memory_cap()
    if coin.d <= 2 or (coin.d <= MAX_DIRECT_DIM and fits):
        return evolve_collect(coin, psi0, t_max)[0]
    if len(coin.block_factors) > 1:
        return evolve_product(ProductWalk.from_joint(coin, psi0), t_max)
    raise MemoryCapExceeded(
        f"no exact engine for d={coin.d}, t_max={t_max}: the coin is not "
        "tensor-structured and the direct engine exceeds its limits"
    )
