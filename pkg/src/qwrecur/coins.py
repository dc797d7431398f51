"""Coin operators, displacement sets and initial coin states.

Every walk in this package lives on Z^d with displacements whose entries
are all +-1, so the coin space has dimension c = 2**d.  Displacements are
enumerated in binary order, most significant coordinate first and +1
before -1::

    d = 2:  (1, 1), (1, -1), (-1, 1), (-1, -1)

With that ordering the diagonal shift matrix in momentum space factorizes
as D(k1) x ... x D(kd), and Kronecker products of coins line up with the
Cartesian product of displacement sets index-for-index.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import reduce

import numpy as np
from numpy.typing import ArrayLike, NDArray

__all__ = [
    "TOL",
    "DisplacementSet",
    "CoinOperator",
    "CoinState",
    "UnbiasedCheck",
    "unbiased_coin_1d",
    "hadamard",
    "tensor_coin",
    "grover_coin",
    "fourier_coin",
    "grover_family_coin",
    "validate_unbiased",
    "named_state",
    "basis_state",
    "random_state",
    "random_unbiased_coin_1d",
    "tensor_state",
]

TOL = 1e-12


def _readonly(a: NDArray) -> NDArray:
    a = np.array(a, dtype=np.complex128, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class DisplacementSet:
    """Ordered list of the c step vectors e_i in Z^d."""

    d: int
    vectors: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if self.d < 1:
            raise ValueError(f"lattice dimension must be positive, got {self.d}")
        vecs = tuple(tuple(int(x) for x in v) for v in self.vectors)
        if any(len(v) != self.d for v in vecs):
            raise ValueError("every displacement must have d entries")
        object.__setattr__(self, "vectors", vecs)
        if any(s != 0 for s in np.sum(np.array(vecs, dtype=int), axis=0)):
            raise ValueError("displacements must sum to the zero vector")

    @classmethod
    def standard(cls, d: int) -> DisplacementSet:
        return cls(d, tuple(itertools.product((1, -1), repeat=d)))

    @property
    def c(self) -> int:
        return len(self.vectors)

    @property
    def array(self) -> NDArray[np.int64]:
        """(c, d) integer array of displacements."""
        return np.array(self.vectors, dtype=np.int64).reshape(self.c, self.d)

    def is_unit_diagonal(self) -> bool:
        """True when every entry of every displacement is +-1."""
        return bool(np.all(np.abs(self.array) == 1))

    def product(self, other: DisplacementSet) -> DisplacementSet:
        """Displacements of a Kronecker-product coin (self outer index)."""
        vecs = tuple(a + b for a in self.vectors for b in other.vectors)
        return DisplacementSet(self.d + other.d, vecs)


@dataclass(frozen=True, eq=False)
class CoinOperator:
    """A c x c unitary coin together with the displacement it drives.

    ``factors`` holds the block coins when the operator was built as a
    Kronecker product; the product engine in :mod:`qwrecur.evolution`
    uses it to evolve the blocks separately.
    """

    matrix: NDArray[np.complex128]
    displacements: DisplacementSet
    label: str = "custom"
    factors: tuple[CoinOperator, ...] = field(default=(), repr=False)

    def __post_init__(self):
        m = _readonly(self.matrix)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"coin matrix must be square, got shape {m.shape}")
        if m.shape[0] != self.displacements.c:
            raise ValueError(
                f"coin dimension {m.shape[0]} does not match "
                f"{self.displacements.c} displacements"
            )
        dev = _unitarity_deviation(m)
        if dev > TOL:
            raise ValueError(f"coin matrix is not unitary (deviation {dev:.3e})")
        object.__setattr__(self, "matrix", m)

    @property
    def c(self) -> int:
        return self.matrix.shape[0]

    @property
    def d(self) -> int:
        return self.displacements.d

    @property
    def block_factors(self) -> tuple[CoinOperator, ...]:
        """Irreducible blocks: the factors if tensor-built, else (self,)."""
        return self.factors if self.factors else (self,)

    def __repr__(self) -> str:
        return f"CoinOperator(label={self.label!r}, c={self.c}, d={self.d})"


@dataclass(frozen=True, eq=False)
class CoinState:
    """Unit-norm c-component initial coin state."""

    amplitudes: NDArray[np.complex128]

    def __post_init__(self):
        a = _readonly(np.ravel(self.amplitudes))
        norm = np.linalg.norm(a)
        if abs(norm - 1.0) > TOL:
            raise ValueError(f"coin state must have unit norm, got {norm:.15g}")
        object.__setattr__(self, "amplitudes", a)

    @property
    def c(self) -> int:
        return self.amplitudes.shape[0]

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.amplitudes, dtype=dtype)

    def __repr__(self) -> str:
        return f"CoinState({np.array2string(self.amplitudes, precision=4)})"


@dataclass(frozen=True)
class UnbiasedCheck:
    ok: bool
    modulus_deviation: float
    unitarity_deviation: float

    def __bool__(self) -> bool:
        return self.ok


def _unitarity_deviation(m: NDArray) -> float:
    return float(np.max(np.abs(m.conj().T @ m - np.eye(m.shape[0]))))


def unbiased_coin_1d(alpha: float, beta: float) -> CoinOperator:
    """General unbiased two-state coin C(alpha, beta).

    ``(1/sqrt2) [[e^{i alpha}, e^{-i beta}], [e^{i beta}, -e^{-i alpha}]]``;
    alpha = beta = 0 is the Hadamard coin.
    """
    m = np.array(
        [
            [np.exp(1j * alpha), np.exp(-1j * beta)],
            [np.exp(1j * beta), -np.exp(-1j * alpha)],
        ]
    ) / np.sqrt(2.0)
    label = "hadamard" if alpha == 0 and beta == 0 else "unbiased1d"
    return CoinOperator(m, DisplacementSet.standard(1), label)


def hadamard() -> CoinOperator:
    return unbiased_coin_1d(0.0, 0.0)


def tensor_coin(factors: list[CoinOperator]) -> CoinOperator:
    """Kronecker product of coins, in the given order.

    The lattice dimension of the result is the sum of the factor
    dimensions.  Nested tensor coins are flattened into their blocks so
    that association order does not matter.
    """
    if not factors:
        raise ValueError("tensor_coin needs at least one factor")
    if len(factors) == 1:
        return factors[0]
    blocks = tuple(b for f in factors for b in f.block_factors)
    # always multiply out the flat block list left to right: keeps the
    # result bitwise independent of how the caller nested the products
    matrix = reduce(np.kron, (b.matrix for b in blocks))
    disp = reduce(DisplacementSet.product, (b.displacements for b in blocks))
    return CoinOperator(matrix, disp, "tensor", blocks)


def grover_coin() -> CoinOperator:
    """4 x 4 Grover coin: 1/2 off the diagonal, -1/2 on it."""
    m = (np.ones((4, 4)) - 2.0 * np.eye(4)) / 2.0
    return CoinOperator(m, DisplacementSet.standard(2), "grover")


def fourier_coin() -> CoinOperator:
    """4 x 4 discrete Fourier coin, entries i**(jk) / 2."""
    j = np.arange(4)
    m = (1j ** np.outer(j, j)) / 2.0
    return CoinOperator(m, DisplacementSet.standard(2), "fourier")


def grover_family_coin(d: int) -> CoinOperator:
    """Grover coins tensored up to dimension d.

    Even d = 2m gives m copies of the Grover coin; odd d = 2m + 1 appends a
    Hadamard coin for the extra axis.
    """
    if d < 2:
        raise ValueError("grover family requires d ≥ 2")
    blocks = [grover_coin()] * (d // 2)
    if d % 2:
        blocks.append(hadamard())
    coin = tensor_coin(blocks)
    if len(blocks) > 1:
        coin = CoinOperator(coin.matrix, coin.displacements, "grover-family", coin.factors)
    return coin


def validate_unbiased(coin: CoinOperator | ArrayLike) -> UnbiasedCheck:
    """Check that all |C_ij| equal 1/sqrt(c) and that C is unitary.

    Accepts a :class:`CoinOperator` or a bare matrix, so that arbitrary
    user-supplied matrices can be screened before constructing a coin.
    """
    m = coin.matrix if isinstance(coin, CoinOperator) else np.asarray(coin, dtype=complex)
    c = m.shape[0]
    mod_dev = float(np.max(np.abs(np.abs(m) - 1.0 / np.sqrt(c))))
    uni_dev = _unitarity_deviation(m)
    return UnbiasedCheck(mod_dev <= TOL and uni_dev <= TOL, mod_dev, uni_dev)


def named_state(name: str, a: float | None = None, phi: float | None = None) -> CoinState:
    """Initial coin states singled out for the 2-D walks.

    psi_S
        ``(1, i, i, -1) / 2``, the symmetric state.
    psi_G
        ``(1, -1, -1, 1) / 2``, the only state orthogonal to both flat
        bands of the Grover walk.
    psi_F
        ``(a, b, a, -b)`` with ``b = sqrt(1/2 - a^2) e^{i phi}``; the
        family for which the Fourier walk is transient.
    """
    if name == "psi_S":
        return CoinState(np.array([1, 1j, 1j, -1]) / 2)
    if name == "psi_G":
        return CoinState(np.array([1, -1, -1, 1]) / 2)
    if name == "psi_F":
        if a is None or phi is None:
            raise ValueError("psi_F requires parameters a and phi")
        if not 0.0 <= a <= 1.0 / np.sqrt(2.0) + 1e-15:
            raise ValueError("amplitude parameter out of range")
        b = np.sqrt(max(0.5 - a * a, 0.0)) * np.exp(1j * phi)
        return CoinState(np.array([a, b, a, -b]))
    raise ValueError(f"unknown state name {name!r}")


def basis_state(c: int, index: int) -> CoinState:
    """Coin basis vector |e_index> (zero-based)."""
    if not 0 <= index < c:
        raise ValueError(f"basis index {index} out of range for c={c}")
    v = np.zeros(c, dtype=complex)
    v[index] = 1.0
    return CoinState(v)


def random_state(c: int, rng: np.random.Generator) -> CoinState:
    """Haar-random coin state."""
    v = rng.normal(size=c) + 1j * rng.normal(size=c)
    return CoinState(v / np.linalg.norm(v))


def random_unbiased_coin_1d(rng: np.random.Generator) -> CoinOperator:
    alpha, beta = rng.uniform(0, 2 * np.pi, size=2)
    return unbiased_coin_1d(alpha, beta)


def tensor_state(states: list[CoinState]) -> CoinState:
    return CoinState(reduce(np.kron, (np.asarray(s) for s in states)))
