"""Bipartitions of the party set {1..N} and subsystem reordering.

A bipartition gamma|gamma' is stored canonically with party 1 in gamma,
which removes the gamma <-> gamma' double counting; an N-party system has
2^(N-1) - 1 canonical bipartitions.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations

import numpy as np

from .errors import DimensionMismatch, IndexOutOfRange, ParseError, TooFewParties
from .qstate import DensityMatrix, _check_dims, partial_trace


@dataclass(frozen=True)
class Partition:
    """A canonical bipartition gamma|gamma' of the parties of ``dims``.

    Construct via :meth:`of` or :func:`parse_partition`; both canonicalize
    so that party 1 lands in gamma.
    """

    gamma: tuple[int, ...]
    gamma_prime: tuple[int, ...]
    dims: tuple[int, ...]

    def __post_init__(self):
        dims = _check_dims(self.dims)
        gamma = tuple(int(i) for i in self.gamma)
        gamma_prime = tuple(int(i) for i in self.gamma_prime)
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "gamma", gamma)
        object.__setattr__(self, "gamma_prime", gamma_prime)
        n = len(dims)
        both = gamma + gamma_prime
        if sorted(both) != list(range(1, n + 1)):
            raise IndexOutOfRange(
                f"{gamma}|{gamma_prime} is not a bipartition of 1..{n}"
            )
        if not gamma or not gamma_prime:
            raise IndexOutOfRange("both sides of a bipartition must be nonempty")
        if gamma != tuple(sorted(gamma)) or gamma_prime != tuple(sorted(gamma_prime)):
            raise IndexOutOfRange("partition sides must be sorted ascending")
        if 1 not in gamma:
            raise IndexOutOfRange("canonical form requires party 1 in gamma")

    @classmethod
    def of(cls, gamma, dims) -> "Partition":
        """Build the canonical bipartition whose one side is ``gamma``."""
        dims = _check_dims(dims)
        n = len(dims)
        if n < 2:
            raise TooFewParties("a bipartition needs at least two parties")
        gamma = tuple(sorted(int(i) for i in gamma))
        if len(set(gamma)) != len(gamma):
            raise IndexOutOfRange(f"duplicate party index in {gamma}")
        for k in gamma:
            if k < 1 or k > n:
                raise IndexOutOfRange(f"party index {k} outside 1..{n}")
        if len(gamma) == 0 or len(gamma) == n:
            raise IndexOutOfRange("gamma must be a nonempty proper subset")
        complement = tuple(i for i in range(1, n + 1) if i not in gamma)
        if 1 not in gamma:
            gamma, complement = complement, gamma
        return cls(gamma, complement, dims)

    @property
    def n_parties(self) -> int:
        return len(self.dims)

    @property
    def dims_gamma(self) -> tuple[int, ...]:
        return tuple(self.dims[i - 1] for i in self.gamma)

    @property
    def dims_gamma_prime(self) -> tuple[int, ...]:
        return tuple(self.dims[i - 1] for i in self.gamma_prime)

    @property
    def d_gamma(self) -> int:
        return int(np.prod(self.dims_gamma))

    @property
    def d_gamma_prime(self) -> int:
        return int(np.prod(self.dims_gamma_prime))

    def __str__(self) -> str:
        return "".join(map(str, self.gamma)) + "|" + "".join(map(str, self.gamma_prime))


@lru_cache(maxsize=None)
def _enumerate_cached(dims: tuple[int, ...]) -> tuple[Partition, ...]:
    n = len(dims)
    rest = range(2, n + 1)
    gammas = []
    for size in range(0, n - 1):
        gammas.extend((1,) + c for c in combinations(rest, size))
    gammas.sort()
    return tuple(Partition.of(g, dims) for g in gammas)


def enumerate_bipartitions(dims) -> tuple[Partition, ...]:
    """All 2^(N-1) - 1 canonical bipartitions, lexicographic in gamma."""
    dims = _check_dims(dims)
    if len(dims) < 2:
        raise TooFewParties("need at least two parties to bipartition")
    return _enumerate_cached(dims)


def parse_partition(text: str, dims) -> Partition:
    """Parse e.g. ``"1|23"`` or ``"13|2"`` against the given party dims.

    Accepts either side order; the result is canonical (party 1 in gamma).
    Rejects duplicates, out-of-range indices, and malformed text.
    """
    dims = _check_dims(dims)
    parts = text.split("|")
    if len(parts) != 2:
        raise ParseError(f"partition text {text!r} must contain exactly one '|'")
    left, right = parts[0].strip(), parts[1].strip()
    if not left or not right:
        raise ParseError(f"partition text {text!r} has an empty side")
    if not (left + right).isdigit():
        raise ParseError(f"partition text {text!r} may contain only digits and '|'")
    indices = [int(c) for c in left + right]
    n = len(dims)
    if sorted(indices) != list(range(1, n + 1)):
        raise ParseError(
            f"partition text {text!r} does not name each party 1..{n} exactly once"
        )
    return Partition.of([int(c) for c in left], dims)


def permute_subsystems(rho: DensityMatrix, order) -> DensityMatrix:
    """Reorder parties so that new party k is old party order[k] (1-based)."""
    order = tuple(int(i) for i in order)
    n = rho.n_parties
    if sorted(order) != list(range(1, n + 1)):
        raise DimensionMismatch(f"order {order} is not a permutation of 1..{n}")
    axes = tuple(i - 1 for i in order)
    t = rho.matrix.reshape(rho.dims + rho.dims)
    t = t.transpose(axes + tuple(a + n for a in axes))
    new_dims = tuple(rho.dims[a] for a in axes)
    return DensityMatrix(new_dims, t.reshape(rho.dim, rho.dim), rho.label)


def permute_to_cut(rho: DensityMatrix, cut: Partition) -> DensityMatrix:
    """Reorder parties so gamma forms the leading contiguous block."""
    if cut.dims != rho.dims:
        raise DimensionMismatch(
            f"cut dims {cut.dims} do not match state dims {rho.dims}"
        )
    return permute_subsystems(rho, cut.gamma + cut.gamma_prime)


def permute_from_cut(rho_cut: DensityMatrix, cut: Partition) -> DensityMatrix:
    """Inverse of :func:`permute_to_cut`: restore the original party order."""
    order = cut.gamma + cut.gamma_prime
    if rho_cut.dims != tuple(cut.dims[i - 1] for i in order):
        raise DimensionMismatch("state dims do not match the cut ordering")
    inverse = tuple(order.index(i) + 1 for i in range(1, len(order) + 1))
    out = permute_subsystems(rho_cut, inverse)
    return DensityMatrix(cut.dims, out.matrix, rho_cut.label)


def coarse_grain(rho: DensityMatrix, cut: Partition) -> DensityMatrix:
    """View a cut as a 2-party state with dims (d_gamma, d_gamma')."""
    permuted = permute_to_cut(rho, cut)
    return DensityMatrix((cut.d_gamma, cut.d_gamma_prime), permuted.matrix, rho.label)


def marginals(rho: DensityMatrix, cut: Partition) -> tuple[DensityMatrix, DensityMatrix]:
    """(rho_gamma, rho_gamma') for a cut of rho."""
    return partial_trace(rho, cut.gamma), partial_trace(rho, cut.gamma_prime)
