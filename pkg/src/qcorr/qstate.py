"""Density-operator algebra for N-partite finite-dimensional states.

Construction and validation, tensor/partial-trace calculus, spectral matrix
functions, and entropies. All entropies and informations are in bits
(base-2 logarithms throughout).

Numerical conventions:

* validation tolerance on Hermiticity / trace / positivity: 1e-10,
* eigenvalues below 1e-12 are treated as exact zeros wherever a logarithm
  is taken (the 0*log(0) = 0 convention),
* negative eigenvalues in [-1e-10, -1e-13) are clipped to zero with trace
  renormalization; anything in [-1e-13, 0) is eigensolver noise on a
  unit-trace operator and is accepted as zero without rebuilding the matrix.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    BadRank,
    DimensionMismatch,
    EmptyKeep,
    FullKeep,
    IndexOutOfRange,
    NotHermitian,
    NotPositive,
    TraceMismatch,
    ValidationError,
)

VALIDATION_TOL = 1e-10
EIGENVALUE_CLIP = 1e-12
# eigh on unit-scale Hermitian input is only trustworthy to ~1e-13
EIG_NOISE_FLOOR = 1e-13
# support test for the relative-entropy infinity sentinel
SUPPORT_EIGVAL_TOL = 1e-10
SUPPORT_COMPONENT_TOL = 1e-8


def _check_dims(dims) -> tuple[int, ...]:
    dims = tuple(int(d) for d in dims)
    if len(dims) == 0:
        raise DimensionMismatch("dims must name at least one subsystem")
    if any(d < 2 for d in dims):
        raise DimensionMismatch(f"every subsystem dimension must be >= 2, got {dims}")
    return dims


@dataclass(frozen=True)
class DensityMatrix:
    """A density operator on a tensor product of finite-dimensional parties.

    Parties are numbered 1..N in the order of ``dims``. The matrix is stored
    read-only; operations return new instances. Physical validity (Hermitian,
    unit trace, positive semidefinite) is the caller's responsibility for
    direct construction -- use :func:`validate` for untrusted input.
    """

    dims: tuple[int, ...]
    matrix: np.ndarray
    label: str | None = None

    def __post_init__(self):
        dims = _check_dims(self.dims)
        object.__setattr__(self, "dims", dims)
        m = np.array(self.matrix, dtype=complex)
        d = int(np.prod(dims))
        if m.shape != (d, d):
            raise DimensionMismatch(
                f"matrix shape {m.shape} does not match prod(dims) = {d}"
            )
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        """Total Hilbert-space dimension."""
        return self.matrix.shape[0]

    @property
    def n_parties(self) -> int:
        return len(self.dims)

    def purity(self) -> float:
        """Tr(rho^2), equal to the squared Frobenius norm for Hermitian rho."""
        return float(np.vdot(self.matrix, self.matrix).real)


@dataclass(frozen=True)
class PureStateVector:
    """A unit vector on a tensor product of finite-dimensional parties."""

    dims: tuple[int, ...]
    amplitudes: np.ndarray
    label: str | None = None

    def __post_init__(self):
        dims = _check_dims(self.dims)
        object.__setattr__(self, "dims", dims)
        a = np.array(self.amplitudes, dtype=complex).reshape(-1)
        d = int(np.prod(dims))
        if a.shape != (d,):
            raise DimensionMismatch(
                f"amplitude length {a.shape[0]} does not match prod(dims) = {d}"
            )
        norm_defect = abs(float(np.vdot(a, a).real) - 1.0)
        if norm_defect > 1e-12:
            raise ValidationError(
                f"state vector norm differs from 1 by {norm_defect:.3e}"
            )
        a.setflags(write=False)
        object.__setattr__(self, "amplitudes", a)

    @property
    def dim(self) -> int:
        return self.amplitudes.shape[0]

    @property
    def n_parties(self) -> int:
        return len(self.dims)

    def to_density(self, label: str | None = None) -> DensityMatrix:
        """Rank-1 projector |psi><psi| as a DensityMatrix."""
        a = self.amplitudes
        return DensityMatrix(self.dims, np.outer(a, a.conj()), label or self.label)


@dataclass(frozen=True)
class ProbabilityVector:
    """Nonnegative reals summing to one within 1e-12."""

    entries: np.ndarray

    def __post_init__(self):
        p = np.array(self.entries, dtype=float).reshape(-1)
        if p.size == 0:
            raise ValidationError("probability vector is empty")
        if p.min() < -1e-12:
            raise ValidationError(
                f"probability entry {p.min():.3e} is negative beyond tolerance"
            )
        np.maximum(p, 0.0, out=p)
        defect = abs(p.sum() - 1.0)
        if defect > 1e-12:
            raise ValidationError(f"probabilities sum to 1 +/- {defect:.3e}")
        p.setflags(write=False)
        object.__setattr__(self, "entries", p)

    def __len__(self) -> int:
        return self.entries.shape[0]


def _as_matrix(rho) -> np.ndarray:
    return rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=complex)


def _hermitize(m: np.ndarray) -> np.ndarray:
    # exactly Hermitian in floating point, idempotent on Hermitian input
    return (m + m.conj().T) / 2


def validate(matrix, dims, label: str | None = None) -> DensityMatrix:
    """Check and adopt an untrusted matrix as a density operator.

    Parameters
    ----------
    matrix : array_like
        Square complex matrix of size prod(dims).
    dims : sequence of int
        Party dimensions, each >= 2.
    label : str, optional
        Carried through to the returned state.

    Returns
    -------
    DensityMatrix
        The hermitized input; if any eigenvalue fell in [-1e-10, -1e-13)
        the matrix is rebuilt with those eigenvalues clipped to zero and the
        trace renormalized.

    Raises
    ------
    DimensionMismatch, NotHermitian, TraceMismatch, NotPositive
        Naming the violated invariant and the measured magnitude.
    """
    dims = _check_dims(dims)
    m = np.asarray(matrix, dtype=complex)
    d = int(np.prod(dims))
    if m.ndim != 2 or m.shape != (d, d):
        raise DimensionMismatch(
            f"matrix shape {m.shape} does not match prod(dims) = {d}"
        )
    herm_defect = float(np.abs(m - m.conj().T).max())
    if herm_defect > VALIDATION_TOL:
        raise NotHermitian(f"Hermiticity defect {herm_defect:.3e} > {VALIDATION_TOL}")
    h = _hermitize(m)
    trace_defect = abs(float(np.trace(h).real) - 1.0)
    if trace_defect > VALIDATION_TOL:
        raise TraceMismatch(f"trace differs from 1 by {trace_defect:.3e}")
    w = np.linalg.eigvalsh(h)
    w_min = float(w[0])
    if w_min < -VALIDATION_TOL:
        raise NotPositive(f"minimum eigenvalue {w_min:.3e} < -{VALIDATION_TOL}")
    if w_min < -EIG_NOISE_FLOOR:
        # a genuinely negative (but tolerable) eigenvalue: clip and renormalize
        w_full, v = np.linalg.eigh(h)
        np.maximum(w_full, 0.0, out=w_full)
        h = _hermitize((v * w_full) @ v.conj().T)
        h = h / float(np.trace(h).real)
    return DensityMatrix(dims, h, label)


def tensor(a: DensityMatrix, b: DensityMatrix) -> DensityMatrix:
    """Kronecker product state on the concatenated party list."""
    return DensityMatrix(a.dims + b.dims, np.kron(a.matrix, b.matrix))


def _check_keep(keep, n_parties: int) -> tuple[int, ...]:
    keep = tuple(int(k) for k in keep)
    if len(keep) == 0:
        raise EmptyKeep("must keep at least one subsystem")
    for k in keep:
        if k < 1 or k > n_parties:
            raise IndexOutOfRange(f"subsystem index {k} outside 1..{n_parties}")
    if len(set(keep)) != len(keep):
        raise IndexOutOfRange(f"duplicate subsystem index in keep = {keep}")
    if len(keep) == n_parties:
        raise FullKeep("keeping every subsystem; partial trace is the identity")
    return tuple(sorted(keep))


def partial_trace(rho: DensityMatrix, keep) -> DensityMatrix:
    """Trace out all parties not listed in ``keep`` (1-based indices).

    Kept parties stay in their original order.
    """
    keep = _check_keep(keep, rho.n_parties)
    n = rho.n_parties
    dims = rho.dims
    t = rho.matrix.reshape(dims + dims)
    traced = [i for i in range(n) if (i + 1) not in keep]
    # trace the highest axis pair first so earlier indices stay valid
    offset = n
    for i in reversed(traced):
        t = np.trace(t, axis1=i, axis2=i + offset)
        offset -= 1
    new_dims = tuple(dims[k - 1] for k in keep)
    d = int(np.prod(new_dims))
    return DensityMatrix(new_dims, t.reshape(d, d))


def _eigh_psd(m: np.ndarray, what: str) -> tuple[np.ndarray, np.ndarray]:
    w, v = np.linalg.eigh(m)
    if float(w[0]) < -VALIDATION_TOL:
        raise NotPositive(f"{what}: minimum eigenvalue {float(w[0]):.3e}")
    np.maximum(w, 0.0, out=w)
    return w, v


def matrix_sqrt(rho) -> np.ndarray:
    """Spectral square root of a positive-semidefinite Hermitian matrix."""
    w, v = _eigh_psd(_as_matrix(rho), "matrix_sqrt")
    return _hermitize((v * np.sqrt(w)) @ v.conj().T)


def matrix_log2(rho) -> np.ndarray:
    """Spectral base-2 logarithm on the support.

    Eigendirections with eigenvalue <= 1e-12 contribute zero; support
    bookkeeping (the 0*log0 convention and the infinity sentinel) is the
    caller's contract.
    """
    m = _as_matrix(rho)
    w, v = np.linalg.eigh(m)
    logw = np.zeros_like(w)
    on_support = w > EIGENVALUE_CLIP
    logw[on_support] = np.log2(w[on_support])
    return _hermitize((v * logw) @ v.conj().T)


def _entropy_from_eigs(w: np.ndarray) -> float:
    w = w[w > EIGENVALUE_CLIP]
    if w.size == 0:
        return 0.0
    return float(-(w * np.log2(w)).sum())


def _shannon_bits(p: np.ndarray) -> float:
    p = p[p > EIGENVALUE_CLIP]
    if p.size == 0:
        return 0.0
    return float(-(p * np.log2(p)).sum())


def von_neumann_entropy(rho) -> float:
    """S(rho) = -Tr(rho log2 rho) in bits; 0 for pure states."""
    w = np.linalg.eigvalsh(_as_matrix(rho))
    return max(0.0, _entropy_from_eigs(w))


def shannon_entropy(p) -> float:
    """Shannon entropy in bits of a probability vector."""
    entries = p.entries if isinstance(p, ProbabilityVector) else np.asarray(p, dtype=float)
    return max(0.0, _shannon_bits(entries))


def relative_entropy(rho, sigma) -> float:
    """Quantum relative entropy S(rho || sigma) in bits.

    Returns ``math.inf`` when the support of rho is not contained in the
    support of sigma: any eigenvector of rho with eigenvalue > 1e-10 whose
    projection onto the null space of sigma exceeds 1e-8 triggers the
    sentinel. Otherwise Tr(rho log2 rho) - Tr(rho log2 sigma), clamped at 0.
    """
    rm = _as_matrix(rho)
    sm = _as_matrix(sigma)
    if rm.shape != sm.shape:
        raise DimensionMismatch(f"operator shapes differ: {rm.shape} vs {sm.shape}")
    w_r, v_r = np.linalg.eigh(rm)
    w_s, v_s = np.linalg.eigh(sm)

    null_s = v_s[:, w_s <= EIGENVALUE_CLIP]
    sig_r = v_r[:, w_r > SUPPORT_EIGVAL_TOL]
    if null_s.shape[1] and sig_r.shape[1]:
        overlap = np.linalg.norm(null_s.conj().T @ sig_r, axis=0)
        if float(overlap.max()) > SUPPORT_COMPONENT_TOL:
            return math.inf

    tr_rho_log_rho = -_entropy_from_eigs(w_r)
    # Tr(rho log2 sigma) = sum_j log2(w_j) <v_j|rho|v_j> over the support
    on = w_s > EIGENVALUE_CLIP
    vs = v_s[:, on]
    q = np.einsum("ij,ij->j", vs.conj(), rm @ vs).real
    tr_rho_log_sigma = float((q * np.log2(w_s[on])).sum())
    return max(0.0, tr_rho_log_rho - tr_rho_log_sigma)


def mutual_information(rho: DensityMatrix, cut) -> float:
    """I(gamma : gamma') = S(rho_gamma) + S(rho_gamma') - S(rho) in bits.

    ``cut`` is a bipartition of the parties (see partitions.Partition).
    """
    s_g = von_neumann_entropy(partial_trace(rho, cut.gamma))
    s_gp = von_neumann_entropy(partial_trace(rho, cut.gamma_prime))
    return s_g + s_gp - von_neumann_entropy(rho)


def random_pure(dims, seed) -> PureStateVector:
    """Haar-random pure state: normalized complex Gaussian vector."""
    dims = _check_dims(dims)
    rng = np.random.default_rng(seed)
    d = int(np.prod(dims))
    z = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    return PureStateVector(dims, z / np.linalg.norm(z))


def random_mixed(dims, rank, seed) -> DensityMatrix:
    """Random mixed state G G^dag / Tr(G G^dag) from a D x rank Ginibre G."""
    dims = _check_dims(dims)
    d = int(np.prod(dims))
    rank = int(rank)
    if rank < 1 or rank > d:
        raise BadRank(f"rank {rank} outside 1..{d}")
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((d, rank)) + 1j * rng.standard_normal((d, rank))
    m = g @ g.conj().T
    return DensityMatrix(dims, _hermitize(m) / float(np.trace(m).real))
