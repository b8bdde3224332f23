"""Rank-1 projective measurements, dephasing channels, and conditional
ensembles.

A measurement basis is stored as a unitary matrix whose columns are the
basis vectors. Vector phases are fixed by the gauge "first component larger
than 1e-12 in magnitude is real positive" so reports and optimizer
trajectories are reproducible.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, IoError, ParseError, ValidationError
from .partitions import Partition, permute_from_cut, permute_to_cut
from .qstate import (
    DensityMatrix,
    ProbabilityVector,
    _hermitize,
    partial_trace,
)

ORTHONORMALITY_TOL = 1e-10
# measurement outcomes below this weight are dropped from ensembles
OUTCOME_WEIGHT_FLOOR = 1e-14


def fix_gauge(matrix: np.ndarray) -> np.ndarray:
    """Rotate each column's phase so its first non-tiny entry is real positive."""
    m = np.array(matrix, dtype=complex)
    for j in range(m.shape[1]):
        col = m[:, j]
        nz = np.flatnonzero(np.abs(col) > 1e-12)
        if nz.size:
            pivot = col[nz[0]]
            m[:, j] = col * (pivot.conjugate() / abs(pivot))
    return m


@dataclass(frozen=True)
class ProjectiveBasis:
    """A complete orthonormal basis; columns of ``matrix`` are the vectors."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DimensionMismatch(f"basis matrix must be square, got {m.shape}")
        defect = float(np.abs(m.conj().T @ m - np.eye(m.shape[0])).max())
        if defect > ORTHONORMALITY_TOL:
            raise ValidationError(
                f"orthonormality defect {defect:.3e} > {ORTHONORMALITY_TOL}"
            )
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def vector(self, j: int) -> np.ndarray:
        return self.matrix[:, j]

    @classmethod
    def from_vectors(cls, vectors) -> "ProjectiveBasis":
        """Build from a sequence of basis vectors (rows)."""
        rows = np.asarray(vectors, dtype=complex)
        return cls(rows.T)


def computational_basis(d: int) -> ProjectiveBasis:
    return ProjectiveBasis(np.eye(d, dtype=complex))


def fourier_basis(d: int) -> ProjectiveBasis:
    """Discrete-Fourier basis; for d = 2 this is the |+>, |-> basis."""
    j, k = np.meshgrid(np.arange(d), np.arange(d), indexing="ij")
    m = np.exp(2j * np.pi * j * k / d) / np.sqrt(d)
    return ProjectiveBasis(fix_gauge(m))


def bell_basis() -> ProjectiveBasis:
    """The four maximally entangled two-qubit states (d = 4 only)."""
    s = 1.0 / np.sqrt(2.0)
    m = np.array(
        [
            [s, s, 0, 0],
            [0, 0, s, s],
            [0, 0, s, -s],
            [s, -s, 0, 0],
        ],
        dtype=complex,
    )
    return ProjectiveBasis(m)


def canonical_bases(d: int) -> list[ProjectiveBasis]:
    """Deterministic handful of bases used as optimizer starts."""
    bases = [computational_basis(d), fourier_basis(d)]
    if d == 4:
        bases.append(bell_basis())
    return bases


def eigenbasis(rho: DensityMatrix) -> ProjectiveBasis:
    """Gauge-fixed eigenbasis of a state, eigenvalues ascending."""
    _, v = np.linalg.eigh(rho.matrix)
    return ProjectiveBasis(fix_gauge(v))


def random_basis(d: int, seed) -> ProjectiveBasis:
    """Haar-like random basis from QR of a complex Gaussian matrix."""
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    q, r = np.linalg.qr(z)
    q = q * (np.diag(r) / np.abs(np.diag(r)))  # remove QR sign ambiguity
    return ProjectiveBasis(fix_gauge(q))


def product_basis(bases) -> ProjectiveBasis:
    """Kronecker product of per-site bases."""
    m = bases[0].matrix
    for b in bases[1:]:
        m = np.kron(m, b.matrix)
    return ProjectiveBasis(m)


@dataclass(frozen=True)
class CutMeasurement:
    """A product of complete projective bases on the two blocks of a cut."""

    cut: Partition
    basis_gamma: ProjectiveBasis
    basis_gamma_prime: ProjectiveBasis

    def __post_init__(self):
        if self.basis_gamma.dim != self.cut.d_gamma:
            raise DimensionMismatch(
                f"gamma basis dim {self.basis_gamma.dim} != block dim {self.cut.d_gamma}"
            )
        if self.basis_gamma_prime.dim != self.cut.d_gamma_prime:
            raise DimensionMismatch(
                f"gamma' basis dim {self.basis_gamma_prime.dim} != "
                f"block dim {self.cut.d_gamma_prime}"
            )

    def joint_basis(self) -> ProjectiveBasis:
        """The full-system basis in cut order (gamma block leading)."""
        return ProjectiveBasis(
            np.kron(self.basis_gamma.matrix, self.basis_gamma_prime.matrix)
        )


@dataclass(frozen=True)
class ConditionalEnsemble:
    """Outcome probabilities and conditional post-measurement states."""

    probabilities: ProbabilityVector
    states: tuple[DensityMatrix, ...]

    def __post_init__(self):
        if len(self.probabilities) != len(self.states):
            raise DimensionMismatch("probability/state count mismatch")
        object.__setattr__(self, "states", tuple(self.states))


def dephase(rho: DensityMatrix, basis: ProjectiveBasis) -> DensityMatrix:
    """Full dephasing sum_j |b_j><b_j| rho |b_j><b_j| in the given basis."""
    if basis.dim != rho.dim:
        raise DimensionMismatch(
            f"basis dim {basis.dim} does not match state dim {rho.dim}"
        )
    u = basis.matrix
    p = np.einsum("ij,ij->j", u.conj(), rho.matrix @ u)
    out = _hermitize((u * p.real) @ u.conj().T)
    return DensityMatrix(rho.dims, out, rho.label)


def dephase_block(
    rho: DensityMatrix,
    cut: Partition,
    basis: ProjectiveBasis,
    block: str = "gamma_prime",
) -> DensityMatrix:
    """Dephase one block of a cut, identity on the other block."""
    if block not in ("gamma", "gamma_prime"):
        raise ValueError(f"block must be 'gamma' or 'gamma_prime', got {block!r}")
    d_block = cut.d_gamma if block == "gamma" else cut.d_gamma_prime
    if basis.dim != d_block:
        raise DimensionMismatch(
            f"basis dim {basis.dim} does not match {block} block dim {d_block}"
        )
    rc = permute_to_cut(rho, cut)
    m = rc.matrix.reshape(cut.d_gamma, cut.d_gamma_prime, cut.d_gamma, cut.d_gamma_prime)
    u = basis.matrix
    if block == "gamma":
        # per-outcome conditional blocks on gamma', then reassemble
        cond = np.einsum("ai,abcd,ci->ibd", u.conj(), m, u)
        phi = np.einsum("ai,ibd,ci->abcd", u, cond, u.conj())
    else:
        cond = np.einsum("bj,abcd,dj->jac", u.conj(), m, u)
        phi = np.einsum("bj,jac,dj->abcd", u, cond, u.conj())
    d = rho.dim
    dephased = DensityMatrix(
        cut.dims_gamma + cut.dims_gamma_prime,
        _hermitize(phi.reshape(d, d)),
        rho.label,
    )
    return permute_from_cut(dephased, cut)


def dephase_cut(rho: DensityMatrix, m: CutMeasurement) -> DensityMatrix:
    """Dephase both blocks in the product basis of a cut measurement."""
    if m.cut.dims != rho.dims:
        raise DimensionMismatch("measurement cut does not match state dims")
    rc = permute_to_cut(rho, m.cut)
    u = np.kron(m.basis_gamma.matrix, m.basis_gamma_prime.matrix)
    p = np.einsum("ij,ij->j", u.conj(), rc.matrix @ u)
    out = _hermitize((u * p.real) @ u.conj().T)
    dephased = DensityMatrix(rc.dims, out, rho.label)
    return permute_from_cut(dephased, m.cut)


def conditional_ensemble(
    rho: DensityMatrix,
    cut: Partition,
    basis: ProjectiveBasis,
    measured_block: str = "gamma_prime",
) -> ConditionalEnsemble:
    """Measure one block with a complete rank-1 basis; condition the other.

    Outcomes with probability <= 1e-14 are omitted. The returned mixture
    satisfies sum_j p_j rho_j = partial_trace(dephase_block(rho, ...), kept).
    """
    if measured_block not in ("gamma", "gamma_prime"):
        raise ValueError(
            f"measured_block must be 'gamma' or 'gamma_prime', got {measured_block!r}"
        )
    rc = permute_to_cut(rho, cut)
    dg, dgp = cut.d_gamma, cut.d_gamma_prime
    m = rc.matrix.reshape(dg, dgp, dg, dgp)
    u = basis.matrix
    if measured_block == "gamma_prime":
        if basis.dim != dgp:
            raise DimensionMismatch(
                f"basis dim {basis.dim} does not match gamma' block dim {dgp}"
            )
        cond = np.einsum("bj,abcd,dj->jac", u.conj(), m, u)
        kept_dims = cut.dims_gamma
    else:
        if basis.dim != dg:
            raise DimensionMismatch(
                f"basis dim {basis.dim} does not match gamma block dim {dg}"
            )
        cond = np.einsum("aj,abcd,cj->jbd", u.conj(), m, u)
        kept_dims = cut.dims_gamma_prime
    probs = np.einsum("jaa->j", cond).real
    keep = probs > OUTCOME_WEIGHT_FLOOR
    probs_kept = probs[keep]
    probs_kept = probs_kept / probs_kept.sum()
    states = tuple(
        DensityMatrix(kept_dims, _hermitize(cond[j] / probs[j]))
        for j in np.flatnonzero(keep)
    )
    return ConditionalEnsemble(ProbabilityVector(probs_kept), states)


def save_basis(basis: ProjectiveBasis, path) -> None:
    """Write a basis file: {"dim": d, "vectors": [[[re, im], ...], ...]}."""
    payload = {
        "dim": basis.dim,
        "vectors": [
            [[float(z.real), float(z.imag)] for z in basis.matrix[:, j]]
            for j in range(basis.dim)
        ],
    }
    try:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(payload, fh)
            fh.write("\n")
    except OSError as exc:
        raise IoError(f"cannot write basis file {path}: {exc}") from exc


def load_basis(path) -> ProjectiveBasis:
    """Read a basis file written by :func:`save_basis`."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            payload = json.load(fh)
    except OSError as exc:
        raise IoError(f"cannot read basis file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"basis file {path} is not valid JSON: {exc}") from exc
    if not isinstance(payload, dict) or "dim" not in payload or "vectors" not in payload:
        raise ParseError(f"basis file {path} must have 'dim' and 'vectors' fields")
    d = payload["dim"]
    vectors = payload["vectors"]
    if not isinstance(d, int) or d < 2:
        raise ParseError(f"basis file {path}: 'dim' must be an integer >= 2")
    if not isinstance(vectors, list) or len(vectors) != d:
        raise ParseError(f"basis file {path}: expected {d} vectors")
    try:
        rows = np.array(
            [[complex(re, im) for re, im in vec] for vec in vectors], dtype=complex
        )
    except (TypeError, ValueError) as exc:
        raise ParseError(
            f"basis file {path}: vectors must be lists of [re, im] pairs"
        ) from exc
    if rows.shape != (d, d):
        raise ParseError(f"basis file {path}: vectors must each have {d} entries")
    return ProjectiveBasis.from_vectors(rows)
