"""Distance-based witnesses and concurrence bounds.

The headline witness is the minimum Hellinger distance between a state and
the tensor product of its two marginals, over all canonical bipartitions.
It vanishes on (and only on) states that are a product across some cut, and
for pure states it equals the cut concurrence up to normalization:

    witness(psi) = min_cut sqrt(2 - 2 Tr(rho_gamma^2))
                 = sqrt(2) * gme_concurrence_pure(psi).

The sqrt(2) factor is a normalization mismatch between the bipartite
concurrence convention (2 - 2*purity) and the multipartite one
(1 - purity); both figures are reported, nothing is rescaled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import BadExponent, DimensionMismatch, NotBipartite
from .measurements import CutMeasurement
from .optimize import BlockChart, OptimizerConfig, multistart_minimize
from .partitions import (
    Partition,
    enumerate_bipartitions,
    marginals,
    permute_to_cut,
)
from .qstate import (
    DensityMatrix,
    EIGENVALUE_CLIP,
    PureStateVector,
    _as_matrix,
    _eigh_psd,
    _hermitize,
    matrix_sqrt,
)

COMMUTATOR_TOL = 1e-8

GME_NORMALIZATION_NOTE = (
    "for pure states the product-marginal Hellinger witness equals "
    "sqrt(2) * gme_concurrence_pure; the sqrt(2) comes from the "
    "2-2*purity bipartite-concurrence normalization versus the 1-purity "
    "multipartite one"
)

GMC_CAVEAT = (
    "commuting with a product of its marginals is a necessary but not "
    "sufficient condition for vanishing genuine discord; a passing verdict "
    "does not certify classicality"
)


def root_distance(rho, sigma, p: float = 2.0) -> float:
    """The p-root metric [Tr |rho^(1/p) - sigma^(1/p)|^p]^(1/p), p >= 1."""
    p = float(p)
    if p < 1.0:
        raise BadExponent(f"exponent p must be >= 1, got {p}")
    rm = _as_matrix(rho)
    sm = _as_matrix(sigma)
    if rm.shape != sm.shape:
        raise DimensionMismatch(f"operator shapes differ: {rm.shape} vs {sm.shape}")
    wr, vr = _eigh_psd(rm, "root_distance")
    ws, vs = _eigh_psd(sm, "root_distance")
    a = (vr * wr ** (1.0 / p)) @ vr.conj().T
    b = (vs * ws ** (1.0 / p)) @ vs.conj().T
    w = np.linalg.eigvalsh(_hermitize(a - b))
    return float((np.abs(w) ** p).sum() ** (1.0 / p))


def hellinger_distance(rho, sigma) -> float:
    """sqrt(2 - 2 Tr(sqrt(rho) sqrt(sigma))): the p = 2 root metric."""
    rm = _as_matrix(rho)
    sm = _as_matrix(sigma)
    if rm.shape != sm.shape:
        raise DimensionMismatch(f"operator shapes differ: {rm.shape} vs {sm.shape}")
    # vdot keeps Tr(sqrt(sigma) sqrt(rho)) exactly symmetric in its arguments
    t = float(np.vdot(matrix_sqrt(sm), matrix_sqrt(rm)).real)
    return math.sqrt(max(0.0, 2.0 - 2.0 * t))


@dataclass(frozen=True)
class WitnessReport:
    """Per-cut Hellinger distances to the product of marginals."""

    per_partition: dict
    value: float
    best_partition: Partition
    note: str = GME_NORMALIZATION_NOTE


def hellinger_witness(rho: DensityMatrix) -> WitnessReport:
    """min over canonical cuts of the Hellinger distance between rho and
    rho_gamma x rho_gamma'. Deterministic: no optimizer involved."""
    per = {}
    best_cut = None
    best = None
    for cut in enumerate_bipartitions(rho.dims):
        rg, rgp = marginals(rho, cut)
        product = np.kron(rg.matrix, rgp.matrix)
        d = hellinger_distance(permute_to_cut(rho, cut).matrix, product)
        per[cut] = d
        if best is None or d < best:
            best = d
            best_cut = cut
    return WitnessReport(per, best, best_cut)


def _pure_block_purity(psi: PureStateVector, cut: Partition) -> float:
    axes = tuple(i - 1 for i in cut.gamma + cut.gamma_prime)
    m = psi.amplitudes.reshape(psi.dims).transpose(axes)
    m = m.reshape(cut.d_gamma, cut.d_gamma_prime)
    g = m @ m.conj().T
    return float(np.vdot(g, g).real)


def concurrence_pure(psi: PureStateVector) -> float:
    """Bipartite pure-state concurrence sqrt(2 - 2 Tr(rho_A^2))."""
    if psi.n_parties != 2:
        raise NotBipartite(f"concurrence_pure needs 2 parties, got {psi.n_parties}")
    cut = Partition.of([1], psi.dims)
    return math.sqrt(max(0.0, 2.0 - 2.0 * _pure_block_purity(psi, cut)))


def cut_concurrence(psi: PureStateVector, cut: Partition) -> float:
    """sqrt(1 - Tr(rho_gamma^2)) for a pure state and one cut."""
    if cut.dims != psi.dims:
        raise DimensionMismatch(
            f"cut dims {cut.dims} do not match state dims {psi.dims}"
        )
    return math.sqrt(max(0.0, 1.0 - _pure_block_purity(psi, cut)))


def gme_concurrence_pure(psi: PureStateVector) -> float:
    """min over canonical cuts of the cut concurrence (pure states)."""
    return min(cut_concurrence(psi, cut) for cut in enumerate_bipartitions(psi.dims))


@dataclass(frozen=True)
class BiseparabilityVerdict:
    biseparable: bool
    partition: Partition | None
    min_concurrence: float


def biseparable_pure(psi: PureStateVector, tol: float = 1e-8) -> BiseparabilityVerdict:
    """A pure state is biseparable iff some cut concurrence vanishes."""
    best_cut = None
    best = None
    for cut in enumerate_bipartitions(psi.dims):
        c = cut_concurrence(psi, cut)
        if best is None or c < best:
            best = c
            best_cut = cut
    if best <= tol:
        return BiseparabilityVerdict(True, best_cut, best)
    return BiseparabilityVerdict(False, None, best)


def _roof_cut_shapes(dims):
    shapes = []
    for cut in enumerate_bipartitions(dims):
        axes = tuple(i - 1 for i in cut.gamma + cut.gamma_prime)
        shapes.append((axes, cut.d_gamma, cut.d_gamma_prime))
    return shapes


def gme_concurrence_upper(rho: DensityMatrix, cfg: OptimizerConfig | None = None) -> float:
    """Convex-roof upper bound on the GME concurrence of a mixed state.

    Searches ensembles reached by mixing the eigendecomposition through an
    m x r isometry, for ensemble sizes m = rank and rank + 2, with the
    shared multi-start engine. The eigen-ensemble itself is always a start,
    so the bound never exceeds the eigendecomposition average; for rank-1
    states it reduces to the pure-state value exactly.
    """
    cfg = cfg or OptimizerConfig()
    w, v = np.linalg.eigh(rho.matrix)
    keep = w > EIGENVALUE_CLIP
    lam = w[keep]
    vecs = v[:, keep]
    r = int(lam.size)
    roots = vecs * np.sqrt(lam)  # columns w_j sqrt(lam_j), Psi = roots @ V.T
    shapes = _roof_cut_shapes(rho.dims)
    dims = rho.dims

    def ensemble_value(iso: np.ndarray) -> float:
        psi_block = roots @ iso.T  # D x m, unnormalized ensemble vectors
        total = 0.0
        for i in range(psi_block.shape[1]):
            col = psi_block[:, i]
            p = float(np.vdot(col, col).real)
            if p <= 1e-14:
                continue
            min_c2 = None
            t = col.reshape(dims)
            for axes, dg, dgp in shapes:
                m = t.transpose(axes).reshape(dg, dgp)
                g = m @ m.conj().T
                c2 = 1.0 - float(np.vdot(g, g).real) / (p * p)
                if min_c2 is None or c2 < min_c2:
                    min_c2 = c2
            total += p * math.sqrt(max(0.0, min_c2))
        return total

    best = math.inf
    for m_size in dict.fromkeys((r, r + 2)):
        def objective(blocks, _m=m_size):
            return ensemble_value(blocks[0][:, :r])

        engine = multistart_minimize(
            objective,
            (BlockChart((m_size,), phases=True),),
            [("eigen-ensemble", ((np.eye(m_size, dtype=complex),),))],
            cfg,
            context=(m_size,),
            floor=0.0,
        )
        best = min(best, engine.value)
    return max(0.0, best)


@dataclass(frozen=True)
class GmcCheckReport:
    """Frobenius norms of [rho, rho_gamma x rho_gamma'] for every cut.

    The verdict states only a necessary condition; see ``caveat``.
    """

    per_partition: dict
    min_norm: float
    best_partition: Partition
    verdict: str
    caveat: str = GMC_CAVEAT


def gmc_commutator_check(rho: DensityMatrix) -> GmcCheckReport:
    """Necessary-condition screen for genuine multipartite classicality."""
    per = {}
    best_cut = None
    best = None
    for cut in enumerate_bipartitions(rho.dims):
        rg, rgp = marginals(rho, cut)
        product = np.kron(rg.matrix, rgp.matrix)
        rc = permute_to_cut(rho, cut).matrix
        comm = rc @ product - product @ rc
        norm = float(np.linalg.norm(comm))
        per[cut] = norm
        if best is None or norm < best:
            best = norm
            best_cut = cut
    verdict = "necessary-condition-passed" if best <= COMMUTATOR_TOL else "violated"
    return GmcCheckReport(per, best, best_cut, verdict)


@dataclass(frozen=True)
class FixedPointCheck:
    """Distance of rho from its dephased image under one cut measurement."""

    distance: float
    max_projector_commutator: float


def gmc_fixed_point(rho: DensityMatrix, m: CutMeasurement) -> FixedPointCheck:
    """Frobenius distance ||rho - Phi(rho)||_F for the product dephasing of
    ``m``, plus the largest ||[rho, Pi_j]||_F over its rank-1 projectors."""
    from .measurements import dephase_cut

    phi = dephase_cut(rho, m)
    distance = float(np.linalg.norm(rho.matrix - phi.matrix))
    rc = permute_to_cut(rho, m.cut).matrix
    u = np.kron(m.basis_gamma.matrix, m.basis_gamma_prime.matrix)
    ru = rc @ u
    # ||[rho, vv*]||_F^2 = 2(<v|rho^2|v> - <v|rho|v>^2) for unit v
    a = np.einsum("ij,ij->j", ru.conj(), ru).real
    b = np.einsum("ij,ij->j", u.conj(), ru).real
    norms2 = np.maximum(2.0 * (a - b * b), 0.0)
    return FixedPointCheck(distance, float(np.sqrt(norms2.max())))
