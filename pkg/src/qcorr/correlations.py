"""Measurement-minimized correlation measures, in bits.

The central objective for a cut gamma|gamma' and a product measurement is
the bracket

    [S(Phi(rho)) - S(rho)] - [S(Phi_g(rho_g)) - S(rho_g)]
                           - [S(Phi_g'(rho_g')) - S(rho_g')],

evaluated through the pinching identity S(rho || Phi(rho)) = S(Phi(rho)) -
S(rho): each dephased operator is diagonal in its measurement basis, so the
three entropies reduce to Shannon entropies of the joint outcome
distribution and its two marginals. Equivalently the bracket is the quantum
mutual information across the cut minus the classical mutual information of
the outcomes.

Reported values are minima over multi-start simplex searches; a reported
value in [-1e-9, 0) is clamped to 0 while the raw minimum stays visible in
the diagnostics.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import IndexOutOfRange, NotBipartite
from .measurements import (
    CutMeasurement,
    ProjectiveBasis,
    bell_basis,
    computational_basis,
    dephase,
    dephase_cut,
    eigenbasis,
    fourier_basis,
)
from .optimize import BlockChart, EngineResult, OptimizerConfig, multistart_minimize
from .partitions import Partition, enumerate_bipartitions, marginals, permute_to_cut
from .qstate import (
    DensityMatrix,
    EIGENVALUE_CLIP,
    mutual_information,
    partial_trace,
    relative_entropy,
    von_neumann_entropy,
)

NEGATIVE_CLAMP = 1e-9


def _clamped(v: float) -> float:
    return 0.0 if -NEGATIVE_CLAMP <= v < 0.0 else v


@dataclass(frozen=True)
class DiscordResult:
    """Value plus optimizer diagnostics for one measure evaluation.

    ``value`` is the reported figure (tiny negatives clamped to 0);
    ``raw_value`` is the unclamped extremum over starts. ``argmin`` holds
    the extremizing measurement (CutMeasurement) or basis (ProjectiveBasis).
    """

    value: float
    raw_value: float
    argmin: object
    per_start_values: tuple[float, ...]
    start_labels: tuple[str, ...]
    converged: bool
    evaluations: int


@dataclass(frozen=True)
class GenuineDiscordResult:
    """Minimum cut discord over all canonical bipartitions."""

    value: float
    best_partition: Partition
    per_partition: dict


def _shannon(p: np.ndarray) -> float:
    p = p[p > EIGENVALUE_CLIP]
    if p.size == 0:
        return 0.0
    return float(-(p * np.log2(p)).sum())


class _CutContext:
    """Everything about (state, cut) that is constant during optimization."""

    __slots__ = (
        "rho", "cut", "rho_cut", "rho_g", "rho_gp",
        "dg", "dgp", "s_total", "s_g", "s_gp", "mutual",
    )

    def __init__(self, rho: DensityMatrix, cut: Partition):
        self.rho = rho
        self.cut = cut
        self.rho_cut = np.ascontiguousarray(permute_to_cut(rho, cut).matrix)
        self.rho_g, self.rho_gp = marginals(rho, cut)
        self.dg = cut.d_gamma
        self.dgp = cut.d_gamma_prime
        self.s_total = von_neumann_entropy(self.rho_cut)
        self.s_g = von_neumann_entropy(self.rho_g)
        self.s_gp = von_neumann_entropy(self.rho_gp)
        self.mutual = self.s_g + self.s_gp - self.s_total

    def outcome_distribution(self, u_joint: np.ndarray) -> np.ndarray:
        """diag(U^dag rho U) clipped at zero, shaped (d_gamma, d_gamma')."""
        p = np.einsum("ij,ij->j", u_joint.conj(), self.rho_cut @ u_joint).real
        np.maximum(p, 0.0, out=p)
        return p.reshape(self.dg, self.dgp)


def _bracket_objective(ctx: _CutContext):
    def f(blocks):
        pm = ctx.outcome_distribution(np.kron(blocks[0], blocks[1]))
        return (
            (_shannon(pm.reshape(-1)) - ctx.s_total)
            - (_shannon(pm.sum(axis=1)) - ctx.s_g)
            - (_shannon(pm.sum(axis=0)) - ctx.s_gp)
        )

    return f


def _one_sided_objective(ctx: _CutContext, u_gp_fixed: np.ndarray):
    def f(blocks):
        pm = ctx.outcome_distribution(np.kron(blocks[0], u_gp_fixed))
        return (
            (_shannon(pm.reshape(-1)) - ctx.s_total)
            - (_shannon(pm.sum(axis=1)) - ctx.s_g)
            - (_shannon(pm.sum(axis=0)) - ctx.s_gp)
        )

    return f


def _block_canonicals(d: int, rho_block: DensityMatrix) -> dict:
    out = {
        "computational": computational_basis(d).matrix,
        "fourier": fourier_basis(d).matrix,
        "marginal-eigenbasis": eigenbasis(rho_block).matrix,
    }
    if d == 4:
        out["bell"] = bell_basis().matrix
    return out


def _canonical_cut_starts(ctx: _CutContext, mode: str):
    """(charts, canonical start list) for two-block optimization."""
    cut = ctx.cut
    if mode == "per-cut":
        charts = (BlockChart((ctx.dg,)), BlockChart((ctx.dgp,)))
        cg = _block_canonicals(ctx.dg, ctx.rho_g)
        cgp = _block_canonicals(ctx.dgp, ctx.rho_gp)
        starts = [
            (name, ((cg[name],), (cgp[name],)))
            for name in ("computational", "fourier", "marginal-eigenbasis")
        ]
        if "bell" in cg:
            starts.append(("bell x computational", ((cg["bell"],), (cgp["computational"],))))
            starts.append(("bell x marginal-eigenbasis", ((cg["bell"],), (cgp["marginal-eigenbasis"],))))
        if "bell" in cgp:
            starts.append(("computational x bell", ((cg["computational"],), (cgp["bell"],))))
            starts.append(("marginal-eigenbasis x bell", ((cg["marginal-eigenbasis"],), (cgp["bell"],))))
        return charts, starts
    # per-site: each block basis is a product of per-party bases
    charts = (BlockChart(cut.dims_gamma), BlockChart(cut.dims_gamma_prime))
    comp_g = tuple(computational_basis(d).matrix for d in cut.dims_gamma)
    comp_gp = tuple(computational_basis(d).matrix for d in cut.dims_gamma_prime)
    four_g = tuple(fourier_basis(d).matrix for d in cut.dims_gamma)
    four_gp = tuple(fourier_basis(d).matrix for d in cut.dims_gamma_prime)
    eig_g = tuple(
        eigenbasis(partial_trace(ctx.rho, [i])).matrix for i in cut.gamma
    )
    eig_gp = tuple(
        eigenbasis(partial_trace(ctx.rho, [i])).matrix for i in cut.gamma_prime
    )
    starts = [
        ("computational", (comp_g, comp_gp)),
        ("fourier", (four_g, four_gp)),
        ("site-eigenbasis", (eig_g, eig_gp)),
    ]
    return charts, starts


def _partition_index(cut: Partition) -> int:
    return enumerate_bipartitions(cut.dims).index(cut)


def _measurement_from_blocks(cut: Partition, blocks) -> CutMeasurement:
    return CutMeasurement(
        cut, ProjectiveBasis(blocks[0]), ProjectiveBasis(blocks[1])
    )


def _discord_result(engine: EngineResult, argmin) -> DiscordResult:
    return DiscordResult(
        value=_clamped(engine.value),
        raw_value=engine.value,
        argmin=argmin,
        per_start_values=engine.per_start_values,
        start_labels=engine.start_labels,
        converged=engine.converged,
        evaluations=engine.evaluations,
    )


def cut_discord(
    rho: DensityMatrix,
    cut: Partition,
    cfg: OptimizerConfig | None = None,
    one_sided: bool = False,
) -> DiscordResult:
    """Discord across one bipartition: the bracket minimized over product
    measurements on the two blocks.

    With ``one_sided`` the gamma' basis is frozen at the eigenbasis of its
    marginal and only the gamma basis is optimized.
    """
    cfg = cfg or OptimizerConfig()
    ctx = _CutContext(rho, cut)
    pidx = _partition_index(cut)
    charts, starts = _canonical_cut_starts(ctx, cfg.partition_mode)
    if one_sided:
        u_gp = eigenbasis(ctx.rho_gp).matrix
        objective = _one_sided_objective(ctx, u_gp)
        if cfg.partition_mode == "per-cut":
            one_starts = [
                (name, ((mat,),))
                for name, mat in _block_canonicals(ctx.dg, ctx.rho_g).items()
            ]
        else:
            one_starts = [(label, bases[:1]) for label, bases in starts]
        engine = multistart_minimize(
            objective,
            charts[:1],
            one_starts,
            cfg,
            context=(pidx,),
            floor=0.0,
        )
        argmin = CutMeasurement(
            cut, ProjectiveBasis(engine.best_blocks[0]), ProjectiveBasis(u_gp)
        )
    else:
        engine = multistart_minimize(
            _bracket_objective(ctx),
            charts,
            starts,
            cfg,
            context=(pidx,),
            floor=0.0,
        )
        argmin = _measurement_from_blocks(cut, engine.best_blocks)
    return _discord_result(engine, argmin)


def cut_discord_objective(rho: DensityMatrix, m: CutMeasurement, form: str = "identity") -> float:
    """The bracket for one fixed cut measurement.

    form="identity" evaluates through the pinching identity (Shannon
    entropies of the outcome distribution); form="direct" evaluates the
    three quantum relative entropies from their spectral definitions.
    """
    ctx = _CutContext(rho, m.cut)
    if form == "identity":
        return _bracket_objective(ctx)(
            (m.basis_gamma.matrix, m.basis_gamma_prime.matrix)
        )
    if form == "direct":
        joint = dephase_cut(rho, m)
        t_all = relative_entropy(rho, joint)
        t_g = relative_entropy(ctx.rho_g, dephase(ctx.rho_g, m.basis_gamma))
        t_gp = relative_entropy(ctx.rho_gp, dephase(ctx.rho_gp, m.basis_gamma_prime))
        return t_all - t_g - t_gp
    raise ValueError(f"form must be 'identity' or 'direct', got {form!r}")


def genuine_discord(rho: DensityMatrix, cfg: OptimizerConfig | None = None) -> GenuineDiscordResult:
    """Minimum cut discord over every canonical bipartition."""
    cfg = cfg or OptimizerConfig()
    per = {}
    best_cut = None
    best_value = None
    for cut in enumerate_bipartitions(rho.dims):
        res = cut_discord(rho, cut, cfg)
        per[cut] = res
        if best_value is None or res.value < best_value:
            best_value = res.value
            best_cut = cut
    return GenuineDiscordResult(best_value, best_cut, per)


def symmetric_discord(rho: DensityMatrix, cfg: OptimizerConfig | None = None) -> DiscordResult:
    """Two-sided discord of a bipartite state.

    Evaluated in the two-relative-entropy form: S(rho || rho_A x rho_B)
    minus the classical relative entropy of the outcome distribution
    against the product of its marginals, minimized over product bases.
    """
    if rho.n_parties != 2:
        raise NotBipartite(f"symmetric_discord needs 2 parties, got {rho.n_parties}")
    cfg = cfg or OptimizerConfig()
    cut = Partition.of([1], rho.dims)
    ctx = _CutContext(rho, cut)
    rel_const = relative_entropy(
        ctx.rho_cut, np.kron(ctx.rho_g.matrix, ctx.rho_gp.matrix)
    )

    def objective(blocks):
        pm = ctx.outcome_distribution(np.kron(blocks[0], blocks[1]))
        p = pm.reshape(-1)
        outer = np.outer(pm.sum(axis=1), pm.sum(axis=0)).reshape(-1)
        on = p > EIGENVALUE_CLIP
        classical = float((p[on] * np.log2(p[on] / outer[on])).sum())
        return rel_const - classical

    charts, starts = _canonical_cut_starts(ctx, cfg.partition_mode)
    engine = multistart_minimize(
        objective, charts, starts, cfg, context=(0,), floor=0.0
    )
    return _discord_result(engine, _measurement_from_blocks(cut, engine.best_blocks))


def classical_correlation(
    rho: DensityMatrix,
    measured_side: int = 2,
    cfg: OptimizerConfig | None = None,
) -> DiscordResult:
    """Maximum of S(rho_kept) - sum_j p_j S(rho_kept|j) over rank-1 bases
    on the measured party of a bipartite state.
    """
    if rho.n_parties != 2:
        raise NotBipartite(
            f"classical_correlation needs 2 parties, got {rho.n_parties}"
        )
    if measured_side not in (1, 2):
        raise IndexOutOfRange(f"measured_side must be 1 or 2, got {measured_side}")
    cfg = cfg or OptimizerConfig()
    d1, d2 = rho.dims
    m = rho.matrix.reshape(d1, d2, d1, d2)
    if measured_side == 2:
        kept = partial_trace(rho, [1])
        measured = partial_trace(rho, [2])
        d_meas = d2
    else:
        kept = partial_trace(rho, [2])
        measured = partial_trace(rho, [1])
        d_meas = d1
    s_kept = von_neumann_entropy(kept)

    def objective(blocks):
        u = blocks[0]
        if measured_side == 2:
            cond = np.einsum("bj,abcd,dj->jac", u.conj(), m, u)
        else:
            cond = np.einsum("aj,abcd,cj->jbd", u.conj(), m, u)
        probs = np.einsum("jaa->j", cond).real
        avg = 0.0
        for j in np.flatnonzero(probs > 1e-14):
            w = np.linalg.eigvalsh(cond[j])
            np.maximum(w, 0.0, out=w)
            w = w[w > EIGENVALUE_CLIP]
            if w.size:
                p_j = probs[j]
                # entropy of cond/p_j written on the unnormalized spectrum
                avg += float(-(w * np.log2(w / p_j)).sum())
        return -(s_kept - avg)

    canon = _block_canonicals(d_meas, measured)
    starts = [(name, ((mat,),)) for name, mat in canon.items()]
    engine = multistart_minimize(
        objective,
        (BlockChart((d_meas,)),),
        starts,
        cfg,
        context=(0,),
        floor=-s_kept,
    )
    q_raw = -engine.value
    return DiscordResult(
        value=_clamped(q_raw),
        raw_value=q_raw,
        argmin=ProjectiveBasis(engine.best_blocks[0]),
        per_start_values=tuple(-v for v in engine.per_start_values),
        start_labels=engine.start_labels,
        converged=engine.converged,
        evaluations=engine.evaluations,
    )


def one_sided_discord(
    rho: DensityMatrix,
    measured_side: int = 2,
    cfg: OptimizerConfig | None = None,
) -> DiscordResult:
    """Mutual information minus the classical correlation of the measured
    side (the measurement-based discord of a bipartite state)."""
    q = classical_correlation(rho, measured_side, cfg)
    total = mutual_information(rho, Partition.of([1], rho.dims))
    raw = total - q.raw_value
    return DiscordResult(
        value=_clamped(raw),
        raw_value=raw,
        argmin=q.argmin,
        per_start_values=tuple(total - v for v in q.per_start_values),
        start_labels=q.start_labels,
        converged=q.converged,
        evaluations=q.evaluations,
    )
