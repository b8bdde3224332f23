"""Shared multi-start derivative-free optimizer over measurement bases.

A basis is parameterized as U(x) = exp(A(x)) B0 around a start basis B0,
with A anti-Hermitian and zero diagonal: d(d-1)/2 complex free parameters
per d-dimensional site (column phases never affect rank-1 projectors, so
the diagonal is dropped). The ensemble-steering chart for convex-roof
searches keeps the diagonal (isometry column phases do matter there).

Each start runs an adaptive Nelder-Mead simplex from x = 0. Random starts
draw their base bases from an independent stream seeded by
(seed, *context, start index), so results do not depend on scheduling or
on how many other starts run.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .measurements import fix_gauge, random_basis

FLOOR_SLACK = 1e-12


@dataclass(frozen=True)
class OptimizerConfig:
    """Knobs for the multi-start simplex search.

    partition_mode selects how block bases are parameterized: "per-cut"
    optimizes one joint basis per block; "per-site" restricts each block
    basis to a product of per-party bases.
    """

    n_random_starts: int = 24
    include_canonical_starts: bool = True
    max_iterations: int = 2000
    ftol: float = 1e-8
    simplex_step: float = 0.1
    seed: int = 42
    partition_mode: str = "per-cut"

    def __post_init__(self):
        if self.n_random_starts < 1:
            raise ValueError("n_random_starts must be >= 1")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if not (self.ftol > 0.0):
            raise ValueError("ftol must be positive")
        if not (self.simplex_step > 0.0):
            raise ValueError("simplex_step must be positive")
        if self.partition_mode not in ("per-cut", "per-site"):
            raise ValueError("partition_mode must be 'per-cut' or 'per-site'")
        if int(self.seed) < 0:
            raise ValueError("seed must be a nonnegative integer")


def n_chart_params(d: int, phases: bool = False) -> int:
    return d * (d - 1) + (d if phases else 0)


def _expm_antihermitian(a: np.ndarray) -> np.ndarray:
    h = 1j * a  # Hermitian
    w, v = np.linalg.eigh(h)
    return (v * np.exp(-1j * w)) @ v.conj().T


def params_to_unitary(x: np.ndarray, d: int, base: np.ndarray, phases: bool = False) -> np.ndarray:
    """Realize exp(A(x)) @ base for one site."""
    npairs = d * (d - 1) // 2
    if d == 2 and not phases:
        # closed form: A = [[0, z], [-conj(z), 0]], A^2 = -|z|^2 I
        zr, zi = x[0], x[1]
        r = math.hypot(zr, zi)
        if r < 1e-18:
            return base.copy()
        c = math.cos(r)
        s = math.sin(r) / r
        m = np.array(
            [[c, s * (zr + 1j * zi)], [s * (-zr + 1j * zi), c]], dtype=complex
        )
        return m @ base
    a = np.zeros((d, d), dtype=complex)
    iu = np.triu_indices(d, 1)
    re = x[:npairs]
    im = x[npairs : 2 * npairs]
    a[iu] = re + 1j * im
    a.T[iu] = -re + 1j * im
    if phases:
        a[np.diag_indices(d)] = 1j * x[2 * npairs : 2 * npairs + d]
    return _expm_antihermitian(a) @ base


class BlockChart:
    """Parameterization of one block basis as a product of site unitaries."""

    def __init__(self, site_dims, phases: bool = False):
        self.site_dims = tuple(int(d) for d in site_dims)
        self.phases = phases
        self.site_params = tuple(n_chart_params(d, phases) for d in self.site_dims)
        self.n_params = sum(self.site_params)

    def realize(self, x: np.ndarray, site_bases) -> np.ndarray:
        pos = 0
        u = None
        for d, k, base in zip(self.site_dims, self.site_params, site_bases):
            site = params_to_unitary(x[pos : pos + k], d, base, self.phases)
            pos += k
            u = site if u is None else np.kron(u, site)
        return u


def nelder_mead(f, x0, step, ftol, max_iter, floor=-math.inf):
    """Adaptive Nelder-Mead; returns (x_best, f_best, n_evals, converged).

    Stops when the simplex f-spread drops below ftol, the best value
    reaches the known floor (within 1e-12), the iteration cap is hit, or
    evaluations exceed twice the cap.
    """
    x0 = np.asarray(x0, dtype=float)
    n = x0.size
    if n == 0:
        return x0, float(f(x0)), 1, True
    # Gao-Han adaptive coefficients
    alpha = 1.0
    beta = 1.0 + 2.0 / n
    gamma = 0.75 - 1.0 / (2.0 * n)
    delta = 1.0 - 1.0 / n
    max_evals = 2 * max_iter

    simplex = np.tile(x0, (n + 1, 1))
    for i in range(n):
        simplex[i + 1, i] += step
    fvals = np.array([float(f(x)) for x in simplex])
    nfev = n + 1
    converged = False

    for _ in range(max_iter):
        order = np.argsort(fvals, kind="stable")
        simplex = simplex[order]
        fvals = fvals[order]
        if fvals[0] <= floor + FLOOR_SLACK:
            converged = True
            break
        if fvals[-1] - fvals[0] <= ftol:
            converged = True
            break
        if nfev >= max_evals:
            break
        centroid = simplex[:-1].mean(axis=0)
        xr = centroid + alpha * (centroid - simplex[-1])
        fr = float(f(xr))
        nfev += 1
        if fr < fvals[0]:
            xe = centroid + beta * (xr - centroid)
            fe = float(f(xe))
            nfev += 1
            if fe < fr:
                simplex[-1], fvals[-1] = xe, fe
            else:
                simplex[-1], fvals[-1] = xr, fr
            continue
        if fr < fvals[-2]:
            simplex[-1], fvals[-1] = xr, fr
            continue
        if fr < fvals[-1]:
            xc = centroid + gamma * (xr - centroid)
        else:
            xc = centroid - gamma * (centroid - simplex[-1])
        fc = float(f(xc))
        nfev += 1
        if fc < min(fr, fvals[-1]):
            simplex[-1], fvals[-1] = xc, fc
            continue
        # shrink toward the best vertex
        simplex[1:] = simplex[0] + delta * (simplex[1:] - simplex[0])
        fvals[1:] = [float(f(x)) for x in simplex[1:]]
        nfev += n

    best = int(np.argmin(fvals))
    return simplex[best], float(fvals[best]), nfev, converged


@dataclass(frozen=True)
class EngineResult:
    """Raw outcome of a multi-start minimization (no clamping applied)."""

    value: float
    best_blocks: tuple[np.ndarray, ...]
    best_label: str
    per_start_values: tuple[float, ...]
    start_labels: tuple[str, ...]
    evaluations: int
    converged: bool


def _random_site_bases(charts, rng):
    return tuple(
        tuple(random_basis(d, rng).matrix for d in chart.site_dims) for chart in charts
    )


def multistart_minimize(
    objective,
    charts,
    canonical_starts,
    cfg: OptimizerConfig,
    context=(),
    floor=-math.inf,
) -> EngineResult:
    """Minimize objective(block_unitaries) over the chart's basis manifold.

    canonical_starts is a list of (label, site_bases) pairs, where
    site_bases[b][s] is the start matrix for site s of block b; it is
    ignored when cfg.include_canonical_starts is off. Early exit once a
    start lands within 1e-12 of the supplied floor.
    """
    charts = tuple(charts)
    starts: list[tuple[str, tuple]] = []
    if cfg.include_canonical_starts:
        starts.extend(canonical_starts)
    for s in range(cfg.n_random_starts):
        key = [int(cfg.seed), *[int(c) for c in context], s]
        rng = np.random.default_rng(np.random.SeedSequence(key))
        starts.append((f"random-{s}", _random_site_bases(charts, rng)))

    splits = np.cumsum([c.n_params for c in charts])[:-1]
    n_total = int(sum(c.n_params for c in charts))

    per_start_values: list[float] = []
    start_labels: list[str] = []
    evaluations = 0
    best_value = math.inf
    best_x = None
    best_bases = None
    best_label = ""
    best_converged = False

    for label, site_bases in starts:
        def f(x, _bases=site_bases):
            parts = np.split(x, splits) if len(charts) > 1 else (x,)
            blocks = tuple(
                chart.realize(p, bases)
                for chart, p, bases in zip(charts, parts, _bases)
            )
            return objective(blocks)

        x_best, f_best, nfev, converged = nelder_mead(
            f,
            np.zeros(n_total),
            cfg.simplex_step,
            cfg.ftol,
            cfg.max_iterations,
            floor=floor,
        )
        evaluations += nfev
        per_start_values.append(f_best)
        start_labels.append(label)
        if f_best < best_value:
            best_value = f_best
            best_x = x_best
            best_bases = site_bases
            best_label = label
            best_converged = converged
        if best_value <= floor + FLOOR_SLACK:
            break

    parts = np.split(best_x, splits) if len(charts) > 1 else (best_x,)
    blocks = tuple(
        fix_gauge(chart.realize(p, bases))
        for chart, p, bases in zip(charts, parts, best_bases)
    )
    return EngineResult(
        value=best_value,
        best_blocks=blocks,
        best_label=best_label,
        per_start_values=tuple(per_start_values),
        start_labels=tuple(start_labels),
        evaluations=evaluations,
        converged=best_converged,
    )
