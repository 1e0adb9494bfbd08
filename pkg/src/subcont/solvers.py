"""The two guaranteed maximizers and the 1-D subproblem solvers they rely on.

``frank_wolfe_variant`` is a conditional-gradient scheme for monotone
objectives with diminishing returns over a down-closed polytope: it starts at
the origin and *adds* gamma_k * v_k (no convex combination), accumulating a
total step mass of exactly one.  With an exact linear oracle and constant
stepsize 1/K it reaches (1 - 1/e) OPT - L/(2K) + f(0)/e, L being a curvature
bound along nonnegative directions.

``double_greedy`` maximizes a general (possibly non-monotone) submodular
objective over a box by marching two solutions from the box corners toward
each other, one exact 1-D maximization per coordinate and particle; the
result is a 1/3 approximation when f(lower) + f(upper) >= 0.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .core import (Array, BoxDomain, ObjectiveHandle, PolytopeDomain,
                   SolverTrace, as_point)
from .geometry import LPSolution, feasibility_residual, linear_maximize

QUADRATIC_MODE = "quadratic_closed_form"
CONCAVE_MODE = "concave_search"
REVENUE_MODE = "revenue_discontinuous"

_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass
class FWConfig:
    """Conditional-gradient parameters.

    Exactly one of ``gamma`` / ``K`` / ``schedule`` drives the stepsize:
    a constant gamma in (0, 1], the budget K (gamma = 1/K), or an explicit
    per-iteration schedule.  alpha and delta describe the multiplicative and
    additive quality of an injected linear oracle (the built-in exact oracle
    realizes alpha = 1, delta = 0); L is an optional curvature estimate used
    only for reporting and bound checks.
    """

    gamma: float | None = None
    K: int | None = None
    schedule: Sequence[float] | None = None
    alpha: float = 1.0
    delta: float = 0.0
    L: float | None = None

    def __post_init__(self):
        if self.schedule is None:
            if self.gamma is None:
                if self.K is None:
                    raise ValueError("provide gamma, K, or a schedule")
                self.gamma = 1.0 / self.K
            if not (0.0 < self.gamma <= 1.0):
                raise ValueError("gamma must lie in (0, 1]")
        else:
            self.schedule = [float(g) for g in self.schedule]
            if any(not (0.0 < g <= 1.0) for g in self.schedule):
                raise ValueError("schedule entries must lie in (0, 1]")
        if not (0.0 < self.alpha <= 1.0):
            raise ValueError("alpha must lie in (0, 1]")
        if self.delta < 0:
            raise ValueError("delta must be nonnegative")
        if self.L is not None and self.L <= 0:
            raise ValueError("L must be positive")


class SolverAbort(RuntimeError):
    """Solver failure carrying the partial trace collected so far."""

    def __init__(self, message: str, trace: SolverTrace):
        super().__init__(message)
        self.trace = trace


def frank_wolfe_variant(
    f: ObjectiveHandle,
    P: PolytopeDomain,
    cfg: FWConfig,
    oracle: Callable[[PolytopeDomain, Array], LPSolution] | None = None,
) -> tuple[Array, SolverTrace]:
    """Run the conditional-gradient scheme from x = 0 until the cumulative
    step reaches exactly 1; returns the final point and the full trace.

    The oracle defaults to the exact LP vertex solver; an approximate one may
    be injected for error-level experiments.  Stepsizes are truncated to
    min(gamma_k, 1 - t), so the run ends on t = 1 without overshoot.
    """
    if not (f.monotone and f.dr_submodular):
        raise ValueError("requires a monotone objective with diminishing returns")
    if not f.differentiable:
        raise ValueError("requires a differentiable objective")
    if f.dimension != P.dimension:
        raise ValueError("objective and polytope dimensions differ")
    oracle = linear_maximize if oracle is None else oracle
    x = np.zeros(P.dimension)
    t = 0.0
    k = 0
    trace = SolverTrace(meta={"algorithm": "frank_wolfe", "gamma": cfg.gamma,
                              "alpha": cfg.alpha, "delta": cfg.delta})
    trace.append(0, 0.0, f.value(x), feasibility_residual(P, x))
    while t < 1.0:
        try:
            grad = as_point(f.gradient(x), P.dimension)
        except ValueError as e:
            raise SolverAbort(f"gradient evaluation failed at iteration {k}: {e}",
                              trace) from e
        sol = oracle(P, grad)
        if cfg.schedule is not None:
            if k >= len(cfg.schedule):
                if 1.0 - t <= 1e-9:   # schedule summed to 1 up to rounding
                    break
                raise SolverAbort("stepsize schedule exhausted before t reached 1",
                                  trace)
            gamma_k = cfg.schedule[k]
        else:
            gamma_k = cfg.gamma
        final_step = gamma_k >= 1.0 - t
        gamma_k = min(gamma_k, 1.0 - t)
        x = x + gamma_k * sol.point
        t = 1.0 if final_step else t + gamma_k
        k += 1
        trace.append(k, t, f.value(x), feasibility_residual(P, x))
    return x, trace


def _golden_section_max(g, lo: float, hi: float, tol: float):
    """Golden-section maximization of a unimodal g on [lo, hi].

    Returns (z_best, value_best, gap_bound); the value is the best actually
    evaluated (endpoints included), and the gap bound is the final bracket
    width times the steepest slope observed between probes.
    """
    probes = [(lo, g(lo))]
    if hi > lo:
        probes.append((hi, g(hi)))
    a, b = lo, hi
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    if b - a > tol:
        fc, fd = g(c), g(d)
        probes.extend([(c, fc), (d, fd)])
        while b - a > tol:
            if fc >= fd:
                b, d, fd = d, c, fc
                c = b - _INVPHI * (b - a)
                fc = g(c)
                probes.append((c, fc))
            else:
                a, c, fc = c, d, fd
                d = a + _INVPHI * (b - a)
                fd = g(d)
                probes.append((d, fd))
    probes.sort(key=lambda p: p[0])
    zs = np.array([p[0] for p in probes])
    vs = np.array([p[1] for p in probes])
    best = int(np.argmax(vs))
    dz = np.diff(zs)
    good = dz > 0
    slope = float(np.max(np.abs(np.diff(vs)[good] / dz[good]), initial=0.0))
    gap = (b - a) * slope + 1e-12 * (1.0 + abs(vs[best]))
    return float(zs[best]), float(vs[best]), float(gap)


def maximize_1d(f: ObjectiveHandle, x, j: int, lo: float, hi: float,
                mode: str, tol: float = 1e-10) -> tuple[float, float, float]:
    """Maximize f along coordinate j over [lo, hi], holding the rest of x.

    Returns (z_star, value, gap_bound) with value = f(x with x_j = z_star).

    Modes:
      * quadratic_closed_form - exact for 1-D restrictions that are quadratic
        in x_j (three-point interpolation, vertex vs endpoints); gap 0.
      * concave_search - golden section to bracket width < tol.
      * revenue_discontinuous - golden section on (eps, hi] for the smooth
        concave extension, then an exact comparison with the value at the
        discontinuity z = 0.
    """
    x = as_point(x, f.dimension)
    if not 0 <= j < f.dimension:
        raise ValueError(f"coordinate {j} out of range")
    if lo > hi:
        raise ValueError("need lo <= hi")

    def g(z: float) -> float:
        xz = x.copy()
        xz[j] = z
        val = f.value(xz)
        if not np.isfinite(val):
            raise ValueError(f"non-finite evaluation at probe x_{j} = {z}")
        return float(val)

    if hi - lo < 1e-15:
        return lo, g(lo), 0.0

    if mode == QUADRATIC_MODE:
        mid = 0.5 * (lo + hi)
        glo, gmid, ghi = g(lo), g(mid), g(hi)
        d01 = (gmid - glo) / (mid - lo)
        d12 = (ghi - gmid) / (hi - mid)
        a = (d12 - d01) / (hi - lo)
        b = d01 - a * (lo + mid)
        candidates = [(lo, glo), (hi, ghi), (mid, gmid)]
        if a < 0.0:
            vertex = -b / (2.0 * a)
            if lo < vertex < hi:
                candidates.append((vertex, g(vertex)))
        z_star, value = max(candidates, key=lambda p: p[1])
        return float(z_star), float(value), 0.0

    if mode == CONCAVE_MODE:
        return _golden_section_max(g, lo, hi, tol)

    if mode == REVENUE_MODE:
        eps = 1e-10
        anchor = g(lo)   # exact value at the discontinuity (lo is 0 in practice)
        if hi <= lo + eps:
            return lo, anchor, 0.0
        z_in, v_in, gap = _golden_section_max(g, max(lo + eps, eps), hi, tol)
        if anchor >= v_in:
            return lo, anchor, 0.0
        return z_in, v_in, gap

    raise ValueError(f"unknown 1-D mode {mode!r}")


@dataclass
class DGConfig:
    """Double-greedy parameters: coordinate order (an explicit permutation, or
    a seed for a random one, or natural order when neither is given), the
    declared additive 1-D error budget delta, the bracket tolerance for the
    searching modes, and the 1-D subproblem mode."""

    order: Sequence[int] | None = None
    seed: int | None = None
    delta: float = 0.0
    mode: str = CONCAVE_MODE
    tol: float = 1e-10

    def resolve_order(self, n: int) -> list[int]:
        if self.order is not None:
            order = [int(i) for i in self.order]
            if sorted(order) != list(range(n)):
                raise ValueError("order must be a permutation of the coordinates")
            return order
        if self.seed is not None:
            return np.random.default_rng(self.seed).permutation(n).tolist()
        return list(range(n))


def double_greedy(f: ObjectiveHandle, box: BoxDomain,
                  cfg: DGConfig) -> tuple[Array, SolverTrace, SolverTrace]:
    """Two-particle coordinate ascent from the box corners.

    Per coordinate, each particle solves its 1-D maximization; the candidate
    with the larger gain is written into *both* particles (ties go to the
    lower-corner particle), so after n rounds the particles coincide exactly.
    Requires a submodular objective with f(lower) + f(upper) >= 0.
    """
    if not f.submodular:
        raise ValueError("requires an objective with the submodular flag")
    if f.dimension != box.dimension:
        raise ValueError("objective and box dimensions differ")
    n = box.dimension
    x = box.lower.copy()
    y = box.upper.copy()
    fx = f.value(x)
    fy = f.value(y)
    if fx + fy < -1e-9:
        raise ValueError("f(lower) + f(upper) must be nonnegative")
    order = cfg.resolve_order(n)
    meta = {"algorithm": "double_greedy", "delta": cfg.delta, "mode": cfg.mode,
            "order": list(order)}
    trace_x = SolverTrace(meta=dict(meta))
    trace_y = SolverTrace(meta=dict(meta))
    trace_x.append(0, 0.0, fx, feasibility_residual(box, x))
    trace_y.append(0, 0.0, fy, feasibility_residual(box, y))
    worst_gap = 0.0   # realized additive 1-D error bound across subproblems
    for step, j in enumerate(order, start=1):
        lo, hi = float(box.lower[j]), float(box.upper[j])
        try:
            za, va, gap_a = maximize_1d(f, x, j, lo, hi, cfg.mode, cfg.tol)
            zb, vb, gap_b = maximize_1d(f, y, j, lo, hi, cfg.mode, cfg.tol)
        except ValueError as e:
            raise SolverAbort(f"1-D maximization failed on coordinate {j}: {e}",
                              trace_x) from e
        worst_gap = max(worst_gap, gap_a, gap_b)
        delta_a = va - fx
        delta_b = vb - fy
        if delta_a >= delta_b:
            x[j] = za
            y[j] = za
            fx = va
            fy = f.value(y)
        else:
            x[j] = zb
            y[j] = zb
            fy = vb
            fx = f.value(x)
        t = step / n
        trace_x.append(step, t, fx, feasibility_residual(box, x))
        trace_y.append(step, t, fy, feasibility_residual(box, y))
    trace_x.meta["max_gap_bound"] = worst_gap
    trace_y.meta["max_gap_bound"] = worst_gap
    return x, trace_x, trace_y


def largest_abs_eigenvalue(H: Array, max_iter: int = 10000,
                           tol: float = 1e-13) -> float:
    """Power iteration estimate of max |eigenvalue| of a symmetric matrix.

    Iterates with H^2 so eigenvalue pairs of opposite sign cannot stall the
    iteration; deterministic start vector.
    """
    H = np.asarray(H, dtype=float)
    n = H.shape[0]
    v = 1.0 + 0.01 * np.arange(n)
    v /= np.linalg.norm(v)
    lam = 0.0
    for _ in range(max_iter):
        w = H @ (H @ v)
        norm = np.linalg.norm(w)
        if norm == 0.0:
            return 0.0
        v = w / norm
        new_lam = float(v @ (H @ (H @ v)))
        if abs(new_lam - lam) <= tol * max(1.0, abs(new_lam)):
            lam = new_lam
            break
        lam = new_lam
    return math.sqrt(max(lam, 0.0))


def curvature_bound_sampled(f: ObjectiveHandle, domain: BoxDomain,
                            trials: int = 100, seed: int = 0,
                            h: float = 1e-3) -> float:
    """Sampled bound on |d^2/dxi^2 f(x + xi v)| along nonnegative directions;
    a Lipschitz estimate for objectives without a closed-form Hessian."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    span = domain.upper - domain.lower
    for _ in range(trials):
        x = domain.lower + rng.random(domain.dimension) * span * (1.0 - 2 * h)
        v = rng.random(domain.dimension) * span
        nrm = np.linalg.norm(v)
        if nrm == 0:
            continue
        v /= nrm
        second = (f.value(x + 2 * h * v) - 2.0 * f.value(x + h * v) + f.value(x)) / h ** 2
        worst = max(worst, abs(float(second)))
    return worst
