"""Feasibility tests, an LP vertex oracle, Euclidean projection, and samplers
for down-closed polytopes ``{x : 0 <= x <= upper, A x <= b}``.

The LP solver is a dense-tableau simplex with Bland's anti-cycling rule: box
upper bounds are folded in as explicit rows, so every solve works on m + n
constraints plus slacks.  Slow but deterministic and dependency-free, which is
what the solvers and the vertex-enumeration cross-checks need.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .core import Array, BoxDomain, PolytopeDomain, as_point

_EPS_COST = 1e-9     # reduced-cost threshold for entering variables
_EPS_PIVOT = 1e-11   # smallest usable pivot element


@dataclass
class LPSolution:
    point: Array
    objective: float
    basis: list[int]   # active-constraint indices, see active_constraints()


def contains(P: PolytopeDomain, x, tol: float = 1e-9) -> bool:
    """True iff x satisfies the box and row constraints within tol."""
    x = as_point(x, P.dimension)
    if np.any(x < -tol) or np.any(x > P.upper + tol):
        return False
    if P.num_rows and np.any(P.A @ x > P.b + tol):
        return False
    return True


def feasibility_residual(domain, x) -> float:
    """Largest constraint violation of x; 0 when feasible."""
    x = as_point(x)
    if isinstance(domain, BoxDomain):
        res = max(np.max(domain.lower - x, initial=0.0),
                  np.max(x - domain.upper, initial=0.0))
        return float(max(res, 0.0))
    res = max(np.max(-x, initial=0.0), np.max(x - domain.upper, initial=0.0))
    if domain.num_rows:
        res = max(res, np.max(domain.A @ x - domain.b, initial=0.0))
    return float(max(res, 0.0))


def active_constraints(P: PolytopeDomain, x, tol: float = 1e-9) -> list[int]:
    """Indices of constraints tight at x.

    Convention: 0..m-1 are rows of A, m..m+n-1 the lower bounds x_i >= 0,
    m+n..m+2n-1 the upper bounds x_i <= upper_i.
    """
    x = as_point(x, P.dimension)
    m, n = P.num_rows, P.dimension
    out = []
    if m:
        out.extend(np.nonzero(np.abs(P.A @ x - P.b) <= tol)[0].tolist())
    out.extend((m + np.nonzero(np.abs(x) <= tol)[0]).tolist())
    out.extend((m + n + np.nonzero(np.abs(x - P.upper) <= tol)[0]).tolist())
    return sorted(out)


def _pivot_loop_numpy(T, z, basis, max_pivots):
    """Bland-rule pivoting until optimality.

    Returns 0 on optimum, -1 when the pivot guard trips, -2 on an unbounded
    column.  The jit kernel below performs identical arithmetic.
    """
    nrows = T.shape[0]
    ncols = z.shape[0]
    for _ in range(max_pivots):
        improving = np.nonzero(z > _EPS_COST)[0]
        if improving.size == 0:
            return 0
        j = int(improving[0])
        col = T[:, j]
        pos = col > _EPS_PIVOT
        if not np.any(pos):
            return -2
        ratios = np.full(nrows, np.inf)
        ratios[pos] = T[pos, -1] / col[pos]
        rmin = ratios.min()
        tied = np.nonzero(ratios <= rmin + 1e-10 * (1.0 + abs(rmin)))[0]
        i = int(tied[np.argmin(basis[tied])])
        T[i] /= T[i, j]
        fac = T[:, j].copy()
        fac[i] = 0.0
        T -= np.outer(fac, T[i])
        z -= z[j] * T[i, :ncols]
        basis[i] = j
    return -1


def linear_maximize(P: PolytopeDomain, c) -> LPSolution:
    """Return a vertex of P maximizing <c, x>.

    Dense-tableau simplex; Bland's rule picks the lowest-index entering
    variable and breaks ratio-test ties by the lowest basic-variable index,
    which makes the output deterministic and prevents cycling on degenerate
    vertices.
    """
    c = as_point(c, P.dimension)
    n, m = P.dimension, P.num_rows
    nrows = m + n
    ncols = n + nrows
    T = np.zeros((nrows, ncols + 1))
    if m:
        T[:m, :n] = P.A
    T[m:, :n] = np.eye(n)
    T[:, n:ncols] = np.eye(nrows)
    T[:m, -1] = P.b
    T[m:, -1] = P.upper
    z = np.zeros(ncols)
    z[:n] = c
    basis = np.arange(n, n + nrows)

    max_pivots = 1000 + 50 * ncols
    loop = _pivot_loop_jit if _HAVE_JIT else _pivot_loop_numpy
    status = int(loop(T, z, basis, max_pivots))
    if status == -1:
        raise RuntimeError(f"simplex cycling guard exceeded; last basis {basis.tolist()}")
    if status == -2:
        raise RuntimeError("unbounded LP; impossible on a box-bounded polytope")

    x = np.zeros(n)
    structural = basis < n
    x[basis[structural]] = T[structural, -1]
    np.clip(x, 0.0, P.upper, out=x)
    return LPSolution(point=x, objective=float(c @ x),
                      basis=active_constraints(P, x))


def enumerate_vertices(P: PolytopeDomain) -> list[Array]:
    """All vertices of P by brute-force enumeration of n-subsets of constraints.

    Test oracle for linear_maximize; guarded to n <= 10 and m <= 10.
    """
    n, m = P.dimension, P.num_rows
    if n > 10 or m > 10:
        raise ValueError("enumerate_vertices guard: requires n <= 10 and m <= 10")
    normals = np.vstack([P.A, np.eye(n), np.eye(n)]) if m else np.vstack([np.eye(n), np.eye(n)])
    offsets = np.concatenate([P.b, np.zeros(n), P.upper])
    vertices: list[Array] = []
    for combo in combinations(range(m + 2 * n), n):
        M = normals[list(combo)]
        r = offsets[list(combo)]
        try:
            v = np.linalg.solve(M, r)
        except np.linalg.LinAlgError:
            continue
        if not np.all(np.isfinite(v)) or np.max(np.abs(M @ v - r)) > 1e-8:
            continue
        if not contains(P, v, 1e-9):
            continue
        if not any(np.max(np.abs(v - w)) <= 1e-9 for w in vertices):
            vertices.append(v)
    return vertices


def project_box(box: BoxDomain, x) -> Array:
    return np.clip(as_point(x, box.dimension), box.lower, box.upper)


def project_polytope(P: PolytopeDomain, x, tol: float = 1e-9,
                     max_iter: int = 20000) -> Array:
    """Euclidean projection of x onto P via Dykstra's alternating projections.

    Plain alternating projection converges to some feasible point; Dykstra's
    correction terms make the limit the actual nearest point, which projected
    gradient ascent needs.  Raises when max_iter cycles do not reach tol.
    """
    x_cur = as_point(x, P.dimension).copy()
    m, n = P.num_rows, P.dimension
    row_norm2 = (P.A ** 2).sum(axis=1) if m else np.zeros(0)
    incr = np.zeros((m + 1, n))
    for _ in range(max_iter):
        x_prev = x_cur
        for s in range(m):
            y = x_cur + incr[s]
            viol = P.A[s] @ y - P.b[s]
            if viol > 0 and row_norm2[s] > 0:
                x_cur = y - (viol / row_norm2[s]) * P.A[s]
            else:
                x_cur = y
            incr[s] = y - x_cur
        y = x_cur + incr[m]
        x_cur = np.clip(y, 0.0, P.upper)
        incr[m] = y - x_cur
        if (np.max(np.abs(x_cur - x_prev)) <= tol * 1e-2
                and feasibility_residual(P, x_cur) <= tol):
            return x_cur
    raise RuntimeError(
        f"projection did not converge within {max_iter} cycles; "
        f"residual {feasibility_residual(P, x_cur):.3e}")


def _chord(x, d, s, w, upper):
    """Feasible parameter interval of the line x + theta*d inside the polytope.

    s = b - A x is the row slack, w = A d.  Returns (lo, hi), possibly empty.
    """
    tiny = 1e-13
    lo, hi = -np.inf, np.inf
    mask = np.abs(d) > tiny
    if mask.any():
        dm = d[mask]
        gap_up = (upper - x)[mask]
        gap_lo = x[mask]
        up = np.where(dm > 0, gap_up, -gap_lo) / dm
        dn = np.where(dm > 0, -gap_lo, gap_up) / dm
        hi = up.min()
        lo = dn.max()
    if w.size:
        rmask = np.abs(w) > tiny
        if rmask.any():
            r = s[rmask] / w[rmask]
            wm = w[rmask]
            if (wm > 0).any():
                hi = min(hi, r[wm > 0].min())
            if (wm < 0).any():
                lo = max(lo, r[wm < 0].max())
    return lo, hi


def _flip_inward(x, d, upper):
    """Point tight box coordinates of the direction back into the box.

    The chain starts at the origin, a vertex, where almost every raw direction
    has a zero-length chord; the flip is the one-step recovery.
    """
    d = np.where(x <= 1e-12, np.abs(d), d)
    return np.where(x >= upper - 1e-12, -np.abs(d), d)


def _naive_matvec(A, d):
    """Row dots with fixed left-to-right summation; bit-identical to the jit
    kernel's loop, unlike BLAS.  Only used on (rare) degenerate-chord retries."""
    m, n = A.shape
    out = np.zeros(m)
    for r in range(m):
        acc = 0.0
        for c in range(n):
            acc += A[r, c] * d[c]
        out[r] = acc
    return out


def _chain_steps_numpy(A, b, upper, x, Ax, dirs, W, unif, step_offset, burn_in,
                       thin, samples, emitted):
    """Reference chain implementation; mirrored exactly by the jit kernel."""
    for i in range(dirs.shape[0]):
        d = dirs[i]
        w = W[i]
        lo, hi = _chord(x, d, b - Ax, w, upper)
        if not hi - lo > 1e-12:
            d = _flip_inward(x, d, upper)
            w = _naive_matvec(A, d)
            lo, hi = _chord(x, d, b - Ax, w, upper)
        if hi - lo > 1e-12:
            theta = lo + unif[i] * (hi - lo)
            np.clip(x + theta * d, 0.0, upper, out=x)
            Ax += theta * w
        step = step_offset + i + 1
        if step > burn_in and (step - burn_in) % thin == 0:
            samples[emitted] = x
            emitted += 1
    return emitted

try:  # jit-compiled chain; the numpy path above is the behavioral reference
    from numba import njit as _njit

    @_njit(cache=True)
    def _chord_jit(x, d, Ax, b, upper, w):
        n = x.shape[0]
        m = w.shape[0]
        lo, hi = -np.inf, np.inf
        for c in range(n):
            dc = d[c]
            if dc > 1e-13:
                t1 = (upper[c] - x[c]) / dc
                t0 = -x[c] / dc
            elif dc < -1e-13:
                t1 = -x[c] / dc
                t0 = (upper[c] - x[c]) / dc
            else:
                continue
            if t1 < hi:
                hi = t1
            if t0 > lo:
                lo = t0
        for r in range(m):
            wr = w[r]
            if wr > 1e-13:
                t1 = (b[r] - Ax[r]) / wr
                if t1 < hi:
                    hi = t1
            elif wr < -1e-13:
                t0 = (b[r] - Ax[r]) / wr
                if t0 > lo:
                    lo = t0
        return lo, hi

    @_njit(cache=True)
    def _chain_steps_jit(A, b, upper, x, Ax, dirs, W, unif, step_offset, burn_in,
                         thin, samples, emitted):
        m, n = A.shape
        w = np.zeros(m)
        for i in range(dirs.shape[0]):
            d = dirs[i].copy()
            for r in range(m):
                w[r] = W[i, r]
            lo, hi = _chord_jit(x, d, Ax, b, upper, w)
            if not hi - lo > 1e-12:
                for c in range(n):
                    if x[c] <= 1e-12:
                        d[c] = abs(d[c])
                    if x[c] >= upper[c] - 1e-12:
                        d[c] = -abs(d[c])
                for r in range(m):
                    acc = 0.0
                    for c in range(n):
                        acc += A[r, c] * d[c]
                    w[r] = acc
                lo, hi = _chord_jit(x, d, Ax, b, upper, w)
            if hi - lo > 1e-12:
                theta = lo + unif[i] * (hi - lo)
                for c in range(n):
                    xc = x[c] + theta * d[c]
                    if xc < 0.0:
                        xc = 0.0
                    elif xc > upper[c]:
                        xc = upper[c]
                    x[c] = xc
                for r in range(m):
                    Ax[r] += theta * w[r]
            step = step_offset + i + 1
            if step > burn_in and (step - burn_in) % thin == 0:
                samples[emitted] = x
                emitted += 1
        return emitted

    @_njit(cache=True)
    def _pivot_loop_jit(T, z, basis, max_pivots):
        nrows = T.shape[0]
        ncols = z.shape[0]
        for _ in range(max_pivots):
            j = -1
            for col in range(ncols):
                if z[col] > _EPS_COST:
                    j = col
                    break
            if j < 0:
                return 0
            rmin = np.inf
            for r in range(nrows):
                if T[r, j] > _EPS_PIVOT:
                    ratio = T[r, ncols] / T[r, j]
                    if ratio < rmin:
                        rmin = ratio
            if rmin == np.inf:
                return -2
            cutoff = rmin + 1e-10 * (1.0 + abs(rmin))
            i = -1
            best = np.int64(2 ** 62)
            for r in range(nrows):
                if T[r, j] > _EPS_PIVOT:
                    ratio = T[r, ncols] / T[r, j]
                    if ratio <= cutoff and basis[r] < best:
                        best = basis[r]
                        i = r
            piv = T[i, j]
            for cidx in range(ncols + 1):
                T[i, cidx] /= piv
            for r in range(nrows):
                if r == i:
                    continue
                fac = T[r, j]
                if fac != 0.0:
                    for cidx in range(ncols + 1):
                        T[r, cidx] -= fac * T[i, cidx]
            zfac = z[j]
            for cidx in range(ncols):
                z[cidx] -= zfac * T[i, cidx]
            basis[i] = j
        return -1

    _HAVE_JIT = True
except ImportError:  # pragma: no cover - numba is an optional accelerator
    _HAVE_JIT = False


def hit_and_run(P: PolytopeDomain, k: int, seed: int,
                burn_in: int | None = None, thin: int | None = None,
                use_jit: bool | None = None) -> Array:
    """k approximately-uniform samples from P, returned as rows.

    The chain starts at the origin (feasible since b >= 0), discards
    ``burn_in`` steps (default 50 n) and keeps one state every ``thin`` steps
    (default n).  A degenerate chord is retried once with the direction
    flipped inward on tight box coordinates; if still degenerate the chain
    stays put for that step (a lazy move, so the uniform target is unchanged).
    All randomness is pre-drawn, so the jit-accelerated and plain numpy paths
    walk identical chains; deterministic for a fixed seed.
    """
    if k < 1:
        raise ValueError("need k >= 1 samples")
    n, m = P.dimension, P.num_rows
    if burn_in is None:
        burn_in = 50 * n
    if thin is None:
        thin = max(1, n)
    if thin < 1 or burn_in < 0:
        raise ValueError("need thin >= 1 and burn_in >= 0")
    jit = _HAVE_JIT if use_jit is None else (use_jit and _HAVE_JIT)
    stepper = _chain_steps_jit if jit else _chain_steps_numpy
    # separate child streams per purpose, so chains for different k share a
    # common prefix and best-of-k values grow monotonically in k
    rng_dirs = np.random.default_rng([seed, 0])
    rng_unif = np.random.default_rng([seed, 1])
    x = np.zeros(n)
    Ax = np.zeros(m)
    samples = np.empty((k, n))
    total = burn_in + k * thin
    emitted = 0
    done = 0
    block = 16384
    while done < total:
        nsteps = min(block, total - done)
        dirs = rng_dirs.standard_normal((nsteps, n))
        unif = rng_unif.random(nsteps)
        W = dirs @ P.A.T   # row products for the whole block, shared by both paths
        emitted = int(stepper(P.A, P.b, P.upper, x, Ax, dirs, W, unif,
                              done, burn_in, thin, samples, emitted))
        done += nsteps
        if m:
            Ax[:] = P.A @ x   # periodic resync against incremental drift
    return samples


def ratio_shrink(P: PolytopeDomain, x) -> Array:
    """Scale a nonnegative point into P: clamp to the box, then shrink by the
    worst row ratio t* = min(1, min_i b_i / (A x')_i over violable rows)."""
    x = as_point(x, P.dimension)
    if np.any(x < 0):
        raise ValueError("ratio_shrink expects a nonnegative point")
    xc = np.minimum(x, P.upper)
    t = 1.0
    if P.num_rows:
        ax = P.A @ xc
        pos = ax > 0
        if pos.any():
            t = min(1.0, float((P.b[pos] / ax[pos]).min()))
    return t * xc
