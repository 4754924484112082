"""Observable variance of finite mm-spaces.

ObsVar_lambda(X) is the supremum of
    Var_lambda(f) = sum_ij w_i w_j lambda(|f_i - f_j|)
over the Lipschitz polytope {f : |f_i - f_j| <= d_ij}.  For convex lambda
the objective is convex, so the supremum sits at a vertex.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg, optimize
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .errors import DomainError, NumericalError, PreconditionError, SizeError
from .lambdas import Lambda, get_lambda
from .measures1d import Measure1D, var_lambda
from .mmspace import FiniteMMSpace, LipschitzFunction, pushforward_function

BRUTE_MAX_N = 5
BRUTE_MAX_POINTS = 60_000_000


@dataclass(frozen=True, eq=False)
class ObsVarResult:
    value: float
    maximizer: LipschitzFunction
    method: str
    restarts: int
    certificate: dict | None = None

    def to_json(self) -> dict:
        return {
            "schema": "mm-rigidity/obsvar@1",
            "value": self.value,
            "method": self.method,
            "restarts": self.restarts,
            "lip": self.maximizer.lip,
            "maximizer": self.maximizer.values.tolist(),
            "certificate": self.certificate,
        }


def variance_of(space: FiniteMMSpace, f, lam="t2") -> float:
    lam = get_lambda(lam)
    f = np.asarray(f, dtype=float)
    w = space.weight
    if lam.name == "t2":
        m = float(np.dot(w, f))
        return 2.0 * float(np.dot(w, (f - m) ** 2))
    return float(w @ lam(np.abs(f[:, None] - f[None, :])) @ w)


def _grad(space: FiniteMMSpace, f: np.ndarray, lam: Lambda) -> np.ndarray:
    w = space.weight
    diff = f[:, None] - f[None, :]
    k = lam.deriv(np.abs(diff)) * np.sign(diff)
    return 2.0 * w * (k @ w)


def project_lipschitz(space: FiniteMMSpace, f, order=None, max_sweeps: int | None = None) -> np.ndarray:
    """Clamp each value into the intervals [f_j - d_ij, f_j + d_ij] of the points
    already visited.  One sweep lands in the polytope (the intervals pairwise
    meet, so they share a point); further sweeps leave it unchanged.
    """
    d = space.dist
    n = space.n
    f = np.array(f, dtype=float)
    if not np.all(np.isfinite(f)):
        raise NumericalError("projection received non-finite values", state={"f": f.tolist()})
    order = np.arange(n) if order is None else np.asarray(order)
    cap = 50 * n * n if max_sweeps is None else max_sweeps
    for sweep in range(cap):
        before = f.copy()
        for pos in range(1, n):
            i = order[pos]
            prev = order[:pos]
            lo = np.max(f[prev] - d[prev, i])
            hi = np.min(f[prev] + d[prev, i])
            if lo > hi:
                # round-off only; the exact intervals intersect
                lo = hi = 0.5 * (lo + hi)
            f[i] = min(max(f[i], lo), hi)
        if np.array_equal(f, before):
            return f
    raise NumericalError(
        f"Lipschitz projection did not settle within {cap} sweeps",
        state={"f": f.tolist(), "sweeps": cap},
    )


def _nonredundant_pairs(space: FiniteMMSpace, tol: float = 1e-12) -> np.ndarray:
    """Pairs (i, j) whose constraint is not implied through a third point."""
    d = space.dist
    n = space.n
    iu, ju = np.triu_indices(n, 1)
    keep = np.ones(iu.size, dtype=bool)
    for k in range(n):
        via = d[iu, k] + d[k, ju]
        implied = (via <= d[iu, ju] + tol) & (iu != k) & (ju != k)
        keep &= ~implied
    return np.stack([iu[keep], ju[keep]], axis=1)


def _lp_vertex(space: FiniteMMSpace, g: np.ndarray, pairs: np.ndarray) -> np.ndarray | None:
    n = space.n
    m = pairs.shape[0]
    rows = np.repeat(np.arange(2 * m), 2)
    cols = np.empty(4 * m, dtype=int)
    vals = np.empty(4 * m)
    cols[0::4], cols[1::4] = pairs[:, 0], pairs[:, 1]
    vals[0::4], vals[1::4] = 1.0, -1.0
    cols[2::4], cols[3::4] = pairs[:, 1], pairs[:, 0]
    vals[2::4], vals[3::4] = 1.0, -1.0
    A = csr_matrix((vals, (rows, cols)), shape=(2 * m, n))
    b = np.repeat(space.dist[pairs[:, 0], pairs[:, 1]], 2)
    bounds = [(0.0, 0.0)] + [(None, None)] * (n - 1)
    res = optimize.linprog(-g, A_ub=A, b_ub=b, bounds=bounds, method="highs-ds")
    if res.status != 0:
        return None
    return np.asarray(res.x, dtype=float)


def _polish_vertex(space, f, lam, pairs, max_iter=200):
    """Vertex hopping: maximize the linearization, accept while the value rises.
    For convex lambda each hop cannot decrease the objective."""
    val = variance_of(space, f, lam)
    for _ in range(max_iter):
        g = _grad(space, f, lam)
        g = g - g.mean()
        cand = _lp_vertex(space, g, pairs)
        if cand is None:
            break
        cand = project_lipschitz(space, cand)
        cv = variance_of(space, cand, lam)
        if cv <= val * (1 + 1e-14) + 1e-15:
            break
        f, val = cand, cv
    return f, val


def _ascent(space, f, lam, iters=400):
    """Projected gradient ascent with backtracking."""
    f = project_lipschitz(space, f)
    val = variance_of(space, f, lam)
    step = space.diameter()
    for _ in range(iters):
        g = _grad(space, f, lam)
        gn = float(np.max(np.abs(g)))
        if gn == 0:
            break
        eta = step / gn
        improved = False
        while eta * gn > 1e-12 * max(1.0, space.diameter()):
            cand = project_lipschitz(space, f + eta * g)
            cv = variance_of(space, cand, lam)
            if cv > val + 1e-15:
                f, val, improved = cand, cv, True
                step = min(2 * eta * gn, space.diameter())
                break
            eta *= 0.5
        if not improved:
            break
    return f, val


def _starts(space: FiniteMMSpace, restarts: int, seed: int) -> list[np.ndarray]:
    starts = []
    for x0 in range(space.n):
        starts.append(space.dist[x0].copy())
        starts.append(-space.dist[x0].copy())
    diam = space.diameter()
    for r in range(restarts):
        rng = np.random.default_rng([seed, r])
        starts.append(rng.uniform(0.0, diam, space.n))
    return starts


def obsvar_maximize(space: FiniteMMSpace, lam="t2", restarts: int = 8, seed: int = 0,
                    threads: int = 1, polish_top: int = 4) -> ObsVarResult:
    """Multi-start ascent for the supremum of Var_lambda over the Lipschitz polytope.

    Starts: the signed distance functions +-d(x0, .), ranked by value with the
    best ``polish_top`` kept, plus ``restarts`` random points.  Each start is
    improved by LP vertex hops (accepted only when the value rises) and, for
    non-convex lambda, projected gradient ascent.
    """
    lam = get_lambda(lam)
    if restarts < 1:
        raise DomainError("restarts must be >= 1")
    if space.n == 1:
        return ObsVarResult(0.0, LipschitzFunction.on(space, np.zeros(1)), "vertex-heuristic", restarts)
    pairs = _nonredundant_pairs(space)
    cands = [s for s in _starts(space, 0, seed)]
    scores = [variance_of(space, c, lam) for c in cands]
    order = sorted(range(len(cands)), key=lambda k: (-scores[k], k))[:polish_top]
    starts = [cands[k] for k in order] + _starts(space, restarts, seed)[len(cands):]

    def run(f0):
        f = project_lipschitz(space, f0)
        val = variance_of(space, f, lam)
        for _ in range(4):
            prev = val
            if not lam.convex:
                f, val = _ascent(space, f, lam)
            f, val = _polish_vertex(space, f, lam, pairs)
            if lam.convex or val <= prev * (1 + 1e-12):
                break
        return f, val

    if threads > 1:
        with ThreadPoolExecutor(threads) as ex:
            results = list(ex.map(run, starts))
    else:
        results = [run(s) for s in starts]
    # max value, ties to the earliest start
    best = max(range(len(results)), key=lambda k: (results[k][1], -k))
    f = results[best][0]
    f = f - f.min()
    fun = LipschitzFunction.on(space, f)
    return ObsVarResult(variance_of(space, f, lam), fun, "vertex-heuristic", restarts,
                        {"start_index": best, "starts": len(starts)})


# --------------------------------------------------------------------------
# exhaustive grid oracle


def _grid_points(D: np.ndarray, chunk_rows: int = 20_000):
    """Yield chunks of integer vectors k (k_0 = 0) with |k_i - k_j| <= D_ij."""
    n = D.shape[0]
    rows = np.zeros((1, 1), dtype=np.int32)

    def expand(rows, k):
        lo = np.max(rows - D[:k, k][None, :], axis=1)
        hi = np.min(rows + D[:k, k][None, :], axis=1)
        cnt = np.maximum(hi - lo + 1, 0)
        rep = np.repeat(np.arange(rows.shape[0]), cnt)
        start = np.repeat(lo, cnt)
        offs = np.arange(rep.size) - np.repeat(np.cumsum(cnt) - cnt, cnt)
        return np.concatenate([rows[rep], (start + offs)[:, None].astype(np.int32)], axis=1)

    for k in range(1, n - 1):
        rows = expand(rows, k)
    if n == 1:
        yield rows
        return
    for c in range(0, rows.shape[0], chunk_rows):
        yield expand(rows[c : c + chunk_rows], n - 1)


def _objective_int(K: np.ndarray, w: np.ndarray, delta: float, lam: Lambda) -> np.ndarray:
    F = K.astype(float) * delta
    if lam.name == "t2":
        m = F @ w
        return 2.0 * ((F * F) @ w - m * m)
    n = K.shape[1]
    out = np.zeros(K.shape[0])
    for i in range(n):
        for j in range(i + 1, n):
            out += 2.0 * w[i] * w[j] * lam(np.abs(F[:, i] - F[:, j]))
    return out


def _count_points(D: np.ndarray) -> float:
    # crude upper bound: product of the ranges allowed by the pinned point
    return float(np.prod(2 * D[0, 1:] + 1))


def obsvar_bruteforce(space: FiniteMMSpace, lam="t2", delta: float = 1.0 / 64) -> ObsVarResult:
    """Exhaustive search of the delta-grid inside the Lipschitz polytope (n <= 5).

    For convex lambda the certificate is a rigorous bracket: the grid points
    of the relaxed polytope with bounds delta*floor(d/delta) + delta contain
    its vertices, so their best value is an upper bound on ObsVar.
    Otherwise the bound is the Lipschitz modulus of the objective times delta.
    """
    lam = get_lambda(lam)
    n = space.n
    if n > BRUTE_MAX_N:
        raise SizeError(f"brute force needs n <= {BRUTE_MAX_N} (got n={n})")
    if not delta > 0:
        raise DomainError("delta must be positive")
    if n == 1:
        return ObsVarResult(0.0, LipschitzFunction.on(space, np.zeros(1)), "bruteforce", 1,
                            {"lower": 0.0, "upper": 0.0, "delta": delta, "rigorous": True})
    w = space.weight
    Dt = np.floor(space.dist / delta + 1e-9).astype(np.int64)
    Dr = Dt + 1 if lam.convex else Dt
    np.fill_diagonal(Dr, 0)
    if _count_points(Dr) > BRUTE_MAX_POINTS * 50:
        raise SizeError(f"grid too fine for brute force (delta={delta}); raise delta")
    best_lo, arg_lo = -math.inf, None
    best_up = -math.inf
    for K in _grid_points(Dr):
        vals = _objective_int(K, w, delta, lam)
        best_up = max(best_up, float(vals.max()))
        diff = np.abs(K[:, :, None] - K[:, None, :])
        feas = np.all(diff <= Dt[None, :, :], axis=(1, 2))
        if np.any(feas):
            i = int(np.argmax(np.where(feas, vals, -np.inf)))
            if vals[i] > best_lo:
                best_lo, arg_lo = float(vals[i]), K[i].astype(float) * delta
    f = arg_lo - arg_lo.min()
    if lam.convex:
        upper = best_up
        rigorous = True
    else:
        lip = lam.lip(space.diameter()) if lam.lip else 1.0
        upper = best_lo + 2.0 * lip * delta
        rigorous = False
    cert = {"lower": best_lo, "upper": upper, "delta": delta, "rigorous": rigorous}
    return ObsVarResult(variance_of(space, f, lam), LipschitzFunction.on(space, f), "bruteforce", 1, cert)


def obsvar_vertices(space: FiniteMMSpace, lam="t2") -> tuple[float, np.ndarray]:
    """Exact maximum for convex lambda by enumerating polytope vertices.

    A vertex (with f_0 = 0) has n - 1 independent tight constraints, i.e. a
    spanning tree of pairs with signed differences; every tree and sign
    pattern is tried and infeasible results dropped.  Small n only.
    """
    lam = get_lambda(lam)
    n = space.n
    if n > 6:
        raise SizeError("vertex enumeration needs n <= 6")
    if n == 1:
        return 0.0, np.zeros(1)
    d = space.dist
    best = (-math.inf, None)
    for tree in _spanning_trees(n):
        for signs in range(1 << (n - 1)):
            f = _tree_values(tree, signs, d, n)
            if np.all(np.abs(f[:, None] - f[None, :]) <= d + 1e-12):
                v = variance_of(space, f, lam)
                if v > best[0]:
                    best = (v, f)
    return best


def _spanning_trees(n: int):
    """Spanning trees of K_n via Pruefer sequences."""
    import itertools

    for seq in itertools.product(range(n), repeat=n - 2):
        degree = [1] * n
        for x in seq:
            degree[x] += 1
        edges = []
        seq = list(seq)
        for x in seq:
            leaf = min(i for i in range(n) if degree[i] == 1)
            edges.append((leaf, x))
            degree[leaf] -= 1
            degree[x] -= 1
        u, v = [i for i in range(n) if degree[i] == 1]
        edges.append((u, v))
        yield edges


def _tree_values(tree, signs, d, n):
    adj = {i: [] for i in range(n)}
    for k, (a, b) in enumerate(tree):
        s = 1.0 if (signs >> k) & 1 else -1.0
        adj[a].append((b, s * d[a, b]))
        adj[b].append((a, -s * d[a, b]))
    f = np.full(n, np.nan)
    f[0] = 0.0
    stack = [0]
    while stack:
        a = stack.pop()
        for b, step in adj[a]:
            if np.isnan(f[b]):
                f[b] = f[a] + step
                stack.append(b)
    return f


# --------------------------------------------------------------------------
# checks


@dataclass(frozen=True, eq=False)
class BoundReport:
    passed: bool
    obsvar: float
    var_nu: float
    gap: float
    tol: float
    result: ObsVarResult = field(repr=False)
    evidence: dict | None = None

    def to_json(self) -> dict:
        return {"pass": self.passed, "obsvar": self.obsvar, "var_nu": self.var_nu,
                "gap": self.gap, "tol": self.tol, "evidence": self.evidence}


def verify_bound(space: FiniteMMSpace, nu: Measure1D, lam="t2", tol: float = 0.05,
                 restarts: int = 8, seed: int = 0, evidence: dict | None = None,
                 threads: int = 1) -> BoundReport:
    """ObsVar_lambda(X) <= Var_lambda(nu) + tol; gap = Var_lambda(nu) - ObsVar."""
    res = obsvar_maximize(space, lam, restarts, seed, threads)
    v = var_lambda(nu, lam)
    return BoundReport(bool(res.value <= v + tol), res.value, v, v - res.value, tol, res, evidence)


@dataclass(frozen=True, eq=False)
class FoliationReport:
    case: str
    p: int | None
    q: int | None
    residual_p: np.ndarray
    residual_q: np.ndarray
    alignment: np.ndarray | None
    tol: float
    p_unique: bool = False
    q_unique: bool = False

    def to_json(self) -> dict:
        return {
            "schema": "mm-rigidity/foliation@1",
            "case": self.case,
            "p": self.p,
            "q": self.q,
            "p_unique": self.p_unique,
            "q_unique": self.q_unique,
            "max_residual_p": float(self.residual_p.max()),
            "max_residual_q": float(self.residual_q.max()),
            "max_alignment": None if self.alignment is None else float(self.alignment.max()),
            "tol": self.tol,
            "residual_p": self.residual_p.tolist(),
            "residual_q": self.residual_q.tolist(),
        }


def _unique_extreme(space: FiniteMMSpace, f: np.ndarray, idx: int, near: np.ndarray, tol: float) -> bool:
    # the near-extremal points must cluster within tol of each other
    members = np.nonzero(near)[0]
    return bool(space.dist[np.ix_(members, members)].max() <= tol * (1 + 1e-9) + 1e-12)


def verify_foliation(space: FiniteMMSpace, f, tol: float) -> FoliationReport:
    """Check f = d(p, .) + f(p) and f = -d(q, .) + f(q) at the extreme points.

    An extreme is unique when all points within tol of the extreme value lie
    within tol of each other.  bounded: both identities hold at unique
    extremes; ray: one of them does; none otherwise.
    """
    vals = f.values if isinstance(f, LipschitzFunction) else np.asarray(f, dtype=float)
    d = space.dist
    p = int(np.argmin(vals))
    q = int(np.argmax(vals))
    fuzz = tol * 1e-9 + 1e-12
    rp = np.abs(vals - d[p] - vals[p])
    rq = np.abs(vals + d[q] - vals[q])
    p_u = _unique_extreme(space, vals, p, vals <= vals[p] + tol + fuzz, tol)
    q_u = _unique_extreme(space, vals, q, vals >= vals[q] - tol - fuzz, tol)
    ok_p = p_u and rp.max() <= tol + fuzz
    ok_q = q_u and rq.max() <= tol + fuzz
    align = None
    if ok_p and ok_q:
        align = np.maximum(d[p] + d[q] - d[p, q], 0.0)
        case = "bounded"
        return FoliationReport(case, p, q, rp, rq, align, tol, p_u, q_u)
    if ok_p:
        return FoliationReport("ray", p, None, rp, rq, None, tol, p_u, q_u)
    if ok_q:
        return FoliationReport("ray", None, q, rp, rq, None, tol, p_u, q_u)
    return FoliationReport("none", None, None, rp, rq, None, tol, p_u, q_u)


@dataclass(frozen=True)
class SpectralReport:
    lambda1: float
    obsvar_t2: float
    obsvar_centered: float
    product: float
    passed: bool
    convention: str
    eps: float

    def to_json(self) -> dict:
        return {"schema": "mm-rigidity/spectral@1", "lambda1": self.lambda1,
                "obsvar_t2": self.obsvar_t2, "obsvar_centered": self.obsvar_centered,
                "product": self.product, "pass": self.passed,
                "convention": self.convention, "eps": self.eps}


def graph_laplacian(space: FiniteMMSpace, eps: float, convention: str = "degree") -> np.ndarray:
    """Symmetric form matrix L with sum_ij L_ij f_i f_j = 1/2 sum_ij w_ij (f_i - f_j)^2.

    ``degree``: w_ij = (mu_i/deg_i + mu_j/deg_j) / d_ij^2 on the eps-graph, so
    that the energy of any 1-Lipschitz f is at most 1.  ``product``:
    w_ij = mu_i mu_j / d_ij^2.
    """
    d = space.dist
    mu = space.weight
    adj = (d <= eps * (1 + 1e-12)) & ~np.eye(space.n, dtype=bool)
    with np.errstate(divide="ignore"):
        inv2 = np.where(adj, 1.0 / np.where(adj, d, 1.0) ** 2, 0.0)
    if convention == "degree":
        deg = adj.sum(axis=1)
        share = np.where(deg > 0, mu / np.maximum(deg, 1), 0.0)
        W = (share[:, None] + share[None, :]) * inv2
    elif convention == "product":
        W = mu[:, None] * mu[None, :] * inv2
    else:
        raise DomainError(f"unknown Laplacian convention {convention!r}")
    return np.diag(W.sum(axis=1)) - W


def spectral_gap_check(space: FiniteMMSpace, eps: float, convention: str = "degree",
                       tol: float = 0.05, obsvar: ObsVarResult | None = None) -> SpectralReport:
    """lambda_1 of L f = lambda diag(mu) f times the centered ObsVar_{t^2} (= half
    the double-integral value), required to be <= 1 + tol."""
    adj = (space.dist <= eps * (1 + 1e-12))
    ncomp, _ = connected_components(csr_matrix(adj), directed=False)
    if ncomp != 1:
        raise PreconditionError(f"eps-graph at eps={eps} has {ncomp} components")
    L = graph_laplacian(space, eps, convention)
    ev = linalg.eigh(L, np.diag(space.weight), eigvals_only=True)
    lam1 = float(np.sort(ev)[1])
    if obsvar is None:
        obsvar = obsvar_maximize(space, "t2")
    ov = obsvar.value
    prod = lam1 * ov / 2.0
    return SpectralReport(lam1, ov, ov / 2.0, prod, bool(prod <= 1.0 + tol), convention, eps)


def distribution(space: FiniteMMSpace, f) -> Measure1D:
    return pushforward_function(space, f)
