"""Finite metric measure spaces.

Subsets are handled as boolean indicators at the API and as integer bitmasks
inside the enumerations (n <= 20).  All boundary quantities carry an explicit
scale ``eps``: on a finite space the infinitesimal boundary measure is
degenerate, so every profile here is the eps-surrogate
(mu(B_eps(A)) - mu(A)) / eps with closed neighbourhoods B_eps.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import shortest_path

from .errors import ContractError, DomainError, SchemaError, SizeError
from .measures1d import (
    DiscreteAtoms,
    Measure1D,
    ProfileCurve,
    SphericalModel,
    _effective_support,
)

SCHEMA_SPACE = "mm-rigidity/space@1"
METRIC_TOL = 1e-9
WEIGHT_TOL = 1e-12
_FUZZ = 1e-12
MAX_ENUM = 20


@dataclass(frozen=True, eq=False)
class FiniteMMSpace:
    dist: np.ndarray
    weight: np.ndarray
    coords: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        d = np.array(self.dist, dtype=float)
        w = np.array(self.weight, dtype=float)
        if d.ndim != 2 or d.shape[0] != d.shape[1] or w.shape != (d.shape[0],):
            raise ContractError("dist must be n x n and weight length n")
        n = w.size
        if n == 0:
            raise ContractError("space must have at least one point")
        if not np.all(np.isfinite(d)) or not np.all(np.isfinite(w)):
            raise ContractError("dist and weight must be finite")
        if np.any(np.abs(np.diag(d)) > 0):
            raise ContractError("dist must have zero diagonal")
        asym = np.abs(d - d.T)
        if np.any(asym > METRIC_TOL):
            i, j = np.unravel_index(int(np.argmax(asym)), asym.shape)
            raise ContractError(f"dist is not symmetric at ({i}, {j})")
        d = 0.5 * (d + d.T)
        off = d[~np.eye(n, dtype=bool)]
        if np.any(off <= 0):
            raise ContractError("distinct points must be at positive distance")
        witness = triangle_violation(d)
        if witness is not None:
            i, j, k, excess = witness
            raise ContractError(
                f"triangle inequality fails for ({i}, {j}, {k}): "
                f"d[{i},{j}] exceeds d[{i},{k}] + d[{k},{j}] by {excess:.3g}"
            )
        if np.any(w <= 0):
            raise ContractError("weights must be positive (full support)")
        if abs(math.fsum(w) - 1.0) > WEIGHT_TOL:
            raise ContractError(f"weights sum to {math.fsum(w)!r}, not 1")
        d.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "dist", d)
        object.__setattr__(self, "weight", w)
        if self.coords is not None:
            c = np.asarray(self.coords, dtype=float)
            c.setflags(write=False)
            object.__setattr__(self, "coords", c)

    @property
    def n(self) -> int:
        return int(self.weight.size)

    def diameter(self) -> float:
        return float(self.dist.max())

    def nn_distance(self) -> np.ndarray:
        """Nearest-neighbour distance of each point."""
        if self.n == 1:
            return np.zeros(1)
        d = self.dist + np.diag(np.full(self.n, np.inf))
        return d.min(axis=1)

    def to_json(self) -> dict:
        return {
            "schema": SCHEMA_SPACE,
            "n": self.n,
            "dist": self.dist.tolist(),
            "weight": self.weight.tolist(),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "FiniteMMSpace":
        from .schemas import validate

        validate(obj, "space")
        if len(obj["dist"]) != obj["n"] or len(obj["weight"]) != obj["n"]:
            raise SchemaError("field 'n' does not match the dist/weight sizes")
        if any(len(row) != obj["n"] for row in obj["dist"]):
            raise SchemaError("field 'dist' must be an n x n matrix")
        return cls(np.asarray(obj["dist"], dtype=float), np.asarray(obj["weight"], dtype=float))


def triangle_violation(d: np.ndarray, tol: float = METRIC_TOL):
    """(i, j, k, excess) for the worst violation d_ij > d_ik + d_kj + tol, else None."""
    n = d.shape[0]
    worst = (None, tol)
    for k in range(n):
        excess = d - (d[:, k][:, None] + d[k, :][None, :])
        idx = int(np.argmax(excess))
        val = excess.flat[idx]
        if val > worst[1]:
            i, j = divmod(idx, n)
            worst = ((i, j, k, float(val)), val)
    return worst[0]


@dataclass(frozen=True, eq=False)
class LipschitzFunction:
    values: np.ndarray
    lip: float

    @classmethod
    def on(cls, space: FiniteMMSpace, values) -> "LipschitzFunction":
        v = np.asarray(values, dtype=float)
        if v.shape != (space.n,):
            raise ContractError("function needs one value per point")
        return cls(v, lipschitz_constant(space, v))

    def pair_violating(self, space: FiniteMMSpace, bound: float = 1.0, tol: float = 1e-9):
        """First pair (i, j) with |f_i - f_j| > bound * d_ij + tol, or None."""
        diff = np.abs(self.values[:, None] - self.values[None, :]) - bound * space.dist
        bad = np.argwhere(diff > tol)
        return tuple(int(x) for x in bad[0]) if bad.size else None

    def to_csv(self) -> str:
        lines = ["index,value"] + [f"{i},{v!r}" for i, v in enumerate(self.values.tolist())]
        return "\n".join(lines) + "\n"


def lipschitz_constant(space: FiniteMMSpace, values) -> float:
    v = np.asarray(values, dtype=float)
    if space.n < 2:
        return 0.0
    iu = np.triu_indices(space.n, 1)
    return float(np.max(np.abs(v[iu[0]] - v[iu[1]]) / space.dist[iu]))


@dataclass(frozen=True, eq=False)
class SubsetMass:
    indicator: np.ndarray
    mass: float

    def members(self) -> list[int]:
        return np.nonzero(self.indicator)[0].tolist()


def _seq_mass(w: np.ndarray, ind: np.ndarray) -> float:
    sel = w[ind]
    return float(np.cumsum(sel)[-1]) if sel.size else 0.0


def subset(space: FiniteMMSpace, members) -> SubsetMass:
    """Subset from an index list or a boolean indicator."""
    arr = np.asarray(members)
    if arr.dtype == bool:
        if arr.shape != (space.n,):
            raise ContractError("indicator needs one entry per point")
        ind = arr.copy()
    else:
        ind = np.zeros(space.n, dtype=bool)
        if arr.size:
            ind[arr.astype(int)] = True
    return SubsetMass(ind, _seq_mass(space.weight, ind))


def _ball_rows(space: FiniteMMSpace, eps: float) -> np.ndarray:
    return space.dist <= eps + _FUZZ * max(1.0, eps)


def neighborhood(space: FiniteMMSpace, A: SubsetMass, eps: float) -> SubsetMass:
    """Closed eps-neighbourhood {x : d(x, A) <= eps}."""
    if eps < 0:
        raise DomainError("eps must be >= 0")
    if not np.any(A.indicator):
        return SubsetMass(np.zeros(space.n, dtype=bool), 0.0)
    ind = np.any(_ball_rows(space, eps)[A.indicator], axis=0)
    return SubsetMass(ind, _seq_mass(space.weight, ind))


def boundary_measure_eps(space: FiniteMMSpace, A: SubsetMass, eps: float) -> float:
    if not eps > 0:
        raise DomainError("eps must be positive")
    grown = neighborhood(space, A, eps)
    return max(grown.mass - A.mass, 0.0) / eps


def pushforward_function(space: FiniteMMSpace, f: LipschitzFunction | np.ndarray) -> DiscreteAtoms:
    """Distribution of f: atoms at the distinct values with summed weights."""
    vals = f.values if isinstance(f, LipschitzFunction) else np.asarray(f, dtype=float)
    return DiscreteAtoms(tuple(vals.tolist()), tuple(space.weight.tolist()))


# --------------------------------------------------------------------------
# subset enumeration


def _bit_tables(space: FiniteMMSpace, eps: float):
    """Masses of all 2^n subsets and masks of their closed eps-neighbourhoods."""
    n = space.n
    w = space.weight
    rows = _ball_rows(space, eps)
    nbr = (rows.astype(np.int64) << np.arange(n, dtype=np.int64)[None, :]).sum(axis=1)
    mass = np.zeros(1 << n)
    grow = np.zeros(1 << n, dtype=np.int64)
    for k in range(n):
        lo, hi = 1 << k, 1 << (k + 1)
        mass[lo:hi] = mass[:lo] + w[k]
        grow[lo:hi] = grow[:lo] | nbr[k]
    return mass, grow


def _mask_to_indicator(mask: int, n: int) -> np.ndarray:
    return np.array([(mask >> i) & 1 for i in range(n)], dtype=bool)


def _group_by_mass(mass: np.ndarray, value: np.ndarray, masks: np.ndarray):
    """Minimum value per distinct mass; ties broken by smallest mask."""
    key = np.round(mass / WEIGHT_TOL).astype(np.int64)
    order = np.lexsort((masks, value, key))
    key_s = key[order]
    first = np.concatenate([[True], key_s[1:] != key_s[:-1]])
    pick = order[first]
    return mass[pick], value[pick], masks[pick]


@dataclass(frozen=True, eq=False)
class ProfileResult:
    curve: ProfileCurve
    minimizers: list[np.ndarray]


def profile_bruteforce(space: FiniteMMSpace, eps: float, greedy: bool = False,
                       return_sets: bool = False):
    """Discrete eps-profile: for each achieved mass v in (0, 1), the least
    (mu(B_eps(A)) - mu(A)) / eps over subsets A of mass v."""
    if not eps > 0:
        raise DomainError("eps must be positive")
    n = space.n
    if n > MAX_ENUM:
        if not greedy:
            raise SizeError(f"profile enumeration needs n <= {MAX_ENUM} (got n={n}); use the greedy fallback")
        return _profile_greedy(space, eps, return_sets)
    if n < 2:
        curve = ProfileCurve(np.zeros(0), np.zeros(0), "discrete-eps", eps)
        return ProfileResult(curve, []) if return_sets else curve
    mass, grow = _bit_tables(space, eps)
    masks = np.arange(1 << n, dtype=np.int64)
    inner = (mass > WEIGHT_TOL) & (mass < 1.0 - WEIGHT_TOL)
    val = np.maximum(mass[grow] - mass, 0.0) / eps
    v, b, m = _group_by_mass(mass[inner], val[inner], masks[inner])
    curve = ProfileCurve(v, b, "discrete-eps", eps)
    if return_sets:
        return ProfileResult(curve, [_mask_to_indicator(int(x), n) for x in m])
    return curve


def _profile_greedy(space: FiniteMMSpace, eps: float, return_sets: bool):
    """Grow sets from every seed by the least boundary increment (upper bound)."""
    n = space.n
    rows = _ball_rows(space, eps)
    w = space.weight
    best: dict[int, tuple[float, float, np.ndarray]] = {}
    for seed in range(n):
        ind = np.zeros(n, dtype=bool)
        ind[seed] = True
        grown = rows[seed].copy()
        while True:
            m = _seq_mass(w, ind)
            if m >= 1.0 - WEIGHT_TOL:
                break
            val = max(_seq_mass(w, grown) - m, 0.0) / eps
            key = int(round(m / WEIGHT_TOL))
            if key not in best or val < best[key][1]:
                best[key] = (m, val, ind.copy())
            cand = np.nonzero(~ind)[0]
            new_grown = grown[None, :] | rows[cand]
            new_ind = ind[None, :].repeat(cand.size, 0)
            new_ind[np.arange(cand.size), cand] = True
            gm = (new_grown * w).sum(axis=1)
            im = (new_ind * w).sum(axis=1)
            j = int(np.argmin(gm - im))
            ind, grown = new_ind[j], new_grown[j]
    keys = sorted(best)
    curve = ProfileCurve(
        np.array([best[k][0] for k in keys]),
        np.array([best[k][1] for k in keys]),
        "discrete-eps",
        eps,
        upper_bound=True,
    )
    return ProfileResult(curve, [best[k][2] for k in keys]) if return_sets else curve


def cheeger_constant(space: FiniteMMSpace, eps: float, greedy: bool = False) -> float:
    """min over proper nonempty A of boundary_eps(A) / min(mu(A), 1 - mu(A))."""
    if not eps > 0:
        raise DomainError("eps must be positive")
    n = space.n
    if n < 2:
        raise ContractError("Cheeger constant needs at least two points")
    if n > MAX_ENUM:
        if not greedy:
            raise SizeError(f"Cheeger enumeration needs n <= {MAX_ENUM} (got n={n})")
        curve = _profile_greedy(space, eps, False)
        return float(np.min(curve.value / np.minimum(curve.v, 1.0 - curve.v)))
    mass, grow = _bit_tables(space, eps)
    inner = (mass > WEIGHT_TOL) & (mass < 1.0 - WEIGHT_TOL)
    val = np.maximum(mass[grow] - mass, 0.0) / eps
    ratio = val[inner] / np.minimum(mass[inner], 1.0 - mass[inner])
    return float(ratio.min())


def min_proper_boundary(space: FiniteMMSpace, eps: float) -> float:
    """Least eps-boundary over proper subsets; the finite stand-in for
    essential connectedness at scale eps."""
    curve = profile_bruteforce(space, eps)
    return float(curve.value.min()) if curve.value.size else 0.0


# --------------------------------------------------------------------------
# separation distance

SEP_EXACT_TWO = 16
SEP_EXACT_MULTI = 10


def separation(space: FiniteMMSpace, kappa: Sequence[float], heuristic: bool = False) -> float:
    """sup of min_{i != j} d(A_i, A_j) over disjoint A_i with mu(A_i) >= kappa_i."""
    kappa = [float(k) for k in kappa]
    if len(kappa) < 2:
        raise DomainError("separation needs at least two masses")
    if any(k <= 0 for k in kappa):
        raise DomainError("separation masses must be positive")
    if any(k > 1 for k in kappa) or math.fsum(kappa) > 1.0 + WEIGHT_TOL:
        return 0.0
    n = space.n
    if len(kappa) == 2:
        if n <= SEP_EXACT_TWO:
            return _sep_two_exact(space, kappa[0], kappa[1])
        if heuristic:
            return _sep_two_balls(space, kappa[0], kappa[1])
        raise SizeError(f"exact two-set separation needs n <= {SEP_EXACT_TWO} (got n={n})")
    if n <= SEP_EXACT_MULTI:
        return _sep_multi_exact(space, kappa)
    raise SizeError(f"exact separation of {len(kappa)} sets needs n <= {SEP_EXACT_MULTI} (got n={n})")


def _upper_level(dist_rows: np.ndarray, w: np.ndarray, k1: float) -> np.ndarray:
    """Per row: sup{t : mu(d >= t) >= k1}."""
    order = np.argsort(-dist_rows, axis=1, kind="stable")
    d_sorted = np.take_along_axis(dist_rows, order, axis=1)
    cum = np.cumsum(w[order], axis=1)
    idx = np.argmax(cum >= k1 - WEIGHT_TOL, axis=1)
    ok = cum[:, -1] >= k1 - WEIGHT_TOL
    return np.where(ok, d_sorted[np.arange(len(idx)), idx], 0.0)


def _sep_two_exact(space: FiniteMMSpace, k0: float, k1: float) -> float:
    # for a fixed A_0 the best A_1 collects the points farthest from A_0
    n = space.n
    w = space.weight
    mass = np.zeros(1 << n)
    dmin = np.full((1 << n, n), np.inf)
    for k in range(n):
        lo, hi = 1 << k, 1 << (k + 1)
        mass[lo:hi] = mass[:lo] + w[k]
        dmin[lo:hi] = np.minimum(dmin[:lo], space.dist[k][None, :])
    ok = mass >= k0 - WEIGHT_TOL
    ok[0] = False
    if not np.any(ok):
        return 0.0
    vals = _upper_level(dmin[ok], w, k1)
    return float(max(vals.max(), 0.0))


def _sep_two_balls(space: FiniteMMSpace, k0: float, k1: float) -> float:
    best = 0.0
    w = space.weight
    for x0 in range(space.n):
        order = np.argsort(space.dist[x0], kind="stable")
        cum = np.cumsum(w[order])
        m = int(np.argmax(cum >= k0 - WEIGHT_TOL))
        A0 = order[: m + 1]
        dmin = space.dist[A0].min(axis=0)
        best = max(best, float(_upper_level(dmin[None, :], w, k1)[0]))
    return best


def _sep_multi_exact(space: FiniteMMSpace, kappa: list[float]) -> float:
    n = space.n
    w = space.weight
    full = (1 << n) - 1
    masses = np.zeros(1 << n)
    for k in range(n):
        masses[1 << k : 1 << (k + 1)] = masses[: 1 << k] + w[k]
    cands = np.unique(space.dist[np.triu_indices(n, 1)])

    def feasible(t: float) -> bool:
        far = [sum(1 << j for j in range(n) if space.dist[i, j] < t - _FUZZ) for i in range(n)]

        @lru_cache(maxsize=None)
        def go(i: int, allowed: int) -> bool:
            if i == len(kappa):
                return True
            sub = allowed
            while sub:
                if masses[sub] >= kappa[i] - WEIGHT_TOL:
                    blocked = 0
                    bits = sub
                    while bits:
                        low = bits & -bits
                        blocked |= far[low.bit_length() - 1]
                        bits ^= low
                    if go(i + 1, allowed & ~blocked & ~sub):
                        return True
                sub = (sub - 1) & allowed
            return False

        return go(0, full)

    lo, hi = 0, len(cands) - 1
    if not feasible(cands[0]):
        return 0.0
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if feasible(cands[mid]):
            lo = mid
        else:
            hi = mid - 1
    return float(cands[lo])


# --------------------------------------------------------------------------
# generators


def path_space(nodes, weights=None) -> FiniteMMSpace:
    """Points of the line with the induced (chain) metric."""
    x = np.asarray(nodes, dtype=float)
    if weights is None:
        weights = np.full(x.size, 1.0 / x.size)
    w = np.asarray(weights, dtype=float)
    w = w / w.sum()
    return FiniteMMSpace(np.abs(x[:, None] - x[None, :]), w, coords=x)


def two_point(d: float = 1.0, p: float = 0.5) -> FiniteMMSpace:
    return FiniteMMSpace(np.array([[0.0, d], [d, 0.0]]), np.array([p, 1.0 - p]))


def single_point() -> FiniteMMSpace:
    return FiniteMMSpace(np.zeros((1, 1)), np.ones(1))


def cycle_space(m: int, edge: float = 1.0) -> FiniteMMSpace:
    """m-cycle with graph (hop) distance times edge."""
    i = np.arange(m)
    hop = np.abs(i[:, None] - i[None, :])
    return FiniteMMSpace(edge * np.minimum(hop, m - hop), np.full(m, 1.0 / m))


def circle_space(m: int) -> FiniteMMSpace:
    """m equally spaced points on the unit circle with the arc metric."""
    i = np.arange(m)
    hop = np.abs(i[:, None] - i[None, :])
    return FiniteMMSpace((2 * math.pi / m) * np.minimum(hop, m - hop), np.full(m, 1.0 / m))


def complete_space(m: int, d: float = 1.0) -> FiniteMMSpace:
    return FiniteMMSpace(d * (1.0 - np.eye(m)), np.full(m, 1.0 / m))


def star_space(leaves: int, arm: float = 1.0) -> FiniteMMSpace:
    """Center (index 0) joined to ``leaves`` leaves; uniform weights."""
    n = leaves + 1
    d = np.full((n, n), 2.0 * arm)
    d[0, :] = d[:, 0] = arm
    np.fill_diagonal(d, 0.0)
    return FiniteMMSpace(d, np.full(n, 1.0 / n))


def clusters_space(sizes: Sequence[int], within: float = 1.0, between: float = 10.0,
                   weights=None) -> FiniteMMSpace:
    labels = np.repeat(np.arange(len(sizes)), sizes)
    d = np.where(labels[:, None] == labels[None, :], within, between)
    np.fill_diagonal(d, 0.0)
    n = labels.size
    w = np.full(n, 1.0 / n) if weights is None else np.asarray(weights, dtype=float)
    return FiniteMMSpace(d, w / w.sum())


def ladder_space(m: int, h: float, length: float = 1.0) -> FiniteMMSpace:
    """Two parallel chains of m nodes at cross distance h (graph metric)."""
    x = np.linspace(0.0, length, m)
    along = np.abs(x[:, None] - x[None, :])
    d = np.block([[along, along + h], [along + h, along]])
    np.fill_diagonal(d, 0.0)
    return FiniteMMSpace(d, np.full(2 * m, 1.0 / (2 * m)), coords=np.concatenate([x, x]))


def random_space(n: int, rng: np.random.Generator, dim: int = 2) -> FiniteMMSpace:
    """Random points in the unit cube (Euclidean metric) with random weights."""
    pts = rng.random((n, dim))
    d = np.sqrt(((pts[:, None, :] - pts[None, :, :]) ** 2).sum(-1))
    w = rng.random(n) + 0.2
    return FiniteMMSpace(d, w / w.sum())


def interval(nu: Measure1D, resolution: int, mode: str = "uniform") -> FiniteMMSpace:
    """Path space approximating (R, |.|, nu).

    ``uniform``: equally spaced nodes over the support, endpoints included,
    weights proportional to the density.  ``midpoint``: cell midpoints with
    density weights.  ``quantile``: nodes at the levels (k + 1/2)/res, equal
    weights.
    """
    if resolution < 2:
        raise DomainError("resolution must be >= 2")
    if mode == "quantile":
        s = (np.arange(resolution) + 0.5) / resolution
        return path_space(np.asarray(nu.quantile(s)))
    lo, hi = _effective_support(nu)
    if mode == "uniform":
        x = np.linspace(lo, hi, resolution)
    elif mode == "midpoint":
        x = lo + (np.arange(resolution) + 0.5) * (hi - lo) / resolution
    else:
        raise DomainError(f"unknown interval mode {mode!r}")
    w = np.asarray(nu.density(x), dtype=float)
    if np.any(w <= 0):
        raise DomainError("density vanishes at a node; use the midpoint or quantile mode")
    return path_space(x, w)


def sphere_angle(N: float, resolution: int) -> FiniteMMSpace:
    """Midpoint path discretization of ([0, pi], sigma^N); pitch pi/res."""
    return interval(SphericalModel(N), resolution, mode="midpoint")


def parse_F(spec) -> FiniteMMSpace:
    if isinstance(spec, FiniteMMSpace):
        return spec
    if isinstance(spec, str) and spec.startswith("circle:"):
        return circle_space(int(spec.split(":", 1)[1]))
    raise DomainError(f"unknown fibre spec {spec!r}")


PHI_FUNCS: dict[str, Callable] = {
    "sin": np.sin,
    "one": np.ones_like,
    "cosh": np.cosh,
    "exp": np.exp,
}


def warped_product(phi, n: float, F, resolution: int, t_range=(0.0, math.pi)) -> FiniteMMSpace:
    """Discretized X = I x F with d mu = dt (x) phi(t)^n d mu_F.

    Nodes sit at midpoints of ``resolution`` cells of ``t_range`` crossed
    with the points of F.  Edges join every pair of nodes on the same or on
    adjacent t-levels, with length sqrt(dt^2 + (phi d_F)^2) (phi at the
    level or its mean over the two levels); the metric is the shortest-path
    metric of this graph.
    """
    if resolution < 2:
        raise DomainError("resolution must be >= 2")
    if isinstance(phi, str):
        if phi not in PHI_FUNCS:
            raise DomainError(f"unknown phi {phi!r}")
        phi = PHI_FUNCS[phi]
    Fs = parse_F(F)
    a, b = map(float, t_range)
    dt = (b - a) / resolution
    t = a + (np.arange(resolution) + 0.5) * dt
    ph = np.asarray(phi(t), dtype=float) * np.ones_like(t)
    if np.any(~np.isfinite(ph)) or np.any(ph <= 0):
        raise DomainError("phi must be positive on the t-grid")
    m = Fs.n
    idx = np.arange(resolution * m).reshape(resolution, m)
    rows, cols, vals = [], [], []
    iu = np.triu_indices(m, 1)
    for i in range(resolution):
        rows.append(idx[i][iu[0]])
        cols.append(idx[i][iu[1]])
        vals.append(ph[i] * Fs.dist[iu])
        if i + 1 < resolution:
            pm = 0.5 * (ph[i] + ph[i + 1])
            rr, cc = np.meshgrid(idx[i], idx[i + 1], indexing="ij")
            rows.append(rr.ravel())
            cols.append(cc.ravel())
            vals.append(np.sqrt(dt * dt + (pm * Fs.dist) ** 2).ravel())
    r = np.concatenate(rows)
    c = np.concatenate(cols)
    v = np.concatenate(vals)
    N = resolution * m
    graph = coo_matrix((v, (r, c)), shape=(N, N)).tocsr()
    dist = shortest_path(graph, method="D", directed=False)
    w = (ph**n)[:, None] * Fs.weight[None, :]
    w = (w / w.sum()).ravel()
    coords = np.stack([np.repeat(t, m), np.tile(np.arange(m), resolution)], axis=1)
    return FiniteMMSpace(dist, w, coords=coords)


def discretize_model(model: str, resolution: int, **kw) -> FiniteMMSpace:
    """Dispatch for ``interval``, ``sphere_angle`` and ``warped_product``."""
    if model == "interval":
        return interval(kw["nu"], resolution, kw.get("mode", "uniform"))
    if model == "sphere_angle":
        return sphere_angle(kw.get("N", 2.0), resolution)
    if model == "warped_product":
        return warped_product(kw["phi"], kw.get("n", 1.0), kw["F"], resolution,
                              kw.get("t_range", (0.0, math.pi)))
    raise DomainError(f"unknown model {model!r}")


def quotient(space: FiniteMMSpace, labels, dist_Y=None) -> tuple[FiniteMMSpace, np.ndarray]:
    """Image space Y of a surjection g (given by ``labels``) with pushed weights.

    ``dist_Y`` is the target metric; g is checked to be 1-Lipschitz.
    """
    g = np.asarray(labels, dtype=int)
    m = int(g.max()) + 1
    w = np.zeros(m)
    np.add.at(w, g, space.weight)
    if dist_Y is None:
        raise ContractError("quotient needs the target metric")
    Y = FiniteMMSpace(np.asarray(dist_Y, dtype=float), w)
    lhs = Y.dist[g[:, None], g[None, :]]
    if np.any(lhs > space.dist + METRIC_TOL):
        i, j = np.argwhere(lhs > space.dist + METRIC_TOL)[0]
        raise ContractError(f"map is not 1-Lipschitz on the pair ({i}, {j})")
    return Y, g
