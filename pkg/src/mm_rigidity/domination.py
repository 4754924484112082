"""Monotone dominations between 1D measures and isoperimetric comparison checks."""
from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import ContractError, CoverageError, PreconditionError, SizeError
from .measures1d import (
    ANALYTIC_TOL,
    DEFAULT_GRID,
    GRID_TOL,
    DiscreteAtoms,
    Gaussian,
    GridDensity,
    Measure1D,
    ProfileCurve,
    SphericalModel,
    TransportMap,
    Uniform,
    _require_V,
    levy_distance,
    pushforward,
    sep_measure,
)
from .mmspace import (
    MAX_ENUM,
    WEIGHT_TOL,
    FiniteMMSpace,
    LipschitzFunction,
    _bit_tables,
    _mask_to_indicator,
    lipschitz_constant,
    neighborhood,
    pushforward_function,
    subset,
)

__all__ = [
    "TransportMap",
    "DominationReport",
    "build_monotone_transport",
    "sep_necessary_check",
    "ic_check",
    "icl_check",
    "iso_dominance_check",
]

DEFAULT_KAPPAS = (0.05, 0.1, 0.25, 0.5)
LIP_TOL = 1e-9


def _is_analytic(nu: Measure1D) -> bool:
    return isinstance(nu, (Gaussian, Uniform, SphericalModel))


def _has_atoms(nu: Measure1D) -> bool:
    return nu.has_atoms


@dataclass(frozen=True)
class SepRow:
    kappa0: float
    kappa1: float
    sep_target: float
    sep_source: float
    passed: bool


@dataclass(frozen=True, eq=False)
class DominationReport:
    verdict: str
    map: TransportMap | None = None
    witness: tuple[float, float] | None = None
    slope: float = math.nan
    slope_tol: float = math.nan
    levy: float = math.nan
    levy_tol: float = math.nan
    sep_checks: list[SepRow] = field(default_factory=list)
    note: str = ""

    def to_json(self, include_map: bool = False) -> dict:
        out = {
            "schema": "mm-rigidity/domination@1",
            "verdict": self.verdict,
            "slope": self.slope,
            "slope_tol": self.slope_tol,
            "levy": self.levy,
            "levy_tol": self.levy_tol,
            "witness": list(self.witness) if self.witness else None,
            "sep_checks": [
                {"kappa": [r.kappa0, r.kappa1], "sep_target": r.sep_target,
                 "sep_source": r.sep_source, "pass": r.passed}
                for r in self.sep_checks
            ],
            "note": self.note,
        }
        if include_map and self.map is not None:
            out["map"] = self.map.to_json()
        return out


def _quantile_samples(nu: Measure1D, s: np.ndarray) -> np.ndarray:
    return np.asarray(nu.quantile(s), dtype=float)


def _monotone_samples(source: Measure1D, target: Measure1D, m: int):
    """Breakpoints F~_source(s_k) and values F~_target(s_k), s_k = (k + 1/2)/m,
    closed off by the support endpoints where both are finite."""
    s = (np.arange(m) + 0.5) / m
    t = _quantile_samples(source, s)
    g = _quantile_samples(target, s)
    slo, shi = source.support()
    tlo, thi = target.support()
    if math.isfinite(slo) and math.isfinite(tlo) and slo < t[0]:
        t, g, s = np.concatenate([[slo], t]), np.concatenate([[tlo], g]), np.concatenate([[0.0], s])
    if math.isfinite(shi) and math.isfinite(thi) and shi > t[-1]:
        t, g, s = np.concatenate([t, [shi]]), np.concatenate([g, [thi]]), np.concatenate([s, [1.0]])
    keep = np.concatenate([[True], np.diff(t) > 0])
    return s[keep], t[keep], g[keep]


def build_monotone_transport(source: Measure1D, target: Measure1D, m: int = DEFAULT_GRID,
                             kappas=DEFAULT_KAPPAS, slope_tol: float | None = None,
                             levy_tol: float | None = None) -> DominationReport:
    """G = F~_target o V_source as a sampled monotone map, certified by its max chord slope."""
    if _has_atoms(source):
        raise PreconditionError("source must have a continuous CDF (it carries atoms)")
    analytic = _is_analytic(source) and _is_analytic(target)
    if slope_tol is None:
        slope_tol = ANALYTIC_TOL if analytic else 2.0 / m
    if levy_tol is None:
        levy_tol = 3.0 / m
    s, t, g = _monotone_samples(source, target, m)
    slo, shi = source.support()
    G = TransportMap(t, g, affine_left=not math.isfinite(slo), affine_right=not math.isfinite(shi))
    sl = G.slopes
    i = int(np.argmax(sl))
    slope = float(sl[i])
    rows = sep_necessary_check(source, target, kappas) if kappas else []
    if slope > 1.0 + slope_tol:
        return DominationReport("fails", G, (float(s[i]), float(s[i + 1])), slope, slope_tol,
                                sep_checks=rows, note="monotone map exceeds slope 1")
    image = pushforward(source, G)
    lev = levy_distance(image, target)
    if lev <= levy_tol:
        return DominationReport("dominates-monotone", G, None, slope, slope_tol, lev, levy_tol, rows)
    return DominationReport("undecided", G, None, slope, slope_tol, lev, levy_tol, rows,
                            note="round trip outside the Levy tolerance")


def sep_necessary_check(source: Measure1D, target: Measure1D, kappas=DEFAULT_KAPPAS,
                        tol: float = 1e-9) -> list[SepRow]:
    """Sep(target; k0, k1) <= Sep(source; k0, k1) for all pairs of the grid."""
    rows = []
    for k0, k1 in itertools.product(kappas, repeat=2):
        st = sep_measure(target, k0, k1)
        ss = sep_measure(source, k0, k1)
        rows.append(SepRow(float(k0), float(k1), st, ss, bool(st <= ss + tol)))
    return rows


# --------------------------------------------------------------------------
# IC


@dataclass(frozen=True, eq=False)
class ICReport:
    passed: bool
    min_deviation: float
    t_at_min: float
    v_at_min: float
    tol: float
    t: np.ndarray = field(repr=False)
    deviation: np.ndarray = field(repr=False)

    def to_json(self) -> dict:
        return {"pass": self.passed, "min_deviation": self.min_deviation,
                "t_at_min": self.t_at_min, "v_at_min": self.v_at_min, "tol": self.tol}


def ic_check(profile: ProfileCurve, nu: Measure1D, tol: float | None = None,
             n_t: int = 513, require: tuple[float, float] | None = None) -> ICReport:
    """I_X(V(t)) - V'(t) >= -tol at t = V^{-1}(v) for the profile masses v in (0, 1).

    Dense half-line profiles are thinned to about ``n_t`` of their own samples;
    nothing is interpolated, so a profile checked against its own measure
    deviates only by quantile round-off.
    """
    _require_V(nu)
    if tol is None:
        tol = 10 * GRID_TOL if isinstance(nu, GridDensity) else ANALYTIC_TOL
    v_prof = profile.v
    if v_prof.size == 0:
        raise CoverageError("profile has no samples")
    if require is not None and (v_prof[0] > require[0] + 1e-12 or v_prof[-1] < require[1] - 1e-12):
        raise CoverageError(
            f"profile covers v in [{v_prof[0]:.6g}, {v_prof[-1]:.6g}], needed [{require[0]}, {require[1]}]"
        )
    inside = (v_prof > 0) & (v_prof < 1)
    v = v_prof[inside]
    prof_val = profile.value[inside]
    if profile.convention == "half-line" and v.size > n_t:
        pick = np.unique(np.linspace(0, v.size - 1, n_t).round().astype(int))
        v, prof_val = v[pick], prof_val[pick]
    if v.size == 0:
        raise CoverageError("profile v-range misses (0, 1)")
    t = np.asarray(nu.quantile(v), dtype=float)
    dev = prof_val - np.asarray(nu.density(t), dtype=float)
    i = int(np.argmin(dev))
    return ICReport(bool(dev[i] >= -tol), float(dev[i]), float(t[i]), float(v[i]), tol, t, dev)


# --------------------------------------------------------------------------
# ICL


@dataclass(frozen=True, eq=False)
class ICLReport:
    passed: bool
    tol: float
    counterexample: tuple[list[int], float, float] | None
    worst_excess: float
    warning: str | None = None

    def to_json(self) -> dict:
        ce = None
        if self.counterexample:
            ce = {"A": self.counterexample[0], "a": self.counterexample[1], "b": self.counterexample[2]}
        return {"pass": self.passed, "tol": self.tol, "counterexample": ce,
                "worst_excess": self.worst_excess, "warning": self.warning}


def _family_exhaustive(space: FiniteMMSpace):
    if space.n > MAX_ENUM:
        raise SizeError(f"exhaustive ICL needs n <= {MAX_ENUM} (got n={space.n})")
    return None


def _sublevel_sets(space: FiniteMMSpace, f) -> np.ndarray:
    vals = f.values if isinstance(f, LipschitzFunction) else np.asarray(f, dtype=float)
    levels = np.unique(vals)
    return vals[None, :] <= levels[:, None]


def _icl_pair(space, nu, a, b, family, tol):
    """(excess, members) of the worst closed set for one (a, b), or None if none violates."""
    Va = float(nu.cdf(a))
    Vb = float(nu.cdf(b))
    eps = b - a
    if family is None:
        mass, grow = _bit_tables(space, eps)
        ok = (mass >= Va - WEIGHT_TOL) & (mass > 0)
        excess = np.where(ok, Vb - mass[grow], -np.inf)
        bad = np.nonzero(excess > tol)[0]
        if bad.size == 0:
            return float(excess.max()), None
        mask = int(bad[0])
        members = np.nonzero(_mask_to_indicator(mask, space.n))[0].tolist()
        return float(excess.max()), members
    worst = -math.inf
    first = None
    for ind in family:
        A = subset(space, ind)
        if A.mass <= 0 or A.mass < Va - WEIGHT_TOL:
            continue
        ex = Vb - neighborhood(space, A, eps).mass
        worst = max(worst, ex)
        if ex > tol and first is None:
            first = A.members()
    return worst, first


def icl_check(space: FiniteMMSpace, nu: Measure1D, ab_grid, mode: str = "exhaustive",
              f=None, tol: float | None = None, threads: int = 1) -> ICLReport:
    """V(a) <= mu(A) implies V(b) <= mu(B_{b-a}(A)) + tol over closed A of the family.

    ``mode`` is ``exhaustive`` (all subsets, n <= 20) or ``sublevel`` (sets
    {f <= c}).  The default tol is twice the largest nearest-neighbour distance.
    """
    pairs = [(float(a), float(b)) for a, b in ab_grid]
    if any(b < a for a, b in pairs):
        raise ContractError("ab_grid pairs need a <= b")
    if tol is None:
        tol = 2.0 * float(space.nn_distance().max())
    if mode == "exhaustive":
        family = _family_exhaustive(space)
    elif mode == "sublevel":
        if f is None:
            raise ContractError("sublevel mode needs a function")
        family = _sublevel_sets(space, f)
    else:
        raise ContractError(f"unknown ICL mode {mode!r}")
    warning = None
    positive = [b - a for a, b in pairs if b > a]
    if positive and space.n > 1:
        pitch = float(space.nn_distance().min())
        if min(positive) < pitch:
            warning = (f"scale b-a={min(positive):.3g} is below the minimum point spacing "
                       f"{pitch:.3g}; neighbourhoods cannot grow there")

    def run(p):
        return _icl_pair(space, nu, p[0], p[1], family, tol)

    if threads > 1:
        with ThreadPoolExecutor(threads) as ex:
            results = list(ex.map(run, pairs))
    else:
        results = [run(p) for p in pairs]
    worst = max((r[0] for r in results), default=-math.inf)
    # deterministic merge: first violating pair in grid order
    for (a, b), (_, members) in zip(pairs, results):
        if members is not None:
            return ICLReport(False, tol, (members, a, b), worst, warning)
    return ICLReport(True, tol, None, worst, warning)


# --------------------------------------------------------------------------
# iso-dominance on a family of 1-Lipschitz functions


@dataclass(frozen=True)
class IsoDomEntry:
    index: int
    verdict: str
    slope: float
    scale: float
    witness: tuple[float, float] | None


@dataclass(frozen=True, eq=False)
class IsoDomReport:
    passed: bool
    entries: list[IsoDomEntry]
    slope_tol: float

    def to_json(self) -> dict:
        return {
            "pass": self.passed,
            "slope_tol": self.slope_tol,
            "entries": [
                {"index": e.index, "verdict": e.verdict, "slope": e.slope, "scale": e.scale,
                 "witness": list(e.witness) if e.witness else None}
                for e in self.entries
            ],
        }


def spread_atoms(atoms: DiscreteAtoms) -> tuple[np.ndarray, np.ndarray]:
    """Cells around each atom reaching halfway to its neighbours (mirrored at the ends).

    Returns (edges, masses); the spread measure is uniform on each cell.
    """
    x = np.asarray(atoms.locations)
    w = np.asarray(atoms.masses)
    if x.size == 1:
        return np.array([x[0], x[0]]), w
    gaps = np.diff(x)
    edges = np.concatenate([[x[0] - gaps[0] / 2], x[:-1] + gaps / 2, [x[-1] + gaps[-1] / 2]])
    return edges, w


def _spread_quantile(edges: np.ndarray, w: np.ndarray, s: np.ndarray) -> np.ndarray:
    cum = np.concatenate([[0.0], np.cumsum(w)])
    cum[-1] = 1.0
    k = np.clip(np.searchsorted(cum, s, side="left") - 1, 0, w.size - 1)
    return edges[k] + (s - cum[k]) / w[k] * (edges[k + 1] - edges[k])


def coarse_slope(t: np.ndarray, g: np.ndarray, scale: float) -> tuple[float, tuple[int, int]]:
    """Max chord slope over sample pairs at least ``scale`` apart (capped at the span)."""
    scale = min(scale, float(t[-1] - t[0]))
    j = np.searchsorted(t, t + scale * (1 - 1e-12), side="left")
    ok = np.nonzero(j < t.size)[0]
    sl = (g[j[ok]] - g[ok]) / (t[j[ok]] - t[ok])
    k = int(np.argmax(sl))
    return float(sl[k]), (int(ok[k]), int(j[ok[k]]))


def iso_dominance_check(space: FiniteMMSpace, nu: Measure1D, f_family, m: int = DEFAULT_GRID,
                        slope_tol: float = 0.1, cells: float = 4.0, threads: int = 1) -> IsoDomReport:
    """Monotone transport from nu to the distribution of each f.

    The distribution of f is atomic, so its atoms are spread uniformly over
    their cells and the map G = F~_spread o V_nu is certified by chord slopes
    at the scale of ``cells`` spread cells: pass iff that slope <= 1 + slope_tol.
    """
    if nu.has_atoms:
        raise PreconditionError("nu must have a continuous CDF")
    funcs = []
    for f in f_family:
        vals = f.values if isinstance(f, LipschitzFunction) else np.asarray(f, dtype=float)
        if lipschitz_constant(space, vals) > 1.0 + LIP_TOL:
            pair = LipschitzFunction(vals, math.inf).pair_violating(space)
            raise ContractError(f"function is not 1-Lipschitz on the pair {pair}")
        funcs.append(vals)
    s = (np.arange(m) + 0.5) / m
    t = np.asarray(nu.quantile(s), dtype=float)

    def run(item):
        idx, vals = item
        atoms = pushforward_function(space, vals)
        if len(atoms.locations) == 1:
            return IsoDomEntry(idx, "dominates-monotone", 0.0, 0.0, None)
        edges, w = spread_atoms(atoms)
        g = _spread_quantile(edges, w, s)
        scale = cells * float(np.max(np.diff(edges)))
        slope, (i, j) = coarse_slope(t, g, scale)
        verdict = "dominates-monotone" if slope <= 1.0 + slope_tol else "fails"
        wit = None if verdict != "fails" else (float(s[i]), float(s[j]))
        return IsoDomEntry(idx, verdict, slope, scale, wit)

    items = list(enumerate(funcs))
    if threads > 1:
        with ThreadPoolExecutor(threads) as ex:
            entries = list(ex.map(run, items))
    else:
        entries = [run(it) for it in items]
    return IsoDomReport(all(e.verdict == "dominates-monotone" for e in entries), entries, slope_tol)
