"""Borel probability measures on the real line.

Every measure exposes its CDF ``F``, the generalized inverse
``F~(s) = inf{t : s <= F(t)}`` and, when absolutely continuous, a density.
The module-level functions are the public operations; the classes are plain
immutable containers with the per-kind formulas.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import integrate, special

from .errors import (
    ConstructionError,
    ContractError,
    DivergenceError,
    DomainError,
    NotInVError,
    ResolutionError,
    SchemaError,
)
from .lambdas import Lambda, get_lambda

SCHEMA_MEASURE = "mm-rigidity/measure@1"
MASS_TOL = 1e-12
DEFAULT_GRID = 2048
GRID_TOL = 1e-6
ANALYTIC_TOL = 1e-9
_SQRT2 = math.sqrt(2.0)
_Z_MAX = 40.0


def _phi_cdf(z):
    return 0.5 * special.erfc(-np.asarray(z, dtype=float) / _SQRT2)


def _phi_pdf(z):
    z = np.asarray(z, dtype=float)
    return np.exp(-0.5 * z * z) / math.sqrt(2.0 * math.pi)


def _bisect_increasing(fun, target, lo, hi, strict=False, tol=1e-13):
    """Vectorized bisection for inf{t : fun(t) >= target} (``> target`` if strict).

    Keeps the invariant ``fun(lo)`` below and ``fun(hi)`` at/above the target, and
    returns ``hi``.  ``lo`` and ``hi`` are arrays broadcast against ``target``.
    """
    target = np.asarray(target, dtype=float)
    lo = np.broadcast_to(np.asarray(lo, dtype=float), target.shape).copy()
    hi = np.broadcast_to(np.asarray(hi, dtype=float), target.shape).copy()
    for _ in range(200):
        width = hi - lo
        if np.all(width <= tol * np.maximum(1.0, np.abs(hi))):
            break
        mid = 0.5 * (lo + hi)
        val = fun(mid)
        up = val > target if strict else val >= target
        hi = np.where(up, mid, hi)
        lo = np.where(up, lo, mid)
    return hi


_SIGN = np.int64(-0x8000000000000000)


def _float_key(x):
    i = np.asarray(x, dtype=np.float64).view(np.int64)
    return np.where(i < 0, _SIGN - i, i)


def _key_float(k):
    i = np.where(k < 0, _SIGN - k, k).astype(np.int64)
    return i.view(np.float64)


def _snap_min(cdf, s, t):
    """Smallest double ``x`` near ``t`` with ``cdf(x) >= s``.

    Closed-form and bisection quantiles are accurate to a few ulps only; this
    makes both quantile/CDF inequalities hold exactly in floating point.
    """
    s = np.asarray(s, dtype=float)
    t = np.array(np.broadcast_to(t, s.shape), dtype=float)
    ok = np.isfinite(t) & (s > 0)
    if not np.any(ok):
        return t
    ss = s[ok]
    hi = _float_key(t[ok])
    step = np.ones_like(hi)
    for _ in range(64):
        bad = np.asarray(cdf(_key_float(hi))) < ss
        if not np.any(bad):
            break
        hi = np.where(bad, hi + step, hi)
        step = np.where(bad, step * 2, step)
    lo = hi - 1
    step = np.ones_like(hi)
    for _ in range(64):
        above = np.asarray(cdf(_key_float(lo))) >= ss
        if not np.any(above):
            break
        hi = np.where(above, lo, hi)
        lo = np.where(above, lo - step, lo)
        step = np.where(above, step * 2, step)
    for _ in range(64):
        gap = hi - lo
        if np.all(gap <= 1):
            break
        mid = lo + gap // 2
        up = np.asarray(cdf(_key_float(mid))) >= ss
        hi = np.where(up & (gap > 1), mid, hi)
        lo = np.where(~up & (gap > 1), mid, lo)
    t[ok] = _key_float(hi)
    return t


# --------------------------------------------------------------------------
# measure kinds


class Measure1D:
    """Common interface; subclasses fill in the formulas."""

    kind = "abstract"

    # support as a closed interval (may be infinite)
    def support(self) -> tuple[float, float]:
        raise NotImplementedError

    def cdf(self, t):
        raise NotImplementedError

    def cdf_left(self, t):
        """nu((-inf, t))."""
        return self.cdf(t)

    def density(self, t):
        raise NotInVError(f"{self.kind} measure has no density")

    @property
    def has_atoms(self) -> bool:
        return False

    def in_V(self) -> bool:
        """Absolutely continuous with connected support."""
        return not self.has_atoms

    def _bracket(self, s):
        lo, hi = self.support()
        if not math.isfinite(lo):
            lo = -1.0
            while float(np.max(self.cdf(lo))) >= float(np.min(s)) and lo > -1e300:
                lo *= 2.0
        if not math.isfinite(hi):
            hi = 1.0
            while float(np.min(self.cdf(hi))) < float(np.max(s)) and hi < 1e300:
                hi *= 2.0
        return lo, hi

    def quantile(self, s):
        """F~(s) for s in (0, 1]; bisection on the CDF."""
        s = np.asarray(s, dtype=float)
        lo, hi = self._bracket(np.atleast_1d(s))
        out = _bisect_increasing(self.cdf, s, lo, hi)
        at_lo = np.asarray(self.cdf(lo)) >= s
        return np.where(at_lo, lo, _snap_min(self.cdf, s, out))

    def upper_quantile(self, p):
        """inf{t : F(t) > p} for p in [0, 1)."""
        p = np.asarray(p, dtype=float)
        lo, hi = self._bracket(np.atleast_1d(np.minimum(p + 1e-300, 1.0)))
        out = _bisect_increasing(self.cdf, p, lo, hi, strict=True)
        at_lo = np.asarray(self.cdf(lo)) > p
        return np.where(at_lo, lo, out)

    def to_json(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class Gaussian(Measure1D):
    """Normal law, optionally truncated to [lo, hi] and renormalized."""

    mean: float = 0.0
    sd: float = 1.0
    lo: float = -math.inf
    hi: float = math.inf
    kind = "gaussian"

    def __post_init__(self):
        if not self.sd > 0:
            raise DomainError("Gaussian sd must be positive")
        if not self.lo < self.hi:
            raise DomainError("Gaussian truncation needs lo < hi")

    @property
    def truncated(self) -> bool:
        return math.isfinite(self.lo) or math.isfinite(self.hi)

    def _z(self, t):
        return (np.asarray(t, dtype=float) - self.mean) / self.sd

    @property
    def _zab(self):
        za = max((self.lo - self.mean) / self.sd, -_Z_MAX)
        zb = min((self.hi - self.mean) / self.sd, _Z_MAX)
        return za, zb

    @property
    def _mass(self):
        za, zb = self._zab
        if not self.truncated:
            return 1.0
        return float(_phi_cdf(zb) - _phi_cdf(za))

    def support(self):
        return (self.lo, self.hi)

    def cdf(self, t):
        if not self.truncated:
            return _phi_cdf(self._z(t))
        za, _ = self._zab
        val = (_phi_cdf(self._z(t)) - _phi_cdf(za)) / self._mass
        return np.clip(val, 0.0, 1.0)

    def density(self, t):
        t = np.asarray(t, dtype=float)
        val = _phi_pdf(self._z(t)) / (self.sd * self._mass)
        return np.where((t >= self.lo) & (t <= self.hi), val, 0.0)

    def quantile(self, s):
        s = np.asarray(s, dtype=float)
        za, zb = self._zab
        z = _bisect_increasing(lambda z: self.cdf(self.mean + self.sd * z), s, za, zb)
        z = np.where(s <= 0.0, za, z)
        return _snap_min(self.cdf, s, self.mean + self.sd * z)

    def upper_quantile(self, p):
        p = np.asarray(p, dtype=float)
        za, zb = self._zab
        z = _bisect_increasing(
            lambda z: self.cdf(self.mean + self.sd * z), p, za, zb, strict=True
        )
        return self.mean + self.sd * z

    def moments(self) -> tuple[float, float]:
        """(mean, variance), with the truncated-normal formulas when needed."""
        if not self.truncated:
            return self.mean, self.sd**2
        a = (self.lo - self.mean) / self.sd
        b = (self.hi - self.mean) / self.sd
        z = self._mass
        pa = float(_phi_pdf(a)) if math.isfinite(a) else 0.0
        pb = float(_phi_pdf(b)) if math.isfinite(b) else 0.0
        ta = a * pa if math.isfinite(a) else 0.0
        tb = b * pb if math.isfinite(b) else 0.0
        m = (pa - pb) / z
        var = 1.0 + (ta - tb) / z - m * m
        return self.mean + self.sd * m, self.sd**2 * var

    def to_json(self):
        out = {"schema": SCHEMA_MEASURE, "kind": self.kind, "mean": self.mean, "sd": self.sd}
        if self.truncated:
            out["lo"] = self.lo
            out["hi"] = self.hi
        return out


@dataclass(frozen=True)
class Uniform(Measure1D):
    a: float = 0.0
    b: float = 1.0
    kind = "uniform"

    def __post_init__(self):
        if not self.b > self.a:
            raise DomainError("Uniform needs b > a")

    def support(self):
        return (self.a, self.b)

    def cdf(self, t):
        return np.clip((np.asarray(t, dtype=float) - self.a) / (self.b - self.a), 0.0, 1.0)

    def density(self, t):
        t = np.asarray(t, dtype=float)
        return np.where((t >= self.a) & (t <= self.b), 1.0 / (self.b - self.a), 0.0)

    def quantile(self, s):
        s = np.asarray(s, dtype=float)
        return _snap_min(self.cdf, s, self.a + np.clip(s, 0.0, 1.0) * (self.b - self.a))

    def upper_quantile(self, p):
        return self.quantile(p)

    def to_json(self):
        return {"schema": SCHEMA_MEASURE, "kind": self.kind, "a": self.a, "b": self.b}


@dataclass(frozen=True)
class SphericalModel(Measure1D):
    """sigma^N on [0, pi] with density sin^(N-1) / C_N."""

    N: float = 2.0
    kind = "spherical"

    def __post_init__(self):
        if not self.N > 1:
            raise DomainError("SphericalModel needs N > 1")

    @property
    def normalizer(self) -> float:
        # C_N = int_0^pi sin^(N-1) = B(N/2, 1/2)
        return float(special.beta(self.N / 2.0, 0.5))

    def support(self):
        return (0.0, math.pi)

    def cdf(self, t):
        theta = np.clip(np.asarray(t, dtype=float), 0.0, math.pi)
        u = 0.5 * (1.0 - np.cos(theta))
        return special.betainc(self.N / 2.0, self.N / 2.0, u)

    def density(self, t):
        t = np.asarray(t, dtype=float)
        inside = (t >= 0.0) & (t <= math.pi)
        s = np.sin(np.clip(t, 0.0, math.pi))
        with np.errstate(divide="ignore", invalid="ignore"):
            val = np.power(np.maximum(s, 0.0), self.N - 1.0) / self.normalizer
        return np.where(inside, val, 0.0)

    def to_json(self):
        return {"schema": SCHEMA_MEASURE, "kind": self.kind, "N": self.N}


@dataclass(frozen=True)
class DiscreteAtoms(Measure1D):
    locations: tuple[float, ...]
    masses: tuple[float, ...]
    kind = "atoms"

    def __post_init__(self):
        loc = np.asarray(self.locations, dtype=float)
        mass = np.asarray(self.masses, dtype=float)
        if loc.ndim != 1 or loc.shape != mass.shape or loc.size == 0:
            raise ContractError("atoms need matching nonempty location/mass lists")
        if np.any(mass < 0) or not np.all(np.isfinite(loc)):
            raise ContractError("atom masses must be nonnegative, locations finite")
        if abs(math.fsum(mass) - 1.0) > MASS_TOL:
            raise ContractError(f"atom masses sum to {math.fsum(mass)!r}, not 1")
        order = np.argsort(loc, kind="stable")
        loc, mass = loc[order], mass[order]
        uniq, inv = np.unique(loc, return_inverse=True)
        merged = np.zeros(uniq.size)
        np.add.at(merged, inv, mass)
        keep = merged > 0
        object.__setattr__(self, "locations", tuple(uniq[keep].tolist()))
        object.__setattr__(self, "masses", tuple(merged[keep].tolist()))

    @classmethod
    def dirac(cls, x: float = 0.0) -> "DiscreteAtoms":
        return cls((float(x),), (1.0,))

    @property
    def has_atoms(self):
        return True

    @property
    def _loc(self):
        return np.asarray(self.locations)

    @property
    def _cum(self):
        cum = np.cumsum(self.masses)
        cum[-1] = 1.0
        return cum

    def support(self):
        return (self.locations[0], self.locations[-1])

    def cdf(self, t):
        idx = np.searchsorted(self._loc, np.asarray(t, dtype=float), side="right")
        cum = np.concatenate([[0.0], self._cum])
        return cum[idx]

    def cdf_left(self, t):
        idx = np.searchsorted(self._loc, np.asarray(t, dtype=float), side="left")
        cum = np.concatenate([[0.0], self._cum])
        return cum[idx]

    def quantile(self, s):
        s = np.asarray(s, dtype=float)
        idx = np.searchsorted(self._cum, s - 1e-15, side="left")
        return self._loc[np.clip(idx, 0, len(self.locations) - 1)]

    def upper_quantile(self, p):
        p = np.asarray(p, dtype=float)
        idx = np.searchsorted(self._cum, p + 1e-15, side="right")
        return self._loc[np.clip(idx, 0, len(self.locations) - 1)]

    def to_json(self):
        return {
            "schema": SCHEMA_MEASURE,
            "kind": self.kind,
            "atoms": [[x, m] for x, m in zip(self.locations, self.masses)],
        }


@dataclass(frozen=True)
class GridSpec:
    nodes: np.ndarray
    quadrature: str = "trapezoid"

    def __post_init__(self):
        x = np.asarray(self.nodes, dtype=float)
        if x.ndim != 1 or x.size < 2:
            raise ContractError("grid needs at least two nodes")
        if not np.all(np.isfinite(x)) or not np.all(np.diff(x) > 0):
            raise ContractError("grid nodes must be finite and strictly increasing")
        object.__setattr__(self, "nodes", x)

    @classmethod
    def uniform(cls, a: float, b: float, n: int = DEFAULT_GRID) -> "GridSpec":
        return cls(np.linspace(a, b, n))

    @classmethod
    def open_unit(cls, n_log: int = 1500, n_lin: int = 2001, eta: float = 1e-12) -> "GridSpec":
        """Nodes in (0, 1), log-spaced towards both ends, with 1/2 as a node."""
        left = np.logspace(math.log10(eta), math.log10(0.05), n_log, endpoint=False)
        mid = np.linspace(0.05, 0.95, n_lin)
        x = np.unique(np.concatenate([left, mid, [0.5], (1.0 - left)[::-1]]))
        return cls(x)


@dataclass(frozen=True, eq=False)
class GridDensity(Measure1D):
    """Piecewise-linear density on grid nodes plus an optional atom overlay.

    The density is normalized by the trapezoid rule so that continuous mass
    plus atom mass is one.
    """

    nodes: np.ndarray
    values: np.ndarray
    atom_locations: tuple[float, ...] = ()
    atom_masses: tuple[float, ...] = ()
    normalize: bool = field(default=True, repr=False)
    kind = "grid"

    def __post_init__(self):
        x = GridSpec(self.nodes).nodes
        rho = np.asarray(self.values, dtype=float)
        if rho.shape != x.shape:
            raise ContractError("grid density needs one value per node")
        if np.any(rho < 0) or not np.all(np.isfinite(rho)):
            raise ContractError("grid density must be finite and nonnegative")
        am = np.asarray(self.atom_masses, dtype=float)
        atom_mass = math.fsum(am) if am.size else 0.0
        cont = float(np.sum(0.5 * (rho[1:] + rho[:-1]) * np.diff(x)))
        if self.normalize:
            if cont <= 0 and atom_mass <= 0:
                raise ContractError("grid density has zero mass")
            if cont > 0:
                rho = rho * ((1.0 - atom_mass) / cont)
            cont = 1.0 - atom_mass
        elif abs(cont + atom_mass - 1.0) > MASS_TOL:
            raise ContractError(f"grid mass {cont + atom_mass!r} is not 1")
        rho.setflags(write=False)
        x.setflags(write=False)
        object.__setattr__(self, "nodes", x)
        object.__setattr__(self, "values", rho)
        cells = 0.5 * (rho[1:] + rho[:-1]) * np.diff(x)
        cum = np.concatenate([[0.0], np.cumsum(cells)])
        if self.normalize:
            cum = np.minimum(cum, cont)
            cum[-1] = cont
        object.__setattr__(self, "_cum", cum)
        object.__setattr__(self, "_cont_mass", cont)

    @classmethod
    def from_function(cls, fn: Callable, grid: GridSpec, **kw) -> "GridDensity":
        return cls(grid.nodes, np.asarray(fn(grid.nodes), dtype=float), **kw)

    @property
    def has_atoms(self):
        return len(self.atom_masses) > 0 and math.fsum(self.atom_masses) > 0

    def in_V(self):
        if self.has_atoms:
            return False
        rho = self.values
        zero_cell = (rho[1:] == 0) & (rho[:-1] == 0)
        nz = np.nonzero(~zero_cell)[0]
        if nz.size == 0:
            return False
        return not np.any(zero_cell[nz[0] : nz[-1] + 1])

    def support(self):
        x = self.nodes
        lo, hi = x[0], x[-1]
        if self.has_atoms:
            lo = min(lo, min(self.atom_locations))
            hi = max(hi, max(self.atom_locations))
        return (float(lo), float(hi))

    def _cont_cdf(self, t):
        x, rho, cum = self.nodes, self.values, self._cum
        t = np.asarray(t, dtype=float)
        k = np.clip(np.searchsorted(x, t, side="right") - 1, 0, x.size - 2)
        dx = x[k + 1] - x[k]
        u = np.clip(t - x[k], 0.0, dx)
        # u times the mean density on [x_k, t]; one rounding-monotone addition
        val = cum[k] + u * (rho[k] + 0.5 * (rho[k + 1] - rho[k]) * (u / dx))
        val = np.where(t < x[0], 0.0, val)
        return np.where(t >= x[-1], cum[-1], val)

    def _atom_cdf(self, t, side="right"):
        if not self.has_atoms:
            return 0.0
        loc = np.asarray(self.atom_locations)
        order = np.argsort(loc)
        loc = loc[order]
        cum = np.concatenate([[0.0], np.cumsum(np.asarray(self.atom_masses)[order])])
        return cum[np.searchsorted(loc, np.asarray(t, dtype=float), side=side)]

    def cdf(self, t):
        return np.clip(self._cont_cdf(t) + self._atom_cdf(t), 0.0, 1.0)

    def cdf_left(self, t):
        return np.clip(self._cont_cdf(t) + self._atom_cdf(t, side="left"), 0.0, 1.0)

    def density(self, t):
        if self.has_atoms:
            raise NotInVError("grid measure carries atoms")
        return np.interp(np.asarray(t, dtype=float), self.nodes, self.values, left=0.0, right=0.0)

    def continuous_density(self, t):
        return np.interp(np.asarray(t, dtype=float), self.nodes, self.values, left=0.0, right=0.0)

    def quantile(self, s):
        s = np.asarray(s, dtype=float)
        if self.has_atoms:
            return super().quantile(s)
        # invert the piecewise-quadratic CDF exactly
        x, rho, cum = self.nodes, self.values, self._cum
        k = np.clip(np.searchsorted(cum, s, side="left") - 1, 0, x.size - 2)
        dx = x[k + 1] - x[k]
        r = s - cum[k]
        a = (rho[k + 1] - rho[k]) / (2.0 * dx)
        b = rho[k]
        with np.errstate(divide="ignore", invalid="ignore"):
            disc = np.sqrt(np.maximum(b * b + 4.0 * a * r, 0.0))
            u = np.where(np.abs(a) * dx > 1e-14 * np.maximum(b, 1e-300), 2.0 * r / (b + disc), r / b)
        u = np.where(np.isfinite(u), u, 0.0)
        out = x[k] + np.clip(u, 0.0, dx)
        return np.where(s <= 0.0, x[0], _snap_min(self.cdf, s, out))

    def to_json(self):
        out = {
            "schema": SCHEMA_MEASURE,
            "kind": self.kind,
            "nodes": self.nodes.tolist(),
            "density": self.values.tolist(),
        }
        if self.has_atoms:
            out["atoms"] = [[x, m] for x, m in zip(self.atom_locations, self.atom_masses)]
        return out


def mixture_grid(components: Sequence[tuple[float, Measure1D]], grid: GridSpec) -> GridDensity:
    """Convex combination of continuous measures, tabulated on ``grid``."""
    dens = sum(w * np.asarray(m.density(grid.nodes)) for w, m in components)
    return GridDensity(grid.nodes, dens)


# --------------------------------------------------------------------------
# serialization


def measure_to_json(nu: Measure1D) -> dict:
    return nu.to_json()


def measure_from_json(obj: dict) -> Measure1D:
    if not isinstance(obj, dict) or "kind" not in obj:
        raise SchemaError("measure JSON needs a 'kind' field")
    kind = obj["kind"]
    allowed = {
        "gaussian": {"mean", "sd", "lo", "hi"},
        "uniform": {"a", "b"},
        "spherical": {"N"},
        "atoms": {"atoms"},
        "grid": {"nodes", "density", "atoms"},
    }
    if kind not in allowed:
        raise SchemaError(f"unknown measure kind {kind!r}")
    extra = set(obj) - allowed[kind] - {"kind", "schema"}
    if extra:
        raise SchemaError(f"unknown keys for {kind} measure: {sorted(extra)}")
    try:
        if kind == "gaussian":
            return Gaussian(
                float(obj.get("mean", 0.0)),
                float(obj.get("sd", 1.0)),
                float(obj.get("lo", -math.inf)),
                float(obj.get("hi", math.inf)),
            )
        if kind == "uniform":
            return Uniform(float(obj.get("a", 0.0)), float(obj.get("b", 1.0)))
        if kind == "spherical":
            return SphericalModel(float(obj["N"]))
        if kind == "atoms":
            pairs = obj["atoms"]
            return DiscreteAtoms(tuple(float(p[0]) for p in pairs), tuple(float(p[1]) for p in pairs))
        pairs = obj.get("atoms", [])
        return GridDensity(
            np.asarray(obj["nodes"], dtype=float),
            np.asarray(obj["density"], dtype=float),
            tuple(float(p[0]) for p in pairs),
            tuple(float(p[1]) for p in pairs),
        )
    except (KeyError, TypeError, IndexError) as exc:
        raise SchemaError(f"malformed {kind} measure: {exc}") from exc


# --------------------------------------------------------------------------
# CDF / quantile


def cdf_eval(nu: Measure1D, t):
    """Right-continuous CDF V(t) = nu((-inf, t])."""
    out = nu.cdf(t)
    return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class QuantileFn:
    """F~ for ``owner``; ``c0`` is the value assigned at s = 0."""

    owner: Measure1D
    c0: float | None = None

    def __post_init__(self):
        if self.c0 is None:
            object.__setattr__(self, "c0", float(self.owner.support()[0]))

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        if np.any((s < 0) | (s > 1)) or np.any(np.isnan(s)):
            raise DomainError("quantile level must lie in [0, 1]")
        pos = np.where(s > 0, s, 1.0)
        out = np.where(s > 0, self.owner.quantile(pos), self.c0)
        return float(out) if out.ndim == 0 else out


def quantile_fn(nu: Measure1D, c0: float | None = None) -> QuantileFn:
    return QuantileFn(nu, c0)


def quantile_eval(nu: Measure1D, s):
    """F~(s); s = 0 maps to inf supp nu."""
    return QuantileFn(nu)(s)


def t_plus(nu: Measure1D, alpha: float) -> float:
    """sup{t : nu([t, inf)) >= alpha}."""
    if not 0 < alpha <= 1:
        raise DomainError("alpha must lie in (0, 1]")
    return float(nu.upper_quantile(1.0 - alpha))


def t_minus(nu: Measure1D, alpha: float) -> float:
    """inf{t : nu((-inf, t]) >= alpha}."""
    if not 0 < alpha <= 1:
        raise DomainError("alpha must lie in (0, 1]")
    return float(nu.quantile(alpha))


def sep_measure(nu: Measure1D, kappa0: float, kappa1: float) -> float:
    if kappa0 <= 0 or kappa1 <= 0:
        raise DomainError("separation masses must be positive")
    if kappa0 > 1 or kappa1 > 1 or kappa0 + kappa1 > 1 + 1e-15:
        return 0.0
    return max(t_plus(nu, kappa0) - t_minus(nu, kappa1), 0.0)


# --------------------------------------------------------------------------
# transport maps and pushforwards


@dataclass(frozen=True, eq=False)
class TransportMap:
    """Monotone piecewise-linear map of the line.

    Beyond the outer breakpoints the map is constant, or continues with the
    slope of the outer segment when ``affine_left`` / ``affine_right`` is set.
    """

    breakpoints: np.ndarray
    values: np.ndarray
    affine_left: bool = False
    affine_right: bool = False

    def __post_init__(self):
        t = np.asarray(self.breakpoints, dtype=float)
        g = np.asarray(self.values, dtype=float)
        if t.ndim != 1 or t.shape != g.shape or t.size < 2:
            raise ContractError("transport map needs >= 2 matching breakpoints/values")
        if not np.all(np.diff(t) > 0):
            raise ContractError("transport breakpoints must be strictly increasing")
        if np.any(np.diff(g) < 0):
            i = int(np.argmin(np.diff(g)))
            raise ContractError(
                f"map is not monotone nondecreasing between t={t[i]!r} and t={t[i + 1]!r}"
            )
        object.__setattr__(self, "breakpoints", t)
        object.__setattr__(self, "values", g)

    @property
    def slopes(self) -> np.ndarray:
        return np.diff(self.values) / np.diff(self.breakpoints)

    def lipschitz(self) -> float:
        return float(np.max(self.slopes))

    def max_slope_pair(self) -> tuple[float, float]:
        i = int(np.argmax(self.slopes))
        return float(self.breakpoints[i]), float(self.breakpoints[i + 1])

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        bp, g, sl = self.breakpoints, self.values, self.slopes
        out = np.interp(t, bp, g)
        if self.affine_left:
            out = np.where(t < bp[0], g[0] + sl[0] * (t - bp[0]), out)
        if self.affine_right:
            out = np.where(t > bp[-1], g[-1] + sl[-1] * (t - bp[-1]), out)
        return out

    def compose(self, inner: "TransportMap") -> "TransportMap":
        """self o inner, sampled on the inner breakpoints refined by preimages."""
        pts = [inner.breakpoints]
        g_in = inner.values
        pre = np.interp(self.breakpoints, g_in, inner.breakpoints)
        mask = (self.breakpoints > g_in[0]) & (self.breakpoints < g_in[-1])
        pts.append(pre[mask])
        t = np.unique(np.concatenate(pts))
        return TransportMap(t, self(inner(t)), inner.affine_left and self.affine_left,
                            inner.affine_right and self.affine_right)

    def is_affine(self, tol=1e-12) -> bool:
        sl = self.slopes
        return bool(np.all(np.abs(sl - sl[0]) <= tol * max(1.0, abs(sl[0]))))

    def to_json(self):
        return {
            "breakpoints": self.breakpoints.tolist(),
            "values": self.values.tolist(),
            "affine_left": self.affine_left,
            "affine_right": self.affine_right,
        }


def _pushforward_atoms(nu: DiscreteAtoms, h) -> DiscreteAtoms:
    loc = np.asarray(h(np.asarray(nu.locations)), dtype=float)
    if np.any(np.diff(loc) < -1e-12 * max(1.0, float(np.max(np.abs(loc))))):
        raise ContractError("pushforward map is not monotone nondecreasing")
    return DiscreteAtoms(tuple(loc.tolist()), nu.masses)


def _pushforward_affine(nu: Measure1D, slope: float, shift: float) -> Measure1D | None:
    if slope <= 0:
        return None
    if isinstance(nu, Gaussian):
        return Gaussian(slope * nu.mean + shift, slope * nu.sd, slope * nu.lo + shift, slope * nu.hi + shift)
    if isinstance(nu, Uniform):
        return Uniform(slope * nu.a + shift, slope * nu.b + shift)
    return None


def _effective_support(nu: Measure1D) -> tuple[float, float]:
    lo, hi = nu.support()
    if not math.isfinite(lo):
        lo = float(nu.quantile(1e-14))
    if not math.isfinite(hi):
        hi = float(nu.quantile(1.0 - 1e-14))
    return lo, hi


def _pushforward_map(nu: Measure1D, h: TransportMap, n_out: int) -> Measure1D:
    bp, g = h.breakpoints, h.values
    lo, hi = _effective_support(nu)
    if h.is_affine():
        fully_affine = (h.affine_left or bp[0] <= lo) and (h.affine_right or bp[-1] >= hi)
        if fully_affine:
            sl = float(h.slopes[0])
            exact = _pushforward_affine(nu, sl, float(g[0] - sl * bp[0]))
            if exact is not None:
                return exact
    # pieces: (t_a, t_b, g_a, g_b); plateaus give atoms
    pieces = []
    if h.affine_left:
        if lo < bp[0]:
            pieces.append((lo, bp[0], float(h(lo)), g[0]))
    else:
        pieces.append((-math.inf, bp[0], g[0], g[0]))
    for i in range(bp.size - 1):
        pieces.append((bp[i], bp[i + 1], g[i], g[i + 1]))
    if h.affine_right:
        if hi > bp[-1]:
            pieces.append((bp[-1], hi, g[-1], float(h(hi))))
    else:
        pieces.append((bp[-1], math.inf, g[-1], g[-1]))

    atoms: dict[float, float] = {}
    strict = []
    for ta, tb, ga, gb in pieces:
        mass = float(nu.cdf(tb) - nu.cdf_left(ta)) if math.isfinite(ta) else float(nu.cdf(tb))
        if not math.isfinite(tb):
            mass = float(1.0 - nu.cdf_left(ta))
        if gb == ga:
            # plateau: the closed piece collapses; endpoints shared with neighbours
            lo_t = max(ta, lo)
            hi_t = min(tb, hi)
            if hi_t >= lo_t:
                m = float(nu.cdf(hi_t) - nu.cdf_left(lo_t)) if math.isfinite(ta) else float(nu.cdf(hi_t))
                if math.isinf(tb):
                    m = float(1.0 - nu.cdf_left(lo_t))
                if m > 0:
                    atoms[float(ga)] = atoms.get(float(ga), 0.0) + m
        else:
            strict.append((ta, tb, ga, gb))
    # shared endpoints of adjacent plateaus were counted twice only if atoms at
    # breakpoints exist; continuous sources carry none, discrete ones go elsewhere
    atom_mass = math.fsum(atoms.values())
    if atom_mass > 1.0:
        atom_mass = 1.0
    if not strict or atom_mass >= 1.0 - 1e-13:
        locs = sorted(atoms)
        masses = np.asarray([atoms[x] for x in locs])
        return DiscreteAtoms(tuple(locs), tuple((masses / masses.sum()).tolist()))
    y_lo = min(p[2] for p in strict)
    y_hi = max(p[3] for p in strict)
    y = np.linspace(y_lo, y_hi, n_out)
    dens = np.zeros_like(y)
    for ta, tb, ga, gb in strict:
        slope = (gb - ga) / (tb - ta)
        inside = (y >= ga) & (y <= gb)
        t = ta + (y[inside] - ga) / slope
        cont = nu.continuous_density(t) if isinstance(nu, GridDensity) else nu.density(t)
        dens[inside] = np.maximum(dens[inside], cont / slope)
    if atoms:
        locs = tuple(sorted(atoms))
        masses = tuple(atoms[x] for x in locs)
    else:
        locs, masses = (), ()
    if float(np.sum(0.5 * (dens[1:] + dens[:-1]) * np.diff(y))) <= 0:
        raise ResolutionError("pushforward continuous part vanished on the output grid")
    return GridDensity(y, dens, locs, masses)


def _pushforward_sampled(nu: Measure1D, h: Callable, n_out: int, n_samples: int) -> Measure1D:
    s = (np.arange(n_samples) + 0.5) / n_samples
    x = nu.quantile(s)
    y = np.asarray(h(x), dtype=float)
    scale = max(1.0, float(np.max(np.abs(y[np.isfinite(y)])))) if np.any(np.isfinite(y)) else 1.0
    if np.any(np.diff(y) < -1e-12 * scale):
        raise ContractError("pushforward map is not monotone nondecreasing")
    y = np.maximum.accumulate(y)
    vals, counts = np.unique(y, return_counts=True)
    is_atom = counts >= 8
    atom_locs = vals[is_atom]
    atom_mass = counts[is_atom] / n_samples
    cont = y[~np.isin(y, atom_locs)]
    if cont.size < 2 or cont.size / n_samples < 1e-12:
        return DiscreteAtoms(tuple(atom_locs.tolist()), tuple((atom_mass / atom_mass.sum()).tolist()))
    # linear (cloud-in-cell) deposit onto a uniform grid, divided by trapezoid weights
    grid = np.linspace(cont.min(), cont.max(), n_out)
    if grid[-1] <= grid[0]:
        return DiscreteAtoms(tuple(vals.tolist()), tuple((counts / n_samples).tolist()))
    step = grid[1] - grid[0]
    pos = (cont - grid[0]) / step
    k = np.clip(np.floor(pos).astype(int), 0, n_out - 2)
    frac = np.clip(pos - k, 0.0, 1.0)
    node_mass = np.zeros(n_out)
    np.add.at(node_mass, k, (1.0 - frac) / n_samples)
    np.add.at(node_mass, k + 1, frac / n_samples)
    w = np.full(n_out, step)
    w[0] = w[-1] = 0.5 * step
    return GridDensity(grid, node_mass / w, tuple(atom_locs.tolist()), tuple(atom_mass.tolist()))


def pushforward(nu: Measure1D, h, n_out: int = DEFAULT_GRID, n_samples: int = 1 << 16) -> Measure1D:
    """Distribution of ``h`` under ``nu`` for a monotone nondecreasing ``h``.

    A :class:`TransportMap` is pushed forward exactly (change of variables on
    each linear piece, plateaus become atoms).  Any other monotone callable is
    handled by evaluating it at the midpoint quantiles of ``nu``.
    """
    if isinstance(nu, DiscreteAtoms):
        return _pushforward_atoms(nu, h)
    if isinstance(h, TransportMap):
        if isinstance(nu, GridDensity) and nu.has_atoms:
            return _pushforward_sampled(nu, h, n_out, n_samples)
        return _pushforward_map(nu, h, n_out)
    if not callable(h):
        raise ContractError("pushforward needs a callable map")
    return _pushforward_sampled(nu, h, n_out, n_samples)


def levy_distance(mu: Measure1D, nu: Measure1D, n_points: int = 4096) -> float:
    """Levy distance between two CDFs, checked on a quantile-adapted grid."""
    levels = (np.arange(n_points) + 0.5) / n_points
    pts = [np.asarray(mu.quantile(levels)), np.asarray(nu.quantile(levels))]
    for m in (mu, nu):
        if isinstance(m, DiscreteAtoms):
            pts.append(np.asarray(m.locations))
        elif isinstance(m, GridDensity) and m.has_atoms:
            pts.append(np.asarray(m.atom_locations))
    x = np.unique(np.concatenate(pts))
    x = x[np.isfinite(x)]
    span = max(1.0, float(np.max(np.abs(x))))
    x = np.unique(np.concatenate([x, x - 1e-9 * span]))
    G = np.asarray(nu.cdf(x))

    def ok(eps):
        return bool(
            np.all(np.asarray(mu.cdf(x - eps)) - eps <= G + 1e-15)
            and np.all(G <= np.asarray(mu.cdf(x + eps)) + eps + 1e-15)
        )

    lo, hi = 0.0, 1.0
    if ok(0.0):
        return 0.0
    for _ in range(50):
        mid = 0.5 * (lo + hi)
        if ok(mid):
            hi = mid
        else:
            lo = mid
    return hi


def kolmogorov_distance(mu: Measure1D, nu: Measure1D, n_points: int = 4096) -> float:
    levels = (np.arange(n_points) + 0.5) / n_points
    x = np.unique(np.concatenate([mu.quantile(levels), nu.quantile(levels)]))
    x = x[np.isfinite(x)]
    return float(np.max(np.abs(np.asarray(mu.cdf(x)) - np.asarray(nu.cdf(x)))))


# --------------------------------------------------------------------------
# lambda-variance


def _gl(n):
    return np.polynomial.legendre.leggauss(n)


def _nested_double(lam: Lambda, density, a: float, b: float, n: int = 160, cells: int = 24) -> float:
    """2 * int_a^b rho(x) int_a^x lam(x - y) rho(y) dy dx by composite Gauss-Legendre."""
    xg, wg = _gl(n)
    edges = np.linspace(a, b, cells + 1)
    total = 0.0
    for i in range(cells):
        c0, c1 = edges[i], edges[i + 1]
        x = 0.5 * (c1 - c0) * xg + 0.5 * (c1 + c0)
        wx = 0.5 * (c1 - c0) * wg
        rx = density(x)
        # inner integral over [a, x] split into full cells and the partial cell
        inner = np.zeros_like(x)
        for j in range(i):
            d0, d1 = edges[j], edges[j + 1]
            y = 0.5 * (d1 - d0) * xg + 0.5 * (d1 + d0)
            wy = 0.5 * (d1 - d0) * wg
            inner += (lam(np.abs(x[:, None] - y[None, :])) * (density(y) * wy)[None, :]).sum(axis=1)
        y = c0 + (x[:, None] - c0) * (0.5 * (xg[None, :] + 1.0))
        wy = (x[:, None] - c0) * 0.5 * wg[None, :]
        inner += (lam(np.abs(x[:, None] - y)) * density(y) * wy).sum(axis=1)
        total += float(np.sum(wx * rx * inner))
    return 2.0 * total


def _gaussian_diff_integral(lam: Lambda, s: float) -> float:
    """E lam(|Z|) for Z ~ N(0, s^2) with a truncation-convergence check."""

    def integrand(z):
        return float(lam(np.asarray(z))) * math.exp(-0.5 * (z / s) ** 2) / (s * math.sqrt(2 * math.pi))

    prev = None
    for k in (8, 16, 32, 64):
        with np.errstate(over="ignore", invalid="ignore"):
            try:
                val, _ = integrate.quad(integrand, 0.0, k * s, limit=400)
            except (OverflowError, ValueError):
                val = math.inf
        val *= 2.0
        if not math.isfinite(val):
            raise DivergenceError(f"lambda-variance diverges (truncation at {k} sd)")
        if prev is not None and abs(val - prev) <= 1e-10 * max(1.0, abs(val)):
            return val
        prev = val
    raise DivergenceError("lambda-variance did not converge under tail truncation")


def centered_second_moment(nu: Measure1D) -> float:
    """int (x - m)^2 d nu; equals var_lambda(nu, t^2) / 2."""
    if isinstance(nu, Gaussian):
        return nu.moments()[1]
    if isinstance(nu, Uniform):
        return (nu.b - nu.a) ** 2 / 12.0
    if isinstance(nu, DiscreteAtoms):
        x = np.asarray(nu.locations)
        w = np.asarray(nu.masses)
        m = float(np.dot(w, x))
        return float(np.dot(w, (x - m) ** 2))
    if isinstance(nu, SphericalModel):
        c = nu.normalizer
        mean = math.pi / 2.0  # density symmetric about pi/2
        val, _ = integrate.quad(
            lambda t: (t - mean) ** 2 * math.sin(t) ** (nu.N - 1.0), 0.0, math.pi,
            epsabs=1e-14, epsrel=1e-13, limit=400,
        )
        return val / c
    if isinstance(nu, GridDensity):
        x, w = _grid_quadrature(nu)
        m = float(np.dot(w, x))
        return float(np.dot(w, (x - m) ** 2))
    raise ContractError(f"no second moment for {type(nu).__name__}")


def _grid_quadrature(nu: GridDensity) -> tuple[np.ndarray, np.ndarray]:
    x = nu.nodes
    dx = np.diff(x)
    tw = np.zeros_like(x)
    tw[:-1] += 0.5 * dx
    tw[1:] += 0.5 * dx
    w = tw * nu.values
    if nu.has_atoms:
        x = np.concatenate([x, np.asarray(nu.atom_locations)])
        w = np.concatenate([w, np.asarray(nu.atom_masses)])
    return x, w


def var_lambda(nu: Measure1D, lam="t2") -> float:
    """int int lam(|x - x'|) d nu(x) d nu(x') (the double integral, no 1/2)."""
    lam = get_lambda(lam)
    if isinstance(nu, DiscreteAtoms) or isinstance(nu, GridDensity):
        if isinstance(nu, DiscreteAtoms):
            x, w = np.asarray(nu.locations), np.asarray(nu.masses)
        else:
            x, w = _grid_quadrature(nu)
        if lam.name == "t2":
            return 2.0 * float(np.dot(w, (x - np.dot(w, x)) ** 2))
        return float(w @ lam(np.abs(x[:, None] - x[None, :])) @ w)
    if lam.name == "t2":
        return 2.0 * centered_second_moment(nu)
    if isinstance(nu, Gaussian) and not nu.truncated:
        return _gaussian_diff_integral(lam, _SQRT2 * nu.sd)
    lo, hi = nu.support()
    if not (math.isfinite(lo) and math.isfinite(hi)):
        raise ContractError("tensor quadrature needs a bounded support")
    return _nested_double(lam, nu.density, lo, hi)


# --------------------------------------------------------------------------
# isoperimetric profiles on the line


@dataclass(frozen=True, eq=False)
class ProfileCurve:
    """Sampled profile v -> I(v).

    ``convention`` is ``"half-line"`` or ``"discrete-eps"`` (then ``eps`` is set);
    ``upper_bound`` marks values obtained from a restricted family of sets.
    """

    v: np.ndarray
    value: np.ndarray
    convention: str = "half-line"
    eps: float | None = None
    upper_bound: bool = False

    def __post_init__(self):
        v = np.asarray(self.v, dtype=float)
        val = np.asarray(self.value, dtype=float)
        if v.shape != val.shape or v.ndim != 1:
            raise ContractError("profile needs matching 1-D arrays")
        if v.size and (np.any(np.diff(v) <= 0) or np.any(val < 0)):
            raise ContractError("profile v must increase strictly and values be >= 0")
        if self.convention not in ("half-line", "discrete-eps"):
            raise ContractError(f"unknown profile convention {self.convention!r}")
        if self.convention == "discrete-eps" and not (self.eps and self.eps > 0):
            raise ContractError("discrete-eps profile needs eps > 0")
        object.__setattr__(self, "v", v)
        object.__setattr__(self, "value", val)

    def __call__(self, v):
        return np.interp(v, self.v, self.value)

    def to_csv(self) -> str:
        lines = ["v,value"]
        lines += [f"{a!r},{b!r}" for a, b in zip(self.v.tolist(), self.value.tolist())]
        return "\n".join(lines) + "\n"

    def to_json(self) -> dict:
        return {
            "convention": self.convention,
            "eps": self.eps,
            "upper_bound": self.upper_bound,
            "v": self.v.tolist(),
            "value": self.value.tolist(),
        }


def _require_V(nu: Measure1D):
    if not nu.in_V():
        raise NotInVError(f"{nu.kind} measure is not absolutely continuous with connected support")


def half_line_profile(nu: Measure1D, n: int = DEFAULT_GRID - 1) -> ProfileCurve:
    """v -> V'(V^{-1}(v)): cost of the half-lines (-inf, a]."""
    _require_V(nu)
    v = np.arange(1, n + 1) / (n + 1.0)
    return ProfileCurve(v, np.asarray(nu.density(nu.quantile(v)), dtype=float), "half-line")


def _profile_table(nu: Measure1D, n: int = 8192):
    s = np.arange(1, n) / float(n)
    J = np.asarray(nu.density(nu.quantile(s)), dtype=float)
    return np.concatenate([[0.0], s, [1.0]]), np.concatenate([[0.0], J, [0.0]])


def _J_exact(nu: Measure1D, s):
    s = np.asarray(s, dtype=float)
    inner = (s > 0) & (s < 1)
    out = np.zeros_like(s)
    if np.any(inner):
        out[inner] = nu.density(nu.quantile(s[inner]))
    return out


def _structures(k_max: int):
    """(start_inside, number of cuts) pairs giving at most k_max intervals."""
    out = []
    for start_in in (False, True):
        for r in range(1, 2 * k_max + 1):
            count = (r + 1) // 2 if not start_in else r // 2 + 1
            if count <= k_max:
                out.append((start_in, r))
    return out


def _last_cut(start_in: bool, r: int, cuts: np.ndarray, v: float) -> np.ndarray:
    """Solve for the last cut level so that the set has mass v."""
    # mass = sum_j sign_j * c_j + const, signs alternate starting at -1 (out) / +1 (in)
    sign0 = 1.0 if start_in else -1.0
    signs = sign0 * (-1.0) ** np.arange(r)
    # indicator after the last cut is "inside" iff the parity says so
    inside_after = (not start_in) if r % 2 == 1 else start_in
    const = 1.0 if inside_after else 0.0
    partial = cuts @ signs[:-1] if cuts.shape[1] else np.zeros(cuts.shape[0])
    return (v - const - partial) / signs[-1]


def interval_profile_1d(
    nu: Measure1D, v: float, k_max: int = 2, budget: int = 200_000, return_cuts: bool = False
):
    """Least boundary measure over unions of <= k_max intervals of mass v.

    Works in quantile coordinates: a set is described by the levels of its
    finite endpoints and costs the sum of V' o V^{-1} at those levels.  The
    first cuts run over a grid sized by ``budget``; the last cut is solved
    from the mass constraint.  The result upper-bounds I_nu(v).
    """
    _require_V(nu)
    if not 0 < v < 1:
        raise DomainError("profile mass must lie in (0, 1)")
    if not 1 <= k_max <= 3:
        raise DomainError("k_max must be 1, 2 or 3")
    S, J = _profile_table(nu)
    best = (math.inf, None)
    for start_in, r in _structures(k_max):
        free = r - 1
        if free == 0:
            cuts = np.zeros((1, 0))
        else:
            m = 4096
            while m > 8 and math.comb(m, free) > budget:
                m = int(m * 0.8)
            grid = np.arange(1, m + 1) / (m + 1.0)
            combos = np.fromiter(
                itertools.chain.from_iterable(itertools.combinations(range(m), free)),
                dtype=np.int64,
            ).reshape(-1, free)
            cuts = grid[combos]
        last = _last_cut(start_in, r, cuts, v)
        prev = cuts[:, -1] if free else np.zeros(len(last))
        ok = (last > prev) & (last < 1.0) & (last > 0.0)
        if not np.any(ok):
            continue
        cost = np.interp(last[ok], S, J) + (np.interp(cuts[ok], S, J).sum(axis=1) if free else 0.0)
        i = int(np.argmin(cost))
        cand = np.concatenate([cuts[ok][i], [last[ok][i]]])
        cand = _refine_cuts(nu, start_in, r, cand, v, S, J)
        exact = float(_J_exact(nu, cand).sum())
        if exact < best[0]:
            best = (exact, (start_in, cand))
    if best[1] is None:
        raise ResolutionError(f"no union of <= {k_max} intervals reaches mass {v} on the grid")
    return (best[0], best[1]) if return_cuts else best[0]


def _refine_cuts(nu, start_in, r, cand, v, S, J, sweeps=3):
    if r == 1:
        return cand
    cand = cand.copy()
    h = 1.0 / 4096
    for _ in range(sweeps):
        for j in range(r - 1):
            trial = np.linspace(cand[j] - 4 * h, cand[j] + 4 * h, 41)
            pts = np.repeat(cand[None, :-1], trial.size, axis=0)
            pts[:, j] = trial
            last = _last_cut(start_in, r, pts, v)
            full = np.concatenate([pts, last[:, None]], axis=1)
            ok = np.all(np.diff(full, axis=1) > 0, axis=1) & (full[:, 0] > 0) & (full[:, -1] < 1)
            if not np.any(ok):
                continue
            cost = np.interp(full[ok], S, J).sum(axis=1)
            cand = full[ok][int(np.argmin(cost))]
        h /= 4.0
    return cand


@dataclass(frozen=True)
class IsoSimpleReport:
    iso_simple: bool
    max_deviation: float
    t_at_max: float
    v_at_max: float
    k_max: int
    t_grid: np.ndarray = field(repr=False)
    deviations: np.ndarray = field(repr=False)


def is_iso_simple(nu: Measure1D, tol: float | None = None, k_max: int = 2, n_t: int = 33,
                  budget: int = 60_000) -> IsoSimpleReport:
    """Check I_nu o V = V' on a t-grid, I_nu estimated over unions of <= k_max intervals."""
    _require_V(nu)
    if tol is None:
        tol = GRID_TOL if isinstance(nu, GridDensity) else ANALYTIC_TOL
    levels = np.arange(1, n_t + 1) / (n_t + 1.0)
    t = np.asarray(nu.quantile(levels))
    Vp = np.asarray(nu.density(t))
    dev = np.empty_like(levels)
    for i, s in enumerate(levels):
        dev[i] = Vp[i] - interval_profile_1d(nu, float(s), k_max, budget=budget)
    i = int(np.argmax(dev))
    return IsoSimpleReport(bool(dev[i] <= tol), float(dev[i]), float(t[i]), float(levels[i]), k_max, t, dev)


# --------------------------------------------------------------------------
# measures from a prescribed profile


def construct_from_phi(phi: Callable, grid: GridSpec | None = None) -> GridDensity:
    """Measure whose CDF V inverts rho(x) = int_{1/2}^x dt / phi(t).

    Node t_k = rho(x_k) uses the cell rule dt = 2 dx / (phi_k + phi_{k+1}), so
    the trapezoid mass of each cell equals dx and V(t_k) = x_k exactly on the
    grid; the density at t_k is phi(x_k), giving phi o V = V'.
    """
    if grid is None:
        grid = GridSpec.open_unit()
    x = grid.nodes
    if x[0] <= 0 or x[-1] >= 1:
        raise ConstructionError("construction grid must lie inside (0, 1)")
    with np.errstate(all="ignore"):
        f = np.asarray(phi(x), dtype=float) * np.ones_like(x)
    if np.any(~np.isfinite(f)) or np.any(f < 0):
        raise ConstructionError("phi must be finite and nonnegative on the grid")
    if np.any(f <= 0):
        bad = float(x[np.argmax(f <= 0)])
        raise ConstructionError(f"1/phi is not integrable near x={bad!r} (phi vanishes)")
    with np.errstate(over="raise"):
        try:
            dt = 2.0 * np.diff(x) / (f[1:] + f[:-1])
            t = np.concatenate([[0.0], np.cumsum(dt)])
        except FloatingPointError as exc:
            raise ConstructionError("1/phi overflows on the grid") from exc
    if not np.all(np.isfinite(t)):
        raise ConstructionError("rho is not finite on the grid")
    t = t - np.interp(0.5, x, t)
    # near a finite end of the support, steps below float resolution collapse
    keep = np.concatenate([[True], np.diff(t) > 0])
    return GridDensity(t[keep], f[keep])
