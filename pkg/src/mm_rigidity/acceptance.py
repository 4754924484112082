"""The twelve acceptance criteria as runnable checks.

Each check returns a :class:`Criterion` with a pass flag, a one-line detail
string and the wall time; ``run_all`` is what ``mm-rigidity verify`` and the
acceptance test both call.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import models
from .domination import build_monotone_transport, ic_check, sep_necessary_check
from .measures1d import (
    DiscreteAtoms,
    Gaussian,
    GridSpec,
    SphericalModel,
    Uniform,
    centered_second_moment,
    construct_from_phi,
    levy_distance,
    mixture_grid,
    pushforward,
    quantile_fn,
)
from .mmspace import (
    cheeger_constant,
    interval,
    path_space,
    profile_bruteforce,
    random_space,
    sphere_angle,
    star_space,
)
from .obsvar import (
    obsvar_bruteforce,
    obsvar_maximize,
    spectral_gap_check,
    verify_bound,
    verify_foliation,
)

SWEEP_N = (33, 65, 129)
GAUSS_BOX = (-4.0, 4.0)


@dataclass(frozen=True)
class Criterion:
    number: int
    name: str
    passed: bool
    detail: str
    seconds: float
    limit: float | None = None

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        lim = f" (limit {self.limit:g}s)" if self.limit else ""
        return f"[{status}] {self.number:2d} {self.name}: {self.detail} [{self.seconds:.2f}s{lim}]"


def _timed(number: int, name: str, limit: float | None, fn: Callable[[], tuple[bool, str]]) -> Criterion:
    t0 = time.perf_counter()
    ok, detail = fn()
    dt = time.perf_counter() - t0
    if limit is not None and dt > limit:
        ok = False
        detail += f"; runtime {dt:.2f}s over limit"
    return Criterion(number, name, ok, detail, dt, limit)


def gauss_box() -> Gaussian:
    return Gaussian(0.0, 1.0, *GAUSS_BOX)


# --------------------------------------------------------------------------


def c1_closed_forms():
    e2 = abs(models.spherical_variance_closed_form(2) - (math.pi**2 / 4 - 2))
    e3 = abs(models.spherical_variance_closed_form(3) - (math.pi**2 / 12 - 0.5))
    return max(e2, e3) <= 1e-10, f"|err| N=2 {e2:.2e}, N=3 {e3:.2e}"


def c2_closed_vs_quadrature():
    errs = {N: abs(models.spherical_variance_closed_form(N) - centered_second_moment(SphericalModel(N)))
            for N in (1.5, 2, 3, 4, 8, 10.5)}
    worst = max(errs.values())
    return worst <= 1e-8, f"max |closed - quadrature| = {worst:.2e}"


def c3_recurrence_identity():
    errs = [abs(2 * models.recurrence_K(N) / models.recurrence_I(N)
                - models.spherical_variance_closed_form(N + 1)) for N in (0.5, 1, 2, 3, 7)]
    Ns = [0.5, 1.5] + list(range(1, 501))
    bound_ok = all(models.spherical_variance_closed_form(N + 1) <= (math.pi**2 / 4) / (N + 2)
                   for N in Ns)
    return max(errs) <= 1e-8 and bound_ok, f"max identity error {max(errs):.2e}; bound holds to N=500: {bound_ok}"


def c4_asymptotic():
    rows = {r.N: r for r in models.spherical_asymptotic_check([200, 1000])}
    d200, d1000 = rows[200.0].deviation, rows[1000.0].deviation
    return d200 <= 0.02 and d1000 <= 0.005, f"|N v - 1| = {d200:.2e} (N=200), {d1000:.2e} (N=1000)"


def representative_measures():
    grid = GridSpec.uniform(-8.0, 8.0, 2048)
    return {
        "gaussian": Gaussian(),
        "uniform": Uniform(0.0, 2.0),
        "sigma2": SphericalModel(2.0),
        "sigma3.5": SphericalModel(3.5),
        "atoms": DiscreteAtoms((0.0, 1.0, 3.0), (0.25, 0.5, 0.25)),
        "mixture": mixture_grid([(0.3, Gaussian(-3.0, 0.7)), (0.7, Gaussian(3.0, 1.0))], grid),
    }


def c5_quantile_machinery():
    # F(F~(s)) >= s is exact; F~(F(t)) <= t carries a 1e-12 relative slack
    # because library CDFs are only monotone up to a few ulps.
    s = np.arange(1, 10_001) / 10_000.0
    worst_upper = 0.0
    worst_lower = 0.0
    worst_levy = 0.0
    for name, nu in representative_measures().items():
        q = np.asarray(nu.quantile(s))
        worst_upper = max(worst_upper, float(np.max(s - np.asarray(nu.cdf(q)))))
        lo, hi = float(q[0]), float(q[-1])
        t = np.linspace(lo - 1.0, hi + 1.0, 10_000)
        F = np.asarray(nu.cdf(t))
        pos = F > 0
        back = np.asarray(nu.quantile(F[pos]))
        rel = (back - t[pos]) / np.maximum(1.0, np.abs(t[pos]))
        worst_lower = max(worst_lower, float(np.max(rel)))
        decomp = pushforward(Uniform(0.0, 1.0), quantile_fn(nu))
        worst_levy = max(worst_levy, levy_distance(decomp, nu))
        if not nu.has_atoms:
            unif = pushforward(nu, lambda x, nu=nu: nu.cdf(x))
            worst_levy = max(worst_levy, levy_distance(unif, Uniform(0.0, 1.0)))
    ok = worst_upper <= 0.0 and worst_lower <= 1e-12 and worst_levy <= 1e-3
    return ok, (f"max s - F(F~(s)) = {worst_upper:.1e}, max rel F~(F(t)) - t = {worst_lower:.1e}, "
                f"worst round-trip Levy {worst_levy:.1e}")


def c6_domination():
    g = Gaussian()
    verdicts = {sd: build_monotone_transport(g, Gaussian(0.0, sd)) for sd in (0.25, 0.5, 1.0, 1.5)}
    ok = all(verdicts[sd].verdict == "dominates-monotone" for sd in (0.25, 0.5, 1.0))
    fail = verdicts[1.5]
    ok &= fail.verdict == "fails" and fail.witness is not None and fail.slope > 1
    u = build_monotone_transport(Uniform(0, 1), Uniform(0, 2))
    sep = sep_necessary_check(Uniform(0, 1), Uniform(0, 2), (0.25, 0.5))
    ok &= u.verdict == "fails" and any(not r.passed for r in sep)
    return ok, (f"sd 0.25/0.5/1 -> {[verdicts[s].verdict for s in (0.25, 0.5, 1.0)]}, "
                f"sd 1.5 slope {fail.slope:.3f}; U(0,1)->U(0,2) {u.verdict}, "
                f"sep failures {sum(not r.passed for r in sep)}")


def sweep_table(ns=SWEEP_N):
    """Rows (model, n, pitch, diam, obsvar, var_nu, gap) for the path sweeps."""
    rows = []
    for n in ns:
        for label, space, nu, pitch in (
            ("sigma2", sphere_angle(2.0, n), SphericalModel(2.0), math.pi / n),
            ("gauss_trunc4", interval(gauss_box(), n, "midpoint"), gauss_box(), 8.0 / n),
        ):
            rep = verify_bound(space, nu, "t2", tol=0.05)
            rows.append((label, n, pitch, space.diameter(), rep.obsvar, rep.var_nu, rep.gap, rep.passed))
    return rows


def c7_obsvar_bound(rows=None):
    rows = rows or sweep_table()
    ok = all(r[7] for r in rows)
    parts = []
    for label in ("sigma2", "gauss_trunc4"):
        gaps = [abs(r[6]) for r in rows if r[0] == label]
        ok &= all(b < a for a, b in zip(gaps, gaps[1:]))
        parts.append(f"{label} |gap| " + " > ".join(f"{g:.1e}" for g in gaps))
    return ok, "; ".join(parts)


def c8_oracle_equivalence(count: int = 20):
    worst_low = 0.0
    ok = True
    for k in range(count):
        space = random_space(5, np.random.default_rng(1000 + k))
        b = obsvar_bruteforce(space, "t2", 1.0 / 64)
        m = obsvar_maximize(space, "t2", seed=k)
        lo, up = b.certificate["lower"], b.certificate["upper"]
        ok &= lo - 1e-12 <= m.value <= up + 1e-12
        worst_low = min(worst_low, m.value - lo)
    return ok, f"{count} spaces inside the grid bracket; min(maximize - grid best) = {worst_low:.1e}"


def c9_foliation(n: int = 64):
    space = sphere_angle(2.0, n)
    pitch = math.pi / n
    res = obsvar_maximize(space, "t2")
    rep = verify_foliation(space, res.maximizer, 2 * pitch)
    star = star_space(4)
    star_rep = verify_foliation(star, obsvar_maximize(star, "t2").maximizer, 2 * pitch)
    worst = max(rep.residual_p.max(), rep.residual_q.max())
    ok = rep.case == "bounded" and worst <= 2 * pitch and star_rep.case == "none"
    return ok, f"sigma2 path case={rep.case}, max residual {worst:.1e}; star case={star_rep.case}"


def c10_diameter(rows=None, n: int = 64):
    space = sphere_angle(2.0, n)
    pitch = math.pi / n
    diam = space.diameter()
    ok = abs(diam - (math.pi - pitch)) <= 1e-12 and diam <= math.pi
    rows = rows or sweep_table()
    gaps = [abs(r[6]) for r in rows if r[0] == "sigma2"]
    ok &= all(b < a for a, b in zip(gaps, gaps[1:]))
    return ok, f"diam = pi - pitch = {diam:.6f} <= pi; sigma2 |gap| {gaps[0]:.1e} -> {gaps[-1]:.1e}"


def c11_spectral(n: int = 129):
    space = interval(gauss_box(), n, "midpoint")
    rep = spectral_gap_check(space, 2 * 8.0 / n, tol=0.05)
    return rep.passed, (f"lambda1 = {rep.lambda1:.4f}, centered ObsVar = {rep.obsvar_centered:.4f}, "
                        f"product {rep.product:.4f} ({rep.convention} convention)")


def c12_cheeger(n: int = 12):
    space = path_space(np.linspace(0.0, 1.0, n))
    eps = 1.0 / (n - 1)
    h = cheeger_constant(space, eps)
    nu = construct_from_phi(lambda v: h * np.minimum(v, 1.0 - v))
    rep = ic_check(profile_bruteforce(space, eps), nu)
    return h > 0 and rep.passed, f"h = {h:.4f} at eps = {eps:.4f}; IC min deviation {rep.min_deviation:.1e}"


def run_all(verbose_print: Callable[[str], None] | None = None) -> list[Criterion]:
    out: list[Criterion] = []

    def add(c: Criterion):
        out.append(c)
        if verbose_print:
            verbose_print(c.line())

    add(_timed(1, "spherical closed forms", 1.0, c1_closed_forms))
    add(_timed(2, "closed form vs quadrature", 5.0, c2_closed_vs_quadrature))
    add(_timed(3, "recurrence identity and bound", None, c3_recurrence_identity))
    add(_timed(4, "asymptotic N*value -> 1", 1.0, c4_asymptotic))
    add(_timed(5, "quantile machinery", 10.0, c5_quantile_machinery))
    add(_timed(6, "domination", 5.0, c6_domination))
    holder = {}

    def c7():
        holder["rows"] = sweep_table()
        return c7_obsvar_bound(holder["rows"])

    add(_timed(7, "ObsVar <= Var(nu) on path sweeps", 60.0, c7))
    add(_timed(8, "maximizer vs exhaustive oracle", 120.0, c8_oracle_equivalence))
    add(_timed(9, "foliation predicate", None, c9_foliation))
    add(_timed(10, "diameter check", None, lambda: c10_diameter(holder.get("rows"))))
    add(_timed(11, "spectral inequality", None, c11_spectral))
    add(_timed(12, "Cheeger pipeline", 30.0, c12_cheeger))
    return out
