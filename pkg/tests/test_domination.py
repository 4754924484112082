import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mm_rigidity.domination import (
    build_monotone_transport,
    coarse_slope,
    ic_check,
    icl_check,
    iso_dominance_check,
    sep_necessary_check,
    spread_atoms,
)
from mm_rigidity.errors import ContractError, CoverageError, PreconditionError
from mm_rigidity.measures1d import (
    DiscreteAtoms,
    Gaussian,
    ProfileCurve,
    SphericalModel,
    Uniform,
    half_line_profile,
    levy_distance,
    pushforward,
)
from mm_rigidity.mmspace import path_space, sphere_angle, two_point


@pytest.mark.parametrize("sd", [0.25, 0.5, 1.0])
def test_gaussian_contraction_dominates(sd):
    rep = build_monotone_transport(Gaussian(), Gaussian(0.0, sd))
    assert rep.verdict == "dominates-monotone"
    # the monotone map is t -> sd t
    assert rep.slope == pytest.approx(sd, abs=1e-9)
    x = np.linspace(-2, 2, 9)
    assert np.allclose(rep.map(x), sd * x, atol=1e-8)


def test_gaussian_expansion_fails_with_witness():
    rep = build_monotone_transport(Gaussian(), Gaussian(0.0, 1.5))
    assert rep.verdict == "fails"
    s0, s1 = rep.witness
    src, tgt = Gaussian(), Gaussian(0.0, 1.5)
    chord = (tgt.quantile(s1) - tgt.quantile(s0)) / (src.quantile(s1) - src.quantile(s0))
    assert chord > 1 and rep.slope == pytest.approx(1.5, abs=1e-6)


def test_uniform_stretch_fails_both_ways():
    rep = build_monotone_transport(Uniform(0, 1), Uniform(0, 2))
    assert rep.verdict == "fails" and rep.slope == pytest.approx(2.0)
    rows = sep_necessary_check(Uniform(0, 1), Uniform(0, 2))
    bad = [r for r in rows if not r.passed]
    assert bad
    r = next(r for r in rows if (r.kappa0, r.kappa1) == (0.25, 0.25))
    assert (r.sep_target, r.sep_source) == pytest.approx((1.0, 0.5))


def test_uniform_compression_dominates():
    rep = build_monotone_transport(Uniform(0, 2), Uniform(0, 1))
    assert rep.verdict == "dominates-monotone"
    assert np.allclose(rep.map(np.array([0.0, 1.0, 2.0])), [0.0, 0.5, 1.0])


def test_atomic_source_rejected():
    with pytest.raises(PreconditionError):
        build_monotone_transport(DiscreteAtoms((0.0, 1.0), (0.5, 0.5)), Uniform(0, 1))


@given(st.floats(min_value=0.05, max_value=1.0), st.floats(min_value=-3, max_value=3))
@settings(max_examples=15)
def test_domination_implies_separation_order(sd, shift):
    src, tgt = Gaussian(), Gaussian(shift, sd)
    rep = build_monotone_transport(src, tgt)
    assert rep.verdict == "dominates-monotone"
    assert all(r.passed for r in sep_necessary_check(src, tgt))
    assert levy_distance(pushforward(src, rep.map), tgt) < 1e-3


@given(st.floats(min_value=1.05, max_value=4.0))
@settings(max_examples=10)
def test_expansions_never_dominate(sd):
    assert build_monotone_transport(Gaussian(), Gaussian(0.0, sd)).verdict == "fails"


def test_report_json():
    rep = build_monotone_transport(Uniform(0, 2), Uniform(0, 1))
    obj = rep.to_json(include_map=True)
    assert obj["verdict"] == "dominates-monotone" and "map" in obj


# --- IC -------------------------------------------------------------------


def test_ic_same_curve():
    rep = ic_check(half_line_profile(Gaussian()), Gaussian())
    assert rep.passed and abs(rep.min_deviation) <= 1e-9


def test_ic_wider_gaussian_passes_narrower_fails():
    prof = half_line_profile(Gaussian())
    assert ic_check(prof, Gaussian(0.0, 2.0)).passed
    rep = ic_check(prof, Gaussian(0.0, 0.5))
    assert not rep.passed and rep.min_deviation < -0.1


def test_ic_uniform():
    prof = ProfileCurve(np.linspace(0.01, 0.99, 99), np.ones(99))
    assert ic_check(prof, Uniform(0, 1)).passed


def test_ic_coverage():
    prof = ProfileCurve(np.array([0.4, 0.6]), np.array([1.0, 1.0]))
    with pytest.raises(CoverageError):
        ic_check(prof, Uniform(0, 1), require=(0.1, 0.9))
    with pytest.raises(CoverageError):
        ic_check(ProfileCurve(np.zeros(0), np.zeros(0)), Uniform(0, 1))


@given(st.floats(min_value=0.1, max_value=1.0))
@settings(max_examples=10)
def test_ic_scaling(sd):
    # gamma profile against N(0, 1/sd^2) fails exactly when 1/sd > 1
    rep = ic_check(half_line_profile(Gaussian()), Gaussian(0.0, sd))
    assert rep.passed == (sd >= 1.0 - 1e-12)


# --- ICL ------------------------------------------------------------------


def test_icl_path_passes():
    space = path_space((np.arange(64) + 0.5) / 64)
    grid = [(a, b) for a in np.linspace(0.05, 0.9, 5) for b in np.linspace(0.1, 1.0, 5) if b >= a]
    rep = icl_check(space, Uniform(0, 1), grid, mode="sublevel", f=space.coords, tol=2 / 64)
    assert rep.passed and rep.counterexample is None


def test_icl_two_point_counterexample():
    rep = icl_check(two_point(), Uniform(0, 1), [(0.4, 0.6)], tol=0.0)
    assert not rep.passed
    A, a, b = rep.counterexample
    assert len(A) == 1 and (a, b) == (0.4, 0.6)
    assert rep.warning is not None


def test_icl_degenerate_pairs_pass():
    rep = icl_check(two_point(), Uniform(0.0, 0.01), [(0.0, 0.0), (0.005, 0.005)], tol=0.0)
    assert rep.passed


def test_icl_contract():
    with pytest.raises(ContractError):
        icl_check(two_point(), Uniform(0, 1), [(0.6, 0.4)])
    with pytest.raises(ContractError):
        icl_check(two_point(), Uniform(0, 1), [(0.4, 0.6)], mode="sublevel")


def test_icl_deterministic_under_threads():
    space = path_space(np.arange(8.0) / 8)
    grid = [(a, b) for a in np.linspace(0, 0.8, 6) for b in np.linspace(0, 1, 6) if b >= a]
    r1 = icl_check(space, Uniform(0, 0.5), grid, tol=0.0)
    r4 = icl_check(space, Uniform(0, 0.5), grid, tol=0.0, threads=4)
    assert r1.to_json() == r4.to_json()


# --- iso-dominance --------------------------------------------------------


def test_iso_dominance_sphere():
    n = 128
    space = sphere_angle(2.0, n)
    t = space.coords
    rep = iso_dominance_check(space, SphericalModel(2.0), [t, np.abs(t - math.pi / 2)])
    assert rep.passed, rep.to_json()


def test_iso_dominance_two_point_fails():
    rep = iso_dominance_check(two_point(), Uniform(0, 1), [np.array([0.0, 1.0])])
    assert not rep.passed
    assert rep.entries[0].verdict == "fails" and rep.entries[0].witness is not None


def test_iso_dominance_requires_lipschitz():
    with pytest.raises(ContractError, match=r"\(0, 1\)"):
        iso_dominance_check(two_point(), Uniform(0, 1), [np.array([0.0, 2.0])])


def test_spread_and_coarse_slope():
    edges, w = spread_atoms(DiscreteAtoms((0.0, 1.0, 3.0), (0.2, 0.3, 0.5)))
    assert edges.tolist() == [-0.5, 0.5, 2.0, 4.0]
    t = np.linspace(0, 1, 11)
    slope, _ = coarse_slope(t, 3 * t, 0.2)
    assert slope == pytest.approx(3.0)


# --- invariants -----------------------------------------------------------


@given(st.floats(min_value=0.2, max_value=1.0), st.floats(min_value=0.2, max_value=1.0))
@settings(max_examples=10)
def test_composed_maps_certify(a, b):
    mu, nu, rho = Gaussian(), Gaussian(0.0, a), Gaussian(0.0, a * b)
    r1, r2 = build_monotone_transport(mu, nu), build_monotone_transport(nu, rho)
    assert r1.verdict == r2.verdict == "dominates-monotone"
    G = r2.map.compose(r1.map)
    assert G.lipschitz() <= 1 + 1e-6
    assert levy_distance(pushforward(mu, G), rho) <= 3 / 2048
    assert build_monotone_transport(mu, rho).verdict == "dominates-monotone"


pairs = st.tuples(
    st.one_of(st.builds(Gaussian, st.just(0.0), st.floats(0.2, 3)),
              st.builds(lambda w: Uniform(0, w), st.floats(0.2, 3))),
    st.one_of(st.builds(Gaussian, st.just(0.0), st.floats(0.2, 3)),
              st.builds(lambda w: Uniform(0, w), st.floats(0.2, 3))),
)


@given(pairs)
@settings(max_examples=25)
def test_sep_failure_precedes_constructor_failure(pair):
    src, tgt = pair
    if any(not r.passed for r in sep_necessary_check(src, tgt)):
        assert build_monotone_transport(src, tgt).verdict != "dominates-monotone"


@pytest.mark.parametrize("nu", [SphericalModel(2.0), SphericalModel(3.0), Gaussian(0, 1, -4, 4)], ids=str)
def test_characterizations_agree_on_model_measures(nu):
    assert ic_check(half_line_profile(nu), nu).passed
    n = 96
    space = __import__("mm_rigidity.mmspace", fromlist=["interval"]).interval(nu, n, "midpoint")
    x = space.coords
    lo, hi = x[0], x[-1]
    grid = [(a, b) for a in np.linspace(lo, hi, 6) for b in np.linspace(lo, hi, 6) if b >= a]
    icl = icl_check(space, nu, grid, mode="sublevel", f=x)
    assert icl.passed, icl.to_json()
    assert iso_dominance_check(space, nu, [x - lo]).passed
