import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from mm_rigidity.errors import ConstructionError, ContractError, DomainError, NotInVError, SchemaError
from mm_rigidity.measures1d import (
    DiscreteAtoms,
    Gaussian,
    GridDensity,
    GridSpec,
    SphericalModel,
    TransportMap,
    Uniform,
    cdf_eval,
    centered_second_moment,
    construct_from_phi,
    half_line_profile,
    interval_profile_1d,
    is_iso_simple,
    kolmogorov_distance,
    levy_distance,
    measure_from_json,
    measure_to_json,
    mixture_grid,
    pushforward,
    quantile_eval,
    quantile_fn,
    sep_measure,
    t_minus,
    t_plus,
    var_lambda,
)

means = st.floats(min_value=-5, max_value=5)
sds = st.floats(min_value=0.1, max_value=4)
levels = st.floats(min_value=1e-6, max_value=1.0)


def bimodal():
    grid = GridSpec.uniform(-8.0, 8.0, 2048)
    return mixture_grid([(0.3, Gaussian(-3.0, 0.7)), (0.7, Gaussian(3.0, 1.0))], grid)


atoms_strategy = st.lists(
    st.tuples(st.floats(min_value=-10, max_value=10), st.floats(min_value=0.01, max_value=1.0)),
    min_size=1,
    max_size=6,
).map(lambda xs: DiscreteAtoms(tuple(x for x, _ in xs), tuple(m / sum(m for _, m in xs) for _, m in xs)))

measures = st.one_of(
    st.builds(Gaussian, means, sds),
    st.builds(lambda a, w: Uniform(a, a + w), means, st.floats(min_value=0.1, max_value=5)),
    st.builds(SphericalModel, st.floats(min_value=1.2, max_value=12)),
    atoms_strategy,
)


# --- quantiles ------------------------------------------------------------


def test_gaussian_quantile_matches_scipy():
    s = np.linspace(0.001, 0.999, 101)
    assert np.allclose(quantile_eval(Gaussian(), s), stats.norm.ppf(s), atol=1e-12)
    assert quantile_eval(Gaussian(), 0.975) == pytest.approx(1.959963984540054, abs=1e-12)


def test_spherical_quantile_matches_scipy_beta():
    nu = SphericalModel(3.5)
    s = np.linspace(0.01, 0.99, 25)
    ref = np.arccos(1 - 2 * stats.beta.ppf(s, 1.75, 1.75))
    assert np.allclose(nu.quantile(s), ref, atol=1e-10)


def test_quantile_of_atoms_and_zero_level():
    nu = DiscreteAtoms((0.0, 1.0, 3.0), (0.25, 0.5, 0.25))
    assert quantile_eval(nu, [0.1, 0.25, 0.26, 0.75, 0.8, 1.0]).tolist() == [0, 0, 1, 1, 3, 3]
    assert quantile_eval(nu, 0.0) == 0.0
    with pytest.raises(DomainError):
        quantile_eval(nu, 1.5)
    assert quantile_fn(nu, c0=-7.0)(0.0) == -7.0


@given(measures, st.lists(levels, min_size=2, max_size=20))
def test_quantile_monotone(nu, s):
    s = np.sort(np.asarray(s))
    q = np.asarray(quantile_eval(nu, s))
    assert np.all(np.diff(q) >= 0)


@given(measures, st.lists(levels, min_size=1, max_size=30))
def test_galois_upper(nu, s):
    s = np.asarray(s)
    assert np.all(cdf_eval(nu, quantile_eval(nu, s)) >= s)


@given(measures, st.lists(st.floats(min_value=-20, max_value=20), min_size=1, max_size=30))
def test_galois_lower(nu, t):
    t = np.asarray(t)
    F = np.asarray(cdf_eval(nu, t))
    pos = F > 0
    back = np.asarray(quantile_eval(nu, F[pos]))
    assert np.all(back <= t[pos] + 1e-12 * np.maximum(1, np.abs(t[pos])))


def test_grid_cdf_monotone_in_floating_point():
    nu = bimodal()
    t = np.linspace(-8, 8, 400_001)
    assert np.all(np.diff(nu.cdf(t)) >= 0)
    assert nu.cdf(8.0) == 1.0


# --- separation -----------------------------------------------------------


@given(st.floats(min_value=0.01, max_value=0.49), st.floats(min_value=0.01, max_value=0.49))
def test_gaussian_separation(k0, k1):
    ref = stats.norm.ppf(1 - k0) - stats.norm.ppf(k1)
    assert sep_measure(Gaussian(), k0, k1) == pytest.approx(ref, abs=1e-9)


def test_separation_edge_cases():
    assert sep_measure(Uniform(0, 1), 0.25, 0.25) == pytest.approx(0.5)
    assert sep_measure(Uniform(0, 1), 0.6, 0.6) == 0.0
    two = DiscreteAtoms((0.0, 1.0), (0.5, 0.5))
    assert sep_measure(two, 0.5, 0.5) == 1.0
    assert t_plus(two, 0.5) == 1.0 and t_minus(two, 0.5) == 0.0
    with pytest.raises(DomainError):
        sep_measure(two, 0.0, 0.5)


# --- transport maps and pushforwards ---------------------------------------


def test_transport_map_basics():
    G = TransportMap(np.array([0.0, 1.0, 2.0]), np.array([0.0, 2.0, 2.5]))
    assert G.lipschitz() == 2.0
    assert G(np.array([-1.0, 0.5, 3.0])).tolist() == [0.0, 1.0, 2.5]
    H = TransportMap(np.array([0.0, 1.0]), np.array([0.0, 1.0]), True, True)
    assert H.is_affine() and H(5.0) == 5.0
    assert G.compose(H).lipschitz() <= G.lipschitz() * H.lipschitz() + 1e-12
    with pytest.raises(ContractError):
        TransportMap(np.array([0.0, 1.0]), np.array([1.0, 0.0]))


@given(means, sds, st.floats(min_value=0.1, max_value=3), st.floats(min_value=-3, max_value=3))
@settings(max_examples=20)
def test_affine_pushforward_of_gaussian(m, s, a, b):
    G = TransportMap(np.array([0.0, 1.0]), np.array([b, a + b]), True, True)
    out = pushforward(Gaussian(m, s), G)
    assert levy_distance(out, Gaussian(a * m + b, a * s)) < 1e-6


def test_plateau_becomes_atom():
    G = TransportMap(np.array([0.0, 0.5, 1.0]), np.array([0.0, 0.5, 0.5]))
    out = pushforward(Uniform(0, 1), G)
    assert out.has_atoms
    assert out.cdf(0.5) - out.cdf_left(0.5) == pytest.approx(0.5, abs=1e-9)


@pytest.mark.parametrize("nu", [Gaussian(), Uniform(-1, 2), SphericalModel(2.0), bimodal()], ids=str)
def test_round_trips(nu):
    decomp = pushforward(Uniform(0, 1), quantile_fn(nu))
    assert levy_distance(decomp, nu) <= 1e-3
    unif = pushforward(nu, nu.cdf)
    assert levy_distance(unif, Uniform(0, 1)) <= 1e-3


def test_atoms_pushforward_is_exact():
    nu = DiscreteAtoms((0.0, 1.0, 2.0), (0.2, 0.3, 0.5))
    out = pushforward(nu, lambda x: np.minimum(x, 1.0))
    assert out.locations == (0.0, 1.0) and out.masses == pytest.approx((0.2, 0.8))


def test_non_monotone_pushforward_rejected():
    with pytest.raises(ContractError):
        pushforward(Gaussian(), lambda x: -x)


@given(means, means, means)
@settings(max_examples=20)
def test_levy_metric_axioms(a, b, c):
    A, B, C = Gaussian(a), Gaussian(b), Gaussian(c)
    ab, bc, ac = levy_distance(A, B), levy_distance(B, C), levy_distance(A, C)
    assert levy_distance(A, A) == pytest.approx(0, abs=1e-9)
    assert ab == pytest.approx(levy_distance(B, A), abs=1e-9)
    assert ac <= ab + bc + 1e-8
    assert levy_distance(A, B) <= kolmogorov_distance(A, B) + 1e-9


# --- variances ------------------------------------------------------------


def test_variance_oracles():
    assert var_lambda(Gaussian(), "t2") == pytest.approx(2.0, abs=1e-10)
    assert var_lambda(Gaussian(0, 3), "t") == pytest.approx(2 * 3 / math.sqrt(math.pi), abs=1e-8)
    assert var_lambda(Uniform(0, 1), "t") == pytest.approx(1 / 3, abs=1e-9)
    assert var_lambda(Uniform(0, 1), "t2") == pytest.approx(1 / 6, abs=1e-12)
    assert var_lambda(DiscreteAtoms.dirac(2.0), "exp") == 0.0
    two = DiscreteAtoms((0.0, 1.0), (0.5, 0.5))
    assert var_lambda(two, "t2") == pytest.approx(0.5)
    assert var_lambda(two, "min1") == pytest.approx(0.5)


def test_truncated_gaussian_moments_match_scipy():
    nu = Gaussian(0.0, 1.0, -4.0, 4.0)
    ref = stats.truncnorm(-4, 4)
    assert nu.moments()[1] == pytest.approx(ref.var(), abs=1e-12)
    assert centered_second_moment(nu) == pytest.approx(ref.var(), abs=1e-9)


def test_min1_variance_against_difference_law():
    # X - Y ~ N(0, 2 s^2) for independent X, Y ~ N(0, s^2)
    from scipy import integrate

    s = 0.8
    d = stats.norm(0, s * math.sqrt(2))
    inner, _ = integrate.quad(lambda x: x * d.pdf(x), 0, 1)
    ref = 2 * inner + 2 * d.sf(1.0)
    assert var_lambda(Gaussian(0.0, s), "min1") == pytest.approx(ref, abs=1e-8)


@given(measures)
@settings(max_examples=25)
def test_t2_variance_is_twice_centered_moment(nu):
    assert var_lambda(nu, "t2") == pytest.approx(2 * centered_second_moment(nu), rel=1e-7, abs=1e-10)


@given(st.builds(Gaussian, means, sds), st.floats(min_value=0.05, max_value=1.0))
@settings(max_examples=15)
def test_contraction_decreases_variance(nu, a):
    G = TransportMap(np.array([0.0, 1.0]), np.array([0.0, a]), True, True)
    assert var_lambda(pushforward(nu, G), "t") <= var_lambda(nu, "t") + 1e-9


# --- serialization --------------------------------------------------------


@pytest.mark.parametrize(
    "nu",
    [Gaussian(1.0, 2.0), Gaussian(0, 1, -4, 4), Uniform(0, 2), SphericalModel(3.0),
     DiscreteAtoms((0.0, 2.0), (0.3, 0.7)), GridDensity(np.array([0.0, 1.0, 2.0]), np.array([0.0, 1.0, 0.0]))],
    ids=lambda m: m.kind,
)
def test_json_round_trip(nu):
    obj = json.loads(json.dumps(measure_to_json(nu)))
    back = measure_from_json(obj)
    t = np.linspace(-3, 5, 41)
    assert np.allclose(back.cdf(t), nu.cdf(t), atol=1e-15)


def test_json_errors():
    with pytest.raises(SchemaError):
        measure_from_json({"kind": "cauchy"})
    with pytest.raises(SchemaError):
        measure_from_json({"kind": "gaussian", "scale": 1})


def test_grid_density_contract():
    with pytest.raises(ContractError):
        GridDensity(np.array([0.0, 1.0]), np.array([1.0, -1.0]))
    nu = GridDensity(np.array([0.0, 1.0, 2.0, 3.0]), np.array([1.0, 0.0, 0.0, 1.0]))
    assert not nu.in_V()
    assert GridDensity(np.array([0.0, 1.0]), np.array([1.0, 1.0])).in_V()


# --- profiles -------------------------------------------------------------


def test_gaussian_half_line_profile():
    prof = half_line_profile(Gaussian())
    ref = stats.norm.pdf(stats.norm.ppf(prof.v))
    assert np.allclose(prof.value, ref, atol=1e-12)
    assert prof(0.5) == pytest.approx(1 / math.sqrt(2 * math.pi), abs=1e-6)


def test_uniform_profile_is_flat():
    prof = half_line_profile(Uniform(0, 2))
    assert np.allclose(prof.value, 0.5)


def test_profile_requires_V():
    with pytest.raises(NotInVError):
        half_line_profile(DiscreteAtoms((0.0, 1.0), (0.5, 0.5)))


def test_interval_profile_gaussian():
    assert interval_profile_1d(Gaussian(), 0.5) == pytest.approx(stats.norm.pdf(0), abs=1e-6)
    with pytest.raises(DomainError):
        interval_profile_1d(Gaussian(), 0.0)


def test_interval_profile_upper_bounds_half_lines():
    nu = bimodal()
    v = 0.3
    half = float(nu.density(nu.quantile(v)))
    assert interval_profile_1d(nu, v) <= half + 1e-9


def test_iso_simple_detection():
    assert is_iso_simple(Gaussian()).iso_simple
    assert is_iso_simple(Uniform(0, 1)).iso_simple
    rep = is_iso_simple(bimodal())
    assert not rep.iso_simple and rep.max_deviation > 0.1


# --- construction from a profile ------------------------------------------


def test_construct_laplace():
    nu = construct_from_phi(lambda v: np.minimum(v, 1 - v))
    assert nu.cdf(-1.0) == pytest.approx(math.exp(-1) / 2, abs=1e-5)
    assert nu.cdf(1.0) == pytest.approx(1 - math.exp(-1) / 2, abs=1e-5)


def test_construct_gaussian_and_uniform():
    nu = construct_from_phi(lambda v: stats.norm.pdf(stats.norm.ppf(v)))
    assert levy_distance(nu, Gaussian()) < 1e-4
    flat = construct_from_phi(np.ones_like)
    assert levy_distance(flat, Uniform(-0.5, 0.5)) < 1e-6


@given(st.floats(min_value=0.2, max_value=5.0))
@settings(max_examples=10)
def test_construct_satisfies_profile_identity(c):
    phi = lambda v: c * np.minimum(v, 1 - v)
    nu = construct_from_phi(phi)
    v = np.linspace(0.05, 0.95, 19)
    t = nu.quantile(v)
    assert np.allclose(nu.density(t), phi(v), rtol=1e-3)


def test_construct_rejects_vanishing_phi():
    with pytest.raises(ConstructionError):
        construct_from_phi(lambda v: np.where(v > 0.7, 0.0, 1.0))


# --- invariants -----------------------------------------------------------

lams = st.sampled_from(["t2", "t", "min1", "exp"])


@given(atoms_strategy, st.floats(min_value=-5, max_value=5), lams)
@settings(max_examples=30)
def test_variance_isometry_invariance(nu, c, lam):
    shifted = DiscreteAtoms(tuple(x + c for x in nu.locations), nu.masses)
    flipped = DiscreteAtoms(tuple(-x for x in nu.locations), nu.masses)
    v = var_lambda(nu, lam)
    assert var_lambda(shifted, lam) == pytest.approx(v, rel=1e-9, abs=1e-12)
    assert var_lambda(flipped, lam) == pytest.approx(v, rel=1e-9, abs=1e-12)


@given(atoms_strategy, st.lists(st.floats(min_value=0.0, max_value=1.0), min_size=2, max_size=6), lams)
@settings(max_examples=30)
def test_variance_contracts_under_1_lipschitz_maps(nu, slopes, lam):
    bp = np.linspace(-10, 10, len(slopes) + 1)
    vals = np.concatenate([[0.0], np.cumsum(np.asarray(slopes) * np.diff(bp))])
    G = TransportMap(bp, vals)
    assert var_lambda(pushforward(nu, G), lam) <= var_lambda(nu, lam) + 1e-12


@given(measures, st.floats(0.01, 0.9), st.floats(0.01, 0.9), st.floats(0.0, 0.3))
@settings(max_examples=30)
def test_sep_monotone_in_masses(nu, k0, k1, dk):
    base = sep_measure(nu, k0, k1)
    assert sep_measure(nu, min(k0 + dk, 1.0), k1) <= base + 1e-12
    assert sep_measure(nu, k0, min(k1 + dk, 1.0)) <= base + 1e-12
    if k0 + k1 > 1:
        assert base == 0.0


@pytest.mark.parametrize("v", [0.1, 0.3, 0.5, 0.8])
def test_interval_profile_nested_families(v):
    nu = bimodal()
    vals = [interval_profile_1d(nu, v, k, budget=40_000) for k in (1, 2, 3)]
    assert vals[1] <= vals[0] + 1e-12 and vals[2] <= vals[1] + 1e-12


@pytest.mark.parametrize(
    "phi",
    [lambda v: np.minimum(v, 1 - v), lambda v: 2 * np.sqrt(v * (1 - v)),
     lambda v: stats.norm.pdf(stats.norm.ppf(v)), lambda v: 0.5 + v * (1 - v)],
    ids=["laplace", "sqrt", "gauss", "flat-ish"],
)
def test_construct_then_profile_recovers_phi(phi):
    nu = construct_from_phi(phi)
    prof = half_line_profile(nu)
    inner = (prof.v > 1e-3) & (prof.v < 1 - 1e-3)
    err = np.max(np.abs(prof.value[inner] - phi(prof.v[inner])))
    assert err <= 10 * 1e-6
