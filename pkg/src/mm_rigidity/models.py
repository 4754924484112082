"""Spherical model sigma^N and Gaussian computations.

Notation: I_N = int_0^{pi/2} cos^N t dt and K_N = -H_N(0), where H_N is the
third iterated antiderivative of cos^N anchored at pi/2.  Unrolling the three
integrations gives K_N = 1/2 int_0^{pi/2} t^2 cos^N t dt, which is what the
base cases use.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .errors import DomainError
from .measures1d import Gaussian, SphericalModel, centered_second_moment, var_lambda

_QUAD = dict(epsabs=1e-14, epsrel=1e-13, limit=500)


def _ceil_half(N: float) -> int:
    return math.ceil(N / 2.0)


def _reduce(N: float) -> tuple[float, int]:
    """Base exponent in (0, 2] (or 0 when N = 0) and the number of steps down."""
    if N == 0:
        return 0.0, 0
    steps = _ceil_half(N) - 1
    return N - 2 * steps, steps


def _base_I(e: float) -> float:
    if e == 0:
        return math.pi / 2
    val, _ = integrate.quad(lambda t: math.cos(t) ** e, 0.0, math.pi / 2, **_QUAD)
    return val


def _base_K(e: float) -> float:
    val, _ = integrate.quad(lambda t: t * t * math.cos(t) ** e, 0.0, math.pi / 2, **_QUAD)
    return 0.5 * val


def recurrence_I(N: float) -> float:
    """I_N via I_N = (N-1)/N I_{N-2}, seeded by quadrature on (0, 2]."""
    if not N >= 0:
        raise DomainError("recurrence_I needs N >= 0")
    e, steps = _reduce(N)
    val = _base_I(e)
    for _ in range(steps):
        e += 2.0
        val *= (e - 1.0) / e
    return val


def recurrence_K(N: float) -> float:
    """K_N via K_N = -I_N / N^2 + (N-1)/N K_{N-2}."""
    if not N >= 0:
        raise DomainError("recurrence_K needs N >= 0")
    e, steps = _reduce(N)
    I = _base_I(e)
    K = _base_K(e)
    for _ in range(steps):
        e += 2.0
        I *= (e - 1.0) / e
        K = -I / (e * e) + (e - 1.0) / e * K
    return K


def S_sum(N: float) -> float:
    """S_N = sum_{i=0}^{ceil(N/2)-1} 1/(N-2i)^2."""
    if not N > 0:
        raise DomainError("S_N needs N > 0")
    i = np.arange(_ceil_half(N))
    return math.fsum(1.0 / (N - 2.0 * i) ** 2)


@dataclass(frozen=True)
class SphericalRecurrenceState:
    N: float
    I_N: float
    K_N: float
    S_N: float
    h: float

    @classmethod
    def at(cls, N: float) -> "SphericalRecurrenceState":
        if not N > 0:
            raise DomainError("state needs N > 0")
        h = N / 2.0 - _ceil_half(N) + 1.0
        return cls(N, recurrence_I(N), recurrence_K(N), S_sum(N), h)


def hurwitz_zeta2(h: float, terms: int = 1000) -> float:
    """zeta(2, h) = sum_k 1/(h+k)^2 by direct summation plus an Euler-Maclaurin tail.

    With x = h + M the tail is 1/x + 1/(2x^2) + 1/(6x^3) - 1/(30x^5) + ...;
    dropping the last term leaves an error below 1/(30 M^5).
    """
    if not 0 < h <= 1:
        raise DomainError("hurwitz_zeta2 needs h in (0, 1]")
    k = np.arange(terms, dtype=float)
    head = math.fsum((1.0 / (h + k) ** 2)[::-1].tolist())
    x = h + terms
    tail = 1.0 / x + 0.5 / x**2 + 1.0 / (6.0 * x**3) - 1.0 / (30.0 * x**5)
    return head + tail


def hurwitz_tail_bracket(h: float, terms: int = 1000) -> tuple[float, float]:
    """Enclosure of zeta(2, h) from successive Euler-Maclaurin truncations.

    For the completely monotone summand 1/t^2 the truncated expansions
    alternate around the true tail, so consecutive orders bracket it.
    """
    if not 0 < h <= 1:
        raise DomainError("hurwitz_tail_bracket needs h in (0, 1]")
    k = np.arange(terms, dtype=float)
    head = math.fsum((1.0 / (h + k) ** 2)[::-1].tolist())
    x = h + terms
    upper = 1.0 / x + 0.5 / x**2 + 1.0 / (6.0 * x**3)
    return head + upper - 1.0 / (30.0 * x**5), head + upper


def spherical_h(N: float) -> float:
    m = math.ceil((N - 1.0) / 2.0)
    return (N - 1.0) / 2.0 - m + 1.0


def spherical_variance_closed_form(N: float) -> float:
    """Centered second moment of sigma^N from the Hurwitz zeta expression."""
    if not N > 1:
        raise DomainError("closed form needs N > 1")
    h = spherical_h(N)
    m = math.ceil((N - 1.0) / 2.0)
    partial = math.fsum(1.0 / (h + k) ** 2 for k in range(m))
    return 0.5 * (hurwitz_zeta2(h) - partial)


def spherical_variance_quadrature(N: float) -> float:
    return centered_second_moment(SphericalModel(N))


def integer_closed_form(N: int) -> float:
    """Finite sums for integer N: even N = 2n, odd N = 2n - 1."""
    if N < 2 or int(N) != N:
        raise DomainError("integer formula needs an integer N >= 2")
    N = int(N)
    if N % 2 == 0:
        n = N // 2
        return math.pi**2 / 4 - math.fsum(2.0 / (2 * k - 1) ** 2 for k in range(1, n + 1))
    n = (N + 1) // 2
    return math.pi**2 / 12 - math.fsum(2.0 / (2 * k) ** 2 for k in range(1, n))


def variance_via_recurrence(N: float) -> float:
    """2 K_{N-1} / I_{N-1}."""
    if not N > 1:
        raise DomainError("needs N > 1")
    return 2.0 * recurrence_K(N - 1.0) / recurrence_I(N - 1.0)


def variance_upper_bound(N: float) -> float:
    """(pi^2/4)(1 - I_{N+1}/I_{N-1}) = (pi^2/4) / (N+1) for value(N)."""
    return (math.pi**2 / 4.0) / (N + 1.0)


@dataclass(frozen=True)
class AsymptoticRow:
    N: float
    value: float
    n_times_value: float
    deviation: float
    over_sqrt_n: float


def spherical_asymptotic_check(N_list) -> list[AsymptoticRow]:
    """Rows (N, value, N*value, |N*value - 1|, value/sqrt(N)).

    The last column is the printed-limit form, which tends to 0 rather
    than 1; it is kept so the discrepancy stays visible.
    """
    rows = []
    for N in map(float, N_list):
        if not N > 1:
            raise DomainError("asymptotic table needs N > 1")
        v = spherical_variance_closed_form(float(N))
        rows.append(AsymptoticRow(N, v, N * v, abs(N * v - 1.0), v / math.sqrt(N)))
    return rows


def asymptotic_monotone(rows: list[AsymptoticRow], n_min: float = 20.0) -> bool:
    dev = [r.deviation for r in sorted(rows, key=lambda r: r.N) if r.N >= n_min]
    return all(b < a for a, b in zip(dev, dev[1:]))


def gaussian_cross_check() -> tuple[float, float]:
    g = Gaussian()
    return var_lambda(g, "t2"), centered_second_moment(g)


def parse_N_range(text: str) -> list[float]:
    """'2', '2,3,5' or 'start:stop:count[:log]' style ranges; 'a:b:log' uses 10 points."""
    text = text.strip()
    if ":" not in text:
        return [float(x) for x in text.split(",") if x]
    parts = text.split(":")
    start, stop = float(parts[0]), float(parts[1])
    rest = parts[2:]
    log = "log" in rest
    nums = [p for p in rest if p != "log"]
    count = int(nums[0]) if nums else 10
    if log:
        if start <= 0:
            raise DomainError("log range needs a positive start")
        return np.geomspace(start, stop, count).tolist()
    return np.linspace(start, stop, count).tolist()
