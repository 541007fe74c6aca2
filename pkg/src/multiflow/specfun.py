"""Special functions behind the closed-form dispersion and normalization laws.

Three scalar functions are exposed:

* :func:`gamma_fn` -- the gamma function with explicit pole detection,
* :func:`kummer_phi` -- Kummer's confluent hypergeometric function
  ``Phi(a; b; z)``, stable for strongly negative arguments,
* :func:`gauss_2f1` -- the Gauss hypergeometric function ``F(a, b; c; z)``,
  summed as a series inside the unit disk and analytically continued for
  ``z < -1`` in the one-parameter pattern ``F(1, b; b+1; z)`` that the
  dispersion integrals of binomial multiscale measures produce.

The continuation used for that pattern is

    F(1, b; b+1; z) = b/(b-1) * w * F(1, 1; 2-b; w) + Gamma(b+1)Gamma(1-b)(-z)^(-b)

with ``w = 1/(1-z)``.  It holds for every ``z < 0`` but degenerates at integer
``b`` where both terms blow up while their sum stays finite; there the exact
limit is the elementary logarithmic form

    F(1, k; k+1; z) = k z^(-k) [ -log(1-z) - sum_{m=1}^{k-1} z^m / m ],

which this module switches to whenever ``|sin(pi b)|`` falls below a small
threshold (the limit value; the neglected O(b-k) correction is below 1e-8).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ConvergenceError, DomainError, PoleError

__all__ = ["SeriesControl", "DEFAULT_CONTROL", "gamma_fn", "kummer_phi", "gauss_2f1"]

# |z| above which the confluent series is abandoned for the large-|z| expansion.
_PHI_ASYMPTOTIC_CUT = 30.0
# |sin(pi*b)| below which the continuation switches to the integer-b limit form.
_REMOVABLE_POLE_SIN = 1e-8
# z at or below which the (1, b; b+1; z) pattern is continued instead of summed.
_F21_CONTINUATION_CUT = -0.5
# largest non-integer b whose continuation valley stays above double precision.
_CONTINUATION_B_MAX = 60.0


def _CANCELLATION_BAR(ctl: "SeriesControl") -> float:
    """Largest tolerated roundoff-floor-to-result ratio before a series
    evaluation is refused instead of silently degraded."""
    return max(1e-6, ctl.rel_tol)

_PATTERN_TOL = 1e-12


@dataclass(frozen=True)
class SeriesControl:
    """Truncation policy for hypergeometric series.

    At least one of ``abs_tol`` and ``rel_tol`` must be positive; a series is
    accepted once two consecutive terms fall below the combined threshold.
    """

    max_terms: int = 10_000
    abs_tol: float = 0.0
    rel_tol: float = 1e-14

    def __post_init__(self) -> None:
        if self.max_terms < 1:
            raise DomainError(f"max_terms must be >= 1, got {self.max_terms}")
        if self.abs_tol < 0.0 or self.rel_tol < 0.0:
            raise DomainError("tolerances must be nonnegative")
        if self.abs_tol == 0.0 and self.rel_tol == 0.0:
            raise DomainError("at least one of abs_tol, rel_tol must be positive")

    def threshold(self, accumulated: float) -> float:
        return max(self.abs_tol, self.rel_tol * abs(accumulated))


DEFAULT_CONTROL = SeriesControl()


def _is_nonpositive_integer(x: float, tol: float = 1e-12) -> bool:
    return x <= 0.5 and abs(x - round(x)) <= tol


def gamma_fn(x: float) -> float:
    """Gamma function with an explicit :class:`PoleError` at 0, -1, -2, ..."""
    if _is_nonpositive_integer(x):
        raise PoleError(f"gamma pole at x = {x}")
    try:
        return math.gamma(x)
    except OverflowError as exc:
        raise ConvergenceError(f"gamma overflows at x = {x}") from exc
    except ValueError as exc:  # pragma: no cover - guarded above
        raise PoleError(f"gamma evaluation failed at x = {x}") from exc


def _series_1f1(a: float, b: float, z: float, ctl: SeriesControl) -> float:
    """Direct Taylor sum of Phi(a;b;z).  Caller guarantees b has no pole.

    Tracks the largest intermediate term: for alternating sums whose result
    is far below the peak term, the roundoff floor can exceed the requested
    tolerance, and pretending otherwise would return garbage.
    """
    total = 1.0
    term = 1.0
    peak = 1.0
    prev_abs = 1.0
    small_runs = 0
    crossing = -b if b < 0.0 else 0.0
    for n in range(ctl.max_terms):
        term *= (a + n) / (b + n) * z / (n + 1)
        total += term
        peak = max(peak, abs(term))
        # negative non-integer b: denominators pass near zero; only trust a
        # stop past the crossing and once magnitudes are decreasing again
        settled = n > crossing and abs(term) <= prev_abs
        prev_abs = abs(term)
        if settled and abs(term) <= ctl.threshold(total):
            small_runs += 1
            if small_runs >= 2:
                if 5e-16 * peak > _CANCELLATION_BAR(ctl) * abs(total):
                    raise ConvergenceError(
                        f"Phi({a};{b};{z}) series cancellation: fewer than six "
                        "significant digits are achievable in double precision"
                    )
                return total
        else:
            small_runs = 0
    raise ConvergenceError(
        f"Phi({a};{b};{z}) series did not converge within {ctl.max_terms} terms"
    )


def _asymptotic_1f1_negative(a: float, b: float, z: float, ctl: SeriesControl) -> float:
    """Phi(a;b;z) for z -> -inf:  Gamma(b)/Gamma(b-a) (-z)^(-a) [1 + O(1/z)].

    The correction series sum_k (a)_k (a-b+1)_k / (k! (-z)^k) is summed to its
    smallest term; at |z| >= 30 and moderate parameters the truncation floor is
    far below every tolerance used in this package.
    """
    if _is_nonpositive_integer(b - a):
        raise DomainError(
            f"asymptotic branch of Phi undefined for b - a = {b - a} (leading term vanishes)"
        )
    inv = 1.0 / (-z)
    total = 1.0
    term = 1.0
    prev = math.inf
    for k in range(ctl.max_terms):
        term *= (a + k) * (a - b + 1.0 + k) * inv / (k + 1)
        if abs(term) >= prev:  # divergent tail reached: stop at smallest term
            break
        total += term
        prev = abs(term)
        if abs(term) <= ctl.threshold(total):
            break
    if prev > 1e-8 * abs(total):
        # the optimally truncated expansion cannot certify ~8 digits here
        raise ConvergenceError(
            f"Phi({a};{b};{z}) asymptotic truncation floor {prev:.2e} is too "
            "coarse; argument not deep enough for these parameters"
        )
    prefactor = gamma_fn(b) / gamma_fn(b - a) * (-z) ** (-a)
    return prefactor * total


def kummer_phi(a: float, b: float, z: float, ctl: SeriesControl = DEFAULT_CONTROL) -> float:
    """Kummer confluent hypergeometric function Phi(a;b;z) = sum (a)_n/(b)_n z^n/n!.

    Branches: direct series for z >= 0; the reflection
    Phi(a;b;z) = e^z Phi(b-a;b;-z) for moderately negative z (all series terms
    positive when b > a, killing cancellation); the large-|z| expansion
    ~ Gamma(b)/Gamma(b-a) (-z)^(-a) below ``z = -30``.
    """
    if _is_nonpositive_integer(b):
        raise PoleError(f"Phi pole: b = {b} is a non-positive integer")
    if z == 0.0 or a == 0.0:
        return 1.0
    if a == b:
        return math.exp(z)
    if z > 0.0:
        if z > 700.0:
            raise ConvergenceError(f"Phi overflow for z = {z}")
        return _series_1f1(a, b, z, ctl)
    if z <= -_PHI_ASYMPTOTIC_CUT:
        return _asymptotic_1f1_negative(a, b, z, ctl)
    if b > 0.0 and b - a > 0.0:
        return math.exp(z) * _series_1f1(b - a, b, -z, ctl)
    return _series_1f1(a, b, z, ctl)


def _series_2f1(a: float, b: float, c: float, z: float, ctl: SeriesControl) -> float:
    """Direct Taylor sum of F(a,b;c;z); caller guarantees |z| < 1 and valid c.

    A negative (non-integer) c makes the denominators (c)_n pass close to
    zero near n = -c: the terms dip through a deep valley and resurge on the
    other side.  Convergence stops are suppressed until that point is passed,
    otherwise the resurgent contribution (which can dominate the sum) would
    be silently dropped.
    """
    total = 1.0
    term = 1.0
    peak = 1.0
    prev_abs = 1.0
    small_runs = 0
    crossing = -c if c < 0.0 else 0.0
    if crossing >= ctl.max_terms:
        raise ConvergenceError(
            f"F({a},{b};{c};{z}) needs more than max_terms={ctl.max_terms} terms "
            "to clear the denominator zero crossing"
        )
    for n in range(ctl.max_terms):
        term *= (a + n) * (b + n) / ((c + n) * (n + 1)) * z
        total += term
        peak = max(peak, abs(term))
        # a stop is only trusted past the crossing and once the resurgent
        # bump (growing magnitudes) is over
        settled = n > crossing and abs(term) <= prev_abs
        prev_abs = abs(term)
        if settled and abs(term) <= ctl.threshold(total):
            small_runs += 1
            if small_runs >= 2:
                if 5e-16 * peak > _CANCELLATION_BAR(ctl) * abs(total):
                    raise ConvergenceError(
                        f"F({a},{b};{c};{z}) series cancellation: fewer than six "
                        "significant digits are achievable in double precision"
                    )
                return total
        else:
            small_runs = 0
    raise ConvergenceError(
        f"F({a},{b};{c};{z}) series did not converge within {ctl.max_terms} terms"
    )


def _f21_one_b_integer(k: int, z: float) -> float:
    """Exact F(1, k; k+1; z) for integer k >= 1 and z < 0.

    F(1,k;k+1;z) = k z^(-k) [-log(1-z) - sum_{m=1}^{k-1} z^m/m].
    """
    if k * math.log(max(abs(z), 1.0)) > 700.0:
        raise ConvergenceError(f"integer-order form overflows for k={k}, z={z}")
    partial = 0.0
    zp = 1.0
    for m in range(1, k):
        zp *= z
        partial += zp / m
    return k * z ** (-k) * (-math.log1p(-z) - partial)


def _f21_pattern_continuation(b: float, z: float, ctl: SeriesControl) -> float:
    """F(1, b; b+1; z) for z < 0 via the w = 1/(1-z) continuation.

    Near integer b the two continuation terms diverge with a finite sum; the
    exact integer-b limit form is substituted inside a narrow window around
    each integer.  For large non-integer b the inner series develops a deep
    valley followed by a resurgent tail (its denominators pass close to
    zero); beyond b ~ 60 the valley undercuts double precision and the
    evaluation is rejected rather than silently degraded.
    """
    if abs(math.sin(math.pi * b)) < _REMOVABLE_POLE_SIN:
        k = round(b)
        if k >= 1:
            return _f21_one_b_integer(int(k), z)
        if k == 0:
            return 1.0  # F(1, 0; 1; z) = 1, approached smoothly as b -> 0
        raise PoleError(
            f"F(1,b;b+1;z) diverges at negative integer b = {k} (c = b+1 pole)"
        )
    if b > _CONTINUATION_B_MAX:
        raise ConvergenceError(
            f"continuation of F(1,{b};{b + 1};{z}) is unstable for b > "
            f"{_CONTINUATION_B_MAX}: the resurgent part of the inner series "
            "falls below double precision"
        )
    w = 1.0 / (1.0 - z)
    head = b / (b - 1.0) * w * _series_2f1(1.0, 1.0, 2.0 - b, w, ctl)
    # Gamma(b+1)Gamma(1-b)(-z)^(-b) = pi b/sin(pi b) * (-z)^(-b), assembled in
    # log space: the factors overflow for large |b| while the product is tame.
    log_mag = (
        math.log(math.pi * abs(b))
        - math.log(abs(math.sin(math.pi * b)))
        - b * math.log(-z)
    )
    if log_mag > 700.0:
        raise ConvergenceError(
            f"F(1,{b};{b + 1};{z}) continuation term overflows (exponent {log_mag:.1f})"
        )
    sign = 1.0 if (b > 0.0) == (math.sin(math.pi * b) > 0.0) else -1.0
    return head + sign * math.exp(log_mag)


def gauss_2f1(
    a: float, b: float, c: float, z: float, ctl: SeriesControl = DEFAULT_CONTROL
) -> float:
    """Gauss hypergeometric F(a,b;c;z) = sum (a)_n (b)_n/(c)_n z^n/n!.

    Supported domain: the Taylor series for |z| < 1 with any parameters, plus
    the analytic continuation to z <= -1 restricted to the pattern
    (1, b; b+1; z).  Other arguments outside the unit disk raise
    :class:`DomainError`; near-negative-integer b in the continuation raises
    :class:`PoleError` (the function itself diverges there).
    """
    if _is_nonpositive_integer(c):
        raise PoleError(f"F pole: c = {c} is a non-positive integer")
    if z == 0.0:
        return 1.0
    if z >= 1.0:
        raise DomainError(f"F(a,b;c;z) not defined for z >= 1 (got z = {z})")
    pattern = abs(a - 1.0) <= _PATTERN_TOL and abs(c - (b + 1.0)) <= _PATTERN_TOL * max(
        1.0, abs(b) + 1.0
    )
    if pattern and z <= _F21_CONTINUATION_CUT:
        # Inside the disk (-1 < z <= -0.5) the continuation converges much
        # faster than the direct series; but its two terms grow like
        # (1/|z|)^b there, so for larger b the cancellation would eat the
        # answer and the direct series (still geometric) is the stable route.
        if z <= -0.95 or b <= 12.0 or abs(z) >= 1.0:
            return _f21_pattern_continuation(b, z, ctl)
        return _series_2f1(a, b, c, z, ctl)
    if abs(z) < 1.0:
        return _series_2f1(a, b, c, z, ctl)
    raise DomainError(
        f"F({a},{b};{c};{z}) is outside the series radius and the (1,b;b+1;z) continuation pattern"
    )
