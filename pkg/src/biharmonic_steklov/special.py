"""Ultraspherical modified Bessel functions.

``i_l(z) = z**(1 - n/2) * I_{n/2 - 1 + l}(z)`` for an ambient dimension ``n``.
Values come from the ascending power series; derivatives are obtained from
the index-raising recursions, so they only require ``i_{l+1}, i_{l+2},
i_{l+3}``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

SERIES_RTOL = 1e-15
MAX_TERMS = 300


@dataclass(frozen=True)
class BesselEval:
    """``i_l`` and its first three derivatives at ``z``."""

    l: int
    n: int
    z: float
    value: float
    d1: float
    d2: float
    d3: float


def _check_args(n: int, l: int, z: float) -> None:
    if int(n) != n or n < 2:
        raise ValueError(f"dimension n must be an integer >= 2, got {n}")
    if int(l) != l or l < 0:
        raise ValueError(f"order l must be a nonnegative integer, got {l}")
    if not z > 0.0:
        raise ValueError(f"argument z must be positive, got {z}")


def gamma_half_integer(x: float) -> float:
    """``Gamma(x)`` for ``x`` a positive integer or half-integer, from exact integer ratios."""
    twice = round(2 * x)
    if twice != 2 * x or twice <= 0:
        raise ValueError(f"expected a positive integer or half-integer, got {x}")
    if twice % 2 == 0:
        return float(math.factorial(twice // 2 - 1))
    k = (twice - 1) // 2  # x = k + 1/2
    return math.factorial(2 * k) / (4**k * math.factorial(k)) * math.sqrt(math.pi)


def _leading_term(n: int, l: int, z: float) -> float:
    """``2**-nu z**l / Gamma(nu + 1)``, the k = 0 series term."""
    nu = 0.5 * n - 1.0 + l
    if nu + 1.0 < 170.0:
        lead = z**l * 2.0**-nu / gamma_half_integer(nu + 1.0)
        if lead > 1e-290 and math.isfinite(lead):
            return lead
    # log space for extreme orders/arguments
    log_lead = l * math.log(z) - nu * math.log(2.0) - math.lgamma(nu + 1.0)
    if log_lead > 709.0:
        raise OverflowError(f"i_{l}({z}) exceeds the floating range (n={n})")
    return math.exp(log_lead)


def _series_sum(n: int, l: int, z: float) -> float:
    """``sum_k (z*z/4)**k Gamma(nu + 1) / (k! Gamma(k + nu + 1))``; equals 1 at ``z = 0``."""
    nu = 0.5 * n - 1.0 + l
    q = 0.25 * z * z
    term = 1.0
    total = 1.0
    for k in range(1, MAX_TERMS + 1):
        term *= q / (k * (k + nu))
        total += term
        if term <= SERIES_RTOL * total:
            return total
    raise ArithmeticError(
        f"series for i_{l}({z}) did not converge in {MAX_TERMS} terms (n={n})"
    )


def ultra_i(n: int, l: int, z: float) -> float:
    """Return ``i_l(z)`` in dimension ``n`` by direct series summation.

    The power ``z**(1-n/2)`` is folded into the series so that
    ``i_l(z) = 2**-nu * z**l * sum_k (z*z/4)**k / (k! Gamma(k + nu + 1))``
    with ``nu = n/2 - 1 + l``; this stays finite as ``z -> 0``.
    """
    _check_args(n, l, z)
    value = _leading_term(n, l, z) * _series_sum(n, l, z)
    if not math.isfinite(value):
        raise OverflowError(f"i_{l}({z}) exceeds the floating range (n={n})")
    return value


def ultra_i_ratio(n: int, l: int, z: float) -> float:
    """``i_{l+1}(z) / i_l(z)`` without forming either factor; safe where both underflow."""
    _check_args(n, l, z)
    nu = 0.5 * n - 1.0 + l
    return z / (2.0 * (nu + 1.0)) * _series_sum(n, l + 1, z) / _series_sum(n, l, z)


def bessel_i_ultra(n: int, l: int, z: float) -> BesselEval:
    """Evaluate ``i_l`` and its first three derivatives at ``z``.

    Raises ``ValueError`` for ``z <= 0`` or ``n < 2`` and ``OverflowError`` if
    any of the required values leaves the double range.
    """
    i0, i1, i2, i3 = (ultra_i(n, l + k, z) for k in range(4))
    d1 = (l / z) * i0 + i1
    d2 = (l * (l - 1) / z**2) * i0 + ((2 * l + 1) / z) * i1 + i2
    d3 = (
        (l * (l - 1) * (l - 2) / z**3) * i0
        + (3 * l * l / z**2) * i1
        + ((3 * l + 3) / z) * i2
        + i3
    )
    return BesselEval(l=l, n=n, z=z, value=i0, d1=d1, d2=d2, d3=d3)


def _series_derivatives(n: int, l: int, z: float) -> tuple[float, float, float, float]:
    """``i_l`` and derivatives by differentiating the power series term by term.

    Only used as the independent side of :func:`recursion_residuals`.
    """
    nu = 0.5 * n - 1.0 + l
    q = 0.25 * z * z
    # term_k = c_k z^p with p = 2k + l; derivatives scale by p/z, p(p-1)/z^2, ...
    sums = [0.0, 0.0, 0.0, 0.0]
    term = 1.0
    for k in range(MAX_TERMS + 1):
        if k:
            term *= q / (k * (k + nu))
        p = 2 * k + l
        contrib = (term, term * p / z, term * p * (p - 1) / z**2, term * p * (p - 1) * (p - 2) / z**3)
        for j in range(4):
            sums[j] += contrib[j]
        if k > 2 and term <= SERIES_RTOL * sums[0] and contrib[3] <= SERIES_RTOL * abs(sums[3]):
            break
    scale = _leading_term(n, l, z)
    return tuple(scale * s for s in sums)  # type: ignore[return-value]


def recursion_residuals(
    n: int, l: int, z: float, relative: bool = False
) -> tuple[float, float, float, float]:
    """Residuals (lhs - rhs) of the four recursions linking ``i_l`` to higher orders.

    Left-hand sides come from the term-by-term differentiated series, right-hand
    sides from separately summed series of ``i_{l+1}, i_{l+2}, i_{l+3}``.

    The order-lowering identity carries the dimension:
    ``i_l = ((n + 2l) / z) i_{l+1} + i_{l+2}``, which reduces to
    ``(2 + 2l) / z`` only for ``n = 2``.

    With ``relative=True`` each residual is divided by the largest absolute
    term of its identity.
    """
    _check_args(n, l, z)
    v, d1, d2, d3 = _series_derivatives(n, l, z)
    i1, i2, i3 = (ultra_i(n, l + k, z) for k in (1, 2, 3))
    identities = (
        (v, (((n + 2 * l) / z) * i1, i2)),
        (d1, ((l / z) * v, i1)),
        (d2, ((l * (l - 1) / z**2) * v, ((2 * l + 1) / z) * i1, i2)),
        (
            d3,
            (
                (l * (l - 1) * (l - 2) / z**3) * v,
                (3 * l * l / z**2) * i1,
                ((3 * l + 3) / z) * i2,
                i3,
            ),
        ),
    )
    out = []
    for lhs, terms in identities:
        res = lhs - math.fsum(terms)
        if relative:
            res /= max(abs(lhs), *(abs(t) for t in terms))
        out.append(res)
    return tuple(out)  # type: ignore[return-value]
