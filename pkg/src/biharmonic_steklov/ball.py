"""Closed-form spectrum of the biharmonic Steklov problem on the unit ball.

Every eigenfunction separates as ``R_l(r) Y_l(theta)`` with ``Y_l`` a degree-l
spherical harmonic and ``R_l(r) = A_l r**l + B_l i_l(sqrt(tau) r)``.  The
coefficient ``B_l`` is fixed by the bending-moment boundary condition and the
eigenvalue ``lambda_(l)`` by the shear-force condition.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .params import PlateParams, SolverError, Spectrum
from .special import bessel_i_ultra, ultra_i, ultra_i_ratio

DENOM_RTOL = 1e-12


@dataclass(frozen=True)
class BallMode:
    l: int
    lam: float
    a_coef: float
    b_coef: float
    denom: float
    numer: float

    def radial(self, params: PlateParams, r, deriv: int = 0):
        """``R_l`` (or its ``deriv``-th radial derivative, deriv <= 3) at radius ``r``."""
        return radial_profile(params, self, r, deriv)


def _check_index(l: int) -> None:
    if int(l) != l or l < 0:
        raise ValueError(f"mode index l must be a nonnegative integer, got {l}")


def _flag_denominator(value: float, terms: list[float], what: str) -> None:
    scale = max(abs(t) for t in terms)
    if scale > 0.0 and abs(value) < DENOM_RTOL * scale:
        raise SolverError(f"{what} is numerically zero ({value:.3e} vs scale {scale:.3e})")


def _bc1_denominator(params: PlateParams, l: int) -> tuple[float, list[float]]:
    n, tau, s = params.n, params.tau, params.sigma
    z = math.sqrt(tau)
    b = bessel_i_ultra(n, l, z)
    terms = [tau * b.d2, z * s * (n - 1) * b.d1, -s * l * (l + n - 2) * b.value]
    return sum(terms), terms


def mode_b_coefficient(params: PlateParams, l: int) -> float:
    """``B_l`` for the normalization ``A_l = 1``."""
    params.validate()
    _check_index(l)
    if l <= 1:
        return 0.0
    den, terms = _bc1_denominator(params, l)
    _flag_denominator(den, terms, "B_l denominator")
    return (1.0 - params.sigma) * l * (1 - l) / den


def _raw_parts(params: PlateParams, l: int) -> tuple[float, float]:
    n, tau, s = params.n, params.tau, params.sigma
    z = math.sqrt(tau)
    b = bessel_i_ultra(n, l, z)
    i0, i1, i2, i3 = b.value, b.d1, b.d2, b.d3
    dterms = [
        tau * i2,
        z * s * (n - 1) * i1,
        -s * l * (l + n - 2) * i0,
        (1 - s) * l * (1 - l) * i0,
    ]
    denom = sum(dterms)
    _flag_denominator(denom, dterms, "eigenvalue denominator")
    numer = (
        -(l**2) * (l + n - 2) * (s * tau + (1 - s) * (l - 1) * (s * l + s * n - 3 - s)) * i0
        + (
            tau * z * l * (s * n + l * s - 2 * s - l + 1)
            + z * (1 - s) * l * (l - 1) * ((l + n - 2) * (s * n - s - 2 * l + s * l) - n + 1)
        )
        * i1
        + tau * l * (tau + (1 - s) * (l + 2 * n - 3) * (l - 1)) * i2
        + tau * z * (1 - s) * l * (l - 1) * i3
    )
    return numer, denom


def mode_eigenvalue_raw(params: PlateParams, l: int) -> float:
    """``lambda_(l)`` from the literal numerator/denominator in derivatives of ``i_l``."""
    params.validate()
    _check_index(l)
    numer, denom = _raw_parts(params, l)
    return numer / denom


def simplified_denominator(params: PlateParams, l: int) -> float:
    """``sqrt(tau)(2l + sigma n + 1 - sigma) i_{l+1} + tau i_{l+2}`` at ``sqrt(tau)``."""
    n, tau, s = params.n, params.tau, params.sigma
    z = math.sqrt(tau)
    return z * (2 * l + s * n + 1 - s) * ultra_i(n, l + 1, z) + tau * ultra_i(n, l + 2, z)


def mode_eigenvalue_simplified(params: PlateParams, l: int) -> float:
    """``lambda_(l) = tau l + correction`` written with ``i_{l+1}, i_{l+2}`` only.

    The correction carries the factor ``(1 - sigma) l (l - 1)`` and is
    nonnegative in the admissible window, so ``lambda_(l) >= tau l``.
    """
    params.validate()
    _check_index(l)
    n, tau, s = params.n, params.tau, params.sigma
    if l <= 1:
        return tau * l
    z = math.sqrt(tau)
    # divide through by i_{l+1}, which underflows long before the ratio does
    ratio = ultra_i_ratio(n, l + 1, z)
    den = (2 * l + s * n + 1 - s) + z * ratio
    c1 = (1 - s) * l * (l - 1) * ((l + n - 2) * (s * n - s + s * l + 1) + 3 * l * l + 2 * n * l - 2 * l)
    c2 = z * (2 * l + n - 2) * (l - 1) * l * (1 - s)
    return tau * l + (c1 + c2 * ratio) / den


def ball_mode(params: PlateParams, l: int) -> BallMode:
    params.validate()
    _check_index(l)
    numer, denom = _raw_parts(params, l)
    lam = mode_eigenvalue_simplified(params, l)
    return BallMode(
        l=int(l),
        lam=lam,
        a_coef=1.0,
        b_coef=mode_b_coefficient(params, l),
        denom=denom,
        numer=numer,
    )


def radial_profile(params: PlateParams, mode: BallMode, r, deriv: int = 0):
    """``d^k/dr^k R_l(r)`` for k = ``deriv`` in 0..3."""
    if deriv not in (0, 1, 2, 3):
        raise ValueError("deriv must be 0, 1, 2 or 3")
    l = mode.l
    r_arr = np.asarray(r, dtype=float)
    falling = math.prod(range(l - deriv + 1, l + 1)) if deriv <= l else 0
    poly = mode.a_coef * falling * np.power(r_arr, max(l - deriv, 0)) if falling else 0.0 * r_arr
    if mode.b_coef == 0.0:
        return poly
    z = math.sqrt(params.tau)
    flat = np.atleast_1d(r_arr).ravel()
    vals = np.empty_like(flat)
    for k, rk in enumerate(flat):
        b = bessel_i_ultra(params.n, l, z * rk)
        vals[k] = (b.value, b.d1, b.d2, b.d3)[deriv]
    vals = vals.reshape(np.shape(r_arr)) * z**deriv
    return poly + mode.b_coef * vals


def eigenfunction_2d(params: PlateParams, mode: BallMode, x, y, kind: str = "cos"):
    """Pointwise ball eigenfunction in the plane: ``R_l(r) cos(l theta)`` or ``sin``."""
    if params.n != 2:
        raise ValueError("pointwise eigenfunctions are only available for n = 2")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    r = np.hypot(x, y)
    th = np.arctan2(y, x)
    ang = np.cos(mode.l * th) if kind == "cos" else np.sin(mode.l * th)
    safe_r = np.where(r > 0.0, r, 1.0)
    radial = radial_profile(params, mode, safe_r)
    radial = np.where(r > 0.0, radial, 1.0 if mode.l == 0 else 0.0)
    return radial * ang


def boundary_residuals(params: PlateParams, mode: BallMode) -> tuple[float, float]:
    """Residuals of both natural boundary conditions at ``r = 1``.

    Uses ``Delta = d_rr + ((n-1)/r) d_r + Delta_S / r**2`` with
    ``Delta_S Y_l = -l(l+n-2) Y_l``; the second residual is
    ``(shear-force lhs) - lambda_(l) R_l(1)``.
    """
    n, tau, s = params.n, params.tau, params.sigma
    ang = mode.l * (mode.l + n - 2)
    R, R1, R2, R3 = (float(radial_profile(params, mode, 1.0, k)) for k in range(4))
    lap = R2 + (n - 1) * R1 - ang * R
    bending = (1 - s) * R2 + s * lap
    dlap = R3 + (n - 1) * (R2 - R1) - ang * (R1 - 2 * R)
    shear = tau * R1 + (1 - s) * ang * (R1 - R) - dlap
    return bending, shear - mode.lam * R


def multiplicity(n: int, l: int) -> int:
    """Dimension of the space of degree-l spherical harmonics in ``R^n``."""
    if l == 0:
        return 1
    lower = math.comb(n + l - 3, l - 2) if l >= 2 else 0
    return math.comb(n + l - 1, l) - lower


def ball_spectrum(params: PlateParams, count: int) -> Spectrum:
    """First ``count`` eigenvalues of the unit ball, with multiplicity, ascending.

    Indices ``l`` are scanned until ``tau * l`` exceeds the current
    ``count``-th value; since ``lambda_(l) >= tau l`` no later index can enter.
    """
    params.validate()
    if count < 1:
        raise ValueError("count must be >= 1")
    entries: list[tuple[float, int]] = []
    l = 0
    while True:
        if len(entries) >= count:
            cutoff = sorted(v for v, _ in entries)[count - 1]
            if params.tau * l > cutoff:
                break
        lam = mode_eigenvalue_simplified(params, l)
        entries.extend([(lam, l)] * multiplicity(params.n, l))
        l += 1
    entries.sort(key=lambda e: (e[0], e[1]))
    entries = entries[:count]
    values = np.array([v for v, _ in entries])
    clusters: list[list[int]] = []
    for k, (_, li) in enumerate(entries):
        if clusters and entries[clusters[-1][0]][1] == li:
            clusters[-1].append(k)
        else:
            clusters.append([k])
    return Spectrum(eigenvalues=values, clusters=clusters)
