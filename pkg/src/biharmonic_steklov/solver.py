"""Rayleigh-Ritz discretization of the biharmonic Steklov and Neumann problems.

The trial space is spanned by monomials ``xi**i * eta**j`` (``i + j <= degree``)
in coordinates ``(x - x0) / L`` about the boundary centroid ``x0``, with ``L``
the largest boundary distance from ``x0``.  Because ``x0`` and ``L`` follow any
dilation of the domain, the discrete spaces on ``Omega`` and ``s * Omega`` are
exact images of each other.

The energy form is

    a(u, v) = int (1 - sigma) D2u : D2v + sigma Lap u Lap v + tau grad u . grad v dx

and the mass form is either the boundary form ``int rho u v dS`` (Steklov) or
the interior form ``int rho_eps u v dx`` (Neumann).  Constants span the kernel
of ``a``; they are split off by working with mean-zero representatives, after
which ``a`` is SPD and the eigenvalues ``mu`` of the mass form in the
``a``-inner product give ``lambda = 1 / mu``.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg as la

from .geometry import (
    Domain,
    QuadratureRule,
    centroid_shift,
    focal_epsilon,
    make_quadrature,
    make_shell_quadrature,
)
from .params import PlateParams, SolverError, Spectrum, cluster_eigenvalues

log = logging.getLogger(__name__)

COND_LIMIT = 1e12
RANK_RTOL = 1e-10
MASS_RTOL = 1e-6
MIN_SHELL_NODES = 8


@dataclass(frozen=True)
class RitzBasis:
    degree: int
    origin: tuple[float, float]
    length: float

    @property
    def exponents(self) -> list[tuple[int, int]]:
        return [(i, k - i) for k in range(self.degree + 1) for i in range(k, -1, -1)]

    @property
    def size(self) -> int:
        return (self.degree + 1) * (self.degree + 2) // 2

    @classmethod
    def for_domain(cls, domain: Domain, degree: int, quad: QuadratureRule | None = None) -> "RitzBasis":
        quad = quad or make_quadrature(domain)
        x0 = centroid_shift(domain, quad)
        th = np.linspace(0.0, 2 * np.pi, 2048, endpoint=False)
        length = float(np.hypot(*(domain.boundary_points(th) - x0).T).max())
        return cls(degree=int(degree), origin=(float(x0[0]), float(x0[1])), length=length)

    def evaluate(self, pts: np.ndarray, order: int = 2) -> dict[str, np.ndarray]:
        """Basis values and exact derivatives, each of shape ``(size, npts)``.

        Keys: ``v``; with order >= 1 ``dx, dy``; with order >= 2 ``dxx, dxy, dyy``.
        """
        pts = np.atleast_2d(pts)
        L = self.length
        xi = (pts[:, 0] - self.origin[0]) / L
        eta = (pts[:, 1] - self.origin[1]) / L
        d = self.degree
        px = np.ones((d + 1, xi.size))
        py = np.ones((d + 1, xi.size))
        for k in range(1, d + 1):
            px[k] = px[k - 1] * xi
            py[k] = py[k - 1] * eta

        def pw(table, k):
            return table[k] if k >= 0 else np.zeros(xi.size)

        ex = self.exponents
        out = {"v": np.array([px[i] * py[j] for i, j in ex])}
        if order >= 1:
            out["dx"] = np.array([i * pw(px, i - 1) * py[j] for i, j in ex]) / L
            out["dy"] = np.array([j * px[i] * pw(py, j - 1) for i, j in ex]) / L
        if order >= 2:
            L2 = L * L
            out["dxx"] = np.array([i * (i - 1) * pw(px, i - 2) * py[j] for i, j in ex]) / L2
            out["dxy"] = np.array([i * j * pw(px, i - 1) * pw(py, j - 1) for i, j in ex]) / L2
            out["dyy"] = np.array([j * (j - 1) * px[i] * pw(py, j - 2) for i, j in ex]) / L2
        return out

    def __call__(self, coefficients, pts) -> np.ndarray:
        return np.asarray(coefficients) @ self.evaluate(pts, order=0)["v"]


@dataclass(frozen=True)
class DiscreteOperator:
    stiffness: np.ndarray
    mass: np.ndarray
    basis: RitzBasis
    params: PlateParams
    kind: str  # "steklov" or "neumann"


def _sym(m: np.ndarray) -> np.ndarray:
    upper = np.triu(m)
    return upper + np.triu(m, 1).T


def _gram(P: np.ndarray, Q: np.ndarray, w: np.ndarray) -> np.ndarray:
    return (P * w) @ Q.T


def energy_matrix(basis: RitzBasis, quad: QuadratureRule, params: PlateParams) -> np.ndarray:
    """Matrix of ``a(phi_i, phi_j)``; the Hessian product is the full Frobenius sum."""
    ev = basis.evaluate(quad.interior_points, order=2)
    w = quad.interior_weights
    s, tau = params.sigma, params.tau
    lap = ev["dxx"] + ev["dyy"]
    hess = _gram(ev["dxx"], ev["dxx"], w) + 2.0 * _gram(ev["dxy"], ev["dxy"], w) + _gram(ev["dyy"], ev["dyy"], w)
    grad = _gram(ev["dx"], ev["dx"], w) + _gram(ev["dy"], ev["dy"], w)
    return _sym((1.0 - s) * hess + s * _gram(lap, lap, w) + tau * grad)


def boundary_mass_matrix(basis: RitzBasis, quad: QuadratureRule, rho: float = 1.0) -> np.ndarray:
    v = basis.evaluate(quad.boundary_points, order=0)["v"]
    return _sym(rho * _gram(v, v, quad.boundary_weights))


def interior_mass_matrix(basis: RitzBasis, quad: QuadratureRule, density: np.ndarray) -> np.ndarray:
    v = basis.evaluate(quad.interior_points, order=0)["v"]
    return _sym(_gram(v, v, quad.interior_weights * density))


def assemble(
    domain: Domain,
    quad: QuadratureRule | None,
    params: PlateParams,
    density=1.0,
    degree: int = 14,
    basis: RitzBasis | None = None,
    validate: bool = True,
) -> DiscreteOperator:
    """Assemble the stiffness/mass pair.

    ``density`` is either a positive constant (boundary mass, Steklov) or an
    array of interior-node densities (Neumann).  ``validate=False`` skips the
    admissibility check so that inadmissible forms can be inspected.
    """
    if validate:
        params.validate()
    if params.n != 2:
        raise ValueError("the discrete solver is planar (n = 2)")
    quad = quad or make_quadrature(domain)
    basis = basis or RitzBasis.for_domain(domain, degree, quad)
    A = energy_matrix(basis, quad, params)
    if np.ndim(density) == 0:
        if not float(density) > 0.0:
            raise ValueError("boundary density must be positive")
        M = boundary_mass_matrix(basis, quad, float(density))
        kind = "steklov"
    else:
        M = interior_mass_matrix(basis, quad, np.asarray(density, dtype=float))
        kind = "neumann"
    return DiscreteOperator(stiffness=A, mass=M, basis=basis, params=params, kind=kind)


def quotient_pencil(op: DiscreteOperator) -> tuple[np.ndarray, np.ndarray]:
    """Restrict the pencil to mass-mean-zero representatives of non-constant functions.

    Representative of basis function ``phi_k`` (k >= 1) is
    ``phi_k - m(phi_k, 1) / m(1, 1)``; the energy form ignores the shift.
    """
    A, M = op.stiffness, op.mass
    m01 = M[1:, 0]
    Ar = A[1:, 1:]
    Mr = M[1:, 1:] - np.outer(m01, m01) / M[0, 0]
    return Ar, _sym(Mr)


def quotient_min_eigenvalue(op: DiscreteOperator) -> float:
    """Smallest eigenvalue of the Jacobi-scaled stiffness on the constant complement.

    Negative values mean the energy form is indefinite (inadmissible sigma).
    """
    Ar = op.stiffness[1:, 1:]
    d = np.sqrt(np.abs(np.diag(Ar)))
    d[d == 0.0] = 1.0
    return float(la.eigvalsh(Ar / np.outer(d, d))[0])


def _a_orthonormal_frame(Ar: np.ndarray) -> tuple[np.ndarray, float]:
    """Columns ``Q`` with ``Q.T @ Ar @ Q = I``; returns ``Q`` and the scaled condition number."""
    diag = np.diag(Ar)
    if np.any(~np.isfinite(diag)) or np.any(diag <= 0.0):
        raise SolverError("stiffness has a nonpositive diagonal on the constant complement")
    d = np.sqrt(diag)
    As = Ar / np.outer(d, d)
    try:
        chol = la.cholesky(As, lower=True)
    except la.LinAlgError as exc:
        w = la.eigvalsh(As)
        raise SolverError(
            f"stiffness is not positive definite on the constant complement "
            f"(smallest scaled eigenvalue {w[0]:.3e}); check (tau, sigma) or lower the degree"
        ) from exc
    # cheap condition estimate from the Cholesky diagonal, exact one only if suspicious
    cdiag = np.diag(chol) ** 2
    cond = float(cdiag.max() / cdiag.min())
    if cond > COND_LIMIT**0.5:
        w = la.eigvalsh(As)
        cond = float(w[-1] / w[0]) if w[0] > 0 else math.inf
    if cond <= COND_LIMIT:
        Q = la.solve_triangular(chol, np.diag(1.0 / d), lower=True).T
        return Q, cond
    warnings.warn(
        f"stiffness condition number {cond:.2e} exceeds {COND_LIMIT:.0e}; "
        "orthonormalizing the basis in the energy inner product",
        RuntimeWarning,
        stacklevel=3,
    )
    w, V = la.eigh(As)
    keep = w > w[-1] * 1e-14
    Q = (V[:, keep] / np.sqrt(w[keep])) / d[:, None]
    return Q, cond


@dataclass(frozen=True)
class PencilSolution:
    lam: np.ndarray  # positive eigenvalues, ascending
    vectors: np.ndarray  # full-basis coefficients (including the constant shift)
    residuals: np.ndarray
    condition: float


def solve_pencil(op: DiscreteOperator) -> PencilSolution:
    """Positive eigenvalues of ``A u = lambda M u`` on the quotient by constants."""
    Ar, Mr = quotient_pencil(op)
    Q, cond = _a_orthonormal_frame(Ar)
    C = Q.T @ Mr @ Q
    mu, Y = la.eigh(_sym(C))
    order = np.argsort(mu)[::-1]
    mu, Y = mu[order], Y[:, order]
    if mu.size == 0 or mu[0] <= 0.0:
        raise SolverError("mass form vanishes on the trial space")
    keep = mu > RANK_RTOL * mu[0]
    mu, Y = mu[keep], Y[:, keep]
    lam = 1.0 / mu
    Vr = Q @ Y
    shift = -(op.mass[0, 1:] @ Vr) / op.mass[0, 0]
    vectors = np.vstack([shift[None, :], Vr])
    AV = op.stiffness @ vectors
    MV = op.mass @ vectors
    res = np.linalg.norm(AV - MV * lam[None, :], axis=0) / np.maximum(np.linalg.norm(AV, axis=0), 1e-300)
    return PencilSolution(lam=lam, vectors=vectors, residuals=res, condition=cond)


def _spectrum(sol: PencilSolution, op: DiscreteOperator, quad_sizes: dict[str, int]) -> Spectrum:
    values = np.concatenate([[0.0], sol.lam])
    const = np.zeros((op.basis.size, 1))
    const[0, 0] = 1.0
    vectors = np.hstack([const, sol.vectors])
    return Spectrum(
        eigenvalues=values,
        clusters=cluster_eigenvalues(values),
        degree=op.basis.degree,
        quadrature=dict(quad_sizes),
        residuals=np.concatenate([[0.0], sol.residuals]),
        ritz_vectors=vectors,
    )


def solve_steklov(
    domain: Domain,
    params: PlateParams,
    rho: float = 1.0,
    degree: int = 14,
    quad: QuadratureRule | None = None,
) -> Spectrum:
    """Ritz approximation of ``lambda_1 = 0 < lambda_2 <= ...`` for the Steklov problem.

    Directions with no boundary trace at the discrete level (``mu`` below
    ``1e-10 * max mu``) are dropped; they correspond to ``lambda = inf``.
    """
    params.validate()
    if degree < 2:
        raise ValueError("degree must be >= 2")
    if not rho > 0.0:
        raise ValueError("rho must be positive")
    quad = quad or make_quadrature(domain)
    op = assemble(domain, quad, params, density=rho, degree=degree)
    sol = solve_pencil(op)
    log.debug("steklov solve: degree=%d cond=%.2e lambda2=%.12g", degree, sol.condition, sol.lam[0])
    return _spectrum(sol, op, quad.sizes)


def neumann_density(
    quad: QuadratureRule, shell_mask: np.ndarray, total_mass: float, eps: float
) -> np.ndarray:
    """Density equal to ``eps`` on the core and ``(M - eps |core|) / |shell|`` on the shell."""
    w = quad.interior_weights
    core_area = float(w[~shell_mask].sum())
    shell_area = float(w[shell_mask].sum())
    if shell_area <= 0.0:
        raise ValueError("empty boundary shell")
    if not total_mass > eps * core_area:
        raise ValueError(f"total mass {total_mass} must exceed eps * |Omega_eps| = {eps * core_area}")
    return np.where(shell_mask, (total_mass - eps * core_area) / shell_area, eps)


def solve_neumann_eps(
    domain: Domain,
    params: PlateParams,
    total_mass: float,
    eps: float,
    degree: int = 14,
    n_radial: int = 64,
    n_angular: int = 256,
    n_shell: int | None = None,
) -> Spectrum:
    """Ritz eigenvalues of the free plate with the mass-concentrating density ``rho_eps``.

    The interior rule is split on each ray at distance ``eps`` from the
    boundary so that the density jump falls between quadrature panels.
    """
    params.validate()
    if not eps > 0.0:
        raise ValueError("eps must be positive")
    eps0 = focal_epsilon(domain)
    if eps >= 2.0 * eps0:
        raise ValueError(f"eps={eps} exceeds the tubular-neighbourhood limit {2.0 * eps0:.4g}")
    if eps >= eps0:
        warnings.warn(
            f"eps={eps} is beyond half the minimal focal distance ({eps0:.4g})",
            RuntimeWarning,
            stacklevel=2,
        )
    quad, shell = make_shell_quadrature(domain, eps, n_radial, n_angular, n_shell=n_shell)
    if quad.sizes["n_shell"] < MIN_SHELL_NODES:
        warnings.warn("boundary shell under-resolved", RuntimeWarning, stacklevel=2)
    rho = neumann_density(quad, shell, total_mass, eps)
    mass = float(np.sum(rho * quad.interior_weights))
    if abs(mass - total_mass) > MASS_RTOL * abs(total_mass):
        raise SolverError(f"density integrates to {mass}, expected {total_mass}")
    basis = RitzBasis.for_domain(domain, degree, quad)
    op = assemble(domain, quad, params, density=rho, basis=basis)
    sol = solve_pencil(op)
    return _spectrum(sol, op, quad.sizes)


def rayleigh_quotient(
    domain: Domain,
    quad: QuadratureRule | None,
    params: PlateParams,
    coefficients,
    density=1.0,
    basis: RitzBasis | None = None,
    degree: int | None = None,
) -> float:
    """``a(u, u) / m(u, u)`` for ``u = sum_k coefficients[k] phi_k``.

    Returns 0 for constants. Raises ``ZeroDivisionError`` when the trial
    function has no trace on the boundary (or no interior mass).
    """
    c = np.asarray(coefficients, dtype=float)
    if basis is None:
        if degree is None:
            degree = int(round((math.sqrt(8 * c.size + 1) - 3) / 2))
        quad = quad or make_quadrature(domain)
        basis = RitzBasis.for_domain(domain, degree, quad)
    if c.size != basis.size:
        raise ValueError(f"expected {basis.size} coefficients, got {c.size}")
    op = assemble(domain, quad, params, density=density, basis=basis)
    num = float(c @ op.stiffness @ c)
    den = float(c @ op.mass @ c)
    scale = float(np.abs(c) @ np.abs(op.mass) @ np.abs(c))
    if den <= 1e-14 * max(scale, 1e-300):
        raise ZeroDivisionError("trial function has vanishing mass (no boundary trace)")
    return num / den


def monomial_coefficients(basis: RitzBasis, terms: dict[tuple[int, int], float]) -> np.ndarray:
    """Coefficients of ``sum c * x**i * y**j`` (global coordinates) in ``basis``.

    Expands ``x = x0 + L xi``, ``y = y0 + L eta`` by the binomial theorem.
    """
    index = {e: k for k, e in enumerate(basis.exponents)}
    out = np.zeros(basis.size)
    x0, y0 = basis.origin
    L = basis.length
    for (i, j), c in terms.items():
        if i + j > basis.degree:
            raise ValueError(f"monomial x^{i} y^{j} exceeds basis degree {basis.degree}")
        for a in range(i + 1):
            for b in range(j + 1):
                coef = c * math.comb(i, a) * math.comb(j, b) * x0 ** (i - a) * y0 ** (j - b) * L ** (a + b)
                out[index[(a, b)]] += coef
    return out
