"""Star-shaped planar domains, quadrature, boundary moments and Fraenkel asymmetry.

Every domain is described by a center ``c`` and a positive, twice
differentiable radial function ``r(theta)`` so that
``Omega = {c + t r(theta) (cos theta, sin theta) : 0 <= t < 1}``.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Any

import numpy as np

DEFAULT_RADIAL = 64
DEFAULT_ANGULAR = 256
DEFAULT_BOUNDARY = 1024
DEFAULT_RESOLUTION = 2048
MOMENT_RTOL = 1e-8


class Domain:
    """Base class. Subclasses implement :meth:`radial`."""

    center: tuple[float, float]

    def radial(self, theta: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """``r, r', r''`` at the angles ``theta``."""
        raise NotImplementedError

    def to_dict(self) -> dict[str, Any]:
        raise NotImplementedError

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    def scaled(self, s: float) -> "Scaled":
        return Scaled(self, s)

    # derived geometry -------------------------------------------------
    def boundary_points(self, theta: np.ndarray) -> np.ndarray:
        r = self.radial(theta)[0]
        c = np.asarray(self.center, dtype=float)
        return c + np.stack([r * np.cos(theta), r * np.sin(theta)], axis=-1)

    def contains(self, pts: np.ndarray) -> np.ndarray:
        """Boolean mask of points strictly inside the domain."""
        pts = np.asarray(pts, dtype=float)
        d = pts - np.asarray(self.center, dtype=float)
        rho = np.hypot(d[..., 0], d[..., 1])
        th = np.arctan2(d[..., 1], d[..., 0])
        return rho < self.radial(th)[0]

    def max_radius(self, samples: int = 4096) -> float:
        th = np.linspace(0.0, 2 * np.pi, samples, endpoint=False)
        return float(self.radial(th)[0].max())

    def curvature(self, theta: np.ndarray) -> np.ndarray:
        """Signed curvature of the boundary (positive where convex)."""
        r, dr, ddr = self.radial(theta)
        return (r * r + 2 * dr * dr - r * ddr) / (r * r + dr * dr) ** 1.5

    def check(self, samples: int = 4096) -> None:
        th = np.linspace(0.0, 2 * np.pi, samples, endpoint=False)
        r = self.radial(th)[0]
        if not np.all(r > 0.0):
            raise ValueError("radial function must be positive (domain not star-shaped)")


@dataclass(frozen=True)
class Disk(Domain):
    R: float = 1.0
    center: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self) -> None:
        if not self.R > 0.0:
            raise ValueError("disk radius must be positive")

    def radial(self, theta):
        theta = np.asarray(theta, dtype=float)
        one = np.ones_like(theta)
        return self.R * one, 0.0 * one, 0.0 * one

    def to_dict(self):
        return {"kind": "disk", "R": self.R, "center": list(self.center)}


@dataclass(frozen=True)
class Ellipse(Domain):
    a: float = 1.0
    b: float = 1.0
    center: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self) -> None:
        if not (self.a > 0.0 and self.b > 0.0):
            raise ValueError("ellipse semi-axes must be positive")

    def radial(self, theta):
        theta = np.asarray(theta, dtype=float)
        a, b = self.a, self.b
        g = (b * np.cos(theta)) ** 2 + (a * np.sin(theta)) ** 2
        dg = (a * a - b * b) * np.sin(2 * theta)
        ddg = 2 * (a * a - b * b) * np.cos(2 * theta)
        r = a * b * g**-0.5
        dr = -0.5 * a * b * g**-1.5 * dg
        ddr = a * b * (0.75 * g**-2.5 * dg * dg - 0.5 * g**-1.5 * ddg)
        return r, dr, ddr

    def to_dict(self):
        return {"kind": "ellipse", "a": self.a, "b": self.b, "center": list(self.center)}


@dataclass(frozen=True)
class Star(Domain):
    """``r(theta) = base + sum_k fourier_cos[k-1] cos(k theta) + fourier_sin[k-1] sin(k theta)``."""

    base: float = 1.0
    fourier_cos: tuple[float, ...] = ()
    fourier_sin: tuple[float, ...] = ()
    center: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self) -> None:
        object.__setattr__(self, "fourier_cos", tuple(float(v) for v in self.fourier_cos))
        object.__setattr__(self, "fourier_sin", tuple(float(v) for v in self.fourier_sin))
        self.check()

    def radial(self, theta):
        theta = np.asarray(theta, dtype=float)
        r = np.full_like(theta, self.base)
        dr = np.zeros_like(theta)
        ddr = np.zeros_like(theta)
        for k, c in enumerate(self.fourier_cos, start=1):
            cs, sn = np.cos(k * theta), np.sin(k * theta)
            r += c * cs
            dr -= c * k * sn
            ddr -= c * k * k * cs
        for k, c in enumerate(self.fourier_sin, start=1):
            cs, sn = np.cos(k * theta), np.sin(k * theta)
            r += c * sn
            dr += c * k * cs
            ddr -= c * k * k * sn
        return r, dr, ddr

    def to_dict(self):
        return {
            "kind": "star",
            "base": self.base,
            "fourier_cos": list(self.fourier_cos),
            "fourier_sin": list(self.fourier_sin),
            "center": list(self.center),
        }


@dataclass(frozen=True)
class Scaled(Domain):
    """``s * inner = {x : x / s in inner}``; the center scales with the domain."""

    inner: Domain = field(default_factory=Disk)
    s: float = 1.0

    def __post_init__(self) -> None:
        if not self.s > 0.0:
            raise ValueError("scale factor must be positive")

    @property
    def center(self) -> tuple[float, float]:  # type: ignore[override]
        cx, cy = self.inner.center
        return (self.s * cx, self.s * cy)

    def radial(self, theta):
        r, dr, ddr = self.inner.radial(theta)
        return self.s * r, self.s * dr, self.s * ddr

    def to_dict(self):
        return {"kind": "scaled", "s": self.s, "inner": self.inner.to_dict()}


def domain_from_dict(d: dict[str, Any]) -> Domain:
    kind = d.get("kind")
    center = tuple(float(v) for v in d.get("center", (0.0, 0.0)))
    if len(center) != 2:
        raise ValueError("center must have two coordinates")
    if kind == "disk":
        return Disk(R=float(d.get("R", d.get("radius", 1.0))), center=center)
    if kind == "ellipse":
        return Ellipse(a=float(d["a"]), b=float(d["b"]), center=center)
    if kind == "star":
        return Star(
            base=float(d.get("base", 1.0)),
            fourier_cos=tuple(d.get("fourier_cos", ())),
            fourier_sin=tuple(d.get("fourier_sin", ())),
            center=center,
        )
    if kind == "scaled":
        return Scaled(inner=domain_from_dict(d["inner"]), s=float(d["s"]))
    raise ValueError(f"unknown domain kind {kind!r}")


def domain_from_json(text: str) -> Domain:
    return domain_from_dict(json.loads(text))


# ---------------------------------------------------------------------------
# quadrature


@lru_cache(maxsize=32)
def _gauss01(n: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (x + 1.0), 0.5 * w


@dataclass(frozen=True)
class QuadratureRule:
    """Interior and boundary nodes/weights for one domain.

    Interior nodes are a polar tensor grid (Gauss-Legendre in the radial
    parameter, trapezoid in angle); boundary weights include the arc-length
    factor ``sqrt(r**2 + r'**2)``.
    """

    interior_points: np.ndarray
    interior_weights: np.ndarray
    boundary_points: np.ndarray
    boundary_weights: np.ndarray
    sizes: dict[str, int]
    # per-interior-node radial parameter t in [0, 1) and ray index
    interior_t: np.ndarray | None = None

    @property
    def area(self) -> float:
        return float(self.interior_weights.sum())

    @property
    def perimeter(self) -> float:
        return float(self.boundary_weights.sum())


def _boundary_rule(domain: Domain, n_boundary: int) -> tuple[np.ndarray, np.ndarray]:
    th = np.arange(n_boundary) * (2 * np.pi / n_boundary)
    r, dr, _ = domain.radial(th)
    pts = domain.boundary_points(th)
    w = np.sqrt(r * r + dr * dr) * (2 * np.pi / n_boundary)
    return pts, w


def _polar_rule(domain: Domain, t_nodes: np.ndarray, t_weights: np.ndarray, n_angular: int):
    """Tensor rule for per-ray radial nodes ``t_nodes[..., ray]`` (broadcastable)."""
    th = np.arange(n_angular) * (2 * np.pi / n_angular)
    r = domain.radial(th)[0]
    T = np.broadcast_to(t_nodes, (np.shape(t_nodes)[0], n_angular))
    Wt = np.broadcast_to(t_weights, T.shape)
    rad = T * r[None, :]
    c = np.asarray(domain.center, dtype=float)
    pts = np.stack([c[0] + rad * np.cos(th)[None, :], c[1] + rad * np.sin(th)[None, :]], axis=-1)
    w = Wt * T * (r * r)[None, :] * (2 * np.pi / n_angular)
    return pts.reshape(-1, 2), w.ravel(), np.asarray(T).ravel()


def make_quadrature(
    domain: Domain,
    n_radial: int = DEFAULT_RADIAL,
    n_angular: int = DEFAULT_ANGULAR,
    n_boundary: int = DEFAULT_BOUNDARY,
) -> QuadratureRule:
    t, wt = _gauss01(n_radial)
    ipts, iw, it = _polar_rule(domain, t[:, None], wt[:, None], n_angular)
    bpts, bw = _boundary_rule(domain, n_boundary)
    return QuadratureRule(
        interior_points=ipts,
        interior_weights=iw,
        boundary_points=bpts,
        boundary_weights=bw,
        sizes={"n_radial": n_radial, "n_angular": n_angular, "n_boundary": n_boundary},
        interior_t=it,
    )


def area(domain: Domain, quad: QuadratureRule | None = None) -> float:
    return (quad or make_quadrature(domain)).area


def perimeter(domain: Domain, quad: QuadratureRule | None = None) -> float:
    return (quad or make_quadrature(domain)).perimeter


def boundary_moment(
    domain: Domain,
    quad: QuadratureRule | None,
    p: float,
    center=None,
    check: bool = True,
) -> float:
    """``int_{dOmega} |x - center|**p dS`` (center defaults to the domain center).

    With ``check`` the boundary rule is doubled and a ``RuntimeWarning`` is
    issued if the result moves by more than 1e-8 relatively.
    """
    if not p > 1.0:
        raise ValueError("moment exponent p must exceed 1")
    quad = quad or make_quadrature(domain)
    c = np.asarray(domain.center if center is None else center, dtype=float)

    def moment(pts, w):
        return float(np.sum(np.hypot(*(pts - c).T) ** p * w))

    val = moment(quad.boundary_points, quad.boundary_weights)
    if check:
        nb = 2 * quad.sizes.get("n_boundary", len(quad.boundary_weights))
        fine = moment(*_boundary_rule(domain, nb))
        if abs(fine - val) > MOMENT_RTOL * abs(fine):
            warnings.warn(
                f"boundary moment under-resolved: {val!r} vs {fine!r} with {nb} nodes",
                RuntimeWarning,
                stacklevel=2,
            )
    return val


def centroid_shift(domain: Domain, quad: QuadratureRule | None = None) -> np.ndarray:
    """Boundary centroid ``(1/|dOmega|) int_{dOmega} y dS``."""
    quad = quad or make_quadrature(domain)
    w = quad.boundary_weights
    return (quad.boundary_points * w[:, None]).sum(axis=0) / w.sum()


def stability_constants(n: int, p: float = 2.0) -> tuple[float, float]:
    """Boundary-moment constant ``c_{n,p}`` and stability constant ``delta_n``.

    ``min_{t in [1, 2**(1/n)]} t**(p-1)`` is attained at ``t = 1`` for ``p > 1``.
    """
    if int(n) != n or n < 2:
        raise ValueError("n must be an integer >= 2")
    if not p > 1.0:
        raise ValueError("p must exceed 1")
    root = 2.0 ** (1.0 / n) - 1.0
    c_np = (n + p - 1) * (p - 1) / 4.0 * root / n * 1.0 ** (p - 1)
    delta_n = (n + 1) / (8.0 * n) * root
    return c_np, delta_n


# ---------------------------------------------------------------------------
# Fraenkel asymmetry


@dataclass(frozen=True)
class AsymmetryResult:
    value: float
    error: float
    center: tuple[float, float]
    radius: float


def _grid(domain: Domain, resolution: int):
    th = np.linspace(0.0, 2 * np.pi, 4 * resolution, endpoint=False)
    bp = domain.boundary_points(th)
    lo = bp.min(axis=0)
    hi = bp.max(axis=0)
    h = float(max(hi - lo)) / resolution
    xs = lo[0] + (np.arange(resolution) + 0.5) * h
    ys = lo[1] + (np.arange(resolution) + 0.5) * h
    return xs, ys, h


def symmetric_difference(domain: Domain, center, radius: float, resolution: int = 512) -> float:
    """Grid estimate of ``|Omega Delta B(center, radius)|``."""
    xs, ys, h = _grid(domain, resolution)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    inside = domain.contains(np.stack([X, Y], axis=-1))
    ball = (X - center[0]) ** 2 + (Y - center[1]) ** 2 < radius**2
    # ball cells outside the bounding box are counted exactly
    ball_area = math.pi * radius**2
    return float(np.count_nonzero(inside & ~ball) * h * h + ball_area - np.count_nonzero(inside & ball) * h * h)


def fraenkel_asymmetry(
    domain: Domain,
    resolution: int = DEFAULT_RESOLUTION,
    restarts: int = 3,
) -> AsymmetryResult:
    """``inf_c |Omega Delta B(c, rho*)| / |Omega|`` with ``|B| = |Omega|``.

    Membership is counted on a uniform ``resolution**2`` grid over the
    bounding box; the ball center is optimized by coordinate descent with
    step halving, seeded at the area centroid and ``restarts - 1`` offsets.
    """
    xs, ys, h = _grid(domain, resolution)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    inside = domain.contains(np.stack([X, Y], axis=-1))
    px = X[inside]
    py = Y[inside]
    cell = h * h
    omega = px.size * cell
    rho = math.sqrt(omega / math.pi)

    def sym_diff(c) -> float:
        in_ball = np.count_nonzero((px - c[0]) ** 2 + (py - c[1]) ** 2 < rho * rho) * cell
        return 2.0 * (omega - in_ball)

    centroid = np.array([px.mean(), py.mean()])
    offsets = [np.zeros(2), np.array([0.1 * rho, 0.0]), np.array([0.0, 0.1 * rho])]
    best_val, best_c = math.inf, centroid
    for off in offsets[: max(1, restarts)]:
        c = centroid + off
        val = sym_diff(c)
        step = 0.25 * rho
        while step >= 0.5 * h:
            moved = False
            for axis in (0, 1):
                for sgn in (1.0, -1.0):
                    trial = c.copy()
                    trial[axis] += sgn * step
                    tv = sym_diff(trial)
                    if tv < val:
                        c, val, moved = trial, tv, True
                        break
            if not moved:
                step *= 0.5
        if val < best_val:
            best_val, best_c = val, c
    # cells cut by either boundary carry the discretization error
    perim = perimeter(domain, make_quadrature(domain, 4, 8, 2048))
    err = (perim + 2 * math.pi * rho) * h / omega
    return AsymmetryResult(
        value=best_val / omega,
        error=err,
        center=(float(best_c[0]), float(best_c[1])),
        radius=rho,
    )


def focal_epsilon(domain: Domain, samples: int = 4096) -> float:
    """Half the smallest radius of curvature over convex boundary arcs."""
    th = np.linspace(0.0, 2 * np.pi, samples, endpoint=False)
    kappa = domain.curvature(th)
    kmax = float(kappa.max())
    r_max = domain.max_radius(samples)
    if kmax <= 0.0:
        return 0.5 * r_max
    return 0.5 * min(1.0 / kmax, r_max)


def distance_to_boundary(domain: Domain, pts: np.ndarray, samples: int = 8192) -> np.ndarray:
    """Euclidean distance from each point to the boundary curve.

    Nearest sample by brute force, refined by Newton steps on the angle.
    """
    from scipy.spatial import cKDTree

    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    th = np.linspace(0.0, 2 * np.pi, samples, endpoint=False)
    tree = cKDTree(domain.boundary_points(th))
    _, idx = tree.query(pts)
    t = th[idx]
    c = np.asarray(domain.center, dtype=float)
    for _ in range(6):
        r, dr, ddr = domain.radial(t)
        cs, sn = np.cos(t), np.sin(t)
        bx, by = c[0] + r * cs, c[1] + r * sn
        tx, ty = dr * cs - r * sn, dr * sn + r * cs
        ax, ay = ddr * cs - 2 * dr * sn - r * cs, ddr * sn + 2 * dr * cs - r * sn
        ex, ey = bx - pts[:, 0], by - pts[:, 1]
        g = ex * tx + ey * ty
        hess = tx * tx + ty * ty + ex * ax + ey * ay
        step = np.where(hess > 0, g / np.where(hess > 0, hess, 1.0), 0.0)
        t = t - np.clip(step, -2 * np.pi / samples, 2 * np.pi / samples)
    b = domain.boundary_points(t)
    return np.hypot(*(b - pts).T)


def shell_split(domain: Domain, eps: float, n_angular: int, iters: int = 60) -> np.ndarray:
    """Per ray, the radial parameter ``t*`` where the distance to the boundary equals ``eps``."""
    th = np.arange(n_angular) * (2 * np.pi / n_angular)
    r = domain.radial(th)[0]
    c = np.asarray(domain.center, dtype=float)
    direc = np.stack([np.cos(th), np.sin(th)], axis=-1)
    lo = np.zeros(n_angular)
    hi = np.ones(n_angular)
    if np.any(distance_to_boundary(domain, c[None, :]) <= eps):
        raise ValueError(f"eps={eps} leaves no interior core")
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        d = distance_to_boundary(domain, c + (mid * r)[:, None] * direc)
        inside = d > eps
        lo = np.where(inside, mid, lo)
        hi = np.where(inside, hi, mid)
        if np.max(hi - lo) < 1e-13:
            break
    return 0.5 * (lo + hi)


def make_shell_quadrature(
    domain: Domain,
    eps: float,
    n_radial: int = DEFAULT_RADIAL,
    n_angular: int = DEFAULT_ANGULAR,
    n_boundary: int = DEFAULT_BOUNDARY,
    n_shell: int | None = None,
) -> tuple[QuadratureRule, np.ndarray]:
    """Quadrature whose radial rule is split at ``dist(x, dOmega) = eps`` on each ray.

    Returns the rule and a boolean mask of interior nodes lying in the shell
    ``Omega \\ Omega_eps``.
    """
    tstar = shell_split(domain, eps, n_angular)
    n_shell = n_shell or max(16, n_radial // 2)
    tc, wc = _gauss01(n_radial)
    ts, ws = _gauss01(n_shell)
    t_core = tc[:, None] * tstar[None, :]
    w_core = wc[:, None] * tstar[None, :]
    t_sh = tstar[None, :] + ts[:, None] * (1.0 - tstar)[None, :]
    w_sh = ws[:, None] * (1.0 - tstar)[None, :]
    T = np.concatenate([t_core, t_sh], axis=0)
    Wt = np.concatenate([w_core, w_sh], axis=0)
    ipts, iw, it = _polar_rule(domain, T, Wt, n_angular)
    shell = np.zeros(T.shape, dtype=bool)
    shell[n_radial:, :] = True
    bpts, bw = _boundary_rule(domain, n_boundary)
    quad = QuadratureRule(
        interior_points=ipts,
        interior_weights=iw,
        boundary_points=bpts,
        boundary_weights=bw,
        sizes={
            "n_radial": n_radial,
            "n_shell": n_shell,
            "n_angular": n_angular,
            "n_boundary": n_boundary,
        },
        interior_t=it,
    )
    return quad, shell.ravel()
