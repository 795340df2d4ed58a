"""Plate parameters and the shared spectrum container."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np


class AdmissibilityError(ValueError):
    """Raised when (n, tau, sigma) lies outside tau > 0, -1/(n-1) < sigma < 1."""


class SolverError(RuntimeError):
    """Raised when a discrete eigenproblem cannot be factorized or solved."""


CLUSTER_RTOL = 1e-6


@dataclass(frozen=True)
class PlateParams:
    n: int = 2
    tau: float = 1.0
    sigma: float = 0.0

    def validate(self) -> "PlateParams":
        n, tau, sigma = self.n, self.tau, self.sigma
        if int(n) != n or n < 2:
            raise AdmissibilityError(f"dimension n must be an integer >= 2, got {n}")
        if not tau > 0.0:
            raise AdmissibilityError(f"tension tau must be positive, got {tau}")
        lo = -1.0 / (n - 1)
        if not (lo < sigma < 1.0):
            raise AdmissibilityError(
                f"Poisson ratio sigma={sigma} outside the admissible window "
                f"({lo:.6g}, 1) for n={n}"
            )
        return self

    @property
    def admissible(self) -> bool:
        try:
            self.validate()
        except AdmissibilityError:
            return False
        return True

    def to_dict(self) -> dict[str, Any]:
        return {"n": self.n, "tau": self.tau, "sigma": self.sigma}


def cluster_eigenvalues(values: np.ndarray, rtol: float = CLUSTER_RTOL) -> list[list[int]]:
    """Group indices of sorted eigenvalues whose neighbours differ by <= rtol relatively."""
    clusters: list[list[int]] = []
    for k, v in enumerate(values):
        if clusters:
            prev = values[clusters[-1][-1]]
            scale = max(abs(v), abs(prev))
            if abs(v - prev) <= rtol * scale or (scale == 0.0):
                clusters[-1].append(k)
                continue
        clusters.append([k])
    return clusters


@dataclass
class Spectrum:
    """Sorted eigenvalues with multiplicity clusters and run metadata."""

    eigenvalues: np.ndarray
    clusters: list[list[int]] = field(default_factory=list)
    degree: int | None = None
    quadrature: dict[str, int] = field(default_factory=dict)
    residuals: np.ndarray | None = None
    ritz_vectors: np.ndarray | None = None

    def __post_init__(self) -> None:
        self.eigenvalues = np.asarray(self.eigenvalues, dtype=float)
        if not self.clusters:
            self.clusters = cluster_eigenvalues(self.eigenvalues)

    def __len__(self) -> int:
        return len(self.eigenvalues)

    def __getitem__(self, k):
        return self.eigenvalues[k]

    def lam(self, k: int) -> float:
        """1-based eigenvalue ``lambda_k`` (``lam(1) == 0``)."""
        return float(self.eigenvalues[k - 1])

    def cluster_of(self, k: int) -> list[int]:
        """0-based indices of the cluster containing 0-based index ``k``."""
        for c in self.clusters:
            if k in c:
                return c
        raise IndexError(k)

    def to_dict(self) -> dict[str, Any]:
        return {
            "eigenvalues": [float(v) for v in self.eigenvalues],
            "clusters": [
                {"value": float(self.eigenvalues[c[0]]), "size": len(c), "indices": c}
                for c in self.clusters
            ],
            "degree": self.degree,
            "quadrature": dict(self.quadrature),
            "residuals": None if self.residuals is None else [float(r) for r in self.residuals],
        }
