"""Shared helpers for the test suite: seeded generators and oracles.

Oracles here are intentionally independent of the implementation under
test: eigen checks go through numpy.linalg, filter checks through
exhaustive per-point enumeration, and PCA checks through a direct
covariance eigendecomposition.
"""

from __future__ import annotations

import math
import random

import numpy as np

from sparseloc.linalg3 import SymMatrix3, Vec3
from sparseloc.simulator import rotation_axis_angle


def random_symmetric(rng: random.Random, scale: float = 10.0) -> SymMatrix3:
    """Symmetric 3x3 with entries uniform in [-scale, scale]."""
    u = lambda: rng.uniform(-scale, scale)
    return SymMatrix3(u(), u(), u(), u(), u(), u())


def random_rotation(rng: random.Random) -> tuple[tuple[float, float, float], ...]:
    axis = Vec3(rng.gauss(0, 1), rng.gauss(0, 1), rng.gauss(0, 1))
    while axis.norm() < 1e-6:
        axis = Vec3(rng.gauss(0, 1), rng.gauss(0, 1), rng.gauss(0, 1))
    return rotation_axis_angle(axis, rng.uniform(0.0, 2.0 * math.pi))


def random_cloud(rng: random.Random, n: int, scale: float = 5.0) -> np.ndarray:
    return np.asarray(
        [[rng.uniform(-scale, scale) for _ in range(3)] for _ in range(n)]
    )


def eig_oracle(s: SymMatrix3) -> tuple[np.ndarray, np.ndarray]:
    """numpy eigendecomposition, sorted descending: (values, column vectors)."""
    a = np.asarray(s.to_rows())
    values, vectors = np.linalg.eigh(a)
    order = np.argsort(values)[::-1]
    return values[order], vectors[:, order]


def pca_oracle(points: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Brute-force PCA: (centroid, descending variances, axis columns)."""
    c = points.mean(axis=0)
    x = points - c
    cov = x.T @ x / (len(points) - 1)
    values, vectors = np.linalg.eigh(cov)
    order = np.argsort(values)[::-1]
    return c, values[order], vectors[:, order]


def filter_oracle(ndc: np.ndarray, box) -> list[int]:
    """Row indices whose NDC coords are inside the box and depth range."""
    kept = []
    for i, (x, y, z) in enumerate(ndc):
        if (
            box.x_min <= x <= box.x_max
            and box.y_min <= y <= box.y_max
            and -1.0 <= z <= 1.0
        ):
            kept.append(i)
    return kept


def angle_between(a: Vec3, b) -> float:
    """Angle in radians between two directions, ignoring sign."""
    bb = Vec3(*b) if not isinstance(b, Vec3) else b
    dot = abs(a.dot(bb)) / (a.norm() * bb.norm())
    return math.acos(min(1.0, dot))
