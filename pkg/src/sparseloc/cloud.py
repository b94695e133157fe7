"""Landmark cloud container shared by the file loaders and the simulator."""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

from .errors import InvalidInputError
from .linalg3 import Vec3

__all__ = ["PointCloud"]


class PointCloud:
    """Immutable set of landmarks: stable integer ids plus (n, 3) positions.

    The ids come from the cloud source (CSV column or simulator) and are
    what accumulation deduplicates on; positions are world meters.
    """

    __slots__ = ("ids", "positions")

    def __init__(self, ids: Sequence[int], positions: np.ndarray) -> None:
        ids_arr = np.asarray(ids, dtype=np.int64)
        pos = np.asarray(positions, dtype=np.float64)
        if pos.ndim != 2 or pos.shape[1] != 3:
            raise InvalidInputError("positions must have shape (n, 3)")
        if ids_arr.shape != (pos.shape[0],):
            raise InvalidInputError("ids and positions disagree on point count")
        if len(np.unique(ids_arr)) != len(ids_arr):
            raise InvalidInputError("landmark ids must be unique")
        if not np.isfinite(pos).all():
            raise InvalidInputError("positions must be finite")
        ids_arr.flags.writeable = False
        pos = np.ascontiguousarray(pos)
        pos.flags.writeable = False
        self.ids = ids_arr
        self.positions = pos

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[int, Vec3]]) -> "PointCloud":
        pairs = list(pairs)
        ids = [i for i, _ in pairs]
        pos = np.asarray([p for _, p in pairs], dtype=np.float64).reshape(len(pairs), 3)
        return cls(ids, pos)

    def __len__(self) -> int:
        return len(self.ids)

    def point(self, index: int) -> Vec3:
        x, y, z = self.positions[index]
        return Vec3(float(x), float(y), float(z))

    def points(self) -> list[Vec3]:
        return [Vec3(float(x), float(y), float(z)) for x, y, z in self.positions]

    def pairs(self) -> list[tuple[int, Vec3]]:
        return list(zip((int(i) for i in self.ids), self.points()))

    def take(self, count: int) -> "PointCloud":
        """Prefix subset; used for cumulative landmark discovery."""
        return PointCloud(self.ids[:count], self.positions[:count])

    def select(self, indices: np.ndarray) -> "PointCloud":
        return PointCloud(self.ids[indices], self.positions[indices])
