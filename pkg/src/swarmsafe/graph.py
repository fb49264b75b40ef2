"""Proximity communication graph: robots within a fixed disk are neighbors.

The neighbor relation is built from whatever positions the robots actually
have (typically noisy measurements), includes self, and is symmetric because
the distance threshold is shared. On periodic domains distances use the torus
minimum image.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError


@dataclass(frozen=True)
class NeighborSet:
    """Partition of the swarm as seen by one robot."""

    robot_id: int
    neighbors: tuple[int, ...]        # includes the robot itself, sorted
    non_neighbors: tuple[int, ...]    # everyone else, sorted

    @property
    def degree(self) -> int:
        """Number of robots in the neighborhood, self included."""
        return len(self.neighbors)

    @property
    def others(self) -> tuple[int, ...]:
        """Neighbors without self."""
        return tuple(j for j in self.neighbors if j != self.robot_id)


def delta_disk(positions, radius, extent=None) -> list[NeighborSet]:
    """Neighbor sets for all robots: j is a neighbor of i iff dist(i, j) <= radius.

    `extent` of the (Lx, Ly) torus enables minimum-image distances; None means
    plain Euclidean distance. The threshold is inclusive, so two robots exactly
    `radius` apart are mutual neighbors.
    """
    pos = np.asarray(positions, dtype=float)
    if pos.ndim != 2 or pos.shape[1] != 2 or pos.shape[0] < 1:
        raise ParameterError("positions must be an (n, 2) array with n >= 1")
    if not radius > 0.0:
        raise ParameterError("communication radius must be positive")
    diff = pos[:, None, :] - pos[None, :, :]
    if extent is not None:
        ext = np.asarray(extent, dtype=float)
        diff -= ext * np.rint(diff / ext)
    d2 = (diff * diff).sum(axis=2)
    adjacency = d2 <= radius * radius
    sets = []
    ids = np.arange(pos.shape[0])
    for i in range(pos.shape[0]):
        inside = ids[adjacency[i]]
        outside = ids[~adjacency[i]]
        sets.append(NeighborSet(i, tuple(int(j) for j in inside),
                                tuple(int(j) for j in outside)))
    return sets
