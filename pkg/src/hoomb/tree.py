"""Binary space-partitioning tree with per-node optimistic bandit statistics.

Nodes are stored column-wise in numpy arrays (one slot per node, in insertion
order) so the leaf-up backup of every U- and B-value can be done one depth level
at a time.  Children are always inserted after their parent, and every level is
processed before the level above it.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .exceptions import ContractViolation, DegenerateRegionError

LEFT, RIGHT = 0, 1


class Region:
    """Axis-aligned closed hyperrectangle ``[lower, upper]``."""

    __slots__ = ("lower", "upper")

    def __init__(self, lower, upper):
        lower = np.array(lower, dtype=float).reshape(-1)
        upper = np.array(upper, dtype=float).reshape(-1)
        if lower.shape != upper.shape or lower.size == 0:
            raise ValueError("lower and upper must be non-empty and of equal length")
        if not (np.all(np.isfinite(lower)) and np.all(np.isfinite(upper))):
            raise ValueError("region bounds must be finite")
        if np.any(upper <= lower):
            d = int(np.flatnonzero(upper <= lower)[0])
            raise DegenerateRegionError(
                f"dimension {d} has non-positive width [{lower[d]}, {upper[d]}]"
            )
        lower.flags.writeable = False
        upper.flags.writeable = False
        self.lower = lower
        self.upper = upper

    @classmethod
    def from_bounds(cls, bounds):
        """Build from a sequence of ``(low, high)`` pairs, one per dimension."""
        bounds = np.asarray(bounds, dtype=float).reshape(-1, 2)
        return cls(bounds[:, 0], bounds[:, 1])

    @property
    def dim(self) -> int:
        return self.lower.shape[0]

    @property
    def widths(self) -> np.ndarray:
        return self.upper - self.lower

    @property
    def volume(self) -> float:
        return float(np.prod(self.widths))

    def contains(self, point, atol=0.0) -> bool:
        p = np.asarray(point, dtype=float).reshape(-1)
        if p.shape != self.lower.shape:
            return False
        return bool(np.all(p >= self.lower - atol) and np.all(p <= self.upper + atol))

    def to_list(self):
        return [[float(lo), float(hi)] for lo, hi in zip(self.lower, self.upper)]

    def __eq__(self, other):
        if not isinstance(other, Region):
            return NotImplemented
        return np.array_equal(self.lower, other.lower) and np.array_equal(
            self.upper, other.upper
        )

    def __hash__(self):
        return hash((self.lower.tobytes(), self.upper.tobytes()))

    def __repr__(self):
        dims = " x ".join(f"[{lo:g}, {hi:g}]" for lo, hi in zip(self.lower, self.upper))
        return f"Region({dims})"


def as_region(domain) -> Region:
    if isinstance(domain, Region):
        return domain
    return Region.from_bounds(domain)


def split_region(region: Region) -> tuple[Region, Region]:
    """Bisect ``region`` at the midpoint of its widest dimension.

    Equal widths resolve to the lowest dimension index.
    """
    widths = region.widths
    if np.any(widths <= 0):
        raise DegenerateRegionError("cannot split a region with zero width")
    d = int(np.argmax(widths))  # argmax returns the first maximum
    cut = 0.5 * (region.lower[d] + region.upper[d])
    if not region.lower[d] < cut < region.upper[d]:
        raise DegenerateRegionError(f"dimension {d} is too narrow to bisect")
    left_upper = region.upper.copy()
    left_upper[d] = cut
    right_lower = region.lower.copy()
    right_lower[d] = cut
    return Region(region.lower, left_upper), Region(right_lower, region.upper)


def representative_point(region: Region) -> np.ndarray:
    """The cell midpoint; used both as the query point and the returned answer."""
    return 0.5 * (region.lower + region.upper)


@dataclass(frozen=True)
class TreeNode:
    """Read-only snapshot of one node's statistics."""

    depth: int
    index: int
    region: Region
    visits: int
    sample_count: int
    emp_mean: float
    u_value: float
    b_value: float
    children: Optional[tuple]

    @property
    def label(self):
        return (self.depth, self.index)


class PartitionTree:
    """HOO-MB statistics tree over a hyperrectangular domain.

    The root ``(0, 1)`` exists from the start; node ``(h, i)`` has children
    ``(h + 1, 2i - 1)`` and ``(h + 1, 2i)``.  Children that have not been
    inserted yet behave as if their B-value were ``+inf``.
    """

    def __init__(self, domain, capacity: int = 64):
        self.domain = as_region(domain)
        self.dim = self.domain.dim
        self.batch_count = 0
        self.query_count = 0
        self.n_nodes = 0
        self.labels: list[tuple[int, int]] = []
        self.regions: list[Region] = []
        self._label_to_id: dict[tuple[int, int], int] = {}
        self._levels: list[list[int]] = []
        self._level_cache: dict[int, np.ndarray] = {}
        self._nurho: list[float] = []
        self._nurho_key = None
        self._alloc(max(int(capacity), 2))
        self._add_node(0, 1, self.domain, parent=-1)

    # -- storage ---------------------------------------------------------
    def _alloc(self, capacity):
        self._capacity = capacity
        self.depth = np.zeros(capacity, dtype=np.int64)
        self.parent = np.full(capacity, -1, dtype=np.int64)
        self.left = np.full(capacity, -1, dtype=np.int64)
        self.right = np.full(capacity, -1, dtype=np.int64)
        self.visits = np.zeros(capacity, dtype=np.int64)
        self.count = np.zeros(capacity, dtype=np.int64)
        self.mean = np.zeros(capacity, dtype=float)
        self.u_value = np.full(capacity, np.inf)
        self.b_value = np.full(capacity, np.inf)

    def _grow(self):
        old = {
            name: getattr(self, name)
            for name in ("depth", "parent", "left", "right", "visits", "count",
                         "mean", "u_value", "b_value")
        }
        self._alloc(self._capacity * 2)
        for name, arr in old.items():
            getattr(self, name)[: arr.shape[0]] = arr

    def _add_node(self, h, i, region, parent):
        if self.n_nodes == self._capacity:
            self._grow()
        k = self.n_nodes
        self.n_nodes += 1
        self.depth[k] = h
        self.parent[k] = parent
        self.labels.append((h, i))
        self.regions.append(region)
        self._label_to_id[(h, i)] = k
        while len(self._levels) <= h:
            self._levels.append([])
        self._levels[h].append(k)
        self._level_cache.pop(h, None)
        return k

    # -- queries ---------------------------------------------------------
    @property
    def root(self) -> int:
        return 0

    @property
    def max_depth(self) -> int:
        return len(self._levels) - 1

    def node_id(self, label) -> int:
        return self._label_to_id[tuple(label)]

    def has_node(self, label) -> bool:
        return tuple(label) in self._label_to_id

    def node(self, key) -> TreeNode:
        """Snapshot of a node given its id or its ``(h, i)`` label."""
        k = self.node_id(key) if isinstance(key, tuple) else int(key)
        h, i = self.labels[k]
        kids = None
        if self.left[k] >= 0 or self.right[k] >= 0:
            kids = ((h + 1, 2 * i - 1), (h + 1, 2 * i))
        return TreeNode(
            depth=h,
            index=i,
            region=self.regions[k],
            visits=int(self.visits[k]),
            sample_count=int(self.count[k]),
            emp_mean=float(self.mean[k]),
            u_value=float(self.u_value[k]),
            b_value=float(self.b_value[k]),
            children=kids,
        )

    def nodes(self):
        return [self.node(k) for k in range(self.n_nodes)]

    def leaf_ids(self) -> list[int]:
        n = self.n_nodes
        mask = (self.left[:n] < 0) & (self.right[:n] < 0)
        return [int(k) for k in np.flatnonzero(mask)]

    def level_ids(self, h) -> np.ndarray:
        ids = self._level_cache.get(h)
        if ids is None:
            ids = np.array(self._levels[h], dtype=np.int64)
            self._level_cache[h] = ids
        return ids

    def _child_b(self, k, side):
        c = self.left[k] if side == LEFT else self.right[k]
        return math.inf if c < 0 else float(self.b_value[c])

    # -- algorithm steps -------------------------------------------------
    def traverse(self):
        """Follow the larger child B-value from the root until a missing child.

        Returns the list of existing node ids on the way and the label of the
        child that should be inserted next.  Ties go to the left child.
        """
        path = [0]
        k = 0
        while True:
            side = LEFT if self._child_b(k, LEFT) >= self._child_b(k, RIGHT) else RIGHT
            child = self.left[k] if side == LEFT else self.right[k]
            if child < 0:
                h, i = self.labels[k]
                return path, (h + 1, 2 * i - 1 + side)
            k = int(child)
            path.append(k)

    def insert(self, label) -> int:
        h, i = label
        parent_label = (h - 1, (i + 1) // 2)
        if parent_label not in self._label_to_id or label in self._label_to_id:
            raise ContractViolation(f"cannot insert {label}")
        p = self._label_to_id[parent_label]
        lower_half, upper_half = split_region(self.regions[p])
        side = LEFT if i % 2 == 1 else RIGHT
        k = self._add_node(h, i, lower_half if side == LEFT else upper_half, parent=p)
        if side == LEFT:
            self.left[p] = k
        else:
            self.right[p] = k
        return k

    def update_path(self, path, observations, batch_size: int):
        """Fold one batch of observations into every node on ``path``."""
        obs = np.asarray(observations, dtype=float).reshape(-1)
        if obs.shape[0] != batch_size:
            raise ContractViolation(
                f"expected {batch_size} observations, got {obs.shape[0]}"
            )
        total = math.fsum(obs.tolist())
        for k in path:
            self.visits[k] += 1
            self.count[k] += batch_size
            c = int(self.count[k])
            self.mean[k] = (1 - batch_size / c) * float(self.mean[k]) + total / c

    def _nurho_table(self, nu, rho, depth):
        key = (nu, rho)
        if key != self._nurho_key:
            self._nurho = []
            self._nurho_key = key
        while len(self._nurho) <= depth:
            self._nurho.append(nu * rho ** len(self._nurho))
        return self._nurho

    def backup_all(self, sigma, nu, rho, batch_size):
        """Recompute U and B for every node, deepest level first."""
        m = self.batch_count
        if m < 1:
            raise ContractViolation("backup requires at least one completed batch")
        scale = 2.0 * sigma ** 2 * math.log(m)
        nurho = self._nurho_table(nu, rho, self.max_depth)
        inf = np.inf
        for h in range(self.max_depth, -1, -1):
            ids = self.level_ids(h)
            t = self.visits[ids]
            seen = t > 0
            u = np.full(ids.shape[0], inf)
            u[seen] = (
                self.mean[ids[seen]] + np.sqrt(scale / (batch_size * t[seen])) + nurho[h]
            )
            lc = self.left[ids]
            rc = self.right[ids]
            lb = np.where(lc >= 0, self.b_value[lc], inf)
            rb = np.where(rc >= 0, self.b_value[rc], inf)
            self.u_value[ids] = u
            self.b_value[ids] = np.minimum(u, np.maximum(lb, rb))

    def best_node(self) -> int:
        """Node with the largest B at the deepest level; ties go to the lowest index."""
        ids = self.level_ids(self.max_depth)
        b = self.b_value[ids]
        top = b.max()
        winners = ids[b == top]
        return int(min(winners, key=lambda k: self.labels[k][1]))

    def midpoint(self, k) -> np.ndarray:
        return representative_point(self.regions[k])

    # -- debugging -------------------------------------------------------
    def dump(self, fp):
        """Write one JSON object per node: label, bounds, t, count, mean, U, B."""

        def num(v):
            v = float(v)
            return v if math.isfinite(v) else ("inf" if v > 0 else "-inf")

        for k in range(self.n_nodes):
            h, i = self.labels[k]
            rec = {
                "h": h,
                "i": i,
                "lower": self.regions[k].lower.tolist(),
                "upper": self.regions[k].upper.tolist(),
                "t": int(self.visits[k]),
                "count": int(self.count[k]),
                "mean": float(self.mean[k]),
                "U": num(self.u_value[k]),
                "B": num(self.b_value[k]),
            }
            fp.write(json.dumps(rec) + "\n")


def traverse(tree: PartitionTree):
    return tree.traverse()


def update_path(tree: PartitionTree, path, observations, batch_size: int):
    tree.update_path(path, observations, batch_size)


def backup_all(tree: PartitionTree, sigma, nu, rho, batch_size):
    tree.backup_all(sigma, nu, rho, batch_size)
