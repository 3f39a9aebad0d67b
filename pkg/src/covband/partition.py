"""Regular hypercube bins on [0,1]^d and the adaptive dyadic tree.

Bins are half-open [lo, hi) except along the top face of the domain,
where they are closed; ``bin_of`` clamps ``x = 1`` into the last cell.
Coordinates are 1-based.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Iterator


@dataclass(frozen=True)
class BinId:
    """One cell of a regular partition with ``per_side`` cells per axis."""

    per_side: int
    coords: tuple[int, ...]

    def __post_init__(self) -> None:
        if self.per_side < 1:
            raise ValueError("per_side must be at least 1")
        if not self.coords:
            raise ValueError("coords must be nonempty")
        for c in self.coords:
            if not 1 <= c <= self.per_side:
                raise ValueError(f"coordinate {c} out of range 1..{self.per_side}")

    @classmethod
    def root(cls, d: int) -> "BinId":
        return cls(1, (1,) * d)

    @property
    def d(self) -> int:
        return len(self.coords)

    @property
    def side(self) -> float:
        return 1.0 / self.per_side

    @property
    def volume(self) -> float:
        return self.per_side ** (-self.d * 1.0)

    @property
    def is_dyadic(self) -> bool:
        return self.per_side & (self.per_side - 1) == 0

    @property
    def depth(self) -> int:
        """Dyadic depth k with per_side == 2**k."""
        if not self.is_dyadic:
            raise ValueError(f"bin with {self.per_side} cells per side is not dyadic")
        return self.per_side.bit_length() - 1

    def lower(self) -> tuple[float, ...]:
        return tuple((c - 1) / self.per_side for c in self.coords)

    def upper(self) -> tuple[float, ...]:
        return tuple(c / self.per_side for c in self.coords)

    def contains(self, x) -> bool:
        m = self.per_side
        for c, xl in zip(self.coords, x):
            lo = (c - 1) / m
            hi = c / m
            if xl < lo:
                return False
            if xl >= hi and not (c == m and xl == hi):
                return False
        return True


def bin_of(x, per_side: int) -> BinId:
    """Cell of the regular partition containing ``x``; x=1 maps to the last cell."""
    if per_side < 1:
        raise ValueError("per_side must be at least 1")
    coords = []
    for xl in x:
        if not 0.0 <= xl <= 1.0:
            raise ValueError(f"coordinate {xl!r} outside [0, 1]")
        coords.append(min(per_side, int(xl * per_side) + 1))
    return BinId(per_side, tuple(coords))


def burst(bin_id: BinId) -> list[BinId]:
    """The 2^d next-depth dyadic children tiling ``bin_id`` exactly."""
    if not bin_id.is_dyadic:
        raise ValueError("only dyadic bins can be burst")
    pairs = [(2 * c - 1, 2 * c) for c in bin_id.coords]
    return [BinId(2 * bin_id.per_side, cs) for cs in product(*pairs)]


class TreeNode:
    """One tree cell: partition bookkeeping plus the policy state it carries."""

    __slots__ = ("bin", "live", "parent", "children", "arms_at_birth", "se", "visits")

    def __init__(self, bin_id: BinId, parent: "TreeNode | None", arms_at_birth=()):
        self.bin = bin_id
        self.live = True
        self.parent = parent
        self.children: tuple[TreeNode, ...] = ()
        self.arms_at_birth = tuple(arms_at_birth)
        self.se = None
        self.visits = 0

    @property
    def depth(self) -> int:
        return self.bin.depth

    @property
    def active_arms(self) -> tuple[int, ...]:
        return self.se.active if self.se is not None else self.arms_at_birth

    @property
    def rounds(self) -> int:
        return self.se.completed_rounds if self.se is not None else 0

    def __repr__(self) -> str:  # parent link would recurse
        return f"TreeNode({self.bin}, live={self.live})"


class AdaptiveTree:
    """Dyadic partition of [0,1]^d whose live leaves tile the domain.

    Bursting replaces a live node by its 2^d children; burst nodes stay
    in the tree (dead) so ancestries remain inspectable. Depth is capped
    at ``max_depth``. One tree belongs to one run; mutation is
    single-threaded.
    """

    def __init__(self, d: int, max_depth: int):
        if d < 1:
            raise ValueError("dimension must be at least 1")
        if max_depth < 0:
            raise ValueError("max_depth must be nonnegative")
        self.d = d
        self.max_depth = max_depth
        self._root = TreeNode(BinId.root(d), parent=None)
        self._nodes: dict[BinId, TreeNode] = {self._root.bin: self._root}

    @property
    def root(self) -> TreeNode:
        return self._root

    def node(self, bin_id: BinId) -> TreeNode:
        return self._nodes[bin_id]

    def live_bins(self) -> list[BinId]:
        return [b for b, nd in self._nodes.items() if nd.live]

    def live_nodes(self) -> Iterator[TreeNode]:
        return (nd for nd in self._nodes.values() if nd.live)

    def live_node_of(self, x) -> TreeNode:
        """The unique live node containing ``x`` (top-face clamp as in bin_of)."""
        node = self._root
        scale = 1
        while node.children:
            scale *= 2
            # Per-axis 0-based cell index at this depth; its low bit picks
            # the child within the parent (children are in burst order).
            idx = 0
            for xl in x:
                f = int(xl * scale)
                if f >= scale:
                    f = scale - 1
                idx = 2 * idx + (f & 1)
            node = node.children[idx]
        return node

    def live_bin_of(self, x) -> BinId:
        for xl in x:
            if not 0.0 <= xl <= 1.0:
                raise ValueError(f"coordinate {xl!r} outside [0, 1]")
        return self.live_node_of(x).bin

    def burst(self, bin_id: BinId) -> tuple[BinId, ...]:
        """Replace a live node by its children; children inherit its active arms."""
        node = self._nodes[bin_id]
        if not node.live:
            raise ValueError(f"{bin_id} is not live")
        if node.depth >= self.max_depth:
            raise ValueError(f"burst at depth {node.depth} exceeds the cap {self.max_depth}")
        arms = node.active_arms
        kids = []
        for child_bin in burst(bin_id):
            child = TreeNode(child_bin, parent=node, arms_at_birth=arms)
            self._nodes[child_bin] = child
            kids.append(child)
        node.children = tuple(kids)
        node.live = False
        return tuple(k.bin for k in kids)

    def snapshot(self) -> dict:
        """Serializable view of the live partition (debugging and plotting)."""
        bins = sorted(self.live_bins(), key=lambda b: (b.per_side, b.coords))
        return {
            "kind": "tree_snapshot",
            "d": self.d,
            "max_depth": self.max_depth,
            "live_bins": [
                {
                    "depth": b.depth,
                    "coords": list(b.coords),
                    "active_arms": list(self._nodes[b].active_arms),
                    "rounds": self._nodes[b].rounds,
                    "visits": self._nodes[b].visits,
                }
                for b in bins
            ],
        }
