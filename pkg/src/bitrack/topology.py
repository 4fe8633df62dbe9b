"""Directed leader-follower communication graphs.

Agents are indexed ``0 .. n`` with the leader last (index ``n``). An entry
``adjacency[i][j] == 1`` means agent ``i`` receives a bit from agent ``j``
every step, i.e. information flows ``j -> i``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import ConfigurationError

__all__ = [
    "Topology",
    "EdgeIndex",
    "laplacian",
    "has_spanning_tree_rooted_at_leader",
    "build_M",
    "build_W",
    "max_degree",
    "paper_topology",
    "printed_laplacian_topology",
]


@dataclass(frozen=True)
class Topology:
    """Adjacency of ``n`` followers plus one leader.

    The adjacency is stored as nested tuples so that instances are hashable
    and compare by value; :attr:`matrix` gives the integer numpy view.
    """

    adjacency: tuple

    def __post_init__(self):
        try:
            a = np.asarray(self.adjacency)
        except ValueError as exc:  # ragged input
            raise ConfigurationError(f"adjacency is not a matrix: {exc}") from None
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 2:
            raise ConfigurationError(
                f"adjacency must be square with at least 2 agents, got shape {a.shape}"
            )
        if not np.all((a == 0) | (a == 1)):
            raise ConfigurationError("adjacency entries must be 0 or 1")
        if np.any(np.diag(a) != 0):
            raise ConfigurationError("adjacency has a self-loop (a_ii must be 0)")
        if np.any(a[-1] != 0):
            raise ConfigurationError(
                "leader row must be zero: the leader cannot receive feedback from followers"
            )
        object.__setattr__(
            self, "adjacency", tuple(tuple(int(v) for v in row) for row in a)
        )

    @classmethod
    def from_neighbor_sets(cls, n_followers, neighbors):
        """Build from ``{follower: iterable of source agents}`` (0-based)."""
        a = np.zeros((n_followers + 1, n_followers + 1), dtype=int)
        for i, js in neighbors.items():
            if not 0 <= i < n_followers:
                raise ConfigurationError(f"{i} is not a follower index")
            for j in js:
                a[i, j] = 1
        return cls(a)

    @cached_property
    def matrix(self) -> np.ndarray:
        m = np.array(self.adjacency, dtype=np.int64)
        m.setflags(write=False)
        return m

    @property
    def n_followers(self) -> int:
        return len(self.adjacency) - 1

    @property
    def n_agents(self) -> int:
        return len(self.adjacency)

    @property
    def leader(self) -> int:
        return self.n_followers

    @cached_property
    def degrees(self) -> np.ndarray:
        """In-degrees ``d_i`` (number of neighbors) of every agent."""
        d = self.matrix.sum(axis=1)
        d.setflags(write=False)
        return d

    def neighbors(self, i) -> tuple[int, ...]:
        return tuple(int(j) for j in np.flatnonzero(self.matrix[i]))

    def integer_laplacian(self) -> np.ndarray:
        return np.diag(self.degrees) - self.matrix

    @cached_property
    def edges(self) -> "EdgeIndex":
        return EdgeIndex.from_topology(self)


@dataclass(frozen=True)
class EdgeIndex:
    """Ordering of the observed links ``(i, j)``, ``j`` in the neighbor set of ``i``.

    Edges are grouped by receiving follower ``i`` ascending, then by source
    ``j`` ascending. The position of an edge is its slot in every per-edge
    vector (estimates, estimate errors, thresholds, bits).
    """

    pairs: tuple[tuple[int, int], ...]
    n_agents: int
    _lookup: dict = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        object.__setattr__(self, "_lookup", {p: e for e, p in enumerate(self.pairs)})

    @classmethod
    def from_topology(cls, t: Topology) -> "EdgeIndex":
        a = t.matrix
        pairs = tuple(
            (i, int(j)) for i in range(t.n_followers) for j in np.flatnonzero(a[i])
        )
        return cls(pairs, t.n_agents)

    def __len__(self):
        return len(self.pairs)

    def __iter__(self):
        return iter(self.pairs)

    def encode(self, i, j) -> int:
        try:
            return self._lookup[(i, j)]
        except KeyError:
            raise KeyError(f"({i}, {j}) is not an edge") from None

    def decode(self, position) -> tuple[int, int]:
        return self.pairs[position]

    @cached_property
    def receivers(self) -> np.ndarray:
        return np.array([p[0] for p in self.pairs], dtype=np.intp)

    @cached_property
    def sources(self) -> np.ndarray:
        return np.array([p[1] for p in self.pairs], dtype=np.intp)

    def check_against(self, t: Topology):
        if self.n_agents != t.n_agents or self.pairs != EdgeIndex.from_topology(t).pairs:
            raise ConfigurationError("edge index does not match the topology")


def laplacian(t: Topology) -> np.ndarray:
    """``D - A`` as float64; built from the integer matrices so rows sum to exactly 0."""
    return t.integer_laplacian().astype(np.float64)


def has_spanning_tree_rooted_at_leader(t: Topology) -> bool:
    """True iff every follower can be reached from the leader along ``j -> i`` links."""
    a = t.matrix.astype(bool)
    reached = np.zeros(t.n_agents, dtype=bool)
    reached[t.leader] = True
    # i is reached once some neighbor j of i is reached
    while True:
        grown = reached | (a & reached[None, :]).any(axis=1)
        if np.array_equal(grown, reached):
            return bool(reached.all())
        reached = grown


def _index_for(t, idx):
    if idx is None:
        return t.edges
    idx.check_against(t)
    return idx


def build_M(t: Topology, idx: EdgeIndex | None = None) -> np.ndarray:
    """``(n+1) x |E|`` matrix whose column for edge ``(i, j)`` is ``e_i``."""
    idx = _index_for(t, idx)
    m = np.zeros((t.n_agents, len(idx)))
    m[idx.receivers, np.arange(len(idx))] = 1.0
    return m


def build_W(t: Topology, idx: EdgeIndex | None = None) -> np.ndarray:
    """``|E| x (n+1)`` matrix whose row for edge ``(i, j)`` is ``e_j``; ``W x`` stacks observed states."""
    idx = _index_for(t, idx)
    w = np.zeros((len(idx), t.n_agents))
    w[np.arange(len(idx)), idx.sources] = 1.0
    return w


def max_degree(t: Topology) -> int:
    """Largest follower in-degree ``d*`` (0 for an edgeless graph)."""
    return int(t.degrees[: t.n_followers].max(initial=0))


def paper_topology() -> Topology:
    """Four followers and a leader (index 4).

    Neighbor sets, 1-based: N1 = {2, 5}, N2 = {1, 4}, N3 = {1, 4}, N4 = {3}.
    The Laplacian of this graph has the nonzero spectrum
    {3.247, 2, 1.555, 0.198} used by the reproduction constants.
    """
    return Topology(
        (
            (0, 1, 0, 0, 1),
            (1, 0, 0, 1, 0),
            (1, 0, 0, 1, 0),
            (0, 0, 1, 0, 0),
            (0, 0, 0, 0, 0),
        )
    )


def printed_laplacian_topology() -> Topology:
    """Variant whose Laplacian row 3 is (-1, 0, 1, 0, 0), i.e. N3 = {1}.

    Its nonzero spectrum is {3.107, 0.283, 1.305 +/- 0.755i}, which does not
    match the diagonal reduced matrix of :func:`paper_topology`.
    """
    return Topology(
        (
            (0, 1, 0, 0, 1),
            (1, 0, 0, 1, 0),
            (1, 0, 0, 0, 0),
            (0, 0, 1, 0, 0),
            (0, 0, 0, 0, 0),
        )
    )
