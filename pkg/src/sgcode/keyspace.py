"""Combinatorics of the groupwise keys: lexicographic indexing of the
S-subsets of [N], per-server availability, and the intersection-counting
identities with their brute-force oracle. External surfaces are 1-based."""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations
from typing import TYPE_CHECKING, Dict, FrozenSet, Iterable, Tuple

if TYPE_CHECKING:
    from .scheme import SchemeParams


class InvalidParams(ValueError):
    """Group enumeration asked for an impossible (N, S)."""


def comb0(x: int, y: int) -> int:
    """Binomial coefficient with the convention C(x, y) = 0 when y > x or
    either argument is negative."""
    if x < 0 or y < 0 or y > x:
        return 0
    return math.comb(x, y)


def piece_counts(N: int, Nr: int, M: int, S: int) -> Tuple[int, int, int]:
    """Derived sizes (r, n, alpha): per-server message rows, gradient piece
    count, and key piece count. No feasibility filtering here."""
    r = comb0(N, S) - comb0(M, S)
    alpha = N - M
    n = r * Nr - comb0(N, S) * alpha
    return r, n, alpha


@dataclass(frozen=True)
class KeyGroupIndex:
    """All S-subsets of [N] in strict lexicographic order, 1-based."""

    N: int
    S: int
    groups: Tuple[Tuple[int, ...], ...]
    index_of: Dict[Tuple[int, ...], int]

    def group(self, index: int) -> Tuple[int, ...]:
        """1-based lookup."""
        return self.groups[index - 1]

    def __len__(self) -> int:
        return len(self.groups)


@dataclass(frozen=True)
class Availability:
    """per_server[n] = the 1-based group indices whose group contains n."""

    per_server: Dict[int, FrozenSet[int]]


def enumerate_groups(N: int, S: int) -> KeyGroupIndex:
    """Complete, duplicate-free, lexicographically sorted S-subset listing."""
    if N < 1 or not 1 <= S <= N:
        raise InvalidParams(f"need 1 <= S <= N, got N={N}, S={S}")
    groups = tuple(combinations(range(1, N + 1), S))
    index_of = {g: i + 1 for i, g in enumerate(groups)}
    return KeyGroupIndex(N=N, S=S, groups=groups, index_of=index_of)


def availability(index: KeyGroupIndex) -> Availability:
    """Per-server sets of available key groups; each has C(N-1, S-1) entries."""
    sets: Dict[int, set] = {n: set() for n in range(1, index.N + 1)}
    for i, g in enumerate(index.groups, start=1):
        for server in g:
            sets[server].add(i)
    return Availability({n: frozenset(s) for n, s in sets.items()})


def omega_closed(N: int, S: int, subset_size: int) -> int:
    """Key groups meeting any server set of the given size, closed form:
    C(N, S) - C(N - size, S)."""
    if not 0 <= subset_size <= N:
        raise InvalidParams(f"subset size {subset_size} outside [0, {N}]")
    return comb0(N, S) - comb0(N - subset_size, S)


def omega_split(N: int, S: int, subset_size: int) -> int:
    """Same count, split by how many servers of the set a group contains."""
    if not 0 <= subset_size <= N:
        raise InvalidParams(f"subset size {subset_size} outside [0, {N}]")
    return sum(
        comb0(subset_size, k) * comb0(N - subset_size, S - k) for k in range(1, S + 1)
    )


def omega_bruteforce(index: KeyGroupIndex, servers: Iterable[int]) -> int:
    """Oracle: count groups intersecting the server set by enumeration."""
    wanted = set(servers)
    if not wanted <= set(range(1, index.N + 1)):
        raise InvalidParams("servers outside [N]")
    return sum(1 for g in index.groups if wanted.intersection(g))


def unavailable_key_columns(
    params: "SchemeParams", index: KeyGroupIndex, server: int
) -> FrozenSet[int]:
    """1-based demand-matrix columns of key pieces invisible to the server:
    {n*K + i + (j-1)*C(N,S) : group i excludes the server, j in [alpha]}."""
    if not 1 <= server <= params.N:
        raise InvalidParams(f"server {server} outside [1, {params.N}]")
    _, n, alpha = piece_counts(params.N, params.Nr, params.M, params.S)
    group_count = len(index.groups)
    base = n * params.K
    missing = [
        i for i, g in enumerate(index.groups, start=1) if server not in g
    ]
    return frozenset(
        base + i + (j - 1) * group_count for i in missing for j in range(1, alpha + 1)
    )
