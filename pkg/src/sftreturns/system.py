"""Symbolic systems: transition structure, finite-range potentials, targets.

A system is a finite alphabet with a 0/1 transition matrix (strongly
connected), a potential depending on a fixed number of consecutive symbols,
and a target given as a union of one-symbol cylinders.  Symbols are 0-based
indices everywhere in this package.

Potentials of depth k > 2 are recoded onto the higher-block presentation
whose states are admissible (k-1)-words, so that every downstream
computation works with a depth-2 potential attached to single transitions.
Return times to the target are preserved exactly by that conjugacy.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

import numpy as np

from .errors import InvalidSystemError

Word = tuple[int, ...]


# ---------------------------------------------------------------------------
# Graph utilities (directed graphs given by boolean adjacency matrices)
# ---------------------------------------------------------------------------

def strongly_connected_components(adj: np.ndarray) -> list[list[int]]:
    """Strongly connected components of a directed graph, as sorted index lists.

    Iterative Kosaraju; components are returned sorted by smallest member so
    the output is deterministic.
    """
    n = adj.shape[0]
    order: list[int] = []
    seen = np.zeros(n, dtype=bool)
    succ = [np.flatnonzero(adj[i]).tolist() for i in range(n)]
    pred = [np.flatnonzero(adj[:, j]).tolist() for j in range(n)]
    for start in range(n):
        if seen[start]:
            continue
        stack: list[tuple[int, int]] = [(start, 0)]
        seen[start] = True
        while stack:
            node, ptr = stack[-1]
            if ptr < len(succ[node]):
                stack[-1] = (node, ptr + 1)
                nxt = succ[node][ptr]
                if not seen[nxt]:
                    seen[nxt] = True
                    stack.append((nxt, 0))
            else:
                order.append(node)
                stack.pop()
    comp_of = np.full(n, -1, dtype=int)
    comps: list[list[int]] = []
    for root in reversed(order):
        if comp_of[root] >= 0:
            continue
        members = [root]
        comp_of[root] = len(comps)
        queue = deque([root])
        while queue:
            node = queue.popleft()
            for nxt in pred[node]:
                if comp_of[nxt] < 0:
                    comp_of[nxt] = len(comps)
                    members.append(nxt)
                    queue.append(nxt)
        comps.append(sorted(members))
    comps.sort(key=lambda c: c[0])
    return comps


def _unreachable_witness(adj: np.ndarray) -> tuple[int, int] | None:
    """A pair (i, j) with no directed path i -> j, or None if strongly connected."""
    n = adj.shape[0]
    for i in range(n):
        reach = np.zeros(n, dtype=bool)
        reach[i] = True
        queue = deque([i])
        while queue:
            node = queue.popleft()
            for nxt in np.flatnonzero(adj[node]):
                if not reach[nxt]:
                    reach[nxt] = True
                    queue.append(nxt)
        if not reach.all():
            return i, int(np.flatnonzero(~reach)[0])
    return None


def graph_period(adj: np.ndarray) -> int:
    """Period (gcd of cycle lengths) of a strongly connected graph."""
    n = adj.shape[0]
    depth = np.full(n, -1, dtype=np.int64)
    depth[0] = 0
    queue = deque([0])
    g = 0
    while queue:
        node = queue.popleft()
        for nxt in np.flatnonzero(adj[node]):
            if depth[nxt] < 0:
                depth[nxt] = depth[node] + 1
                queue.append(nxt)
            else:
                g = int(np.gcd(g, depth[node] + 1 - depth[nxt]))
    return abs(g) if g != 0 else 0


# ---------------------------------------------------------------------------
# Domain types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DepthKPotential:
    """Log-weight table on admissible words of a fixed depth.

    ``values`` maps each admissible ``depth``-word (a tuple of symbols) to a
    finite real.  Coverage against a transition matrix is checked when the
    potential is installed in a :class:`SymbolicSystem`.
    """

    depth: int
    values: Mapping[Word, float]

    def __post_init__(self) -> None:
        if self.depth < 1:
            raise InvalidSystemError(f"potential depth must be >= 1, got {self.depth}")
        clean: dict[Word, float] = {}
        for word, value in self.values.items():
            w = tuple(int(s) for s in word)
            if len(w) != self.depth:
                raise InvalidSystemError(
                    f"potential word {w} has length {len(w)}, expected depth {self.depth}"
                )
            v = float(value)
            if not np.isfinite(v):
                raise InvalidSystemError(f"potential value for word {w} is not finite: {value}")
            clean[w] = v
        object.__setattr__(self, "values", clean)

    def __getitem__(self, word: Word) -> float:
        return self.values[tuple(word)]


def zero_potential(n_symbols: int) -> DepthKPotential:
    """Depth-1 potential that is identically zero (maximal-entropy weights)."""
    return DepthKPotential(1, {(i,): 0.0 for i in range(n_symbols)})


@dataclass(frozen=True)
class TargetSet:
    """Union of one-symbol cylinders, as a strictly increasing symbol tuple."""

    symbols: tuple[int, ...]

    def __post_init__(self) -> None:
        syms = tuple(int(s) for s in self.symbols)
        if not syms:
            raise InvalidSystemError("target must contain at least one symbol")
        if any(b <= a for a, b in zip(syms, syms[1:])):
            raise InvalidSystemError(f"target symbols must be strictly increasing, got {syms}")
        object.__setattr__(self, "symbols", syms)


def admissible_words(transitions: np.ndarray, depth: int) -> list[Word]:
    """All admissible words of the given depth, in lexicographic order."""
    n = transitions.shape[0]
    if depth == 1:
        return [(i,) for i in range(n)]
    words: list[Word] = []
    for head in admissible_words(transitions, depth - 1):
        words.extend(head + (j,) for j in range(n) if transitions[head[-1], j])
    return words


@dataclass(frozen=True)
class SymbolicSystem:
    """A validated problem instance: transitions, potential and target.

    Construction enforces the structural invariants: at least two symbols,
    no empty row or column, strong connectivity (a witness pair is named
    otherwise), a proper nonempty target, and exact potential coverage of
    the admissible words.
    """

    n_symbols: int
    transitions: np.ndarray
    potential: DepthKPotential
    target: TargetSet

    def __post_init__(self) -> None:
        n = int(self.n_symbols)
        if n < 2:
            raise InvalidSystemError(f"need at least 2 symbols, got {n}")
        adj = np.asarray(self.transitions)
        if adj.shape != (n, n):
            raise InvalidSystemError(f"transition table must be {n}x{n}, got shape {adj.shape}")
        if not np.isin(adj, (0, 1)).all():
            raise InvalidSystemError("transition entries must be 0 or 1")
        adj = adj.astype(bool)
        adj.setflags(write=False)
        object.__setattr__(self, "n_symbols", n)
        object.__setattr__(self, "transitions", adj)
        for i in range(n):
            if not adj[i].any():
                raise InvalidSystemError(f"symbol {i} has no successor (empty row)")
            if not adj[:, i].any():
                raise InvalidSystemError(f"symbol {i} has no predecessor (empty column)")
        witness = _unreachable_witness(adj)
        if witness is not None:
            raise InvalidSystemError(
                f"not transitive: symbol {witness[0]} cannot reach symbol {witness[1]}"
            )
        if any(s < 0 or s >= n for s in self.target.symbols):
            raise InvalidSystemError(
                f"target symbols {self.target.symbols} outside alphabet of size {n}"
            )
        if len(self.target.symbols) == n:
            raise InvalidSystemError("target must be proper (some symbol must remain outside)")
        words = set(admissible_words(adj, self.potential.depth))
        have = set(self.potential.values.keys())
        missing = words - have
        extra = have - words
        if missing:
            raise InvalidSystemError(
                f"potential missing {len(missing)} admissible word(s), e.g. {sorted(missing)[0]}"
            )
        if extra:
            raise InvalidSystemError(
                f"potential defined on inadmissible word(s), e.g. {sorted(extra)[0]}"
            )


@dataclass(frozen=True)
class SystemDiagnostics:
    irreducible: bool
    aperiodic: bool
    period: int
    complement_nonempty: bool


def validate_system(sys: SymbolicSystem) -> SystemDiagnostics:
    """Graph diagnostics of a constructed system.

    Construction already rejects reducible graphs and improper targets, so on
    a live instance ``irreducible`` and ``complement_nonempty`` are always
    true; the period is reported because periodic systems are accepted.
    """
    period = graph_period(sys.transitions)
    return SystemDiagnostics(
        irreducible=True,
        aperiodic=period == 1,
        period=period,
        complement_nonempty=len(sys.target.symbols) < sys.n_symbols,
    )


# ---------------------------------------------------------------------------
# Higher-block recoding
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RecodedSystem:
    """Depth-2 presentation of a system; the working object downstream.

    ``block_states`` lists the states as words over the original alphabet
    (length 1 when the original depth was <= 2).  ``potential2[i, j]`` is the
    log-weight attached to the transition i -> j; it is only meaningful where
    ``transitions`` permits.  ``target_blocks`` are the states whose first
    symbol lies in the original target, so hitting times are preserved.
    """

    block_states: tuple[Word, ...]
    transitions: np.ndarray
    potential2: np.ndarray
    target_blocks: tuple[int, ...]
    block_length: int

    def __post_init__(self) -> None:
        adj = np.asarray(self.transitions, dtype=bool)
        adj.setflags(write=False)
        pot = np.asarray(self.potential2, dtype=float)
        pot.setflags(write=False)
        object.__setattr__(self, "transitions", adj)
        object.__setattr__(self, "potential2", pot)
        object.__setattr__(self, "block_states", tuple(tuple(w) for w in self.block_states))
        object.__setattr__(self, "target_blocks", tuple(int(i) for i in self.target_blocks))
        n = len(self.block_states)
        if adj.shape != (n, n) or pot.shape != (n, n):
            raise InvalidSystemError("recoded tables must match the number of block states")
        if not self.target_blocks or len(self.target_blocks) >= n:
            raise InvalidSystemError("recoded target must be nonempty and proper")
        if len(strongly_connected_components(adj)) != 1:
            raise InvalidSystemError("recoded graph is not strongly connected")

    @property
    def n_states(self) -> int:
        return len(self.block_states)

    @property
    def complement_blocks(self) -> tuple[int, ...]:
        targets = set(self.target_blocks)
        return tuple(i for i in range(self.n_states) if i not in targets)

    def weight_matrix(self) -> np.ndarray:
        """Transfer-operator matrix M with M[i, j] = 1{i->j} * exp(potential2[i, j])."""
        return np.where(self.transitions, np.exp(self.potential2), 0.0)


def recode_higher_block(sys: SymbolicSystem) -> RecodedSystem:
    """Recode to a depth-2 potential on the (k-1)-block presentation.

    Depth <= 2 passes through (depth 1 is promoted by ignoring the second
    coordinate).  For depth k > 2 the states are admissible (k-1)-words,
    transitions are suffix/prefix overlaps of length k-2, and the new pair
    potential evaluates the original on the k-word formed by extending the
    source block with the last symbol of the destination block.
    """
    n = sys.n_symbols
    adj = sys.transitions
    depth = sys.potential.depth
    if depth <= 2:
        pot = np.zeros((n, n))
        for i in range(n):
            for j in range(n):
                if adj[i, j]:
                    pot[i, j] = sys.potential[(i,)] if depth == 1 else sys.potential[(i, j)]
        return RecodedSystem(
            block_states=tuple((i,) for i in range(n)),
            transitions=adj.copy(),
            potential2=pot,
            target_blocks=sys.target.symbols,
            block_length=1,
        )

    states = admissible_words(adj, depth - 1)
    index = {w: i for i, w in enumerate(states)}
    m = len(states)
    trans = np.zeros((m, m), dtype=bool)
    pot = np.zeros((m, m))
    for w, i in index.items():
        suffix = w[1:]
        for j_sym in range(n):
            if not adj[w[-1], j_sym]:
                continue
            w2 = suffix + (j_sym,)
            j = index[w2]
            trans[i, j] = True
            pot[i, j] = sys.potential[w + (j_sym,)]
    target = set(sys.target.symbols)
    target_blocks = tuple(i for i, w in enumerate(states) if w[0] in target)
    return RecodedSystem(
        block_states=tuple(states),
        transitions=trans,
        potential2=pot,
        target_blocks=target_blocks,
        block_length=depth - 1,
    )


# ---------------------------------------------------------------------------
# Return-time combinatorics
# ---------------------------------------------------------------------------

def _graph_and_target(system: SymbolicSystem | RecodedSystem) -> tuple[np.ndarray, tuple[int, ...]]:
    if isinstance(system, SymbolicSystem):
        return system.transitions, system.target.symbols
    return system.transitions, system.target_blocks


def minimal_return_time(system: SymbolicSystem | RecodedSystem) -> int:
    """Shortest k >= 1 such that some length-k path starts and ends in the target.

    Intermediate symbols are unrestricted; by irreducibility such a path
    always exists.  Found by breadth-first search from the target set.
    """
    adj, target = _graph_and_target(system)
    n = adj.shape[0]
    target_mask = np.zeros(n, dtype=bool)
    target_mask[list(target)] = True
    dist = np.full(n, -1, dtype=np.int64)
    queue: deque[int] = deque()
    for a in target:
        for b in np.flatnonzero(adj[a]):
            if dist[b] < 0:
                dist[b] = 1
                queue.append(int(b))
    while queue:
        node = queue.popleft()
        if target_mask[node]:
            return int(dist[node])
        for nxt in np.flatnonzero(adj[node]):
            if dist[nxt] < 0:
                dist[nxt] = dist[node] + 1
                queue.append(int(nxt))
    raise InvalidSystemError("no return path found; graph is not irreducible")


def first_return_durations(system: SymbolicSystem | RecodedSystem) -> np.ndarray:
    """Shortest first-return duration between target states.

    Entry (a, a') is the length of the shortest path from target state a to
    target state a' whose intermediate states all avoid the target
    (``inf`` when no such path exists).
    """
    adj, target = _graph_and_target(system)
    n = adj.shape[0]
    target = list(target)
    m = len(target)
    in_target = np.zeros(n, dtype=bool)
    in_target[target] = True
    pos = {a: k for k, a in enumerate(target)}
    out = np.full((m, m), np.inf)
    for k, a in enumerate(target):
        for b in np.flatnonzero(adj[a]):
            if in_target[b]:
                out[k, pos[b]] = min(out[k, pos[b]], 1.0)
        dist = np.full(n, -1, dtype=np.int64)
        queue: deque[int] = deque()
        for b in np.flatnonzero(adj[a]):
            if not in_target[b] and dist[b] < 0:
                dist[b] = 1
                queue.append(int(b))
        while queue:
            node = queue.popleft()
            for nxt in np.flatnonzero(adj[node]):
                if in_target[nxt]:
                    out[k, pos[nxt]] = min(out[k, pos[nxt]], dist[node] + 1.0)
                elif dist[nxt] < 0:
                    dist[nxt] = dist[node] + 1
                    queue.append(int(nxt))
    return out


def _karp_min_mean_cycle(d: np.ndarray) -> Fraction:
    """Minimum mean cycle of an integer-weight digraph (inf marks no edge)."""
    m = d.shape[0]
    finite = np.isfinite(d)
    if m == 1:
        if not finite[0, 0]:
            raise InvalidSystemError("target state has no first-return cycle")
        return Fraction(int(d[0, 0]))
    # Karp: D[k][v] = min weight of a k-edge walk from node 0 to v.
    D: list[list[int | None]] = [[None] * m for _ in range(m + 1)]
    D[0][0] = 0
    for k in range(1, m + 1):
        for v in range(m):
            best: int | None = None
            for u in range(m):
                if D[k - 1][u] is None or not finite[u, v]:
                    continue
                cand = D[k - 1][u] + int(d[u, v])
                if best is None or cand < best:
                    best = cand
            D[k][v] = best
    result: Fraction | None = None
    for v in range(m):
        if D[m][v] is None:
            continue
        worst: Fraction | None = None
        for k in range(m):
            if D[k][v] is None:
                continue
            ratio = Fraction(D[m][v] - D[k][v], m - k)
            if worst is None or ratio > worst:
                worst = ratio
        if worst is not None and (result is None or worst < result):
            result = worst
    if result is None:
        raise InvalidSystemError("first-return graph has no cycle; system is not irreducible")
    return result


def minimal_return_cycle_mean(system: SymbolicSystem | RecodedSystem) -> Fraction:
    """Minimum mean cycle of the shortest first-return durations (Karp).

    This rational number is the infimum of the attainable long-run averages
    of return durations; for a single-state target it equals the minimal
    return time.
    """
    return _karp_min_mean_cycle(first_return_durations(system))


def longest_first_return_durations(system: SymbolicSystem | RecodedSystem) -> np.ndarray:
    """Longest first-return duration between target states.

    Only defined when the complement graph is acyclic (otherwise durations
    are unbounded); computed by longest-path dynamic programming over a
    topological order of the complement.
    """
    adj, target = _graph_and_target(system)
    n = adj.shape[0]
    target = list(target)
    pos = {a: k for k, a in enumerate(target)}
    m = len(target)
    comp = [i for i in range(n) if i not in pos]
    comp_index = {c: i for i, c in enumerate(comp)}
    sub = adj[np.ix_(comp, comp)] if comp else np.zeros((0, 0), dtype=bool)
    indeg = sub.sum(axis=0).astype(int) if comp else np.zeros(0, dtype=int)
    order: list[int] = []
    queue = deque(int(i) for i in np.flatnonzero(indeg == 0))
    remaining = indeg.copy()
    while queue:
        i = queue.popleft()
        order.append(i)
        for j in np.flatnonzero(sub[i]):
            remaining[j] -= 1
            if remaining[j] == 0:
                queue.append(int(j))
    if len(order) != len(comp):
        raise InvalidSystemError(
            "complement graph has a cycle; first-return durations are unbounded"
        )
    out = np.full((m, m), -np.inf)
    for k, a in enumerate(target):
        # longest[i]: longest admissible path a -> ... -> comp[i] through complement
        longest = np.full(len(comp), -np.inf)
        for b in np.flatnonzero(adj[a]):
            if b in pos:
                out[k, pos[b]] = max(out[k, pos[b]], 1.0)
            else:
                longest[comp_index[b]] = max(longest[comp_index[b]], 1.0)
        for i in order:
            if longest[i] == -np.inf:
                continue
            for j in np.flatnonzero(sub[i]):
                longest[j] = max(longest[j], longest[i] + 1.0)
        for i, c in enumerate(comp):
            if longest[i] == -np.inf:
                continue
            for b in np.flatnonzero(adj[c]):
                if b in pos:
                    out[k, pos[b]] = max(out[k, pos[b]], longest[i] + 1.0)
    return out


def maximal_return_cycle_mean(system: SymbolicSystem | RecodedSystem) -> Fraction:
    """Maximum mean cycle of the longest first-return durations.

    The supremum of attainable long-run return averages; finite exactly when
    the complement graph is acyclic.
    """
    d = longest_first_return_durations(system)
    neg = np.where(d > 0, -d, np.inf)
    return -_karp_min_mean_cycle(neg)
