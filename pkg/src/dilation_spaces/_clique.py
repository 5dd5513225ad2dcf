"""Exact maximum clique by bitset branch-and-bound with a greedy colouring bound."""
from __future__ import annotations

import numpy as np


def _bits(s: int):
    while s:
        low = s & -s
        yield low.bit_length() - 1
        s ^= low


def _colour_bound(cand: int, adj: list[int]) -> int:
    """Number of colours in a greedy colouring of ``cand``: an upper bound on its clique number."""
    uncoloured, colours = cand, 0
    while uncoloured:
        colours += 1
        avail = uncoloured
        while avail:
            v = (avail & -avail).bit_length() - 1
            avail &= ~adj[v] & ~(1 << v)
            uncoloured &= ~(1 << v)
    return colours


def max_clique(adjacency: np.ndarray) -> list[int]:
    """Lexicographically least maximum clique of a boolean adjacency matrix.

    The search explores vertices in increasing index order and only replaces
    the incumbent on a strictly larger clique, so among maximum cliques the
    first one found is the lexicographically least.
    """
    A = np.asarray(adjacency, dtype=bool)
    n = A.shape[0]
    if n == 0:
        return []
    adj = [0] * n
    for i in range(n):
        row = 0
        for j in np.nonzero(A[i])[0]:
            if j != i:
                row |= 1 << int(j)
        adj[i] = row
    best: list[int] = []

    def expand(clique: list[int], cand: int):
        nonlocal best
        if not cand:
            if len(clique) > len(best):
                best = list(clique)
            return
        # iterate candidates in index order so the first maximum found is lexicographically least
        remaining = cand
        for v in _bits(cand):
            if len(clique) + _colour_bound(remaining, adj) <= len(best):
                return
            clique.append(v)
            expand(clique, remaining & adj[v])
            clique.pop()
            remaining &= ~(1 << v)

    expand([], (1 << n) - 1)
    return sorted(best)
