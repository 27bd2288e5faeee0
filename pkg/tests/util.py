"""Shared test helpers: tiny graph builders and independent brute-force oracles.

The oracles here deliberately avoid the package's traversal code: they are
plain dict-of-sets adjacency plus deque BFS, so they can catch bugs in the
compressed-adjacency implementations.
"""

from collections import deque

import numpy as np

from dismantler.graph import Graph


def triangle() -> Graph:
    return Graph(3, [(0, 1), (1, 2), (2, 0)])


def path_graph(n: int) -> Graph:
    return Graph(n, [(i, i + 1) for i in range(n - 1)])


def star(leaves: int) -> Graph:
    """Star with node 0 at the center and `leaves` spokes."""
    return Graph(leaves + 1, [(0, i) for i in range(1, leaves + 1)])


def complete(n: int) -> Graph:
    return Graph(n, [(i, j) for i in range(n) for j in range(i + 1, n)])


def cycle(n: int) -> Graph:
    return Graph(n, [(i, (i + 1) % n) for i in range(n)])


def random_graph(rng: np.random.Generator, n: int, p: float) -> Graph:
    edges = [(i, j) for i in range(n) for j in range(i + 1, n) if rng.random() < p]
    return Graph(n, edges)


def adjacency_sets(g: Graph) -> dict[int, set[int]]:
    return {i: {int(j) for j in g.neighbors_of(i)} for i in range(g.num_nodes)}


def adjacency_matrix(g: Graph) -> np.ndarray:
    a = np.zeros((g.num_nodes, g.num_nodes), dtype=np.float64)
    for u, v in g.edge_list():
        a[u, v] = 1.0
        a[v, u] = 1.0
    return a


def bfs_distances(adj: dict[int, set[int]], source: int, n: int) -> list[int]:
    dist = [-1] * n
    dist[source] = 0
    queue = deque([source])
    while queue:
        u = queue.popleft()
        for v in adj[u]:
            if dist[v] < 0:
                dist[v] = dist[u] + 1
                queue.append(v)
    return dist


def bfs_path_counts(adj: dict[int, set[int]], source: int, n: int):
    """(distances, number of shortest paths) from source."""
    dist = [-1] * n
    sigma = [0] * n
    dist[source] = 0
    sigma[source] = 1
    queue = deque([source])
    while queue:
        u = queue.popleft()
        for v in adj[u]:
            if dist[v] < 0:
                dist[v] = dist[u] + 1
                queue.append(v)
            if dist[v] == dist[u] + 1:
                sigma[v] += sigma[u]
    return dist, sigma


def brute_betweenness(g: Graph) -> np.ndarray:
    """Pair-by-pair betweenness from per-source distance/count tables."""
    n = g.num_nodes
    adj = adjacency_sets(g)
    tables = [bfs_path_counts(adj, s, n) for s in range(n)]
    bc = np.zeros(n, dtype=np.float64)
    for s in range(n):
        dist_s, sigma_s = tables[s]
        for t in range(s + 1, n):
            if dist_s[t] < 0:
                continue
            dist_t, sigma_t = tables[t]
            for v in range(n):
                if v in (s, t):
                    continue
                if dist_s[v] >= 0 and dist_t[v] >= 0 and dist_s[v] + dist_t[v] == dist_s[t]:
                    bc[v] += sigma_s[v] * sigma_t[v] / sigma_s[t]
    return bc


def brute_gcc_size(g: Graph) -> int:
    n = g.num_nodes
    adj = adjacency_sets(g)
    seen = [False] * n
    best = 0
    for s in range(n):
        if seen[s]:
            continue
        size = 0
        queue = deque([s])
        seen[s] = True
        while queue:
            u = queue.popleft()
            size += 1
            for v in adj[u]:
                if not seen[v]:
                    seen[v] = True
                    queue.append(v)
        best = max(best, size)
    return best


def permute_graph(g: Graph, perm: np.ndarray) -> Graph:
    """Relabel node i as perm[i]."""
    edges = [(int(perm[u]), int(perm[v])) for u, v in g.edge_list()]
    return Graph(g.num_nodes, edges)
