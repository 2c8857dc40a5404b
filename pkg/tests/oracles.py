"""
Independent brute-force oracles for the tests: a union-find over window tiles
with its own neighbor table and ball membership, sharing no code with app/.
"""

_DELTAS = [(0, 1), (0, -1), (1, 0), (-1, 0), (1, -1), (-1, 1)]


class UnionFind:
    def __init__(self, size):
        self.parent = list(range(size))
        self.rank = [0] * size

    def find(self, i):
        while self.parent[i] != i:
            self.parent[i] = self.parent[self.parent[i]]
            i = self.parent[i]
        return i

    def union(self, i, j):
        root_i = self.find(i)
        root_j = self.find(j)
        if root_i == root_j:
            return False
        if self.rank[root_i] < self.rank[root_j]:
            root_i, root_j = root_j, root_i
        self.parent[root_j] = root_i
        if self.rank[root_i] == self.rank[root_j]:
            self.rank[root_i] += 1
        return True


def in_ball(q, r, radius):
    # Cube coordinates (q, r, -q-r).
    return max(abs(q), abs(r), abs(q + r)) <= radius


def ball_tiles(radius):
    return [(q, r) for q in range(-radius, radius + 1) for r in range(-radius, radius + 1) if in_ball(q, r, radius)]


def bfs_ball_size(radius):
    """|B_radius| by breadth-first search from the origin."""
    seen = {(0, 0)}
    layer = [(0, 0)]
    for _ in range(radius):
        nxt = []
        for q, r in layer:
            for dq, dr in _DELTAS:
                t = (q + dq, r + dr)
                if t not in seen:
                    seen.add(t)
                    nxt.append(t)
        layer = nxt
    return len(seen)


def label_components(blacks, radius):
    """Map each black tile of B_radius to a root id of its component inside the ball."""
    tiles = [t for t in ball_tiles(radius) if t in blacks]
    index = {t: k for k, t in enumerate(tiles)}
    uf = UnionFind(len(tiles))
    for (q, r), k in index.items():
        for dq, dr in _DELTAS:
            other = index.get((q + dq, r + dr))
            if other is not None:
                uf.union(k, other)
    return {t: uf.find(k) for t, k in index.items()}


def crossing(blacks, radius, n):
    """Black path in B_radius between rim tiles of Q+_n and Q-_n, via two virtual nodes."""
    tiles = [t for t in ball_tiles(radius) if t in blacks]
    index = {t: k for k, t in enumerate(tiles)}
    plus, minus = len(tiles), len(tiles) + 1
    uf = UnionFind(len(tiles) + 2)
    for (q, r), k in index.items():
        for dq, dr in _DELTAS:
            other = index.get((q + dq, r + dr))
            if other is not None:
                uf.union(k, other)
        on_rim = any(not in_ball(q + dq, r + dr, radius) for dq, dr in _DELTAS)
        if not on_rim:
            continue
        h = 2 * r + q
        if q >= n and h >= n:
            uf.union(k, plus)
        if q <= n and h <= n:
            uf.union(k, minus)
    return uf.find(plus) == uf.find(minus)
