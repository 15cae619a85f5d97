#!/usr/bin/env python3
"""Generate heavy-hex coupling-map edge lists (27- and 127-qubit layouts).

The 27-qubit map matches the IBM Falcon layout (28 edges); the 127-qubit map
matches the IBM Eagle layout (144 edges): seven rows of qubit paths joined by
bridge qubits every four columns, staggered by two columns between rows.
Both are validated for qubit count, edge count, max degree 3, connectivity.
"""

import os
from collections import defaultdict

FALCON_27 = [
    (0, 1), (1, 2), (1, 4), (2, 3), (3, 5), (4, 7), (5, 8), (6, 7),
    (7, 10), (8, 9), (8, 11), (10, 12), (11, 14), (12, 13), (12, 15),
    (13, 14), (14, 16), (15, 18), (16, 19), (17, 18), (18, 21), (19, 20),
    (19, 22), (21, 23), (22, 25), (23, 24), (24, 25), (25, 26),
]


def eagle_127():
    edges = []
    rows = []  # list of (start_qubit, length)
    nxt = 0
    row_lengths = [14, 15, 15, 15, 15, 15, 14]
    for r, ln in enumerate(row_lengths):
        rows.append((nxt, ln))
        nxt += ln
        if r < 6:
            nxt += 4  # four bridge qubits after each row
    # row paths
    for start, ln in rows:
        for i in range(ln - 1):
            edges.append((start + i, start + i + 1))
    # Bridge layer r joins rows r and r+1 at offsets [0,4,8,12] (even r)
    # or [2,6,10,14] (odd r); the last 14-qubit row is shifted one column.
    for r in range(6):
        offsets = [0, 4, 8, 12] if r % 2 == 0 else [2, 6, 10, 14]
        base = rows[r][0] + rows[r][1]
        for b, off in enumerate(offsets):
            q = base + b
            above = rows[r][0] + off
            below_off = off - 1 if r + 1 == 6 else off
            below = rows[r + 1][0] + below_off
            edges.append((above, q))
            edges.append((q, below))
    return nxt, edges


def validate(n, edges):
    deg = defaultdict(int)
    seen = set()
    adj = defaultdict(list)
    for u, v in edges:
        assert 0 <= u < n and 0 <= v < n and u != v
        key = (min(u, v), max(u, v))
        assert key not in seen
        seen.add(key)
        deg[u] += 1
        deg[v] += 1
        adj[u].append(v)
        adj[v].append(u)
    assert max(deg.values()) <= 3, max(deg.values())
    # connectivity
    stack, visited = [0], {0}
    while stack:
        u = stack.pop()
        for w in adj[u]:
            if w not in visited:
                visited.add(w)
                stack.append(w)
    assert len(visited) == n, (len(visited), n)


def write(path, n, edges, title):
    with open(path, "w") as f:
        f.write(f"# {title}\n# {n} qubits, {len(edges)} edges\n")
        for u, v in sorted((min(u, v), max(u, v)) for u, v in edges):
            f.write(f"{u} {v}\n")
    print(f"wrote {path}: {n} qubits, {len(edges)} edges")


if __name__ == "__main__":
    os.makedirs("data/topologies", exist_ok=True)
    validate(27, FALCON_27)
    write("data/topologies/heavy_hex_27.txt", 27, FALCON_27,
          "heavy-hex coupling map, 27-qubit (Falcon-class) layout")
    n, edges = eagle_127()
    assert n == 127, n
    assert len(edges) == 144, len(edges)
    validate(n, edges)
    write("data/topologies/heavy_hex_127.txt", n, edges,
          "heavy-hex coupling map, 127-qubit (Eagle-class) layout")
