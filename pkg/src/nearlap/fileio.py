"""File formats: edge-list graphs, Matrix Market matrices, trajectory CSVs,
and flat key=value manifests.

Graph files are plain text: a header line "n m" followed by m lines "i j"
with 1-based node indices; "i i" marks a self-loop.  Matrices use the Matrix
Market coordinate format (real, general, 1-based); entries outside the graph
pattern plus diagonal are rejected on read.
"""

from __future__ import annotations

import numpy as np

from .core import GraphStructure, PatternMismatchError, SparseRowMatrix
from .sysid import TrajectoryData

MM_HEADER = "%%MatrixMarket matrix coordinate real general"


class FileFormatError(ValueError):
    pass


def write_graph(path, g: GraphStructure):
    lines = [f"{g.n} {g.num_edges + sum(g.has_self_loop)}"]
    for i, nbrs in enumerate(g.neighbors):
        if g.has_self_loop[i]:
            lines.append(f"{i + 1} {i + 1}")
        for j in nbrs:
            lines.append(f"{i + 1} {j + 1}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_graph(path) -> GraphStructure:
    with open(path) as fh:
        tokens = fh.read().split()
    if len(tokens) < 2:
        raise FileFormatError("graph file missing 'n m' header")
    try:
        n, m = int(tokens[0]), int(tokens[1])
    except ValueError as exc:
        raise FileFormatError(f"bad graph header: {exc}") from None
    if len(tokens) != 2 + 2 * m:
        raise FileFormatError(f"expected {m} edges, found {(len(tokens) - 2) // 2}")
    neighbors: list[list[int]] = [[] for _ in range(n)]
    loops = [False] * n
    for k in range(m):
        try:
            i = int(tokens[2 + 2 * k]) - 1
            j = int(tokens[3 + 2 * k]) - 1
        except ValueError as exc:
            raise FileFormatError(f"bad edge line {k + 1}: {exc}") from None
        if not (0 <= i < n and 0 <= j < n):
            raise FileFormatError(f"edge ({i + 1}, {j + 1}) out of range")
        if i == j:
            if loops[i]:
                raise FileFormatError(f"duplicate self-loop on node {i + 1}")
            loops[i] = True
        else:
            if j in neighbors[i]:
                raise FileFormatError(f"duplicate edge ({i + 1}, {j + 1})")
            neighbors[i].append(j)
    try:
        return GraphStructure(n=n, neighbors=neighbors, has_self_loop=loops)
    except ValueError as exc:
        raise FileFormatError(str(exc)) from None


def write_matrix(path, a: SparseRowMatrix, g: GraphStructure):
    """All pattern entries plus the full diagonal are written explicitly."""
    a.check_pattern(g)
    entries = []
    for i in range(g.n):
        entries.append((i + 1, i + 1, a.diag[i]))
        for k, j in enumerate(g.neighbors[i]):
            entries.append((i + 1, j + 1, a.offdiag[i][k]))
    with open(path, "w") as fh:
        fh.write(MM_HEADER + "\n")
        fh.write(f"{g.n} {g.n} {len(entries)}\n")
        for i, j, v in entries:
            fh.write(f"{i} {j} {v:.17g}\n")


def read_matrix(path, g: GraphStructure) -> SparseRowMatrix:
    with open(path) as fh:
        lines = [ln.strip() for ln in fh]
    if not lines or not lines[0].startswith("%%MatrixMarket"):
        raise FileFormatError("missing MatrixMarket header")
    header = lines[0].lower().split()
    if header[1:] != ["matrix", "coordinate", "real", "general"]:
        raise FileFormatError("only 'matrix coordinate real general' is supported")
    body = [ln for ln in lines[1:] if ln and not ln.startswith("%")]
    if not body:
        raise FileFormatError("missing size line")
    try:
        rows, cols, nnz = (int(t) for t in body[0].split())
    except ValueError as exc:
        raise FileFormatError(f"bad size line: {exc}") from None
    if rows != g.n or cols != g.n:
        raise FileFormatError(f"matrix is {rows}x{cols}, graph has {g.n} nodes")
    if len(body) - 1 != nnz:
        raise FileFormatError(f"expected {nnz} entries, found {len(body) - 1}")
    col_pos = [{j: k for k, j in enumerate(nbrs)} for nbrs in g.neighbors]
    a = SparseRowMatrix.zeros(g)
    for ln in body[1:]:
        parts = ln.split()
        try:
            i, j, v = int(parts[0]) - 1, int(parts[1]) - 1, float(parts[2])
        except (ValueError, IndexError) as exc:
            raise FileFormatError(f"bad entry line {ln!r}: {exc}") from None
        if not (0 <= i < g.n and 0 <= j < g.n):
            raise FileFormatError(f"entry ({i + 1}, {j + 1}) out of range")
        if i == j:
            a.diag[i] = v
        elif j in col_pos[i]:
            a.offdiag[i][col_pos[i][j]] = v
        else:
            raise PatternMismatchError(
                f"entry ({i + 1}, {j + 1}) lies outside the graph pattern"
            )
    a.check_pattern(g)
    return a


def write_trajectory(path, data: TrajectoryData):
    """Header "h=<value>", then one row per state component; states are
    columns x_0 ... x_N (so X and X_next overlap by construction)."""
    states = np.hstack([data.X, data.X_next[:, -1:]])
    with open(path, "w") as fh:
        fh.write(f"h={data.h:.17g}\n")
        for row in states:
            fh.write(",".join(f"{v:.17g}" for v in row) + "\n")


def read_trajectory(path) -> TrajectoryData:
    with open(path) as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if not lines or not lines[0].startswith("h="):
        raise FileFormatError("trajectory file must start with an 'h=<value>' header")
    try:
        h = float(lines[0][2:])
    except ValueError as exc:
        raise FileFormatError(f"bad sampling interval: {exc}") from None
    try:
        states = np.array([[float(v) for v in ln.split(",")] for ln in lines[1:]])
    except ValueError as exc:
        raise FileFormatError(f"bad state value: {exc}") from None
    if states.ndim != 2 or states.shape[1] < 2:
        raise FileFormatError("need at least two state columns")
    return TrajectoryData(X=states[:, :-1], X_next=states[:, 1:], h=h)


def write_manifest(path, params: dict):
    with open(path, "w") as fh:
        for key, value in params.items():
            fh.write(f"{key}={value}\n")


def read_manifest(path) -> dict[str, str]:
    result = {}
    with open(path) as fh:
        for ln in fh:
            ln = ln.strip()
            if not ln or "=" not in ln:
                continue
            key, value = ln.split("=", 1)
            result[key] = value
    return result
