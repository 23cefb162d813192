"""Neighborhood and label graphs with their Laplacians."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.spatial.distance import cdist

from .data import LabelVector, ViewMatrix
from .exceptions import InvalidInputError

# rows of the distance matrix computed per block in knn_heat_graph
_CHUNK_BYTES = 32 * 2**20


@dataclass(frozen=True)
class SparseGraph:
    """Symmetric nonnegative weights with a zero diagonal, stored as CSR.

    Explicitly stored entries are edges even when their weight underflowed
    to 0.0, so edge counts survive very large distances.
    """

    weights: sp.csr_matrix

    def __post_init__(self):
        W = sp.csr_matrix(self.weights, dtype=np.float64)
        if W.shape[0] != W.shape[1]:
            raise InvalidInputError(f"weight matrix must be square, got {W.shape}")
        if W.nnz and (W.data.min() < 0 or not np.all(np.isfinite(W.data))):
            raise InvalidInputError("edge weights must be finite and nonnegative")
        if W.diagonal().any():
            raise InvalidInputError("graph must not contain self-loops")
        if W.nnz and abs(W - W.T).max() > 1e-12 * max(W.data.max(), 1.0):
            raise InvalidInputError("weight matrix must be symmetric")
        W.sort_indices()
        object.__setattr__(self, "weights", W)

    @property
    def n_nodes(self) -> int:
        return self.weights.shape[0]

    @property
    def degree(self) -> np.ndarray:
        return np.asarray(self.weights.sum(axis=1)).ravel()


@dataclass(frozen=True)
class Laplacian:
    matrix: sp.csr_matrix
    kind: str = "view"

    def toarray(self) -> np.ndarray:
        return self.matrix.toarray()


def _as_array(X) -> np.ndarray:
    if isinstance(X, ViewMatrix):
        return X.values
    return np.asarray(X, dtype=np.float64)


def knn_neighbors(X, k: int) -> np.ndarray:
    """Indices of the ``k`` nearest other samples for every row of ``X``.

    Ties at equal distance go to the smaller sample index.
    """
    X = _as_array(X)
    n = X.shape[0]
    chunk = max(1, _CHUNK_BYTES // (8 * max(n, 1)))
    nbrs = np.empty((n, k), dtype=np.int64)
    for start in range(0, n, chunk):
        stop = min(n, start + chunk)
        D = cdist(X[start:stop], X, metric="sqeuclidean")
        D[np.arange(stop - start), np.arange(start, stop)] = np.inf
        nbrs[start:stop] = np.argsort(D, axis=1, kind="stable")[:, :k]
    return nbrs


def knn_heat_graph(X, k: int = 5, t: float = 1.0) -> SparseGraph:
    """Heat-kernel weights on the symmetrized k-nearest-neighbor graph.

    ``w_ij = exp(-||x_i - x_j||^2 / t)`` whenever ``j`` is one of the ``k``
    nearest neighbors of ``i`` or vice versa.
    """
    X = _as_array(X)
    n = X.shape[0]
    if k < 1 or k >= n:
        raise InvalidInputError(f"k must satisfy 1 <= k < n={n}, got {k}")
    if not t > 0:
        raise InvalidInputError(f"kernel width t must be positive, got {t}")
    nbrs = knn_neighbors(X, k)
    rows = np.repeat(np.arange(n), k)
    cols = nbrs.ravel()
    # OR-rule: keep an edge if either endpoint selected it
    mask = sp.csr_matrix((np.ones(rows.size), (rows, cols)), shape=(n, n))
    mask = ((mask + mask.T) > 0).astype(np.float64).tocoo()
    d2 = np.sum((X[mask.row] - X[mask.col]) ** 2, axis=1)
    W = sp.csr_matrix((np.exp(-d2 / t), (mask.row, mask.col)), shape=(n, n))
    return SparseGraph(W)


def laplacian(G: SparseGraph, kind: str = "view") -> Laplacian:
    """``L = D - W`` with ``D`` the diagonal of row sums."""
    W = G.weights
    L = sp.diags(G.degree) - W
    return Laplacian(sp.csr_matrix(L), kind)


def joint_label_graph(labels: LabelVector, n_views: int) -> SparseGraph:
    """Supervised graph over all ``n * n_views`` (view, sample) nodes.

    Node ``v * n + i`` is sample ``i`` seen in view ``v`` (0-based). Two
    distinct nodes are linked with weight 1 when their samples share a
    class, which includes the same sample seen in two different views.
    """
    if n_views < 1:
        raise InvalidInputError("need at least one view")
    z = np.asarray(labels.classes if isinstance(labels, LabelVector) else labels)
    same = sp.csr_matrix((z[:, None] == z[None, :]).astype(np.float64))
    W = sp.kron(np.ones((n_views, n_views)), same, format="csr")
    W = W - sp.identity(W.shape[0], format="csr")
    W.eliminate_zeros()
    return SparseGraph(W)


def joint_laplacian_blocks(G: SparseGraph, n: int, n_views: int) -> list[list[sp.csr_matrix]]:
    """Partition the joint Laplacian into an ``n_views x n_views`` grid of n x n blocks."""
    if n < 1 or n_views < 1 or G.n_nodes != n * n_views:
        raise InvalidInputError(
            f"graph has {G.n_nodes} nodes, cannot split as n={n} x views={n_views}"
        )
    L = laplacian(G, kind="joint").matrix
    return [
        [L[s * n:(s + 1) * n, t * n:(t + 1) * n] for t in range(n_views)]
        for s in range(n_views)
    ]
