"""Projection learning by iteratively reweighted generalized eigenproblems.

The learned stacked projection ``P`` (``m x d``, ``m`` = total feature
count over all views) minimizes

    tr(P' H1 P) + alpha * tr(P' H2 P) + beta * ||P||_{2,1}
    subject to  P' (X'X + ridge I) P = I

where ``H1`` collects per-view kNN Laplacian smoothness, ``H2`` is the
supervised cross-view term built from the joint label graph, and ``X`` is
the column-stacked training matrix. The ``l2,1`` term is handled by
repeatedly replacing it with the quadratic ``tr(P' H3 P)``, ``H3`` diagonal
with entries ``1 / (2 ||row_i||)`` evaluated at the previous iterate.
"""

from __future__ import annotations

import logging
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
import scipy.linalg

from .data import LabelVector, MultiViewDataset, split_stacked, stack_views, view_offsets
from .exceptions import InvalidInputError, NumericalError
from .graphs import joint_label_graph, joint_laplacian_blocks, knn_heat_graph, laplacian

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class S3FSEConfig:
    alpha: float = 0.1
    beta: float = 0.01
    d: int = 10
    k: int = 5
    t: float = 1.0
    max_iter: int = 30
    tol: float = 1e-6
    eps_row: float = 1e-8
    ridge: float = 1e-6
    sparsity_tol: float = 1e-6
    seed: int = 0

    def __post_init__(self):
        if self.alpha < 0 or self.beta < 0:
            raise InvalidInputError("alpha and beta must be nonnegative")
        if int(self.d) < 1:
            raise InvalidInputError("target dimensionality d must be >= 1")
        if not self.tol > 0:
            raise InvalidInputError("tol must be positive")
        if int(self.max_iter) < 1:
            raise InvalidInputError("max_iter must be >= 1")
        if self.ridge < 0 or not self.eps_row > 0:
            raise InvalidInputError("ridge must be >= 0 and eps_row > 0")


@dataclass(frozen=True)
class ProjectionMatrix:
    """Stacked ``m x d`` projection partitioned into per-view row blocks."""

    total: np.ndarray
    view_dims: tuple[int, ...]
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        P = np.array(self.total, dtype=np.float64)
        if P.ndim != 2:
            raise InvalidInputError("projection must be 2-D")
        dims = tuple(int(x) for x in self.view_dims)
        if sum(dims) != P.shape[0]:
            raise InvalidInputError(
                f"view dims sum to {sum(dims)} but projection has {P.shape[0]} rows"
            )
        P.flags.writeable = False
        object.__setattr__(self, "total", P)
        object.__setattr__(self, "view_dims", dims)

    @property
    def n_components(self) -> int:
        return self.total.shape[1]

    @property
    def blocks(self) -> list[np.ndarray]:
        return [b.T for b in split_stacked(self.total.T, self.view_dims)]

    def row_norms(self) -> np.ndarray:
        return np.linalg.norm(self.total, axis=1)

    def to_text(self) -> str:
        lines = [
            f"# V={len(self.view_dims)}",
            "# dims=" + ",".join(str(x) for x in self.view_dims),
            f"# d={self.n_components}",
        ]
        for key, value in sorted(self.meta.items()):
            lines.append(f"# {key}={value}")
        body = [",".join(repr(float(x)) for x in row) for row in self.total]
        return "\n".join(lines + body) + "\n"

    def save(self, path) -> None:
        Path(path).write_text(self.to_text())

    @classmethod
    def from_text(cls, text: str) -> "ProjectionMatrix":
        header, rows = {}, []
        for line in text.splitlines():
            if not line.strip():
                continue
            if line.startswith("#"):
                key, _, value = line[1:].strip().partition("=")
                header[key.strip()] = value.strip()
            else:
                rows.append([float(x) for x in line.split(",")])
        try:
            dims = tuple(int(x) for x in header.pop("dims").split(","))
            d = int(header.pop("d"))
            header.pop("V", None)
        except KeyError as exc:
            raise InvalidInputError(f"projection file missing header {exc}") from None
        total = np.array(rows, dtype=np.float64).reshape(len(rows), d)
        return cls(total, dims, header)

    @classmethod
    def load(cls, path) -> "ProjectionMatrix":
        return cls.from_text(Path(path).read_text())


@dataclass
class SolveTrace:
    objective: list[float] = field(default_factory=list)
    sparsity: list[float] = field(default_factory=list)
    seconds: list[float] = field(default_factory=list)
    converged: bool = False

    @property
    def iterations(self) -> int:
        return len(self.objective)

    def to_csv(self) -> str:
        rows = ["iteration,objective,sparsity,seconds"]
        for i, (f, s, sec) in enumerate(zip(self.objective, self.sparsity, self.seconds), 1):
            rows.append(f"{i},{f!r},{s!r},{sec:.6f}")
        return "\n".join(rows) + "\n"


@dataclass(frozen=True)
class RowSupport:
    selected: list[np.ndarray]
    view_sparsity: list[float]
    sparsity: float
    view_entry_sparsity: list[float]
    entry_sparsity: float
    zero_rows: int
    view_zero_rows: list[int]

    def report(self, names=None) -> str:
        names = names or [f"view{v}" for v in range(len(self.selected))]
        out = [
            f"overall_row_sparsity={self.sparsity:.6f}",
            f"overall_entry_sparsity={self.entry_sparsity:.6f}",
            f"overall_zero_rows={self.zero_rows}",
        ]
        for name, sel, s, e, z in zip(
            names, self.selected, self.view_sparsity, self.view_entry_sparsity, self.view_zero_rows
        ):
            out.append(f"{name}.row_sparsity={s:.6f}")
            out.append(f"{name}.entry_sparsity={e:.6f}")
            out.append(f"{name}.zero_rows={z}")
            out.append(f"{name}.selected=" + ",".join(str(int(i)) for i in sel))
        return "\n".join(out) + "\n"


def l21_norm(M) -> float:
    """Sum of the Euclidean norms of the rows of ``M``."""
    M = np.asarray(M, dtype=np.float64)
    if M.size == 0:
        return 0.0
    return float(np.linalg.norm(M.reshape(M.shape[0], -1), axis=1).sum())


def assemble_h1(ds: MultiViewDataset, k: int = 5, t: float = 1.0) -> np.ndarray:
    """Block-diagonal matrix of per-view ``X_v' L_v X_v``."""
    blocks = []
    for v in ds.views:
        L = laplacian(knn_heat_graph(v.values, k, t)).matrix
        X = v.values
        B = X.T @ (L @ X)
        blocks.append(0.5 * (B + B.T))
    return scipy.linalg.block_diag(*blocks)


def assemble_h2(ds: MultiViewDataset, labels: LabelVector | None = None) -> np.ndarray:
    """Grid of ``X_s' L_st X_t`` blocks from the joint label-graph Laplacian."""
    labels = ds.labels if labels is None else labels
    if labels is None:
        raise InvalidInputError("H2 needs class labels")
    if len(labels) != ds.n:
        raise InvalidInputError(f"{len(labels)} labels for {ds.n} samples")
    V = ds.n_views
    Lb = joint_laplacian_blocks(joint_label_graph(labels, V), ds.n, V)
    off = view_offsets(ds.view_dims)
    m = int(off[-1])
    H = np.zeros((m, m))
    for s in range(V):
        Xs = ds.views[s].values
        for t in range(V):
            Xt = ds.views[t].values
            H[off[s]:off[s + 1], off[t]:off[t + 1]] = Xs.T @ (Lb[s][t] @ Xt)
    return 0.5 * (H + H.T)


def h3_weights(P, eps_row: float = 1e-8) -> np.ndarray:
    """Diagonal of the reweighting matrix as a vector."""
    norms = np.linalg.norm(np.asarray(P, dtype=np.float64), axis=1)
    return 0.5 / np.maximum(norms, eps_row)


def reweight_h3(P, eps_row: float = 1e-8) -> np.ndarray:
    """Diagonal ``m x m`` matrix with entries ``1 / (2 max(||row_i||, eps_row))``."""
    if isinstance(P, ProjectionMatrix):
        P = P.total
    return np.diag(h3_weights(P, eps_row))


def fix_signs(V: np.ndarray) -> np.ndarray:
    """Flip columns so each column's largest-magnitude entry is positive."""
    V = np.array(V, dtype=np.float64)
    if V.size == 0:
        return V
    idx = np.argmax(np.abs(V), axis=0)
    signs = np.sign(V[idx, np.arange(V.shape[1])])
    signs[signs == 0] = 1.0
    return V * signs


def generalized_eigensolve(A, B, d: int) -> tuple[np.ndarray, np.ndarray]:
    """Smallest ``d`` eigenpairs of the symmetric-definite pencil ``(A, B)``.

    Returns B-orthonormal eigenvectors as columns and eigenvalues in
    ascending order.
    """
    A = np.asarray(A, dtype=np.float64)
    B = np.asarray(B, dtype=np.float64)
    m = A.shape[0]
    if A.shape != (m, m) or B.shape != (m, m):
        raise InvalidInputError(f"pencil shapes differ: A{A.shape}, B{B.shape}")
    if not 1 <= d <= m:
        raise InvalidInputError(f"need 1 <= d <= {m}, got d={d}")
    A = 0.5 * (A + A.T)
    B = 0.5 * (B + B.T)
    try:
        vals, vecs = scipy.linalg.eigh(A, B, subset_by_index=[0, d - 1])
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise NumericalError(
            f"generalized eigensolve failed ({exc}); the constraint matrix is not "
            "positive definite, increase ridge"
        ) from None
    if not (np.all(np.isfinite(vals)) and np.all(np.isfinite(vecs))):
        raise NumericalError("generalized eigensolve produced non-finite values; increase ridge")
    return fix_signs(vecs), vals


def objective_value(P, H1, H2, alpha: float, beta: float) -> float:
    f = np.trace(P.T @ H1 @ P)
    if alpha:
        f += alpha * np.trace(P.T @ H2 @ P)
    if beta:
        f += beta * l21_norm(P)
    return float(f)


def _row_sparsity(P, tau):
    return float(np.mean(np.linalg.norm(P, axis=1) <= tau))


def fit_projection(
    ds: MultiViewDataset,
    cfg: S3FSEConfig = S3FSEConfig(),
    labels: LabelVector | None = None,
) -> tuple[ProjectionMatrix, SolveTrace]:
    """Learn the row-sparse stacked projection on a (normalized) dataset."""
    labels = ds.labels if labels is None else labels
    X = stack_views(ds).values
    n, m = X.shape
    d = int(cfg.d)
    if d > m:
        raise InvalidInputError(f"d={d} exceeds total feature count m={m}")
    rank = np.linalg.matrix_rank(X)
    if d > rank:
        raise InvalidInputError(
            f"d={d} exceeds rank of the stacked training matrix ({rank}); "
            "lower d or add training samples"
        )
    if cfg.beta == 0 and m > rank:
        logger.warning(
            "stacked matrix is rank deficient (rank %d < m=%d) and beta=0: "
            "null-space directions have zero cost and may dominate the embedding",
            rank, m,
        )

    H1 = assemble_h1(ds, cfg.k, cfg.t)
    H2 = assemble_h2(ds, labels) if cfg.alpha > 0 else np.zeros_like(H1)
    B = X.T @ X + cfg.ridge * np.eye(m)
    A0 = H1 + cfg.alpha * H2

    rng = np.random.default_rng(cfg.seed)
    P = rng.uniform(-1.0, 1.0, size=(m, d))
    trace = SolveTrace()
    eta = None
    prev = None
    for it in range(1, int(cfg.max_iter) + 1):
        t0 = time.perf_counter()
        A = A0 + np.diag(cfg.beta * h3_weights(P, cfg.eps_row)) if cfg.beta else A0
        P, eta = generalized_eigensolve(A, B, d)
        f = objective_value(P, H1, H2, cfg.alpha, cfg.beta)
        if not np.isfinite(f):
            raise NumericalError(f"objective became non-finite at iteration {it}")
        trace.objective.append(f)
        trace.sparsity.append(_row_sparsity(P, cfg.sparsity_tol))
        trace.seconds.append(time.perf_counter() - t0)
        logger.debug("iter %d objective %.10g sparsity %.4f", it, f, trace.sparsity[-1])
        if prev is not None and abs(f - prev) / max(abs(prev), 1e-12) < cfg.tol:
            trace.converged = True
            break
        prev = f

    meta = {f"config.{k}": v for k, v in asdict(cfg).items()}
    meta["seed"] = cfg.seed
    meta["eigenvalues"] = ";".join(repr(float(e)) for e in eta)
    return ProjectionMatrix(P, ds.view_dims, meta), trace


def project(ds: MultiViewDataset, P: ProjectionMatrix) -> np.ndarray:
    """Embed every sample: ``Y = X_stacked @ P``."""
    if tuple(ds.view_dims) != tuple(P.view_dims):
        raise InvalidInputError(
            f"view dims {ds.view_dims} do not match projection blocks {P.view_dims}"
        )
    return stack_views(ds).values @ P.total


def row_support(P: ProjectionMatrix, tau: float = 1e-6) -> RowSupport:
    """Rows with norm above ``tau`` count as selected features."""
    if not tau > 0:
        raise InvalidInputError("tau must be positive")
    norms = P.row_norms()
    off = view_offsets(P.view_dims)
    selected, view_sp, view_entry, view_zero = [], [], [], []
    for v in range(len(P.view_dims)):
        block = P.total[off[v]:off[v + 1]]
        nv = norms[off[v]:off[v + 1]]
        selected.append(np.flatnonzero(nv > tau))
        view_zero.append(int(np.sum(nv <= tau)))
        view_sp.append(view_zero[-1] / max(len(nv), 1))
        view_entry.append(float(np.mean(np.abs(block) <= tau)) if block.size else 0.0)
    zero = int(np.sum(norms <= tau))
    return RowSupport(
        selected=selected,
        view_sparsity=view_sp,
        sparsity=zero / max(len(norms), 1),
        view_entry_sparsity=view_entry,
        entry_sparsity=float(np.mean(np.abs(P.total) <= tau)),
        zero_rows=zero,
        view_zero_rows=view_zero,
    )
