"""End-to-end experiment runner and artifact writers."""

from __future__ import annotations

import csv
import io
import time
from dataclasses import dataclass, field, fields, is_dataclass, replace
from pathlib import Path

import numpy as np

from . import io as sio
from .data import (
    LabelVector,
    MultiViewDataset,
    SplitSpec,
    normalize_views,
    stack_views,
    stratified_split_indices,
)
from .evaluation import (
    class_accuracies,
    colgp_fit,
    confusion_matrix,
    kappa,
    knn_classify,
    overall_accuracy,
    pca_fit,
)
from .exceptions import InvalidInputError, UndefinedMetricError
from .features import FeatureSpec, extract_views
from .solver import S3FSEConfig, fit_projection, project, row_support
from .synthetic import SyntheticSpec, synth_generate

METHODS = ("s3fse", "colgp", "pca", "baseline")


@dataclass(frozen=True)
class ExperimentConfig:
    source: str = "synthetic"
    cube: str | None = None
    labels: str | None = None
    views: tuple[str, ...] = ()
    synthetic: SyntheticSpec = field(default_factory=SyntheticSpec)
    features: FeatureSpec = field(default_factory=FeatureSpec)
    split: SplitSpec = field(default_factory=lambda: SplitSpec(30, 0))
    solver: S3FSEConfig = field(default_factory=S3FSEConfig)
    methods: tuple[str, ...] = METHODS
    k_cls: int = 5
    output: str = "out"
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "methods", tuple(self.methods))
        object.__setattr__(self, "views", tuple(self.views))
        if not self.methods:
            raise InvalidInputError("at least one method is required")
        bad = set(self.methods) - set(METHODS)
        if bad:
            raise InvalidInputError(f"unknown methods {sorted(bad)}; choose from {METHODS}")
        if self.source not in ("synthetic", "cube", "views"):
            raise InvalidInputError(f"unknown source {self.source!r}")


@dataclass
class LoadedData:
    """Normalized labeled samples plus, for cubes, every pixel for mapping."""

    labeled: MultiViewDataset
    all_samples: MultiViewDataset | None = None
    labeled_index: np.ndarray | None = None
    shape: tuple[int, int] | None = None
    noise_columns: tuple | None = None


@dataclass
class MethodResult:
    method: str
    oa: float
    kappa: float
    class_acc: np.ndarray
    runtime: float
    predictions: np.ndarray
    projection: object = None
    trace: object = None
    support: object = None
    map_labels: np.ndarray | None = None


def load_data(cfg: ExperimentConfig) -> LoadedData:
    if cfg.source == "synthetic":
        syn = synth_generate(cfg.synthetic)
        return LoadedData(normalize_views(syn.dataset), noise_columns=syn.noise_columns)
    if cfg.source == "views":
        if not cfg.views or not cfg.labels:
            raise InvalidInputError("view input needs --views and --labels")
        views = tuple(sio.read_view_csv(p) for p in cfg.views)
        codes = sio.read_label_raster(cfg.labels)
        keep = np.flatnonzero(codes != 0)
        ds = normalize_views(MultiViewDataset(views))
        labels = LabelVector.from_codes(codes[keep])
        labeled = MultiViewDataset(tuple(v.take(keep) for v in ds.views), labels)
        return LoadedData(labeled)
    if not cfg.cube or not cfg.labels:
        raise InvalidInputError("cube input needs --cube and --labels")
    cube = sio.read_cube(cfg.cube)
    codes = sio.read_label_raster(cfg.labels)
    if codes.size != cube.n_pixels:
        raise InvalidInputError(
            f"label file has {codes.size} entries, cube has {cube.n_pixels} pixels"
        )
    full = normalize_views(extract_views(cube, cfg.features))
    keep = np.flatnonzero(codes != 0)
    labeled = MultiViewDataset(tuple(v.take(keep) for v in full.views), LabelVector.from_codes(codes[keep]))
    return LoadedData(labeled, full, keep, (cube.height, cube.width))


def _embed_fn(method, train, cfg):
    """Fit ``method`` on ``train``; return (embed function, extras)."""
    solver = cfg.solver
    if method == "s3fse":
        P, trace = fit_projection(train, solver)
        return (lambda ds: project(ds, P)), dict(projection=P, trace=trace,
                                               support=row_support(P, solver.sparsity_tol))
    if method == "colgp":
        P = colgp_fit(train, solver)
        return (lambda ds: project(ds, P)), dict(projection=P,
                                               support=row_support(P, solver.sparsity_tol))
    if method == "pca":
        model = pca_fit(stack_views(train), solver.d)
        return (lambda ds: model.transform(stack_views(ds).values)), {}
    return (lambda ds: stack_views(ds).values), {}


def evaluate_embedding(name: str, fit_embed, data: LoadedData, cfg: ExperimentConfig) -> MethodResult:
    """Split, fit via ``fit_embed(train) -> (embed, extras)``, classify, score."""
    ds = data.labeled
    train_idx, test_idx = stratified_split_indices(ds.labels, cfg.split)
    train = ds.take(train_idx)
    test = MultiViewDataset(tuple(v.take(test_idx) for v in ds.views))
    y_tr = train.labels.classes
    y_te = ds.labels.classes[test_idx]

    t0 = time.perf_counter()
    embed, extras = fit_embed(train)
    Y_tr = embed(train)
    pred = knn_classify(Y_tr, y_tr, embed(test), cfg.k_cls)
    runtime = time.perf_counter() - t0

    cm = confusion_matrix(y_te, pred, ds.labels.n_classes)
    try:
        kap = kappa(cm)
    except UndefinedMetricError:
        kap = float("nan")
    result = MethodResult(name, overall_accuracy(cm), kap, class_accuracies(cm), runtime, pred, **extras)
    if data.all_samples is not None:
        result.map_labels = knn_classify(Y_tr, y_tr, embed(data.all_samples), cfg.k_cls)
    return result


def evaluate_method(method: str, data: LoadedData, cfg: ExperimentConfig) -> MethodResult:
    return evaluate_embedding(method, lambda train: _embed_fn(method, train, cfg), data, cfg)


def metrics_rows(results, labels: LabelVector) -> list[list]:
    rows = [["method", "class", "accuracy", "OA", "kappa", "runtime_seconds"]]
    for r in results:
        for code, acc in zip(labels.codes, r.class_acc):
            rows.append([r.method, code, "" if np.isnan(acc) else f"{acc:.6f}", "", "", ""])
        rows.append([r.method, "overall", f"{r.oa:.6f}", f"{r.oa:.6f}", f"{r.kappa:.6f}", f"{r.runtime:.6f}"])
    return rows


def _write_csv(rows, path):
    with Path(path).open("w", newline="") as fh:
        csv.writer(fh).writerows(rows)


def _flatten(obj, prefix=""):
    out = {}
    for f in fields(obj):
        value = getattr(obj, f.name)
        key = f"{prefix}{f.name}"
        if is_dataclass(value):
            out.update(_flatten(value, key + "."))
        elif isinstance(value, (tuple, list)):
            out[key] = ",".join(str(v) for v in value)
        else:
            out[key] = value
    return out


def manifest_text(cfg: ExperimentConfig, extra: dict | None = None) -> str:
    lines = [f"{k}={v}" for k, v in sorted(_flatten(cfg).items())]
    for k, v in sorted((extra or {}).items()):
        lines.append(f"{k}={v}")
    return "\n".join(lines) + "\n"


def gray_levels(labels: np.ndarray, n_classes: int) -> np.ndarray:
    """Class id ``c`` -> gray ``round(c * 255 / C)``; 0 stays black."""
    return np.rint(np.asarray(labels) * 255.0 / n_classes).astype(np.uint8)


def run_experiment(cfg: ExperimentConfig) -> list[MethodResult]:
    """Run every method and write the artifacts into ``cfg.output``."""
    out = Path(cfg.output)
    out.mkdir(parents=True, exist_ok=True)
    data = load_data(cfg)
    labels = data.labeled.labels
    results = [evaluate_method(m, data, cfg) for m in cfg.methods]

    _write_csv(metrics_rows(results, labels), out / "metrics.csv")
    extra = {"n_samples": data.labeled.n, "view_dims": ",".join(map(str, data.labeled.view_dims)),
             "n_classes": labels.n_classes}
    for r in results:
        if r.trace is not None:
            (out / "trace.csv").write_text(r.trace.to_csv())
            extra["s3fse.iterations"] = r.trace.iterations
            extra["s3fse.converged"] = r.trace.converged
        if r.projection is not None:
            r.projection.save(out / f"projection_{r.method}.txt")
    supports = [r for r in results if r.support is not None]
    if supports:
        names = [v.name for v in data.labeled.views]
        text = "".join(f"[{r.method}]\ntau={cfg.solver.sparsity_tol}\n" + r.support.report(names)
                       for r in supports)
        (out / "sparsity.txt").write_text(text)
    if data.shape is not None:
        for i, r in enumerate(results):
            img = gray_levels(r.map_labels, labels.n_classes).reshape(data.shape)
            sio.write_pgm(img, out / f"map_{r.method}.pgm")
            if i == 0:
                sio.write_pgm(img, out / "map.pgm")
        extra["map.method"] = results[0].method
        for c, code in enumerate(labels.codes, 1):
            extra[f"map.legend.{c}"] = f"gray={gray_levels(c, labels.n_classes)} code={code}"
    (out / "manifest.txt").write_text(manifest_text(cfg, extra))
    return results


def sweep_dimension(cfg: ExperimentConfig, d_values) -> list[tuple[str, int, float]]:
    """Refit every method at each ``d``; returns ``(method, d, OA)`` rows."""
    data = load_data(cfg)
    m = sum(data.labeled.view_dims)
    rows = []
    for d in d_values:
        if not 1 <= int(d) <= m:
            raise InvalidInputError(f"d={d} outside [1, {m}]")
        sub = replace(cfg, solver=replace(cfg.solver, d=int(d)))
        for method in cfg.methods:
            rows.append((method, int(d), evaluate_method(method, data, sub).oa))
    return rows


def sweep_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["method", "d", "OA"])
    for method, d, oa in rows:
        w.writerow([method, d, f"{oa:.6f}"])
    return buf.getvalue()
