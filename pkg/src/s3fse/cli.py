"""Command-line entry point: ``s3fse {synth,features,fit,eval,run,sweep}``.

Any flag may also come from ``--config FILE`` (``key=value`` lines, keys
spelled like the flags with or without leading dashes); explicit
command-line flags win.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import io as sio
from .data import SplitSpec, stratified_split_indices
from .exceptions import InvalidInputError, NumericalError, UndefinedMetricError
from .experiment import (
    METHODS,
    ExperimentConfig,
    evaluate_embedding,
    gray_levels,
    load_data,
    manifest_text,
    metrics_rows,
    run_experiment,
    sweep_csv,
    sweep_dimension,
    _write_csv,
)
from .features import DmpSpec, FeatureSpec, GaborBankSpec, extract_views
from .solver import ProjectionMatrix, S3FSEConfig, fit_projection, project, row_support
from .synthetic import SyntheticSpec, synth_cube, synth_generate

log = logging.getLogger("s3fse")


def _ints(text):
    return tuple(int(x) for x in str(text).split(",") if x.strip())


def _strs(text):
    return tuple(x.strip() for x in str(text).split(",") if x.strip())


def _add_input(p):
    g = p.add_argument_group("input")
    g.add_argument("--source", choices=("synthetic", "cube", "views"), default="synthetic")
    g.add_argument("--cube", help="cube header file")
    g.add_argument("--labels", help="label file, one integer per line, 0 = unlabeled")
    g.add_argument("--views", type=_strs, default=(), help="comma-separated view CSV files")
    _add_synth(p)
    g = p.add_argument_group("features (cube input)")
    g.add_argument("--gabor-kernel-size", type=int, default=31)
    g.add_argument("--gabor-method", choices=("direct", "fft"), default="direct")
    g.add_argument("--dmp-radii", type=_ints, default=(2, 4, 6, 8))
    g.add_argument("--num-pcs", type=int, default=10)
    g.add_argument("--feature-views", type=_strs, default=("spectral", "texture", "dmp"))


def _add_synth(p):
    g = p.add_argument_group("synthetic data")
    g.add_argument("--n-per-class", type=int, default=40)
    g.add_argument("--n-classes", type=int, default=4)
    g.add_argument("--view-dims", type=_ints, default=(30, 20, 25))
    g.add_argument("--class-separation", type=float, default=2.5)
    g.add_argument("--noise-sigma", type=float, default=1.0)
    g.add_argument("--redundant-frac", type=float, default=0.4)
    g.add_argument("--latent-dim", type=int, default=3)


def _add_solver(p):
    g = p.add_argument_group("solver")
    g.add_argument("--alpha", type=float, default=0.1)
    g.add_argument("--beta", type=float, default=0.01)
    g.add_argument("--d", type=int, default=10, help="target dimensionality")
    g.add_argument("--k", type=int, default=5, help="graph neighbors")
    g.add_argument("--t", type=float, default=1.0, help="heat-kernel width")
    g.add_argument("--max-iter", type=int, default=30)
    g.add_argument("--tol", type=float, default=1e-6)
    g.add_argument("--eps-row", type=float, default=1e-8)
    g.add_argument("--ridge", type=float, default=1e-6)
    g.add_argument("--tau", type=float, default=1e-6, help="row-norm threshold for sparsity")


def _add_common(p, solver=True, split=True):
    p.add_argument("--config", help="key=value file supplying defaults for any flag")
    p.add_argument("--output", "-o", default="out")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-v", "--verbose", action="store_true")
    if split:
        p.add_argument("--per-class-train", type=int, default=30)
        p.add_argument("--k-cls", type=int, default=5, help="neighbors for the kNN classifier")
    if solver:
        _add_solver(p)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="s3fse", description="Multi-view spectral-spatial feature selection and extraction.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate synthetic views or a synthetic cube")
    _add_common(p, solver=False, split=False)
    _add_synth(p)
    p.add_argument("--kind", choices=("views", "cube"), default="views")
    p.add_argument("--width", type=int, default=48)
    p.add_argument("--height", type=int, default=48)
    p.add_argument("--bands", type=int, default=24)

    p = sub.add_parser("features", help="extract spectral/texture/DMP views from a cube")
    _add_common(p, solver=False, split=False)
    _add_input(p)

    p = sub.add_parser("fit", help="learn a projection on the training split")
    _add_common(p)
    _add_input(p)

    p = sub.add_parser("eval", help="evaluate a saved projection")
    _add_common(p)
    _add_input(p)
    p.add_argument("--projection", required=True)

    for name, helptext in (("run", "full experiment"), ("sweep", "OA versus target dimensionality")):
        p = sub.add_parser(name, help=helptext)
        _add_common(p)
        _add_input(p)
        p.add_argument("--methods", type=_strs, default=METHODS)
        if name == "sweep":
            p.add_argument("--d-values", type=_ints, default=tuple(range(1, 21)))
    return parser


def _config_defaults(path) -> dict:
    out = {}
    for key, value in sio.read_keyvalue(path).items():
        out[key.lstrip("-").replace("-", "_")] = value
    return out


def parse_args(argv=None) -> argparse.Namespace:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        sub = parser._subparsers._group_actions[0].choices[args.command]
        defaults = _config_defaults(args.config)
        known = {a.dest for a in sub._actions}
        unknown = set(defaults) - known
        if unknown:
            parser.error(f"unknown keys in {args.config}: {', '.join(sorted(unknown))}")
        # string defaults go through each flag's type converter
        sub.set_defaults(**defaults)
        args = parser.parse_args(argv)
    return args


def experiment_config(args) -> ExperimentConfig:
    synthetic = SyntheticSpec(
        n_per_class=args.n_per_class, n_classes=args.n_classes, view_dims=args.view_dims,
        class_separation=args.class_separation, noise_sigma=args.noise_sigma,
        redundant_frac=args.redundant_frac, latent_dim=args.latent_dim, seed=args.seed,
    )
    features = FeatureSpec(
        gabor=GaborBankSpec(kernel_size=args.gabor_kernel_size, method=args.gabor_method),
        dmp=DmpSpec(radii=args.dmp_radii, num_pcs=args.num_pcs),
        views=args.feature_views,
    )
    kw = {}
    if hasattr(args, "alpha"):
        kw["solver"] = S3FSEConfig(
            alpha=args.alpha, beta=args.beta, d=args.d, k=args.k, t=args.t, max_iter=args.max_iter,
            tol=args.tol, eps_row=args.eps_row, ridge=args.ridge, sparsity_tol=args.tau, seed=args.seed,
        )
    if hasattr(args, "per_class_train"):
        kw["split"] = SplitSpec(args.per_class_train, args.seed)
        kw["k_cls"] = args.k_cls
    if hasattr(args, "methods"):
        kw["methods"] = args.methods
    return ExperimentConfig(
        source=args.source, cube=args.cube, labels=args.labels, views=args.views,
        synthetic=synthetic, features=features, output=args.output, seed=args.seed, **kw,
    )


def cmd_synth(args) -> int:
    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    if args.kind == "cube":
        cube, labels = synth_cube(args.width, args.height, args.bands, args.n_classes,
                                  seed=args.seed)
        sio.write_cube(cube, out / "cube.hdr")
        sio.write_label_raster(labels.ravel(), out / "labels.txt")
        return 0
    spec = SyntheticSpec(
        n_per_class=args.n_per_class, n_classes=args.n_classes, view_dims=args.view_dims,
        class_separation=args.class_separation, noise_sigma=args.noise_sigma,
        redundant_frac=args.redundant_frac, latent_dim=args.latent_dim, seed=args.seed,
    )
    syn = synth_generate(spec)
    for v in syn.dataset.views:
        sio.write_view_csv(v, out / f"{v.name}.csv")
    sio.write_label_raster(syn.dataset.labels.classes, out / "labels.txt")
    with (out / "noise_columns.txt").open("w") as fh:
        for v, cols in zip(syn.dataset.views, syn.noise_columns):
            fh.write(f"{v.name}=" + ",".join(str(c) for c in cols) + "\n")
    return 0


def cmd_features(args) -> int:
    cfg = experiment_config(args)
    if not cfg.cube:
        raise InvalidInputError("features needs --cube")
    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    ds = extract_views(sio.read_cube(cfg.cube), cfg.features)
    for v in ds.views:
        sio.write_view_csv(v, out / f"{v.name}.csv")
    return 0


def cmd_fit(args) -> int:
    cfg = experiment_config(args)
    out = Path(cfg.output)
    out.mkdir(parents=True, exist_ok=True)
    data = load_data(cfg)
    train_idx, _ = stratified_split_indices(data.labeled.labels, cfg.split)
    train = data.labeled.take(train_idx)
    P, trace = fit_projection(train, cfg.solver)
    P.save(out / "projection.txt")
    (out / "trace.csv").write_text(trace.to_csv())
    names = [v.name for v in train.views]
    (out / "sparsity.txt").write_text(
        f"tau={cfg.solver.sparsity_tol}\n" + row_support(P, cfg.solver.sparsity_tol).report(names)
    )
    (out / "manifest.txt").write_text(manifest_text(cfg, {
        "s3fse.iterations": trace.iterations, "s3fse.converged": trace.converged,
    }))
    return 0


def cmd_eval(args) -> int:
    cfg = experiment_config(args)
    out = Path(cfg.output)
    out.mkdir(parents=True, exist_ok=True)
    P = ProjectionMatrix.load(args.projection)
    data = load_data(cfg)
    result = evaluate_embedding("projection", lambda train: ((lambda ds: project(ds, P)), {}), data, cfg)
    _write_csv(metrics_rows([result], data.labeled.labels), out / "metrics.csv")
    if data.shape is not None:
        sio.write_pgm(gray_levels(result.map_labels, data.labeled.labels.n_classes).reshape(data.shape),
                      out / "map.pgm")
    (out / "manifest.txt").write_text(manifest_text(cfg, {"projection": args.projection}))
    return 0


def cmd_run(args) -> int:
    results = run_experiment(experiment_config(args))
    for r in results:
        log.info("%-8s OA=%.4f kappa=%.4f time=%.3fs", r.method, r.oa, r.kappa, r.runtime)
    return 0


def cmd_sweep(args) -> int:
    cfg = experiment_config(args)
    out = Path(cfg.output)
    out.mkdir(parents=True, exist_ok=True)
    rows = sweep_dimension(cfg, args.d_values)
    (out / "sweep.csv").write_text(sweep_csv(rows))
    (out / "manifest.txt").write_text(manifest_text(cfg, {
        "d_values": ",".join(map(str, args.d_values)),
    }))
    return 0


COMMANDS = {
    "synth": cmd_synth, "features": cmd_features, "fit": cmd_fit,
    "eval": cmd_eval, "run": cmd_run, "sweep": cmd_sweep,
}

_HINTS = {
    InvalidInputError: "check the input files and flag values",
    NumericalError: "try a larger --ridge or fewer target dimensions (--d)",
    UndefinedMetricError: "the test split is degenerate; use more samples per class",
    OSError: "check that the paths exist and the output directory is writable",
}


def main(argv=None) -> int:
    args = parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except tuple(_HINTS) as exc:
        origin = getattr(exc, "__module__", "") or type(exc).__module__
        tb = exc.__traceback__
        while tb is not None and tb.tb_next is not None:
            tb = tb.tb_next
        if tb is not None:
            origin = tb.tb_frame.f_globals.get("__name__", origin)
        hint = next(h for cls, h in _HINTS.items() if isinstance(exc, cls))
        print(f"error [{origin}] {type(exc).__name__}: {exc}\nhint: {hint}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
