"""Command-line entry point: ``dtnet <subcommand> ...``.

Exit status is 0 on success, 1 on input/validation failures (one line on
stderr of the form ``dtnet: error: <Kind>: <message>``) and 2 on usage
errors.  Files are written atomically.  ``--workers`` (or ``DTNET_WORKERS``)
only affects speed, never output.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile

import numpy as np

from . import __version__
from .classify import ClassifierSpec, ForestParams, SvmParams, canonical_mask, fit_classifier
from .dataset import build_binary_sample, build_weeds_style, parse_bless, parse_pairs
from .evaluation import (METRICS, ExperimentConfig, cross_validate, feature_sweep, featurize, format_table,
                         run_experiment_1, run_experiment_2, run_experiment_3)
from .features import FEATURE_NAMES, FeatureConfig, batch_features, write_features_tsv
from .graph import DEFAULT_EW_MAX, load_graph
from .synth import SynthSpec, generate


def write_atomic(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _features_arg(text: str) -> tuple[str, ...]:
    if text.strip().upper() == "ALL":
        return FEATURE_NAMES
    try:
        return canonical_mask(text.split(","))
    except ValueError as e:
        raise argparse.ArgumentTypeError(str(e)) from None


def _range_arg(text: str) -> tuple[int, int]:
    try:
        lo, hi = (int(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected LO,HI integers, got {text!r}") from None
    return lo, hi


def _default_workers() -> int:
    return int(os.environ.get("DTNET_WORKERS", "1"))


def _add_graph(p, required=True):
    p.add_argument("--graph", required=required, help="DT edge list (word1<TAB>word2<TAB>weight)")
    p.add_argument("--ew-max", type=int, default=DEFAULT_EW_MAX, help="maximum admissible edge weight")
    p.add_argument("--top-k", type=int, default=None, help="keep only each word's k heaviest edges")
    p.add_argument("--max-hops", type=int, default=6, help="search cap for SP/SPW")
    p.add_argument("--oov-policy", choices=("impute", "error"), default="impute",
                   help="handling of words missing from the graph")
    p.add_argument("--include-endpoints", action="store_true",
                   help="count the pair's own words inside the EDin/EDun node sets")


def _add_classifier(p, features_default="ALL"):
    p.add_argument("--model", choices=("svm", "forest"), default="svm", help="classifier")
    p.add_argument("--features", type=_features_arg, default=features_default,
                   help="comma-separated subset of SS,SP,SPW,EDin,EDun, or ALL")
    p.add_argument("--C", dest="C", type=float, default=SvmParams.C, help="SVM regularisation constant")
    p.add_argument("--epochs", type=int, default=SvmParams.epochs, help="SVM training epochs")
    p.add_argument("--batch-size", type=int, default=SvmParams.batch_size, help="SVM mini-batch size")
    p.add_argument("--n-trees", type=int, default=ForestParams.n_trees, help="forest size")
    p.add_argument("--max-depth", type=int, default=None, help="tree depth cap (none if omitted)")
    p.add_argument("--min-leaf", type=int, default=ForestParams.min_leaf, help="minimum rows per leaf")
    p.add_argument("--features-per-split", type=int, default=None,
                   help="features tried per split (ceil(sqrt(d)) if omitted)")
    p.add_argument("--no-bootstrap", action="store_true", help="grow trees on the full training set")


def _add_common(p):
    p.add_argument("--seed", type=int, default=0, help="master random seed")
    p.add_argument("--workers", type=int, default=_default_workers(),
                   help="parallel worker processes (does not change results)")


def build_parser() -> argparse.ArgumentParser:
    fmt = argparse.ArgumentDefaultsHelpFormatter
    parser = argparse.ArgumentParser(prog="dtnet", description=__doc__.splitlines()[0], formatter_class=fmt)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("features", help="compute the five measures for word pairs", formatter_class=fmt)
    _add_graph(p)
    p.add_argument("--pairs", required=True, help="pair TSV (word1<TAB>word2[<TAB>label])")
    p.add_argument("--out", default=None, help="output TSV (stdout if omitted)")
    p.add_argument("--workers", type=int, default=_default_workers(), help="parallel worker processes")

    p = sub.add_parser("build-dataset", help="construct a dataset from a BLESS-style file", formatter_class=fmt)
    p.add_argument("--bless", required=True, help="concept<TAB>relatum<TAB>relation file")
    p.add_argument("--rule", choices=("weeds", "binary"), default="weeds", help="construction rule")
    p.add_argument("--negative", default="RANDOM", help="negative relation for --rule binary")
    p.add_argument("--n-per-class", type=int, default=1000, help="pairs per class for --rule binary")
    p.add_argument("--seed", type=int, default=0, help="master random seed")
    p.add_argument("--out", required=True, help="output pair TSV")

    for name, text in (("train", "train one classifier on all pairs"),
                       ("cv", "k-fold cross-validation"),
                       ("sweep", "cross-validate every feature subset")):
        p = sub.add_parser(name, help=text, formatter_class=fmt)
        _add_graph(p)
        p.add_argument("--pairs", required=True, help="labelled pair TSV")
        p.add_argument("--positive", default="COHYP", help="positive relation label")
        _add_classifier(p)
        _add_common(p)
        if name != "train":
            p.add_argument("--folds", type=int, default=10, help="number of CV folds")
        if name == "sweep":
            p.add_argument("--metric", choices=METRICS, default="accuracy", help="ranking metric")
        p.add_argument("--out", required=name == "train", default=None, help="output JSON")

    p = sub.add_parser("experiment", help="run one of the three experiment protocols", formatter_class=fmt)
    p.add_argument("which", choices=("exp1", "exp2", "exp3"), help="protocol")
    _add_graph(p)
    p.add_argument("--pairs", default=None, help="labelled pair TSV (exp1, exp2)")
    p.add_argument("--bless", default=None, help="BLESS-style relation file (exp3; exp1 builds from it)")
    p.add_argument("--n-per-class", type=int, default=1000, help="pairs per class (exp3)")
    p.add_argument("--folds", type=int, default=10, help="number of CV folds")
    p.add_argument("--C", dest="C", type=float, default=SvmParams.C, help="SVM regularisation constant")
    p.add_argument("--epochs", type=int, default=SvmParams.epochs, help="SVM training epochs")
    p.add_argument("--batch-size", type=int, default=SvmParams.batch_size, help="SVM mini-batch size")
    p.add_argument("--n-trees", type=int, default=ForestParams.n_trees, help="forest size")
    _add_common(p)
    p.add_argument("--out", default=None, help="output JSON with every report")

    p = sub.add_parser("synth", help="generate a planted synthetic DT and labelled pairs", formatter_class=fmt)
    d = SynthSpec()
    p.add_argument("--n-clusters", type=int, default=d.n_clusters, help="number of co-hyponym clusters")
    p.add_argument("--cluster-size", type=int, default=d.cluster_size, help="members per cluster")
    p.add_argument("--intra-p", type=float, default=d.intra_p, help="edge probability inside a cluster")
    p.add_argument("--intra-weights", type=_range_arg, default=d.intra_weight_range, help="LO,HI")
    p.add_argument("--hub-degree", type=int, default=d.hub_degree, help="members tied to each hub")
    p.add_argument("--hub-weights", type=_range_arg, default=d.hub_weight_range, help="LO,HI")
    p.add_argument("--part-attach", type=float, default=d.part_attach, help="probability a member has a part")
    p.add_argument("--part-links", type=int, default=d.part_links, help="extra cluster links per part")
    p.add_argument("--part-weights", type=_range_arg, default=d.part_weight_range, help="LO,HI")
    p.add_argument("--noise-p", type=float, default=d.noise_p, help="cross-cluster edge probability")
    p.add_argument("--noise-weights", type=_range_arg, default=d.noise_weight_range, help="LO,HI")
    p.add_argument("--n-random", type=int, default=None, help="RANDOM pairs (as many as COHYP if omitted)")
    p.add_argument("--ew-max", type=int, default=d.ew_max, help="maximum admissible edge weight")
    p.add_argument("--seed", type=int, default=d.seed, help="generator seed")
    p.add_argument("--out-graph", required=True, help="edge TSV to write")
    p.add_argument("--out-pairs", required=True, help="pair TSV to write")

    sub.add_parser("version", help="print the package version", formatter_class=fmt)
    return parser


def _feature_cfg(a) -> FeatureConfig:
    return FeatureConfig(max_hops=a.max_hops, oov_policy=a.oov_policy, include_endpoints=a.include_endpoints)


def _spec(a) -> ClassifierSpec:
    svm = SvmParams(C=a.C, epochs=a.epochs, batch_size=a.batch_size, seed=a.seed)
    forest = ForestParams(n_trees=a.n_trees, max_depth=getattr(a, "max_depth", None),
                          min_leaf=getattr(a, "min_leaf", 1),
                          features_per_split=getattr(a, "features_per_split", None),
                          bootstrap=not getattr(a, "no_bootstrap", False), seed=a.seed)
    return ClassifierSpec(getattr(a, "model", "svm"), getattr(a, "features", FEATURE_NAMES), svm, forest)


def _exp_cfg(a) -> ExperimentConfig:
    spec = _spec(a)
    return ExperimentConfig(features=_feature_cfg(a), folds=getattr(a, "folds", 10), seed=a.seed,
                            svm=spec.svm, forest=spec.forest,
                            n_per_class=getattr(a, "n_per_class", 1000), workers=a.workers,
                            graph_path=a.graph)


def _emit(a, text: str) -> None:
    if a.out:
        write_atomic(a.out, text)


def _dump(doc) -> str:
    return json.dumps(doc, indent=1, sort_keys=True) + "\n"


def cmd_features(a) -> None:
    g = load_graph(a.graph, ew_max=a.ew_max, top_k=a.top_k)
    with open(a.pairs, encoding="utf-8") as fh:
        pairs = []
        for line in fh:
            line = line.rstrip("\r\n")
            if not line.strip() or line.startswith("#"):
                continue
            cols = line.split("\t")
            if len(cols) < 2:
                raise ValueError(f"pair line needs two words: {line!r}")
            pairs.append((cols[0], cols[1]))
    text = write_features_tsv(batch_features(g, pairs, _feature_cfg(a), workers=a.workers))
    if a.out:
        write_atomic(a.out, text)
    else:
        sys.stdout.write(text)


def cmd_build_dataset(a) -> None:
    rows = parse_bless(a.bless)
    if a.rule == "weeds":
        ds = build_weeds_style(rows, a.seed)
    else:
        ds = build_binary_sample(rows, a.negative, a.n_per_class, a.seed)
    write_atomic(a.out, ds.to_tsv())
    print(f"{len(ds)} pairs {ds.class_counts()}")


def _load_xy(a):
    cfg = _exp_cfg(a)
    g = load_graph(a.graph, ew_max=a.ew_max, top_k=a.top_k)
    ds = parse_pairs(a.pairs, positive_label=a.positive)
    X, y, info = featurize(g, ds, cfg)
    echo = cfg.echo(g)
    echo["pairs"] = a.pairs
    echo["top_k"] = a.top_k
    return g, X, y, info, echo


def cmd_train(a) -> None:
    _, X, y, _, _ = _load_xy(a)
    model = fit_classifier(_spec(a), X, y, workers=a.workers)
    write_atomic(a.out, model.to_json())
    acc = float(np.mean(model.predict(X) == y))
    print(f"trained {model.spec.name} on {len(y)} pairs, training accuracy {acc:.4f}")


def cmd_cv(a) -> None:
    g, X, y, info, echo = _load_xy(a)
    spec = _spec(a)
    rep = cross_validate(X, y, spec, a.folds, a.seed, config=echo, dataset=info, workers=a.workers)
    sys.stdout.write(format_table({rep.name: rep}))
    _emit(a, rep.to_json())


def cmd_sweep(a) -> None:
    _, X, y, info, echo = _load_xy(a)
    ranking = feature_sweep(X, y, _spec(a), a.folds, a.seed, a.metric, workers=a.workers)
    for mask, score in ranking:
        print(f"{'+'.join(mask):<22} {score:.4f}")
    doc = {"schema": 1, "metric": a.metric, "config": dict(echo, classifier=_spec(a).to_dict(),
                                                           folds=a.folds, seed=a.seed),
           "dataset": info, "ranking": [{"features": list(m), "score": s} for m, s in ranking]}
    _emit(a, _dump(doc))


def cmd_experiment(a) -> None:
    cfg = _exp_cfg(a)
    g = load_graph(a.graph, ew_max=a.ew_max, top_k=a.top_k)
    if a.which == "exp3":
        if not a.bless:
            raise ValueError("exp3 needs --bless")
        reports = run_experiment_3(g, parse_bless(a.bless), cfg)
    elif a.pairs:
        ds = parse_pairs(a.pairs)
        reports = (run_experiment_1 if a.which == "exp1" else run_experiment_2)(g, ds, cfg)
    elif a.which == "exp1" and a.bless:
        reports = run_experiment_1(g, build_weeds_style(parse_bless(a.bless), a.seed), cfg)
    else:
        raise ValueError(f"{a.which} needs --pairs" + (" or --bless" if a.which == "exp1" else ""))
    sys.stdout.write(format_table(reports))
    doc = {"schema": 1, "experiment": a.which,
           "inputs": {"pairs": a.pairs, "bless": a.bless, "graph": a.graph},
           "reports": {k: r.to_dict() for k, r in reports.items()}}
    _emit(a, _dump(doc))


def cmd_synth(a) -> None:
    spec = SynthSpec(a.n_clusters, a.cluster_size, a.intra_p, a.intra_weights, a.hub_degree, a.hub_weights,
                     a.part_attach, a.part_links, a.part_weights, a.noise_p, a.noise_weights,
                     a.n_random, a.ew_max, a.seed)
    g, ds = generate(spec)
    header = "".join(f"# {k}={v}\n" for k, v in spec.to_dict().items())
    write_atomic(a.out_graph, header + g.to_tsv())
    write_atomic(a.out_pairs, ds.to_tsv())
    print(f"{g!r}; pairs {ds.class_counts()}")


COMMANDS = {
    "features": cmd_features, "build-dataset": cmd_build_dataset, "train": cmd_train, "cv": cmd_cv,
    "sweep": cmd_sweep, "experiment": cmd_experiment, "synth": cmd_synth,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "version":
        print(f"dtnet {__version__}")
        return 0
    try:
        COMMANDS[args.command](args)
    except (OSError, ValueError, KeyError) as e:
        msg = " ".join(str(e).split())
        print(f"dtnet: error: {type(e).__name__}: {msg}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
