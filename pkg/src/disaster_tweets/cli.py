"""Command-line entry point: ingest, train, gridsearch, benchmark, report, all.

Settings come from a JSON (or TOML on Python 3.11+) config file, then
``DTWEETS_*`` environment variables, then command-line flags, later sources
winning. Exit codes: 0 success, 1 usage or config error, 2 data error,
3 numerical failure.
"""
from __future__ import annotations

import argparse
import copy
import json
import logging
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Sequence

from . import reports
from ._random import child_seed
from .corpus import (CorpusError, Dataset, Registry, dumps_dataset, find_published_files,
                     load_dataset, load_published, load_registry, split_indices)
from .evaluate import (HyperGrid, benchmark, confusion, grid_search, load_default_grids, metrics,
                       roc_curve)
from .models import FAMILIES, IncompatibleFeaturesError, NumericalError, canonical_family
from .models.serialize import save_model
from .pipeline import PreprocessOptions, dataset_tokens, fit_pipeline
from .preprocess import StopList
from .synthetic import disaster_corpus

log = logging.getLogger("disaster_tweets")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERICAL = 0, 1, 2, 3
ENV_PREFIX = "DTWEETS_"

DEFAULTS: dict[str, Any] = {
    "seed": None,
    "registry": None,
    "data_dir": None,
    "layout": "canonical",
    "synthetic_size": 400,
    "disasters": "all",
    "families": "all",
    "preprocess": {"stoplist": None, "stemming": True},
    "features": {"ngram_range": [1, 1], "min_df": 1, "idf": "paper", "sublinear_tf": False,
                 "norm": None},
    "models": {},
    "split": {"train_fraction": 0.30, "stratify": False},
    "cv": {"k": 5, "metric": "acc", "n_jobs": 1},
    "grids": "default",
    "benchmark": {"repeats": 3, "include_vectorize": False},
    "plots": False,
    "out": "runs/out",
}
LAYOUTS = ("canonical", "published", "synthetic")


class ConfigError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _merge(base: dict, over: dict) -> dict:
    out = copy.deepcopy(base)
    for k, v in over.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = v
    return out


def read_config_file(path: str | Path) -> dict:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    if path.suffix == ".toml":
        try:
            import tomllib
        except ImportError as exc:
            raise ConfigError("TOML configs need Python 3.11+; use JSON") from exc
        return tomllib.loads(path.read_text("utf-8"))
    try:
        return json.loads(path.read_text("utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from exc


def _env_overrides(environ) -> dict:
    out: dict[str, Any] = {}
    get = lambda name: environ.get(ENV_PREFIX + name)  # noqa: E731
    if get("SEED"):
        out["seed"] = get("SEED")
    if get("DISASTER"):
        out["disasters"] = get("DISASTER")
    if get("FAMILY"):
        out["families"] = get("FAMILY")
    if get("OUT"):
        out["out"] = get("OUT")
    if get("DATA_DIR"):
        out["data_dir"] = get("DATA_DIR")
    if get("LAYOUT"):
        out["layout"] = get("LAYOUT")
    if get("PLOTS"):
        out["plots"] = get("PLOTS").lower() in ("1", "true", "yes")
    if get("INCLUDE_VECTORIZE_TIME"):
        out["benchmark"] = {"include_vectorize":
                            get("INCLUDE_VECTORIZE_TIME").lower() in ("1", "true", "yes")}
    return out


@dataclass
class RunConfig:
    seed: int
    registry: Registry
    data_dir: Path | None
    layout: str
    synthetic_size: int
    disasters: list[str]
    families: list[str]
    preprocess: PreprocessOptions
    features: dict[str, Any]
    models: dict[str, dict]
    train_fraction: float
    stratify: bool
    k: int
    metric: str
    n_jobs: int
    grids: dict[str, HyperGrid]
    repeats: int
    include_vectorize: bool
    plots: bool
    out: Path
    raw: dict = field(default_factory=dict, repr=False)

    def family_config(self, family: str) -> dict[str, Any]:
        """Shared feature settings, then single-valued grid entries, then explicit model settings."""
        cfg = dict(self.features)
        grid = self.grids.get(family)
        if grid is not None:
            cfg.update({k: v[0] for k, v in grid.params.items() if len(v) == 1})
        cfg.update(self.models.get(family, {}))
        return cfg

    def family_grid(self, family: str) -> HyperGrid:
        grid = self.grids.get(family)
        base = dict(self.features)
        base.update(self.models.get(family, {}))
        params = {k: (v,) for k, v in base.items()}
        if grid is not None:
            params.update(grid.params)
        return HyperGrid(params)


def build_config(file_cfg: dict, args: argparse.Namespace | None = None,
                 environ=None) -> RunConfig:
    raw = _merge(DEFAULTS, file_cfg)
    raw = _merge(raw, _env_overrides(os.environ if environ is None else environ))
    if args is not None:
        flags = {"seed": args.seed, "disasters": args.disaster, "families": args.family,
                 "out": args.out, "data_dir": getattr(args, "data_dir", None)}
        raw = _merge(raw, {k: v for k, v in flags.items() if v is not None})
        if args.plots:
            raw["plots"] = True
        if args.include_vectorize_time:
            raw["benchmark"]["include_vectorize"] = True

    if raw["seed"] is None:
        raise ConfigError("a seed is required (config 'seed', --seed or DTWEETS_SEED)")
    try:
        seed = int(raw["seed"])
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"seed must be an integer, got {raw['seed']!r}") from exc
    try:
        registry = load_registry(raw["registry"])
    except FileNotFoundError as exc:
        raise ConfigError(f"registry not found: {raw['registry']}") from exc
    layout = raw["layout"]
    if layout not in LAYOUTS:
        raise ConfigError(f"layout must be one of {LAYOUTS}, got {layout!r}")
    data_dir = Path(raw["data_dir"]) if raw["data_dir"] else None
    if layout != "synthetic":
        if data_dir is None:
            raise ConfigError("data_dir is required unless layout is 'synthetic'")
        if not data_dir.is_dir():
            raise ConfigError(f"data directory not found: {data_dir}")

    disasters = raw["disasters"]
    if isinstance(disasters, str):
        disasters = registry.ids() if disasters == "all" else [d.strip() for d in disasters.split(",")]
    for d in disasters:
        if d not in registry.disasters:
            raise ConfigError(f"unknown disaster {d!r}; known: {', '.join(registry.ids())}")
    families = raw["families"]
    if isinstance(families, str):
        families = list(FAMILIES) if families == "all" else families.split(",")
    try:
        families = [canonical_family(f.strip()) for f in families]
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    stop = None
    if raw["preprocess"].get("stoplist"):
        p = Path(raw["preprocess"]["stoplist"])
        if not p.exists():
            raise ConfigError(f"stop list not found: {p}")
        stop = StopList.from_file(p)
    try:
        grids = load_default_grids() if raw["grids"] == "default" else (
            {canonical_family(f): HyperGrid(g) for f, g in raw["grids"].items()}
            if isinstance(raw["grids"], dict) else load_default_grids(raw["grids"]))
    except (ValueError, FileNotFoundError) as exc:
        raise ConfigError(f"bad grid definition: {exc}") from exc
    models = {canonical_family(f): dict(v) for f, v in raw["models"].items()}
    return RunConfig(
        seed=seed, registry=registry, data_dir=data_dir, layout=layout,
        synthetic_size=int(raw["synthetic_size"]), disasters=list(disasters), families=families,
        preprocess=PreprocessOptions(stop, bool(raw["preprocess"].get("stemming", True))),
        features=dict(raw["features"]), models=models,
        train_fraction=float(raw["split"]["train_fraction"]),
        stratify=bool(raw["split"].get("stratify", False)),
        k=int(raw["cv"]["k"]), metric=raw["cv"].get("metric", "acc"),
        n_jobs=int(raw["cv"].get("n_jobs", 1)), grids=grids,
        repeats=int(raw["benchmark"]["repeats"]),
        include_vectorize=bool(raw["benchmark"]["include_vectorize"]),
        plots=bool(raw["plots"]), out=Path(raw["out"]), raw=raw)


# --- data ----------------------------------------------------------------------

def load_corpora(cfg: RunConfig) -> dict[str, Dataset]:
    """Load the configured disasters in registry order."""
    out = {}
    if cfg.layout == "synthetic":
        for d in cfg.disasters:
            out[d] = disaster_corpus(cfg.registry[d], cfg.synthetic_size, child_seed(cfg.seed, "data"))
    elif cfg.layout == "published":
        files = find_published_files(cfg.data_dir, cfg.registry)
        for d in cfg.disasters:
            if d not in files:
                raise FileNotFoundError(f"no published file for {d} in {cfg.data_dir}")
            out[d] = load_published(files[d], cfg.registry[d])
    else:
        for d in cfg.disasters:
            out[d] = load_dataset(cfg.data_dir / f"{d}.csv", cfg.registry[d])
    for d, ds in out.items():
        log.info("loaded %s: %d tweets (%s layout)", d, len(ds), cfg.layout)
    return out


# --- commands --------------------------------------------------------------------

def cmd_ingest(cfg: RunConfig) -> dict:
    corpora = load_corpora(cfg)
    data_out = cfg.out / "data"
    rows = []
    for d, ds in corpora.items():
        reports.write_text(data_out / f"{d}.csv", dumps_dataset(ds))
        rep = ds.report
        rows.append({"disaster_id": d, "n_rows": rep.n_rows if rep else len(ds),
                     "n_loaded": len(ds), "rejected": len(rep.rejected) if rep else 0,
                     "bad_label": rep.bad_label if rep else 0,
                     "no_timestamp": sum(t.timestamp is None for t in ds.tweets),
                     "unknown_need": sum(t.need_category is None for t in ds.tweets)})
        print(f"{d}: {len(ds)} tweets")
    total = sum(r["n_loaded"] for r in rows)
    print(f"total: {total} tweets")
    reports.write_csv(cfg.out / "ingest_report.csv", list(rows[0]) if rows else ["disaster_id"], rows)
    return {"total": total, "per_disaster": {r["disaster_id"]: r["n_loaded"] for r in rows}}


def _split_docs(cfg: RunConfig, ds: Dataset):
    docs = dataset_tokens(ds, cfg.preprocess)
    y = ds.labels()
    tr, te = split_indices(y.tolist(), cfg.train_fraction, cfg.seed, cfg.stratify)
    return docs, y, tr, te


def tuned_configs(cfg: RunConfig) -> dict[str, dict]:
    """Winning configs from an earlier gridsearch in the same output directory, if any."""
    path = cfg.out / "grid" / "best.json"
    if not path.exists():
        return {}
    return {stem: entry["config"] for stem, entry in json.loads(path.read_text("utf-8")).items()}


def cmd_train(cfg: RunConfig) -> list[dict]:
    corpora = load_corpora(cfg)
    tuned = tuned_configs(cfg)
    rows, roc_all = [], {}
    for d, ds in corpora.items():
        docs, y, tr, te = _split_docs(cfg, ds)
        curves = {}
        for fam in cfg.families:
            config = tuned.get(f"{d}_{fam}", cfg.family_config(fam))
            fitted = fit_pipeline(fam, config, [docs[i] for i in tr], y[tr],
                                  child_seed(cfg.seed, "train", d, fam))
            stem = f"{d}_{fam}"
            save_model(fitted.model, cfg.out / "models" / f"{stem}.json", fitted.vocab.fingerprint)
            fitted.vocab.save(cfg.out / "models" / f"{stem}.vocab.tsv")
            for part, idx in (("train", tr), ("test", te)):
                part_docs = [docs[i] for i in idx]
                rep = metrics(confusion(fitted.predict(part_docs), y[idx]))
                rows.append(reports.metrics_row(rep, disaster_id=d, family=fam, split=part))
            scores = fitted.scores([docs[i] for i in te])
            curve = roc_curve(scores, y[te])
            curves[fam] = curve
            reports.write_roc(cfg.out / "roc" / f"roc_{stem}.csv", curve)
            print(f"{d} {fam}: test acc {rows[-1]['acc']:.4f} auc {curve.auc:.4f}")
        roc_all[d] = {f: c.auc for f, c in curves.items()}
        if cfg.plots:
            reports.plot_roc(curves, cfg.out / "roc" / f"roc_{d}.svg")
    reports.write_csv(cfg.out / "metrics.csv", ("disaster_id", "family", "split") + reports.METRIC_KEYS,
                      rows)
    reports.write_csv(cfg.out / "auc.csv", ("disaster_id",) + tuple(cfg.families),
                      [{"disaster_id": d, **aucs} for d, aucs in roc_all.items()])
    return rows


def cmd_gridsearch(cfg: RunConfig) -> dict:
    corpora = load_corpora(cfg)
    best = {}
    for d, ds in corpora.items():
        docs, y, tr, te = _split_docs(cfg, ds)
        train_docs = [docs[i] for i in tr]
        for fam in cfg.families:
            grid = cfg.family_grid(fam)
            result = grid_search(fam, grid, (train_docs, y[tr]), cfg.k,
                                 child_seed(cfg.seed, "grid", d), n_jobs=cfg.n_jobs,
                                 metric=cfg.metric)
            stem = f"{d}_{fam}"
            reports.write_grid_table(cfg.out / "grid" / f"grid_{stem}.csv", result)
            fitted = fit_pipeline(fam, result.best_config, train_docs, y[tr],
                                  child_seed(cfg.seed, "train", d, fam))
            test_docs = [docs[i] for i in te]
            rep = metrics(confusion(fitted.predict(test_docs), y[te]))
            auc = roc_curve(fitted.scores(test_docs), y[te]).auc
            best[stem] = {"disaster_id": d, "family": fam, "config": result.best_config,
                          "cv_mean": result.best.mean_accuracy, "n_fits": result.n_fits,
                          "test": rep.row(), "test_auc": auc}
            print(f"{d} {fam}: best {json.dumps(result.best_config, sort_keys=True)} "
                  f"cv {result.best.mean_accuracy:.4f} test {rep.acc:.4f}")
    reports.write_json(cfg.out / "grid" / "best.json", best)
    reports.write_csv(cfg.out / "grid" / "summary.csv",
                      ("disaster_id", "family", "config", "cv_mean", "test_acc", "test_auc"),
                      [{"disaster_id": b["disaster_id"], "family": b["family"],
                        "config": json.dumps(b["config"], sort_keys=True), "cv_mean": b["cv_mean"],
                        "test_acc": b["test"]["acc"], "test_auc": b["test_auc"]}
                       for b in best.values()])
    return best


def cmd_benchmark(cfg: RunConfig) -> list:
    corpora = load_corpora(cfg)
    tuned = tuned_configs(cfg)
    records = []
    for d, ds in corpora.items():
        configs = {fam: tuned.get(f"{d}_{fam}", cfg.family_config(fam)) for fam in cfg.families}
        records.extend(benchmark(cfg.families, ds, cfg.train_fraction, cfg.seed, configs,
                                 cfg.repeats, cfg.include_vectorize, cfg.preprocess))
    reports.write_benchmark(cfg.out, records, cfg.plots)
    for r in records:
        print(f"{r.disaster_id} {r.family}: acc {r.accuracy:.4f} "
              f"fit {r.fit_seconds:.3f}s predict {r.predict_seconds:.3f}s")
    return records


def cmd_report(cfg: RunConfig) -> dict:
    corpora = load_corpora(cfg)
    summary = reports.write_analytics_bundle(corpora, cfg.registry, cfg.out, cfg.plots)
    for group, s in summary.items():
        print(f"{group}: {len(s['files'])} files")
    return summary


def cmd_all(cfg: RunConfig) -> None:
    cmd_ingest(cfg)
    cmd_report(cfg)
    cmd_gridsearch(cfg)
    cmd_train(cfg)
    cmd_benchmark(cfg)


COMMANDS = {"ingest": cmd_ingest, "train": cmd_train, "gridsearch": cmd_gridsearch,
            "benchmark": cmd_benchmark, "report": cmd_report, "all": cmd_all}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON/TOML run configuration")
    common.add_argument("--seed", type=int)
    common.add_argument("--disaster", help="disaster id, comma list or 'all'")
    common.add_argument("--family", help="model family, comma list or 'all'")
    common.add_argument("--out", help="output directory")
    common.add_argument("--data-dir", help="directory holding the corpus files")
    common.add_argument("--plots", action="store_true", help="also write SVG charts")
    common.add_argument("--include-vectorize-time", action="store_true",
                        help="count tf-idf vectorization in benchmark timings")
    common.add_argument("-v", "--verbose", action="store_true")
    parser = _Parser(prog="disaster-tweets", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        file_cfg = read_config_file(args.config) if args.config else {}
        cfg = build_config(file_cfg, args)
        COMMANDS[args.command](cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (FileNotFoundError, CorpusError, IncompatibleFeaturesError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
