"""Acceptance suite: one test per criterion, each reported as a PASS/FAIL line in the
terminal summary. Criteria 6 to 9 need the published corpus in $DISASTER_TWEETS_DATA
and fail with an explicit message when it is absent."""
import json
import math
import time
from pathlib import Path

import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import HealthCheck, given, settings, strategies as st

from disaster_tweets import cli
from disaster_tweets.analytics import proportions_by_disaster, sentiment_proportions
from disaster_tweets.corpus import split_indices
from disaster_tweets.evaluate import (benchmark, confusion, grid_search, load_default_grids,
                                      metrics, roc_curve)
from disaster_tweets.features import TfidfConfig
from disaster_tweets.models import (FAMILIES, fit_knn, fit_naive_bayes, logistic_objective,
                                    mlp_loss_and_grad)
from disaster_tweets.models.mlp import init_mlp
from disaster_tweets.models.base import TrainingSet
from disaster_tweets.pipeline import dataset_tokens, fit_pipeline
from disaster_tweets.synthetic import separable_corpus

from conftest import criterion, require_published
from oracles import (central_difference, dense_tfidf, knn_scores, mann_whitney_auc, nb_log_odds,
                     relative_error, tally, tally_metrics)

TYPE_SHARES = {"harvey_2017": 32, "wildfires_2018": 20, "blizzard_2016": 17, "floods_2013": 16,
               "tornado_2011": 15}
HURRICANE_SHARES = {"harvey_2017": 29, "dorian_2019": 27, "matthew_2016": 20, "michael_2018": 16,
                    "sandy_2012": 8}
TOTALS = {"types": 23237, "hurricanes": 26579, "all": 41993}
REFERENCE_MEAN_ACCURACY = {"NB": 0.96, "LR": 0.87, "DT": 0.79, "SVM": 0.86,
                           "KNN": 0.82, "RF": 0.87, "AdaBoost": 0.86, "MNN": 0.80}
REFERENCE_MEAN_AUC = {"NB": 0.92, "LR": 0.88, "DT": 0.77, "SVM": 0.88,
                      "KNN": 0.79, "RF": 0.87, "AdaBoost": 0.83, "MNN": 0.82}
SEED = 2021


@pytest.fixture(scope="module")
def published(published_or_none):
    return published_or_none


def default_family_configs():
    """Fit defaults plus single-valued default-grid entries, as the command line resolves them."""
    cfg = cli.build_config({"seed": SEED, "layout": "synthetic"}, environ={})
    return {fam: cfg.family_config(fam) for fam in FAMILIES}


def test_criterion_01_metric_oracles():
    with criterion(1, "confusion/metrics exact and AUC within 1e-9 of pair counting, 1000 cases, < 10 s") as c:
        rng = np.random.default_rng(101)
        t0 = time.perf_counter()
        worst = 0.0
        for _ in range(1000):
            n = int(rng.integers(2, 201))
            truth = rng.integers(0, 2, n)
            truth[:2] = (0, 1)
            pred = rng.integers(0, 2, n)
            cm = confusion(pred, truth)
            assert (cm.tp, cm.tn, cm.fp, cm.fn) == tally(pred, truth)
            row = metrics(cm).row()
            for key, want in tally_metrics(pred, truth).items():
                assert row[key] == want, key
            scores = np.round(rng.normal(size=n), int(rng.integers(0, 3)))
            worst = max(worst, abs(roc_curve(scores, truth).auc - mann_whitney_auc(scores, truth)))
        elapsed = time.perf_counter() - t0
        c.note(f"max |AUC - pair count| = {worst:.2e}; {elapsed:.2f} s")
        assert worst <= 1e-9
        assert elapsed < 10


_docs = st.lists(st.lists(st.sampled_from([f"t{i}" for i in range(20)]), min_size=0, max_size=8),
                 min_size=1, max_size=10).filter(lambda ds: any(ds))


def test_criterion_02_tfidf_fidelity():
    with criterion(2, "sparse tf-idf equals dense oracle within 1e-12 (<= 10 docs, <= 20 terms)") as c:
        checked = {"n": 0, "negative": 0}

        @settings(max_examples=500, deadline=None, suppress_health_check=[HealthCheck.too_slow])
        @given(_docs, st.sampled_from([(1, 1), (1, 2)]))
        def check(docs, ngram):
            terms, dense = dense_tfidf(docs, *ngram)
            cfg = TfidfConfig(ngram_range=ngram)
            vocab = cfg.fit(docs)
            if len(vocab) > 20:
                return
            assert list(vocab.terms) == terms
            got = cfg.transform(docs, vocab).toarray()
            np.testing.assert_allclose(got, dense, rtol=0, atol=1e-12)
            checked["n"] += 1
            checked["negative"] += int((dense < 0).any())

        check()
        # the regime where a term occurs in every document
        docs = [["a", "b"], ["a"], ["a", "c", "c"]]
        terms, dense = dense_tfidf(docs)
        got = TfidfConfig().transform(docs, TfidfConfig().fit(docs)).toarray()
        np.testing.assert_allclose(got, dense, rtol=0, atol=1e-12)
        assert dense[0, terms.index("a")] == pytest.approx(math.log(3 / 4))
        c.note(f"{checked['n']} random corpora, {checked['negative']} with negative weights")
        assert checked["negative"] > 0


def test_criterion_03_gradient_checks():
    with criterion(3, "LR and MLP gradients match central differences (< 1e-4) at 10 points, < 5 s") as c:
        rng = np.random.default_rng(303)
        t0 = time.perf_counter()
        X = sp.csr_matrix(rng.normal(size=(15, 6)) * (rng.random((15, 6)) < 0.5))
        y = rng.integers(0, 2, 15).astype(float)
        worst = 0.0
        for _ in range(10):
            w, b = rng.normal(size=6), float(rng.normal())
            _, gw, gb = logistic_objective(w, b, X, y, c=0.5)
            f = lambda v: logistic_objective(v[:-1], v[-1], X, y, c=0.5)[0]  # noqa: E731
            worst = max(worst, relative_error(np.append(gw, gb), central_difference(f, np.append(w, b))))
        Xm = sp.csr_matrix(rng.normal(size=(5, 6)))
        ym = np.array([0, 1, 1, 0, 1], dtype=float)
        for i in range(10):
            p = init_mlp(6, 4, np.random.default_rng(i))
            p["b1"] = rng.normal(size=4) * 0.1
            p["b2"] = float(rng.normal())
            _, g = mlp_loss_and_grad(p, Xm, ym)
            names = ("W1", "b1", "w2", "b2")
            flat = np.concatenate([np.ravel(p[k]) for k in names])
            shapes = [np.shape(p[k]) for k in names]

            def loss(v):
                q, pos = {}, 0
                for k, shp in zip(names, shapes):
                    size = int(np.prod(shp)) if shp else 1
                    q[k] = v[pos:pos + size].reshape(shp) if shp else float(v[pos])
                    pos += size
                return mlp_loss_and_grad(q, Xm, ym)[0]

            analytic = np.concatenate([np.ravel(g[k]) for k in names])
            worst = max(worst, relative_error(analytic, central_difference(loss, flat)))
        elapsed = time.perf_counter() - t0
        c.note(f"max relative error {worst:.2e}; {elapsed:.2f} s")
        assert worst < 1e-4
        assert elapsed < 5


def test_criterion_04_classifier_oracles():
    with criterion(4, "NB and KNN predictions equal brute-force oracles on 20 corpora (n <= 50, V <= 20)"):
        rng = np.random.default_rng(404)
        for _ in range(20):
            n, v = int(rng.integers(4, 51)), int(rng.integers(2, 21))
            X = rng.poisson(0.8, size=(n, v)).astype(float)
            y = rng.integers(0, 2, n)
            y[:2] = (0, 1)
            Q = np.vstack([X, rng.poisson(0.8, size=(10, v)).astype(float)])
            ts = TrainingSet(sp.csr_matrix(X), y, v)
            alpha = float(rng.choice([0.5, 1.0]))
            nb_ref = np.array([nb_log_odds(X, y, alpha, q) > 0 for q in Q], dtype=int)
            np.testing.assert_array_equal(fit_naive_bayes(ts, alpha).predict_many(Q), nb_ref)
            k = int(rng.integers(1, min(n, 9) + 1))
            knn_ref = (knn_scores(X, y, Q, k) > 0.5).astype(int)
            np.testing.assert_array_equal(fit_knn(ts, k).predict_many(Q), knn_ref)


def test_criterion_05_separability():
    with criterion(5, "all eight families >= 0.99 test accuracy on the 200-doc disjoint corpus, < 60 s") as c:
        t0 = time.perf_counter()
        ds = separable_corpus(200, seed=0)
        docs, y = dataset_tokens(ds), ds.labels()
        tr, te = split_indices(y.tolist(), 0.30, 0)
        train_docs, test_docs = [docs[i] for i in tr], [docs[i] for i in te]
        grids = load_default_grids()
        accs = {}
        for fam in FAMILIES:
            g = grid_search(fam, grids[fam], (train_docs, y[tr]), k=5, seed=0)
            fitted = fit_pipeline(fam, g.best_config, train_docs, y[tr], seed=0)
            accs[fam] = float(np.mean(fitted.predict(test_docs) == y[te]))
        elapsed = time.perf_counter() - t0
        c.note(" ".join(f"{f}={a:.3f}" for f, a in accs.items()) + f"; {elapsed:.1f} s")
        below = {f: a for f, a in accs.items() if a < 0.99}
        assert not below, f"below 0.99: {below}"
        assert elapsed < 60


def test_criterion_06_analytics_reproduction(published, registry):
    with criterion(6, "group shares within 1 pt and corpus totals exact, < 30 s") as c:
        published = require_published(published)
        t0 = time.perf_counter()
        problems = []
        for name, ref in (("types", TYPE_SHARES), ("hurricanes", HURRICANE_SHARES)):
            ids = registry.groups[name]
            table = proportions_by_disaster([published[d] for d in ids])
            c.note(f"{name}: total {table.total} " +
                   " ".join(f"{d.split('_')[0]}={100 * table.share(d):.1f}%" for d in ids))
            if table.total != TOTALS[name]:
                problems.append(f"{name} total {table.total} != {TOTALS[name]}")
            for d, pct in ref.items():
                if abs(100 * table.share(d) - pct) > 1.0:
                    problems.append(f"{d} {100 * table.share(d):.1f}% vs {pct}%")
        total = sum(len(ds) for ds in published.values())
        if total != TOTALS["all"]:
            problems.append(f"all total {total} != {TOTALS['all']}")
        assert time.perf_counter() - t0 < 30
        assert not problems, "; ".join(problems)


def test_criterion_07_negative_majority(published):
    with criterion(7, "negative share exceeds positive share in all nine corpora") as c:
        published = require_published(published)
        bad = []
        for d, ds in published.items():
            t = sentiment_proportions(ds)
            c.note(f"{d}: negative {t.share(1):.3f}")
            if not t.count(1) > t.count(0):
                bad.append(d)
        assert not bad, f"not negative-majority: {bad}"


@pytest.fixture(scope="module")
def published_benchmark(published_or_none):
    """Default-config benchmark of every family plus the majority baseline on each corpus."""
    if published_or_none is None:
        return None
    configs = default_family_configs()
    return {d: benchmark(list(FAMILIES) + ["majority"], ds, 0.30, SEED, configs, repeats=3)
            for d, ds in published_or_none.items()}


def test_criterion_08_model_comparison(published_benchmark):
    with criterion(8, "every family beats the majority baseline on every corpus (NB mean and AUC reported)") as c:
        results = require_published(published_benchmark)
        losers = []
        acc = {f: [] for f in FAMILIES}
        auc = {f: [] for f in FAMILIES}
        for d, recs in results.items():
            base = next(r.accuracy for r in recs if r.family == "majority")
            for r in recs:
                if r.family == "majority":
                    continue
                acc[r.family].append(r.accuracy)
                auc[r.family].append(r.auc)
                if not r.accuracy > base:
                    losers.append(f"{d}/{r.family} {r.accuracy:.3f} <= {base:.3f}")
        nb_mean = float(np.mean(acc["NB"]))
        verdict = "within" if abs(nb_mean - REFERENCE_MEAN_ACCURACY["NB"]) <= 0.10 else "OUTSIDE"
        c.note(f"NB mean accuracy {nb_mean:.3f} vs reference {REFERENCE_MEAN_ACCURACY['NB']:.2f} "
               f"({verdict} +-0.10; reported, not enforced)")
        c.note("mean AUC " + " ".join(f"{f}={np.mean(auc[f]):.3f}(ref {REFERENCE_MEAN_AUC[f]:.2f})"
                                      for f in FAMILIES))
        assert not losers, "; ".join(losers[:5])


def test_criterion_09_timing_order(published_benchmark):
    with criterion(9, "KNN total wall time >= 10x NB total on the full corpus") as c:
        results = require_published(published_benchmark)
        total = {f: sum(r.total_seconds for recs in results.values() for r in recs if r.family == f)
                 for f in ("NB", "KNN")}
        ratio = total["KNN"] / total["NB"]
        c.note(f"NB {total['NB']:.2f} s, KNN {total['KNN']:.2f} s, ratio {ratio:.1f}")
        assert ratio >= 10


def test_criterion_10_determinism(tmp_path):
    with criterion(10, "two full runs with the same config and seed give byte-identical reports") as c:
        cfg = tmp_path / "config.json"
        cfg.write_text(json.dumps({"seed": SEED, "layout": "synthetic", "synthetic_size": 120,
                                   "benchmark": {"repeats": 1}}))
        roots = []
        for name in ("run1", "run2"):
            out = tmp_path / name
            assert cli.main(["all", "--config", str(cfg), "--out", str(out)]) == 0
            roots.append(out)
        listing = lambda root: sorted(p.relative_to(root) for p in root.rglob("*") if p.is_file())  # noqa: E731
        assert listing(roots[0]) == listing(roots[1])
        compared = [p for p in listing(roots[0]) if p != Path("timings.csv")]
        differing = [str(p) for p in compared
                     if (roots[0] / p).read_bytes() != (roots[1] / p).read_bytes()]
        c.note(f"{len(compared)} files compared (timings.csv excluded)")
        assert not differing, differing
