import datetime as dt
import math
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from disaster_tweets.corpus import (CANONICAL_HEADER, CorpusError, DisasterSpec, Tweet,
                                    dumps_dataset, find_published_files, infer_need,
                                    load_dataset, load_published, parse_loose_timestamp,
                                    split_indices, split_train_test, stratified_fold_indices,
                                    stratified_kfold, write_dataset)

from conftest import make_dataset

HEADER = ",".join(CANONICAL_HEADER)


def _write(tmp_path, body, name="c.csv"):
    p = tmp_path / name
    p.write_bytes(body.encode("utf-8"))
    return p


class TestRegistry:
    def test_nine_disasters(self, registry):
        assert len(registry) == 9
        assert {s.disaster_type for s in registry} == {"tornado", "hurricane", "flood",
                                                        "blizzard", "wildfire"}

    def test_windows_extend_durations_by_about_a_week(self, registry):
        for s in registry:
            before = (s.duration_start - s.window_start).days
            after = (s.window_end - s.duration_end).days
            assert 5 <= before <= 9 and 5 <= after <= 9, s.disaster_id

    def test_keywords_cover_four_needs(self, registry):
        for s in registry:
            assert len(s.keywords) == 4
            assert s.keywords[-1].endswith("medical supplies")

    def test_groups(self, registry):
        assert len(registry.groups["types"]) == 5
        assert len(registry.groups["hurricanes"]) == 5
        assert "harvey_2017" in registry.groups["types"]
        assert "harvey_2017" in registry.groups["hurricanes"]

    def test_spec_rejects_window_inside_duration(self):
        d = dt.date(2020, 1, 10)
        with pytest.raises(ValueError):
            DisasterSpec("x", "X", "flood", d, d, d + dt.timedelta(days=1), d, ())


class TestTweet:
    def test_label_domain(self):
        with pytest.raises(ValueError):
            Tweet("1", "text", None, "x", "food", 2)

    def test_empty_text(self):
        with pytest.raises(ValueError):
            Tweet("1", "   ", None, "x", "food", 0)

    def test_need_domain(self):
        with pytest.raises(ValueError):
            Tweet("1", "text", None, "x", "water", 0)


class TestLoadDataset:
    def test_three_rows_in_file_order(self, tmp_path, tornado):
        body = (f"{HEADER}\n"
                'a,"first",2011-04-26T10:00:00Z,tornado_2011,food,0\n'
                'b,"second, with comma",2011-04-27T10:00:00Z,tornado_2011,housing,1\n'
                'c,"third ""quoted""",,tornado_2011,transportation,\n')
        ds = load_dataset(_write(tmp_path, body), tornado)
        assert [t.id for t in ds] == ["a", "b", "c"]
        assert ds[1].text == "second, with comma"
        assert ds[2].text == 'third "quoted"'
        assert ds[2].timestamp is None and ds[2].label is None
        assert ds.report.bad_timestamp == 1

    def test_bad_label_rejected_and_counted(self, tmp_path, tornado):
        body = (f"{HEADER}\n"
                'a,"ok",2011-04-26T10:00:00Z,tornado_2011,food,0\n'
                'b,"bad",2011-04-26T10:00:00Z,tornado_2011,food,2\n')
        ds = load_dataset(_write(tmp_path, body), tornado)
        assert len(ds) == 1
        assert ds.report.bad_label == 1
        assert ds.report.rejected[0][0] == 3

    def test_unparseable_timestamp_kept(self, tmp_path, tornado):
        body = f'{HEADER}\na,"x",yesterday,tornado_2011,food,1\n'
        ds = load_dataset(_write(tmp_path, body), tornado)
        assert len(ds) == 1 and ds[0].timestamp is None
        assert ds.report.bad_timestamp == 1

    def test_missing_file(self, tmp_path, tornado):
        with pytest.raises(FileNotFoundError, match="nope.csv"):
            load_dataset(tmp_path / "nope.csv", tornado)

    def test_empty_file(self, tmp_path, tornado):
        with pytest.raises(CorpusError, match="empty"):
            load_dataset(_write(tmp_path, ""), tornado)

    def test_malformed_header(self, tmp_path, tornado):
        with pytest.raises(CorpusError, match="header"):
            load_dataset(_write(tmp_path, "id,text,label\n1,x,0\n"), tornado)

    def test_header_normalization(self, tmp_path, tornado):
        body = "﻿ID, Text,timestamp,disaster_id,need_category,LABEL\na,\"x\",,tornado_2011,food,0\n"
        assert len(load_dataset(_write(tmp_path, body), tornado)) == 1

    def test_outside_window_flagged(self, tmp_path, tornado):
        body = f'{HEADER}\na,"x",2012-01-01T00:00:00Z,tornado_2011,food,0\n'
        ds = load_dataset(_write(tmp_path, body), tornado)
        assert ds.outside_window() == [True]
        assert ds.report.outside_window == 1

    def test_round_trip(self, tmp_path, tornado):
        body = (f"{HEADER}\n"
                '"a","multi\nline, text",2011-04-26T10:00:00Z,tornado_2011,food,0\n'
                '"b","plain",,tornado_2011,,1\n')
        ds = load_dataset(_write(tmp_path, body), tornado)
        out = tmp_path / "out.csv"
        write_dataset(ds, out)
        again = load_dataset(out, tornado)
        assert again.tweets == ds.tweets
        assert out.read_text("utf-8") == dumps_dataset(again)


text_st = st.text(st.characters(blacklist_categories=("Cs",), blacklist_characters="\r\x00"),
                  min_size=1, max_size=40).filter(lambda s: s.strip())


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(text_st, st.sampled_from([0, 1, None]),
                          st.sampled_from(["food", "housing", None])), min_size=1, max_size=8))
def test_canonical_round_trip_property(tmp_path_factory, rows):
    spec = DisasterSpec("p", "P", "flood", dt.date(2020, 1, 8), dt.date(2020, 1, 9),
                        dt.date(2020, 1, 1), dt.date(2020, 1, 16), ())
    tweets = tuple(Tweet(str(i), t, None, "p", n, y) for i, (t, y, n) in enumerate(rows))
    from disaster_tweets.corpus import Dataset
    ds = Dataset(spec, tweets)
    path = tmp_path_factory.mktemp("rt") / "x.csv"
    write_dataset(ds, path)
    assert load_dataset(path, spec).tweets == tweets


class TestPublishedAdapter:
    def test_loose_timestamps(self):
        assert parse_loose_timestamp("2017-08-26 13:45:00") == dt.datetime(
            2017, 8, 26, 13, 45, tzinfo=dt.timezone.utc)
        assert parse_loose_timestamp("Sat Aug 26 13:45:00 +0200 2017") == dt.datetime(
            2017, 8, 26, 11, 45, tzinfo=dt.timezone.utc)
        assert parse_loose_timestamp("garbage") is None

    def test_infer_need(self):
        assert infer_need("Need food and shelter now") == "food"
        assert infer_need("no transportation to the clinic") == "transportation"
        assert infer_need("medical supplies running out") == "medical_supplies"
        assert infer_need("just a storm") is None

    def test_fake_layout(self, tmp_path, registry):
        d = tmp_path / "published"
        d.mkdir()
        (d / "Hurricane_Harvey_2017.csv").write_text(
            "Date,Tweet,Sentiment\n"
            "2017-08-26 10:00:00,Harvey food bank closed,negative\n"
            "2017-08-27 10:00:00,Thanks for the housing help,positive\n"
            "bad date,Harvey transportation stuck,1\n"
            "2017-08-28 10:00:00,weird label,maybe\n"
            "2017-08-28 10:00:00,no keyword here,0\n", encoding="utf-8")
        files = find_published_files(d, registry)
        assert list(files) == ["harvey_2017"]
        ds = load_published(files["harvey_2017"], registry["harvey_2017"])
        assert [t.label for t in ds] == [1, 0, 1, 0]
        assert [t.need_category for t in ds] == ["food", "housing", "transportation", None]
        assert ds.report.bad_label == 1
        assert ds.report.bad_timestamp == 1
        assert ds.report.unknown_need == 1


class TestSplit:
    def test_sizes(self, tornado):
        ds = make_dataset(tornado, [0, 1] * 5)
        train, test = split_train_test(ds, 0.3, seed=7)
        assert len(train) == 3 and len(test) == 7
        assert sorted(t.id for t in train.tweets + test.tweets) == sorted(t.id for t in ds)

    def test_deterministic(self, tornado):
        ds = make_dataset(tornado, [0, 1] * 20)
        a = split_train_test(ds, 0.3, seed=11)
        b = split_train_test(ds, 0.3, seed=11)
        assert dumps_dataset(a[0]) == dumps_dataset(b[0])
        assert dumps_dataset(a[1]) == dumps_dataset(b[1])

    def test_single_class_rejected(self, tornado):
        with pytest.raises(ValueError, match="both classes"):
            split_train_test(make_dataset(tornado, [1] * 6), 0.3, seed=0)

    def test_default_fraction_is_thirty_percent(self, tornado):
        train, test = split_train_test(make_dataset(tornado, [0, 1] * 50))
        assert len(train) == 30 and len(test) == 70

    def test_stratified_flag(self):
        labels = [0] * 40 + [1] * 60
        tr, _ = split_indices(labels, 0.3, seed=3, stratify=True)
        assert Counter(labels[i] for i in tr) == {0: 12, 1: 18}

    def test_balance_matches_hypergeometric(self):
        # train label counts of a uniform split are hypergeometric
        labels = [0, 1] * 50
        ratios = []
        for seed in range(1000):
            tr, _ = split_indices(labels, 0.3, seed)
            ratios.append(sum(labels[i] for i in tr))
        ratios = np.array(ratios)
        hg = stats.hypergeom(100, 50, 30)
        within = np.mean(np.abs(ratios / 30 - 0.5) <= 0.10)
        expected = hg.cdf(18) - hg.cdf(11)
        assert abs(within - expected) < 0.04
        assert abs(ratios.mean() - 15) < 0.2
        # the +-10pp band holds for the bulk of seeds
        assert within > 0.7


class TestStratifiedKFold:
    def test_one_of_each_per_fold(self, tornado):
        fa = stratified_kfold(make_dataset(tornado, [0] * 5 + [1] * 5), k=5, seed=0)
        labels = np.array([0] * 5 + [1] * 5)
        for f in range(5):
            assert sorted(labels[fa.test_indices(f)]) == [0, 1]

    def test_eleven_docs(self):
        labels = np.array([0] * 6 + [1] * 5)
        valid = set()
        # enumerate all per-fold (pos, neg) count vectors allowed by stratification
        for extra in range(5):
            pos = tuple(2 if f == extra else 1 for f in range(5))
            valid.add((pos, (1,) * 5))
        for seed in range(50):
            a = stratified_fold_indices(labels, 5, seed)
            pos = tuple(int(np.sum((a == f) & (labels == 0))) for f in range(5))
            neg = tuple(int(np.sum((a == f) & (labels == 1))) for f in range(5))
            assert (pos, neg) in valid

    def test_too_few_members(self):
        with pytest.raises(ValueError, match="fewer than k"):
            stratified_fold_indices([1] * 4 + [0] * 10, 5, 0)

    def test_k_at_least_two(self):
        with pytest.raises(ValueError):
            stratified_fold_indices([0, 1] * 5, 1, 0)


@settings(max_examples=100, deadline=None)
@given(n0=st.integers(2, 40), n1=st.integers(2, 40), k=st.integers(2, 6),
       seed=st.integers(0, 2**32 - 1), data=st.data())
def test_fold_partition_properties(n0, n1, k, seed, data):
    if min(n0, n1) < k:
        return
    labels = np.array([0] * n0 + [1] * n1)
    labels = labels[data.draw(st.permutations(range(len(labels))))]
    a = stratified_fold_indices(labels, k, seed)
    assert set(a.tolist()) == set(range(k))
    for c in (0, 1):
        counts = [int(np.sum((a == f) & (labels == c))) for f in range(k)]
        assert max(counts) - min(counts) <= 1
    sizes = np.bincount(a, minlength=k)
    assert sizes.max() - sizes.min() <= 1
    np.testing.assert_array_equal(a, stratified_fold_indices(labels, k, seed))
