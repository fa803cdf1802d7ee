import csv
import json
from dataclasses import replace
from pathlib import Path

import pytest

from disaster_tweets import cli
from disaster_tweets.corpus import Dataset, write_dataset
from disaster_tweets.evaluate import load_default_grids
from disaster_tweets.models import FAMILIES
from disaster_tweets.synthetic import disaster_corpus

SMALL_GRIDS = {"NB": {"alpha": [1.0], "idf": ["smooth"]}, "LR": {"c": [10.0]}, "DT": {"max_depth": [8]},
               "SVM": {"c": [1.0]}, "KNN": {"k": [3]}, "RF": {"n_trees": [10]},
               "AdaBoost": {"n_rounds": [20]}, "MNN": {"hidden": [8]}}


def write_config(tmp_path, **over):
    cfg = {"seed": 5, "layout": "synthetic", "synthetic_size": 120, "disasters": "tornado_2011",
           "grids": SMALL_GRIDS, "benchmark": {"repeats": 1}, "cv": {"k": 3},
           "out": str(tmp_path / "out")}
    cfg.update(over)
    path = tmp_path / "config.json"
    path.write_text(json.dumps(cfg))
    return path


def read_rows(path):
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def run(*argv):
    return cli.main([str(a) for a in argv])


class TestConfig:
    def test_seed_required(self, tmp_path, capsys):
        cfg = write_config(tmp_path, seed=None)
        assert run("ingest", "--config", cfg) == cli.EXIT_USAGE
        assert "seed" in capsys.readouterr().err

    def test_unknown_flag_is_usage_error(self, capsys):
        with pytest.raises(SystemExit) as exc:
            cli.main(["train", "--bogus"])
        assert exc.value.code == cli.EXIT_USAGE

    def test_unknown_family(self, tmp_path):
        assert run("train", "--config", write_config(tmp_path), "--family", "GBM") == cli.EXIT_USAGE

    def test_env_overrides_file_and_flags_override_env(self, tmp_path):
        file_cfg = json.loads(write_config(tmp_path).read_text())
        env = {"DTWEETS_SEED": "11", "DTWEETS_FAMILY": "KNN"}
        cfg = cli.build_config(file_cfg, environ=env)
        assert (cfg.seed, cfg.families) == (11, ["KNN"])
        args = cli.build_parser().parse_args(["train", "--seed", "3"])
        cfg = cli.build_config(file_cfg, args, environ=env)
        assert cfg.seed == 3

    def test_family_config_layers(self, tmp_path):
        file_cfg = json.loads(write_config(tmp_path, models={"LR": {"epochs": 50}}).read_text())
        cfg = cli.build_config(file_cfg, environ={})
        lr = cfg.family_config("LR")
        assert lr["c"] == 10.0 and lr["epochs"] == 50 and lr["idf"] == "paper"

    def test_missing_data_dir(self, tmp_path):
        cfg = write_config(tmp_path, layout="canonical", data_dir=str(tmp_path / "nope"))
        assert run("ingest", "--config", cfg) == cli.EXIT_USAGE


class TestIngest:
    def test_canonical_missing_file_names_path(self, tmp_path, capsys):
        (tmp_path / "data").mkdir()
        cfg = write_config(tmp_path, layout="canonical", data_dir=str(tmp_path / "data"))
        assert run("ingest", "--config", cfg) == cli.EXIT_DATA
        assert "tornado_2011.csv" in capsys.readouterr().err

    def test_canonical_round_trip_and_rerun(self, tmp_path, registry):
        data = tmp_path / "data"
        write_dataset(disaster_corpus(registry["tornado_2011"], 50, 1), data / "tornado_2011.csv")
        cfg = write_config(tmp_path, layout="canonical", data_dir=str(data))
        assert run("ingest", "--config", cfg) == 0
        out = tmp_path / "out"
        first = (out / "data" / "tornado_2011.csv").read_bytes()
        assert first == (data / "tornado_2011.csv").read_bytes()
        assert run("ingest", "--config", cfg) == 0
        assert (out / "data" / "tornado_2011.csv").read_bytes() == first
        assert read_rows(out / "ingest_report.csv")[0]["n_loaded"] == "50"


class TestTrain:
    def test_nb_smoke_and_determinism(self, tmp_path):
        cfg = write_config(tmp_path)
        assert run("train", "--config", cfg, "--family", "NB") == 0
        out = tmp_path / "out"
        assert (out / "models" / "tornado_2011_NB.json").exists()
        rows = read_rows(out / "metrics.csv")
        assert [r["split"] for r in rows] == ["train", "test"]
        first = (out / "metrics.csv").read_bytes()
        assert run("train", "--config", cfg, "--family", "NB") == 0
        assert (out / "metrics.csv").read_bytes() == first

    def test_nb_with_negative_idf_exits_with_data_error(self, tmp_path, registry, capsys):
        # "tornado" in every tweet gets idf ln(n/(n+1)) < 0 in every training split
        ds = disaster_corpus(registry["tornado_2011"], 60, 2)
        ds = Dataset(ds.spec, tuple(replace(t, text=t.text + " tornado") for t in ds.tweets))
        write_dataset(ds, tmp_path / "data" / "tornado_2011.csv")
        grids = dict(SMALL_GRIDS, NB={"alpha": [1.0], "idf": ["paper"]})
        cfg = write_config(tmp_path, grids=grids, layout="canonical", data_dir=str(tmp_path / "data"))
        assert run("train", "--config", cfg, "--family", "NB") == cli.EXIT_DATA
        assert "non-negative" in capsys.readouterr().err

    def test_numerical_failure_exit_code(self, tmp_path, capsys, monkeypatch):
        from disaster_tweets.models import NumericalError

        def boom(*a, **k):
            raise NumericalError("diverged", 4)

        monkeypatch.setattr(cli, "fit_pipeline", boom)
        assert run("train", "--config", write_config(tmp_path), "--family", "LR") == cli.EXIT_NUMERICAL
        assert "epoch 4" in capsys.readouterr().err


class TestGridsearch:
    def test_singleton_grid_one_cell(self, tmp_path):
        cfg = write_config(tmp_path)
        assert run("gridsearch", "--config", cfg, "--family", "NB") == 0
        rows = read_rows(tmp_path / "out" / "grid" / "grid_tornado_2011_NB.csv")
        assert {r["cell"] for r in rows} == {"0"}
        assert len(rows) == 3
        assert all(r["best"] == "1" for r in rows)

    def test_default_lr_grid_rows(self, tmp_path):
        cfg = write_config(tmp_path, grids="default")
        assert run("gridsearch", "--config", cfg, "--family", "LR") == 0
        rows = read_rows(tmp_path / "out" / "grid" / "grid_tornado_2011_LR.csv")
        assert len(rows) == len(load_default_grids()["LR"]) * 3
        winners = {r["cell"] for r in rows if r["best"] == "1"}
        assert len(winners) == 1
        best = json.loads((tmp_path / "out" / "grid" / "best.json").read_text())
        assert best["tornado_2011_LR"]["n_fits"] == len(rows)


class TestBenchmark:
    def test_eight_rows_per_corpus(self, tmp_path):
        cfg = write_config(tmp_path, disasters="tornado_2011,sandy_2012")
        assert run("benchmark", "--config", cfg) == 0
        out = tmp_path / "out"
        bench, times = read_rows(out / "benchmark.csv"), read_rows(out / "timings.csv")
        for d in ("tornado_2011", "sandy_2012"):
            assert [r["family"] for r in bench if r["disaster_id"] == d] == list(FAMILIES)
            assert [r["family"] for r in times if r["disaster_id"] == d] == list(FAMILIES)
        assert all(r["accuracy"] not in ("", "\u2014") for r in bench)
        assert all(float(r["total_seconds"]) >= 0 for r in times)


class TestReport:
    def test_full_inventory(self, tmp_path):
        cfg = write_config(tmp_path, disasters="all")
        assert run("report", "--config", cfg) == 0
        names = {p.name for p in (tmp_path / "out").iterdir()}
        for fig in ("fig2", "fig3", "fig6", "fig7"):
            assert f"{fig}.csv" in names
        for short in ("tornado", "floods", "blizzard", "harvey", "wildfires"):
            assert {f"fig4_{short}.csv", f"fig5_{short}.csv"} <= names
        for short in ("sandy", "matthew", "harvey", "michael", "dorian"):
            assert {f"fig8_{short}.csv", f"fig9_{short}.csv"} <= names
        shares = [float(r["share"]) for r in read_rows(tmp_path / "out" / "fig2.csv")]
        assert abs(sum(shares) - 1.0) <= 5e-6

    def test_single_disaster_subset(self, tmp_path):
        assert run("report", "--config", write_config(tmp_path)) == 0
        names = {p.name for p in (tmp_path / "out").iterdir()}
        assert not any(n.startswith("fig") for n in names)
        assert {"proportions.csv", "needs.csv", "attitude_tornado.csv", "daily_tornado.csv"} <= names

    def test_plots(self, tmp_path):
        pytest.importorskip("matplotlib")
        assert run("report", "--config", write_config(tmp_path), "--plots") == 0
        svgs = sorted(p.name for p in (tmp_path / "out").glob("*.svg"))
        assert svgs == ["daily_tornado.svg", "proportions.svg"]


def test_all_twice_byte_identical(tmp_path):
    cfg = write_config(tmp_path, synthetic_size=80)
    outs = []
    for name in ("a", "b"):
        out = tmp_path / name
        assert run("all", "--config", cfg, "--out", out) == 0
        outs.append(out)
    files = lambda root: sorted(p.relative_to(root) for p in root.rglob("*") if p.is_file())  # noqa: E731
    assert files(outs[0]) == files(outs[1])
    compared = [rel for rel in files(outs[0]) if rel != Path("timings.csv")]
    assert len(compared) > 10
    for rel in compared:
        assert (outs[0] / rel).read_bytes() == (outs[1] / rel).read_bytes(), rel
