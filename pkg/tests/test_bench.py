"""Tests for the experiment harness: specs, runners and output files."""

import json
import math
from pathlib import Path

import numpy as np
import pytest

from bnsl.bench import (
    DEFAULT_CRITERIA,
    DEFAULT_FRACTIONS,
    DEFAULT_SAMPLE_SIZES,
    ExperimentSpec,
    KINDS,
    TABLE1_GRID,
    bundled_path,
    default_spec,
    load_spec,
    run_experiment,
    run_param_count,
    run_predict_rank,
    run_regret_table,
    run_shd_curve,
    spec_from_json,
    _min_ranks,
)
from bnsl.dataset import Dataset, write_dataset
from bnsl.errors import DataError
from bnsl.regret import regret


# ------------------------------------------------------------------ specs

def test_spec_defaults():
    spec = ExperimentSpec()
    assert spec.kind == "regret-table"
    assert spec.criteria == DEFAULT_CRITERIA
    assert spec.sample_sizes == DEFAULT_SAMPLE_SIZES
    assert spec.repetitions == 50
    assert spec.seed == 0
    assert spec.train_fractions == DEFAULT_FRACTIONS


def test_spec_validation():
    with pytest.raises(DataError):
        ExperimentSpec(kind="nope")
    with pytest.raises(DataError):
        ExperimentSpec(criteria=("qnml", "mystery"))
    with pytest.raises(DataError):
        ExperimentSpec(criteria=())
    with pytest.raises(DataError):
        ExperimentSpec(sample_sizes=(100, 0))
    with pytest.raises(DataError):
        ExperimentSpec(repetitions=0)
    with pytest.raises(DataError):
        ExperimentSpec(train_fractions=(0.5, 1.0))
    with pytest.raises(DataError):
        ExperimentSpec(train_fractions=(0.0,))


def test_spec_json_roundtrip():
    spec = ExperimentSpec(kind="shd-curve", criteria=("qnml", "bic"),
                          sample_sizes=(10, 100), repetitions=3, seed=7,
                          networks=("a.json",), train_fractions=(0.25,))
    doc = spec.to_json_dict()
    # the file format uses camelCase field names
    assert set(doc) == {"kind", "criteria", "sampleSizes", "repetitions",
                        "seeds", "networks", "datasets", "trainFractions"}
    assert doc["sampleSizes"] == [10, 100]
    assert doc["seeds"] == 7
    assert spec_from_json(doc) == spec


def test_spec_from_json_rejects_unknown_fields():
    with pytest.raises(DataError):
        spec_from_json({"kind": "regret-table", "sample_sizes": [10]})
    with pytest.raises(DataError):
        spec_from_json(["regret-table"])


def test_load_spec(tmp_path):
    path = tmp_path / "spec.json"
    path.write_text('{"kind": "regret-table", "seeds": 3}')
    assert load_spec(path).seed == 3
    path.write_text("{oops")
    with pytest.raises(DataError):
        load_spec(path)


def test_default_specs_point_at_bundled_files():
    for kind in KINDS:
        spec = default_spec(kind)
        assert spec.kind == kind
        for p in spec.networks + spec.datasets:
            assert Path(p).exists()
    assert default_spec("shd-curve").networks
    assert default_spec("predict-rank").datasets
    with pytest.raises(DataError):
        default_spec("mystery")


def test_bundled_path_resolves():
    assert Path(bundled_path("chain5.json")).exists()


# ----------------------------------------------------------- regret table

def test_regret_table_shape_and_values():
    rows = run_regret_table()
    assert rows[0] == ["n", "r", "szp1", "szp2", "exact"]
    assert len(rows) == 1 + len(TABLE1_GRID)
    assert rows[1] == ["50", "10", "13.24", "13.26", "13.24"]
    for (n, r), row in zip(TABLE1_GRID, rows[1:]):
        assert row[:2] == [str(n), str(r)]
        assert row[2] == "%.2f" % regret(n, r, "szp1")
        assert row[3] == "%.2f" % regret(n, r, "szp2")
        assert row[4] == "%.2f" % regret(n, r, "exact")


# -------------------------------------------------------------- shd curve

def small_shd_spec(reps=3):
    return ExperimentSpec(kind="shd-curve", criteria=("qnml", "bic"),
                          sample_sizes=(50,), repetitions=reps,
                          networks=(bundled_path("chain5.json"),))


def test_shd_curve_shape():
    rows = run_shd_curve(small_shd_spec())
    assert rows[0] == ["network", "criterion", "n", "meanSHD", "stderr"]
    assert len(rows) == 3
    for row, crit in zip(rows[1:], ("qnml", "bic")):
        assert row[0] == "chain5" and row[1] == crit and row[2] == "50"
        assert float(row[3]) >= 0.0
        assert float(row[4]) >= 0.0


def test_shd_curve_is_deterministic():
    assert run_shd_curve(small_shd_spec()) == run_shd_curve(small_shd_spec())


def test_shd_curve_threads_do_not_change_results():
    spec = small_shd_spec(reps=4)
    assert run_shd_curve(spec, threads=3) == run_shd_curve(spec, threads=1)


def test_shd_curve_single_repetition_has_nan_stderr():
    rows = run_shd_curve(small_shd_spec(reps=1))
    assert all(math.isnan(float(row[4])) for row in rows[1:])


def test_shd_curve_requires_networks():
    with pytest.raises(DataError):
        run_shd_curve(ExperimentSpec(kind="shd-curve"))


# ------------------------------------------------- prediction experiments

def small_predict_spec(kind, criteria=("qnml", "bdeu"), reps=2,
                       fractions=(0.5,)):
    return ExperimentSpec(kind=kind, criteria=criteria, repetitions=reps,
                          datasets=(bundled_path("synth4_n400.csv"),),
                          train_fractions=fractions)


def test_min_ranks():
    assert _min_ranks([3.0, 1.0, 3.0, 0.5]) == [1, 3, 1, 4]
    assert _min_ranks([2.0]) == [1]
    assert _min_ranks([1.0, 1.0, 1.0]) == [1, 1, 1]


def test_predict_rank_shape():
    rows = run_predict_rank(small_predict_spec("predict-rank"))
    assert rows[0] == ["dataset", "criterion", "fraction", "meanLogLik",
                       "rank"]
    assert len(rows) == 3
    for row, crit in zip(rows[1:], ("qnml", "bdeu")):
        assert row[0] == "synth4_n400" and row[1] == crit
        assert row[2] == "0.5"
        assert math.isfinite(float(row[3])) and float(row[3]) < 0.0
        assert 1.0 <= float(row[4]) <= 2.0


def test_predict_rank_ties_share_the_best_rank():
    # the same criterion twice produces identical predictions, so both
    # copies must be ranked 1 in every repetition
    spec = small_predict_spec("predict-rank", criteria=("qnml", "qnml"))
    rows = run_predict_rank(spec)
    assert [row[4] for row in rows[1:]] == ["1", "1"]


def test_param_count_shape():
    rows = run_param_count(small_predict_spec("param-count"))
    assert rows[0] == ["dataset", "criterion", "fraction", "meanParamCount"]
    assert len(rows) == 3
    for row in rows[1:]:
        assert float(row[3]) >= 3.0  # three free parameters at minimum


def test_prediction_requires_datasets():
    with pytest.raises(DataError):
        run_predict_rank(ExperimentSpec(kind="predict-rank"))


def test_degenerate_train_split_is_an_error(tmp_path):
    path = tmp_path / "tiny.csv"
    write_dataset(Dataset(("A", "B"), (2, 2),
                          np.array([[0, 0], [1, 1], [0, 1]], np.int64)), path)
    spec = ExperimentSpec(kind="predict-rank", criteria=("bic",),
                          repetitions=1, datasets=(path,),
                          train_fractions=(0.1,))
    with pytest.raises(DataError):
        run_predict_rank(spec)


def test_sparse_penalty_ranking_shifts_with_training_size():
    # with little data the heaviest penalty wins held-out prediction less
    # often than it does with plenty of data
    spec = ExperimentSpec(kind="predict-rank", repetitions=20,
                          datasets=(bundled_path("synth4_n400.csv"),),
                          train_fractions=(0.1, 0.9))
    rows = run_predict_rank(spec)
    rank = {(row[1], row[2]): float(row[4]) for row in rows[1:]}
    assert rank[("bic", "0.1")] < rank[("bic", "0.9")]


# ------------------------------------------------------------ experiments

def test_run_experiment_outputs(tmp_path):
    spec = small_shd_spec(reps=2)
    manifest = run_experiment(spec, tmp_path / "out")
    csv_path = tmp_path / "out" / "shd-curve.csv"
    assert csv_path.exists()
    assert (tmp_path / "out" / "manifest.json").exists()
    assert manifest["kind"] == "shd-curve"
    assert manifest["rows"] == 2
    assert manifest["spec"] == spec.to_json_dict()
    assert set(manifest["versions"]) == {"bnsl", "python", "numpy", "scipy"}
    on_disk = json.loads((tmp_path / "out" / "manifest.json").read_text())
    assert on_disk == manifest


def test_rerun_is_byte_identical_outside_wall_time(tmp_path):
    spec = small_shd_spec(reps=2)
    run_experiment(spec, tmp_path / "a")
    run_experiment(spec, tmp_path / "b")
    csv_a = (tmp_path / "a" / "shd-curve.csv").read_bytes()
    csv_b = (tmp_path / "b" / "shd-curve.csv").read_bytes()
    assert csv_a == csv_b
    man_a = json.loads((tmp_path / "a" / "manifest.json").read_text())
    man_b = json.loads((tmp_path / "b" / "manifest.json").read_text())
    man_a.pop("wallTimeSeconds")
    man_b.pop("wallTimeSeconds")
    assert man_a == man_b


def test_run_experiment_regret_table(tmp_path):
    run_experiment(ExperimentSpec(), tmp_path)
    text = (tmp_path / "regret-table.csv").read_text()
    assert text.splitlines()[0] == "n,r,szp1,szp2,exact"
    assert len(text.splitlines()) == 13
