"""Experiment harness: regret tables, SHD curves, prediction ranks, model sizes.

Every experiment is a pure function of its spec, so reruns produce
byte-identical CSV files. Per-repetition randomness derives from the base
seed as ``seed + repetition_index``; nothing reads global RNG state.
"""

from __future__ import annotations

import csv
import json
import platform
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .dataset import Dataset, load_dataset
from .errors import DataError
from .learner import learn_exact
from .model import fit_bpp, fit_snml, load_network, mean_test_loglik, sample
from .regret import regret_exact, regret_szp_all_range, regret_szp_small_r
from .scores import CRITERIA, ScoreConfig
from .structure import cpdag_shd, parameter_count, to_cpdag

KINDS = ("regret-table", "shd-curve", "predict-rank", "param-count")

DEFAULT_CRITERIA = ("bdeu", "bic", "fnml", "qnml")
DEFAULT_SAMPLE_SIZES = (10, 100, 1000, 10000)
DEFAULT_FRACTIONS = tuple(round(0.1 * k, 1) for k in range(1, 10))

# (N, r) grid of the reference regret table.
TABLE1_GRID = tuple((n, r) for n in (50, 500, 5000)
                    for r in (10, 100, 1000, 10000))


def bundled_path(name: str) -> str:
    """Absolute path of a data file shipped inside the package."""
    return str(resources.files("bnsl").joinpath("data", name))


@dataclass(frozen=True)
class ExperimentSpec:
    kind: str = "regret-table"
    criteria: tuple = DEFAULT_CRITERIA
    sample_sizes: tuple = DEFAULT_SAMPLE_SIZES
    repetitions: int = 50
    seed: int = 0
    networks: tuple = ()
    datasets: tuple = ()
    train_fractions: tuple = DEFAULT_FRACTIONS

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DataError(f"unknown experiment kind {self.kind!r}; "
                            f"expected one of {', '.join(KINDS)}")
        object.__setattr__(self, "criteria", tuple(self.criteria))
        for c in self.criteria:
            if c not in CRITERIA:
                raise DataError(f"unknown criterion {c!r}")
        if not self.criteria:
            raise DataError("criteria list is empty")
        object.__setattr__(self, "sample_sizes",
                           tuple(int(n) for n in self.sample_sizes))
        if any(n <= 0 for n in self.sample_sizes):
            raise DataError("sample sizes must be positive")
        if int(self.repetitions) < 1:
            raise DataError("repetitions must be at least 1")
        object.__setattr__(self, "repetitions", int(self.repetitions))
        object.__setattr__(self, "seed", int(self.seed))
        object.__setattr__(self, "networks", tuple(str(p) for p in self.networks))
        object.__setattr__(self, "datasets", tuple(str(p) for p in self.datasets))
        fractions = tuple(float(f) for f in self.train_fractions)
        if any(not 0.0 < f < 1.0 for f in fractions):
            raise DataError("train fractions must lie strictly between 0 and 1")
        object.__setattr__(self, "train_fractions", fractions)

    def to_json_dict(self) -> dict:
        return {
            "kind": self.kind,
            "criteria": list(self.criteria),
            "sampleSizes": list(self.sample_sizes),
            "repetitions": self.repetitions,
            "seeds": self.seed,
            "networks": list(self.networks),
            "datasets": list(self.datasets),
            "trainFractions": list(self.train_fractions),
        }


_JSON_KEYS = {
    "kind": "kind",
    "criteria": "criteria",
    "sampleSizes": "sample_sizes",
    "repetitions": "repetitions",
    "seeds": "seed",
    "networks": "networks",
    "datasets": "datasets",
    "trainFractions": "train_fractions",
}


def spec_from_json(doc: dict) -> ExperimentSpec:
    """Build a spec from a parsed JSON document; unknown keys are errors."""
    if not isinstance(doc, dict):
        raise DataError("experiment spec must be a JSON object")
    kwargs = {}
    for key, value in doc.items():
        if key not in _JSON_KEYS:
            raise DataError(f"unknown spec field {key!r}")
        kwargs[_JSON_KEYS[key]] = value
    return ExperimentSpec(**kwargs)


def load_spec(path: str) -> ExperimentSpec:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise DataError(f"{path}: invalid JSON: {exc}") from None
    return spec_from_json(doc)


def default_spec(kind: str) -> ExperimentSpec:
    """Spec running the named experiment on the bundled networks/datasets."""
    if kind == "regret-table":
        return ExperimentSpec(kind=kind)
    if kind == "shd-curve":
        return ExperimentSpec(
            kind=kind,
            networks=(bundled_path("chain5.json"),
                      bundled_path("collider5.json")),
        )
    if kind in ("predict-rank", "param-count"):
        return ExperimentSpec(
            kind=kind,
            datasets=(bundled_path("synth4_n400.csv"),
                      bundled_path("mixed6_n500.csv"),
                      bundled_path("web8_n500.csv")),
        )
    raise DataError(f"unknown experiment kind {kind!r}; "
                    f"expected one of {', '.join(KINDS)}")


def _fmt(x: float) -> str:
    return "%.12g" % float(x)


def _label(path: str) -> str:
    return Path(path).stem


def _map_reps(worker, reps: int, threads: int) -> list:
    # Merged in repetition order either way, so results are deterministic.
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(worker, range(reps)))
    return [worker(rep) for rep in range(reps)]


def run_regret_table(spec: ExperimentSpec | None = None) -> list[list[str]]:
    """Regret of a single multinomial on the reference (N, r) grid.

    Columns: the small-alphabet expansion, the all-range approximation,
    and the exact sum, printed to two decimals.
    """
    rows = [["n", "r", "szp1", "szp2", "exact"]]
    for n, r in TABLE1_GRID:
        rows.append([str(n), str(r),
                     "%.2f" % regret_szp_small_r(n, r),
                     "%.2f" % regret_szp_all_range(n, r),
                     "%.2f" % regret_exact(n, r)])
    return rows


def run_shd_curve(spec: ExperimentSpec, threads: int = 1) -> list[list[str]]:
    """Mean CPDAG distance to the generating network versus sample size.

    One dataset is drawn per (sample size, repetition) and shared by all
    criteria, so the columns are paired comparisons on identical data.
    """
    if not spec.networks:
        raise DataError("shd-curve needs at least one network file")
    rows = [["network", "criterion", "n", "meanSHD", "stderr"]]
    for net_path in spec.networks:
        net = load_network(net_path)
        truth = to_cpdag(net.structure)
        for n in spec.sample_sizes:
            def one_rep(rep: int, n=n):
                data = sample(net, n, seed=spec.seed + rep)
                out = []
                for crit in spec.criteria:
                    res = learn_exact(data, ScoreConfig(criterion=crit))
                    out.append(cpdag_shd(to_cpdag(res.network), truth))
                return out
            per_rep = np.array(_map_reps(one_rep, spec.repetitions, threads),
                               dtype=float)
            for j, crit in enumerate(spec.criteria):
                col = per_rep[:, j]
                err = (col.std(ddof=1) / np.sqrt(len(col))
                       if len(col) > 1 else float("nan"))
                rows.append([_label(net_path), crit, str(n),
                             _fmt(col.mean()), _fmt(err)])
    return rows


def _fit_for(criterion: str):
    return fit_bpp if criterion == "bdeu" else fit_snml


def _min_ranks(values: list[float]) -> list[int]:
    """Rank 1 = best (largest value); exactly equal values share the
    smallest rank of their group."""
    order = sorted(range(len(values)), key=lambda i: -values[i])
    ranks = [0] * len(values)
    for pos, i in enumerate(order):
        if pos > 0 and values[i] == values[order[pos - 1]]:
            ranks[i] = ranks[order[pos - 1]]
        else:
            ranks[i] = pos + 1
    return ranks


def _predict_tables(spec: ExperimentSpec, threads: int, with_loglik: bool):
    """Shared driver for the prediction-rank and model-size experiments.

    Per repetition the rows are permuted once; each train fraction takes
    the leading slice of that permutation, so larger fractions extend the
    smaller ones instead of resampling.
    """
    if not spec.datasets:
        raise DataError(f"{spec.kind} needs at least one dataset file")
    out = []
    for ds_path in spec.datasets:
        data = load_dataset(ds_path)

        def one_rep(rep: int):
            rng = np.random.default_rng(spec.seed + rep)
            perm = rng.permutation(data.n_rows)
            cells = []
            for fraction in spec.train_fractions:
                n_train = int(fraction * data.n_rows)
                if n_train < 1 or n_train >= data.n_rows:
                    raise DataError(
                        f"train fraction {fraction} leaves an empty split "
                        f"for {data.n_rows} rows")
                train = Dataset(data.names, data.arities,
                                data.rows[perm[:n_train]])
                test = Dataset(data.names, data.arities,
                               data.rows[perm[n_train:]])
                logliks, params = [], []
                for crit in spec.criteria:
                    res = learn_exact(train, ScoreConfig(criterion=crit))
                    params.append(parameter_count(res.network, data.arities))
                    if with_loglik:
                        net = _fit_for(crit)(train, res.network)
                        logliks.append(mean_test_loglik(net, test))
                ranks = _min_ranks(logliks) if with_loglik else []
                cells.append((logliks, ranks, params))
            return cells

        per_rep = _map_reps(one_rep, spec.repetitions, threads)
        for fi, fraction in enumerate(spec.train_fractions):
            for ci, crit in enumerate(spec.criteria):
                logliks = [per_rep[rep][fi][0][ci] if with_loglik else 0.0
                           for rep in range(spec.repetitions)]
                ranks = [per_rep[rep][fi][1][ci] if with_loglik else 0
                         for rep in range(spec.repetitions)]
                params = [per_rep[rep][fi][2][ci]
                          for rep in range(spec.repetitions)]
                out.append((_label(ds_path), crit, fraction,
                            float(np.mean(logliks)), float(np.mean(ranks)),
                            float(np.mean(params))))
    return out


def run_predict_rank(spec: ExperimentSpec, threads: int = 1) -> list[list[str]]:
    """Mean held-out log-likelihood and mean rank per train fraction.

    Parameters pair with the criterion that chose the model: Bayesian
    posterior-predictive parameters for the Bayesian score, sequential
    NML parameters for everything else.
    """
    cells = _predict_tables(spec, threads, with_loglik=True)
    rows = [["dataset", "criterion", "fraction", "meanLogLik", "rank"]]
    for ds, crit, fraction, loglik, rank, _ in cells:
        rows.append([ds, crit, _fmt(fraction), _fmt(loglik), _fmt(rank)])
    return rows


def run_param_count(spec: ExperimentSpec, threads: int = 1) -> list[list[str]]:
    """Mean parameter count of the learned model per train fraction.

    Counts use the full parent-configuration product, matching the
    dimension the BIC penalty charges for.
    """
    cells = _predict_tables(spec, threads, with_loglik=False)
    rows = [["dataset", "criterion", "fraction", "meanParamCount"]]
    for ds, crit, fraction, _, _, params in cells:
        rows.append([ds, crit, _fmt(fraction), _fmt(params)])
    return rows


def run_experiment(spec: ExperimentSpec, out_dir: str,
                   threads: int = 1) -> dict:
    """Run one experiment and write ``<kind>.csv`` plus ``manifest.json``.

    Returns the manifest dictionary. The manifest wall time is the only
    output field that varies between reruns of the same spec.
    """
    start = time.perf_counter()
    if spec.kind == "regret-table":
        rows = run_regret_table(spec)
    elif spec.kind == "shd-curve":
        rows = run_shd_curve(spec, threads=threads)
    elif spec.kind == "predict-rank":
        rows = run_predict_rank(spec, threads=threads)
    else:
        rows = run_param_count(spec, threads=threads)

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / f"{spec.kind}.csv"
    with open(csv_path, "w", encoding="utf-8", newline="") as fh:
        csv.writer(fh, lineterminator="\n").writerows(rows)

    manifest = {
        "kind": spec.kind,
        "spec": spec.to_json_dict(),
        "rows": len(rows) - 1,
        "versions": {
            "bnsl": __version__,
            "python": platform.python_version(),
            "numpy": np.__version__,
            "scipy": scipy.__version__,
        },
        "wallTimeSeconds": round(time.perf_counter() - start, 3),
    }
    with open(out / "manifest.json", "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2)
        fh.write("\n")
    return manifest
