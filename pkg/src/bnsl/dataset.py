"""Categorical datasets, contingency counting and empirical conditional entropy.

Data is held as an N x n matrix of category indices. Parent configurations
are indexed mixed-radix over the parent variables in ascending index order,
with the last parent varying fastest, so configuration j of parents (p1 < p2)
is value(p1) * arity(p2) + value(p2).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np
from scipy.special import xlogy

from .errors import DataError, ResourceLimitError

# dense q x r contingency tables are refused beyond this many cells
MAX_TABLE_CELLS = 1 << 24


@dataclass(frozen=True, eq=False)
class Dataset:
    """Immutable matrix of category indices with per-column names and arities."""

    names: tuple[str, ...]
    arities: tuple[int, ...]
    rows: np.ndarray

    def __post_init__(self):
        rows = np.ascontiguousarray(np.asarray(self.rows, dtype=np.int64))
        if rows.ndim != 2:
            raise DataError("rows must be a two-dimensional array")
        object.__setattr__(self, "names", tuple(self.names))
        object.__setattr__(self, "arities", tuple(int(a) for a in self.arities))
        object.__setattr__(self, "rows", rows)
        n = rows.shape[1]
        if n < 1:
            raise DataError("a dataset needs at least one variable")
        if len(self.names) != n or len(self.arities) != n:
            raise DataError("names and arities must match the column count")
        if len(set(self.names)) != n:
            raise DataError("variable names must be unique")
        if any(a < 1 for a in self.arities):
            raise DataError("arities must be at least 1")
        if rows.size:
            if rows.min() < 0 or (rows >= np.asarray(self.arities)).any():
                raise DataError("cell value out of range for its column arity")
        rows.setflags(write=False)

    @property
    def n_rows(self) -> int:
        return self.rows.shape[0]

    @property
    def n_vars(self) -> int:
        return self.rows.shape[1]


def load_dataset(path, declared_arities=None) -> Dataset:
    """Read a CSV file with a header row of variable names.

    Distinct strings in each column are mapped to indices by sorted order, so
    the encoding is independent of row order. Declared arities may widen a
    column beyond its observed values (the unseen categories are the top
    indices) but may never narrow it.
    """
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            names = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty file") from None
        raw = list(reader)
    n = len(names)
    if n < 1 or names == [""]:
        raise DataError(f"{path}: empty header")
    if len(set(names)) != n:
        raise DataError(f"{path}: duplicate variable names in header")
    if declared_arities is not None:
        if len(declared_arities) != n:
            raise DataError("declared arities must match the header length")
        if any(int(a) < 1 for a in declared_arities):
            raise DataError("declared arities must be at least 1")
    for k, row in enumerate(raw):
        if len(row) != n:
            raise DataError(
                f"{path}: row {k + 2} has {len(row)} fields, expected {n}")
        if any(v == "" for v in row):
            raise DataError(f"{path}: empty cell on row {k + 2}")
    codes = np.zeros((len(raw), n), dtype=np.int64)
    arities = []
    for j in range(n):
        column = [row[j] for row in raw]
        levels = sorted(set(column))
        if raw and not levels:
            raise DataError(f"{path}: column {names[j]} has no observed values")
        lookup = {v: k for k, v in enumerate(levels)}
        if raw:
            codes[:, j] = [lookup[v] for v in column]
        arity = len(levels)
        if declared_arities is not None:
            declared = int(declared_arities[j])
            if declared < arity:
                raise DataError(
                    f"{path}: declared arity {declared} for column {names[j]} "
                    f"is smaller than the {arity} observed values")
            arity = declared
        arities.append(max(arity, 1))
    return Dataset(tuple(names), tuple(arities), codes)


def write_dataset(data: Dataset, path) -> None:
    """Write a dataset as CSV to a path or an open text stream.

    Category indices are zero-padded to a fixed width per column whenever the
    arity exceeds 10, so that reloading (which sorts distinct strings) maps
    them back in numeric order.
    """
    widths = [len(str(r - 1)) for r in data.arities]

    def emit(fh):
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(data.names)
        for row in data.rows:
            writer.writerow([str(int(v)).zfill(w) for v, w in zip(row, widths)])

    if hasattr(path, "write"):
        emit(path)
    else:
        with open(path, "w", newline="") as fh:
            emit(fh)


def load_datasets_shared(paths, declared_arities=None) -> list[Dataset]:
    """Load several CSV files with one shared category mapping per column.

    Needed when separate files (a train/test pair, say) must agree on the
    index assigned to each category string; per-file sorted mappings would
    otherwise drift whenever one file misses a category.
    """
    headers = []
    raws = []
    for path in paths:
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            try:
                headers.append(next(reader))
            except StopIteration:
                raise DataError(f"{path}: empty file") from None
            raws.append(list(reader))
    if any(h != headers[0] for h in headers):
        raise DataError("datasets must share an identical header")
    names = headers[0]
    n = len(names)
    pooled = [set() for _ in range(n)]
    for path, raw in zip(paths, raws):
        for k, row in enumerate(raw):
            if len(row) != n:
                raise DataError(
                    f"{path}: row {k + 2} has {len(row)} fields, expected {n}")
            if any(v == "" for v in row):
                raise DataError(f"{path}: empty cell on row {k + 2}")
            for j, v in enumerate(row):
                pooled[j].add(v)
    lookups = [{v: k for k, v in enumerate(sorted(vals))} for vals in pooled]
    arities = []
    for j in range(n):
        arity = max(len(pooled[j]), 1)
        if declared_arities is not None:
            declared = int(declared_arities[j])
            if declared < arity:
                raise DataError(
                    f"declared arity {declared} for column {names[j]} is "
                    f"smaller than the {arity} observed values")
            arity = declared
        arities.append(arity)
    out = []
    for raw in raws:
        codes = np.zeros((len(raw), n), dtype=np.int64)
        for j in range(n):
            if raw:
                codes[:, j] = [lookups[j][row[j]] for row in raw]
        out.append(Dataset(tuple(names), tuple(arities), codes))
    return out


@dataclass(frozen=True, eq=False)
class ContingencyTable:
    """Counts of one child variable split by the joint parent configuration.

    counts has one row per parent configuration over the FULL configuration
    space (q rows even when some configurations never occur) and one column
    per child value.
    """

    child: int
    parents: tuple[int, ...]
    counts: np.ndarray
    row_totals: np.ndarray
    q: int

    def __post_init__(self):
        counts = np.asarray(self.counts, dtype=np.int64)
        totals = np.asarray(self.row_totals, dtype=np.int64)
        object.__setattr__(self, "counts", counts)
        object.__setattr__(self, "row_totals", totals)
        if counts.shape[0] != self.q or totals.shape != (self.q,):
            raise DataError("contingency shapes do not match q")
        counts.setflags(write=False)
        totals.setflags(write=False)

    @property
    def r(self) -> int:
        return self.counts.shape[1]

    @property
    def n_obs(self) -> int:
        return int(self.row_totals.sum())


def config_index(values, parents, arities) -> int:
    """Mixed-radix parent-configuration index of one row of values."""
    j = 0
    for p in parents:
        j = j * arities[p] + int(values[p])
    return j


def config_indices(rows: np.ndarray, parents, arities) -> np.ndarray:
    """Vectorized config_index over the rows of an N x n matrix."""
    if not parents:
        return np.zeros(rows.shape[0], dtype=np.int64)
    dims = tuple(arities[p] for p in parents)
    return np.ravel_multi_index(tuple(rows[:, p] for p in parents), dims)


def contingency(data: Dataset, child: int, parents) -> ContingencyTable:
    """Count (parent configuration, child value) pairs over the whole dataset.

    Args:
        data: the dataset to count over.
        child: index of the child variable.
        parents: strictly ascending indices of the parent variables.
    """
    parents = tuple(int(p) for p in parents)
    _check_family(data.n_vars, child, parents)
    r = data.arities[child]
    q = 1
    for p in parents:
        q *= data.arities[p]
    if q * r > MAX_TABLE_CELLS:
        raise ResourceLimitError(
            f"contingency table with {q} x {r} cells exceeds the dense-table "
            f"guard of {MAX_TABLE_CELLS}")
    if data.n_rows:
        j = config_indices(data.rows, parents, data.arities)
        flat = j * r + data.rows[:, child]
        counts = np.bincount(flat, minlength=q * r).reshape(q, r)
    else:
        counts = np.zeros((q, r), dtype=np.int64)
    return ContingencyTable(int(child), parents, counts, counts.sum(axis=1), q)


def counts_loglik(counts, row_totals) -> float:
    """Maximized conditional log-likelihood of a contingency table.

    Equals sum_jk N_jk ln(N_jk / N_j) with 0 ln 0 = 0; always <= 0.
    """
    raw = float(xlogy(counts, counts).sum() - xlogy(row_totals, row_totals).sum())
    return min(0.0, raw)


def empirical_cond_entropy(data: Dataset, child: int, parents) -> float:
    """Empirical conditional entropy H(child | parents) in nats."""
    if data.n_rows == 0:
        raise DataError("conditional entropy needs at least one row")
    table = contingency(data, child, parents)
    return -counts_loglik(table.counts, table.row_totals) / data.n_rows


def _check_family(n: int, child: int, parents) -> None:
    if not 0 <= child < n:
        raise DataError(f"child index {child} out of range for {n} variables")
    for p in parents:
        if not 0 <= p < n:
            raise DataError(f"parent index {p} out of range for {n} variables")
    if child in parents:
        raise DataError(f"variable {child} cannot be its own parent")
    if list(parents) != sorted(set(parents)):
        raise DataError("parents must be strictly ascending without duplicates")
