"""Numerical kernels: datasets, OLS with t-tests, Student-t tails, seeded streams."""

from __future__ import annotations

import csv
import math
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg, special
from scipy import stats as sps

from .errors import (
    BadRange,
    CsvFormatError,
    RankDeficient,
    TooFewRows,
    UnknownVariable,
    ZeroResidualVariance,
    ZeroVariance,
)

PIVOT_TOL = 1e-10
MISSING_TOKENS = frozenset({"", "NA"})
INTERCEPT = "(Intercept)"


# ---------------------------------------------------------------------------
# Dataset


@dataclass(frozen=True)
class Dataset:
    """Named numeric columns; ``NaN`` marks a missing cell."""

    columns: dict[str, np.ndarray]

    def __post_init__(self):
        cols = {}
        n = None
        for name, values in self.columns.items():
            if not isinstance(name, str) or not name:
                raise ValueError("column names must be non-empty strings")
            arr = np.asarray(values, dtype=float)
            if arr.ndim != 1:
                raise ValueError(f"column {name!r} is not one-dimensional")
            if n is None:
                n = arr.shape[0]
            elif arr.shape[0] != n:
                raise ValueError(f"column {name!r} has {arr.shape[0]} rows, expected {n}")
            cols[name] = arr
        object.__setattr__(self, "columns", cols)

    @property
    def n_rows(self) -> int:
        for arr in self.columns.values():
            return arr.shape[0]
        return 0

    @property
    def names(self) -> list[str]:
        return list(self.columns)

    def __getitem__(self, name: str) -> np.ndarray:
        try:
            return self.columns[name]
        except KeyError:
            raise UnknownVariable(f"unknown variable {name!r}") from None

    def __contains__(self, name) -> bool:
        return name in self.columns

    def select(self, names: Sequence[str]) -> Dataset:
        return Dataset({name: self[name] for name in names})

    def missing(self, name: str) -> np.ndarray:
        return np.isnan(self[name])


def read_csv(path) -> Dataset:
    """Read a header-first CSV; empty cells and ``NA`` are missing."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise CsvFormatError(f"{path}: empty file") from None
        if any(not h for h in header):
            raise CsvFormatError(f"{path}: empty column name in header")
        if len(set(header)) != len(header):
            raise CsvFormatError(f"{path}: duplicate column names in header")
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise CsvFormatError(
                    f"{path}: line {lineno} has {len(row)} cells, expected {len(header)}"
                )
            values = []
            for name, cell in zip(header, row):
                cell = cell.strip()
                if cell in MISSING_TOKENS:
                    values.append(math.nan)
                    continue
                try:
                    values.append(float(cell))
                except ValueError:
                    raise CsvFormatError(
                        f"{path}: line {lineno}, column {name!r}: not a number: {cell!r}"
                    ) from None
            rows.append(values)
    data = np.array(rows, dtype=float).reshape(len(rows), len(header))
    return Dataset({name: data[:, j] for j, name in enumerate(header)})


def write_csv(data: Dataset, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(data.names)
        cols = [data[name] for name in data.names]
        for i in range(data.n_rows):
            writer.writerow(["NA" if math.isnan(c[i]) else repr(float(c[i])) for c in cols])


def complete_cases(data: Dataset, vars: Sequence[str]) -> Dataset:
    """Drop rows with a missing value in any of ``vars``; row order is kept."""
    keep = np.ones(data.n_rows, dtype=bool)
    for name in vars:
        keep &= ~np.isnan(data[name])
    return Dataset({name: col[keep] for name, col in data.columns.items()})


# ---------------------------------------------------------------------------
# Descriptive kernels


def standardize(column) -> np.ndarray:
    """Centre to mean 0 and scale to sample SD 1 (divisor n - 1)."""
    x = np.asarray(column, dtype=float)
    if x.shape[0] < 2:
        raise TooFewRows("standardize needs at least 2 values")
    sd = x.std(ddof=1)
    if not sd > 0:
        raise ZeroVariance("column has zero sample variance")
    return (x - x.mean()) / sd


def pearson_corr_matrix(columns) -> np.ndarray:
    """Correlation matrix of a name->column mapping or an (n, p) array.

    Rows/columns follow the mapping's iteration order.
    """
    if isinstance(columns, Mapping):
        mat = np.column_stack([np.asarray(v, dtype=float) for v in columns.values()])
    else:
        mat = np.asarray(columns, dtype=float)
    if mat.shape[0] < 3:
        raise TooFewRows("correlation needs at least 3 rows")
    centred = mat - mat.mean(axis=0)
    ss = np.sqrt(np.einsum("ij,ij->j", centred, centred))
    if np.any(ss == 0):
        raise ZeroVariance("a column has zero variance")
    unit = centred / ss
    corr = unit.T @ unit
    corr = np.clip((corr + corr.T) / 2, -1.0, 1.0)
    np.fill_diagonal(corr, 1.0)
    return corr


# ---------------------------------------------------------------------------
# Student t


def p_two_sided(t, df):
    """Two-sided Student-t tail probability ``2 P(T >= |t|)``.

    Uses the identity ``2 P(T >= |t|) = I_{df/(df+t^2)}(df/2, 1/2)`` so that
    tiny p-values keep full relative precision instead of cancelling to zero.
    Accepts scalars or arrays.
    """
    t = np.asarray(t, dtype=float)
    df = np.asarray(df, dtype=float)
    if np.any(df < 1):
        raise ValueError("df must be >= 1")
    x = df / (df + t * t)
    p = special.betainc(df / 2.0, 0.5, x)
    p = np.clip(p, 0.0, 1.0)
    return float(p) if p.ndim == 0 else p


def t_quantile(level: float, df: int) -> float:
    """Two-sided critical value for a ``level`` confidence interval."""
    return float(sps.t.ppf(0.5 + level / 2.0, df))


# ---------------------------------------------------------------------------
# OLS


@dataclass(frozen=True)
class OlsFit:
    terms: tuple[str, ...]
    coefficients: np.ndarray
    standard_errors: np.ndarray
    t_stats: np.ndarray
    p_values: np.ndarray
    residual_sd: float
    n: int
    df: int
    r_squared: float
    residuals: np.ndarray = field(repr=False)

    def index(self, term: str) -> int:
        try:
            return self.terms.index(term)
        except ValueError:
            raise UnknownVariable(f"term {term!r} not in model") from None

    def coef(self, term: str) -> float:
        return float(self.coefficients[self.index(term)])

    def se(self, term: str) -> float:
        return float(self.standard_errors[self.index(term)])

    def p(self, term: str) -> float:
        return float(self.p_values[self.index(term)])

    def conf_int(self, term: str, level: float = 0.95) -> tuple[float, float]:
        i = self.index(term)
        half = t_quantile(level, self.df) * self.standard_errors[i]
        b = self.coefficients[i]
        return float(b - half), float(b + half)

    def summary(self, term: str, level: float = 0.95) -> dict:
        lo, hi = self.conf_int(term, level)
        return {
            "term": term,
            "estimate": self.coef(term),
            "se": self.se(term),
            "ci": [lo, hi],
            "p": self.p(term),
        }

    def to_dict(self) -> dict:
        return {
            "terms": list(self.terms),
            "coefficients": [float(v) for v in self.coefficients],
            "standard_errors": [float(v) for v in self.standard_errors],
            "t_stats": [float(v) for v in self.t_stats],
            "p_values": [float(v) for v in self.p_values],
            "residual_sd": self.residual_sd,
            "n": self.n,
            "df": self.df,
            "r_squared": self.r_squared,
        }


def _design(design, names):
    if isinstance(design, Dataset):
        design = design.columns
    if isinstance(design, Mapping):
        names = list(design)
        cols = [np.asarray(design[k], dtype=float) for k in names]
        n = len(cols[0]) if cols else None
        mat = np.column_stack(cols) if cols else None
        return mat, names, n
    mat = np.asarray(design, dtype=float)
    if mat.ndim == 1:
        mat = mat[:, None]
    if names is None:
        names = [f"x{j + 1}" for j in range(mat.shape[1])]
    elif len(names) != mat.shape[1]:
        raise ValueError("names do not match the design columns")
    return mat, list(names), mat.shape[0]


def fit_ols(design, response, include_intercept: bool = True, names=None) -> OlsFit:
    """Least-squares fit with classical standard errors and two-sided t-tests.

    ``design`` is a name->column mapping, a :class:`Dataset`, or an ``(n, p)``
    array (optionally with ``names``). Solved through a column-pivoted QR of the
    norm-scaled design; a pivot below ``PIVOT_TOL`` times the largest pivot is
    treated as exact collinearity.
    """
    y = np.asarray(response, dtype=float)
    n = y.shape[0]
    mat, terms, n_design = _design(design, names)
    if n_design is not None and n_design != n:
        raise ValueError("design and response lengths differ")
    blocks = []
    if include_intercept:
        blocks.append(np.ones((n, 1)))
        terms = [INTERCEPT] + terms
    if mat is not None:
        blocks.append(mat)
    if not blocks:
        raise ValueError("model has no terms")
    X = np.hstack(blocks) if len(blocks) > 1 else blocks[0]
    p = X.shape[1]
    if n <= p:
        raise TooFewRows(f"{n} rows for {p} terms")

    norms = np.sqrt(np.einsum("ij,ij->j", X, X))
    if np.any(norms == 0):
        bad = [terms[j] for j in np.flatnonzero(norms == 0)]
        raise RankDeficient(f"all-zero design column(s): {bad}")
    Xs = X / norms
    Q, R, perm = linalg.qr(Xs, mode="economic", pivoting=True)
    diag = np.abs(np.diag(R))
    if diag[-1] <= PIVOT_TOL * diag[0]:
        raise RankDeficient("design matrix is rank deficient")

    beta_perm = linalg.solve_triangular(R, Q.T @ y)
    beta_s = np.empty(p)
    beta_s[perm] = beta_perm
    coef = beta_s / norms

    resid = y - X @ coef
    sse = float(resid @ resid)
    df = n - p
    scale = float(np.sqrt(y @ y)) or 1.0
    if math.sqrt(sse) <= 1e-12 * scale:
        raise ZeroResidualVariance("perfect fit; standard errors are undefined")
    sigma2 = sse / df

    Rinv = linalg.solve_triangular(R, np.eye(p))
    var_perm = np.einsum("ij,ij->i", Rinv, Rinv)
    var_s = np.empty(p)
    var_s[perm] = var_perm
    se = np.sqrt(sigma2 * var_s) / norms
    t = coef / se
    pv = p_two_sided(t, df)

    if include_intercept:
        sst = float(np.sum((y - y.mean()) ** 2))
    else:
        sst = float(y @ y)
    r2 = 1.0 - sse / sst if sst > 0 else 0.0
    return OlsFit(
        terms=tuple(terms),
        coefficients=coef,
        standard_errors=se,
        t_stats=t,
        p_values=np.atleast_1d(pv),
        residual_sd=math.sqrt(sigma2),
        n=n,
        df=df,
        r_squared=min(max(r2, 0.0), 1.0),
        residuals=resid,
    )


# ---------------------------------------------------------------------------
# Random streams


class RngStream:
    """Reproducible random stream keyed by ``(seed, stream_id)``.

    Bits come from PCG64 seeded through a ``SeedSequence`` whose spawn key is
    the stream id, so distinct ids give independent streams. Normals use the
    Marsaglia polar method.
    """

    def __init__(self, seed: int, stream_id: int = 0):
        if seed < 0 or stream_id < 0:
            raise ValueError("seed and stream_id must be non-negative")
        self.seed = int(seed)
        self.stream_id = int(stream_id)
        ss = np.random.SeedSequence(self.seed, spawn_key=(self.stream_id,))
        self._gen = np.random.Generator(np.random.PCG64(ss))

    def __repr__(self):
        return f"RngStream(seed={self.seed}, stream_id={self.stream_id})"

    def random(self, size=None):
        return self._gen.random(size)

    def uniform(self, a: float, b: float, size=None):
        if not a < b:
            raise BadRange(f"uniform({a}, {b}) needs a < b")
        return a + (b - a) * self._gen.random(size)

    def standard_normal(self, size=None):
        count = 1 if size is None else int(np.prod(size))
        out = np.empty(count)
        filled = 0
        while filled < count:
            need = count - filled
            pairs = int(need / 2 / 0.78) + 8
            u = 2.0 * self._gen.random(pairs) - 1.0
            v = 2.0 * self._gen.random(pairs) - 1.0
            s = u * u + v * v
            ok = (s > 0) & (s < 1)
            u, v, s = u[ok], v[ok], s[ok]
            f = np.sqrt(-2.0 * np.log(s) / s)
            draws = np.empty(2 * u.shape[0])
            draws[0::2] = u * f
            draws[1::2] = v * f
            take = min(need, draws.shape[0])
            out[filled:filled + take] = draws[:take]
            filled += take
        if size is None:
            return float(out[0])
        return out.reshape(size)

    def normal(self, mean: float = 0.0, sd: float = 1.0, size=None):
        if sd < 0:
            raise BadRange("sd must be non-negative")
        return mean + sd * self.standard_normal(size)

    def permutation(self, n: int) -> np.ndarray:
        return np.argsort(self._gen.random(n), kind="stable")


@dataclass(frozen=True)
class Uniform:
    a: float
    b: float

    def __post_init__(self):
        if not self.a < self.b:
            raise BadRange(f"uniform({self.a}, {self.b}) needs a < b")


@dataclass(frozen=True)
class StandardNormal:
    pass


def sample(rng: RngStream, dist, size=None):
    """Draw from ``Uniform(a, b)`` or ``StandardNormal()``."""
    if isinstance(dist, Uniform):
        return rng.uniform(dist.a, dist.b, size)
    if isinstance(dist, StandardNormal):
        return rng.standard_normal(size)
    raise TypeError(f"unsupported distribution {dist!r}")
