"""Tabular data ingestion and a synthetic intergenerational-income dataset.

Input files are headered CSV, UTF-8, '.' decimal separator.  Every cell is
parsed as a float; the first failing cell is reported by data row (1-based,
header excluded) and column name.

The synthetic generator produces a stylized parent-child income panel with
the columns

    pincome  parent family income in thousands (lognormal)
    pmale    family head is male (0/1)
    pwhite   family head is white (0/1)
    pedu     parent years of schooling (integer, 0..17)
    cincome  child family income in thousands (lognormal)
    cmale    child is male (0/1)
    cbirth   child birth year (integer, 1938..1986)
    cedu     child years of schooling (integer, 7..17)

Incomes follow a log-linear design in years of schooling, and the loading of
child log income on the parent income shock declines with child schooling,
so education-raising scenarios weaken the parent-child association.  The
coding is documented here and makes no claim of matching any survey's
microdata; it exists so the scenario machinery is runnable end to end.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .copula import ObservationSample


class DataError(ValueError):
    """Malformed or unusable tabular input; message names row/column."""


SYNTH_COLUMNS = (
    "pincome", "pmale", "pwhite", "pedu", "cincome", "cmale", "cbirth", "cedu",
)


@dataclass
class Table:
    """Column-major numeric table: ordered names plus one float array each."""

    names: tuple
    columns: dict

    @property
    def n(self):
        return self.columns[self.names[0]].shape[0] if self.names else 0

    def column(self, name):
        if name not in self.columns:
            raise DataError(f"column {name!r} not found; have {list(self.names)}")
        return self.columns[name]


@dataclass(frozen=True)
class ColumnRoles:
    """Which columns play which role when assembling an ObservationSample.

    ``discrete`` must be a subset of ``x``; those coordinates are matched
    exactly by the kernel weights instead of smoothed.  ``xstar`` names
    explicit counterfactual columns, one per entry of ``x`` and in the same
    order; leave it empty when a scenario produces the manipulation instead.
    """

    y1: str
    y2: str
    x: tuple
    discrete: tuple = ()
    xstar: tuple = ()

    def __post_init__(self):
        extra = [c for c in self.discrete if c not in self.x]
        if extra:
            raise DataError(f"discrete columns {extra} are not covariate columns")
        if self.xstar and len(self.xstar) != len(self.x):
            raise DataError(
                f"need one xstar column per covariate column: "
                f"{len(self.xstar)} vs {len(self.x)}"
            )

    def required_columns(self):
        return (self.y1, self.y2) + tuple(self.x) + tuple(self.xstar)


def ingest(path, roles=None):
    """Read a headered CSV into a Table, parsing every cell as a float.

    With ``roles`` the header is checked for all required columns up front.
    Raises DataError for a missing column, a non-numeric cell (reported as
    data row and column name) or fewer than two data rows.
    """
    try:
        fh = open(path, "r", encoding="utf-8", newline="")
    except OSError as exc:
        raise DataError(f"cannot open {path}: {exc}") from exc
    with fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path} is empty") from None
        header = [name.strip() for name in header]
        if roles is not None:
            missing = [c for c in roles.required_columns() if c not in header]
            if missing:
                raise DataError(f"missing required columns {missing} in {path}")
        raw = [[] for _ in header]
        for i, cells in enumerate(reader, start=1):
            if not cells or (len(cells) == 1 and not cells[0].strip()):
                continue  # ignore trailing blank lines
            if len(cells) != len(header):
                raise DataError(
                    f"row {i} has {len(cells)} cells, expected {len(header)}"
                )
            for j, cell in enumerate(cells):
                try:
                    raw[j].append(float(cell))
                except ValueError:
                    raise DataError(
                        f"non-numeric value {cell.strip()!r} at "
                        f"(row {i}, {header[j]})"
                    ) from None
    n = len(raw[0]) if header else 0
    if n < 2:
        raise DataError(f"need at least 2 data rows, got {n}")
    columns = {name: np.asarray(col, dtype=float) for name, col in zip(header, raw)}
    return Table(names=tuple(header), columns=columns)


def build_sample(table, roles, xstar_columns=None):
    """Assemble an ObservationSample from role columns.

    ``xstar_columns`` is a dict of already-manipulated covariate columns (a
    scenario's output); when absent, ``roles.xstar`` must name explicit
    columns in the table.
    """
    y1 = table.column(roles.y1)
    y2 = table.column(roles.y2)
    x = np.column_stack([table.column(c) for c in roles.x])
    if xstar_columns is not None:
        xstar = np.column_stack([xstar_columns[c] for c in roles.x])
    elif roles.xstar:
        xstar = np.column_stack([table.column(c) for c in roles.xstar])
    else:
        raise DataError(
            "no counterfactual covariates: pass a scenario or xstar columns"
        )
    mask = np.array([c in roles.discrete for c in roles.x], dtype=bool)
    return ObservationSample(y1=y1, y2=y2, x=x, xstar=xstar, discrete_mask=mask)


def _format_cell(value):
    # integers print bare so binary/cedu-style columns round-trip tidily;
    # everything else uses repr for an exact float round-trip
    if value == int(value) and abs(value) < 1e15:
        return str(int(value))
    return repr(value)


def write_table(table, path):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(table.names)
        cols = [table.columns[name] for name in table.names]
        for i in range(table.n):
            writer.writerow([_format_cell(float(col[i])) for col in cols])


def write_grid_csv(grid, path):
    """Emit a copula grid in long format (u1, u2, value), exact round-trip."""
    m = grid.m
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("u1,u2,value\n")
        for i in range(m + 1):
            for j in range(m + 1):
                fh.write(f"{i / m!r},{j / m!r},{float(grid.values[i, j])!r}\n")


def read_grid_csv(path):
    """Rebuild (m, values) from a long-format grid CSV."""
    us, vals = [], []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != ["u1", "u2", "value"]:
            raise DataError(f"unexpected grid header {header} in {path}")
        for cells in reader:
            us.append(float(cells[0]))
            vals.append(float(cells[2]))
    count = len(vals)
    m = int(round(count ** 0.5)) - 1
    if (m + 1) * (m + 1) != count:
        raise DataError(f"grid file {path} has {count} rows, not a full grid")
    values = np.asarray(vals, dtype=float).reshape(m + 1, m + 1)
    return m, values


# --- synthetic generator ------------------------------------------------------

@dataclass(frozen=True)
class SynthConfig:
    """Knobs of the synthetic design; defaults echo a PSID-like sample."""

    n: int = 3895
    seed: int = 20240801
    parent_edu_mean: float = 13.1
    parent_edu_sd: float = 2.85
    child_edu_base: float = 14.45
    child_edu_sd: float = 1.9
    edu_persistence: float = 0.35
    log_income_base: float = 4.304  # log median income, thousands
    parent_edu_return: float = 0.06
    child_edu_return: float = 0.05
    parent_log_sd: float = 0.46
    child_log_sd: float = 0.58
    # loading of child log income on the parent income shock, by child edu
    mobility_intercept: float = 0.30
    mobility_slope: float = 0.025


def synth_table(config=None):
    """Draw the synthetic dataset as a Table; deterministic given the seed."""
    cfg = config if config is not None else SynthConfig()
    if cfg.n < 2:
        raise DataError(f"need n >= 2 synthetic rows, got {cfg.n}")
    rng = np.random.default_rng(cfg.seed)
    n = cfg.n

    pedu = np.clip(np.rint(rng.normal(cfg.parent_edu_mean, cfg.parent_edu_sd, n)), 0, 17)
    cedu = np.clip(
        np.rint(
            cfg.child_edu_base
            + cfg.edu_persistence * (pedu - cfg.parent_edu_mean)
            + rng.normal(0.0, cfg.child_edu_sd, n)
        ),
        7,
        17,
    )
    pmale = (rng.random(n) < 0.891).astype(float)
    pwhite = (rng.random(n) < 0.889).astype(float)
    cmale = (rng.random(n) < 0.486).astype(float)
    cbirth = np.clip(np.rint(rng.normal(1968.0, 10.5, n)), 1938, 1986)

    z_parent = rng.standard_normal(n)
    log_p = (
        cfg.log_income_base
        + cfg.parent_edu_return * (pedu - cfg.parent_edu_mean)
        + 0.05 * pmale
        + cfg.parent_log_sd * z_parent
    )
    # association between the incomes declines with child schooling
    loading = np.clip(
        cfg.mobility_intercept - cfg.mobility_slope * (cedu - 12.0), 0.02, 0.45
    )
    resid_sd = np.sqrt(cfg.child_log_sd ** 2 - loading ** 2)
    log_c = (
        cfg.log_income_base
        + cfg.child_edu_return * (cedu - cfg.child_edu_base)
        + 0.03 * cmale
        + loading * z_parent
        + resid_sd * rng.standard_normal(n)
    )
    columns = {
        "pincome": np.exp(log_p),
        "pmale": pmale,
        "pwhite": pwhite,
        "pedu": pedu,
        "cincome": np.exp(log_c),
        "cmale": cmale,
        "cbirth": cbirth,
        "cedu": cedu,
    }
    return Table(names=SYNTH_COLUMNS, columns=columns)


def default_synth_roles():
    """Role assignment for the synthetic columns: incomes as outcomes, the
    six family characteristics as covariates with the binary ones discrete."""
    return ColumnRoles(
        y1="pincome",
        y2="cincome",
        x=("pmale", "pwhite", "pedu", "cmale", "cbirth", "cedu"),
        discrete=("pmale", "pwhite", "cmale"),
    )
