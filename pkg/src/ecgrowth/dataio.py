"""Annual series containers, CSV ingestion and fitted-model documents.

Growth rates and shares are held in percentage points (7.5 means 7.5%).
A manifest maps dataset roles to CSV columns; a column declared with unit
``fraction`` is multiplied by 100 on load.
"""

from __future__ import annotations

import csv
import json
import math
import os
import tempfile
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .errors import DataError, SchemaError, YearGapError
from .linreg import FittedModel

UNITS = ("percent", "fraction", "level")
ROLES = ("gdp_agr", "fai_agr", "ec_agr", "secondary_share", "ec_level")
MODEL_SCHEMA_VERSION = 1


@dataclass(frozen=True)
class AnnualSeries:
    name: str
    start_year: int
    values: tuple[float, ...]
    unit: str = "percent"

    def __post_init__(self):
        if self.unit not in UNITS:
            raise DataError(f"series {self.name!r}: unknown unit {self.unit!r}")
        if len(self.values) == 0:
            raise DataError(f"series {self.name!r} is empty")
        object.__setattr__(self, "start_year", int(self.start_year))
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))

    @classmethod
    def from_mapping(cls, name: str, data: Mapping[int, float], unit: str = "percent") -> "AnnualSeries":
        if not data:
            raise DataError(f"series {name!r} is empty")
        years = sorted(data)
        _check_contiguous(name, years)
        return cls(name, years[0], tuple(data[y] for y in years), unit)

    @property
    def end_year(self) -> int:
        return self.start_year + len(self.values) - 1

    @property
    def years(self) -> range:
        return range(self.start_year, self.end_year + 1)

    def __len__(self) -> int:
        return len(self.values)

    def __contains__(self, year: int) -> bool:
        return self.start_year <= year <= self.end_year

    def __getitem__(self, year: int) -> float:
        if year not in self:
            raise DataError(f"series {self.name!r} has no value for {year} (covers {self.start_year}-{self.end_year})")
        return self.values[year - self.start_year]

    def items(self) -> Iterable[tuple[int, float]]:
        return zip(self.years, self.values)

    def window(self, start: int, end: int) -> "AnnualSeries":
        if start not in self or end not in self or start > end:
            raise DataError(
                f"series {self.name!r} covers {self.start_year}-{self.end_year}, requested {start}-{end}"
            )
        return AnnualSeries(self.name, start, self.values[start - self.start_year:end - self.start_year + 1], self.unit)


@dataclass(frozen=True)
class MacroDataset:
    series: Mapping[str, AnnualSeries] = field(default_factory=dict)

    def __post_init__(self):
        unknown = set(self.series) - set(ROLES)
        if unknown:
            raise DataError(f"unknown dataset roles: {sorted(unknown)}")
        object.__setattr__(self, "series", dict(self.series))

    def __contains__(self, role: str) -> bool:
        return role in self.series

    def __getitem__(self, role: str) -> AnnualSeries:
        try:
            return self.series[role]
        except KeyError:
            raise DataError(f"dataset has no {role!r} series") from None

    def require(self, *roles: str) -> None:
        missing = [r for r in roles if r not in self.series]
        if missing:
            raise DataError(f"dataset lacks required series: {', '.join(missing)}")

    def check_overlap(self, roles: Sequence[str], start: int, end: int) -> None:
        self.require(*roles)
        for role in roles:
            s = self.series[role]
            if start not in s or end not in s:
                raise DataError(
                    f"{role} covers {s.start_year}-{s.end_year}, which does not span {start}-{end}"
                )


def _check_contiguous(name: str, years: Sequence[int]) -> None:
    for prev, cur in zip(years, years[1:]):
        if cur != prev + 1:
            missing = list(range(prev + 1, cur)) if cur > prev else []
            what = ", ".join(str(y) for y in missing) if missing else f"{cur} after {prev}"
            raise YearGapError(f"series {name!r}: year gap, missing {what}")


def read_manifest(manifest) -> dict:
    """Accept a manifest dict or a path to a JSON manifest file."""
    if isinstance(manifest, (str, os.PathLike)):
        path = Path(manifest)
        if not path.is_file():
            raise DataError(f"manifest not found: {path}")
        try:
            manifest = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise DataError(f"{path}: malformed manifest ({exc})") from exc
    if not isinstance(manifest, Mapping) or not isinstance(manifest.get("roles"), Mapping):
        raise DataError("manifest must be an object with a 'roles' mapping")
    return dict(manifest)


def _parse_number(text: str, path: Path, line: int, column: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise DataError(f"{path}:{line}: column {column!r}: non-numeric cell {text!r}") from None
    if not math.isfinite(value):
        raise DataError(f"{path}:{line}: column {column!r}: non-finite cell {text!r}")
    return value


def _read_columns(path: Path, year_column: str, wanted: Sequence[str]) -> dict[str, dict[int, float]]:
    if not path.is_file():
        raise DataError(f"data file not found: {path}")
    with path.open(newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        for col in (year_column, *wanted):
            if col not in header:
                raise DataError(f"{path}: missing column {col!r} (header: {', '.join(header)})")
        out: dict[str, dict[int, float]] = {c: {} for c in wanted}
        last_year = None
        for row in reader:
            line = reader.line_num
            raw_year = (row[year_column] or "").strip()
            try:
                year = int(raw_year)
            except ValueError:
                raise DataError(f"{path}:{line}: column {year_column!r}: bad year {raw_year!r}") from None
            if last_year is not None and year <= last_year:
                raise DataError(f"{path}:{line}: years must increase strictly ({year} after {last_year})")
            last_year = year
            for col in wanted:
                cell = (row[col] or "").strip()
                if cell:
                    out[col][year] = _parse_number(cell, path, line, col)
    return out


def load_dataset(path, manifest) -> MacroDataset:
    """Load a wide CSV (or one CSV per role) described by ``manifest``.

    Manifest layout::

        {"year_column": "year",
         "roles": {"gdp_agr": {"column": "gdp_agr", "unit": "percent"},
                   "ec_level": {"column": "ec", "unit": "level", "file": "ec.csv"}}}

    Relative ``file`` entries resolve against the directory of ``path``.
    """
    manifest = read_manifest(manifest)
    path = Path(path)
    year_column = manifest.get("year_column", "year")
    by_file: dict[Path, list[tuple[str, str, str]]] = {}
    for role, spec in manifest["roles"].items():
        if role not in ROLES:
            raise DataError(f"manifest: unknown role {role!r} (expected one of {', '.join(ROLES)})")
        if isinstance(spec, str):
            spec = {"column": spec}
        unit = spec.get("unit")
        if unit is None:
            raise DataError(f"manifest: role {role!r} has no unit tag")
        if unit not in UNITS:
            raise DataError(f"manifest: role {role!r} has unknown unit {unit!r}")
        column = spec.get("column", role)
        target = path.parent / spec["file"] if spec.get("file") else path
        by_file.setdefault(target, []).append((role, column, unit))

    series = {}
    for target, entries in by_file.items():
        columns = _read_columns(target, year_column, [c for _, c, _ in entries])
        for role, column, unit in entries:
            data = columns[column]
            if not data:
                raise DataError(f"{target}: column {column!r} for role {role!r} has no values")
            if unit == "fraction":
                data = {y: v * 100.0 for y, v in data.items()}
                unit = "percent"
            series[role] = AnnualSeries.from_mapping(role, data, unit)
    return MacroDataset(series)


def write_text_atomic(path: Path, text: str) -> None:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    except OSError as exc:
        raise DataError(f"cannot write {path}: {exc}") from exc
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except OSError as exc:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise DataError(f"cannot write {path}: {exc}") from exc


def save_dataset(dataset: MacroDataset, path, year_column: str = "year") -> dict:
    """Write a wide CSV and return the manifest that reads it back."""
    roles = [r for r in ROLES if r in dataset]
    if not roles:
        raise DataError("cannot save an empty dataset")
    start = min(dataset[r].start_year for r in roles)
    end = max(dataset[r].end_year for r in roles)
    lines = [",".join([year_column, *roles])]
    for year in range(start, end + 1):
        cells = [str(year)]
        for r in roles:
            s = dataset[r]
            cells.append(repr(s[year]) if year in s else "")
        lines.append(",".join(cells))
    write_text_atomic(Path(path), "\n".join(lines) + "\n")
    return {
        "year_column": year_column,
        "roles": {r: {"column": r, "unit": dataset[r].unit} for r in roles},
    }


def bundled_path(name: str) -> Path:
    return Path(str(resources.files("ecgrowth") / "data" / name))


def load_bundled() -> MacroDataset:
    """The reference dataset shipped with the package."""
    return load_dataset(bundled_path("china_macro.csv"), bundled_path("china_macro.manifest.json"))


def _finite_list(label: str, values) -> list | None:
    if values is None:
        return None
    out = [float(v) for v in values]
    if not all(math.isfinite(v) for v in out):
        raise DataError(f"model field {label!r} contains non-finite values; refusing to save")
    return out


def model_to_document(model: FittedModel) -> dict:
    doc = {
        "schema_version": MODEL_SCHEMA_VERSION,
        "fit_start_year": model.fit_years[0] if model.fit_years else None,
        "fit_end_year": model.fit_years[1] if model.fit_years else None,
        "predictors": list(model.predictor_names),
        "coefficients": _finite_list("coefficients", model.coefficients),
        "std_errors": _finite_list("std_errors", model.std_errors),
        "t_stats": _finite_list("t_stats", model.t_stats),
        "p_values": _finite_list("p_values", model.p_values),
        "adj_r2": _finite_list("adj_r2", [model.adj_r2])[0] if model.adj_r2 is not None else None,
        "residuals": [
            {"year": y, "value": v}
            for y, v in zip(model.residual_years, _finite_list("residuals", model.residuals))
        ],
    }
    if not doc["coefficients"]:
        raise SchemaError("model has no coefficients (p >= 1 required)")
    return doc


def model_from_document(doc) -> FittedModel:
    if not isinstance(doc, Mapping):
        raise SchemaError("model document must be a JSON object")
    version = doc.get("schema_version")
    if version != MODEL_SCHEMA_VERSION:
        raise SchemaError(f"model schema_version {version!r} unsupported (expected {MODEL_SCHEMA_VERSION})")
    try:
        names = tuple(str(n) for n in doc["predictors"])
        coefs = tuple(float(c) for c in doc["coefficients"])
        if not coefs:
            raise SchemaError("model has no coefficients (p >= 1 required)")

        def opt(key):
            v = doc.get(key)
            return None if v is None else tuple(float(x) for x in v)

        start, end = doc.get("fit_start_year"), doc.get("fit_end_year")
        residuals = doc.get("residuals") or []
        adj = doc.get("adj_r2")
        return FittedModel(
            predictor_names=names,
            coefficients=coefs,
            std_errors=opt("std_errors"),
            t_stats=opt("t_stats"),
            p_values=opt("p_values"),
            adj_r2=None if adj is None else float(adj),
            fit_years=None if start is None else (int(start), int(end)),
            residual_years=tuple(int(r["year"]) for r in residuals),
            residuals=tuple(float(r["value"]) for r in residuals),
        )
    except SchemaError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"malformed model document: {exc}") from exc


def dump_model(model: FittedModel) -> str:
    return json.dumps(model_to_document(model), indent=2) + "\n"


def save_model(model: FittedModel, path) -> None:
    write_text_atomic(Path(path), dump_model(model))


def load_model(path) -> FittedModel:
    path = Path(path)
    if not path.is_file():
        raise DataError(f"model file not found: {path}")
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: malformed model document ({exc})") from exc
    return model_from_document(doc)
