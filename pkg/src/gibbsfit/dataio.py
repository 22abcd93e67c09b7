"""Data ingestion: classical count tables (CSV) and quantum datasets (JSON).

Classical data arrive as two small tables: a counts file with header
``outcome,count[,reference_weight]`` and an optional observables file with
header ``outcome,<name1>,<name2>,...`` whose rows must cover exactly the
same outcomes.  Quantum data arrive as a single JSON document carrying the
reference state, named Hermitian observables (complex matrices split into
"re"/"im" parts), named levels over those observables, and sample means.
Both formats are plain text so datasets diff cleanly and reproduce exactly.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass

import numpy as np

from .errors import DataFormatError, ValidationError
from .inference import ExperimentData
from .levels import LevelOfDescription, make_level, trivial_level
from .state_space import DensityOperator, HermitianOperator

FORMAT_VERSION = 1

__all__ = [
    "ClassicalDataset",
    "QuantumDataset",
    "load_classical",
    "load_quantum",
    "resolve_level",
]


@dataclass(frozen=True, eq=False)
class ClassicalDataset:
    """Counts over labeled outcomes plus the measured (full) level."""

    outcomes: tuple[str, ...]
    counts: np.ndarray
    reference: DensityOperator
    observables: dict[str, HermitianOperator]
    levels: dict[str, LevelOfDescription]
    data: ExperimentData

    @property
    def n(self) -> float:
        return self.data.n


@dataclass(frozen=True, eq=False)
class QuantumDataset:
    """Reference state, named observables and levels, and sample means."""

    dim: int
    reference: DensityOperator
    observables: dict[str, HermitianOperator]
    levels: dict[str, LevelOfDescription]
    data: ExperimentData

    @property
    def n(self) -> float:
        return self.data.n


def _read_csv(path) -> tuple[list[str], list[list[str]]]:
    try:
        with open(path, newline="") as fh:
            rows = [row for row in csv.reader(fh)
                    if row and any(cell.strip() for cell in row)]
    except OSError as exc:
        raise DataFormatError(f"cannot read {path}: {exc}")
    if len(rows) < 2:
        raise DataFormatError(f"{path}: needs a header row and at least one data row")
    header = [h.strip() for h in rows[0]]
    body = [[cell.strip() for cell in row] for row in rows[1:]]
    for row in body:
        if len(row) != len(header):
            raise DataFormatError(f"{path}: row {row!r} does not match the header width")
    return header, body


def _parse_float(cell: str, path, what: str) -> float:
    try:
        return float(cell)
    except ValueError:
        raise DataFormatError(f"{path}: {what} {cell!r} is not a number")


def load_classical(counts_path, observables_path=None) -> ClassicalDataset:
    """Read a counts table and an optional observables table.

    The reference state is uniform unless a reference_weight column gives
    relative weights (normalized here).  The measured level is the full
    outcome-indicator span at that reference; named observable columns
    become diagonal Hermitians available for building coarser levels.
    """
    header, body = _read_csv(counts_path)
    if header[0] != "outcome" or header[1] != "count":
        raise DataFormatError(
            f"{counts_path}: header must start with 'outcome,count', got {header!r}")
    has_ref = len(header) > 2 and header[2] == "reference_weight"
    if len(header) > (3 if has_ref else 2):
        raise DataFormatError(f"{counts_path}: unexpected extra columns in {header!r}")

    outcomes: list[str] = []
    counts: list[float] = []
    weights: list[float] = []
    for row in body:
        if row[0] in outcomes:
            raise DataFormatError(f"{counts_path}: duplicate outcome {row[0]!r}")
        outcomes.append(row[0])
        c = _parse_float(row[1], counts_path, "count")
        if c < 0:
            raise DataFormatError(f"{counts_path}: negative count for outcome {row[0]!r}")
        counts.append(c)
        if has_ref:
            w = _parse_float(row[2], counts_path, "reference weight")
            if w <= 0:
                raise DataFormatError(
                    f"{counts_path}: reference weight must be positive for {row[0]!r}")
            weights.append(w)
    if len(outcomes) < 2:
        raise DataFormatError(f"{counts_path}: a single outcome is a degenerate sample space")
    counts_arr = np.asarray(counts)
    if counts_arr.sum() <= 0:
        raise DataFormatError(f"{counts_path}: counts total zero")

    if has_ref:
        w = np.asarray(weights)
        reference = DensityOperator.classical(w / w.sum())
    else:
        reference = DensityOperator.classical(np.full(len(outcomes), 1.0 / len(outcomes)))

    observables: dict[str, HermitianOperator] = {}
    if observables_path is not None:
        oh, ob = _read_csv(observables_path)
        if oh[0] != "outcome":
            raise DataFormatError(
                f"{observables_path}: first column must be 'outcome', got {oh[0]!r}")
        names = oh[1:]
        if len(set(names)) != len(names) or not names:
            raise DataFormatError(f"{observables_path}: observable names must be "
                                  "nonempty and unique")
        table = {row[0]: row[1:] for row in ob}
        if set(table) != set(outcomes):
            raise DataFormatError(
                f"{observables_path}: outcomes do not match {counts_path}")
        for j, name in enumerate(names):
            vals = [_parse_float(table[o][j], observables_path, f"{name} value")
                    for o in outcomes]
            observables[name] = HermitianOperator.from_diagonal(vals)

    d = len(outcomes)
    eye = np.eye(d)
    full = make_level([HermitianOperator.from_diagonal(eye[k]) for k in range(d)],
                      "kmb", reference, label="full")
    data = ExperimentData.from_counts(counts_arr, full)
    levels = {"full": full, "O": trivial_level(d, "kmb", reference)}
    return ClassicalDataset(outcomes=tuple(outcomes), counts=counts_arr,
                            reference=reference, observables=observables,
                            levels=levels, data=data)


def _parse_matrix(obj, dim: int, path, what: str) -> np.ndarray:
    if not isinstance(obj, dict) or "re" not in obj:
        raise DataFormatError(f"{path}: {what} must be an object with 're' (and 'im')")
    re = np.asarray(obj["re"], dtype=float)
    im = np.asarray(obj.get("im", np.zeros_like(re)), dtype=float)
    if re.shape != (dim, dim) or im.shape != (dim, dim):
        raise DataFormatError(f"{path}: {what} must be {dim}x{dim}")
    return re + 1j * im


def load_quantum(path) -> QuantumDataset:
    """Read a quantum dataset: reference, observables, levels, sample means.

    The measured level spans every observable that carries a sample mean,
    in file order; its retained generators define the order of the means
    vector.  Named levels are orthonormalized at the reference.
    """
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise DataFormatError(f"cannot read {path}: {exc}")
    except json.JSONDecodeError as exc:
        raise DataFormatError(f"{path}: invalid JSON: {exc}")
    if not isinstance(doc, dict):
        raise DataFormatError(f"{path}: top level must be an object")
    version = doc.get("format_version")
    if version != FORMAT_VERSION:
        raise DataFormatError(
            f"{path}: unsupported format_version {version!r} (expected {FORMAT_VERSION})")
    for key in ("dim", "observables", "sample_means", "N"):
        if key not in doc:
            raise DataFormatError(f"{path}: missing required key {key!r}")
    dim = doc["dim"]
    if not isinstance(dim, int) or dim < 2:
        raise DataFormatError(f"{path}: dim must be an integer >= 2")

    ref_spec = doc.get("reference", "uniform")
    if ref_spec == "uniform":
        reference = DensityOperator.quantum(np.eye(dim, dtype=complex) / dim)
    else:
        try:
            reference = DensityOperator.quantum(_parse_matrix(ref_spec, dim, path, "reference"))
        except ValidationError as exc:
            raise DataFormatError(f"{path}: reference: {exc}")

    observables: dict[str, HermitianOperator] = {}
    for entry in doc["observables"]:
        if not isinstance(entry, dict) or "name" not in entry:
            raise DataFormatError(f"{path}: each observable needs a 'name'")
        name = entry["name"]
        if name in observables:
            raise DataFormatError(f"{path}: duplicate observable name {name!r}")
        try:
            observables[name] = HermitianOperator.from_matrix(
                _parse_matrix(entry, dim, path, f"observable {name!r}"), atol=1e-9)
        except ValidationError as exc:
            raise DataFormatError(f"{path}: observable {name!r}: {exc}")

    means_map = doc["sample_means"]
    unknown = set(means_map) - set(observables)
    if unknown:
        raise DataFormatError(f"{path}: sample means for unknown observables {sorted(unknown)}")
    measured_names = [n for n in observables if n in means_map]
    if not measured_names:
        raise DataFormatError(f"{path}: no observable carries a sample mean")
    n_shots = doc["N"]
    if not isinstance(n_shots, (int, float)) or n_shots < 0:
        raise DataFormatError(f"{path}: N must be a nonnegative number")

    measured = make_level([observables[n] for n in measured_names],
                          "kmb", reference, label="F")
    means = np.array([float(means_map[measured_names[i]]) for i in measured.retained])
    data = ExperimentData(level=measured, means=means, n=float(n_shots))

    levels: dict[str, LevelOfDescription] = {
        "full": measured, "F": measured, "O": trivial_level(dim, "kmb", reference)}
    for name, obs_names in doc.get("levels", {}).items():
        missing = [o for o in obs_names if o not in observables]
        if missing:
            raise DataFormatError(f"{path}: level {name!r} uses unknown observables {missing}")
        levels[name] = make_level([observables[o] for o in obs_names],
                                  "kmb", reference, label=name)
    return QuantumDataset(dim=dim, reference=reference, observables=observables,
                          levels=levels, data=data)


def resolve_level(dataset, spec: str) -> LevelOfDescription:
    """Turn a CLI level spec into a level: a named level ("O" and "full"
    always exist), or a comma-separated list of observable names."""
    spec = spec.strip()
    if spec in dataset.levels:
        return dataset.levels[spec]
    names = [s.strip() for s in spec.split(",") if s.strip()]
    missing = [n for n in names if n not in dataset.observables]
    if not names or missing:
        raise DataFormatError(
            f"cannot resolve level {spec!r}: not a named level and "
            f"unknown observables {missing or spec!r}")
    return make_level([dataset.observables[n] for n in names],
                      "kmb", dataset.reference, label=spec)
