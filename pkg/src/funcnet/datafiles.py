"""CSV ingestion, model persistence, and plot-data tables.

All files are comma-separated UTF-8 with '.' decimals and LF line
endings. Floats are written with shortest round-trip formatting so
save/load cycles are bit exact.
"""

from __future__ import annotations

import dataclasses
import json
import re

import numpy as np

from .basis import (
    BasisSystem,
    Covariate,
    FunctionalDataSet,
    RawCurves,
    basis_eval,
)
from .errors import ValidationError
from .model import FnnModel, FnnConfig, FunctionalWeight, functional_weights
from .network import LayerParams, LayerSpec, TrainConfig, TrainHistory
from .quadrature import DesignMatrix

MODEL_FORMAT_VERSION = 1
WEIGHT_GRID_POINTS = 200


def _fmt(x) -> str:
    return repr(float(x))


def _parse_number(token: str, line_no: int, col_no: int) -> float:
    try:
        return float(token)
    except ValueError:
        raise ValidationError(
            f"line {line_no}, column {col_no}: non-numeric value {token.strip()!r}"
        ) from None


def _read_rows(path) -> list[list[str]]:
    with open(path, encoding="utf-8") as fh:
        return [line.rstrip("\n").split(",") for line in fh if line.strip()]


def load_curves(path) -> RawCurves:
    """Read a curve file: a header row of argvals, then one row per curve."""
    rows = _read_rows(path)
    if not rows:
        raise ValidationError(f"{path}: empty file")
    header, body = rows[0], rows[1:]
    if not body:
        raise ValidationError(f"{path}: no observations (header only)")
    argvals = [
        _parse_number(tok, 1, j + 1) for j, tok in enumerate(header)
    ]
    values = []
    for i, row in enumerate(body, start=2):
        if len(row) != len(header):
            raise ValidationError(
                f"line {i}: ragged row ({len(row)} cells, expected {len(header)})"
            )
        values.append([_parse_number(tok, i, j + 1) for j, tok in enumerate(row)])
    try:
        return RawCurves(np.array(argvals), np.array(values))
    except ValidationError as exc:
        raise ValidationError(f"{path}: {exc}") from exc


def save_curves(raw: RawCurves, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(_fmt(v) for v in raw.argvals) + "\n")
        for row in raw.values:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


_BLOCK_RE = re.compile(
    r"#\s*covariate\s+(\d+)\s+kind=(\w+)\s+num_basis=(\d+)"
    r"\s+domain=([^:\s]+):([^:\s]+)(?:\s+order=(\d+))?"
)


def save_tensor(fd: FunctionalDataSet, path) -> None:
    """Coefficient-tensor file: a separator record, then M_k x N rows."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for k, cov in enumerate(fd.covariates):
            b = cov.basis
            a, bb = b.domain
            header = (
                f"# covariate {k + 1} kind={b.kind} num_basis={b.num_basis} "
                f"domain={_fmt(a)}:{_fmt(bb)}"
            )
            if b.kind == "bspline":
                header += f" order={b.order}"
            fh.write(header + "\n")
            for row in cov.coefs:
                fh.write(",".join(_fmt(v) for v in row) + "\n")


def load_tensor(path) -> FunctionalDataSet:
    with open(path, encoding="utf-8") as fh:
        lines = [line.rstrip("\n") for line in fh if line.strip()]
    covariates = []
    current = None  # (BasisSystem, rows)
    for line_no, line in enumerate(lines, start=1):
        if line.lstrip().startswith("#"):
            if current is not None:
                covariates.append(current)
            match = _BLOCK_RE.match(line.strip())
            if not match:
                raise ValidationError(
                    f"line {line_no}: malformed covariate separator record"
                )
            _, kind, m, a, b, order = match.groups()
            system = BasisSystem(
                kind, int(m), (float(a), float(b)),
                order=int(order) if order else 4,
            )
            current = (system, [])
            continue
        if current is None:
            raise ValidationError(
                f"line {line_no}: coefficient rows before any covariate record"
            )
        row = [
            _parse_number(tok, line_no, j + 1)
            for j, tok in enumerate(line.split(","))
        ]
        current[1].append(row)
    if current is not None:
        covariates.append(current)
    if not covariates:
        raise ValidationError(f"{path}: no covariate blocks found")
    built = []
    for system, rows in covariates:
        if len(rows) != system.num_basis:
            raise ValidationError(
                f"covariate block has {len(rows)} rows, expected "
                f"{system.num_basis}"
            )
        built.append(Covariate(system, np.array(rows)))
    return FunctionalDataSet(built)


def load_table(path) -> np.ndarray:
    """Plain numeric CSV without a header (responses, scalar covariates)."""
    rows = _read_rows(path)
    if not rows:
        raise ValidationError(f"{path}: empty file")
    width = len(rows[0])
    out = []
    for i, row in enumerate(rows, start=1):
        if len(row) != width:
            raise ValidationError(
                f"line {i}: ragged row ({len(row)} cells, expected {width})"
            )
        out.append([_parse_number(tok, i, j + 1) for j, tok in enumerate(row)])
    return np.array(out)


def load_labels(path) -> list[str]:
    """Single-column label file (classification responses)."""
    rows = _read_rows(path)
    if not rows:
        raise ValidationError(f"{path}: empty file")
    for i, row in enumerate(rows, start=1):
        if len(row) != 1:
            raise ValidationError(f"line {i}: expected a single label column")
    return [row[0].strip() for row in rows]


def save_table(arr, path, header: list[str] | None = None) -> None:
    arr = np.atleast_2d(np.asarray(arr, dtype=float))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        if header is not None:
            fh.write(",".join(header) + "\n")
        for row in arr:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


# -- model persistence --------------------------------------------------


def _basis_to_json(b: BasisSystem) -> dict:
    return {
        "kind": b.kind,
        "num_basis": b.num_basis,
        "domain": list(b.domain),
        "order": b.order,
    }


def _basis_from_json(doc) -> BasisSystem:
    return BasisSystem(
        doc["kind"], doc["num_basis"], tuple(doc["domain"]), order=doc["order"]
    )


def save_model(model: FnnModel, path) -> None:
    config = model.config
    doc = {
        "format_version": MODEL_FORMAT_VERSION,
        "config": {
            "domain_ranges": [list(d) for d in config.domain_ranges],
            "weight_bases": [_basis_to_json(b) for b in config.weight_bases],
            "hidden": [
                {
                    "units": s.units,
                    "activation": s.activation,
                    "dropout_rate": s.dropout_rate,
                }
                for s in config.hidden
            ],
            "response_mode": config.response_mode,
            "train": dataclasses.asdict(config.train),
            "raw_data": config.raw_data,
            "quad_points": config.quad_points,
        },
        "design": {
            "column_map": [list(tag) for tag in model.design.column_map],
            "mean": model.design.mean.tolist(),
            "scale": model.design.scale.tolist(),
        },
        "layers": [
            {
                "weights": layer.weights.tolist(),
                "bias": layer.bias.tolist(),
                "activation": layer.activation,
                "dropout_rate": layer.dropout_rate,
            }
            for layer in model.layers
        ],
        "history": {
            "train_loss": model.history.train_loss,
            "val_loss": model.history.val_loss,
            "stopped_epoch": model.history.stopped_epoch,
            "train_mse": model.history.train_mse,
        },
        "response_meta": model.response_meta,
        "smoothing_bases": [_basis_to_json(b) for b in model.smoothing_bases]
        if model.smoothing_bases
        else None,
    }
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")


def load_model(path) -> FnnModel:
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise ValidationError(f"{path}: corrupt model file ({exc})") from exc
    version = doc.get("format_version")
    if version != MODEL_FORMAT_VERSION:
        raise ValidationError(
            f"{path}: unsupported model format version {version!r} "
            f"(expected {MODEL_FORMAT_VERSION})"
        )
    try:
        cfg = doc["config"]
        config = FnnConfig(
            domain_ranges=tuple(tuple(d) for d in cfg["domain_ranges"]),
            weight_bases=tuple(_basis_from_json(b) for b in cfg["weight_bases"]),
            hidden=tuple(
                LayerSpec(s["units"], s["activation"], s["dropout_rate"])
                for s in cfg["hidden"]
            ),
            response_mode=cfg["response_mode"],
            train=TrainConfig(**cfg["train"]),
            raw_data=cfg["raw_data"],
            quad_points=cfg["quad_points"],
        )
        design = DesignMatrix(
            features=np.zeros((0, len(doc["design"]["column_map"]))),
            column_map=tuple(tuple(tag) for tag in doc["design"]["column_map"]),
            mean=np.array(doc["design"]["mean"]),
            scale=np.array(doc["design"]["scale"]),
        )
        layers = [
            LayerParams(
                np.array(layer["weights"]),
                np.array(layer["bias"]),
                layer["activation"],
                layer["dropout_rate"],
            )
            for layer in doc["layers"]
        ]
        history = TrainHistory(
            train_loss=doc["history"]["train_loss"],
            val_loss=doc["history"]["val_loss"],
            stopped_epoch=doc["history"]["stopped_epoch"],
            train_mse=doc["history"]["train_mse"],
        )
        smoothing = doc["smoothing_bases"]
        return FnnModel(
            config=config,
            design=design,
            layers=layers,
            history=history,
            response_meta=doc["response_meta"],
            smoothing_bases=tuple(_basis_from_json(b) for b in smoothing)
            if smoothing
            else None,
        )
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"{path}: corrupt model file ({exc})") from exc


# -- plot-data tables ----------------------------------------------------


def write_history(history: TrainHistory, path) -> None:
    """Table: epoch, train_loss, val_loss (blank when no validation)."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("epoch,train_loss,val_loss\n")
        for i, loss in enumerate(history.train_loss, start=1):
            val = _fmt(history.val_loss[i - 1]) if history.val_loss else ""
            fh.write(f"{i},{_fmt(loss)},{val}\n")


def write_weights(model_or_weights, path, grid_points: int = WEIGHT_GRID_POINTS) -> None:
    """Per-covariate weight curves on a regular grid."""
    if isinstance(model_or_weights, FnnModel):
        weights = functional_weights(model_or_weights)
    else:
        weights = list(model_or_weights)
    columns = []
    header = []
    for w in weights:
        a, b = w.basis.domain
        grid = np.linspace(a, b, grid_points)
        columns.append(grid)
        columns.append(w.eval(grid))
        header.append(f"t_{w.covariate + 1}")
        header.append(f"beta_{w.covariate + 1}")
    save_table(np.column_stack(columns), path, header=header)


def write_curves(grid, curves, path) -> None:
    """One row per grid point: t, then one column per predicted curve."""
    curves = np.atleast_2d(np.asarray(curves, dtype=float))
    header = ["t"] + [f"obs_{n + 1}" for n in range(curves.shape[0])]
    save_table(np.column_stack([np.asarray(grid), curves.T]), path, header=header)
