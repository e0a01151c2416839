"""Parsers for the experiment CSV/JSON files.

This package is a read-only consumer: it never recomputes any quantity,
it only checks that the files match the documented schemas and reshapes
them for drawing.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path


class SchemaError(Exception):
    """An input file does not match its documented header or key set."""


def _read_rows(path: Path, expected_header: list[str]) -> list[dict[str, str]]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != expected_header:
            raise SchemaError(
                f"{path}: expected header {expected_header}, got {reader.fieldnames}"
            )
        return list(reader)


@dataclass(frozen=True)
class Fig1Doc:
    theta_in: tuple[float, ...]
    theta_out: tuple[float, ...]
    eta: float
    interval: tuple[float, float]
    diameter: float
    collapsed: bool


def read_fig1(csv_path: str | Path, summary_path: str | Path) -> Fig1Doc:
    rows = _read_rows(Path(csv_path), ["theta_in", "theta_out"])
    try:
        doc = json.loads(Path(summary_path).read_text())
        return Fig1Doc(
            theta_in=tuple(float(r["theta_in"]) for r in rows),
            theta_out=tuple(float(r["theta_out"]) for r in rows),
            eta=float(doc["eta"]),
            interval=(float(doc["interval"][0]), float(doc["interval"][1])),
            diameter=float(doc["diameter"]),
            collapsed=bool(doc["collapsed"]),
        )
    except (KeyError, ValueError, TypeError) as e:
        raise SchemaError(f"{summary_path}: {e}") from e


@dataclass(frozen=True)
class BifurcationRow:
    eta: float
    k: int
    theta: float
    multiplier: complex
    stable: bool


def read_bifurcation(path: str | Path) -> list[BifurcationRow]:
    header = ["eta", "k", "point_index", "theta", "multiplier_real", "multiplier_imag", "stable"]
    rows = _read_rows(Path(path), header)
    try:
        return [
            BifurcationRow(
                eta=float(r["eta"]),
                k=int(r["k"]),
                theta=float(r["theta"]),
                multiplier=complex(float(r["multiplier_real"]), float(r["multiplier_imag"])),
                stable=r["stable"] == "1",
            )
            for r in rows
        ]
    except ValueError as e:
        raise SchemaError(f"{path}: {e}") from e


def branch_counts(rows: list[BifurcationRow]) -> dict[float, int]:
    """Number of distinct plotted orbit points per step-size."""
    counts: dict[float, set[float]] = {}
    for r in rows:
        counts.setdefault(r.eta, set()).add(round(r.theta, 6))
    return {eta: len(thetas) for eta, thetas in counts.items()}


@dataclass(frozen=True)
class StableMinimaRow:
    theta1: float
    theta2: float
    mu: float
    lam: float
    gd_stable: bool
    sgd_stable: bool


def read_stable_minima(path: str | Path) -> list[StableMinimaRow]:
    header = ["theta1", "theta2", "mu", "lambda", "gd_stable", "sgd_stable"]
    rows = _read_rows(Path(path), header)
    try:
        return [
            StableMinimaRow(
                theta1=float(r["theta1"]),
                theta2=float(r["theta2"]),
                mu=float(r["mu"]),
                lam=float(r["lambda"]),
                gd_stable=r["gd_stable"] == "1",
                sgd_stable=r["sgd_stable"] == "1",
            )
            for r in rows
        ]
    except ValueError as e:
        raise SchemaError(f"{path}: {e}") from e


@dataclass(frozen=True)
class ArcsDoc:
    gd: tuple[tuple[float, float], ...]
    sgd: tuple[tuple[float, float], ...]


def read_arcs(path: str | Path) -> ArcsDoc:
    try:
        doc = json.loads(Path(path).read_text())
        return ArcsDoc(
            gd=tuple((float(a), float(b)) for a, b in doc["gd"]),
            sgd=tuple((float(a), float(b)) for a, b in doc["sgd"]),
        )
    except (KeyError, ValueError, TypeError) as e:
        raise SchemaError(f"{path}: {e}") from e


@dataclass(frozen=True)
class TrajectoryRow:
    step: int
    theta: tuple[float, ...]
    loss: float
    grad_norm: float
    eta: float
    batch: tuple[int, ...] | None


def read_trajectory(path: str | Path) -> list[TrajectoryRow]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        names = reader.fieldnames or []
        theta_cols = [n for n in names if n.startswith("theta")]
        tail = ["loss", "grad_norm", "bp_hits", "eta", "batch"]
        if names[:1] != ["step"] or not theta_cols or names[1 + len(theta_cols):] != tail:
            raise SchemaError(f"{path}: unexpected header {names}")
        try:
            return [
                TrajectoryRow(
                    step=int(r["step"]),
                    theta=tuple(float(r[c]) for c in theta_cols),
                    loss=float(r["loss"]),
                    grad_norm=float(r["grad_norm"]),
                    eta=float(r["eta"]),
                    batch=tuple(int(i) for i in r["batch"].split(";")) if r["batch"] else None,
                )
                for r in reader
            ]
        except ValueError as e:
            raise SchemaError(f"{path}: {e}") from e
