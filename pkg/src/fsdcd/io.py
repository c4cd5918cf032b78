"""Instance files and trace CSVs.

Instances are ``.npz`` archives written with a fixed zip timestamp so the
same problem always produces byte-identical files.
"""

from __future__ import annotations

import csv
import io
import json
import zipfile
from pathlib import Path
from typing import Iterable

import numpy as np

from fsdcd.linalg import ProblemInstance
from fsdcd.metrics import TraceRecord

_EPOCH = (1980, 1, 1, 0, 0, 0)


def save_instance(problem: ProblemInstance, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    meta = {"family": problem.family, "seed": problem.seed, "shape": list(problem.shape), **problem.meta}
    arrays = {"A": problem.A, "b": problem.b, "meta": np.array(json.dumps(meta, sort_keys=True))}
    if problem.solution is not None:
        arrays["solution"] = problem.solution
    try:
        with zipfile.ZipFile(path, "w", compression=zipfile.ZIP_STORED) as zf:
            for name, arr in arrays.items():
                buf = io.BytesIO()
                np.lib.format.write_array(buf, np.require(arr, requirements="C"), allow_pickle=False)
                info = zipfile.ZipInfo(f"{name}.npy", date_time=_EPOCH)
                info.external_attr = 0o644 << 16
                zf.writestr(info, buf.getvalue())
    except OSError as exc:
        raise OSError(f"cannot write instance file {path}: {exc}") from exc
    return path


def load_instance(path: str | Path) -> ProblemInstance:
    path = Path(path)
    try:
        with np.load(path, allow_pickle=False) as data:
            meta = json.loads(str(data["meta"].reshape(-1)[0]))
            solution = data["solution"] if "solution" in data.files else None
            A, b = data["A"], data["b"]
    except (OSError, ValueError, KeyError) as exc:
        raise OSError(f"cannot read instance file {path}: {exc}") from exc
    family = meta.pop("family", "custom")
    seed = meta.pop("seed", 0)
    meta.pop("shape", None)
    return ProblemInstance(A=A, b=b, solution=solution, family=family, seed=seed, meta=meta)


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))  # shortest round-trip form, always a dot decimal separator
    return str(v)


def write_trace_csv(records: Iterable[TraceRecord], path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    names = TraceRecord.field_names()
    with open(path, "w", newline="", encoding="ascii") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(names)
        for rec in records:
            w.writerow([_fmt(getattr(rec, n)) for n in names])
    return path


def read_trace_csv(path: str | Path) -> list[TraceRecord]:
    out = []
    with open(path, newline="", encoding="ascii") as fh:
        for row in csv.DictReader(fh):
            try:
                out.append(
                    TraceRecord(
                        iter=int(row["iter"]),
                        epochs=float(row["epochs"]),
                        rse=float(row["rse"]),
                        bregman=float(row["bregman"]),
                        residual_norm=float(row["residual_norm"]),
                        alpha=float(row["alpha"]),
                        beta=float(row["beta"]),
                        skipped=row["skipped"] == "1",
                    )
                )
            except (KeyError, TypeError, ValueError) as exc:
                raise OSError(f"{path}: malformed trace row {row!r}") from exc
    return out


def write_gnuplot(records: Iterable[TraceRecord], path: str | Path) -> Path:
    """Whitespace-separated ``epochs rse bregman residual`` columns."""
    path = Path(path)
    with open(path, "w", encoding="ascii") as fh:
        fh.write("# epochs rse bregman residual_norm\n")
        for rec in records:
            fh.write(f"{rec.epochs!r} {rec.rse!r} {rec.bregman!r} {rec.residual_norm!r}\n")
    return path
