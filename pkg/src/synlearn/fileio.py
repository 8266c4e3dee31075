"""File formats shared by the CLI and the tests.

CSV with a header row and 17-significant-digit decimals (lossless round trip
for doubles), JSON reports, and 8-bit binary PGM grid dumps with a JSON
sidecar recording the normalization. All writes go through a temp file and
an atomic rename.
"""

import json
import os
import tempfile

import numpy as np

from .fnn import SupervisedSet
from .mixture import Dataset

_FMT = "%.17g"


def _atomic_write_bytes(path: str, payload: bytes) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "wb") as handle:
            handle.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_json(obj, path: str) -> None:
    """Deterministic JSON: sorted keys, fixed separators, trailing newline."""
    text = json.dumps(obj, sort_keys=True, indent=2, separators=(",", ": ")) + "\n"
    _atomic_write_bytes(path, text.encode("utf-8"))


def _format_csv(header: list, matrix: np.ndarray, int_cols: set) -> bytes:
    lines = [",".join(header)]
    for row in matrix:
        cells = [
            str(int(val)) if col in int_cols else _FMT % val
            for col, val in enumerate(row)
        ]
        lines.append(",".join(cells))
    return ("\n".join(lines) + "\n").encode("utf-8")


def write_csv(data, path: str) -> None:
    """Write a Dataset (x* columns, optional label), a SupervisedSet
    (x* then z* columns), or a bare matrix (c* columns)."""
    if isinstance(data, Dataset):
        header = [f"x{j}" for j in range(data.dim)]
        matrix = data.points
        int_cols = set()
        if data.labels is not None:
            header.append("label")
            matrix = np.column_stack([matrix, data.labels.astype(float)])
            int_cols = {len(header) - 1}
        payload = _format_csv(header, matrix, int_cols)
    elif isinstance(data, SupervisedSet):
        d = data.inputs.shape[1]
        m = data.targets.shape[1]
        header = [f"x{j}" for j in range(d)] + [f"z{j}" for j in range(m)]
        payload = _format_csv(header, np.column_stack([data.inputs, data.targets]), set())
    else:
        matrix = np.atleast_2d(np.asarray(data, dtype=float))
        header = [f"c{j}" for j in range(matrix.shape[1])]
        payload = _format_csv(header, matrix, set())
    _atomic_write_bytes(path, payload)


def _parse_rows(path: str):
    with open(path, "r", encoding="utf-8") as handle:
        lines = handle.read().splitlines()
    if not lines or not lines[0].strip():
        raise ValueError(f"{path}: line 0: empty file, expected a header row")
    header = [cell.strip() for cell in lines[0].split(",")]
    width = len(header)
    rows = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        cells = line.split(",")
        if len(cells) != width:
            raise ValueError(
                f"{path}: line {lineno}: expected {width} fields, got {len(cells)}"
            )
        try:
            rows.append([float(cell) for cell in cells])
        except ValueError:
            bad = next(c for c in cells if not _is_float(c))
            raise ValueError(f"{path}: line {lineno}: invalid number {bad.strip()!r}") from None
    if not rows:
        raise ValueError(f"{path}: line 1: header only, no data rows")
    matrix = np.asarray(rows, dtype=float)
    if not np.all(np.isfinite(matrix)):
        raise ValueError(f"{path}: non-finite value in data rows")
    return header, matrix


def _is_float(cell: str) -> bool:
    try:
        float(cell)
        return True
    except ValueError:
        return False


def read_csv(path: str):
    """Inverse of write_csv; the header names decide the return type.

    Columns z* mark a SupervisedSet, a label column marks a labeled Dataset,
    anything else reads as an unlabeled Dataset of all columns.
    """
    header, matrix = _parse_rows(path)
    z_cols = [i for i, name in enumerate(header) if name.startswith("z")]
    if z_cols:
        x_cols = [i for i in range(len(header)) if i not in z_cols]
        return SupervisedSet(matrix[:, x_cols], matrix[:, z_cols])
    if "label" in header:
        lab = header.index("label")
        x_cols = [i for i in range(len(header)) if i != lab]
        return Dataset(matrix[:, x_cols], matrix[:, lab].astype(int))
    return Dataset(matrix)


def write_pgm(grid, path: str) -> dict:
    """8-bit binary PGM (P5), min-max normalized per file.

    The mapping is recorded in a sidecar JSON next to the image; a constant
    grid maps to all-zero bytes with the sidecar's ``constant`` flag set.
    Returns the sidecar record.
    """
    grid = np.atleast_2d(np.asarray(grid, dtype=float))
    if not np.all(np.isfinite(grid)):
        raise ValueError("grid must be finite")
    lo = float(grid.min())
    hi = float(grid.max())
    constant = hi == lo
    if constant:
        levels = np.zeros(grid.shape, dtype=np.uint8)
    else:
        levels = np.round((grid - lo) / (hi - lo) * 255.0).astype(np.uint8)
    ny, nx = grid.shape
    header = f"P5\n{nx} {ny}\n255\n".encode("ascii")
    _atomic_write_bytes(path, header + levels.tobytes())
    sidecar = {"min": lo, "max": hi, "constant": constant, "shape": [ny, nx]}
    write_json(sidecar, path + ".json")
    return sidecar
