"""File formats: symbol JSON, operator and model-space containers, reports.

Operator and model-space files start with one JSON header line followed by
the matrix payload, either raw little-endian float64 with interleaved
real/imaginary parts (row-major) or CSV with the same interleaving for
small matrices.  All JSON is emitted with sorted keys and repr-exact floats
so identical inputs produce bit-identical files.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .lattice import Box
from .modelspace import ModelSpace
from .operators import TruncatedOperator
from .symbols import TorusSymbol


def symbol_to_dict(sym: TorusSymbol) -> dict:
    coeffs = []
    for k in sorted(sym.coefficients):
        blk = sym.coefficients[k]
        coeffs.append(
            {
                "k": [int(x) for x in k],
                "re": blk.real.tolist(),
                "im": blk.imag.tolist(),
            }
        )
    return {
        "n": sym.n,
        "p": sym.p,
        "coefficients": coeffs,
        "tail_bound": float(sym.tail_bound),
    }


def symbol_from_dict(data: dict) -> TorusSymbol:
    try:
        n, p = int(data["n"]), int(data["p"])
        entries = {}
        for item in data["coefficients"]:
            k = tuple(int(x) for x in item["k"])
            blk = np.asarray(item["re"], dtype=float) + 1j * np.asarray(item["im"], dtype=float)
            if blk.shape != (p, p):
                raise ValueError(f"coefficient at {k} has shape {blk.shape}, expected ({p}, {p})")
            if k in entries:
                raise ValueError(f"duplicate frequency {k}")
            entries[k] = blk.astype(complex)
        tail = float(data.get("tail_bound", 0.0))
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed symbol JSON: {exc}") from exc
    return TorusSymbol(n=n, p=p, coefficients=entries, tail_bound=tail)


def save_symbol(path, sym: TorusSymbol) -> None:
    Path(path).write_text(dumps(symbol_to_dict(sym)) + "\n")


def load_symbol(path) -> TorusSymbol:
    return symbol_from_dict(json.loads(Path(path).read_text()))


def _matrix_to_bytes(matrix: np.ndarray) -> bytes:
    inter = np.empty(matrix.shape + (2,), dtype="<f8")
    inter[..., 0] = matrix.real
    inter[..., 1] = matrix.imag
    return inter.tobytes()


def _matrix_from_bytes(buf: bytes, rows: int, cols: int) -> np.ndarray:
    flat = np.frombuffer(buf, dtype="<f8")
    if flat.size != rows * cols * 2:
        raise ValueError(
            f"matrix payload holds {flat.size} floats, expected {rows * cols * 2}"
        )
    inter = flat.reshape(rows, cols, 2)
    return (inter[..., 0] + 1j * inter[..., 1]).astype(complex)


def _matrix_to_csv(matrix: np.ndarray) -> str:
    lines = []
    for row in matrix:
        cells = []
        for z in row:
            cells.append(repr(float(z.real)))
            cells.append(repr(float(z.imag)))
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def _matrix_from_csv(text: str, rows: int, cols: int) -> np.ndarray:
    out = np.zeros((rows, cols), dtype=complex)
    data_lines = [ln for ln in text.splitlines() if ln.strip()]
    if len(data_lines) != rows:
        raise ValueError(f"CSV payload has {len(data_lines)} rows, expected {rows}")
    for i, line in enumerate(data_lines):
        vals = [float(x) for x in line.split(",")]
        if len(vals) != 2 * cols:
            raise ValueError(f"CSV row {i} has {len(vals)} fields, expected {2 * cols}")
        arr = np.asarray(vals).reshape(cols, 2)
        out[i] = arr[:, 0] + 1j * arr[:, 1]
    return out


def save_operator(path, op: TruncatedOperator, fmt: str = "binary") -> None:
    if fmt not in ("binary", "csv"):
        raise ValueError(f"unknown operator format {fmt!r}")
    header = {
        "kind": "operator",
        "n": op.box.n,
        "p": op.p,
        "caps": list(op.box.caps),
        "structure": op.tag,
        "format": fmt,
    }
    if op.tag == "toeplitz" and op.symbol is not None:
        header["symbol"] = symbol_to_dict(op.symbol)
    if op.tag == "shift" and op.direction is not None:
        header["direction"] = op.direction
    head = dumps_header(header) + "\n"
    if fmt == "binary":
        with open(path, "wb") as fh:
            fh.write(head.encode())
            fh.write(_matrix_to_bytes(op.matrix))
    else:
        with open(path, "w") as fh:
            fh.write(head)
            fh.write(_matrix_to_csv(op.matrix))


def _read_header(path) -> tuple[dict, bytes]:
    raw = Path(path).read_bytes()
    nl = raw.find(b"\n")
    if nl < 0:
        raise ValueError(f"{path}: missing header line")
    try:
        header = json.loads(raw[:nl].decode())
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ValueError(f"{path}: malformed header: {exc}") from exc
    return header, raw[nl + 1 :]


def load_operator(path) -> TruncatedOperator:
    header, payload = _read_header(path)
    if header.get("kind") != "operator":
        raise ValueError(f"{path}: not an operator file (kind={header.get('kind')!r})")
    try:
        box = Box(tuple(int(c) for c in header["caps"]))
        p = int(header["p"])
        fmt = header["format"]
        tag = header.get("structure", "general")
    except (KeyError, TypeError) as exc:
        raise ValueError(f"{path}: malformed operator header: {exc}") from exc
    dim = p * box.dim
    if fmt == "binary":
        matrix = _matrix_from_bytes(payload, dim, dim)
    elif fmt == "csv":
        matrix = _matrix_from_csv(payload.decode(), dim, dim)
    else:
        raise ValueError(f"{path}: unknown payload format {fmt!r}")
    symbol = symbol_from_dict(header["symbol"]) if "symbol" in header else None
    direction = header.get("direction")
    return TruncatedOperator(
        box=box, p=p, matrix=matrix, tag=tag, symbol=symbol, direction=direction
    )


def save_modelspace(path, ms: ModelSpace) -> None:
    header = {
        "kind": "modelspace",
        "n": ms.box.n,
        "p": ms.p,
        "caps": list(ms.box.caps),
        "safe_caps": list(ms.safe_box.caps),
        "q": ms.q,
        "theta": symbol_to_dict(ms.theta),
        "column_tail_bound": ms.column_tail_bound,
        "boundary_note": ms.boundary_note,
    }
    with open(path, "wb") as fh:
        fh.write((dumps_header(header) + "\n").encode())
        fh.write(_matrix_to_bytes(ms.basis))


def load_modelspace(path) -> ModelSpace:
    header, payload = _read_header(path)
    if header.get("kind") != "modelspace":
        raise ValueError(f"{path}: not a model-space file")
    try:
        box = Box(tuple(int(c) for c in header["caps"]))
        safe = Box(tuple(int(c) for c in header["safe_caps"]))
        p = int(header["p"])
        q = int(header["q"])
        theta = symbol_from_dict(header["theta"])
    except (KeyError, TypeError) as exc:
        raise ValueError(f"{path}: malformed model-space header: {exc}") from exc
    basis = _matrix_from_bytes(payload, p * box.dim, q)
    return ModelSpace(
        theta=theta,
        box=box,
        p=p,
        safe_box=safe,
        basis=basis,
        q=q,
        column_tail_bound=float(header.get("column_tail_bound", theta.tail_bound)),
        boundary_note=header.get("boundary_note", ""),
    )


def dumps(obj) -> str:
    """Canonical JSON: sorted keys, no trailing whitespace, repr-exact floats."""
    return json.dumps(obj, sort_keys=True, indent=2)


def dumps_header(obj) -> str:
    """Single-line canonical JSON for file headers."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def write_report(path, report: dict) -> None:
    Path(path).write_text(dumps(report) + "\n")


def write_sequence_csv(path, pairs, header: tuple[str, str]) -> None:
    """Two-column CSV of (m, value) rows for external plotting."""
    lines = [",".join(header)]
    for m, value in pairs:
        lines.append(f"{int(m)},{repr(float(value))}")
    Path(path).write_text("\n".join(lines) + "\n")
