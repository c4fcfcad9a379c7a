"""Document embedding matrices and their on-disk formats.

Two formats are supported:

* CSV with header ``id,v0,...,v{d-1}``; values written with 17 significant digits.
* Binary ``EMB1``: the magic bytes, u32 row count, u32 dim, row-major
  little-endian float64 values, then one id per line.
"""

from __future__ import annotations

import csv
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

MAGIC = b"EMB1"


@dataclass(frozen=True)
class EmbeddingMatrix:
    doc_ids: tuple[str, ...]
    vectors: np.ndarray

    def __post_init__(self):
        vectors = np.asarray(self.vectors, dtype=np.float64)
        if vectors.ndim != 2:
            raise ValueError(f"vectors must be 2-D, got shape {vectors.shape}")
        ids = tuple(self.doc_ids)
        if len(ids) != vectors.shape[0]:
            raise ValueError(f"{len(ids)} ids for {vectors.shape[0]} rows")
        if len(set(ids)) != len(ids):
            raise ValueError("document ids must be unique")
        if not np.all(np.isfinite(vectors)):
            raise ValueError("embedding contains non-finite values")
        object.__setattr__(self, "doc_ids", ids)
        object.__setattr__(self, "vectors", vectors)

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    def __len__(self):
        return self.vectors.shape[0]

    def index(self) -> dict[str, int]:
        return {d: i for i, d in enumerate(self.doc_ids)}

    def rows(self, ids) -> np.ndarray:
        idx = self.index()
        return self.vectors[[idx[i] for i in ids]]


def _format_for(path, fmt):
    if fmt is not None:
        return fmt
    return "csv" if str(path).lower().endswith(".csv") else "emb1"


def save_embeddings(path, emb: EmbeddingMatrix, fmt: str | None = None) -> None:
    """Write ``emb`` as CSV or EMB1; the format follows the file extension unless given."""
    fmt = _format_for(path, fmt)
    if fmt == "csv":
        with Path(path).open("w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["id"] + [f"v{j}" for j in range(emb.dim)])
            for doc_id, row in zip(emb.doc_ids, emb.vectors):
                writer.writerow([doc_id] + [format(float(v), ".17g") for v in row])
    elif fmt == "emb1":
        for doc_id in emb.doc_ids:
            if "\n" in doc_id or "\r" in doc_id:
                raise ValueError(f"id {doc_id!r} contains a line break; not representable in EMB1")
        n, d = emb.vectors.shape
        with Path(path).open("wb") as fh:
            fh.write(MAGIC)
            fh.write(struct.pack("<II", n, d))
            fh.write(np.ascontiguousarray(emb.vectors, dtype="<f8").tobytes())
            fh.write("".join(i + "\n" for i in emb.doc_ids).encode("utf-8"))
    else:
        raise ValueError(f"unknown embedding format {fmt!r}")


def load_embeddings(path, fmt: str | None = None) -> EmbeddingMatrix:
    path = Path(path)
    fmt = _format_for(path, fmt)
    if fmt == "csv":
        with path.open("r", encoding="utf-8", newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if not header or header[0] != "id":
                raise ValueError(f"{path}: missing CSV header")
            ids, rows = [], []
            for rec in reader:
                if len(rec) != len(header):
                    raise ValueError(f"{path}:{reader.line_num}: expected {len(header)} fields")
                ids.append(rec[0])
                rows.append([float(v) for v in rec[1:]])
        vectors = np.array(rows, dtype=np.float64).reshape(len(rows), len(header) - 1)
        return EmbeddingMatrix(tuple(ids), vectors)
    if fmt == "emb1":
        data = path.read_bytes()
        if data[:4] != MAGIC:
            raise ValueError(f"{path}: not an EMB1 file")
        n, d = struct.unpack("<II", data[4:12])
        end = 12 + 8 * n * d
        if len(data) < end:
            raise ValueError(f"{path}: truncated EMB1 payload")
        vectors = np.frombuffer(data[12:end], dtype="<f8").astype(np.float64).reshape(n, d)
        ids = data[end:].decode("utf-8").split("\n")
        if ids and ids[-1] == "":
            ids.pop()
        if len(ids) != n:
            raise ValueError(f"{path}: {len(ids)} ids for {n} rows")
        return EmbeddingMatrix(tuple(ids), vectors)
    raise ValueError(f"unknown embedding format {fmt!r}")
