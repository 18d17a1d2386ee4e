"""Iris template representation and its bit-exact byte formats.

A template is a pair of equal-sized bit matrices: the phase code and a
validity mask (1 = bit usable for comparison). Templates are persisted in a
small binary container:

    magic   4 bytes  b"IRTC"
    version 1 byte   (currently 1)
    rows    u16 LE
    cols    u16 LE
    identity_len  u16 LE, followed by that many UTF-8 bytes
    sample_len    u16 LE, followed by that many UTF-8 bytes
    code    rows * ceil(cols/8) bytes
    mask    rows * ceil(cols/8) bytes

Bits are packed row-major, least-significant bit first, each row padded to a
whole byte. Pad bits are written as zero and ignored on read.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path
from typing import BinaryIO

import numpy as np

from .errors import ContractViolation, TemplateFormatError

MAGIC = b"IRTC"
VERSION = 1


def pack_bits(matrix: np.ndarray) -> bytes:
    """Pack a 2-D 0/1 matrix row-major, LSB-first, rows padded to whole bytes."""
    mat = np.ascontiguousarray(matrix, dtype=np.uint8)
    return np.packbits(mat, axis=1, bitorder="little").tobytes()


def unpack_bits(data: bytes, rows: int, cols: int) -> np.ndarray:
    """Inverse of :func:`pack_bits`; trailing pad bits in each row are dropped."""
    row_bytes = (cols + 7) // 8
    buf = np.frombuffer(data, dtype=np.uint8, count=rows * row_bytes)
    bits = np.unpackbits(buf.reshape(rows, row_bytes), axis=1, bitorder="little")
    return np.ascontiguousarray(bits[:, :cols])


def packed_size(rows: int, cols: int) -> int:
    return rows * ((cols + 7) // 8)


@dataclass(eq=False)
class IrisTemplate:
    """A phase-bit matrix plus validity mask, labelled with its source identity.

    ``code`` and ``mask`` are uint8 matrices of shape (rows, cols) holding 0/1
    values; mask bit 1 means the code bit is valid (unoccluded).
    """

    rows: int
    cols: int
    code: np.ndarray
    mask: np.ndarray
    identity: str
    sample_id: str = ""

    def __post_init__(self) -> None:
        if self.rows <= 0 or self.cols <= 0:
            raise ContractViolation(f"template geometry must be positive, got {self.rows}x{self.cols}")
        self.code = np.ascontiguousarray(self.code, dtype=np.uint8)
        self.mask = np.ascontiguousarray(self.mask, dtype=np.uint8)
        shape = (self.rows, self.cols)
        if self.code.shape != shape:
            raise ContractViolation(f"code shape {self.code.shape} does not match {shape}")
        if self.mask.shape != shape:
            raise ContractViolation(f"mask shape {self.mask.shape} does not match {shape}")
        if self.code.max(initial=0) > 1 or self.mask.max(initial=0) > 1:
            raise ContractViolation("code and mask must contain only 0/1 values")

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, IrisTemplate):
            return NotImplemented
        return (
            self.rows == other.rows
            and self.cols == other.cols
            and self.identity == other.identity
            and self.sample_id == other.sample_id
            and np.array_equal(self.code, other.code)
            and np.array_equal(self.mask, other.mask)
        )

    @property
    def bits(self) -> int:
        return self.rows * self.cols


def _label_bytes(label: str, what: str) -> bytes:
    data = label.encode("utf-8")
    if len(data) > 0xFFFF:
        raise ContractViolation(f"{what} longer than 65535 bytes")
    return data


def write_template(template: IrisTemplate, sink: BinaryIO) -> int:
    """Serialize ``template`` to ``sink``; returns the number of bytes written."""
    ident = _label_bytes(template.identity, "identity")
    sample = _label_bytes(template.sample_id, "sample_id")
    parts = [
        MAGIC,
        bytes([VERSION]),
        struct.pack("<HH", template.rows, template.cols),
        struct.pack("<H", len(ident)),
        ident,
        struct.pack("<H", len(sample)),
        sample,
        pack_bits(template.code),
        pack_bits(template.mask),
    ]
    blob = b"".join(parts)
    sink.write(blob)
    return len(blob)


def _read_exact(source: BinaryIO, n: int, what: str) -> bytes:
    data = source.read(n)
    if len(data) != n:
        raise TemplateFormatError(f"truncated payload while reading {what}")
    return data


def read_template(source: BinaryIO) -> IrisTemplate:
    """Parse one template from ``source``; the stream is left positioned after it."""
    magic = _read_exact(source, 4, "magic")
    if magic != MAGIC:
        raise TemplateFormatError(f"bad magic {magic!r}")
    version = _read_exact(source, 1, "version")[0]
    if version != VERSION:
        raise TemplateFormatError(f"unsupported version {version}")
    rows, cols = struct.unpack("<HH", _read_exact(source, 4, "geometry"))
    if rows == 0:
        raise TemplateFormatError("rows is zero")
    if cols == 0:
        raise TemplateFormatError("cols is zero")
    labels = []
    for what in ("identity", "sample_id"):
        (length,) = struct.unpack("<H", _read_exact(source, 2, f"{what} length"))
        raw = _read_exact(source, length, what)
        try:
            labels.append(raw.decode("utf-8"))
        except UnicodeDecodeError as exc:
            raise TemplateFormatError(f"{what} is not valid UTF-8") from exc
    size = packed_size(rows, cols)
    code = unpack_bits(_read_exact(source, size, "code"), rows, cols)
    mask = unpack_bits(_read_exact(source, size, "mask"), rows, cols)
    return IrisTemplate(rows=rows, cols=cols, code=code, mask=mask, identity=labels[0], sample_id=labels[1])


def import_hex(text: str, rows: int, cols: int, identity: str, sample_id: str = "") -> IrisTemplate:
    """Build a template from a record of two whitespace-separated hex strings.

    The first string holds the code bits, the second the mask bits, packed
    exactly as in the binary container (row-major, LSB-first, per-row byte
    padding). Extra trailing bytes are ignored.
    """
    tokens = text.split()
    if len(tokens) != 2:
        raise TemplateFormatError(f"expected two hex strings (code, mask), got {len(tokens)} tokens")
    if rows <= 0 or cols <= 0:
        raise ContractViolation(f"template geometry must be positive, got {rows}x{cols}")
    need = packed_size(rows, cols)
    matrices = []
    for what, token in zip(("code", "mask"), tokens):
        try:
            raw = bytes.fromhex(token)
        except ValueError as exc:
            raise TemplateFormatError(f"{what} is not valid hex: {exc}") from exc
        if len(raw) < need:
            raise TemplateFormatError(f"{what} decodes to {len(raw)} bytes, need at least {need}")
        matrices.append(unpack_bits(raw, rows, cols))
    return IrisTemplate(rows=rows, cols=cols, code=matrices[0], mask=matrices[1], identity=identity, sample_id=sample_id)


def write_template_file(template: IrisTemplate, path: str | Path) -> int:
    with open(path, "wb") as fh:
        return write_template(template, fh)


def read_template_file(path: str | Path) -> IrisTemplate:
    with open(path, "rb") as fh:
        return read_template(fh)
