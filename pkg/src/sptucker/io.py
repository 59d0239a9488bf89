"""Readers and writers for ``.tns`` sparse tensors and PGM images.

A ``.tns`` file starts with a header line ``N I1 ... IN nnz`` followed by
``nnz`` lines ``i1 ... iN value`` with 1-based coordinates.  Blank lines and
lines starting with ``#`` are ignored.  Values are written with ``repr`` so
they round-trip exactly.
"""
import os
import re

import numpy as np

from .exceptions import FormatError, TnsParseError
from .tensor import CooTensor


def _parse_int(token, lineno, what):
    try:
        return int(token)
    except ValueError:
        raise TnsParseError(f"expected integer {what}, got {token!r}", lineno) from None


def read_tns(path):
    """Read a ``.tns`` file into a canonical CooTensor.

    Raises
    ------
    TnsParseError
        Malformed line (with its 1-based line number).
    FormatError
        Header inconsistent with the body, or a coordinate outside the
        declared shape.
    """
    header = None
    coords, values = [], []
    with open(path, "r", encoding="ascii") as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.strip()
            if not text or text.startswith("#"):
                continue
            tokens = text.split()
            if header is None:
                ints = [_parse_int(t, lineno, "header field") for t in tokens]
                if len(ints) < 3 or ints[0] < 1 or len(ints) != ints[0] + 2:
                    raise TnsParseError(
                        "header must read 'N I1 ... IN nnz'", lineno)
                order, shape, nnz = ints[0], tuple(ints[1:-1]), ints[-1]
                if min(shape) < 1 or nnz < 0:
                    raise FormatError(f"line {lineno}: invalid header {text!r}")
                header = (order, shape, nnz)
                continue
            if len(tokens) != order + 1:
                raise TnsParseError(
                    f"expected {order + 1} fields, got {len(tokens)}", lineno)
            idx = [_parse_int(t, lineno, "coordinate") for t in tokens[:-1]]
            for k, (i, size) in enumerate(zip(idx, shape)):
                if not 1 <= i <= size:
                    raise FormatError(
                        f"line {lineno}: coordinate {i} outside [1, {size}] in mode {k}")
            try:
                v = float(tokens[-1])
            except ValueError:
                raise TnsParseError(f"bad value {tokens[-1]!r}", lineno) from None
            if not np.isfinite(v):
                raise TnsParseError(f"non-finite value {tokens[-1]!r}", lineno)
            coords.append(idx)
            values.append(v)
    if header is None:
        raise FormatError(f"{os.fspath(path)}: missing header")
    if len(values) != nnz:
        raise FormatError(f"header declares {nnz} entries but file has {len(values)}")
    idx = np.asarray(coords, dtype=np.int64).reshape(-1, order) - 1
    return CooTensor(shape, idx, values)


def format_tns(tensor):
    """``.tns`` text of a CooTensor in canonical order; values use ``repr``."""
    if not isinstance(tensor, CooTensor):
        raise TypeError("expected a CooTensor")
    lines = [" ".join(map(str, (tensor.order,) + tensor.shape + (tensor.nnz,)))]
    for row, v in zip(tensor.indices + 1, tensor.values):
        lines.append(" ".join(map(str, row.tolist())) + " " + repr(float(v)))
    return "\n".join(lines) + "\n"


def write_tns(tensor, path):
    """Write ``format_tns(tensor)`` to ``path``."""
    text = format_tns(tensor)
    with open(path, "w", encoding="ascii") as fh:
        fh.write(text)


_PGM_TOKEN = re.compile(rb"\s*(?:#[^\n]*\n\s*)*(\S+)")


def _pgm_header(data):
    pos, fields = 0, []
    for _ in range(4):
        m = _PGM_TOKEN.match(data, pos)
        if m is None:
            raise FormatError("truncated PGM header")
        fields.append(m.group(1))
        pos = m.end()
    return fields, pos


def read_pgm(path):
    """Read a P2 or P5 PGM into a ``height x width`` CooTensor.

    Pixels are scaled by ``1 / maxval`` to ``[0, 1]``; zero pixels are not
    stored.
    """
    with open(path, "rb") as fh:
        data = fh.read()
    (magic, w, h, maxval), pos = _pgm_header(data)
    if magic not in (b"P2", b"P5"):
        raise FormatError(f"unsupported PGM magic {magic!r}")
    try:
        w, h, maxval = int(w), int(h), int(maxval)
    except ValueError:
        raise FormatError("non-integer PGM header field") from None
    if w < 1 or h < 1 or not 1 <= maxval <= 65535:
        raise FormatError(f"invalid PGM header {w}x{h} maxval {maxval}")
    if magic == b"P5":
        # exactly one whitespace byte separates maxval from the raster
        raster = data[pos + 1:]
        dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
        need = w * h * dtype.itemsize
        if len(raster) < need:
            raise FormatError(f"PGM raster has {len(raster)} bytes, need {need}")
        pix = np.frombuffer(raster[:need], dtype=dtype).astype(np.float64)
    else:
        toks = data[pos:].split()
        if len(toks) < w * h:
            raise FormatError(f"PGM raster has {len(toks)} values, need {w * h}")
        pix = np.array([int(t) for t in toks[:w * h]], dtype=np.float64)
    if np.any(pix > maxval):
        raise FormatError("PGM pixel exceeds maxval")
    return CooTensor.from_dense(pix.reshape(h, w) / maxval)


def write_pgm(image, path):
    """Write a 2-D image (ndarray or CooTensor) as an 8-bit binary PGM.

    Values are clamped to ``[0, 1]`` and rounded to the nearest of 256 levels.
    """
    if isinstance(image, CooTensor):
        image = image.to_dense()
    image = np.asarray(image, dtype=np.float64)
    if image.ndim != 2:
        raise ValueError(f"write_pgm expects a 2-D image, got {image.ndim}-D")
    q = np.rint(np.clip(np.nan_to_num(image), 0.0, 1.0) * 255).astype(np.uint8)
    h, w = q.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
        fh.write(q.tobytes())
