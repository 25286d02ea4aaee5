"""File formats: PGM masks, CSV fields and the LGOBV1 run-length level file.

LGOBV1 layout (text, one record per line)::

    LGOBV1
    <width> <height> <m>
    <t> <value> <nruns> <r0> <r1> ...      # one line per level

Runs alternate out/in over the row-major membership of E_t, starting with an
"out" run (possibly of length 0).
"""
from __future__ import annotations

import io as _io

import numpy as np


def read_pgm(path) -> np.ndarray:
    with open(path, "rb") as fh:
        data = fh.read()
    tokens = []
    pos = 0
    # header: magic, width, height, maxval, with '#' comments allowed
    while len(tokens) < 4:
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if data[pos : pos + 1] == b"#":
            while pos < len(data) and data[pos : pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        tokens.append(data[start:pos])
    magic, w, h, maxval = tokens[0], int(tokens[1]), int(tokens[2]), int(tokens[3])
    if magic == b"P5":
        pos += 1
        dtype = np.uint8 if maxval < 256 else ">u2"
        img = np.frombuffer(data, dtype=dtype, count=w * h, offset=pos)
    elif magic == b"P2":
        img = np.array(data[pos:].split()[: w * h], dtype=np.int64)
    else:
        raise ValueError(f"not a PGM file: magic {magic!r}")
    if img.size != w * h:
        raise ValueError("truncated PGM data")
    img = img.reshape(h, w).astype(np.int64)
    if maxval != 255:
        img = img * 255 // maxval
    return img


def write_pgm(path, img) -> None:
    img = np.asarray(img)
    if img.dtype == bool:
        img = img.astype(np.uint8) * 255
    img = np.clip(img, 0, 255).astype(np.uint8)
    h, w = img.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n255\n".encode())
        fh.write(img.tobytes())


def write_csv(path, values) -> None:
    """Row-major CSV, ``%.17g`` so values round-trip; NaN written as ``nan``."""
    buf = _io.StringIO()
    np.savetxt(buf, np.asarray(values, float), fmt="%.17g", delimiter=",")
    with open(path, "w", newline="\n") as fh:
        fh.write(buf.getvalue())


def read_csv(path) -> np.ndarray:
    return np.loadtxt(path, delimiter=",", ndmin=2)


def rle(bits) -> list:
    b = np.asarray(bits, bool).reshape(-1).astype(np.int8)
    change = np.flatnonzero(np.diff(b)) + 1
    bounds = np.concatenate([[0], change, [b.size]])
    runs = np.diff(bounds).tolist()
    if b.size and b[0]:
        runs = [0] + runs
    return runs


def unrle(runs, size) -> np.ndarray:
    out = np.zeros(size, bool)
    pos = 0
    val = False
    for r in runs:
        out[pos : pos + r] = val
        pos += r
        val = not val
    if pos != size:
        raise ValueError("run lengths do not cover the grid")
    return out


def write_lgobv(path, width, height, levels) -> None:
    """``levels``: iterable of ``(t, value, membership)``."""
    levels = list(levels)
    lines = ["LGOBV1", f"{width} {height} {len(levels)}"]
    for t, v, m in levels:
        runs = rle(m)
        lines.append(f"{t:.17g} {v:.17g} {len(runs)} " + " ".join(map(str, runs)))
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def read_lgobv(path):
    with open(path) as fh:
        lines = fh.read().split("\n")
    if lines[0] != "LGOBV1":
        raise ValueError("missing LGOBV1 header")
    width, height, m = map(int, lines[1].split())
    out = []
    for line in lines[2 : 2 + m]:
        parts = line.split()
        t, v, n = float(parts[0]), float(parts[1]), int(parts[2])
        runs = list(map(int, parts[3 : 3 + n]))
        out.append((t, v, unrle(runs, width * height).reshape(height, width)))
    return width, height, out
