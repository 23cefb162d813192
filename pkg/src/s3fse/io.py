"""Readers and writers for the on-disk formats.

Cube files come in pairs: a ``key=value`` text header and a raw
little-endian float32 band-sequential payload. The header may name the
payload with ``data=<file>``; otherwise the payload is the header path with
its suffix replaced by ``.raw``.
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .data import HyperspectralCube, ViewMatrix
from .exceptions import InvalidInputError


def read_keyvalue(path) -> dict[str, str]:
    """Parse ``key=value`` lines; blank lines and ``#`` comments are skipped."""
    out = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise InvalidInputError(f"{path}:{lineno}: expected key=value, got {raw!r}")
        key, value = line.split("=", 1)
        out[key.strip()] = value.strip()
    return out


def write_cube(cube: HyperspectralCube, header_path) -> Path:
    header_path = Path(header_path)
    raw_path = header_path.with_suffix(".raw")
    header_path.write_text(
        f"width={cube.width}\nheight={cube.height}\nbands={cube.bands}\n"
        f"dtype=f32le\ninterleave=bsq\ndata={raw_path.name}\n"
    )
    cube.data.astype("<f4").tofile(raw_path)
    return raw_path


def read_cube(header_path) -> HyperspectralCube:
    header_path = Path(header_path)
    hdr = read_keyvalue(header_path)
    try:
        width, height, bands = (int(hdr[k]) for k in ("width", "height", "bands"))
    except KeyError as exc:
        raise InvalidInputError(f"{header_path}: missing header key {exc}") from None
    if hdr.get("dtype", "f32le") != "f32le":
        raise InvalidInputError(f"{header_path}: unsupported dtype {hdr['dtype']!r}")
    if hdr.get("interleave", "bsq") != "bsq":
        raise InvalidInputError(f"{header_path}: unsupported interleave {hdr['interleave']!r}")
    raw_path = header_path.parent / hdr.get("data", header_path.with_suffix(".raw").name)
    values = np.fromfile(raw_path, dtype="<f4")
    return HyperspectralCube.from_flat(values.astype(np.float64), width, height, bands)


def read_label_raster(path) -> np.ndarray:
    """One integer per line, raster row-major; 0 marks unlabeled pixels."""
    lines = [ln.strip() for ln in Path(path).read_text().splitlines() if ln.strip()]
    try:
        return np.array([int(ln) for ln in lines], dtype=np.int64)
    except ValueError as exc:
        raise InvalidInputError(f"{path}: {exc}") from None


def write_label_raster(labels, path) -> None:
    Path(path).write_text("".join(f"{int(v)}\n" for v in np.asarray(labels).ravel()))


def read_view_csv(path, name: str | None = None) -> ViewMatrix:
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise InvalidInputError(f"{path}: empty CSV") from None
        rows = [r for r in reader if r]
    try:
        values = np.array(rows, dtype=np.float64).reshape(len(rows), len(header))
    except ValueError as exc:
        raise InvalidInputError(f"{path}: malformed CSV ({exc})") from None
    return ViewMatrix(name or path.stem, values, tuple(header))


def write_view_csv(view: ViewMatrix, path) -> None:
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(view.column_names())
        for row in view.values:
            w.writerow([repr(float(x)) for x in row])


def write_edge_list(graph, path) -> None:
    """Dump a graph's upper triangle as ``i j w`` lines."""
    W = graph.weights.tocoo()
    keep = W.row < W.col
    order = np.lexsort((W.col[keep], W.row[keep]))
    with Path(path).open("w") as fh:
        for i, j, w in zip(W.row[keep][order], W.col[keep][order], W.data[keep][order]):
            fh.write(f"{i} {j} {w!r}\n")


def write_pgm(image: np.ndarray, path) -> None:
    """Write an 8-bit binary (P5) PGM."""
    img = np.asarray(image)
    if img.ndim != 2:
        raise InvalidInputError("PGM image must be 2-D")
    if img.min() < 0 or img.max() > 255:
        raise InvalidInputError("PGM gray levels must lie in [0, 255]")
    h, w = img.shape
    with Path(path).open("wb") as fh:
        fh.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
        fh.write(img.astype(np.uint8).tobytes())


def read_pgm(path) -> np.ndarray:
    buf = Path(path).read_bytes()
    tokens = []
    pos = 0
    while len(tokens) < 4:
        while buf[pos:pos + 1].isspace():
            pos += 1
        if buf[pos:pos + 1] == b"#":
            pos = buf.index(b"\n", pos) + 1
            continue
        start = pos
        while not buf[pos:pos + 1].isspace():
            pos += 1
        tokens.append(buf[start:pos].decode("ascii"))
    if tokens[0] != "P5":
        raise InvalidInputError(f"{path}: not a binary PGM")
    w, h, maxval = (int(t) for t in tokens[1:])
    if maxval > 255:
        raise InvalidInputError(f"{path}: 16-bit PGM not supported")
    data = np.frombuffer(buf, dtype=np.uint8, count=w * h, offset=pos + 1)
    return data.reshape(h, w)
