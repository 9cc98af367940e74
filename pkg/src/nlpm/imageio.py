"""PGM and CSV files, salt-and-pepper noise, a synthetic test image."""

import math
import re
from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgumentError, PGMFormatError

GENERATOR = "nlpm"


@dataclass(frozen=True, eq=False)
class GrayImage:
    """Gray-scale image with pixel values in [0, 1]; ``pixels[row, col]``."""

    pixels: np.ndarray

    def __post_init__(self):
        px = np.asarray(self.pixels, dtype=float)
        if px.ndim != 2:
            raise InvalidArgumentError(f"image must be 2D, got ndim={px.ndim}")
        if px.size and (px.min() < 0.0 or px.max() > 1.0):
            raise InvalidArgumentError("pixel values must lie in [0, 1]")
        object.__setattr__(self, "pixels", px)

    @property
    def height(self):
        return self.pixels.shape[0]

    @property
    def width(self):
        return self.pixels.shape[1]


# -- PGM ------------------------------------------------------------------------

_WS = b" \t\n\r\v\f"


def _header_tokens(data, count, start):
    """Read ``count`` whitespace-separated integers, skipping ``#`` comments."""
    tokens = []
    pos = start
    while len(tokens) < count:
        if pos >= len(data):
            raise PGMFormatError("truncated header", pos)
        ch = data[pos:pos + 1]
        if ch == b"#":
            nl = data.find(b"\n", pos)
            if nl < 0:
                raise PGMFormatError("unterminated comment", pos)
            pos = nl + 1
        elif ch in _WS:
            pos += 1
        else:
            m = re.compile(rb"\d+").match(data, pos)
            if m is None:
                raise PGMFormatError(f"expected integer, found {ch!r}", pos)
            end = m.end()
            if end < len(data) and data[end:end + 1] not in _WS and data[end:end + 1] != b"#":
                raise PGMFormatError("malformed integer", end)
            tokens.append((int(m.group()), pos))
            pos = end
    return tokens, pos


def parse_pgm(data):
    """Decode P2/P5 bytes into a GrayImage (values scaled by ``1/maxval``)."""
    magic = data[:2]
    if magic in (b"P1", b"P3", b"P4", b"P6"):
        raise PGMFormatError(f"unsupported format {magic.decode()}", 0)
    if magic not in (b"P2", b"P5"):
        raise PGMFormatError("not a PGM file", 0)
    if len(data) < 3 or data[2:3] not in _WS:
        raise PGMFormatError("missing whitespace after magic number", 2)
    tokens, pos = _header_tokens(data, 3, 2)
    (w, _), (h, _), (maxval, mpos) = tokens
    if w <= 0 or h <= 0:
        raise PGMFormatError(f"invalid size {w}x{h}", 2)
    if not 0 < maxval <= 65535:
        raise PGMFormatError(f"maxval {maxval} out of range", mpos)
    n = w * h
    if magic == b"P5":
        if pos >= len(data) or data[pos:pos + 1] not in _WS:
            raise PGMFormatError("missing whitespace after header", pos)
        pos += 1
        width = 1 if maxval < 256 else 2
        need = n * width
        if len(data) - pos < need:
            raise PGMFormatError(f"truncated raster: need {need} bytes, have {len(data) - pos}", len(data))
        if len(data) - pos > need:
            raise PGMFormatError("trailing bytes after raster", pos + need)
        raw = np.frombuffer(data, dtype=np.uint8 if width == 1 else ">u2", count=n, offset=pos)
        vals = raw.astype(np.int64)
        offsets = pos + width * np.arange(n)
    else:
        toks = [(m.group(), m.start()) for m in re.finditer(rb"\S+", data[pos:])]
        if len(toks) < n:
            raise PGMFormatError(f"truncated raster: need {n} samples, have {len(toks)}", len(data))
        if len(toks) > n:
            raise PGMFormatError("trailing data after raster", pos + toks[n][1])
        offsets = pos + np.array([off for _, off in toks])
        vals = np.empty(n, dtype=np.int64)
        for i, (tok, off) in enumerate(toks):
            if not tok.isdigit():
                raise PGMFormatError(f"non-integer sample {tok!r} in raster", pos + off)
            vals[i] = int(tok)
    bad = np.flatnonzero(vals > maxval)
    if bad.size:
        raise PGMFormatError(f"sample exceeds maxval {maxval}", int(offsets[bad[0]]))
    return GrayImage(vals.reshape(h, w) / maxval), maxval


def read_pgm(path):
    with open(path, "rb") as fh:
        data = fh.read()
    img, _ = parse_pgm(data)
    return img


def encode_pgm(img, maxval=255):
    if not 0 < maxval <= 65535:
        raise InvalidArgumentError(f"maxval must lie in 1..65535, got {maxval}")
    q = np.rint(np.clip(img.pixels, 0.0, 1.0) * maxval).astype(np.int64)
    header = f"P5\n# generator: {GENERATOR}\n{img.width} {img.height}\n{maxval}\n".encode()
    body = q.astype(np.uint8 if maxval < 256 else ">u2").tobytes()
    return header + body


def write_pgm(img, path, maxval=255):
    """Write binary P5 with one comment line naming the generator."""
    data = encode_pgm(img, maxval)
    try:
        with open(path, "wb") as fh:
            fh.write(data)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc


# -- noise and test images ------------------------------------------------------

def salt_pepper(img, fraction, seed):
    """Replace exactly ``round(fraction * N)`` distinct pixels by 0 or 1.

    Half of them become 1 (salt) and half 0 (pepper); an odd count gives the
    extra pixel to salt.
    """
    if not 0.0 <= fraction <= 1.0:
        raise InvalidArgumentError(f"fraction must lie in [0, 1], got {fraction}")
    px = img.pixels.copy()
    total = px.size
    count = int(math.floor(fraction * total + 0.5))
    rng = np.random.default_rng(seed)
    idx = rng.choice(total, size=count, replace=False)
    n_salt = (count + 1) // 2
    flat = px.reshape(-1)
    flat[idx[:n_salt]] = 1.0
    flat[idx[n_salt:]] = 0.0
    return GrayImage(px)


CARTOON_LEVELS = {"background": 0.25, "disk": 0.85, "rectangle": 0.55, "wedge": 0.95}
CARTOON_SHAPES = {
    "disk": {"center": (0.32, 0.32), "radius": 0.18},
    "rectangle": {"rows": (0.58, 0.86), "cols": (0.12, 0.46)},
    # triangle with vertices (row, col)
    "wedge": {"vertices": ((0.15, 0.60), (0.50, 0.62), (0.45, 0.90))},
}


def _in_triangle(r, c, verts):
    (r1, c1), (r2, c2), (r3, c3) = verts

    def side(ra, ca, rb, cb):
        return (c - ca) * (rb - ra) - (r - ra) * (cb - ca)

    d1, d2, d3 = side(r1, c1, r2, c2), side(r2, c2, r3, c3), side(r3, c3, r1, c1)
    neg = (d1 < 0) | (d2 < 0) | (d3 < 0)
    pos = (d1 > 0) | (d2 > 0) | (d3 > 0)
    return ~(neg & pos)


def cartoon_masks(n):
    """Boolean masks of the three shapes sampled at pixel centres."""
    t = (np.arange(n) + 0.5) / n
    r, c = np.meshgrid(t, t, indexing="ij")
    disk = CARTOON_SHAPES["disk"]
    (r0, c0), rad = disk["center"], disk["radius"]
    rect = CARTOON_SHAPES["rectangle"]
    return {
        "disk": (r - r0) ** 2 + (c - c0) ** 2 <= rad ** 2,
        "rectangle": ((r >= rect["rows"][0]) & (r <= rect["rows"][1])
                      & (c >= rect["cols"][0]) & (c <= rect["cols"][1])),
        "wedge": _in_triangle(r, c, CARTOON_SHAPES["wedge"]["vertices"]),
    }


def make_cartoon(n):
    """Piecewise-constant ``n x n`` image: disk, rectangle and wedge on a flat background."""
    if n < 4:
        raise InvalidArgumentError(f"image size must be >= 4, got {n}")
    px = np.full((n, n), CARTOON_LEVELS["background"])
    for name, mask in cartoon_masks(n).items():
        px[mask] = CARTOON_LEVELS[name]
    return GrayImage(px)


def image_to_field(img, bc="neumann"):
    """Pixels as midpoint samples of a square Neumann field."""
    from .spectral import GridField

    if img.width != img.height:
        raise InvalidArgumentError(f"flows need square images, got {img.width}x{img.height}")
    return GridField(img.pixels, bc)


def field_to_image(f):
    return GrayImage(np.clip(f.values, 0.0, 1.0))


# -- CSV --------------------------------------------------------------------------

def _fmt(v):
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    return format(float(v), ".17g")


def write_csv(series, path, manifest=None):
    """Write named columns; one header row, ``.17g`` numbers, ``\\n`` newlines.

    ``series`` maps column name to a sequence; all columns must have equal
    length. ``manifest`` is written first as a ``# ``-prefixed comment line.
    """
    names = list(series)
    cols = [list(series[k]) for k in names]
    lengths = {len(c) for c in cols}
    if len(lengths) > 1:
        raise InvalidArgumentError(f"column lengths differ: {sorted(lengths)}")
    rows = lengths.pop() if lengths else 0
    lines = []
    if manifest:
        lines.append("# " + manifest)
    lines.append(",".join(names))
    for i in range(rows):
        lines.append(",".join(_fmt(c[i]) for c in cols))
    try:
        with open(path, "w", newline="\n") as fh:
            fh.write("\n".join(lines) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc


def read_csv(path):
    """Inverse of ``write_csv``: returns ``(columns, manifest)``."""
    manifest = None
    with open(path) as fh:
        lines = fh.read().split("\n")
    lines = [ln for ln in lines if ln != ""]
    while lines and lines[0].startswith("#"):
        manifest = lines.pop(0)[2:]
    if not lines:
        return {}, manifest
    names = lines[0].split(",")
    data = {k: [] for k in names}
    for ln in lines[1:]:
        vals = ln.split(",")
        if len(vals) != len(names):
            raise InvalidArgumentError(f"row has {len(vals)} values, header has {len(names)}")
        for k, v in zip(names, vals):
            data[k].append(float(v))
    return data, manifest
