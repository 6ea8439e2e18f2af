"""Images, regions, label maps, colour conversion and file I/O.

Images are plain ``(H, W, 3)`` float64 arrays (CIELAB) or uint8 arrays (RGB).
Supported formats are binary PPM (P6, maxval 255) for input, and CSV or
16-bit PGM (P5, big-endian) for label maps.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np

# sRGB primaries, D65 white
_RGB_TO_XYZ = np.array([
    [0.4124564, 0.3575761, 0.1804375],
    [0.2126729, 0.7151522, 0.0721750],
    [0.0193339, 0.1191920, 0.9503041],
])
_XYZ_TO_RGB = np.linalg.inv(_RGB_TO_XYZ)
_WHITE_D65 = _RGB_TO_XYZ.sum(axis=1)

_EPS = (6.0 / 29.0) ** 3
_KAPPA = (29.0 / 6.0) ** 2 / 3.0


class PPMError(ValueError):
    """Base class for netpbm parse failures."""


class PPMHeaderError(PPMError):
    pass


class PPMMaxvalError(PPMError):
    pass


class PPMTruncatedError(PPMError):
    pass


class LabelOverflowError(ValueError):
    pass


@dataclass(frozen=True)
class Region:
    """Axis-aligned rectangle ``[top, top+height) x [left, left+width)``."""

    top: int
    left: int
    height: int
    width: int

    @classmethod
    def whole(cls, shape) -> "Region":
        return cls(0, 0, int(shape[0]), int(shape[1]))

    @classmethod
    def centered(cls, shape, margin: int) -> "Region":
        """Rectangle keeping ``margin`` pixels from every image border."""
        h, w = int(shape[0]) - 2 * margin, int(shape[1]) - 2 * margin
        return cls(margin, margin, max(h, 0), max(w, 0))

    @property
    def area(self) -> int:
        return self.height * self.width

    @property
    def slices(self) -> tuple[slice, slice]:
        return (slice(self.top, self.top + self.height),
                slice(self.left, self.left + self.width))

    def check(self, shape) -> None:
        if (self.top < 0 or self.left < 0 or self.height < 0 or self.width < 0
                or self.top + self.height > shape[0]
                or self.left + self.width > shape[1]):
            raise ValueError(f"{self} does not fit in image of shape {tuple(shape[:2])}")


@dataclass
class LabelMap:
    labels: np.ndarray  # (H, W) int64, contiguous 0..num_labels-1
    num_labels: int

    @property
    def shape(self) -> tuple[int, int]:
        return self.labels.shape


def check_image(image: np.ndarray) -> np.ndarray:
    image = np.asarray(image)
    if image.ndim != 3 or image.shape[2] != 3:
        raise ValueError(f"expected an (H, W, 3) array, got shape {image.shape}")
    if image.shape[0] < 1 or image.shape[1] < 1:
        raise ValueError("image must have at least one pixel")
    if image.dtype.kind == "f" and not np.all(np.isfinite(image)):
        raise ValueError("image contains non-finite values")
    return image


# ---------------------------------------------------------------------------
# colour

def rgb_to_cielab(rgb: np.ndarray) -> np.ndarray:
    """sRGB bytes (or floats on the same 0..255 scale) to CIELAB, D65."""
    c = np.asarray(rgb, dtype=np.float64) / 255.0
    lin = np.where(c > 0.04045, ((c + 0.055) / 1.055) ** 2.4, c / 12.92)
    xyz = lin @ _RGB_TO_XYZ.T / _WHITE_D65
    f = np.where(xyz > _EPS, np.cbrt(xyz), _KAPPA * xyz + 4.0 / 29.0)
    lab = np.empty_like(f)
    lab[..., 0] = 116.0 * f[..., 1] - 16.0
    lab[..., 1] = 500.0 * (f[..., 0] - f[..., 1])
    lab[..., 2] = 200.0 * (f[..., 1] - f[..., 2])
    return lab


def cielab_to_rgb(lab: np.ndarray) -> np.ndarray:
    """Inverse of :func:`rgb_to_cielab`, clamped and rounded to uint8."""
    lab = np.asarray(lab, dtype=np.float64)
    fy = (lab[..., 0] + 16.0) / 116.0
    f = np.stack([fy + lab[..., 1] / 500.0, fy, fy - lab[..., 2] / 200.0], axis=-1)
    xyz = np.where(f > 6.0 / 29.0, f ** 3, (f - 4.0 / 29.0) / _KAPPA) * _WHITE_D65
    lin = xyz @ _XYZ_TO_RGB.T
    lin = np.clip(lin, 0.0, 1.0)
    c = np.where(lin > 0.0031308, 1.055 * lin ** (1 / 2.4) - 0.055, 12.92 * lin)
    return np.clip(np.rint(c * 255.0), 0, 255).astype(np.uint8)


# ---------------------------------------------------------------------------
# netpbm

def _read_header(data: bytes, nfields: int) -> tuple[list[bytes], int]:
    """Split the magic and ``nfields - 1`` integers; return tokens and payload offset."""
    tokens: list[bytes] = []
    pos = 0
    n = len(data)
    while len(tokens) < nfields:
        while pos < n and data[pos:pos + 1].isspace():
            pos += 1
        if pos < n and data[pos:pos + 1] == b"#":
            while pos < n and data[pos:pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < n and not data[pos:pos + 1].isspace() and data[pos:pos + 1] != b"#":
            pos += 1
        if start == pos:
            raise PPMHeaderError("unexpected end of header")
        tokens.append(data[start:pos])
    if pos >= n or not data[pos:pos + 1].isspace():
        raise PPMHeaderError("header must end with a single whitespace byte")
    return tokens, pos + 1


def _parse_dims(tokens: list[bytes]) -> tuple[int, int, int]:
    try:
        width, height, maxval = (int(t) for t in tokens[1:4])
    except ValueError as exc:
        raise PPMHeaderError(f"non-numeric header field: {exc}") from None
    if width < 1 or height < 1:
        raise PPMHeaderError(f"invalid dimensions {width}x{height}")
    return width, height, maxval


def load_ppm(path: str | os.PathLike) -> np.ndarray:
    """Read a binary 8-bit PPM into an ``(H, W, 3)`` uint8 array."""
    data = Path(path).read_bytes()
    if data[:2] != b"P6":
        raise PPMHeaderError(f"bad magic {data[:2]!r}, expected b'P6'")
    tokens, offset = _read_header(data, 4)
    if tokens[0] != b"P6":
        raise PPMHeaderError(f"bad magic {tokens[0]!r}")
    width, height, maxval = _parse_dims(tokens)
    if maxval != 255:
        raise PPMMaxvalError(f"unsupported maxval {maxval}, only 255 is supported")
    need = width * height * 3
    payload = data[offset:offset + need]
    if len(payload) < need:
        raise PPMTruncatedError(f"payload has {len(payload)} bytes, expected {need}")
    return np.frombuffer(payload, dtype=np.uint8).reshape(height, width, 3).copy()


def write_ppm(path: str | os.PathLike, rgb: np.ndarray) -> None:
    rgb = np.asarray(rgb)
    if rgb.dtype != np.uint8:
        raise ValueError("write_ppm expects uint8 data")
    check_image(rgb)
    h, w, _ = rgb.shape
    with open(path, "wb") as fh:
        fh.write(f"P6\n{w} {h}\n255\n".encode("ascii"))
        fh.write(np.ascontiguousarray(rgb).tobytes())


def load_pgm16(path: str | os.PathLike) -> np.ndarray:
    data = Path(path).read_bytes()
    if data[:2] != b"P5":
        raise PPMHeaderError(f"bad magic {data[:2]!r}, expected b'P5'")
    tokens, offset = _read_header(data, 4)
    width, height, maxval = _parse_dims(tokens)
    if maxval != 65535:
        raise PPMMaxvalError(f"unsupported maxval {maxval}, expected 65535")
    need = width * height * 2
    payload = data[offset:offset + need]
    if len(payload) < need:
        raise PPMTruncatedError(f"payload has {len(payload)} bytes, expected {need}")
    return np.frombuffer(payload, dtype=">u2").reshape(height, width).astype(np.int64)


# ---------------------------------------------------------------------------
# label maps and raw arrays

def save_labels(labels: LabelMap, path: str | os.PathLike, format: str = "csv") -> None:
    """Write a label map as CSV (one row per image row) or 16-bit PGM."""
    grid = np.asarray(labels.labels)
    if format == "csv":
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            for row in grid:
                fh.write(",".join(str(int(x)) for x in row))
                fh.write("\n")
    elif format == "pgm16":
        if labels.num_labels > 65535:
            raise LabelOverflowError(
                f"{labels.num_labels} labels do not fit a 16-bit PGM (max 65535)")
        h, w = grid.shape
        with open(path, "wb") as fh:
            fh.write(f"P5\n{w} {h}\n65535\n".encode("ascii"))
            fh.write(grid.astype(">u2").tobytes())
    else:
        raise ValueError(f"unknown label format {format!r}")


def load_labels_csv(path: str | os.PathLike) -> np.ndarray:
    with open(path, encoding="utf-8") as fh:
        rows = [[int(x) for x in line.split(",")] for line in fh if line.strip()]
    return np.array(rows, dtype=np.int64)


def save_field_csv(field: np.ndarray, path: str | os.PathLike) -> None:
    """Row-major CSV of a scalar field, 17 significant digits."""
    np.savetxt(path, np.asarray(field, dtype=np.float64), fmt="%.17g", delimiter=",")


def load_field_csv(path: str | os.PathLike) -> np.ndarray:
    return np.atleast_2d(np.loadtxt(path, delimiter=",", dtype=np.float64))


def save_lab_csv(image: np.ndarray, path: str | os.PathLike) -> None:
    """One ``i,j,L,a,b`` line per pixel, exact to 17 significant digits."""
    image = check_image(image)
    h, w, _ = image.shape
    ii, jj = np.indices((h, w))
    table = np.column_stack([ii.ravel(), jj.ravel(), image.reshape(-1, 3)])
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("i,j,L,a,b\n")
        for row in table:
            fh.write(f"{int(row[0])},{int(row[1])},"
                     f"{row[2]:.17g},{row[3]:.17g},{row[4]:.17g}\n")


def load_lab_csv(path: str | os.PathLike) -> np.ndarray:
    table = np.atleast_2d(np.loadtxt(path, delimiter=",", skiprows=1, dtype=np.float64))
    ii = table[:, 0].astype(int)
    jj = table[:, 1].astype(int)
    image = np.full((ii.max() + 1, jj.max() + 1, 3), np.nan)
    image[ii, jj] = table[:, 2:5]
    return check_image(image)


def load_image_lab(path: str | os.PathLike) -> np.ndarray:
    """Load a PPM (converted to CIELAB) or an ``i,j,L,a,b`` CSV."""
    if str(path).lower().endswith(".csv"):
        return load_lab_csv(path)
    return rgb_to_cielab(load_ppm(path))
