"""Grayscale escape-time and inverse-iteration images of Julia sets, and motion frame strips."""

from __future__ import annotations

import csv
import os
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .motion.hausdorff import hausdorff_distance
from .motion.realize import beta, follow_motion
from .parallel import pmap

PPM_HEADER = "P6\n{w} {h}\n255\n"


@dataclass(frozen=True)
class ImageBuffer:
    width: int
    height: int
    pixels: bytes  # row-major RGB, origin top-left
    center: complex
    scale: float  # units per pixel

    def __post_init__(self):
        if len(self.pixels) != 3 * self.width * self.height:
            raise ValueError("pixel buffer does not match width and height")

    def to_ppm(self) -> bytes:
        return PPM_HEADER.format(w=self.width, h=self.height).encode("ascii") + self.pixels

    def write_ppm(self, path) -> None:
        with open(path, "wb") as fh:
            fh.write(self.to_ppm())

    def gray(self) -> np.ndarray:
        return np.frombuffer(self.pixels, dtype=np.uint8).reshape(self.height, self.width, 3)[:, :, 0]

    def pixel_of(self, z: complex) -> tuple[int, int]:
        """(row, column) of the pixel containing z."""
        col = int(np.floor((z.real - self.center.real) / self.scale + self.width / 2))
        row = int(np.floor((self.center.imag - z.imag) / self.scale + self.height / 2))
        return row, col


def pixel_grid(width: int, height: int, center: complex, scale: float) -> np.ndarray:
    """Pixel-center coordinates, row 0 at the top."""
    x = center.real + (np.arange(width) + 0.5 - width / 2) * scale
    y = center.imag - (np.arange(height) + 0.5 - height / 2) * scale
    return x[None, :] + 1j * y[:, None]


def _to_rgb(gray: np.ndarray) -> bytes:
    return np.repeat(gray.astype(np.uint8)[:, :, None], 3, axis=2).tobytes()


def escape_counts(c: complex, z: np.ndarray, max_iter: int, radius: float = 2.0) -> np.ndarray:
    """First n with |f^n(z)| > max(radius, |c|+1), or max_iter for points that stay."""
    r2 = max(radius, abs(c) + 1.0) ** 2
    z = np.array(z, dtype=complex)
    n = np.full(z.shape, max_iter, dtype=np.int64)
    alive = np.ones(z.shape, dtype=bool)
    for k in range(max_iter):
        if not alive.any():
            break
        za = z[alive]
        out = za.real ** 2 + za.imag ** 2 > r2
        idx = np.flatnonzero(alive)
        n.flat[idx[out]] = k
        alive.flat[idx[out]] = False
        z.flat[idx[~out]] = za[~out] * za[~out] + c
    return n


def inverse_iteration_points(c: complex, n_points: int, seed: int = 0, burn_in: int = 32) -> np.ndarray:
    """Random backward orbit from beta(c); every retained point lies on J(f_c) to rounding."""
    rng = np.random.default_rng(seed)
    signs = rng.integers(0, 2, size=n_points + burn_in) * 2 - 1
    z = beta(c)
    out = np.empty(n_points, dtype=complex)
    for k, s in enumerate(signs):
        z = s * np.sqrt(complex(z - c))
        if k >= burn_in:
            out[k - burn_in] = z
    return out


def plot_points(points: np.ndarray, width: int, height: int, center: complex, scale: float) -> ImageBuffer:
    """White canvas with the given points drawn black."""
    img = np.full((height, width), 255, dtype=np.uint8)
    col = np.floor((points.real - center.real) / scale + width / 2).astype(np.int64)
    row = np.floor((center.imag - points.imag) / scale + height / 2).astype(np.int64)
    ok = (col >= 0) & (col < width) & (row >= 0) & (row < height)
    img[row[ok], col[ok]] = 0
    return ImageBuffer(width, height, _to_rgb(img), complex(center), float(scale))


def render_julia(c: complex, width: int = 400, height: int = 400, center: complex = 0j, scale: float = 0.01,
                 method: str = "escape", max_iter: int = 200, n_points: int = 200000, seed: int = 0) -> ImageBuffer:
    """Escape-time grayscale (filled Julia set black, fast escape light) or an inverse-iteration plot."""
    c = complex(c)
    if width < 1 or height < 1 or not scale > 0:
        raise ValueError("viewport needs positive size and scale")
    if method == "inverse":
        return plot_points(inverse_iteration_points(c, n_points, seed), width, height, center, scale)
    if method != "escape":
        raise ValueError(f"unknown method {method!r}")
    rows = np.array_split(np.arange(height), max(1, min(height, 16)))
    grid = pixel_grid(width, height, complex(center), scale)
    counts = np.concatenate(pmap(lambda r: escape_counts(c, grid[r], max_iter), rows), axis=0)
    gray = 255.0 * (1.0 - np.log1p(counts) / np.log1p(max_iter))
    return ImageBuffer(width, height, _to_rgb(np.round(gray)), complex(center), float(scale))


def motion_strip(ctx, seqs: Sequence, frames: int, out_dir, width: int = 400, height: int = 400,
                 center: complex | None = None, scale: float | None = None, g_max: float = 1.0,
                 g_min: float = 1e-6, depth: int = 60, with_derivative: bool = False):
    """Frames of the realized cloud along R_M(theta) ending at c_hat, plus hausdorff.csv.

    ``frames`` counts the c_hat frame; the others sit at geometrically spaced
    potentials from g_max down to g_min. Returns the MotionPath and the CSV rows.
    """
    if frames < 1:
        raise ValueError("need at least one frame")
    os.makedirs(out_dir, exist_ok=True)
    potentials = list(np.geomspace(g_max, g_min, frames - 1)) if frames > 1 else []
    path = follow_motion(ctx, seqs, potentials, depth, with_derivative)
    final = path.frames[-1].batch.positions
    if center is None:
        center = complex(np.mean(final.real), np.mean(final.imag))
    if scale is None:
        span = max(np.ptp(final.real), np.ptp(final.imag), 1e-3)
        scale = 1.25 * span / min(width, height)
    rows = []
    for k, fr in enumerate(path.frames):
        name = f"frame_{k:03d}.ppm"
        row = {"frame": k, "potential": fr.potential, "c_re": fr.c.real, "c_im": fr.c.imag,
               "hausdorff": float("nan"), "file": "", "skipped": fr.skipped}
        if fr.batch is not None:
            plot_points(fr.batch.positions, width, height, center, scale).write_ppm(os.path.join(out_dir, name))
            row["hausdorff"] = hausdorff_distance(fr.batch.positions, final)
            row["file"] = name
        rows.append(row)
    with open(os.path.join(out_dir, "hausdorff.csv"), "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(rows[0]))
        w.writeheader()
        for row in rows:
            w.writerow({k: (repr(float(v)) if isinstance(v, float) else v) for k, v in row.items()})
    return path, rows
