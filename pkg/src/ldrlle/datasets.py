"""Synthetic manifold samples and headerless-CSV point-cloud I/O.

Every generator returns the embedded sample together with its ground-truth
low-dimensional parameters (the preimage), so an embedding can later be
scored against a known answer.  Randomness comes from numpy's PCG64 bit
generator seeded per call; uniform variates are PCG64's native 53-bit-mantissa
doubles, so a given (n, seed) pair reproduces bit-identically across runs.
"""

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import CsvFormatError

# The open ring spans 270 degrees.  The 90-degree gap is larger than four
# point spacings at n = 16, so Euclidean neighborhoods (K <= 4) never jump
# the opening and arc length stays recoverable from the graph.
RING_ARC = 1.5 * np.pi


def _rng(seed):
    return np.random.Generator(np.random.PCG64(seed))


def validate_cloud(data) -> np.ndarray:
    """Check point-cloud invariants and return the data as a float64 array.

    A point cloud is an N x D matrix, one point per row, every entry finite,
    with N >= 1 and D >= 1.  Raises ValueError otherwise.
    """
    arr = np.asarray(data, dtype=float)
    if arr.ndim != 2:
        raise ValueError(f"point cloud must be 2-D, got shape {arr.shape}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError(f"point cloud must be at least 1 x 1, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("point cloud contains non-finite entries")
    return arr


@dataclass
class GeneratedSample:
    """A generated point cloud with its row-aligned ground-truth parameters."""

    points: np.ndarray    # (N, D)
    preimage: np.ndarray  # (N, d)
    generator_name: str
    seed: int


def gen_open_ring(n: int) -> GeneratedSample:
    """Points on the unit circle with a 90-degree gap, parameterized by angle.

    The n angles are uniformly spaced over [0, 3*pi/2]; the preimage is the
    angle itself, which is arc length on the unit circle.  Deterministic.
    """
    if n < 3:
        raise ValueError(f"open ring needs n >= 3, got {n}")
    theta = np.linspace(0.0, RING_ARC, n)
    points = np.column_stack([np.cos(theta), np.sin(theta)])
    return GeneratedSample(points, theta[:, None].copy(), "ring", 0)


def scurve_map(t, h) -> np.ndarray:
    """The S-shaped sheet: (t, h) -> (sin t, h, sign(t) * (cos t - 1))."""
    t = np.asarray(t, dtype=float)
    h = np.asarray(h, dtype=float)
    return np.column_stack([np.sin(t), h, np.sign(t) * (np.cos(t) - 1.0)])


def swissroll_map(t, h) -> np.ndarray:
    """The rolled sheet: (t, h) -> (t cos t, h, t sin t)."""
    t = np.asarray(t, dtype=float)
    h = np.asarray(h, dtype=float)
    return np.column_stack([t * np.cos(t), h, t * np.sin(t)])


def gen_scurve(n: int, seed: int = 0) -> GeneratedSample:
    """n points drawn uniformly on the S-shaped sheet.

    t = 3*pi*(u - 1/2) and the height is 2*v for (u, v) uniform on the unit
    square; the preimage is (t, 2*v), an isometric parameterization.
    """
    if n < 1:
        raise ValueError(f"need n >= 1, got {n}")
    uv = _rng(seed).random((n, 2))
    t = 3.0 * np.pi * (uv[:, 0] - 0.5)
    h = 2.0 * uv[:, 1]
    return GeneratedSample(scurve_map(t, h), np.column_stack([t, h]), "scurve", seed)


def gen_swissroll(n: int, seed: int = 0) -> GeneratedSample:
    """n points drawn uniformly in parameter space on the rolled sheet.

    t = (3*pi/2)*(1 + 2u) and the height is 21*v for (u, v) uniform on the
    unit square; the preimage is (t, 21*v).
    """
    if n < 1:
        raise ValueError(f"need n >= 1, got {n}")
    uv = _rng(seed).random((n, 2))
    t = 1.5 * np.pi * (1.0 + 2.0 * uv[:, 0])
    h = 21.0 * uv[:, 1]
    return GeneratedSample(swissroll_map(t, h), np.column_stack([t, h]), "swissroll", seed)


GENERATORS = {
    "ring": lambda n, seed: gen_open_ring(n),
    "scurve": gen_scurve,
    "swissroll": gen_swissroll,
}


def generate(name: str, n: int, seed: int = 0) -> GeneratedSample:
    """Dispatch to a named generator.  The ring is deterministic (seed unused)."""
    if name not in GENERATORS:
        raise ValueError(f"unknown generator {name!r}; choose from {sorted(GENERATORS)}")
    return GENERATORS[name](n, seed)


def save_csv(cloud, path) -> None:
    """Write a point cloud as headerless CSV.

    Cells use repr of the float, the shortest string that round-trips, so a
    save/load cycle reproduces the array exactly.
    """
    arr = validate_cloud(cloud)
    lines = [",".join(repr(float(v)) for v in row) for row in arr]
    Path(path).write_text("\n".join(lines) + "\n")


def load_csv(path) -> np.ndarray:
    """Read a headerless numeric CSV into a point cloud.

    Raises CsvFormatError naming the offending line for ragged rows and the
    line/column for unparseable cells; non-finite values are rejected by the
    cloud validation.
    """
    lines = Path(path).read_text().splitlines()
    while lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise CsvFormatError(f"{path}: empty file")
    rows = []
    width = None
    for lineno, line in enumerate(lines, start=1):
        cells = line.split(",")
        if width is None:
            width = len(cells)
        elif len(cells) != width:
            raise CsvFormatError(
                f"{path}: ragged row at line {lineno} "
                f"({len(cells)} fields, expected {width})",
                row=lineno,
            )
        parsed = []
        for colno, cell in enumerate(cells, start=1):
            try:
                parsed.append(float(cell))
            except ValueError:
                raise CsvFormatError(
                    f"{path}: cannot parse {cell.strip()!r} at line {lineno}, column {colno}",
                    row=lineno,
                    column=colno,
                ) from None
        rows.append(parsed)
    return validate_cloud(np.array(rows, dtype=float))


def preimage_path(path) -> Path:
    """Sibling file that carries a sample's ground-truth parameters."""
    p = Path(path)
    if p.suffix == ".csv":
        return p.with_suffix(".preimage.csv")
    return Path(str(p) + ".preimage.csv")


def save_sample(sample: GeneratedSample, path) -> None:
    """Write a sample's points to `path` and its preimage to the sibling file."""
    save_csv(sample.points, path)
    save_csv(sample.preimage, preimage_path(path))
