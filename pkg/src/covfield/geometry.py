"""Point sets, distance utilities, data generators and bandwidth selection.

All randomness goes through ``numpy.random.default_rng`` (PCG64), so every
generator here replays bit-identically for a given seed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateDataError, FormatError

PRESETS = {
    "uniform1d": (0.02, 0.26, 0.5, 0.74, 0.98),
    "nonuniform1d": (0.02, 0.12, 0.22, 0.6, 0.98),
}


@dataclass(frozen=True)
class PointSet:
    """An ordered, immutable collection of n points in R^d.

    ``coords`` is an (n, d) float array; one row per point.  Coordinates must
    be finite and n >= 1, d >= 1.
    """

    coords: np.ndarray = field(repr=False)

    def __post_init__(self):
        c = np.atleast_2d(np.asarray(self.coords, dtype=float))
        if c.ndim != 2:
            raise ValueError(f"coords must be 2-d (n, d), got shape {c.shape}")
        if c.shape[0] < 1 or c.shape[1] < 1:
            raise ValueError(f"need n >= 1 and d >= 1, got shape {c.shape}")
        if not np.all(np.isfinite(c)):
            raise ValueError("coordinates must be finite")
        c = c.copy()
        c.flags.writeable = False
        object.__setattr__(self, "coords", c)

    @property
    def n(self) -> int:
        return self.coords.shape[0]

    @property
    def d(self) -> int:
        return self.coords.shape[1]

    def __len__(self) -> int:
        return self.n

    def __repr__(self) -> str:
        return f"PointSet(n={self.n}, d={self.d})"


def as_point(x, d: int | None = None) -> np.ndarray:
    """Coerce a scalar or length-d sequence to a 1-d coordinate array."""
    p = np.atleast_1d(np.asarray(x, dtype=float))
    if p.ndim != 1:
        raise ValueError(f"a point must be 1-d, got shape {p.shape}")
    if d is not None and p.shape[0] != d:
        raise ValueError(f"point has dimension {p.shape[0]}, expected {d}")
    return p


def dist_to_set(x, S: PointSet) -> tuple[float, int]:
    """Distance from ``x`` to the nearest point of ``S``.

    Returns ``(value, index)`` where ``index`` is the argmin (ties broken by
    the lowest index, as ``argmin`` does).
    """
    p = as_point(x, S.d)
    dists = np.linalg.norm(S.coords - p, axis=1)
    i = int(np.argmin(dists))
    return float(dists[i]), i


def preset_observations(name: str) -> PointSet:
    """Named 1-d observation layouts used throughout the experiments."""
    try:
        vals = PRESETS[name]
    except KeyError:
        raise ValueError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None
    return PointSet(np.array(vals, dtype=float)[:, None])


def generate_gaussian_cloud(n: int, d: int, seed: int) -> PointSet:
    """n i.i.d. standard-normal points in R^d, deterministic per seed."""
    if n < 1 or d < 1:
        raise ValueError("need n >= 1 and d >= 1")
    rng = np.random.default_rng(seed)
    return PointSet(rng.standard_normal((n, d)))


def load_csv(path) -> PointSet:
    """Read one point per line, comma-separated floats.

    A single non-numeric first row is treated as a header and skipped.  Rows
    of differing arity raise :class:`FormatError`.
    """
    rows = []
    arity = None
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            cells = line.split(",")
            try:
                vals = [float(c) for c in cells]
            except ValueError:
                if lineno == 1:
                    continue  # header
                raise FormatError(f"{path}: non-numeric value on line {lineno}") from None
            if arity is None:
                arity = len(vals)
            elif len(vals) != arity:
                raise FormatError(
                    f"{path}: line {lineno} has {len(vals)} fields, expected {arity}"
                )
            rows.append(vals)
    if not rows:
        raise FormatError(f"{path}: no data rows")
    return PointSet(np.array(rows, dtype=float))


def standardize(X: PointSet) -> PointSet:
    """Shift/scale each column to mean 0 and unit sample (n-1) variance."""
    c = X.coords
    if c.shape[0] < 2:
        raise DegenerateDataError("standardize needs at least two points")
    sd = c.std(axis=0, ddof=1)
    if np.any(sd == 0):
        bad = np.flatnonzero(sd == 0)
        raise DegenerateDataError(f"zero-variance column(s): {bad.tolist()}")
    return PointSet((c - c.mean(axis=0)) / sd)


def bandwidth_percentile(X: PointSet, q: float) -> float:
    """Bandwidth from the q-th percentile of all pairwise distances.

    Nearest-rank convention: the value at rank ceil((q/100) * m) of the
    m = n(n-1)/2 pairwise distances sorted increasingly.
    """
    if X.n < 2:
        raise ValueError("need at least two points")
    if not 0 < q < 100:
        raise ValueError("percentile must lie strictly between 0 and 100")
    from scipy.spatial.distance import pdist

    d = np.sort(pdist(X.coords))
    rank = int(np.ceil(q / 100.0 * d.size))
    rank = min(max(rank, 1), d.size)
    value = float(d[rank - 1])
    if value == 0.0:
        raise DegenerateDataError("selected pairwise distance is zero (duplicate points)")
    return value


def subsample(X: PointSet, m: int, seed: int) -> PointSet:
    """m distinct rows of X, uniform without replacement, seeded."""
    if not 1 <= m <= X.n:
        raise ValueError(f"need 1 <= m <= {X.n}, got {m}")
    rng = np.random.default_rng(seed)
    idx = rng.choice(X.n, size=m, replace=False)
    return PointSet(X.coords[idx])
