"""Bernoulli observation masks and the projection operators built on them.

The mask stores the observed cells as sorted coordinate arrays with row and
column slice indices, so operators touch only observed cells (O(|cells|)
instead of O(d1*d2) where it matters). Masks are immutable after
construction.
"""

import warnings
from dataclasses import dataclass, field

import numpy as np
from numpy.random import Generator, Philox

__all__ = [
    "ObservationMask",
    "LooSelector",
    "sample_mask",
    "project",
    "scaled_residual",
    "loo_project",
    "save_mask",
    "load_mask",
]


@dataclass(frozen=True)
class ObservationMask:
    """Set of observed (i, j) cells of a d1 x d2 matrix.

    rows/cols are sorted in row-major order. row_ptr[i]:row_ptr[i+1] slices
    the cells of row i; col_order/col_ptr give the same access by column.
    """

    d1: int
    d2: int
    p: float
    seed: int | None
    rows: np.ndarray
    cols: np.ndarray
    row_ptr: np.ndarray = field(repr=False)
    col_order: np.ndarray = field(repr=False)
    col_ptr: np.ndarray = field(repr=False)

    @classmethod
    def from_cells(cls, d1, d2, p, rows, cols, seed=None):
        rows = np.asarray(rows, dtype=np.int64)
        cols = np.asarray(cols, dtype=np.int64)
        if rows.shape != cols.shape:
            raise ValueError("rows and cols must have the same length")
        if rows.size and (rows.min() < 0 or rows.max() >= d1
                          or cols.min() < 0 or cols.max() >= d2):
            raise ValueError("cell coordinates out of bounds")
        flat = rows * d2 + cols
        order = np.argsort(flat, kind="stable")
        flat = flat[order]
        if flat.size and np.any(np.diff(flat) == 0):
            raise ValueError("duplicate cells in mask")
        rows, cols = rows[order], cols[order]
        row_ptr = np.searchsorted(rows, np.arange(d1 + 1))
        col_order = np.argsort(cols, kind="stable")
        col_ptr = np.searchsorted(cols[col_order], np.arange(d2 + 1))
        obj = cls(d1=int(d1), d2=int(d2), p=float(p), seed=seed,
                  rows=rows, cols=cols, row_ptr=row_ptr,
                  col_order=col_order, col_ptr=col_ptr)
        for a in (rows, cols, row_ptr, col_order, col_ptr):
            a.setflags(write=False)
        return obj

    @property
    def n_cells(self):
        return int(self.rows.size)

    def row_cells(self, i):
        """Column indices observed in row i."""
        lo, hi = self.row_ptr[i], self.row_ptr[i + 1]
        return self.cols[lo:hi]

    def col_cells(self, j):
        """Row indices observed in column j."""
        lo, hi = self.col_ptr[j], self.col_ptr[j + 1]
        return self.rows[self.col_order[lo:hi]]

    def dense(self):
        """Boolean d1 x d2 indicator of the observed cells."""
        out = np.zeros((self.d1, self.d2), dtype=bool)
        out[self.rows, self.cols] = True
        return out


@dataclass(frozen=True)
class LooSelector:
    """Selects the row or column treated as fully observed, by the stacked
    index l in 1..d1+d2 (rows first, then columns)."""

    l: int

    def axis(self, d1):
        return "row" if self.l <= d1 else "col"

    def index(self, d1):
        """Zero-based target index along the selected axis."""
        return self.l - 1 if self.l <= d1 else self.l - d1 - 1

    def validate(self, d1, d2):
        if not 1 <= self.l <= d1 + d2:
            raise ValueError(f"selector l={self.l} outside 1..{d1 + d2}")


def sample_mask(d1, d2, p, seed):
    """Bernoulli(p) mask; each cell included independently.

    Cell (i, j) is decided by draw number i*d2+j of a counter-based Philox
    stream keyed by `seed`, so the mask is reproducible and independent of
    evaluation order.
    """
    if not 0.0 < p <= 1.0:
        raise ValueError(f"sampling rate p={p} outside (0, 1]")
    rng = Generator(Philox(key=np.uint64(seed)))
    u = rng.random(d1 * d2)
    flat = np.nonzero(u < p)[0]
    return ObservationMask.from_cells(d1, d2, p, flat // d2, flat % d2,
                                      seed=int(seed))


def _check_dims(m, mask):
    if m.shape != (mask.d1, mask.d2):
        raise ValueError(f"matrix shape {m.shape} does not match mask "
                         f"({mask.d1}, {mask.d2})")


def project(m, mask):
    """Keep entries at observed cells, zero elsewhere."""
    m = np.asarray(m, dtype=np.float64)
    _check_dims(m, mask)
    out = np.zeros_like(m)
    out[mask.rows, mask.cols] = m[mask.rows, mask.cols]
    return out


def scaled_residual(f, m_star, mask):
    """(1/p) * P_Omega(X @ Y.T - M*), evaluated only at observed cells."""
    x = np.asarray(f.x, dtype=np.float64)
    y = np.asarray(f.y, dtype=np.float64)
    m_star = np.asarray(m_star, dtype=np.float64)
    _check_dims(m_star, mask)
    if x.shape[0] != mask.d1 or y.shape[0] != mask.d2:
        raise ValueError("factor shapes do not match mask dims")
    vals = np.einsum("ij,ij->i", x[mask.rows], y[mask.cols])
    vals -= m_star[mask.rows, mask.cols]
    vals /= mask.p
    out = np.zeros((mask.d1, mask.d2))
    out[mask.rows, mask.cols] = vals
    return out


def loo_project(m, mask, sel, p):
    """Apply P_{Omega minus line l} + p * P_{line l}.

    On every row (column) except the selector's target this is `project`;
    the target line is returned in full, scaled by p. Dividing the result
    by p therefore yields the leave-one-out observation operator.
    """
    m = np.asarray(m, dtype=np.float64)
    _check_dims(m, mask)
    sel.validate(mask.d1, mask.d2)
    out = project(m, mask)
    t = sel.index(mask.d1)
    if sel.axis(mask.d1) == "row":
        out[t, :] = p * m[t, :]
    else:
        out[:, t] = p * m[:, t]
    return out


def save_mask(mask, path):
    """Coordinate-list text format: header 'd1 d2 p seed', one 'i j' per line."""
    with open(path, "w") as fh:
        seed = "-" if mask.seed is None else mask.seed
        fh.write(f"{mask.d1} {mask.d2} {mask.p!r} {seed}\n")
        for i, j in zip(mask.rows, mask.cols):
            fh.write(f"{i} {j}\n")


def load_mask(path):
    with open(path) as fh:
        header = fh.readline().split()
        if len(header) != 4:
            raise ValueError(f"malformed mask header in {path}")
        d1, d2, p = int(header[0]), int(header[1]), float(header[2])
        seed = None if header[3] == "-" else int(header[3])
        with warnings.catch_warnings():
            # empty masks are legal; loadtxt warns on zero data lines
            warnings.simplefilter("ignore", UserWarning)
            cells = np.loadtxt(fh, dtype=np.int64, ndmin=2)
    if cells.size == 0:
        cells = np.empty((0, 2), dtype=np.int64)
    return ObservationMask.from_cells(d1, d2, p, cells[:, 0], cells[:, 1],
                                      seed=seed)
