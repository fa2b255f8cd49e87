"""Banded block operators on block sequence spaces, represented exactly.

A two-sided space is ``... + D(-2) + D(-1) + H(0) + D(1) + D(2) + ...`` where
every slot with negative index has dimension ``neg_dim``, slot 0 has
``center_dim`` and every positive slot ``pos_dim``.  A one-sided space keeps
only the indices ``>= 0``.

A :class:`SeqOperator` stores the blocks of rows ``|i| <= radius`` explicitly
and, for all rows outside, a finite set of Toeplitz diagonals: block
``(i, i + d)`` equals ``left_tail[d]`` for ``i < -radius`` and
``right_tail[d]`` for ``i > radius``.  Comparing the stored window and tails
of two operators therefore decides equality of the infinite operators, and
applying one to a finitely supported vector is exact.
"""

from collections import defaultdict
from dataclasses import dataclass

import numpy as np

from .errors import LayoutMismatch
from .jsonio import matrix_from_json, matrix_to_json
from .numlin import adjoint, opnorm


@dataclass(frozen=True)
class SlotLayout:
    neg_dim: int
    center_dim: int
    pos_dim: int
    two_sided: bool = True

    def __post_init__(self):
        if min(self.neg_dim, self.center_dim, self.pos_dim) < 0:
            raise LayoutMismatch("slot dimensions must be non-negative")
        if not self.two_sided and self.neg_dim != 0:
            raise LayoutMismatch("one-sided layouts have no negative slots")

    @classmethod
    def one_sided(cls, center_dim, pos_dim):
        return cls(0, center_dim, pos_dim, two_sided=False)

    def has(self, i):
        return self.two_sided or i >= 0

    def dim(self, i):
        if i < 0:
            if not self.two_sided:
                raise LayoutMismatch(f"slot {i} does not exist in a one-sided layout")
            return self.neg_dim
        return self.center_dim if i == 0 else self.pos_dim

    def offsets(self, lo, hi):
        """Start offsets of slots lo..hi inside a dense window, plus total size."""
        out, pos = {}, 0
        for i in range(lo, hi + 1):
            out[i] = pos
            pos += self.dim(i)
        return out, pos

    def to_json(self):
        return {
            "neg_dim": self.neg_dim,
            "center_dim": self.center_dim,
            "pos_dim": self.pos_dim,
            "sidedness": "two_sided" if self.two_sided else "one_sided_nonneg",
        }

    @classmethod
    def from_json(cls, d):
        return cls(
            int(d["neg_dim"]),
            int(d["center_dim"]),
            int(d["pos_dim"]),
            d.get("sidedness", "two_sided") == "two_sided",
        )


def _cols(x):
    return 1 if x.ndim == 1 else x.shape[1]


def _c(m):
    return np.asarray(m, dtype=np.complex128)


class FiniteVector:
    """Finitely supported vector of a block sequence space.

    Blocks may be 1-D (a single vector) or 2-D with ``k`` columns, in which
    case the object carries ``k`` vectors at once and every operation acts
    column-wise.
    """

    def __init__(self, layout, blocks):
        self.layout = layout
        self.blocks = {}
        for i, x in blocks.items():
            x = _c(x)
            if not layout.has(i):
                raise LayoutMismatch(f"slot {i} not in layout")
            if x.shape[0] != layout.dim(i):
                raise LayoutMismatch(
                    f"block {i} has length {x.shape[0]}, slot dimension is {layout.dim(i)}"
                )
            self.blocks[int(i)] = x

    @classmethod
    def delta(cls, layout, index, x):
        return cls(layout, {index: x})

    @property
    def support(self):
        return sorted(self.blocks)

    def block(self, i, ncols=None):
        if i in self.blocks:
            return self.blocks[i]
        shape = (self.layout.dim(i),) if ncols is None else (self.layout.dim(i), ncols)
        return np.zeros(shape, complex)

    def _ncols(self):
        for x in self.blocks.values():
            return None if x.ndim == 1 else x.shape[1]
        return None

    def __add__(self, other):
        blocks = dict(self.blocks)
        for i, x in other.blocks.items():
            blocks[i] = blocks[i] + x if i in blocks else x
        return FiniteVector(self.layout, blocks)

    def __sub__(self, other):
        return self + other.scale(-1.0)

    def scale(self, c):
        return FiniteVector(self.layout, {i: c * x for i, x in self.blocks.items()})

    def inner(self, other):
        """<self, other>, conjugate-linear in ``self`` (u^H v for batched blocks)."""
        total = 0
        vectors = True
        for i in set(self.blocks) & set(other.blocks):
            a, b = self.blocks[i], other.blocks[i]
            vectors = vectors and a.ndim == 1 and b.ndim == 1
            term = adjoint(a.reshape(a.shape[0], _cols(a))) @ b.reshape(b.shape[0], _cols(b))
            total = total + term
        if vectors and np.ndim(total) == 2:
            return complex(total[0, 0])
        return total

    def norm(self):
        return float(np.sqrt(sum(np.sum(np.abs(x) ** 2) for x in self.blocks.values())))

    def max_block_norm(self):
        """Largest per-block operator (or vector) norm; 0 for the zero vector."""
        vals = [opnorm(np.atleast_2d(x.T).T) for x in self.blocks.values()]
        return max(vals, default=0.0)

    def to_dense(self, lo, hi):
        offs, size = self.layout.offsets(lo, hi)
        k = self._ncols()
        out = np.zeros((size,) if k is None else (size, k), complex)
        for i, x in self.blocks.items():
            if i < lo or i > hi:
                if np.any(x != 0):
                    raise LayoutMismatch(f"vector has support at {i} outside [{lo}, {hi}]")
                continue
            out[offs[i] : offs[i] + x.shape[0]] = x
        return out

    def to_json(self):
        return {
            "layout": self.layout.to_json(),
            "blocks": {
                str(i): {"re": x.real.tolist(), "im": x.imag.tolist()}
                for i, x in sorted(self.blocks.items())
            },
        }

    @classmethod
    def from_json(cls, d):
        layout = SlotLayout.from_json(d["layout"])
        blocks = {
            int(i): np.asarray(b["re"], float) + 1j * np.asarray(b.get("im", 0.0), float)
            for i, b in d["blocks"].items()
        }
        return cls(layout, blocks)


class SeqOperator:
    """Eventually-Toeplitz banded block operator (see module docstring)."""

    def __init__(self, layout_in, layout_out, window, left_tail, right_tail, radius):
        self.layout_in = layout_in
        self.layout_out = layout_out
        self.radius = int(radius)
        self.window = {(int(i), int(j)): _c(b) for (i, j), b in window.items()}
        self.left_tail = {int(d): _c(b) for d, b in left_tail.items()}
        self.right_tail = {int(d): _c(b) for d, b in right_tail.items()}
        self.check_seam()
        self._by_col = defaultdict(list)
        self._by_row = defaultdict(list)
        for (i, j), b in self.window.items():
            self._by_col[j].append((i, b))
            self._by_row[i].append((j, b))

    def check_seam(self):
        """Validate block shapes and that every tail block lands on uniform slots.

        Rows ``> radius`` may only reach columns ``>= 1`` and rows ``< -radius``
        only columns ``<= -1``; this is what makes the tails well defined.
        """
        w = self.radius
        lin, lout = self.layout_in, self.layout_out
        if w < 0:
            raise LayoutMismatch("radius must be non-negative")
        if lin.two_sided != lout.two_sided:
            raise LayoutMismatch("input and output layouts differ in sidedness")
        for (i, j), b in self.window.items():
            if abs(i) > w:
                raise LayoutMismatch(f"window row {i} outside radius {w}")
            if not (lout.has(i) and lin.has(j)):
                raise LayoutMismatch(f"block ({i}, {j}) outside the layouts")
            if b.shape != (lout.dim(i), lin.dim(j)):
                raise LayoutMismatch(
                    f"block ({i}, {j}) has shape {b.shape}, "
                    f"expected {(lout.dim(i), lin.dim(j))}"
                )
        if self.left_tail and not lout.two_sided:
            raise LayoutMismatch("one-sided operators have no left tail")
        for d, b in self.left_tail.items():
            if d > w:
                raise LayoutMismatch(f"left tail offset {d} crosses the centre at radius {w}")
            if b.shape != (lout.neg_dim, lin.neg_dim):
                raise LayoutMismatch(f"left tail block {d} has shape {b.shape}")
        for d, b in self.right_tail.items():
            if d < -w:
                raise LayoutMismatch(f"right tail offset {d} crosses the centre at radius {w}")
            if b.shape != (lout.pos_dim, lin.pos_dim):
                raise LayoutMismatch(f"right tail block {d} has shape {b.shape}")
        return True

    # -- structure ---------------------------------------------------------

    @property
    def band(self):
        offs = [abs(d) for d in self.left_tail] + [abs(d) for d in self.right_tail]
        offs += [abs(j - i) for i, j in self.window]
        return max(offs, default=0)

    @property
    def tail_band(self):
        offs = [abs(d) for d in self.left_tail] + [abs(d) for d in self.right_tail]
        return max(offs, default=0)

    def _row_range(self, w):
        lo = -w if self.layout_out.two_sided else 0
        return range(lo, w + 1)

    def block(self, i, j):
        lin, lout = self.layout_in, self.layout_out
        if not (lout.has(i) and lin.has(j)):
            raise LayoutMismatch(f"block ({i}, {j}) outside the layouts")
        if abs(i) <= self.radius:
            b = self.window.get((i, j))
        elif i < 0:
            b = self.left_tail.get(j - i)
        else:
            b = self.right_tail.get(j - i)
        if b is None:
            return np.zeros((lout.dim(i), lin.dim(j)), complex)
        return b

    def row_cols(self, i):
        """Column indices of the stored (possibly nonzero) blocks of row ``i``."""
        if abs(i) <= self.radius:
            return sorted(j for j, _ in self._by_row.get(i, ()))
        tail = self.left_tail if i < 0 else self.right_tail
        return sorted(i + d for d in tail if self.layout_in.has(i + d))

    def col_rows(self, j):
        rows = {i for i, _ in self._by_col.get(j, ())}
        w = self.radius
        for d in self.left_tail:
            if j - d < -w:
                rows.add(j - d)
        for d in self.right_tail:
            if j - d > w:
                rows.add(j - d)
        return sorted(i for i in rows if self.layout_out.has(i))

    # -- action ------------------------------------------------------------

    def apply(self, v):
        """Exact product with a finitely supported vector."""
        if v.layout != self.layout_in:
            raise LayoutMismatch("vector layout does not match operator input layout")
        w = self.radius
        lout = self.layout_out
        out = {}

        def acc(i, y):
            out[i] = out[i] + y if i in out else y

        for j, x in v.blocks.items():
            for i, b in self._by_col.get(j, ()):
                acc(i, b @ x)
            for d, b in self.left_tail.items():
                i = j - d
                if i < -w:
                    acc(i, b @ x)
            for d, b in self.right_tail.items():
                i = j - d
                if i > w and lout.has(i):
                    acc(i, b @ x)
        return FiniteVector(lout, out)

    def adjoint(self):
        """The Hilbert-space adjoint, with the window widened by the tail band."""
        w = self.radius + self.tail_band
        window = {}
        for i in self._row_range(w):
            if not self.layout_in.has(i):
                continue
            for j in self.col_rows(i):
                window[(i, j)] = adjoint(self.block(j, i))
        left = {-d: adjoint(b) for d, b in self.left_tail.items()}
        right = {-d: adjoint(b) for d, b in self.right_tail.items()}
        return SeqOperator(self.layout_out, self.layout_in, window, left, right, w)

    def adjoint_apply(self, v):
        return self.adjoint().apply(v)

    @property
    def H(self):
        return self.adjoint()

    def __matmul__(self, other):
        if isinstance(other, FiniteVector):
            return self.apply(other)
        return compose_window(self, other)

    def __add__(self, other):
        return self._combine(other, 1.0)

    def __sub__(self, other):
        return self._combine(other, -1.0)

    def scale(self, c):
        return SeqOperator(
            self.layout_in,
            self.layout_out,
            {k: c * b for k, b in self.window.items()},
            {d: c * b for d, b in self.left_tail.items()},
            {d: c * b for d, b in self.right_tail.items()},
            self.radius,
        )

    def _combine(self, other, sign):
        if (self.layout_in, self.layout_out) != (other.layout_in, other.layout_out):
            raise LayoutMismatch("operator layouts differ")
        w = max(self.radius, other.radius)
        a, b = self.widen(w), other.widen(w)
        window = dict(a.window)
        for k, blk in b.window.items():
            window[k] = window[k] + sign * blk if k in window else sign * blk
        tails = []
        for ta, tb in ((a.left_tail, b.left_tail), (a.right_tail, b.right_tail)):
            t = dict(ta)
            for d, blk in tb.items():
                t[d] = t[d] + sign * blk if d in t else sign * blk
            tails.append(t)
        return SeqOperator(self.layout_in, self.layout_out, window, tails[0], tails[1], w)

    def widen(self, radius):
        """Equivalent operator whose explicit window has at least ``radius``."""
        if radius <= self.radius:
            return self
        window = dict(self.window)
        for i in self._row_range(radius):
            if abs(i) <= self.radius:
                continue
            for j in self.row_cols(i):
                window[(i, j)] = self.block(i, j)
        return SeqOperator(
            self.layout_in, self.layout_out, window, self.left_tail, self.right_tail, radius
        )

    def dense_window(self, lo, hi, col_lo=None, col_hi=None):
        """Dense matrix of the blocks with rows lo..hi and columns col_lo..col_hi."""
        col_lo = lo if col_lo is None else col_lo
        col_hi = hi if col_hi is None else col_hi
        roff, rsize = self.layout_out.offsets(lo, hi)
        coff, csize = self.layout_in.offsets(col_lo, col_hi)
        out = np.zeros((rsize, csize), complex)
        for i in range(lo, hi + 1):
            for j in self.row_cols(i):
                if col_lo <= j <= col_hi:
                    b = self.block(i, j)
                    out[roff[i] : roff[i] + b.shape[0], coff[j] : coff[j] + b.shape[1]] = b
        return out

    # -- serialization -----------------------------------------------------

    def to_json(self):
        return {
            "layout_in": self.layout_in.to_json(),
            "layout_out": self.layout_out.to_json(),
            "radius": self.radius,
            "window": {f"{i},{j}": matrix_to_json(b) for (i, j), b in sorted(self.window.items())},
            "left_tail": {str(d): matrix_to_json(b) for d, b in sorted(self.left_tail.items())},
            "right_tail": {str(d): matrix_to_json(b) for d, b in sorted(self.right_tail.items())},
        }

    @classmethod
    def from_json(cls, d):
        window = {}
        for key, b in d["window"].items():
            i, j = (int(t) for t in key.split(","))
            window[(i, j)] = matrix_from_json(b)
        return cls(
            SlotLayout.from_json(d["layout_in"]),
            SlotLayout.from_json(d["layout_out"]),
            window,
            {int(k): matrix_from_json(b) for k, b in d.get("left_tail", {}).items()},
            {int(k): matrix_from_json(b) for k, b in d.get("right_tail", {}).items()},
            int(d["radius"]),
        )


def identity(layout):
    left = {0: np.eye(layout.neg_dim)} if layout.two_sided else {}
    return SeqOperator(
        layout, layout, {(0, 0): np.eye(layout.center_dim)}, left, {0: np.eye(layout.pos_dim)}, 0
    )


def compose_window(a, b, radius=0):
    """Exact product ``a @ b`` (apply ``b`` first).

    Tails multiply as Toeplitz symbols; the result's radius is at least
    ``radius`` and large enough that its tails are well defined.
    """
    if a.layout_in != b.layout_out:
        raise LayoutMismatch("inner layouts of the product differ")
    w = max(radius, a.radius, b.radius + a.tail_band, a.tail_band + b.tail_band)
    window = {}
    lo = -w if a.layout_out.two_sided else 0
    for i in range(lo, w + 1):
        row = {}
        for j in a.row_cols(i):
            aij = a.block(i, j)
            for k in b.row_cols(j):
                prod = aij @ b.block(j, k)
                row[k] = row[k] + prod if k in row else prod
        for k, blk in row.items():
            window[(i, k)] = blk
    tails = []
    for ta, tb in ((a.left_tail, b.left_tail), (a.right_tail, b.right_tail)):
        t = {}
        for da, ba in ta.items():
            for db, bb in tb.items():
                prod = ba @ bb
                t[da + db] = t[da + db] + prod if da + db in t else prod
        tails.append(t)
    return SeqOperator(b.layout_in, a.layout_out, window, tails[0], tails[1], w)


def structural_distance(a, b):
    """Largest block-norm discrepancy between two operators over window and tails."""
    if (a.layout_in, a.layout_out) != (b.layout_in, b.layout_out):
        raise LayoutMismatch("operator layouts differ")
    worst = 0.0
    for ta, tb in ((a.left_tail, b.left_tail), (a.right_tail, b.right_tail)):
        for d in set(ta) | set(tb):
            za = ta.get(d)
            zb = tb.get(d)
            if za is None:
                za = np.zeros_like(zb)
            if zb is None:
                zb = np.zeros_like(za)
            worst = max(worst, opnorm(za - zb))
    w = max(a.radius, b.radius)
    lo = -w if a.layout_out.two_sided else 0
    for i in range(lo, w + 1):
        for j in set(a.row_cols(i)) | set(b.row_cols(i)):
            worst = max(worst, opnorm(a.block(i, j) - b.block(i, j)))
    return worst


def structural_equal(a, b, tol=1e-9):
    return structural_distance(a, b) <= tol
