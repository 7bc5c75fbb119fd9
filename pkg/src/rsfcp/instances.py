"""Instance data model for fractional covering / packing LPs.

A covering instance is ``min c^T x  s.t.  A x >= b, x >= 0`` and its packing
dual is ``max b^T y  s.t.  A^T y <= c, y >= 0``.  Rows of ``A`` are the
*elements* (dual variables ``y_e``) and columns are the *sets* (primal
variables ``x_S``).  An instance is *normalized* when ``b = c = 1`` and every
non-zero entry is at least 1.

Text format (line oriented, ``#`` starts a comment)::

    fcp <normalized|general> <n_rows> <n_cols>
    b <n_rows values>          # general only
    c <n_cols values>          # general only
    <row> <col> <value>        # one line per non-zero, 0-based
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

NORMALIZED_TOL = 1e-12


class InstanceError(ValueError):
    """Invalid instance data or malformed instance text."""


class ParseError(InstanceError):
    def __init__(self, lineno: int, message: str) -> None:
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class SparseNonNegMatrix:
    """Non-negative sparse matrix with row-major and column-major views.

    Entries are kept sorted by ``(row, col)``.  ``cm_order`` permutes them into
    ``(col, row)`` order, so ``rows[cm_order]`` lists, column by column, the
    incident rows in ascending order.
    """

    n_rows: int
    n_cols: int
    rows: np.ndarray
    cols: np.ndarray
    vals: np.ndarray
    cm_order: np.ndarray = field(repr=False)
    row_ptr: np.ndarray = field(repr=False)
    col_ptr: np.ndarray = field(repr=False)

    @classmethod
    def from_entries(
        cls, n_rows: int, n_cols: int, entries: Iterable[tuple[int, int, float]]
    ) -> SparseNonNegMatrix:
        if n_rows < 0 or n_cols < 0:
            raise InstanceError("negative dimension")
        seen: set[tuple[int, int]] = set()
        triples = []
        for i, j, v in entries:
            i, j, v = int(i), int(j), float(v)
            if not (0 <= i < n_rows and 0 <= j < n_cols):
                raise InstanceError(f"entry ({i}, {j}) outside {n_rows}x{n_cols}")
            if not math.isfinite(v):
                raise InstanceError(f"non-finite entry at ({i}, {j})")
            if v < 0:
                raise InstanceError(f"negative entry at ({i}, {j})")
            if (i, j) in seen:
                raise InstanceError(f"duplicate entry ({i}, {j})")
            seen.add((i, j))
            if v > 0:
                triples.append((i, j, v))
        triples.sort()
        rows = np.array([t[0] for t in triples], dtype=np.int64)
        cols = np.array([t[1] for t in triples], dtype=np.int64)
        vals = np.array([t[2] for t in triples], dtype=np.float64)
        cm_order = np.lexsort((rows, cols))
        row_ptr = np.zeros(n_rows + 1, dtype=np.int64)
        np.cumsum(np.bincount(rows, minlength=n_rows), out=row_ptr[1:])
        col_ptr = np.zeros(n_cols + 1, dtype=np.int64)
        np.cumsum(np.bincount(cols, minlength=n_cols), out=col_ptr[1:])
        return cls(
            n_rows,
            n_cols,
            _frozen(rows),
            _frozen(cols),
            _frozen(vals),
            _frozen(cm_order),
            _frozen(row_ptr),
            _frozen(col_ptr),
        )

    @classmethod
    def from_dense(cls, dense: Sequence[Sequence[float]]) -> SparseNonNegMatrix:
        arr = np.asarray(dense, dtype=np.float64)
        if arr.ndim != 2:
            raise InstanceError("dense matrix must be 2-D")
        n, m = arr.shape
        return cls.from_entries(
            n, m, ((i, j, arr[i, j]) for i in range(n) for j in range(m) if arr[i, j] != 0)
        )

    @property
    def nnz(self) -> int:
        return len(self.vals)

    def entries(self) -> list[tuple[int, int, float]]:
        return list(zip(self.rows.tolist(), self.cols.tolist(), self.vals.tolist()))

    def row(self, i: int) -> list[tuple[int, float]]:
        """``(col, value)`` pairs of row ``i`` in ascending column order."""
        lo, hi = self.row_ptr[i], self.row_ptr[i + 1]
        return list(zip(self.cols[lo:hi].tolist(), self.vals[lo:hi].tolist()))

    def col(self, j: int) -> list[tuple[int, float]]:
        """``(row, value)`` pairs of column ``j`` in ascending row order."""
        idx = self.cm_order[self.col_ptr[j] : self.col_ptr[j + 1]]
        return list(zip(self.rows[idx].tolist(), self.vals[idx].tolist()))

    def row_counts(self) -> np.ndarray:
        return np.diff(self.row_ptr)

    def col_counts(self) -> np.ndarray:
        return np.diff(self.col_ptr)

    def row_sums(self) -> np.ndarray:
        return np.bincount(self.rows, weights=self.vals, minlength=self.n_rows)

    def col_sums(self) -> np.ndarray:
        return np.bincount(self.cols, weights=self.vals, minlength=self.n_cols)

    def matvec(self, x: np.ndarray) -> np.ndarray:
        """``A x`` (one value per row)."""
        return np.bincount(self.rows, weights=self.vals * x[self.cols], minlength=self.n_rows)

    def rmatvec(self, y: np.ndarray) -> np.ndarray:
        """``A^T y`` (one value per column)."""
        return np.bincount(self.cols, weights=self.vals * y[self.rows], minlength=self.n_cols)

    def to_dense(self) -> np.ndarray:
        out = np.zeros((self.n_rows, self.n_cols))
        out[self.rows, self.cols] = self.vals
        return out

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SparseNonNegMatrix):
            return NotImplemented
        return (
            self.n_rows == other.n_rows
            and self.n_cols == other.n_cols
            and np.array_equal(self.rows, other.rows)
            and np.array_equal(self.cols, other.cols)
            and np.array_equal(self.vals, other.vals)
        )

    __hash__ = None  # type: ignore[assignment]


@dataclass(frozen=True, eq=False)
class GeneralInstance:
    matrix: SparseNonNegMatrix
    b: np.ndarray
    c: np.ndarray

    def __post_init__(self) -> None:
        b = np.array(self.b, dtype=np.float64)
        c = np.array(self.c, dtype=np.float64)
        if b.shape != (self.matrix.n_rows,) or c.shape != (self.matrix.n_cols,):
            raise InstanceError("b/c lengths do not match matrix dimensions")
        for name, v in (("b", b), ("c", c)):
            if not np.all(np.isfinite(v)):
                raise InstanceError(f"non-finite value in {name}")
            if np.any(v < 0):
                raise InstanceError(f"negative value in {name}")
        object.__setattr__(self, "b", _frozen(b))
        object.__setattr__(self, "c", _frozen(c))

    @property
    def n_rows(self) -> int:
        return self.matrix.n_rows

    @property
    def n_cols(self) -> int:
        return self.matrix.n_cols

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, GeneralInstance):
            return NotImplemented
        return (
            self.matrix == other.matrix
            and np.array_equal(self.b, other.b)
            and np.array_equal(self.c, other.c)
        )

    __hash__ = None  # type: ignore[assignment]


@dataclass(frozen=True, eq=False)
class NormalizedInstance:
    """Covering instance in normal form (``b = c = 1``, entries >= 1).

    Empty columns are allowed; empty rows are not, since the corresponding
    covering constraint could never be met.
    """

    matrix: SparseNonNegMatrix
    gamma_p: float = field(init=False)
    gamma_d: float = field(init=False)
    a_max: float = field(init=False)
    sparsity: int = field(init=False)

    def __post_init__(self) -> None:
        m = self.matrix
        if m.nnz and m.vals.min() < 1.0:
            raise InstanceError(f"normalized entry below 1: {m.vals.min()!r}")
        empty = np.flatnonzero(m.row_counts() == 0)
        if len(empty):
            raise InstanceError(f"infeasible covering instance: row {int(empty[0])} has no entries")
        object.__setattr__(self, "gamma_p", float(m.col_sums().max()) if m.n_cols else 0.0)
        object.__setattr__(self, "gamma_d", float(m.row_sums().max()) if m.n_rows else 0.0)
        object.__setattr__(self, "a_max", float(m.vals.max()) if m.nnz else 1.0)
        object.__setattr__(self, "sparsity", int(m.row_counts().max()) if m.n_rows else 0)

    @property
    def n_rows(self) -> int:
        return self.matrix.n_rows

    @property
    def n_cols(self) -> int:
        return self.matrix.n_cols

    @property
    def empty_columns(self) -> list[int]:
        return np.flatnonzero(self.matrix.col_counts() == 0).tolist()

    @classmethod
    def from_dense(cls, dense: Sequence[Sequence[float]]) -> NormalizedInstance:
        return cls(SparseNonNegMatrix.from_dense(dense))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, NormalizedInstance):
            return NotImplemented
        return self.matrix == other.matrix

    __hash__ = None  # type: ignore[assignment]


@dataclass(frozen=True)
class PrimalDualSolution:
    x: np.ndarray
    y: np.ndarray

    @property
    def primal_objective(self) -> float:
        return float(np.sum(self.x))

    @property
    def dual_objective(self) -> float:
        return float(np.sum(self.y))


def gamma_p(inst: NormalizedInstance) -> float:
    """Largest column sum of ``A``."""
    return float(inst.matrix.col_sums().max()) if inst.n_cols else 0.0


def gamma_d(inst: NormalizedInstance) -> float:
    """Largest row sum of ``A``."""
    return float(inst.matrix.row_sums().max()) if inst.n_rows else 0.0


def a_max(inst: NormalizedInstance) -> float:
    """Largest entry; 1 for an entry-free matrix."""
    return float(inst.matrix.vals.max()) if inst.matrix.nnz else 1.0


# ---------------------------------------------------------------------------
# text I/O


def _strip(line: str) -> str:
    return line.split("#", 1)[0].strip()


def _parse_float(tok: str, lineno: int) -> float:
    try:
        v = float(tok)
    except ValueError:
        raise ParseError(lineno, f"not a number: {tok!r}") from None
    if not math.isfinite(v):
        raise ParseError(lineno, f"non-finite value: {tok!r}")
    if v < 0:
        raise ParseError(lineno, "negative entry")
    return v


def _parse_vector(tokens: list[str], key: str, size: int, lineno: int) -> list[float]:
    if not tokens or tokens[0] != key:
        raise ParseError(lineno, f"expected '{key}' line")
    if len(tokens) - 1 != size:
        raise ParseError(lineno, f"dimension mismatch: '{key}' has {len(tokens) - 1} values, expected {size}")
    return [_parse_float(t, lineno) for t in tokens[1:]]


def parse_instance(text: str) -> GeneralInstance | NormalizedInstance:
    lines = [(no, _strip(raw)) for no, raw in enumerate(text.splitlines(), start=1)]
    lines = [(no, s) for no, s in lines if s]
    if not lines:
        raise ParseError(1, "missing header")
    it = iter(lines)
    no, header = next(it)
    parts = header.split()
    if len(parts) != 4 or parts[0] != "fcp" or parts[1] not in ("normalized", "general"):
        raise ParseError(no, "header must be 'fcp <normalized|general> <n_rows> <n_cols>'")
    try:
        n, m = int(parts[2]), int(parts[3])
    except ValueError:
        raise ParseError(no, "dimensions must be integers") from None
    if n < 0 or m < 0:
        raise ParseError(no, "negative dimension")
    normalized = parts[1] == "normalized"

    b = c = None
    if not normalized:
        no, s = next(it, (no + 1, ""))
        b = _parse_vector(s.split(), "b", n, no)
        no, s = next(it, (no + 1, ""))
        c = _parse_vector(s.split(), "c", m, no)

    entries = []
    seen: dict[tuple[int, int], int] = {}
    for no, s in it:
        toks = s.split()
        if len(toks) != 3:
            raise ParseError(no, "malformed entry line, expected '<row> <col> <value>'")
        try:
            i, j = int(toks[0]), int(toks[1])
        except ValueError:
            raise ParseError(no, "malformed entry indices") from None
        if not (0 <= i < n and 0 <= j < m):
            raise ParseError(no, f"dimension mismatch: entry ({i}, {j}) outside {n}x{m}")
        v = _parse_float(toks[2], no)
        if (i, j) in seen:
            raise ParseError(no, f"duplicate entry ({i}, {j}), first on line {seen[i, j]}")
        seen[i, j] = no
        if normalized and 0 < v < 1.0 - NORMALIZED_TOL:
            raise ParseError(no, f"normalized entry in (0, 1): {v!r}")
        if normalized and 0 < v < 1.0:
            v = 1.0
        entries.append((i, j, v))

    matrix = SparseNonNegMatrix.from_entries(n, m, entries)
    if normalized:
        return NormalizedInstance(matrix)
    return GeneralInstance(matrix, np.array(b), np.array(c))


def serialize_instance(inst: GeneralInstance | NormalizedInstance) -> str:
    mat = inst.matrix
    kind = "normalized" if isinstance(inst, NormalizedInstance) else "general"
    out = [f"fcp {kind} {mat.n_rows} {mat.n_cols}"]
    if isinstance(inst, GeneralInstance):
        out.append(" ".join(["b", *map(repr, inst.b.tolist())]))
        out.append(" ".join(["c", *map(repr, inst.c.tolist())]))
    out.extend(f"{i} {j} {v!r}" for i, j, v in mat.entries())
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# generators


def gen_random_rs(n: int, m: int, k: int, a_max_target: float, seed: int) -> NormalizedInstance:
    """Random k-row-sparse normalized instance.

    Every row gets between 1 and ``k`` distinct columns with values drawn
    uniformly from ``[1, a_max_target]``.
    """
    if n < 1 or m < 1:
        raise InstanceError("n and m must be >= 1")
    if not 1 <= k <= m:
        raise InstanceError("k must satisfy 1 <= k <= m")
    if not a_max_target >= 1:
        raise InstanceError("a_max_target must be >= 1")
    rng = np.random.default_rng(seed)
    entries = []
    for i in range(n):
        size = int(rng.integers(1, k + 1))
        cols = rng.choice(m, size=size, replace=False)
        vals = rng.uniform(1.0, a_max_target, size=size) if a_max_target > 1 else np.ones(size)
        entries.extend((i, int(j), float(v)) for j, v in zip(cols, vals))
    return NormalizedInstance(SparseNonNegMatrix.from_entries(n, m, entries))


def gen_vertex_cover_lp(
    edge_list: Iterable[tuple[int, int]], n_vertices: int | None = None
) -> NormalizedInstance:
    """Fractional vertex cover LP: one row per edge, one column per vertex.

    Vertex labels are used as column indices; ``n_vertices`` defaults to the
    largest label plus one.
    """
    edges = [(int(u), int(v)) for u, v in edge_list]
    seen: set[frozenset[int]] = set()
    for u, v in edges:
        if u == v:
            raise InstanceError(f"self-loop at vertex {u}")
        if u < 0 or v < 0:
            raise InstanceError("vertex labels must be non-negative")
        key = frozenset((u, v))
        if key in seen:
            raise InstanceError(f"duplicate edge ({u}, {v})")
        seen.add(key)
    if n_vertices is None:
        n_vertices = 1 + max((max(e) for e in edges), default=-1)
    entries = [(r, u, 1.0) for r, e in enumerate(edges) for u in e]
    return NormalizedInstance(SparseNonNegMatrix.from_entries(len(edges), n_vertices, entries))


def gen_set_cover(element_count: int, sets: Sequence[Iterable[int]]) -> NormalizedInstance:
    """Binary covering instance with ``A[e, S] = 1`` iff ``e in S``."""
    entries = []
    covered = set()
    for j, s in enumerate(sets):
        for e in sorted(set(int(e) for e in s)):
            if not 0 <= e < element_count:
                raise InstanceError(f"element {e} out of range in set {j}")
            entries.append((e, j, 1.0))
            covered.add(e)
    missing = sorted(set(range(element_count)) - covered)
    if missing:
        raise InstanceError(f"infeasible covering instance: element {missing[0]} is in no set")
    return NormalizedInstance(SparseNonNegMatrix.from_entries(element_count, len(sets), entries))
