"""Reduction of a general covering/packing pair to normal form and back."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .instances import (
    NORMALIZED_TOL,
    GeneralInstance,
    InstanceError,
    NormalizedInstance,
    PrimalDualSolution,
    SparseNonNegMatrix,
)


@dataclass(frozen=True)
class NormalizationMap:
    """Bookkeeping needed to map a normalized solution back.

    ``kept_rows[i]`` / ``kept_cols[j]`` give the original index of normalized
    row ``i`` / column ``j``.  ``forced_columns`` are the zero-cost variables
    that are saturated (conceptually ``+inf``) in the original problem.
    """

    n_rows: int
    n_cols: int
    removed_rows: frozenset[int]
    forced_columns: frozenset[int]
    rows_deleted_by_forced_columns: frozenset[int]
    kept_rows: tuple[int, ...]
    kept_cols: tuple[int, ...]
    scale_min: float
    b: np.ndarray
    c: np.ndarray

    def to_text(self) -> str:
        lines = [
            f"dims {self.n_rows} {self.n_cols}",
            " ".join(["removed_rows", *map(str, sorted(self.removed_rows))]),
            " ".join(["forced_columns", *map(str, sorted(self.forced_columns))]),
            " ".join(
                ["rows_deleted_by_forced_columns", *map(str, sorted(self.rows_deleted_by_forced_columns))]
            ),
            f"scale_min {self.scale_min!r}",
        ]
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class OriginalSolution:
    """Solution of the original (general) LP pair.

    Saturated columns carry a placeholder 0 in ``x`` and are listed in
    ``saturated``; they cost nothing and cover every row they touch.
    """

    x: np.ndarray
    y: np.ndarray
    saturated: frozenset[int]
    primal_objective: float
    dual_objective: float


def normalize(g: GeneralInstance) -> tuple[NormalizedInstance, NormalizationMap]:
    mat = g.matrix
    n, m = mat.n_rows, mat.n_cols
    removed = {i for i in range(n) if g.b[i] == 0}
    forced = {j for j in range(m) if g.c[j] == 0}
    deleted_by_forced = set()
    for j in sorted(forced):
        for i, _ in mat.col(j):
            if i not in removed:
                deleted_by_forced.add(i)
    kept_rows = [i for i in range(n) if i not in removed and i not in deleted_by_forced]
    kept_cols = [j for j in range(m) if j not in forced]
    row_pos = {i: k for k, i in enumerate(kept_rows)}
    col_pos = {j: k for k, j in enumerate(kept_cols)}

    scaled = []
    for i, j, v in mat.entries():
        if i in row_pos and j in col_pos:
            scaled.append((row_pos[i], col_pos[j], v / (g.b[i] * g.c[j])))
    scale_min = min((v for _, _, v in scaled), default=1.0)
    entries = []
    for i, j, v in scaled:
        t = v / scale_min
        if 1.0 - NORMALIZED_TOL <= t < 1.0:
            t = 1.0
        entries.append((i, j, t))

    matrix = SparseNonNegMatrix.from_entries(len(kept_rows), len(kept_cols), entries)
    inst = NormalizedInstance(matrix)
    nmap = NormalizationMap(
        n_rows=n,
        n_cols=m,
        removed_rows=frozenset(removed),
        forced_columns=frozenset(forced),
        rows_deleted_by_forced_columns=frozenset(deleted_by_forced),
        kept_rows=tuple(kept_rows),
        kept_cols=tuple(kept_cols),
        scale_min=float(scale_min),
        b=g.b,
        c=g.c,
    )
    return inst, nmap


def denormalize(sol: PrimalDualSolution, nmap: NormalizationMap) -> OriginalSolution:
    if len(sol.x) != len(nmap.kept_cols) or len(sol.y) != len(nmap.kept_rows):
        raise InstanceError("solution dimensions do not match the normalized instance")
    x = np.zeros(nmap.n_cols)
    y = np.zeros(nmap.n_rows)
    for k, j in enumerate(nmap.kept_cols):
        x[j] = sol.x[k] / (nmap.c[j] * nmap.scale_min)
    for k, i in enumerate(nmap.kept_rows):
        y[i] = sol.y[k] / (nmap.b[i] * nmap.scale_min)
    return OriginalSolution(
        x=x,
        y=y,
        saturated=nmap.forced_columns,
        primal_objective=float(np.dot(nmap.c, x)),
        dual_objective=float(np.dot(nmap.b, y)),
    )


def check_original(
    g: GeneralInstance, sol: OriginalSolution, tol: float = 1e-9
) -> tuple[bool, bool]:
    """Feasibility of ``sol`` for the original covering and packing LPs.

    Tolerances are relative to the right-hand sides.
    """
    mat = g.matrix
    ax = mat.matvec(sol.x)
    covered = np.zeros(mat.n_rows, dtype=bool)
    for j in sol.saturated:
        for i, _ in mat.col(j):
            covered[i] = True
    primal_ok = bool(
        np.all(sol.x >= 0) and np.all(covered | (ax >= g.b * (1 - tol)))
    )
    aty = mat.rmatvec(sol.y)
    dual_ok = bool(np.all(sol.y >= 0) and np.all(aty <= g.c * (1 + tol)))
    return primal_ok, dual_ok
