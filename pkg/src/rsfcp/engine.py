"""Centralized reference solver.

The solver runs parallel greedy phases over the covering instance.  Each
element ``e`` carries a requirement ``r_e = alpha ** -s_e``; we store the
exponent ``s_e`` so the truncation test ``r_e <= alpha ** -f`` becomes the
exact comparison ``s_e >= f`` and never underflows.

All reductions are summed in ascending index order so that the CONGEST
simulator, which sums mailbox contents in sender order, reproduces every
floating-point value bit for bit.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .instances import NormalizedInstance, PrimalDualSolution

log = logging.getLogger(__name__)

C_START = 4.0
C_MAX_DOUBLINGS = 60


class SolverError(RuntimeError):
    """Internal contract violation inside the solver."""


@dataclass(frozen=True)
class Params:
    epsilon: float
    alpha: float
    f: float
    L: int
    c_const: float
    gamma_p: float
    gamma_d: float

    def safety_lhs(self) -> float:
        a = self.alpha ** (self.gamma_d + 1)
        return a * self.f + a * math.log(self.gamma_p) / math.log(self.alpha)

    def safety_holds(self) -> bool:
        return self.safety_lhs() <= (1 + self.epsilon) * self.f

    def as_dict(self) -> dict:
        return {
            "epsilon": self.epsilon,
            "alpha": self.alpha,
            "f": self.f,
            "L": self.L,
            "c_const": self.c_const,
            "gamma_p": self.gamma_p,
            "gamma_d": self.gamma_d,
        }


def check_epsilon(epsilon: float) -> float:
    if not epsilon > 0 or not math.isfinite(epsilon):
        raise ValueError(f"epsilon must be in (0, 1], got {epsilon!r}")
    if epsilon > 1:
        log.warning("epsilon %r clamped to 1", epsilon)
        return 1.0
    return float(epsilon)


def _params_for(epsilon: float, gp: float, gd: float, c_const: float) -> Params:
    alpha = 1 + epsilon / (c_const * gd)
    f = max(1.0, 2 * math.log(gp) / (epsilon * math.log(alpha)))
    L = math.ceil(math.log(gp) / math.log(alpha) + f)
    return Params(epsilon, alpha, f, L, c_const, gp, gd)


def setup_params(epsilon: float, inst: NormalizedInstance, c_const: float = C_START) -> Params:
    """Choose ``alpha``, ``f`` and the phase bound ``L``.

    ``c_const`` starts at ``c_const`` and doubles until the dual-load safety
    inequality holds.
    """
    epsilon = check_epsilon(epsilon)
    # entry-free instances have nothing to solve; keep the formulas total
    gp = max(inst.gamma_p, 1.0)
    gd = max(inst.gamma_d, 1.0)
    for _ in range(C_MAX_DOUBLINGS):
        p = _params_for(epsilon, gp, gd, c_const)
        if p.safety_holds():
            return p
        c_const *= 2
    raise SolverError("safety inequality never satisfied")


def requirement(alpha: float, s: float) -> float:
    """``r_e`` from its exponent.  Shared with the simulator for bit-exactness."""
    return alpha ** -s


@dataclass
class SolverState:
    """Unscaled solver state.  ``r`` caches ``requirement(alpha, s)`` (0 when dead)."""

    x: np.ndarray
    y: np.ndarray
    s: np.ndarray
    dead: np.ndarray
    r: np.ndarray
    phase_index: int = 0

    @classmethod
    def initial(cls, inst: NormalizedInstance) -> SolverState:
        return cls(
            x=np.zeros(inst.n_cols),
            y=np.zeros(inst.n_rows),
            s=np.zeros(inst.n_rows),
            dead=np.zeros(inst.n_rows, dtype=bool),
            r=np.ones(inst.n_rows),
        )

    def copy(self) -> SolverState:
        return SolverState(
            self.x.copy(), self.y.copy(), self.s.copy(), self.dead.copy(), self.r.copy(), self.phase_index
        )


@dataclass
class PhaseRecord:
    """Snapshot of one phase: efficiencies before it, state after it."""

    selected: np.ndarray
    rho_before: np.ndarray
    delta_y: np.ndarray
    x: np.ndarray
    y: np.ndarray
    load_after: np.ndarray
    max_live_s: float
    rounds: int = 0
    messages: int = 0

    @property
    def sum_x(self) -> float:
        return float(np.sum(self.x))

    @property
    def sum_y(self) -> float:
        return float(np.sum(self.y))


@dataclass
class PhaseTrace:
    records: list[PhaseRecord] = field(default_factory=list)
    phases: int = 0
    final_s: np.ndarray | None = None
    final_dead: np.ndarray | None = None
    final_rho: np.ndarray | None = None
    final_load: np.ndarray | None = None

    def __len__(self) -> int:
        return self.phases


try:
    from numba import njit as _njit

    def _jit(fn):
        return _njit(cache=True, nogil=True)(fn)

except ImportError:  # pragma: no cover - exercised only without numba

    def _jit(fn):
        return fn


# Scalar kernels.  Loops run in ascending index order; every floating-point
# operation matches what the simulator's node programs do with Python floats.


@_jit
def _rho_kernel(col_ptr, cm_rows, cm_vals, r, out):
    for j in range(len(col_ptr) - 1):
        total = 0.0
        for k in range(col_ptr[j], col_ptr[j + 1]):
            e = cm_rows[k]
            if r[e] > 0.0:
                total += cm_vals[k] * r[e]
        out[j] = total


@_jit
def _select_kernel(row_ptr, rm_cols, col_ptr, cm_rows, rho_all, alpha, elem_max, nbr_max, sel):
    for e in range(len(row_ptr) - 1):
        mu = 0.0
        for k in range(row_ptr[e], row_ptr[e + 1]):
            v = rho_all[rm_cols[k]]
            if v > mu:
                mu = v
        elem_max[e] = mu
    count = 0
    for j in range(len(col_ptr) - 1):
        big = 0.0
        for k in range(col_ptr[j], col_ptr[j + 1]):
            v = elem_max[cm_rows[k]]
            if v > big:
                big = v
        nbr_max[j] = big
        sel[j] = rho_all[j] > 0.0 and rho_all[j] >= big / alpha
        if sel[j]:
            count += 1
    return count


@_jit
def _apply_kernel(row_ptr, rm_cols, rm_vals, sel, rho_all, alpha, f, x, y, s, dead, r, delta_y):
    for j in range(len(sel)):
        if sel[j]:
            x[j] += 1.0
    for e in range(len(row_ptr) - 1):
        delta_y[e] = 0.0
        if dead[e]:
            continue
        dy = 0.0
        ds = 0.0
        hit = False
        for k in range(row_ptr[e], row_ptr[e + 1]):
            j = rm_cols[k]
            if sel[j]:
                dy += rm_vals[k] * r[e] / rho_all[j]
                ds += rm_vals[k]
                hit = True
        if hit:
            delta_y[e] = dy
            y[e] += dy
            s[e] += ds
            if s[e] >= f:
                dead[e] = True
                r[e] = 0.0
            else:
                r[e] = alpha ** -s[e]


@_jit
def _loop_kernel(row_ptr, rm_cols, rm_vals, col_ptr, cm_rows, cm_vals, alpha, f, L, x, y, s, dead, r):
    n = len(row_ptr) - 1
    m = len(col_ptr) - 1
    rho_all = np.zeros(m)
    elem_max = np.zeros(n)
    nbr_max = np.zeros(m)
    sel = np.zeros(m, dtype=np.bool_)
    delta_y = np.zeros(n)
    phases = 0
    alive = n - np.count_nonzero(dead)
    while phases < L and alive > 0:
        _rho_kernel(col_ptr, cm_rows, cm_vals, r, rho_all)
        _select_kernel(row_ptr, rm_cols, col_ptr, cm_rows, rho_all, alpha, elem_max, nbr_max, sel)
        _apply_kernel(row_ptr, rm_cols, rm_vals, sel, rho_all, alpha, f, x, y, s, dead, r, delta_y)
        phases += 1
        alive = n - np.count_nonzero(dead)
    return phases


class _Layout:
    """CSR/CSC index arrays of one instance."""

    def __init__(self, inst: NormalizedInstance) -> None:
        mat = inst.matrix
        cm = mat.cm_order
        self.n, self.m = mat.n_rows, mat.n_cols
        self.row_ptr = np.ascontiguousarray(mat.row_ptr)
        self.col_ptr = np.ascontiguousarray(mat.col_ptr)
        self.rm_cols = np.ascontiguousarray(mat.cols)
        self.rm_vals = np.ascontiguousarray(mat.vals)
        self.cm_rows = np.ascontiguousarray(mat.rows[cm])
        self.cm_vals = np.ascontiguousarray(mat.vals[cm])
        self.elem_max = np.zeros(self.n)
        self.nbr_max = np.zeros(self.m)

    def rho(self, r: np.ndarray) -> np.ndarray:
        out = np.zeros(self.m)
        _rho_kernel(self.col_ptr, self.cm_rows, self.cm_vals, r, out)
        return out

    def select(self, rho_all: np.ndarray, alpha: float) -> np.ndarray:
        sel = np.zeros(self.m, dtype=np.bool_)
        _select_kernel(
            self.row_ptr, self.rm_cols, self.col_ptr, self.cm_rows, rho_all, alpha, self.elem_max, self.nbr_max, sel
        )
        return sel

    def apply(self, state: SolverState, sel: np.ndarray, rho_all: np.ndarray, alpha: float, f: float) -> np.ndarray:
        delta_y = np.zeros(self.n)
        _apply_kernel(
            self.row_ptr, self.rm_cols, self.rm_vals, sel, rho_all, alpha, f,
            state.x, state.y, state.s, state.dead, state.r, delta_y,
        )  # fmt: skip
        return delta_y


def all_rho(state: SolverState, inst: NormalizedInstance, alpha: float | None = None) -> np.ndarray:
    """Efficiency of every set, each summed in ascending element order."""
    return _Layout(inst).rho(state.r)


def rho(state: SolverState, inst: NormalizedInstance, S: int, alpha: float) -> float:
    """Efficiency of set ``S``: sum of ``A_eS * r_e`` over its live elements."""
    total = 0.0
    for e, a in inst.matrix.col(S):
        if not state.dead[e]:
            total += a * requirement(alpha, float(state.s[e]))
    return total


def neighborhood_max(inst: NormalizedInstance, rho_all: np.ndarray) -> np.ndarray:
    """``max rho_{S'}`` over sets ``S'`` sharing an element with each ``S``."""
    lay = _Layout(inst)
    lay.select(rho_all, 2.0)
    return lay.nbr_max.copy()


def select(state: SolverState, inst: NormalizedInstance, params: Params) -> np.ndarray:
    """Indices of the sets chosen this phase (ascending)."""
    lay = _Layout(inst)
    return np.flatnonzero(lay.select(lay.rho(state.r), params.alpha))


def apply_phase(
    state: SolverState, inst: NormalizedInstance, params: Params, selected
) -> tuple[SolverState, np.ndarray]:
    """Execute one phase for ``selected``; returns the new state and ``delta_y``.

    ``rho`` values are taken from ``state`` (before the phase).
    """
    lay = _Layout(inst)
    rho_all = lay.rho(state.r)
    sel = np.zeros(lay.m, dtype=np.bool_)
    sel[np.asarray(selected, dtype=np.int64)] = True
    if np.any(rho_all[sel] <= 0):
        raise SolverError("selected a set with zero efficiency")
    new = state.copy()
    new.phase_index += 1
    delta_y = lay.apply(new, sel, rho_all, params.alpha, params.f)
    return new, delta_y


def dual_loads(inst: NormalizedInstance, y: np.ndarray) -> np.ndarray:
    """``Y_S = sum_{e in S} A_eS * y_e`` for every set."""
    return inst.matrix.rmatvec(y)


def make_record(
    inst: NormalizedInstance,
    selected: np.ndarray,
    rho_before: np.ndarray,
    delta_y: np.ndarray,
    state: SolverState,
) -> PhaseRecord:
    live_s = state.s[~state.dead]
    return PhaseRecord(
        selected=selected,
        rho_before=rho_before,
        delta_y=delta_y,
        x=state.x.copy(),
        y=state.y.copy(),
        load_after=dual_loads(inst, state.y),
        max_live_s=float(live_s.max()) if len(live_s) else -math.inf,
    )


def scale_output(state: SolverState, params: Params) -> PrimalDualSolution:
    return PrimalDualSolution(
        x=state.x / params.f,
        y=state.y / ((1 + params.epsilon) * params.f),
    )


def run(
    inst: NormalizedInstance, epsilon: float, *, record: bool = True, params: Params | None = None
) -> tuple[PrimalDualSolution, PhaseTrace, Params]:
    """Run the phase loop to completion and return the scaled solutions.

    Stops as soon as every element is dead (all efficiencies are then zero),
    which never takes more than ``params.L`` phases.
    """
    if params is None:
        params = setup_params(epsilon, inst)
    state = run_state(inst, params, trace := PhaseTrace(), record=record)
    return scale_output(state, params), trace, params


def run_state(
    inst: NormalizedInstance, params: Params, trace: PhaseTrace | None = None, *, record: bool = False
) -> SolverState:
    """Final unscaled state of a run.

    With ``record`` set, one :class:`PhaseRecord` per phase is appended to
    ``trace``; otherwise the whole loop runs inside one kernel call.
    """
    lay = _Layout(inst)
    state = SolverState.initial(inst)
    if record:
        while state.phase_index < params.L and not state.dead.all():
            rho_all = lay.rho(state.r)
            sel = lay.select(rho_all, params.alpha)
            delta_y = lay.apply(state, sel, rho_all, params.alpha, params.f)
            state.phase_index += 1
            if trace is not None:
                trace.records.append(make_record(inst, np.flatnonzero(sel), rho_all, delta_y, state))
    else:
        state.phase_index = int(
            _loop_kernel(
                lay.row_ptr, lay.rm_cols, lay.rm_vals, lay.col_ptr, lay.cm_rows, lay.cm_vals,
                params.alpha, params.f, params.L, state.x, state.y, state.s, state.dead, state.r,
            )
        )  # fmt: skip
    if trace is not None:
        trace.phases = state.phase_index
        trace.final_s = state.s.copy()
        trace.final_dead = state.dead.copy()
        trace.final_rho = lay.rho(state.r)
        trace.final_load = dual_loads(inst, state.y)
    return state
