"""Feasibility checks, duality certificates, trace audits and an exact oracle."""

from __future__ import annotations

import itertools
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .engine import Params, PhaseTrace
from .instances import InstanceError, NormalizedInstance, PrimalDualSolution

DEFAULT_TOL = 1e-9
ORACLE_SIZE_CAP = 12


def _check_len(name: str, v: np.ndarray, size: int) -> np.ndarray:
    v = np.asarray(v, dtype=np.float64)
    if v.shape != (size,):
        raise InstanceError(f"{name} has shape {v.shape}, expected ({size},)")
    return v


def check_primal(inst: NormalizedInstance, x, tol: float = DEFAULT_TOL) -> tuple[bool, float]:
    """Covering feasibility ``A x >= 1, x >= 0``; slack is ``min_e (A x)_e - 1``."""
    x = _check_len("x", x, inst.n_cols)
    cover = inst.matrix.matvec(x)
    slack = float(cover.min() - 1.0) if inst.n_rows else math.inf
    return bool(np.all(x >= 0) and slack >= -tol), slack


def check_dual(inst: NormalizedInstance, y, tol: float = DEFAULT_TOL) -> tuple[bool, float]:
    """Packing feasibility ``A^T y <= 1, y >= 0``; slack is ``min_S 1 - (A^T y)_S``."""
    y = _check_len("y", y, inst.n_rows)
    load = inst.matrix.rmatvec(y)
    slack = float(1.0 - load.max()) if inst.n_cols else math.inf
    return bool(np.all(y >= 0) and slack >= -tol), slack


@dataclass
class Certificate:
    """Weak-duality certificate for a primal/dual pair.

    When both sides are feasible, ``dual_obj <= OPT <= primal_obj``, so the
    primal is within ``ratio`` of optimal without knowing ``OPT``.
    """

    primal_feasible: bool
    primal_slack: float
    dual_feasible: bool
    dual_slack: float
    primal_obj: float
    dual_obj: float
    ratio: float | None
    claimed_eps: float
    ratio_ok: bool
    exponent_check: bool | None = None

    @property
    def valid(self) -> bool:
        return (
            self.primal_feasible
            and self.dual_feasible
            and self.ratio_ok
            and self.exponent_check is not False
        )

    def as_dict(self) -> dict:
        out = asdict(self)
        out["valid"] = self.valid
        return out


def certify(
    inst: NormalizedInstance,
    sol: PrimalDualSolution,
    epsilon: float,
    *,
    trace: PhaseTrace | None = None,
    params: Params | None = None,
    tol: float = DEFAULT_TOL,
) -> Certificate:
    """Check both feasibilities and that ``primal/dual == 1 + epsilon``.

    With a trace and params, primal feasibility is also confirmed exactly in
    exponent form (every final ``s_e >= f``).
    """
    p_ok, p_slack = check_primal(inst, sol.x, tol)
    d_ok, d_slack = check_dual(inst, sol.y, tol)
    primal, dual = sol.primal_objective, sol.dual_objective
    if primal == 0 and dual == 0:
        ratio, ratio_ok = None, True
    elif dual <= 0:
        ratio, ratio_ok = math.inf, False
    else:
        ratio = primal / dual
        ratio_ok = abs(ratio - (1 + epsilon)) <= tol * (1 + epsilon)
    exp_ok = None
    if trace is not None and params is not None and trace.final_s is not None:
        exp_ok = bool(np.all(trace.final_s >= params.f))
    return Certificate(p_ok, p_slack, d_ok, d_slack, primal, dual, ratio, epsilon, ratio_ok, exp_ok)


# ---------------------------------------------------------------------------
# exact oracle


def exact_opt(inst: NormalizedInstance, tol: float = DEFAULT_TOL) -> float:
    """Optimum of ``min 1^T x s.t. A x >= 1, x >= 0`` by vertex enumeration.

    Every vertex fixes some support ``J`` of columns and an equal number of
    rows ``R`` held tight with ``A[R, J]`` non-singular.  All such square
    systems are solved and the cheapest feasible solution is returned.
    """
    n, m = inst.n_rows, inst.n_cols
    if n + m > ORACLE_SIZE_CAP:
        raise InstanceError(f"exact_opt limited to n_rows + n_cols <= {ORACLE_SIZE_CAP}")
    if n == 0:
        return 0.0
    dense = inst.matrix.to_dense()
    best = math.inf
    # single-variable closures
    for j in range(m):
        col = dense[:, j]
        if np.all(col > 0):
            best = min(best, 1.0 / col.min())
    for k in range(1, min(n, m) + 1):
        for cols in itertools.combinations(range(m), k):
            sub_cols = dense[:, cols]
            for rows in itertools.combinations(range(n), k):
                square = sub_cols[list(rows), :]
                if abs(np.linalg.det(square)) < 1e-12:
                    continue
                xj = np.linalg.solve(square, np.ones(k))
                if np.any(xj < -tol):
                    continue
                if np.all(sub_cols @ xj >= 1 - tol):
                    best = min(best, float(xj.sum()))
    return best


# ---------------------------------------------------------------------------
# trace audit


@dataclass
class CheckResult:
    name: str
    passed: bool
    offenders: list = field(default_factory=list)
    detail: str = ""


@dataclass
class AuditReport:
    checks: list[CheckResult]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def __getitem__(self, name: str) -> CheckResult:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def failures(self) -> list[CheckResult]:
        return [c for c in self.checks if not c.passed]

    def as_dict(self) -> dict:
        return {"passed": self.passed, "checks": [asdict(c) for c in self.checks]}


def audit_trace(
    trace: PhaseTrace, params: Params, inst: NormalizedInstance, rel_tol: float = DEFAULT_TOL
) -> AuditReport:
    """Check the per-phase and terminal invariants of a recorded run."""
    recs = trace.records
    checks = []

    bad = [
        t
        for t, rec in enumerate(recs)
        if abs(rec.sum_x - rec.sum_y) > rel_tol * max(1.0, rec.sum_x)
    ]
    checks.append(CheckResult("sum_x_equals_sum_y", not bad, bad))

    rhos = [rec.rho_before for rec in recs]
    if trace.final_rho is not None:
        rhos.append(trace.final_rho)

    bad = []
    for t in range(1, len(rhos)):
        worse = np.flatnonzero(rhos[t] > rhos[t - 1] * (1 + rel_tol))
        bad.extend((t, int(j)) for j in worse)
    checks.append(CheckResult("rho_non_increasing", not bad, bad))

    bad = []
    for t, r in enumerate(rhos):
        over = np.flatnonzero(r > params.gamma_p * (1 + rel_tol))
        bad.extend((t, int(j)) for j in over)
        if np.any(r < 0):
            bad.append((t, "negative"))
    for t, rec in enumerate(recs):
        if not rec.max_live_s < params.f:
            bad.append((t, "live element at or beyond f"))
    checks.append(CheckResult("rho_in_range", not bad, bad))

    bad = []
    for t in range(1, len(rhos)):
        prev = float(rhos[t - 1].max()) if len(rhos[t - 1]) else 0.0
        cur = float(rhos[t].max()) if len(rhos[t]) else 0.0
        if cur > prev / params.alpha * (1 + rel_tol):
            bad.append(t)
    checks.append(CheckResult("max_rho_decays_by_alpha", not bad, bad))

    checks.append(
        CheckResult(
            "phases_within_L",
            len(trace) <= params.L,
            [] if len(trace) <= params.L else [len(trace)],
        )
    )

    dead = trace.final_dead if trace.final_dead is not None else np.zeros(inst.n_rows, dtype=bool)
    alive = np.flatnonzero(~dead).tolist()
    checks.append(CheckResult("terminal_all_dead", not alive, alive))

    final_rho = trace.final_rho if trace.final_rho is not None else np.zeros(inst.n_cols)
    nonzero = np.flatnonzero(final_rho != 0).tolist()
    checks.append(CheckResult("terminal_rho_zero", not nonzero, nonzero))

    s = trace.final_s if trace.final_s is not None else np.zeros(inst.n_rows)
    short = np.flatnonzero(~(s >= params.f)).tolist()
    checks.append(CheckResult("exponent_reaches_f", not short, short))

    cap = (1 + params.epsilon) * params.f
    load = trace.final_load if trace.final_load is not None else np.zeros(inst.n_cols)
    over = np.flatnonzero(load > cap * (1 + rel_tol)).tolist()
    worst = float(load.max() / cap) if len(load) else 0.0
    checks.append(CheckResult("dual_load_bounded", not over, over, f"max Y_S / ((1+eps) f) = {worst:.6f}"))

    bad = []
    for t, rec in enumerate(recs):
        recomputed = inst.matrix.rmatvec(rec.y)
        if not np.allclose(recomputed, rec.load_after, rtol=rel_tol, atol=0):
            bad.append(t)
        if t and np.any(rec.load_after < recs[t - 1].load_after * (1 - rel_tol)):
            bad.append(t)
    checks.append(CheckResult("dual_load_monotone", not bad, bad))

    return AuditReport(checks)
