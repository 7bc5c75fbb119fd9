"""End-to-end acceptance suite.

Each test records a PASS/FAIL line that is printed in the terminal summary.
"""

from __future__ import annotations

import math

import numpy as np
import pytest

from rsfcp import engine
from rsfcp.congest import ROUNDS_PER_PHASE, run_distributed
from rsfcp.instances import gen_random_rs, gen_vertex_cover_lp
from rsfcp.normalize import check_original, denormalize, normalize
from rsfcp.verify import audit_trace, certify, exact_opt

from .conftest import circulant, corpus, random_general, record_criterion

pytestmark = pytest.mark.acceptance

EPSILONS = (0.1, 0.5, 1.0)
CORPUS_SIZE = 500


def _tiny_instances(count: int):
    rng = np.random.default_rng(1)
    seed = 0
    out = []
    while len(out) < count:
        n = int(rng.integers(1, 11))
        m = int(rng.integers(1, 12 - n + 1))
        k = int(rng.integers(1, min(3, m) + 1))
        inst = gen_random_rs(n, m, k, 4.0, seed)
        seed += 1
        if inst.gamma_p > 1.0:
            out.append(inst)
    return out


def test_criterion_1_ratio_against_exact_oracle():
    instances = _tiny_instances(220)
    failures = []
    runs = 0
    for idx, inst in enumerate(instances):
        opt = exact_opt(inst)
        for eps in EPSILONS:
            sol, _, params = engine.run(inst, eps, record=False)
            runs += 1
            if not (
                sol.primal_objective <= (1 + params.epsilon) * opt + 1e-9
                and sol.dual_objective >= opt / (1 + params.epsilon) - 1e-9
            ):
                failures.append((idx, eps, sol.primal_objective, sol.dual_objective, opt))
    ok = not failures and len(instances) >= 200
    record_criterion("1 ratio vs exact oracle", ok, f"{runs} runs, {len(failures)} violations")
    assert ok, failures[:5]


def test_criterion_2_certificate_and_exact_ratio():
    rng = np.random.default_rng(2)
    failures = []
    count = 0
    seed = 0
    while count < 210:
        n = int(rng.integers(1, 201))
        m = int(rng.integers(1, 201))
        k = int(rng.integers(1, min(5, m) + 1))
        inst = gen_random_rs(n, m, k, 4.0, 50_000 + seed)
        seed += 1
        if inst.gamma_p <= 1.0:
            continue
        eps = EPSILONS[count % 3]
        count += 1
        sol, trace, params = engine.run(inst, eps, record=False)
        cert = certify(inst, sol, eps, trace=trace, params=params)
        ratio_ok = cert.ratio is not None and abs(cert.ratio / (1 + eps) - 1) <= 1e-9
        if not (cert.valid and ratio_ok):
            failures.append((n, m, k, eps, cert.as_dict()))
    ok = not failures
    record_criterion("2 certificate + exact ratio", ok, f"{count} instances up to 200x200, {len(failures)} failures")
    assert ok, failures[:3]


# -- shared corpus for criteria 3 (hard bound), 4, 5 and 8 ----------------------


@pytest.fixture(scope="module")
def corpus_runs():
    runs = []
    for seed, inst, eps in corpus(CORPUS_SIZE):
        c_sol, c_trace, params = engine.run(inst, eps, record=True)
        d_sol, d_trace, stats = run_distributed(inst, eps, record=True)
        runs.append((seed, inst, eps, params, c_sol, c_trace, d_sol, d_trace, stats))
    return runs


def _rounds(inst, eps) -> int:
    return run_distributed(inst, eps, record=False)[2].rounds


def test_criterion_3_round_complexity(corpus_runs):
    over = [
        seed
        for seed, inst, eps, params, *_, stats in corpus_runs
        if stats.rounds > ROUNDS_PER_PHASE * math.ceil(math.log(params.gamma_p) / math.log(params.alpha) + params.f)
    ]

    # halving epsilon multiplies rounds by about four
    inst = gen_random_rs(30, 30, 3, 4.0, 3)
    sweep = {eps: _rounds(inst, eps) for eps in (1.0, 0.5, 0.25)}
    eps_ratios = [sweep[0.5] / sweep[1.0], sweep[0.25] / sweep[0.5]]
    eps_ok = all(3 <= r <= 6 for r in eps_ratios)

    # doubling gamma_p (vertex degree) adds a bounded increment
    degrees = (2, 4, 8, 16, 32)
    by_degree = [_rounds(gen_vertex_cover_lp(circulant(40, d)), 0.5) for d in degrees]
    growth = [b / a for a, b in zip(by_degree, by_degree[1:])]
    steps = [b - a for a, b in zip(by_degree, by_degree[1:])]
    gp_ok = all(g <= 2.0 for g in growth) and max(steps) <= 2 * max(1, min(steps))

    ok = not over and eps_ok and gp_ok
    detail = (
        f"bound violations {len(over)}/{len(corpus_runs)}; eps ratios "
        f"{', '.join(f'{r:.2f}' for r in eps_ratios)}; rounds by gamma_p {by_degree}"
    )
    record_criterion("3 round complexity", ok, detail)
    assert not over, over
    assert eps_ok, sweep
    assert gp_ok, by_degree


def test_criterion_4_engine_equivalence(corpus_runs):
    mismatched = [
        seed
        for seed, inst, eps, params, c_sol, c_trace, d_sol, d_trace, stats in corpus_runs
        if c_sol.x.tobytes() != d_sol.x.tobytes() or c_sol.y.tobytes() != d_sol.y.tobytes()
    ]
    ok = not mismatched and len(corpus_runs) >= CORPUS_SIZE
    record_criterion("4 engine/congest bit-identical", ok, f"{len(corpus_runs)} instances, {len(mismatched)} mismatches")
    assert ok, mismatched[:10]


def test_criterion_5_invariant_audit(corpus_runs):
    failed = []
    for seed, inst, eps, params, c_sol, c_trace, d_sol, d_trace, stats in corpus_runs:
        for label, trace in (("engine", c_trace), ("congest", d_trace)):
            report = audit_trace(trace, params, inst)
            if not report.passed:
                failed.append((seed, label, [c.name for c in report.failures()]))
    ok = not failed
    record_criterion("5 invariant audit", ok, f"{2 * len(corpus_runs)} traces, {len(failed)} failing")
    assert ok, failed[:10]


def test_criterion_6_normalization_round_trip():
    failures = []
    count = 120
    for seed in range(count):
        g = random_general(seed)
        inst, nmap = normalize(g)
        eps = EPSILONS[seed % 3]
        sol, _, _ = engine.run(inst, eps, record=False)
        orig = denormalize(sol, nmap)
        p_ok, d_ok = check_original(g, orig, tol=1e-9)
        if inst.n_rows:
            norm_ratio = sol.primal_objective / sol.dual_objective
            orig_ratio = orig.primal_objective / orig.dual_objective
            ratio_ok = abs(orig_ratio - norm_ratio) <= 1e-12 * norm_ratio
        else:
            ratio_ok = orig.primal_objective == orig.dual_objective == 0.0
        if not (p_ok and d_ok and ratio_ok):
            failures.append((seed, p_ok, d_ok, ratio_ok))
    ok = not failures
    record_criterion("6 normalization round trip", ok, f"{count} general instances, {len(failures)} failures")
    assert ok, failures[:5]


def test_criterion_7_triangle_known_values(triangle):
    opt = exact_opt(triangle)
    sol, _, _ = engine.run(triangle, 0.1)
    ok = abs(opt - 1.5) <= 1e-12 and 1.5 <= sol.primal_objective <= 1.65
    record_criterion("7 triangle vertex cover", ok, f"exact_opt={opt:.12g}, primal at eps=0.1 {sol.primal_objective:.6f}")
    assert ok


def test_criterion_8_bandwidth(corpus_runs):
    worst = max(stats.max_payload_bits for *_, stats in corpus_runs)
    over = [seed for seed, *_, stats in corpus_runs if stats.max_payload_bits > 128]
    ok = not over
    record_criterion("8 bandwidth <= 128 bits", ok, f"largest message {worst} bits over {len(corpus_runs)} instances")
    assert ok, over
