"""Command-line interface: generate, normalize, solve, verify, bench.

Exit codes: 0 success, 1 invalid certificate or engine mismatch, 2 usage
error, 3 I/O or input-format error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import congest, engine, verify
from .instances import (
    GeneralInstance,
    InstanceError,
    NormalizedInstance,
    PrimalDualSolution,
    gen_random_rs,
    gen_set_cover,
    gen_vertex_cover_lp,
    parse_instance,
    serialize_instance,
)
from .normalize import check_original, denormalize, normalize

EXIT_OK, EXIT_INVALID, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3

log = logging.getLogger("rsfcp")


class UsageError(Exception):
    pass


class InputError(Exception):
    pass


# ---------------------------------------------------------------------------
# instance sources


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror or exc}") from None


def _strip_lines(text: str) -> list[str]:
    lines = (raw.split("#", 1)[0].strip() for raw in text.splitlines())
    return [s for s in lines if s]


def read_graph(path: str) -> list[tuple[int, int]]:
    edges = []
    for s in _strip_lines(_read(path)):
        parts = s.split()
        if len(parts) != 2:
            raise InputError(f"{path}: malformed edge line {s!r}")
        edges.append((int(parts[0]), int(parts[1])))
    return edges


def read_set_cover(path: str) -> tuple[int, list[list[int]]]:
    """First line: element count; then one set per line as element indices."""
    lines = _strip_lines(_read(path))
    if not lines:
        raise InputError(f"{path}: empty set-cover spec")
    try:
        count = int(lines[0])
        sets = [[int(t) for t in s.split()] for s in lines[1:]]
    except ValueError:
        raise InputError(f"{path}: malformed set-cover spec") from None
    return count, sets


def instance_from_gen(spec: str, seed: int) -> NormalizedInstance:
    kind, _, arg = spec.partition(":")
    if kind == "random-rs":
        try:
            n, m, k, amax = arg.split(",")
            return gen_random_rs(int(n), int(m), int(k), float(amax), seed)
        except ValueError as exc:
            raise UsageError(f"bad generator spec {spec!r}: {exc}") from None
    if kind == "vc":
        return gen_vertex_cover_lp(read_graph(arg))
    if kind == "setcover":
        return gen_set_cover(*read_set_cover(arg))
    raise UsageError(f"unknown generator {kind!r} (random-rs, vc, setcover)")


def load_source(args) -> GeneralInstance | NormalizedInstance:
    if args.instance:
        return parse_instance(_read(args.instance))
    return instance_from_gen(args.gen, args.seed)


# ---------------------------------------------------------------------------
# output


def _flatten(d: dict, prefix: str = "") -> list[tuple[str, object]]:
    rows = []
    for k, v in d.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            rows.extend(_flatten(v, key + "."))
        elif isinstance(v, (list, tuple)):
            rows.append((key, " ".join(map(str, v))))
        else:
            rows.append((key, v))
    return rows


def _jsonable(v):
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, np.generic):
        return v.item()
    if isinstance(v, float) and not math.isfinite(v):
        return str(v)
    return v


def render(report: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(_jsonable(report), indent=2) + "\n"
    rows = _flatten(report)
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["key", "value"])
        w.writerows(rows)
        return buf.getvalue()
    width = max((len(k) for k, _ in rows), default=0)
    return "".join(f"{k:<{width}}  {v}\n" for k, v in rows)


def render_table(rows: list[dict], fmt: str) -> str:
    if fmt == "json":
        return json.dumps(_jsonable(rows), indent=2) + "\n"
    if not rows:
        return ""
    cols = list(rows[0])
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
        return buf.getvalue()
    cells = [[str(r[c]) for c in cols] for r in rows]
    widths = [max(len(c), *(len(row[i]) for row in cells)) for i, c in enumerate(cols)]
    lines = ["  ".join(c.ljust(w) for c, w in zip(cols, widths))]
    lines += ["  ".join(v.ljust(w) for v, w in zip(row, widths)) for row in cells]
    return "\n".join(lines) + "\n"


def _write_vector(path: Path, v: np.ndarray) -> None:
    path.write_text("".join(f"{float(t)!r}\n" for t in v))


# ---------------------------------------------------------------------------
# commands


def _instance_stats(inst: NormalizedInstance) -> dict:
    return {
        "n_rows": inst.n_rows,
        "n_cols": inst.n_cols,
        "nnz": inst.matrix.nnz,
        "k": inst.sparsity,
        "gamma_p": inst.gamma_p,
        "gamma_d": inst.gamma_d,
        "a_max": inst.a_max,
        "empty_columns": len(inst.empty_columns),
    }


def cmd_solve(args) -> int:
    src = load_source(args)
    nmap = None
    if isinstance(src, GeneralInstance):
        inst, nmap = normalize(src)
    else:
        inst = src
    params = engine.setup_params(args.epsilon, inst)
    report: dict = {"instance": _instance_stats(inst), "params": params.as_dict()}
    status = EXIT_OK

    sol = trace = None
    if args.mode in ("centralized", "both"):
        sol, trace, _ = engine.run(inst, args.epsilon, record=False, params=params)
        report["centralized"] = {"phases": len(trace), "rounds_equivalent": congest.ROUNDS_PER_PHASE * len(trace)}
    if args.mode in ("congest", "both"):
        dsol, dtrace, stats = congest.run_distributed(
            inst, args.epsilon, bit_budget=args.bit_budget, record=False, params=params
        )
        report["congest"] = stats.as_dict()
        if sol is not None:
            agree = bool(np.array_equal(sol.x, dsol.x) and np.array_equal(sol.y, dsol.y))
            report["engines_agree"] = agree
            if not agree:
                status = EXIT_INVALID
        else:
            sol, trace = dsol, dtrace

    cert = verify.certify(inst, sol, params.epsilon, trace=trace, params=params)
    report["certificate"] = cert.as_dict()
    if not cert.valid:
        status = EXIT_INVALID

    if args.oracle:
        if inst.n_rows + inst.n_cols <= verify.ORACLE_SIZE_CAP:
            opt = verify.exact_opt(inst)
            report["oracle"] = {
                "exact_opt": opt,
                "primal_within": sol.primal_objective <= (1 + params.epsilon) * opt + 1e-9,
                "dual_within": sol.dual_objective >= opt / (1 + params.epsilon) - 1e-9,
            }
            if not (report["oracle"]["primal_within"] and report["oracle"]["dual_within"]):
                status = EXIT_INVALID
        else:
            report["oracle"] = {"skipped": f"n_rows + n_cols > {verify.ORACLE_SIZE_CAP}"}

    if nmap is not None:
        orig = denormalize(sol, nmap)
        p_ok, d_ok = check_original(src, orig)
        report["original"] = {
            "primal_objective": orig.primal_objective,
            "dual_objective": orig.dual_objective,
            "primal_feasible": p_ok,
            "dual_feasible": d_ok,
            "saturated_columns": sorted(orig.saturated),
            "scale_min": nmap.scale_min,
        }

    if args.output_dir:
        out = Path(args.output_dir)
        try:
            out.mkdir(parents=True, exist_ok=True)
            _write_vector(out / "x.txt", sol.x)
            _write_vector(out / "y.txt", sol.y)
            (out / "solution.json").write_text(
                json.dumps({"x": sol.x.tolist(), "y": sol.y.tolist(), "epsilon": params.epsilon}) + "\n"
            )
            (out / "report.json").write_text(render(report, "json"))
        except OSError as exc:
            raise InputError(f"cannot write to {out}: {exc.strerror or exc}") from None

    report["status"] = "valid" if status == EXIT_OK else "invalid"
    sys.stdout.write(render(report, args.format))
    return status


def cmd_normalize(args) -> int:
    src = parse_instance(_read(args.instance))
    if isinstance(src, NormalizedInstance):
        inst, text_map = src, None
    else:
        inst, nmap = normalize(src)
        text_map = nmap.to_text()
    text = serialize_instance(inst)
    try:
        if args.output:
            Path(args.output).write_text(text)
        else:
            sys.stdout.write(text)
        if args.map and text_map is not None:
            Path(args.map).write_text(text_map)
    except OSError as exc:
        raise InputError(f"write failed: {exc.strerror or exc}") from None
    return EXIT_OK


def cmd_generate(args) -> int:
    text = serialize_instance(instance_from_gen(args.gen, args.seed))
    if args.output:
        try:
            Path(args.output).write_text(text)
        except OSError as exc:
            raise InputError(f"write failed: {exc.strerror or exc}") from None
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_verify(args) -> int:
    src = parse_instance(_read(args.instance))
    if not isinstance(src, NormalizedInstance):
        raise UsageError("verify expects a normalized instance")
    try:
        data = json.loads(_read(args.solution))
        sol = PrimalDualSolution(np.array(data["x"], dtype=float), np.array(data["y"], dtype=float))
    except (ValueError, KeyError, TypeError):
        raise InputError(f"{args.solution}: expected JSON with 'x' and 'y' arrays") from None
    eps = args.epsilon if args.epsilon is not None else float(data.get("epsilon", 0.1))
    cert = verify.certify(src, sol, eps)
    sys.stdout.write(render(cert.as_dict(), args.format))
    return EXIT_OK if cert.valid else EXIT_INVALID


def bench_rows(gens: list[str], epsilons: list[float], seeds: list[int], mode: str, bit_budget: int) -> list[dict]:
    rows = []
    for gen in gens:
        for seed in seeds:
            inst = instance_from_gen(gen, seed)
            for eps in epsilons:
                params = engine.setup_params(eps, inst)
                if mode == "centralized":
                    _, trace, _ = engine.run(inst, eps, record=False, params=params)
                    phases = len(trace)
                    rounds = congest.ROUNDS_PER_PHASE * phases
                else:
                    _, _, stats = congest.run_distributed(
                        inst, eps, bit_budget=bit_budget, record=False, params=params
                    )
                    phases, rounds = stats.phases, stats.rounds
                scale = params.gamma_d * math.log(max(params.gamma_p, math.e)) / eps**2
                rows.append(
                    {
                        "gen": gen,
                        "seed": seed,
                        "n_rows": inst.n_rows,
                        "n_cols": inst.n_cols,
                        "gamma_p": inst.gamma_p,
                        "gamma_d": inst.gamma_d,
                        "a_max": inst.a_max,
                        "epsilon": eps,
                        "c_const": params.c_const,
                        "alpha": params.alpha,
                        "f": params.f,
                        "L": params.L,
                        "phases": phases,
                        "rounds": rounds,
                        "round_bound": congest.ROUNDS_PER_PHASE * params.L,
                        "bound_ratio": rounds / (congest.ROUNDS_PER_PHASE * params.L),
                        "rounds_per_gd_logp_eps2": rounds / scale,
                    }
                )
    return rows


def _float_list(s: str) -> list[float]:
    try:
        return [float(t) for t in s.split(",") if t]
    except ValueError:
        raise UsageError(f"expected comma-separated numbers, got {s!r}") from None


def cmd_bench(args) -> int:
    epsilons = _float_list(args.epsilons)
    for e in epsilons:
        if not 0 < e <= 1:
            raise UsageError(f"epsilon must be in (0, 1], got {e!r}")
    seeds = [int(t) for t in _float_list(args.seeds)] if args.seeds else [args.seed]
    if not args.gen:
        raise UsageError("bench needs at least one --gen")
    rows = bench_rows(args.gen, epsilons, seeds, args.mode, args.bit_budget)
    sys.stdout.write(render_table(rows, args.format))
    return EXIT_OK


# ---------------------------------------------------------------------------


def _epsilon(s: str) -> float:
    try:
        v = float(s)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {s!r}") from None
    if not 0 < v <= 1:
        raise argparse.ArgumentTypeError(f"epsilon must be in (0, 1], got {s}")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="rsfcp", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def source(sp, required=True):
        g = sp.add_mutually_exclusive_group(required=required)
        g.add_argument("--instance", metavar="PATH")
        g.add_argument("--gen", metavar="SPEC", help="random-rs:n,m,k,amax | vc:graphfile | setcover:specfile")

    def common(sp):
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--format", choices=("text", "json", "csv"), default="text")
        sp.add_argument("--bit-budget", type=int, default=congest.DEFAULT_BIT_BUDGET)

    sp = sub.add_parser("solve", help="run the solver and certify the result")
    source(sp)
    common(sp)
    sp.add_argument("--epsilon", type=_epsilon, default=0.1)
    sp.add_argument("--mode", choices=("centralized", "congest", "both"), default="centralized")
    sp.add_argument("--oracle", action="store_true", help="cross-check against exact_opt on tiny instances")
    sp.add_argument("--output-dir", metavar="DIR")
    sp.set_defaults(func=cmd_solve)

    sp = sub.add_parser("normalize", help="reduce a general instance to normal form")
    sp.add_argument("--instance", metavar="PATH", required=True)
    sp.add_argument("--output", metavar="PATH")
    sp.add_argument("--map", metavar="PATH", help="sidecar file for the normalization map")
    sp.set_defaults(func=cmd_normalize)

    sp = sub.add_parser("generate", help="write a generated instance")
    sp.add_argument("--gen", metavar="SPEC", required=True)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--output", metavar="PATH")
    sp.set_defaults(func=cmd_generate)

    sp = sub.add_parser("verify", help="certify a solution file against an instance")
    sp.add_argument("--instance", metavar="PATH", required=True)
    sp.add_argument("--solution", metavar="PATH", required=True)
    sp.add_argument("--epsilon", type=_epsilon)
    sp.add_argument("--format", choices=("text", "json", "csv"), default="text")
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("bench", help="tabulate rounds over a parameter sweep")
    sp.add_argument("--gen", metavar="SPEC", action="append")
    sp.add_argument("--epsilons", default="1,0.5,0.25")
    sp.add_argument("--seeds", help="comma-separated seeds (default: --seed)")
    common(sp)
    sp.add_argument("--mode", choices=("centralized", "congest"), default="congest")
    sp.set_defaults(func=cmd_bench)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        parser.error(str(exc))  # exits with status 2
    except (InputError, InstanceError) as exc:
        print(f"rsfcp: error: {exc}", file=sys.stderr)
        return EXIT_IO
    except congest.SimulationFault as exc:
        print(f"rsfcp: simulation fault: {exc}", file=sys.stderr)
        return EXIT_INVALID
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
