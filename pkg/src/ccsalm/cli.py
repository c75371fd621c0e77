"""Command line front end: ``ccsalm {solve,oracle,certify,generate,batch}``.

Exit codes: 0 success, 1 point not stationary (certify), 2 infeasible,
3 iteration/penalty limits or inner failure, 4 usage or input errors.
"""

from __future__ import annotations

import argparse
import sys
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import instances, serialize
from .certificates import certify
from .oracle import OracleCapError, OracleConfig, enumerate_supports
from .problem import EvaluationError, RelaxedPoint, feasibility, pair_y_for_x
from .salm import SalmConfig, SalmStatus, solve
from .trace import TraceFile, make_header, oracle_trace, solve_trace, write_trace

EXIT_OK = 0
EXIT_NOT_STATIONARY = 1
EXIT_INFEASIBLE = 2
EXIT_LIMIT = 3
EXIT_USAGE = 4

STATUS_EXIT = {
    SalmStatus.CCM_STATIONARY: EXIT_OK,
    SalmStatus.INFEASIBLE: EXIT_INFEASIBLE,
    SalmStatus.RHO_LIMIT: EXIT_LIMIT,
    SalmStatus.OUTER_LIMIT: EXIT_LIMIT,
    SalmStatus.INNER_FAILURE: EXIT_LIMIT,
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _vector(text: str) -> np.ndarray:
    try:
        return np.array([float(v) for v in text.replace(" ", "").split(",") if v], dtype=float)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _param(text: str):
    key, sep, value = text.partition("=")
    if not sep:
        raise argparse.ArgumentTypeError(f"expected key=value, got {text!r}")
    try:
        return key, serialize.loads(value)
    except ValueError:
        return key, value


def _add_problem(p):
    p.add_argument("--problem", required=True, help="instance file, or the name of a bundled instance")
    p.add_argument("--kappa", type=int, help="override the instance's sparsity bound")


def _add_salm(p):
    d = SalmConfig()
    p.add_argument("--rho0", type=float, default=d.rho0)
    p.add_argument("--tau", type=float, default=d.tau)
    p.add_argument("--sigma", type=float, default=d.sigma)
    p.add_argument("--tol-feas", type=float, default=d.tol_feas)
    p.add_argument("--tol-opt", type=float, default=d.tol_opt)
    p.add_argument("--max-outer", type=int, default=d.max_outer)
    p.add_argument("--rho-max", type=float, default=d.rho_max)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ccsalm", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("solve", help="run the augmented Lagrangian solver from one start")
    _add_problem(p)
    p.add_argument("--x0", type=_vector, help="start point; default is a seeded draw from [-1, 1]^n")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trace", type=Path)
    _add_salm(p)

    p = sub.add_parser("oracle", help="enumerate supports for the global minimizer")
    _add_problem(p)
    p.add_argument("--seed", type=int, default=0, help="seed for the restricted multistarts")
    p.add_argument("--oracle-cap", type=int, default=OracleConfig().cap)
    p.add_argument("--trace", type=Path)

    p = sub.add_parser("certify", help="stationarity certificate at a given point")
    _add_problem(p)
    p.add_argument("--point", type=_vector, required=True)
    p.add_argument("--tol-opt", type=float, default=SalmConfig().tol_opt)
    p.add_argument("--tol-active", type=float, default=SalmConfig().tol_active)
    p.add_argument("--trace", type=Path)

    p = sub.add_parser("generate", help="write a synthetic instance file")
    p.add_argument("kind", choices=sorted(instances.GENERATORS))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--kappa", type=int, required=True)
    p.add_argument("--param", type=_param, action="append", default=[], metavar="KEY=VALUE")
    p.add_argument("--out", type=Path, required=True)

    p = sub.add_parser("batch", help="solve several instances from seeded starts")
    p.add_argument("problems", nargs="+")
    p.add_argument("--starts", type=int, default=1, help="seeded starts per instance")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out-dir", type=Path, required=True)
    p.add_argument("--kappa", type=int)
    _add_salm(p)
    return parser


def _load(problem: str, kappa: int | None):
    try:
        spec = instances.read_instance(problem)
        if kappa is not None:
            spec = replace(spec, kappa=kappa)
            spec._check(problem)
        return spec, instances.build_problem(spec)
    except (OSError, instances.SchemaError) as err:
        raise UsageError(str(err)) from None


def _salm_config(args) -> SalmConfig:
    try:
        return SalmConfig(
            rho0=args.rho0,
            tau=args.tau,
            sigma=args.sigma,
            tol_feas=args.tol_feas,
            tol_opt=args.tol_opt,
            max_outer=args.max_outer,
            rho_max=args.rho_max,
        )
    except ValueError as err:
        raise UsageError(str(err)) from None


def _start(prob, x0, seed):
    if x0 is None:
        return np.random.default_rng(seed).uniform(-1.0, 1.0, prob.n)
    if x0.shape != (prob.n,):
        raise UsageError(f"--x0 has {x0.size} entries, the instance has n = {prob.n}")
    return x0


def _fmt(v) -> str:
    return serialize.dumps(np.asarray(v).tolist() if isinstance(v, np.ndarray) else v)


def _solve_one(spec, prob, cfg, x0, seed, trace_path):
    t0 = time.perf_counter()
    result = solve(prob, x0, cfg)
    wall = time.perf_counter() - t0
    if trace_path is not None:
        write_trace(solve_trace(result, spec.name, cfg, x0, seed=seed, wall_time=wall), trace_path)
    return result, wall


def cmd_solve(args) -> int:
    spec, prob = _load(args.problem, args.kappa)
    cfg = _salm_config(args)
    x0 = _start(prob, args.x0, args.seed)
    result, wall = _solve_one(spec, prob, cfg, x0, args.seed, args.trace)
    rhos = [row.rho for row in result.trace.rows]
    print(f"instance     {spec.name}")
    print(f"status       {result.status.value}")
    print(f"objective    {serialize.format_float(result.objective)}")
    print(f"x_sparse     {_fmt(result.x_sparse)}")
    print(f"ccm_residual {serialize.format_float(result.certificate.ccm.residual)}")
    print(f"outer_iters  {len(rhos)}")
    print(f"rho          {_fmt(rhos)}")
    print(f"wall_time    {wall:.3f}s")
    return STATUS_EXIT[result.status]


def cmd_oracle(args) -> int:
    spec, prob = _load(args.problem, args.kappa)
    cfg = OracleConfig(seed=args.seed, cap=args.oracle_cap)
    t0 = time.perf_counter()
    try:
        result = enumerate_supports(prob, cfg)
    except OracleCapError as err:
        raise UsageError(str(err)) from None
    wall = time.perf_counter() - t0
    if args.trace is not None:
        write_trace(oracle_trace(result, spec.name, cfg, seed=args.seed, wall_time=wall), args.trace)
    print(f"instance     {spec.name}")
    print(f"enumerated   {result.enumerated}")
    print(f"best_f       {serialize.format_float(result.best_f)}")
    print(f"best_support {_fmt(None if result.best_support is None else list(result.best_support))}")
    print(f"best_x       {_fmt(result.best_x)}")
    print(f"wall_time    {wall:.3f}s")
    return EXIT_OK if result.best_x is not None else EXIT_INFEASIBLE


def cmd_certify(args) -> int:
    spec, prob = _load(args.problem, args.kappa)
    if args.point.shape != (prob.n,):
        raise UsageError(f"--point has {args.point.size} entries, the instance has n = {prob.n}")
    x = args.point
    rep = feasibility(prob, RelaxedPoint(x, pair_y_for_x(x, prob.kappa)), args.tol_active)
    feasible = rep.is_feasible(SalmConfig().tol_feas) and rep.viol_l0 == 0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        cert = certify(prob, x, tol_active=args.tol_active, tol_opt=args.tol_opt)
    stationary = cert.is_ccm(args.tol_opt)
    if args.trace is not None:
        header = make_header("certify", spec.name, {"tol_opt": args.tol_opt, "tol_active": args.tol_active}, None,
                             point=args.point.tolist())
        write_trace(TraceFile(header, [], {"feasible": feasible, "stationary": stationary, **cert.to_dict()}),
                    args.trace)
    print(f"instance     {spec.name}")
    print(f"feasible     {'yes' if feasible else 'no'}")
    print(f"ccm_residual {serialize.format_float(cert.ccm.residual)}")
    print(f"stationary   {'yes' if stationary else 'no'}")
    print(f"lam          {_fmt(cert.ccm.lam)}")
    print(f"mu           {_fmt(cert.ccm.mu)}")
    print(f"gam          {_fmt(cert.ccm.gam)}")
    print(f"ccs_pair     {_fmt(cert.ccs_pair)}")
    print(f"ccpam        {cert.ccpam_ok.value}")
    if not feasible:
        print(f"ccsalm: the point violates the constraints ({rep})", file=sys.stderr)
        return EXIT_INFEASIBLE
    return EXIT_OK if stationary else EXIT_NOT_STATIONARY


def cmd_generate(args) -> int:
    try:
        spec = instances.GENERATORS[args.kind](args.seed, args.n, args.kappa, dict(args.param))
    except ValueError as err:
        raise UsageError(str(err)) from None
    instances.write_instance(spec, args.out)
    print(f"wrote {args.out} ({spec.name}, sha256 {spec.digest()[:16]})")
    return EXIT_OK


def _batch_job(job):
    problem, kappa, cfg, seed, trace_path = job
    spec, prob = _load(problem, kappa)
    x0 = _start(prob, None, seed)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        result, wall = _solve_one(spec, prob, cfg, x0, seed, trace_path)
    return spec.name, seed, result.status, result.objective, result.certificate.ccm.residual, wall


def cmd_batch(args) -> int:
    cfg = _salm_config(args)
    args.out_dir.mkdir(parents=True, exist_ok=True)
    jobs = []
    for problem in args.problems:
        name = _load(problem, args.kappa)[0].name
        for i in range(args.starts):
            seed = args.seed + i
            jobs.append((problem, args.kappa, cfg, seed, args.out_dir / f"{name}_seed{seed}.jsonl"))
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_batch_job, jobs))
    else:
        results = [_batch_job(job) for job in jobs]
    code = EXIT_OK
    for name, seed, status, objective, residual, wall in results:
        print(f"{name}\tseed={seed}\t{status.value}\tf={serialize.format_float(objective)}"
              f"\tccm={residual:.3e}\t{wall:.3f}s")
        code = max(code, STATUS_EXIT[status])
    return code


COMMANDS = {
    "solve": cmd_solve,
    "oracle": cmd_oracle,
    "certify": cmd_certify,
    "generate": cmd_generate,
    "batch": cmd_batch,
}


def run(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as stop:
        # argparse exits on --help and on usage errors; report the code instead
        return stop.code if isinstance(stop.code, int) else EXIT_USAGE
    try:
        return COMMANDS[args.command](args)
    except UsageError as err:
        print(f"ccsalm: error: {err}", file=sys.stderr)
        return EXIT_USAGE
    except EvaluationError as err:
        print(f"ccsalm: evaluation failed: {err}", file=sys.stderr)
        return EXIT_LIMIT


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
