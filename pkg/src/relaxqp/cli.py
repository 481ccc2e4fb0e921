"""Command-line front end.

Exit codes: 0 converged, 1 input error, 2 max iterations, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import csv
import logging
import math
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import demos
from .diff import compute_grads, fd_gradients, gradient_deviation
from .errors import KappaBelowCurrent, QpError, RelaxationFailed, ValidationFailed
from .io import (
    InputError,
    dumps,
    gradients_document,
    load_problem,
    problem_document,
    result_document,
)
from .pdip import solve
from .problem import ElasticProblem, QpProblem, SolverSettings, Status, validate
from .relax import relax

log = logging.getLogger("relaxqp")

EXIT_OK, EXIT_INPUT, EXIT_MAX_ITERS, EXIT_NUMERICAL = 0, 1, 2, 3
STATUS_EXIT = {
    Status.CONVERGED: EXIT_OK,
    Status.MAX_ITERS: EXIT_MAX_ITERS,
    Status.NUMERICAL_FAILURE: EXIT_NUMERICAL,
}


class CliError(Exception):
    def __init__(self, message, code=EXIT_INPUT):
        super().__init__(message)
        self.code = code


def _finite(value):
    return value if isinstance(value, float) and math.isfinite(value) else None


def _settings(file_settings: dict, args) -> SolverSettings:
    values = {k: v for k, v in file_settings.items() if v is not None}
    for key in ("tol", "max_iters", "kappa"):
        flag = getattr(args, key, None)
        if flag is not None:
            values[key] = flag
    try:
        return SolverSettings(**values)
    except (TypeError, ValueError) as exc:
        raise CliError(f"bad settings: {exc}") from exc


def _load(path, args):
    """Parse, coerce to elastic when asked, validate."""
    try:
        problem, file_settings = load_problem(path)
    except InputError as exc:
        raise CliError(f"{path}: {exc}") from exc
    if getattr(args, "elastic", False) and isinstance(problem, QpProblem):
        if args.rho is None:
            raise CliError(f"{path}: --elastic needs a rho field in the file or --rho")
        try:
            problem = ElasticProblem.from_qp(problem, args.rho)
        except ValueError as exc:
            raise CliError(f"{path}: {exc}") from exc
    try:
        validate(problem)
    except ValidationFailed as exc:
        raise CliError(f"{path}: invalid problem: {exc}") from exc
    return problem, _settings(file_settings, args)


def _solve_one(path, args):
    problem, settings = _load(path, args)
    result = solve(problem, settings)
    doc = result_document(problem, result)
    doc["residual"] = _finite(doc["residual"])
    return doc, STATUS_EXIT[result.status]


def _write(doc, args):
    text = dumps(doc)
    if getattr(args, "output", None):
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _solve_task(item):
    path, args = item
    try:
        return _solve_one(path, args)
    except CliError as exc:
        return {"error": str(exc)}, exc.code


def cmd_solve(args) -> int:
    items = [(path, args) for path in args.paths]
    if args.jobs > 1 and len(items) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            outcomes = list(pool.map(_solve_task, items))
    else:
        outcomes = [_solve_task(item) for item in items]
    for doc, code in outcomes:
        if "error" in doc:
            print(doc["error"], file=sys.stderr)
    docs = [doc for doc, _ in outcomes]
    _write(docs[0] if len(docs) == 1 else docs, args)
    # input errors dominate, then the worst solver status
    codes = [code for _, code in outcomes]
    return EXIT_INPUT if EXIT_INPUT in codes else max(codes)


def _solved(problem, settings):
    result = solve(problem, settings)
    if not result.converged:
        raise CliError(f"solve failed: {result.status.value}", STATUS_EXIT[result.status])
    return result


def _relaxed(problem, iterate, kappa, settings):
    try:
        return relax(problem, iterate, kappa, settings)
    except KappaBelowCurrent as exc:
        raise CliError(str(exc)) from exc
    except RelaxationFailed as exc:
        raise CliError(str(exc), STATUS_EXIT[exc.status]) from exc


def cmd_relax(args) -> int:
    problem, settings = _load(args.path, args)
    solved = _solved(problem, settings)
    relaxed = _relaxed(problem, solved.iterate, settings.kappa, settings)
    doc = result_document(problem, relaxed)
    doc["kappa"] = settings.kappa
    it = relaxed.iterate
    if isinstance(problem, ElasticProblem):
        doc["s1_z1"] = (it.s1 * it.z1).tolist()
        doc["s2_z2"] = (it.s2 * it.z2).tolist()
    else:
        doc["s_z"] = (it.s * it.z).tolist()
    _write(doc, args)
    return EXIT_OK


def _seed(args, n):
    if args.loss_grad_file:
        try:
            with open(args.loss_grad_file) as fh:
                text = fh.read()
        except OSError as exc:
            raise CliError(str(exc)) from exc
    elif args.loss_grad is not None:
        text = args.loss_grad
    else:
        raise CliError("grad needs --loss-grad or --loss-grad-file")
    try:
        seed = np.array([float(v) for v in text.replace(",", " ").replace("[", " ").replace("]", " ").split()])
    except ValueError as exc:
        raise CliError(f"bad loss gradient: {exc}") from exc
    if seed.shape != (n,) or not np.all(np.isfinite(seed)):
        raise CliError(f"loss gradient must have {n} finite entries, got {seed.size}")
    return seed


def cmd_grad(args) -> int:
    problem, settings = _load(args.path, args)
    seed = _seed(args, problem.n)
    solved = _solved(problem, settings)
    relaxed = _relaxed(problem, solved.iterate, settings.kappa, settings)
    grads = compute_grads(problem, relaxed.iterate, seed)
    doc = result_document(problem, solved)
    doc["kappa"] = settings.kappa
    doc.update(gradients_document(grads))
    if args.check:
        try:
            fd = fd_gradients(problem, seed, settings.kappa, settings)
        except QpError as exc:
            raise CliError(f"finite-difference check failed: {exc}", EXIT_NUMERICAL) from exc
        dev = gradient_deviation(grads, fd)
        abs_dev = max(
            (float(np.abs(a - b).max()) for a, b in zip(grads.blocks().values(), fd.blocks().values()) if a.size),
            default=0.0,
        )
        doc["check"] = {
            "max_relative_error": max(dev.values()),
            "max_abs_deviation": abs_dev,
            "blocks": dev,
        }
    _write(doc, args)
    return EXIT_OK


def _csv(rows, fieldnames):
    writer = csv.DictWriter(sys.stdout, fieldnames=fieldnames, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow(row)


def cmd_demo(args) -> int:
    kappa = 0.01 if args.kappa is None else args.kappa
    try:
        if args.name == "contact":
            rows = demos.contact_sweep(kappa, points=args.sweep or 21)
            _csv(rows, ["axis", "force", "threshold", "velocity", "gradient", "kappa"])
        elif args.name == "collision":
            rows = demos.collision_sweep(kappa, steps=args.sweep or 101)
            _csv(rows, ["step", "center_x", "center_y", "normal_x", "normal_y", "angle_deg", "kappa"])
        elif args.name == "descent":
            params = demos.BlockParams()
            target = 0.5
            rows = []
            for f0 in np.linspace(0.0, 0.9 * params.lift_threshold, args.sweep or 4):
                hist = demos.optimize_force(target, f0, kappa, iterations=args.iters)
                rows += [
                    {"initial_force": float(f0), "iteration": i, "force": f, "velocity": v, "loss": loss, "kappa": kappa}
                    for i, (f, v, loss) in enumerate(hist)
                ]
            _csv(rows, ["initial_force", "iteration", "force", "velocity", "loss", "kappa"])
        else:
            raise CliError(f"unknown demo {args.name!r}; choose contact, collision or descent")
    except QpError as exc:
        raise CliError(str(exc), EXIT_NUMERICAL) from exc
    return EXIT_OK


def random_problem(rng, n, m, p, elastic=False):
    """Random strictly convex QP with a strictly feasible point ``x0``."""
    B = rng.standard_normal((n, n))
    Q = B.T @ B + np.eye(n)
    q = rng.standard_normal(n)
    x0 = rng.standard_normal(n)
    G = rng.standard_normal((p, n))
    h = G @ x0 + rng.uniform(0.0, 1.0, p)
    if elastic:
        return ElasticProblem(Q, q, G, h, rng.uniform(0.5, 5.0, p))
    A = rng.standard_normal((m, n))
    return QpProblem(Q, q, A, A @ x0, G, h)


def cmd_generate(args) -> int:
    rng = np.random.default_rng(args.seed)
    problem = random_problem(rng, args.n, 0 if args.elastic else args.m, args.p, args.elastic)
    _write(problem_document(problem), args)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="relaxqp", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def solver_flags(p):
        p.add_argument("--elastic", action="store_true", help="solve the l1-penalized form")
        p.add_argument("--rho", type=float, help="uniform penalty for --elastic when the file has none")
        p.add_argument("--tol", type=float)
        p.add_argument("--max-iters", dest="max_iters", type=int)
        p.add_argument("-o", "--output", help="write the document here instead of stdout")

    p = sub.add_parser("solve", help="solve one or more problem files")
    p.add_argument("paths", nargs="+")
    p.add_argument("--jobs", type=int, default=1, help="worker processes for batch solving")
    solver_flags(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("relax", help="solve, then relax onto the central path")
    p.add_argument("path")
    p.add_argument("--kappa", type=float)
    solver_flags(p)
    p.set_defaults(func=cmd_relax)

    p = sub.add_parser("grad", help="solve, relax and differentiate a linear loss")
    p.add_argument("path")
    p.add_argument("--kappa", type=float)
    p.add_argument("--loss-grad", dest="loss_grad", help="comma-separated gradient of the loss in x")
    p.add_argument("--loss-grad-file", dest="loss_grad_file")
    p.add_argument("--check", action="store_true", help="compare against finite differences")
    solver_flags(p)
    p.set_defaults(func=cmd_grad)

    p = sub.add_parser("demo", help="emit CSV for the contact, collision or descent demos")
    p.add_argument("name")
    p.add_argument("--kappa", type=float)
    p.add_argument("--sweep", type=int, help="number of sweep points")
    p.add_argument("--iters", type=int, default=60, help="descent iterations")
    p.set_defaults(func=cmd_demo)

    p = sub.add_parser("generate", help="write a random feasible problem file")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n", type=int, default=5)
    p.add_argument("--m", type=int, default=1)
    p.add_argument("--p", type=int, default=4)
    p.add_argument("--elastic", action="store_true")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_generate)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"relaxqp: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
