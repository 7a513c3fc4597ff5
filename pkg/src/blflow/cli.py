"""Batch front end: parse a problem file, dispatch, emit a JSON/CSV report.

Exit codes are a stable contract: 0 pass, 1 verdict-fail (e.g. the
concavity check fails), 2 input error, 3 non-convergence, 4 certificate
rejection.
"""

from __future__ import annotations

import argparse
import json
import os
import sys as _sys

import numpy as np

from . import certificate, gaussian, heatflow, polytope, verifier
from .errors import (BLFlowError, CertificateRejection, IterationError,
                     StructuralError)
from .io import Problem, parse_problem
from .model import BellmanSpec, make_cert

EXIT_OK = 0
EXIT_VERDICT = 1
EXIT_INPUT = 2
EXIT_NOCONV = 3
EXIT_REJECT = 4


def _load(path: str) -> Problem:
    with open(path, encoding="utf-8") as fh:
        return parse_problem(fh.read())


def _emit(doc, out=None) -> None:
    text = json.dumps(doc, indent=2, default=_jsonable) + "\n"
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        _sys.stdout.write(text)


def _jsonable(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    raise TypeError(f"not JSON serializable: {type(obj)}")


def _bellman_of(problem: Problem) -> BellmanSpec:
    if problem.B is not None:
        return problem.B
    if problem.exponents is not None and np.all(problem.exponents.inv_p < 1.0):
        return BellmanSpec.young(problem.exponents.inv_p)
    raise StructuralError("problem file has no usable B")


def _certificate_of(problem: Problem):
    """Explicit C from the file, or the solved one; returns (cert, solve_info)."""
    if problem.C is not None:
        return make_cert(problem.system, problem.C, e=problem.exponents), None
    if problem.exponents is None:
        raise StructuralError("need either an explicit C or exponents to solve for one")
    verdict = polytope.is_finite(problem.system, problem.exponents)
    cert, result = certificate.solve_certificate(
        problem.system, problem.exponents,
        boundary_slack=verdict.slack if verdict.weights is not None else None,
        res_tol=problem.tolerances.get("res_tol", certificate.RES_TOL))
    return cert, result


def cmd_finiteness(problem: Problem, args) -> int:
    if problem.exponents is None:
        raise StructuralError("finiteness needs inv_p")
    bases = polytope.enumerate_bases(problem.system)
    v = polytope.is_finite(problem.system, problem.exponents,
                           boundary_tol=problem.tolerances.get("boundary_tol",
                                                               polytope.BOUNDARY_TOL),
                           bases=bases)
    _emit({"verdict": v.verdict,
           "certificate": None if v.weights is None else v.weights,
           "slack": None if v.weights is None else v.slack,
           "basis_count": v.basis_count}, args.out)
    return EXIT_OK


def cmd_constant(problem: Problem, args) -> int:
    if problem.exponents is None:
        raise StructuralError("constant needs inv_p")
    verdict = polytope.is_finite(problem.system, problem.exponents)
    warnings = []
    if verdict.verdict != "inside":
        warnings.append(f"exponents are {verdict.verdict} the polytope; "
                        "the supremum may be infinite or attained only in a limit")
    extra = []
    try:
        res_s = certificate.solve_s_system(problem.system, problem.exponents)
        if res_s.converged:
            extra.append(np.log(problem.exponents.p * res_s.s_sq))
    except (IterationError, CertificateRejection):
        pass
    result = gaussian.maximize_D(problem.system, problem.exponents,
                                 seed=problem.seed, extra_starts=extra)
    status = ("sup not attained / infinite" if result.diverged
              else "converged" if result.grad_norm <= 1e3 * gaussian.GRAD_TOL
              else "non-convergence")
    _emit({"D": result.value, "argmax_b": result.b, "restarts": result.restarts,
           "grad_norm": result.grad_norm, "status": status,
           "local_maxima": [v for v, _ in result.local_maxima],
           "warnings": warnings}, args.out)
    if status == "non-convergence":
        return EXIT_NOCONV
    return EXIT_OK


def cmd_solve_c(problem: Problem, args) -> int:
    if problem.exponents is None:
        raise StructuralError("solve-c needs inv_p")
    verdict = polytope.is_finite(problem.system, problem.exponents)
    result = certificate.solve_s_system(
        problem.system, problem.exponents,
        res_tol=problem.tolerances.get("res_tol", certificate.RES_TOL))
    cert = certificate.build_C(problem.system, problem.exponents, result.s_sq,
                               notes=result.notes)
    defect = certificate.certificate_defect(problem.system, problem.exponents, cert)
    proj = certificate.projection_check(problem.system, cert)
    _emit({"C": cert.C, "s_sq": cert.s_sq, "sigma": cert.sigma,
           "residual": cert.residual, "system_residual": result.residual,
           "iterations": result.iterations, "converged": result.converged,
           "inverse_defect": defect,
           "projection": {"ok": proj.ok, "eigenvalues": proj.eigenvalues,
                          "rank": proj.rank, "trace": proj.trace,
                          "idempotency_defect": proj.idempotency_defect},
           "polytope_verdict": verdict.verdict,
           "notes": list(cert.notes)}, args.out)
    if not result.converged:
        return EXIT_NOCONV
    return EXIT_OK


def cmd_verify(problem: Problem, args) -> int:
    B = _bellman_of(problem)
    cert, _ = _certificate_of(problem)
    report = verifier.verify(problem.system, cert, B,
                             count=args.grid or verifier.SAMPLE_COUNT,
                             seed=problem.seed,
                             pde_tol=args.tol or verifier.PDE_TOL)
    _emit({"l3": {"ok": report.l3_ok, "max_eig": report.l3_max_eig},
           "pde": {"ok": report.pde_ok, "defect": report.pde_defect},
           "rank": {"ok": report.rank_ok, "worst": report.rank_worst,
                    "bound": problem.system.n - problem.system.k},
           "euler_defect": report.euler_defect,
           "l5": {"converged": report.l5.converged, "value": report.l5.value,
                  "values": list(report.l5.values)},
           "samples": report.samples, "seed": report.seed,
           "tolerances": report.tolerances,
           "ok": report.ok}, args.out)
    return EXIT_OK if report.ok else EXIT_VERDICT


def _trace_csv(trace: heatflow.EnergyTrace) -> str:
    lines = ["t,B_t,L,refinement"]
    for t, v, L, lev in zip(trace.times, trace.values, trace.halfwidths, trace.levels):
        lines.append(f"{t:.17g},{v:.17g},{L:.17g},{int(lev)}")
    return "\n".join(lines) + "\n"


def cmd_flow(problem: Problem, args) -> int:
    if problem.profiles is None:
        raise StructuralError("flow needs profiles")
    B = _bellman_of(problem)
    cert, _ = _certificate_of(problem)
    times = list(heatflow.DEFAULT_TIMES)
    if args.tmax is not None:
        times = [t for t in times if t <= args.tmax]
        if args.tmax not in times:
            times.append(args.tmax)
    trace, verdict = heatflow.monotonicity_scan(
        problem.system, cert, B, problem.profiles, times=times,
        quad_tol=args.tol or heatflow.QUAD_TOL)
    csv_text = _trace_csv(trace)
    doc = {"monotone": verdict.monotone, "label": verdict.label,
           "mono_tol": verdict.mono_tol, "initial_value": verdict.initial_value,
           "limit_value": verdict.limit_value, "final_gap": verdict.final_gap,
           "times": trace.times, "values": trace.values}
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(csv_text)
    if args.format == "csv":
        _sys.stdout.write(csv_text)
    else:
        _emit(doc)
    return EXIT_OK if verdict.monotone else EXIT_VERDICT


_COMMANDS = {
    "finiteness": cmd_finiteness,
    "constant": cmd_constant,
    "solve-c": cmd_solve_c,
    "verify": cmd_verify,
    "flow": cmd_flow,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="blflow")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("file")
        p.add_argument("--tol", type=float, default=None)
        p.add_argument("--grid", type=int, default=None)
        p.add_argument("--tmax", type=float, default=None)
        p.add_argument("--out", default=None)
        p.add_argument("--format", choices=("json", "csv"), default="json")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    # BLFLOW_THREADS caps internal worker counts; computation here is
    # vectorized single-process, so it only pins the BLAS pool
    threads = os.environ.get("BLFLOW_THREADS")
    if threads:
        os.environ.setdefault("OMP_NUM_THREADS", threads)
    try:
        problem = _load(args.file)
    except (OSError, StructuralError) as exc:
        print(f"error: {exc}", file=_sys.stderr)
        return EXIT_INPUT
    try:
        return _COMMANDS[args.command](problem, args)
    except StructuralError as exc:
        print(f"error: {exc}", file=_sys.stderr)
        return EXIT_INPUT
    except CertificateRejection as exc:
        print(f"certificate rejected: {exc}", file=_sys.stderr)
        return EXIT_REJECT
    except IterationError as exc:
        print(f"non-convergence: {exc}", file=_sys.stderr)
        return EXIT_NOCONV
    except BLFlowError as exc:
        print(f"error: {exc}", file=_sys.stderr)
        return EXIT_NOCONV


if __name__ == "__main__":
    raise SystemExit(main())
