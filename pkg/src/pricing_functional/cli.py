"""Command-line entry point.

Exit codes: 0 success, 1 I/O failure, 2 validation failure (schema or a
violated curve/pricing invariant).
"""

from __future__ import annotations

import argparse
import logging
import math
import sys
from dataclasses import replace

import numpy as np
from pydantic import ValidationError

from pricing_functional import io
from pricing_functional.curves import (
    call_curve,
    curve_violations,
    measure_curve_violations,
    put_curve,
)
from pricing_functional.oracle import oracle_price
from pricing_functional.reconstruct import cdf_from_puts, replicate_piecewise_linear
from pricing_functional.replication import (
    DCPayoff,
    PiecewiseDCPayoff,
    piece_breakdown,
    replication_breakdown,
)
from pricing_functional.returns import (
    gaussian_mixture_pdf,
    gaussian_pdf,
    hermite_project,
    put_under_density,
    recover_put,
)

log = logging.getLogger("pricing_functional")

VERIFY_TOL = 1e-8


class InvariantError(ValueError):
    pass


def parse_grid(text: str) -> np.ndarray:
    """``start:stop:step`` with ``stop`` included when it lies on the grid."""
    try:
        start, stop, step = (float(t) for t in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"grid must be start:stop:step, got {text!r}") from None
    if step <= 0 or stop < start:
        raise argparse.ArgumentTypeError(f"bad grid {text!r}")
    n = int(math.floor((stop - start) / step + 1e-9))
    return np.round(start + step * np.arange(n + 1), 12)


def parse_floats(text: str) -> list[float]:
    return [float(t) for t in text.split(",") if t.strip()]


def _out(path):
    return sys.stdout if path in (None, "-") else path


def _emit(text: str, path) -> None:
    if path in (None, "-"):
        print(text)
    else:
        with open(path, "w") as fh:
            fh.write(text + "\n")


def cmd_curve(args) -> int:
    measure = io.load_measure(args.measure)
    build = put_curve if args.role == "put" else call_curve
    curve = build(measure, args.strikes)
    problems = measure_curve_violations(measure, args.strikes)
    if problems:
        raise InvariantError("; ".join(problems))
    meta = args.meta
    if meta is None and args.out not in (None, "-"):
        meta = io.sidecar_path(args.out)
    io.write_curve(curve, _out(args.out), meta)
    return 0


def cmd_reconstruct(args) -> int:
    put = io.read_curve(args.puts, args.meta)
    if put.role != "put":
        raise InvariantError(f"{args.puts} is a {put.role} curve, expected put")
    problems = curve_violations(put)
    if problems:
        raise InvariantError("; ".join(problems))
    est = cdf_from_puts(put)
    io.write_table(_out(args.out), ("strike", "f_hat", "bound"), zip(est.strikes, est.f_hat, est.bound))
    return 0


def _payoff_breakpoints(payoff) -> list[float]:
    pieces = payoff.pieces if isinstance(payoff, PiecewiseDCPayoff) else ()
    pts = [p.a for p in pieces] + [p.b for p in pieces if math.isfinite(p.b)]
    curvatures = [p.curvature for p in pieces] if pieces else [payoff.curvature]
    for nu in curvatures:
        pts.extend(x for x, _ in nu.atoms)
        if nu.density is not None:
            pts.extend(x for x in nu.density.nodes if math.isfinite(x))
    return pts


def cmd_price(args) -> int:
    call = io.read_curve(args.calls, args.meta)
    if call.role != "call":
        raise InvariantError(f"{args.calls} is a {call.role} curve, expected call")
    call = replace(call, tail=args.tail)
    problems = curve_violations(call)
    if problems:
        raise InvariantError("; ".join(problems))
    payoff = io.load_payoff(args.payoff)
    if isinstance(payoff, DCPayoff):
        b = replication_breakdown(call, payoff, args.tail_budget)
        report = {
            "price": b.price,
            "bond_term": b.bond_term,
            "forward_term": b.forward_term,
            "curvature_term": b.curvature_term,
            "tail_bound": b.tail_bound,
            "interpolation_bound": b.interpolation_bound,
            "tail_policy": call.tail,
        }
    else:
        parts = [piece_breakdown(call, p, args.tail_budget) for p in payoff.pieces]
        report = {
            "price": math.fsum(p.price for p in parts),
            "curvature_term": math.fsum(p.curvature_term for p in parts),
            "boundary_term": math.fsum(p.boundary_term for p in parts),
            "tail_bound": math.fsum(p.tail_bound for p in parts),
            "interpolation_bound": math.fsum(p.interpolation_bound for p in parts),
            "tail_policy": call.tail,
        }
    status = 0
    if args.verify:
        measure = io.load_measure(args.verify)
        truth, err = oracle_price(measure, payoff.value, breakpoints=_payoff_breakpoints(payoff))
        report["oracle_price"] = truth
        report["oracle_error_estimate"] = err
        report["oracle_delta"] = report["price"] - truth
        allowed = VERIFY_TOL + report["tail_bound"] + report["interpolation_bound"]
        if abs(report["oracle_delta"]) > allowed:
            log.error("replication differs from oracle by %.3g", report["oracle_delta"])
            status = 2
    print(io.dumps(report))
    return status


def cmd_replicate(args) -> int:
    nodes = io.read_table(args.nodes, ("x", "g"))
    port = replicate_piecewise_linear([tuple(r) for r in nodes], args.terminal_slope, args.kind)
    report = {"portfolio": io.portfolio_to_dict(port)}
    if args.measure:
        measure = io.load_measure(args.measure)
        xs, gs = nodes[:, 0], nodes[:, 1]

        def g(x):
            x = np.asarray(x, dtype=float)
            tail = gs[-1] + args.terminal_slope * (x - xs[-1])
            return np.where(x > xs[-1], tail, np.interp(x, xs, gs))

        report["price"] = port.price(measure)
        report["oracle_price"], _ = oracle_price(measure, g, breakpoints=xs)
    _emit(io.dumps(report), args.out)
    return 0


def cmd_converge(args) -> int:
    spec = io.load_return_density(args.density)
    if spec.family == "gaussian":
        f = gaussian_pdf(spec.loc, spec.scale)
    else:
        if not spec.components:
            raise InvariantError("mixture density needs components")
        f = gaussian_mixture_pdf(spec.components)
    approxs = [hermite_project(f, n, args.loc, args.scale) for n in sorted(args.orders)]
    table = recover_put(approxs, args.k2, args.k1)
    target = put_under_density(f, args.k2)
    rows = [
        (r["order"], r["k1"], r["theta_inner"], abs(r["theta_inner"] - target))
        for r in table.to_rows()
    ]
    io.write_table(_out(args.out), ("order", "k1", "theta_inner", "abs_error"), rows)
    print(
        f"# k2={args.k2:g} P(k2)={target:.12g} estimate={table.estimate:.12g} "
        f"abs_error={abs(table.estimate - target):.3g}",
        file=sys.stderr if args.out in (None, "-") else sys.stdout,
    )
    return 0


def cmd_verify(args) -> int:
    measure = io.load_measure(args.measure)
    problems = measure_curve_violations(measure, args.strikes)
    for p in problems:
        print(f"FAIL {p}")
    if not problems:
        print("PASS curve property suite")
    if args.payoff:
        payoff = io.load_payoff(args.payoff)
        call = call_curve(measure, args.strikes)
        if isinstance(payoff, DCPayoff):
            price = replication_breakdown(call, payoff).price
        else:
            price = math.fsum(piece_breakdown(call, p).price for p in payoff.pieces)
        truth, _ = oracle_price(measure, payoff.value, breakpoints=_payoff_breakpoints(payoff))
        ok = abs(price - truth) <= VERIFY_TOL
        print(f"{'PASS' if ok else 'FAIL'} replication {price:.12g} vs oracle {truth:.12g} (delta {price - truth:.3g})")
        if not ok:
            problems.append("replication")
    return 2 if problems else 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="pricing-functional", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("curve", help="put or call curve from a measure")
    c.add_argument("--measure", required=True)
    c.add_argument("--strikes", required=True, type=parse_grid, help="start:stop:step")
    c.add_argument("--role", choices=("put", "call"), default="put")
    c.add_argument("--out", help="CSV output (default stdout)")
    c.add_argument("--meta", help="sidecar JSON (default <out>.meta.json)")
    c.set_defaults(func=cmd_curve)

    r = sub.add_parser("reconstruct", help="CDF estimate from put quotes")
    r.add_argument("--puts", required=True)
    r.add_argument("--meta")
    r.add_argument("--out")
    r.set_defaults(func=cmd_reconstruct)

    pr = sub.add_parser("price", help="price a payoff from call quotes")
    pr.add_argument("--calls", required=True)
    pr.add_argument("--payoff", required=True)
    pr.add_argument("--meta")
    pr.add_argument("--verify", metavar="MEASURE", help="compare with the oracle under this measure")
    pr.add_argument("--tail-budget", type=float, default=1e-8)
    pr.add_argument(
        "--tail",
        choices=("truncate", "exponential"),
        default="truncate",
        help="call prices beyond the last strike: zero within the budget, or an exponential extension",
    )
    pr.set_defaults(func=cmd_price)

    rp = sub.add_parser("replicate", help="static replication of a piecewise-linear payoff")
    rp.add_argument("--nodes", required=True, help="CSV with header x,g; first x must be 0")
    rp.add_argument("--terminal-slope", type=float, default=0.0)
    rp.add_argument("--kind", choices=("put", "call"), default="put")
    rp.add_argument("--measure")
    rp.add_argument("--out")
    rp.set_defaults(func=cmd_replicate)

    cv = sub.add_parser("converge", help="theta-spread recovery table")
    cv.add_argument("--density", required=True)
    cv.add_argument("--orders", type=lambda s: [int(v) for v in parse_floats(s)], default=[0, 4, 8, 16])
    cv.add_argument("--k1", type=parse_floats, default=[0.5, 0.25, 0.1, 0.05])
    cv.add_argument("--k2", type=float, default=1.0)
    cv.add_argument("--loc", type=float, default=0.0, help="Hermite basis centre")
    cv.add_argument("--scale", type=float, default=1.0, help="Hermite basis width")
    cv.add_argument("--out")
    cv.set_defaults(func=cmd_converge)

    v = sub.add_parser("verify", help="run the curve and replication checks for a measure")
    v.add_argument("--measure", required=True)
    v.add_argument("--strikes", type=parse_grid, default=parse_grid("0:5:0.1"))
    v.add_argument("--payoff")
    v.set_defaults(func=cmd_verify)
    return p


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (ValidationError, ValueError, ArithmeticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
