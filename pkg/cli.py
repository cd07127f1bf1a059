#!/usr/bin/env python3
"""
geoline - equilibrium borders on a linear world.

Usage:
    geoline solve        [params] [--out FILE] [--format json|csv]
    geoline gravity      [params] (--from M --to N [--exact] | --matrix [--exact])
    geoline migrate      [params] --from M --to N
    geoline decompose    [params] --param tau|h --delta D --from M --to N
    geoline statics      border-effect (--b B | --state N) | stability [--state N]
                         | size-response --state N | state0-shock [--delta D]
                         | opinions | opinion-var --param tau|h --delta D
                         | separatism [--samples K]
    geoline suffrage     [params] --phi PHI
    geoline verify       [params] [--grid STEP]
    geoline sweep        [params] --taus T [T ...] --hs H [H ...] [--threads N]
    geoline network      simulate --config FILE [--seed S]
                         | check --config FILE --graph FILE
                         | prob --config FILE --seed S --runs R [--threads N]

Params: --tau 1 --h 0.2 --gamma 2 --alpha 0.5 --psi 1 (plus --eps-border,
--eps-size, --fd-step).

CSV columns:
    solve                 index,left,right,size,remoteness,is_polar
    suffrage              index,left,right,size,remoteness,is_polar
    gravity --matrix      exporter,importer,distance,flow
    statics state0-shock  index,db_db0_fd,db_db0_analytic,ds_db0_fd,ds_db0_analytic,
                          ds_dbprev_analytic,f_b,f_b_positive,premise_holds,agrees
    statics separatism    index,t,sigma,overlap,ideal_left,ideal_right,dsigma_dtau,dsigma_dR
    sweep                 tau,h,feasible,n_interior,b0,truncated

Exit codes: 0 ok, 1 invalid input, 2 numerical failure.
Environment: GEOLINE_THREADS caps worker threads, GEOLINE_LOG_LEVEL sets logging.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from dataclasses import asdict, replace
from pathlib import Path

import pandas as pd

import documents
import geopolitics
import migration
import network
import solver
import trade
from core import GeolineError, ModelParams, ValidationError

logger = logging.getLogger("geoline")

LOG_LEVEL_ENV = "GEOLINE_LOG_LEVEL"
STATE_COLUMNS = list(documents.STATE_FIELDS)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise ValidationError(message)


def _configure_logging() -> None:
    level = os.environ.get(LOG_LEVEL_ENV, "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), format="[%(name)s] %(message)s", stream=sys.stderr)


def _params(args) -> ModelParams:
    return ModelParams(
        tau=args.tau,
        h=args.h,
        gamma=args.gamma,
        alpha=args.alpha,
        psi=args.psi,
        eps_border=args.eps_border,
        eps_size=args.eps_size,
        fd_step=args.fd_step,
    )


def _emit(args, payload, frame: pd.DataFrame | None = None) -> int:
    if args.format == "csv":
        if frame is None:
            raise ValidationError(f"{args.command} has no tabular output; use --format json")
        data = frame.to_csv(index=False, lineterminator="\n").encode("utf-8")
    else:
        data = documents.serialize(payload)
    if args.out:
        Path(args.out).write_bytes(data)
        logger.info("wrote %s", args.out)
    else:
        sys.stdout.write(data.decode("utf-8"))
        sys.stdout.flush()
    return 0


def _states_frame(partition: solver.Partition) -> pd.DataFrame:
    return pd.DataFrame([asdict(s) for s in partition.states], columns=STATE_COLUMNS)


def cmd_solve(args) -> int:
    partition = solver.solve_partition(_params(args))
    return _emit(args, documents.partition_document(partition), _states_frame(partition))


def cmd_suffrage(args) -> int:
    params = _params(args)
    partition = solver.solve_partition_se(params, args.phi)
    doc = documents.partition_document(partition)
    logger.info("suffrage theta=%g h_eff=%g", solver.suffrage_theta(params), partition.h_eff)
    return _emit(args, doc, _states_frame(partition))


def _pair_args(args) -> tuple[int, int]:
    if args.exporter is None or args.importer is None:
        raise ValidationError("--from and --to are required")
    return args.exporter, args.importer


def cmd_gravity(args) -> int:
    partition = solver.solve_partition(_params(args))
    if args.matrix:
        frame = trade.trade_matrix(partition, exact=args.exact)
        return _emit(args, frame.to_dict(orient="records"), frame)
    m, n = _pair_args(args)
    flow = trade.gravity_exact(partition, m, n) if args.exact else trade.gravity_newton(partition, m, n)
    return _emit(args, flow)


def cmd_migrate(args) -> int:
    partition = solver.solve_partition(_params(args))
    return _emit(args, migration.migration_flow(partition, *_pair_args(args)))


def cmd_decompose(args) -> int:
    shock = trade.Shock(args.param, args.delta)
    return _emit(args, trade.decompose_change(_params(args), shock, *_pair_args(args)))


def cmd_statics(args) -> int:
    params = _params(args)
    what = args.statistic
    if what == "border-effect":
        if args.b is None and args.state is None:
            raise ValidationError("border-effect needs --b or --state")
        b = args.b if args.b is not None else solver.solve_partition(params).state(args.state).right_form[1]
        return _emit(args, {"b": b, "border_effect": geopolitics.border_effect(b)})
    if what == "state0-shock":
        delta = params.fd_step if args.delta is None else args.delta
        table = geopolitics.state0_shock(params, delta)
        return _emit(args, table, table.to_frame())
    if what == "opinion-var":
        if args.param is None or args.delta is None:
            raise ValidationError("opinion-var needs --param and --delta")
        return _emit(args, geopolitics.opinion_variance_sensitivity(params, trade.Shock(args.param, args.delta)))

    partition = solver.solve_partition(params)
    if what == "opinions":
        return _emit(args, geopolitics.national_opinions(partition))
    if what == "separatism":
        points = geopolitics.separatism_profile(partition, args.samples)
        return _emit(args, points, pd.DataFrame([asdict(p) for p in points]))
    if what == "size-response":
        if args.state is None:
            raise ValidationError("size-response needs --state")
        return _emit(args, geopolitics.local_size_response(partition, args.state))
    indices = [args.state] if args.state is not None else [s.index for s in partition.interior_states]
    rows = [{"state": n, "dh_dtau": geopolitics.stability_compensation(partition, n)} for n in indices]
    return _emit(args, rows, pd.DataFrame(rows, columns=["state", "dh_dtau"]))


def cmd_verify(args) -> int:
    partition = solver.solve_partition(_params(args))
    audit = solver.audit_equilibrium(partition, args.grid)
    doc = asdict(audit)
    doc.update(passed=audit.passed, failing_states=sorted(audit.failing_states))
    return _emit(args, doc)


def cmd_sweep(args) -> int:
    frame = geopolitics.state_count_sweep(_params(args), args.taus, args.hs, args.threads)
    records = frame.astype(object).where(frame.notna(), None).to_dict(orient="records")
    return _emit(args, records, frame)


def cmd_network(args) -> int:
    config = documents.parse_network_config(documents.read_bytes(args.config))
    if args.seed is not None:
        config = replace(config, seed=args.seed)
    if args.action == "simulate":
        graph = network.simulate_formation(config)
        doc = documents.graph_document(graph)
        doc["stability"] = network.check_pairwise_stable(graph, config)
        return _emit(args, doc)
    if args.action == "check":
        graph = documents.parse_graph(documents.read_bytes(args.graph), config)
        sizes, pairs = network.component_bounds(graph, config)
        report = network.check_pairwise_stable(graph, config)
        doc = {
            **asdict(report),
            "stable": report.stable,
            "components": [{**asdict(b), "satisfied": b.satisfied} for b in sizes],
            "component_pairs": [{**asdict(b), "satisfied": b.satisfied} for b in pairs],
        }
        return _emit(args, doc)
    if args.seed is None:
        raise ValidationError("network prob requires --seed")
    freqs = network.equilibrium_probability(config, args.runs, args.threads)
    rows = [{"edges": [list(e) for e in key], "frequency": f, "probability": float(f)} for key, f in freqs.items()]
    return _emit(args, {"runs": args.runs, "seed": args.seed, "networks": rows})


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="geoline", description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)

    io = _Parser(add_help=False)
    io.add_argument("--out", help="output file (default: stdout)")
    io.add_argument("--format", choices=["json", "csv"], default="json")

    defaults = ModelParams()
    model = _Parser(add_help=False)
    model.add_argument("--tau", type=float, default=defaults.tau)
    model.add_argument("--h", type=float, default=defaults.h)
    model.add_argument("--gamma", type=float, default=defaults.gamma)
    model.add_argument("--alpha", type=float, default=defaults.alpha)
    model.add_argument("--psi", type=float, default=defaults.psi)
    model.add_argument("--eps-border", type=float, default=defaults.eps_border)
    model.add_argument("--eps-size", type=float, default=defaults.eps_size)
    model.add_argument("--fd-step", type=float, default=defaults.fd_step)

    pair = _Parser(add_help=False)
    pair.add_argument("--from", dest="exporter", type=int)
    pair.add_argument("--to", dest="importer", type=int)

    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", parents=[model, io], help="equilibrium partition")
    p.set_defaults(handler=cmd_solve)

    p = sub.add_parser("gravity", parents=[model, pair, io], help="gravity trade flow")
    p.add_argument("--exact", action="store_true")
    p.add_argument("--matrix", action="store_true", help="all ordered pairs plus domestic flows")
    p.set_defaults(handler=cmd_gravity)

    p = sub.add_parser("migrate", parents=[model, pair, io], help="migration flow")
    p.set_defaults(handler=cmd_migrate)

    p = sub.add_parser("decompose", parents=[model, pair, io], help="trade change decomposition")
    p.add_argument("--param", choices=["tau", "h"], required=True)
    p.add_argument("--delta", type=float, required=True)
    p.set_defaults(handler=cmd_decompose)

    p = sub.add_parser("statics", parents=[model, io], help="comparative statics and ideology")
    p.add_argument(
        "statistic",
        choices=["border-effect", "stability", "size-response", "state0-shock", "opinions", "opinion-var", "separatism"],
    )
    p.add_argument("--b", type=float)
    p.add_argument("--state", type=int)
    p.add_argument("--delta", type=float)
    p.add_argument("--param", choices=["tau", "h"])
    p.add_argument("--samples", type=int, default=16)
    p.set_defaults(handler=cmd_statics)

    p = sub.add_parser("suffrage", parents=[model, io], help="partition under labor suffrage")
    p.add_argument("--phi", type=float, required=True)
    p.set_defaults(handler=cmd_suffrage)

    p = sub.add_parser("verify", parents=[model, io], help="equilibrium audit")
    p.add_argument("--grid", type=float, default=1e-3)
    p.set_defaults(handler=cmd_verify)

    p = sub.add_parser("sweep", parents=[model, io], help="state count over a (tau, h) grid")
    p.add_argument("--taus", type=float, nargs="+", required=True)
    p.add_argument("--hs", type=float, nargs="+", required=True)
    p.add_argument("--threads", type=int)
    p.set_defaults(handler=cmd_sweep)

    p = sub.add_parser("network", parents=[io], help="network formation")
    p.add_argument("action", choices=["simulate", "check", "prob"])
    p.add_argument("--config", required=True)
    p.add_argument("--graph")
    p.add_argument("--seed", type=int)
    p.add_argument("--runs", type=int, default=1000)
    p.add_argument("--threads", type=int)
    p.set_defaults(handler=cmd_network)

    return parser


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        _configure_logging()
        if args.command == "network" and args.action == "check" and not args.graph:
            raise ValidationError("network check requires --graph")
        return args.handler(args)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 1
    except GeolineError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code


def main() -> None:
    raise SystemExit(run())


if __name__ == "__main__":
    main()
