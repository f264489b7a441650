"""Command-line interface: ``compute``, ``verify``, ``sweep`` and ``gen``.

Exit codes: 0 success, 1 a verification check failed, 2 invalid input,
3 an optimizer did not converge (the best iterate is printed).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass, field

import numpy as np

from . import betting as bt
from . import divergences as dv
from . import games as gm
from . import prob_core as pc
from . import quantum_core as qc
from . import resource as rs
from . import serialization as ser
from .errors import InputError, OptimizerDidNotConverge
from .suites import SUITES, run_suite

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_CONVERGENCE = 0, 1, 2, 3


@dataclass
class RunConfig:
    command: str
    alphas: list = field(default_factory=list)
    risks: list = field(default_factory=list)
    seed: int = 0
    trials: int | None = None
    tol: float | None = None
    fmt: str = "json"
    out: str | None = None

    def orders(self) -> list:
        """Orders requested directly or through R = 1/α."""
        if self.alphas and self.risks:
            raise InputError("--alpha and --risk are mutually exclusive")
        if self.risks:
            return [_alpha_of(r) for r in self.risks]
        return list(self.alphas)


def _alpha_of(r: float) -> float:
    if r == 0.0:
        return math.inf if math.copysign(1.0, r) > 0 else -math.inf
    if math.isinf(r):
        raise InputError("R = ±inf corresponds to order 0, which is not supported here")
    return 1.0 / r


def _number(text: str) -> float:
    try:
        return pc.Order.parse(text).value
    except Exception:
        raise argparse.ArgumentTypeError(f"not a number or ±inf: {text!r}") from None


# compute --------------------------------------------------------------------------


def _need(args, *names):
    missing = [n for n in names if getattr(args, n.replace("-", "_")) is None]
    if missing:
        raise InputError("missing " + ", ".join(f"--{n}" for n in missing))
    return [ser.read_json(getattr(args, n.replace("-", "_"))) for n in names]


def _dist(args):
    if args.joint is not None:
        return ser.load_joint(ser.read_json(args.joint))
    if args.prior is not None:
        return ser.load_pmf(ser.read_json(args.prior))
    raise InputError("missing --joint or --prior")


def _odds(args, n, a=None):
    if args.odds is not None:
        return np.asarray(ser.read_json(args.odds), dtype=float)
    if a is None:
        raise InputError("missing --odds")
    return bt.constant_odds(pc.sgn(a), args.C, n)


def _risk_of(a):
    return 1.0 / a if a != 0 else math.inf


def _states(args):
    (s,) = _need(args, "states")
    return ser.load_states(s)


def _q_pmf(obj):
    arr = np.asarray(obj, dtype=float)
    return ser.load_pmf(arr) if arr.ndim == 1 else ser.load_cond(arr)


BUILT_IN_FREE = {"uninformative": gm.FreeSet.uninformative, "constant": gm.FreeSet.constant_channels}


def _free(args, loader):
    if args.free in BUILT_IN_FREE:
        return BUILT_IN_FREE[args.free]()
    (free,) = _need(args, "free")
    return [loader(x) for x in free]


def _gap(args, a):
    kind = gm.GapKind(args.kind or "measurement")
    if kind is gm.GapKind.MEASUREMENT:
        e, m = ser.load_ensemble(_need(args, "ensemble")[0]), ser.load_povm(_need(args, "povm")[0])
        free = _free(args, ser.load_povm)
        free = free if isinstance(free, gm.FreeSet) else gm.FreeSet.measurements(free)
        return gm.arimoto_gap(kind, {"ensemble": e, "povm": m}, free, a, seed=args.seed)
    if kind is gm.GapKind.CHANNEL:
        e, n = ser.load_ensemble(_need(args, "ensemble")[0]), ser.load_channel(_need(args, "channel")[0])
        free = _free(args, ser.load_channel)
        free = free if isinstance(free, gm.FreeSet) else gm.FreeSet.channels(free)
        return gm.arimoto_gap(kind, {"ensemble": e, "channel": n}, free, a, seed=args.seed)
    prior, chans, state, m = _need(args, "prior", "channels", "state", "povm")
    fixed = {"prior": ser.load_pmf(prior), "channels": [ser.load_channel(c) for c in chans],
             "state": ser.load_state(state), "povm": ser.load_povm(m)}
    states = gm.FreeSet.states([ser.load_state(s) for s in _need(args, "free")[0]])
    if kind is gm.GapKind.STATE:
        return gm.arimoto_gap(kind, fixed, states, a, seed=args.seed)
    if args.free_measurements == "uninformative":
        meas = gm.FreeSet.uninformative()
    else:
        meas = gm.FreeSet.measurements([ser.load_povm(x) for x in _need(args, "free-measurements")[0]])
    return gm.arimoto_gap(kind, fixed, (states, meas), a, seed=args.seed)


def _c_ensemble(args):
    return ser.load_ensemble(_need(args, "ensemble")[0])


def _c_povm(args, name="povm"):
    return ser.load_povm(_need(args, name)[0])


def _c_channel(args):
    return ser.load_channel(_need(args, "channel")[0])


def _game(args, a):
    e = _c_ensemble(args)
    return gm.QsbGame(_odds(args, len(e), a), e)


def _qcb(args, a):
    prior, chans, state = _need(args, "prior", "channels", "state")
    prior = ser.load_pmf(prior)
    return (_odds(args, prior.size, a), prior, [ser.load_channel(c) for c in chans], ser.load_state(state))


def _strategy_call(fn):
    def run(args, a):
        dist = _dist(args)
        (b,) = _need(args, "strategy")
        return fn(np.asarray(b, dtype=float), _odds(args, dist.shape[0], a), dist, _risk_of(a))
    return run


# name -> (callable(args, alpha), whether an order is needed)
QUANTITIES = {
    "sgn": (lambda args, a: pc.sgn(args.w), False),
    "renyi-entropy": (lambda args, a: pc.renyi_entropy(ser.load_pmf(_need(args, "pmf")[0]), a), True),
    "renyi-probability": (lambda args, a: pc.renyi_probability(ser.load_pmf(_need(args, "pmf")[0]), a), True),
    "arimoto-cond-entropy": (lambda args, a: pc.arimoto_cond_entropy(ser.load_joint(_need(args, "joint")[0]), a), True),
    "cond-renyi-probability": (lambda args, a: pc.cond_renyi_probability(ser.load_joint(_need(args, "joint")[0]), a),
                               True),
    "arimoto-mi": (lambda args, a: pc.arimoto_mi(ser.load_joint(_need(args, "joint")[0]), a), True),
    "renyi-div": (lambda args, a: dv.renyi_div(*(ser.load_pmf(x) for x in _need(args, "p", "q")), a), True),
    "cond-renyi-div": (lambda args, a: dv.cond_renyi_div(
        args.variant or "sibson", ser.load_cond(_need(args, "p-gx")[0]), _q_pmf(_need(args, "q-gx")[0]),
        ser.load_pmf(_need(args, "p-x")[0]), a), True),
    "variant-mi": (lambda args, a: dv.variant_mi_details(
        args.variant or "sibson", ser.load_joint(_need(args, "joint")[0]), a, seed=args.seed), True),
    "renyi-capacity": (lambda args, a: dv.renyi_capacity(ser.load_cond(_need(args, "cond")[0]), a, seed=args.seed),
                       True),
    "sibson-capacity": (lambda args, a: dv.sibson_capacity(ser.load_cond(_need(args, "cond")[0]), a, seed=args.seed),
                        True),
    "born-cond-pmf": (lambda args, a: qc.born_cond_pmf(_c_povm(args), _states(args)), False),
    "apply-channel": (lambda args, a: qc.apply_channel(_c_channel(args), ser.load_state(_need(args, "state")[0])),
                      False),
    "adjoint-apply": (lambda args, a: qc.adjoint_apply(_c_channel(args), _c_povm(args)), False),
    "is-uninformative": (lambda args, a: qc.is_uninformative(_c_povm(args), args.tol or 1e-6), False),
    "simulate-measurement": (lambda args, a: qc.simulate_measurement(_c_povm(args), ser.load_cond(
        _need(args, "post")[0])), False),
    "isoelastic-utility": (lambda args, a: bt.isoelastic_utility(args.w, _risk_of(a)), True),
    "ice": (_strategy_call(bt.ice), True),
    "log-ice": (_strategy_call(bt.log_ice), True),
    "blp-decomposition": (_strategy_call(bt.blp_decomposition), True),
    "optimal-strategy": (lambda args, a: bt.optimal_strategy(_odds(args, _dist(args).shape[0], a), _dist(args),
                                                             _risk_of(a)), True),
    "optimal-ice": (lambda args, a: bt.optimal_ice(_odds(args, _dist(args).shape[0], a), _dist(args), _risk_of(a)),
                    True),
    "numeric-optimal-ice": (lambda args, a: bt.numeric_optimal_ice(
        _odds(args, _dist(args).shape[0], a), _dist(args), _risk_of(a), seed=args.seed), True),
    "arimoto-mi-quantum": (lambda args, a: gm.arimoto_mi_quantum(_c_ensemble(args), _c_povm(args), a), True),
    "noisy-arimoto-mi": (lambda args, a: gm.noisy_arimoto_mi(_c_ensemble(args), _c_povm(args), _c_channel(args), a),
                         True),
    "max-noisy-arimoto-mi": (lambda args, a: gm.max_noisy_arimoto_mi(
        _c_ensemble(args), _c_channel(args) if args.channel else None, a, seed=args.seed), True),
    "qsb-value": (lambda args, a: gm.qsb_value(_game(args, a), _c_povm(args), a), True),
    "nqsb-value": (lambda args, a: gm.nqsb_value(_game(args, a), _c_povm(args), _c_channel(args), a), True),
    "qcb-value": (lambda args, a: gm.qcb_value(*_qcb(args, a), _c_povm(args), a), True),
    "discrimination-exclusion": (lambda args, a: gm.discrimination_exclusion(_c_ensemble(args), _c_povm(args)), False),
    "arimoto-gap": (_gap, True),
    "robustness": (lambda args, a: rs.robustness_report(_c_povm(args)), False),
    "weight": (lambda args, a: rs.weight_report(_c_povm(args)), False),
    "measured-sibson-div": (lambda args, a: rs.measured_sibson_div(_c_povm(args), _c_povm(args, "povm2"),
                                                                   _states(args), a), True),
    "informativeness": (lambda args, a: rs.informativeness_minimax(
        qc.born_cond_pmf(_c_povm(args), _states(args)), a, seed=args.seed), True),
    "alpha-measure": (lambda args, a: rs.alpha_measure_report(_c_povm(args), a, seed=args.seed), True),
}


def _split_value(result):
    """(value, witness) from the various return shapes."""
    if isinstance(result, rs.MonotoneReport):
        return result.value, result.achiever
    if isinstance(result, rs.Minimax):
        return result.min_max, {"max_min": result.max_min, "q": result.q, "p": result.p}
    if isinstance(result, bt.Decomposition):
        return result.total, {"term_c": result.term_c, "term_div1": result.term_div1, "term_div2": result.term_div2}
    if isinstance(result, tuple):
        if all(np.ndim(x) == 0 for x in result):
            return list(result), None
        return result[0], result[1]
    return result, None


def cmd_compute(args, cfg: RunConfig):
    if args.quantity not in QUANTITIES:
        raise InputError(f"unknown quantity {args.quantity!r}; choose from {', '.join(sorted(QUANTITIES))}")
    fn, ordered = QUANTITIES[args.quantity]
    orders = cfg.orders()
    if ordered and not orders:
        raise InputError(f"{args.quantity} needs --alpha or --risk")
    rows = []
    for a in orders or [None]:
        value, witness = _split_value(fn(args, a))
        row = {"quantity": args.quantity, "value": value}
        if a is not None:
            row["alpha"] = a
        if witness is not None:
            row["witness"] = witness
        rows.append(row)
    if cfg.fmt == "csv":
        return _csv(["quantity", "alpha", "value"],
                    [[r["quantity"], ser.to_jsonable(r.get("alpha", "")), json.dumps(ser.to_jsonable(r["value"]))]
                     for r in rows])
    return ser.dumps(rows[0] if len(rows) == 1 else rows)


# verify -----------------------------------------------------------------------------


def cmd_verify(args, cfg: RunConfig):
    if args.suite != "all" and args.suite not in SUITES:
        raise InputError(f"unknown suite {args.suite!r}; choose from all, {', '.join(SUITES)}")
    reports = run_suite(args.suite, seed=cfg.seed, trials=cfg.trials, tol=cfg.tol, alphas=cfg.orders() or None)
    ok = all(r.passed for r in reports)
    if cfg.fmt == "csv":
        rows = [[r.suite, name, s["checks"], s["failed"], repr(s["worst_error"])]
                for r in reports for name, s in r.summary().items()]
        text = _csv(["suite", "check", "checks", "failed", "worst_error"], rows)
    else:
        text = ser.dumps({"passed": ok, "reports": [r.to_json() for r in reports]})
    return text, (EXIT_OK if ok else EXIT_FAIL)


# sweep --------------------------------------------------------------------------------


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _fmt(x) -> str:
    return ser.to_jsonable(float(x)) if math.isinf(x) else repr(float(x))


def sweep_isoelastic(risks, w_min, w_max, points):
    """u_R(w) on an evenly spaced wealth grid, one column per R."""
    if w_min <= 0 < w_max or w_min >= w_max:
        raise InputError("the wealth grid needs w_min < w_max on one side of zero")
    ws = np.linspace(w_min, w_max, points)
    header = ["w"] + [f"u_R={_fmt(r)}" for r in risks]
    rows = [[_fmt(w)] + [_fmt(bt.isoelastic_utility(float(w), r)) for r in risks] for w in ws]
    return header, rows


def _alpha_grid(alphas, lo, hi, points):
    if alphas:
        return sorted(alphas)
    grid = np.linspace(lo, hi, points)
    return [float(a) for a in grid if a != 0.0]


def sweep_ice(seed, alphas, C):
    """Best QSB value with and without the measurement on the seeded instance."""
    e, m, _ = qc.random_instance(seed)
    header = ["alpha", "risk", "odds_sign", "ice_measured", "ice_prior", "log2_ratio", "arimoto_mi"]
    rows = []
    for a in alphas:
        g = gm.QsbGame.constant(a, e, C)
        top, bottom = gm.qsb_value(g, m, a), gm.no_side_information_value(g, a)
        rows.append([_fmt(a), _fmt(1.0 / a), pc.sgn(a), _fmt(top), _fmt(bottom),
                     _fmt(pc.sgn(a) * math.log2(top / bottom)), _fmt(gm.arimoto_mi_quantum(e, m, a))])
    return header, rows


def sweep_gap(seed, alphas):
    """Arimoto gap of the seeded measurement against three seeded free measurements."""
    e, m, _ = qc.random_instance(seed)
    rng = np.random.default_rng(seed)
    free = gm.FreeSet.measurements([qc.random_povm(rng, e.dim, 2) for _ in range(3)])
    header = ["alpha", "arimoto_mi", "best_free_mi", "gap"]
    rows = []
    for a in alphas:
        i_fixed = gm.arimoto_mi_quantum(e, m, a)
        gap = gm.arimoto_gap(gm.GapKind.MEASUREMENT, {"ensemble": e, "povm": m}, free, a)
        rows.append([_fmt(a), _fmt(i_fixed), _fmt(i_fixed - gap), _fmt(gap)])
    return header, rows


def cmd_sweep(args, cfg: RunConfig):
    if args.curve == "isoelastic-utility":
        risks = cfg.risks or ([1.0 / a if a else math.inf for a in cfg.alphas] if cfg.alphas else [-1.0, 0.0, 0.5, 1.0, 2.0])
        header, rows = sweep_isoelastic(risks, args.w_min, args.w_max, args.points)
    elif args.curve in ("ice-vs-alpha", "gap-vs-alpha"):
        alphas = _alpha_grid(cfg.orders(), args.alpha_min, args.alpha_max, args.points)
        if any(a == 0.0 for a in alphas):
            raise InputError("order 0 has no game")
        header, rows = sweep_ice(cfg.seed, alphas, args.C) if args.curve == "ice-vs-alpha" else sweep_gap(cfg.seed, alphas)
    else:
        raise InputError(f"unknown curve {args.curve!r}")
    if cfg.fmt == "json":
        return ser.dumps([dict(zip(header, r)) for r in rows])
    return _csv(header, rows)


# gen --------------------------------------------------------------------------------------


def cmd_gen(args, cfg: RunConfig):
    rng = np.random.default_rng(cfg.seed)
    d, n = args.dim, args.count
    if args.kind == "instance":
        e, m, ch = qc.random_instance(cfg.seed, d=d, counts=(n, n, 2))
        obj = {"ensemble": e, "povm": m, "channel": ch}
    elif args.kind == "povm":
        obj = qc.random_povm(rng, d, n)
    elif args.kind == "states":
        obj = np.array([qc.random_state(rng, d) for _ in range(n)])
    elif args.kind == "ensemble":
        obj = qc.random_ensemble(rng, d, n)
    elif args.kind == "channel":
        obj = qc.random_channel(rng, d, n)
    elif args.kind == "joint":
        obj = rng.dirichlet(np.ones(n * n)).reshape(n, n)
    elif args.kind == "cond":
        obj = rng.dirichlet(np.ones(n), size=n)
    else:
        raise InputError(f"unknown kind {args.kind!r}")
    return ser.dumps(obj)


# entry point ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--alpha", type=_number, action="append", default=[], help="order: number, inf or -inf (repeatable)")
    common.add_argument("--risk", type=_number, action="append", default=[], help="risk R = 1/alpha (repeatable)")
    common.add_argument("--seed", type=int, default=0, help="seed for every randomized step (default 0)")
    common.add_argument("--trials", type=int, default=None)
    common.add_argument("--tol", type=float, default=None)
    common.add_argument("--out", default=None, help="write to this file instead of stdout")
    common.add_argument("--format", dest="fmt", choices=("json", "csv"), default=None)

    p = argparse.ArgumentParser(prog="qbetting", description="Betting games, Rényi information measures and informativeness monotones.")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("compute", parents=[common], help="evaluate one quantity")
    c.add_argument("quantity", help="one of: " + ", ".join(sorted(QUANTITIES)))
    for name in ("pmf", "p", "q", "joint", "cond", "p-gx", "q-gx", "p-x", "povm", "povm2", "states", "state",
                 "ensemble", "channel", "channels", "post", "odds", "prior", "strategy", "free",
                 "free-measurements"):
        c.add_argument(f"--{name}", default=None, help="inline JSON or a path to a JSON file")
    c.add_argument("--variant", choices=("sibson", "csiszar", "blp"), default=None)
    c.add_argument("--kind", choices=[k.value for k in gm.GapKind], default=None)
    c.add_argument("--w", type=float, default=None, help="wealth")
    c.add_argument("--C", type=float, default=1.0, help="constant odds magnitude")

    v = sub.add_parser("verify", parents=[common], help="run a verification suite")
    v.add_argument("suite", help="all, " + ", ".join(SUITES))

    s = sub.add_parser("sweep", parents=[common], help="emit curve data")
    s.add_argument("curve", choices=("isoelastic-utility", "ice-vs-alpha", "gap-vs-alpha"))
    s.add_argument("--w-min", type=float, default=0.25)
    s.add_argument("--w-max", type=float, default=3.0)
    s.add_argument("--alpha-min", type=float, default=-10.0)
    s.add_argument("--alpha-max", type=float, default=10.0)
    s.add_argument("--points", type=int, default=45)
    s.add_argument("--C", type=float, default=1.0)

    g = sub.add_parser("gen", parents=[common], help="emit a random instance as JSON")
    g.add_argument("kind", choices=("instance", "povm", "states", "ensemble", "channel", "joint", "cond"))
    g.add_argument("--dim", type=int, default=2)
    g.add_argument("--count", type=int, default=3)
    return p


def _emit(text: str, out: str | None):
    if not text.endswith("\n"):
        text += "\n"
    if out:
        with open(out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _attach_orders(argv):
    """Glue ``--alpha -inf`` into ``--alpha=-inf`` so argparse does not read a flag."""
    out, it = [], iter(argv)
    for tok in it:
        if tok in ("--alpha", "--risk"):
            nxt = next(it, None)
            out.append(tok if nxt is None else f"{tok}={nxt}")
        else:
            out.append(tok)
    return out


def main(argv=None) -> int:
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = parser.parse_args(_attach_orders(argv))
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INPUT
    default_fmt = "csv" if args.command == "sweep" else "json"
    cfg = RunConfig(args.command, args.alpha, args.risk, args.seed, args.trials, args.tol, args.fmt or default_fmt,
                    args.out)
    code = EXIT_OK
    try:
        if args.command == "compute":
            text = cmd_compute(args, cfg)
        elif args.command == "verify":
            text, code = cmd_verify(args, cfg)
        elif args.command == "sweep":
            text = cmd_sweep(args, cfg)
        else:
            text = cmd_gen(args, cfg)
    except OptimizerDidNotConverge as exc:
        sys.stderr.write(f"error: {exc}\n")
        _emit(ser.dumps({"error": str(exc), "best": exc.best}), cfg.out)
        return EXIT_CONVERGENCE
    except (InputError, ValueError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_INPUT
    _emit(text, cfg.out)
    return code


def main_exit():
    sys.exit(main())


if __name__ == "__main__":
    main_exit()
