"""Command-line entry point ``ising-rc``.

Exit codes: 0 success, 1 a check failed, 2 usage or invalid input,
3 malformed graph, 4 enumeration cap exceeded, 5 I/O failure.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import analytic2d as a2
from . import exact as ex
from . import samplers as sm
from .errors import CapExceededError, GraphFormatError, IsingError
from .graph import WeightedGraph, from_generator, load_graph
from .report import emit_table, output_dir, run_suite
from .suites import SUITES, SuiteConfig, question2_rows, torus_sweep_rows

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_GRAPH, EXIT_CAP, EXIT_IO = range(6)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _sites(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(v) for v in text.replace(" ", "").split(",") if v)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated site indices, got {text!r}") from exc


def _grid(text: str) -> list[float]:
    try:
        start, stop, step = (float(v) for v in text.split(":"))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected start:stop:step, got {text!r}") from exc
    if step <= 0 or stop < start:
        raise argparse.ArgumentTypeError("need step > 0 and stop >= start")
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    return [round(start + k * step, 12) for k in range(count)]


def _graph_options(p: argparse.ArgumentParser, multi: bool) -> None:
    src = p.add_mutually_exclusive_group()
    src.add_argument("--graph", type=Path, help="JSON graph file")
    src.add_argument("--generator", help="path:N, cycle:N, complete:N, grid:WxH or torus:WxH")
    p.add_argument("--ghost", action="store_true", help="add a ghost vertex even at zero field")
    nargs = "+" if multi else None
    p.add_argument("--beta", type=float, nargs=nargs, help="inverse temperature" + (" grid" if multi else ""))
    p.add_argument("--h", type=float, nargs=nargs, help="field" + (" grid" if multi else ""))
    p.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ising-rc", description="Exact expansions and Monte Carlo for random currents in the Ising model.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    v = sub.add_parser("verify", help="run a verification suite and write a JSON report")
    v.add_argument("suite", choices=SUITES)
    _graph_options(v, multi=True)
    v.add_argument("--trials", "--seeds", dest="trials", type=int, help="instances or random parameter draws")
    v.add_argument("--tolerance", type=float, help="override the suite tolerance")
    v.add_argument("--out", type=Path, help="report path (default: $ISING_RC_OUTPUT_DIR/<suite>.json)")
    v.add_argument("--table", type=Path, help="question2 only: also write the scan as CSV")

    c = sub.add_parser("compute", help="exact quantities on a small graph")
    c.add_argument("quantity", choices=("corr", "z", "phi-s"))
    _graph_options(c, multi=False)
    c.add_argument("--sites", type=_sites, default=(), help="sites of A, e.g. 0,3")
    c.add_argument("--method", choices=("spin", "current", "ht", "fk"), default="spin")
    c.add_argument("--S", type=_sites, help="phi-s: the set S")
    c.add_argument("--x0", type=int, help="phi-s: the root")

    s = sub.add_parser("sample", help="run a Markov chain and write per-batch means")
    _graph_options(s, multi=False)
    s.add_argument("--law", choices=("spin", "current", "ht"), default="spin")
    s.add_argument("--sources", type=_sites, default=(), help="sources of the current or edge-set chain")
    s.add_argument("--sites", type=_sites, help="spin law: observable is the product of these spins")
    s.add_argument("--steps", type=int, default=100_000, help="recorded samples")
    s.add_argument("--burn-in", type=int, default=sm.BURN_IN)
    s.add_argument("--thin", type=int, default=1)
    s.add_argument("--batches", type=int, default=sm.N_BATCHES)
    s.add_argument("--out", type=Path, help="CSV of batch means")

    o = sub.add_parser("onsager", help="square-lattice free energy and magnetization")
    og = o.add_mutually_exclusive_group(required=True)
    og.add_argument("--beta", type=float)
    og.add_argument("--beta-grid", type=_grid, help="start:stop:step, stop included")
    o.add_argument("--resolution", type=int, default=512)
    o.add_argument("--width", type=int, nargs="*", default=[4, 6, 8, 10], help="strip widths to compare")
    o.add_argument("--out", type=Path, help="CSV table of free energies and magnetizations")

    w = sub.add_parser("sweep", help="torus two-point function over a beta grid, Monte Carlo and transfer matrix")
    w.add_argument("--size", type=int, default=8)
    w.add_argument("--beta", type=float, nargs="+", default=[0.2, 0.3, 0.35])
    w.add_argument("--sweeps", type=int, default=20_000)
    w.add_argument("--seed", type=int, default=0)
    w.add_argument("--out", type=Path, required=True)
    return parser


def load_source(args) -> WeightedGraph | None:
    beta = args.beta[0] if isinstance(args.beta, list) else args.beta
    h = args.h[0] if isinstance(args.h, list) else args.h
    if args.graph is not None:
        try:
            g = load_graph(args.graph)
        except OSError as exc:
            raise GraphFormatError(f"cannot read {args.graph}: {exc}") from exc
    elif args.generator is not None:
        g = from_generator(args.generator)
    else:
        return None
    if beta is not None:
        g = g.with_beta(beta)
    if h is not None:
        g = g.with_field(h)
    if args.ghost and not g.has_ghost:
        g = WeightedGraph(g.n_vertices, g.couplings, beta=g.beta, h=g.h, has_ghost=True)
    return g


def _require(g):
    if g is None:
        raise IsingError("give --graph or --generator")
    return g


def cmd_verify(args) -> int:
    g = load_source(args)
    cfg = SuiteConfig(
        args.suite,
        graph=g,
        betas=tuple(args.beta or ()),
        hs=tuple(args.h or ()),
        seed=args.seed,
        trials=args.trials,
        tolerance=args.tolerance,
    )
    report = run_suite(cfg)
    if args.suite == "question2" and args.table:
        rows = [{"beta": r["beta"], "h": r["h"], "observable": f"P[{r['A']} <-> {r['B']}] on {r['graph']}", "value": r["value"], "stderr": 0.0, "method": "exact"} for r in question2_rows(cfg)]
        emit_table(rows, args.table)
    path = report.write(args.out or output_dir() / f"{args.suite}.json")
    summary = report.summary()
    print(f"{args.suite}: {'PASS' if summary['pass'] else 'FAIL'} ({summary['records'] - summary['failed']}/{summary['records']} records) -> {path}")
    for r in report.records:
        if not r.passed:
            print(f"  FAIL {r.identity} [{r.instance}] lhs={r.lhs!r} rhs={r.rhs!r} gap={r.gap:.3e} tol={r.tolerance:g}")
    return EXIT_OK if summary["pass"] else EXIT_FAIL


def cmd_compute(args) -> int:
    g = _require(load_source(args))
    if args.quantity == "corr":
        fn = {"spin": ex.corr_spin, "current": ex.current_corr, "ht": ex.ht_corr, "fk": ex.fk_corr}[args.method]
        value = fn(g, args.sites)
    elif args.quantity == "z":
        fn = {"spin": ex.z_spin, "current": ex.current_sum, "ht": ex.ht_sum, "fk": ex.fk_sum}[args.method]
        value = fn(g, args.sites)
    else:
        if args.S is None or args.x0 is None:
            raise IsingError("phi-s needs --S and --x0")
        value = ex.phi_S(g, args.S, args.x0)
    print(json.dumps({"quantity": args.quantity, "method": args.method, "sites": list(args.sites), "value": value}))
    return EXIT_OK


def cmd_sample(args) -> int:
    g = _require(load_source(args))
    spec = sm.ChainSpec(args.law, sources=tuple(args.sources), samples=args.steps, burn_in=args.burn_in, thin=args.thin, n_batches=args.batches, seed=args.seed)
    if args.law == "spin":
        sites = list(args.sites if args.sites is not None else args.sources)
        observable, name = (lambda s: float(np.prod(s[sites]))), f"<s_{{{','.join(map(str, sites))}}}>"
    elif args.law == "current":
        observable, name = (lambda n: float(np.count_nonzero(n))), "trace size"
    else:
        observable, name = (lambda E: float(bin(E).count("1"))), "edge set size"
    values = sm.run_chain(g, spec, record=lambda c: observable(c.state()))
    mean, se = sm.batch_means(values, args.batches)
    print(json.dumps({"law": args.law, "observable": name, "mean": mean, "stderr": se, "samples": len(values), "burn_in": args.burn_in}))
    if args.out:
        size = len(values) // args.batches
        means = np.asarray(values[: size * args.batches]).reshape(args.batches, size).mean(axis=1)
        args.out.parent.mkdir(parents=True, exist_ok=True)
        with args.out.open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(("batch", "observable", "mean"))
            writer.writerows((i, name, repr(float(m))) for i, m in enumerate(means))
    return EXIT_OK


def onsager_rows(betas, resolution: int, widths) -> list[dict]:
    rows = []
    for beta in betas:
        row = lambda obs, value, method: {"beta": beta, "h": 0.0, "observable": obs, "value": value, "stderr": 0.0, "method": method}
        if abs(beta - a2.BETA_C) >= 1e-6:
            rows.append(row("beta_f", a2.onsager_free_energy(beta, resolution), "quadrature"))
        else:
            logging.getLogger(__name__).warning("skipping quadrature at beta=%g, too close to beta_c", beta)
        rows.append(row("m_star", a2.onsager_magnetization(beta), "formula"))
        rows += [row(f"beta_f strip W={W}", a2.strip_free_energy(a2.StripSpec(W, beta)), "transfer") for W in widths]
    return rows


def cmd_onsager(args) -> int:
    betas = [args.beta] if args.beta is not None else args.beta_grid
    rows = onsager_rows(betas, args.resolution, args.width)
    if args.out:
        emit_table(rows, args.out)
        print(f"wrote {len(rows)} rows -> {args.out}")
    else:
        print(json.dumps({"beta_c": a2.BETA_C, "rows": rows}, indent=2))
    return EXIT_OK


def cmd_sweep(args) -> int:
    rows = torus_sweep_rows(args.size, args.beta, sweeps=args.sweeps, seed=args.seed)
    emit_table(rows, args.out)
    print(f"wrote {len(rows)} rows -> {args.out}")
    return EXIT_OK


COMMANDS = {"verify": cmd_verify, "compute": cmd_compute, "sample": cmd_sample, "onsager": cmd_onsager, "sweep": cmd_sweep}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except GraphFormatError as exc:
        print(f"ising-rc: malformed graph: {exc}", file=sys.stderr)
        return EXIT_GRAPH
    except CapExceededError as exc:
        print(f"ising-rc: {exc}", file=sys.stderr)
        return EXIT_CAP
    except IsingError as exc:
        print(f"ising-rc: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"ising-rc: invalid input: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"ising-rc: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
