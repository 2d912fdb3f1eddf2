"""Batch command line surface.

Five subcommands tie the library together: ``summary`` renders observed
statistics, ``fit`` estimates coefficients, ``simulate`` draws networks
and emits their statistics, ``enumerate`` tabulates the exact statistic
distribution, and ``predict`` prints dyadwise tie probabilities.

Every command is a pure function of its inputs and the seed: re-running
produces byte-identical output. Exit codes: 0 success, 2 parse error,
3 estimation diagnostic, 4 unsupported feature.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from pathlib import Path

import numpy as np

from .datasets import load_dataset
from .enumeration import allstats
from .errors import (
    ErgmkitError,
    EstimationError,
    UnsupportedFeatureError,
)
from .infer import fit, predict_probs
from .model import build_model, summary_stats
from .modelspec import parse_constraints
from .network import load_network, network_to_json
from .sampler import ChainConfig, sample
from .samplespace import build_sample_space

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_ESTIMATION = 3
EXIT_UNSUPPORTED = 4


# -- input plumbing ----------------------------------------------------------


def _resolve_network(spec: str):
    """A path to a network JSON file, or the name of a bundled dataset."""
    p = Path(spec)
    if p.exists():
        return load_network(p)
    if "/" not in spec and not spec.endswith(".json"):
        return load_dataset(spec)
    return load_network(p)  # raise the file error with the real path


def _resolve_model(text: str) -> str:
    if text.startswith("@"):
        return Path(text[1:]).read_text(encoding="utf-8")
    return text


def _parse_vector(text: str, flag: str) -> np.ndarray:
    try:
        return np.array([float(x) for x in text.split(",") if x.strip() != ""])
    except ValueError as exc:
        raise ErgmkitError(f"{flag} expects comma-separated numbers: {exc}") from None


def _parse_options(pairs) -> dict | None:
    if not pairs:
        return None
    out = {}
    for pair in pairs:
        key, sep, val = pair.partition("=")
        if not sep:
            raise ErgmkitError(f"--option expects key=value, got {pair!r}")
        try:
            out[key] = int(val)
        except ValueError:
            out[key] = val
    return out


def _chain_config(args) -> ChainConfig:
    cfg = ChainConfig()
    if args.seed is not None:
        cfg.seed = args.seed
    if args.burnin is not None:
        cfg.burnin = args.burnin
    if args.interval is not None:
        cfg.interval = args.interval
    if args.samplesize is not None:
        cfg.samplesize = args.samplesize
    return cfg


# -- output rendering --------------------------------------------------------


def _fmt(v: float) -> str:
    """Exact integers print without decimals; reals keep six places."""
    v = float(v)
    if math.isfinite(v) and abs(v - round(v)) < 1e-9 and abs(v) < 1e15:
        return str(int(round(v)))
    return f"{v:.6f}"


def _emit_table(names, values, out) -> None:
    width = max((len(n) for n in names), default=0)
    for n, v in zip(names, values):
        out.write(f"{n.ljust(width)}  {_fmt(v)}\n")


def _emit_csv(header, rows, out) -> None:
    w = csv.writer(out, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])


# -- subcommands -------------------------------------------------------------


def cmd_summary(args, out) -> int:
    net = _resolve_network(args.network)
    names, vals = summary_stats(net, _resolve_model(args.model),
                                response=args.response,
                                options=_parse_options(args.option))
    fmt = args.output or "table"
    if fmt == "json":
        json.dump({n: float(v) for n, v in zip(names, vals)}, out, indent=2)
        out.write("\n")
    elif fmt == "csv":
        _emit_csv(names, [vals], out)
    else:
        _emit_table(names, vals, out)
    return EXIT_OK


def cmd_fit(args, out) -> int:
    net = _resolve_network(args.network)
    target = None
    if args.target_stats is not None:
        target = _parse_vector(args.target_stats, "--target-stats")
    fr = fit(net, _resolve_model(args.model),
             response=args.response, reference=args.reference,
             constraints=args.constraints, obs_constraints=args.obs_constraints,
             target_stats=target, config=_chain_config(args),
             chains=args.chains, force=args.force,
             options=_parse_options(args.option))
    fmt = args.output or "table"
    if fmt == "json":
        json.dump(fr.to_json(), out, indent=2)
        out.write("\n")
    elif fmt == "csv":
        header = ["coef", "estimate", "se", "mcmc_se"]
        rows = zip(fr.param_names, fr.theta_hat, fr.se, fr.mcmc_se)
        w = csv.writer(out, lineterminator="\n")
        w.writerow(header)
        for name, est, se, mse in rows:
            w.writerow([name, f"{est:.10g}", f"{se:.10g}", f"{mse:.10g}"])
    else:
        out.write(fr.summary_text())
        out.write("\n")
    return EXIT_OK


def cmd_simulate(args, out) -> int:
    net = _resolve_network(args.network)
    if args.coef is None:
        raise ErgmkitError("simulate needs --coef (comma-separated coefficients)")
    theta = _parse_vector(args.coef, "--coef")
    model = build_model(net, _resolve_model(args.model),
                        response=args.response, reference=args.reference,
                        options=_parse_options(args.option))
    space = build_sample_space(model.net,
                               parse_constraints(args.constraints),
                               parse_constraints(args.obs_constraints))
    res = sample(model, theta, universe=space, reference=args.reference,
                 config=_chain_config(args), chains=args.chains, net0=model.net)
    if args.networks_out:
        with open(args.networks_out, "w", encoding="utf-8") as fh:
            json.dump(network_to_json(res.final_net), fh)
            fh.write("\n")
    fmt = args.output or "csv"
    if fmt == "json":
        json.dump({"names": model.stat_names,
                   "stats": res.stats.tolist(),
                   "acceptance_rate": res.acceptance_rate}, out, indent=2)
        out.write("\n")
    elif fmt == "table":
        mean = res.stats.mean(axis=0)
        _emit_table(model.stat_names, mean, out)
    else:
        _emit_csv(model.stat_names, res.stats, out)
    return EXIT_OK


def cmd_enumerate(args, out) -> int:
    net = _resolve_network(args.network)
    model = build_model(net, _resolve_model(args.model),
                        response=args.response, reference=args.reference,
                        options=_parse_options(args.option))
    space = build_sample_space(model.net,
                               parse_constraints(args.constraints),
                               parse_constraints(args.obs_constraints))
    table = allstats(model, universe=space, reference=args.reference,
                     force=args.force)
    fmt = args.output or "csv"
    if fmt == "json":
        json.dump({"names": table.stat_names,
                   "stats": table.stats.tolist(),
                   "weights": table.weights.tolist(),
                   "total_networks": table.total_networks}, out, indent=2)
        out.write("\n")
    else:
        header = list(table.stat_names) + ["weight"]
        rows = np.column_stack([table.stats, table.weights])
        _emit_csv(header, rows, out)
    return EXIT_OK


def cmd_predict(args, out) -> int:
    net = _resolve_network(args.network)
    if args.coef is None:
        raise ErgmkitError("predict needs --coef (comma-separated coefficients)")
    theta = _parse_vector(args.coef, "--coef")
    model = build_model(net, _resolve_model(args.model),
                        response=args.response, reference=args.reference,
                        options=_parse_options(args.option))
    space = build_sample_space(model.net,
                               parse_constraints(args.constraints),
                               parse_constraints(args.obs_constraints))
    P = predict_probs(theta, model, universe=space, reference=args.reference,
                      conditional=not args.unconditional, nsim=args.nsim,
                      config=_chain_config(args))
    fmt = args.output or "csv"
    if fmt == "json":
        json.dump(P.tolist(), out)
        out.write("\n")
    else:
        w = csv.writer(out, lineterminator="\n")
        for row in P:
            w.writerow([f"{v:.10g}" for v in row])
    return EXIT_OK


# -- argument parsing --------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--network", required=True,
                        help="network JSON path or bundled dataset name")
    common.add_argument("--model", required=True,
                        help="model formula, or @FILE to read it from a file")
    common.add_argument("--response",
                        help="edge value name or comparison for valued models")
    common.add_argument("--reference", default="Bernoulli",
                        help="reference measure, e.g. Poisson or DiscUnif(0,3)")
    common.add_argument("--constraints", help="sample space constraint formula")
    common.add_argument("--obs-constraints", dest="obs_constraints",
                        help="observation process constraint formula")
    common.add_argument("--seed", type=int)
    common.add_argument("--burnin", type=int)
    common.add_argument("--interval", type=int)
    common.add_argument("--samplesize", type=int)
    common.add_argument("--chains", type=int, default=1)
    common.add_argument("--force", action="store_true",
                        help="override safety guards (state space size)")
    common.add_argument("--output", choices=["json", "table", "csv"])
    common.add_argument("--option", action="append", metavar="KEY=VALUE",
                        help="term option, e.g. interact.dependent=message")

    ap = argparse.ArgumentParser(
        prog="ergmkit",
        description="Specify, simulate, and estimate exponential-family "
                    "random graph models.")
    sub = ap.add_subparsers(dest="command", required=True)

    sub.add_parser("summary", parents=[common],
                   help="observed model statistics")

    fp = sub.add_parser("fit", parents=[common], help="estimate coefficients")
    fp.add_argument("--target-stats", dest="target_stats",
                    help="comma-separated statistics to fit instead of the "
                         "observed network's")

    sp = sub.add_parser("simulate", parents=[common],
                        help="draw networks, emit statistics as CSV")
    sp.add_argument("--coef", help="comma-separated coefficient vector")
    sp.add_argument("--networks-out", dest="networks_out",
                    help="also write the final sampled network as JSON here")

    sub.add_parser("enumerate", parents=[common],
                   help="exact statistic table over the sample space")

    pp = sub.add_parser("predict", parents=[common],
                        help="dyadwise tie probability matrix")
    pp.add_argument("--coef", help="comma-separated coefficient vector")
    pp.add_argument("--unconditional", action="store_true",
                    help="simulate instead of conditioning on the rest of "
                         "the observed network")
    pp.add_argument("--nsim", type=int, default=100,
                    help="retained draws for unconditional prediction")

    return ap


_DISPATCH = {
    "summary": cmd_summary,
    "fit": cmd_fit,
    "simulate": cmd_simulate,
    "enumerate": cmd_enumerate,
    "predict": cmd_predict,
}


def run(argv=None, out=None) -> int:
    out = out or sys.stdout
    ap = _build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on bad flags, which matches the parse-error code
        return int(exc.code or 0)
    try:
        return _DISPATCH[args.command](args, out)
    except UnsupportedFeatureError as exc:
        print(f"ergmkit: unsupported: {exc}", file=sys.stderr)
        return EXIT_UNSUPPORTED
    except EstimationError as exc:
        print(f"ergmkit: estimation: {exc}", file=sys.stderr)
        return EXIT_ESTIMATION
    except (ErgmkitError, OSError, json.JSONDecodeError) as exc:
        print(f"ergmkit: {exc}", file=sys.stderr)
        return EXIT_PARSE


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
