"""Command-line front end: every computation as a subcommand.

Results go to stdout as JSON (default) or CSV; logs go to stderr. Exit
status is 0 on success, 2 for invalid input and 1 when a computation fails.
"""

import argparse
import logging
import sys

import numpy as np

from . import __version__
from .algebra import Algebra, Element
from .channel import (
    Channel,
    channel_capacity,
    coding_experiment,
    is_lossless,
    is_useless,
    lossless_partition,
    mutual_information,
    push_state,
    zk_diagnostic,
)
from .config import configure, reset
from .errors import ComputationError, ValidationError
from .files import MarkovFile, load_model, report_meta, to_csv, to_json, write_text
from .information import (
    Code,
    kraft_check,
    noiseless_bound_check,
    shannon_entropy,
    typical_summary,
)
from .probability import (
    MarkovChain,
    binomial_cdf,
    cdf,
    cdf_at,
    cdf_strict_at,
    markov_path_probability,
    stationary_path_probability,
    waiting_time,
)
from .states import State, independence_defect, restrict, generated_partition
from .sweep import load_sweep, run_sweep
from .tensor import format_symbols, parse_symbols

logger = logging.getLogger(__name__)


# ===========================================================
#  Argument parsing helpers
# ===========================================================

def _floats(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ValidationError(f"Expected comma-separated numbers, got {text!r}") from None


def _ints(text):
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ValidationError(f"Expected comma-separated integers, got {text!r}") from None


def _state(args, text):
    return State.from_probs(_floats(text), renormalize=args.renormalize)


def _channel(args):
    if args.matrix:
        return Channel.from_file(args.matrix)
    if args.bsc is not None:
        return Channel.bsc(args.bsc)
    raise ValidationError("Give a channel with --matrix FILE or --bsc P")


def _input_state(args, channel):
    if args.input_probs:
        return _state(args, args.input_probs)
    return State.uniform(channel.input_algebra)


# ===========================================================
#  Subcommands; each returns (result, rows)
# ===========================================================

def cmd_entropy(args):
    omega = _state(args, args.probs)
    return {"entropy_bits": shannon_entropy(omega)}, None


def cmd_cdf(args):
    omega = _state(args, args.probs)
    x = Element(omega.algebra, _floats(args.values))
    distribution = cdf(omega, x)
    result = {"jump_points": list(distribution.jump_points), "masses": list(distribution.masses)}
    if args.t is not None:
        result["t"] = args.t
        result["cdf"] = cdf_at(omega, x, args.t)
        result["strict"] = cdf_strict_at(omega, x, args.t)
    return result, distribution.records()


def cmd_aep(args):
    omega = _state(args, args.probs)
    rows = [
        typical_summary(omega, n, args.eps, mode="lenient" if args.lenient else "strict", method=args.method)
        .model_dump()
        for n in _ints(args.n)
    ]
    result = dict(rows[0]) if len(rows) == 1 else {"summaries": rows}
    return result, rows


def cmd_binomial(args):
    return {"cdf": binomial_cdf(args.n, args.k, args.p)}, None


def cmd_waiting(args):
    omega = _state(args, args.probs) if args.probs else State.from_probs([1 - args.p, args.p])
    pattern = parse_symbols(args.pattern)
    return {"pattern": format_symbols(pattern), "t": args.t, "cdf": waiting_time(pattern, omega, args.t)}, None


def cmd_markov(args):
    chain_file = load_model(MarkovFile, args.file)
    matrices = chain_file.matrices()
    dim = len(matrices[0])
    if args.initial:
        initial = _state(args, args.initial)
    elif chain_file.initial is not None:
        initial = State(Algebra(dim), chain_file.initial, renormalize=args.renormalize)
    else:
        initial = State.uniform(Algebra(dim))
    chain = MarkovChain(tuple(matrices), initial)
    path = parse_symbols(args.path) if "," not in args.path else tuple(_ints(args.path))
    result = {"path": list(path), "path_probability": markov_path_probability(chain, path)}
    if chain.is_stationary:
        result["closed_form"] = stationary_path_probability(chain, path)
    return result, None


def cmd_kraft(args):
    check = kraft_check(_ints(args.lengths), args.base)
    return {"holds": check.holds, "slack": check.slack}, None


def cmd_code_check(args):
    code = Code.from_file(args.code)
    kraft = kraft_check(code.lengths, code.code_dim)
    result = {
        "prefix_free": code.is_prefix_free(),
        "lengths": code.lengths,
        "kraft_holds": kraft.holds,
        "kraft_slack": kraft.slack,
    }
    if args.probs:
        check = noiseless_bound_check(_state(args, args.probs), code)
        result.update(avg_len=check.avg_len, entropy_bound=check.entropy_bound, noiseless_holds=check.holds)
    return result, None


def cmd_code_encode(args):
    code = Code.from_file(args.code)
    symbols = _ints(args.symbols)
    return {"symbols": symbols, "encoded": format_symbols(code.encode(symbols))}, None


def cmd_code_decode(args):
    code = Code.from_file(args.code)
    return {"stream": args.stream, "decoded": list(code.decode(args.stream))}, None


def cmd_independence(args):
    dims = _ints(args.dims)
    omega = _state(args, args.probs)
    if int(np.prod(dims)) != omega.algebra.dim:
        raise ValidationError(f"Factor dimensions {dims} do not multiply to {omega.algebra.dim} weights")
    # the coordinate projections of each factor, lifted to the joint algebra
    grid = np.indices(dims).reshape(len(dims), -1)
    sets = [
        [Element(omega.algebra, (grid[f] == i).astype(float)) for i in range(d)]
        for f, d in enumerate(dims)
    ]
    defect = independence_defect(omega, *sets)
    marginals = [restrict(omega, generated_partition(s, omega.algebra)).tolist() for s in sets]
    return {"independent": defect <= 1e-9, "defect": defect, "marginals": marginals}, None


def cmd_channel_info(args):
    channel = _channel(args)
    omega = _input_state(args, channel)
    info = mutual_information(omega, channel)
    partition = lossless_partition(channel)
    result = {
        **info._asdict(),
        "output_probs": push_state(omega, channel).tolist(),
        "useless": is_useless(channel),
        "lossless": is_lossless(channel),
        "lossless_partition": [list(b) for b in partition] if partition is not None else None,
    }
    return result, None


def cmd_channel_capacity(args):
    channel = _channel(args)
    cap = channel_capacity(channel)
    return {"capacity": cap.capacity, "input_probs": cap.input_state.tolist(), "iterations": cap.iterations}, None


def _codebook(args):
    return [w.strip() for w in args.codebook.split(",")] if args.codebook else None


def cmd_channel_code_sim(args):
    channel = _channel(args)
    omega = _input_state(args, channel)
    run = coding_experiment(
        channel,
        omega,
        args.rate,
        _ints(args.k),
        trials=args.trials,
        policy=args.policy,
        seed=args.seed,
        codebook=_codebook(args),
        input_distribution=args.input_distribution,
        decoder_scale=args.decoder_scale,
        mode=args.mode,
        samples=args.samples,
    )
    summaries = [s.model_dump() for s in run.summaries]
    return {"summaries": summaries, "trials": [r.model_dump() for r in run.reports]}, summaries


def cmd_channel_zk(args):
    channel = _channel(args)
    omega = _input_state(args, channel)
    report = zk_diagnostic(
        channel,
        omega,
        args.rate,
        args.eps,
        args.k,
        codebook=_codebook(args),
        policy=args.policy,
        seed=args.seed,
        decoder_scale=args.decoder_scale,
    )
    return report.model_dump(), None


def cmd_sweep(args):
    config = load_sweep(args.config)
    if args.seed_given:
        config = config.model_copy(update={"seed": args.seed})
    report = run_sweep(config)
    return report, report["records"]


# ===========================================================
#  Parser
# ===========================================================

def _common():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=["json", "csv"], default=argparse.SUPPRESS, help="output format (default json)")
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="master seed (default 0)")
    common.add_argument("--budget", type=float, default=argparse.SUPPRESS, help="log2 of the largest dense enumeration")
    common.add_argument("--renormalize", action="store_true", default=argparse.SUPPRESS, help="divide probabilities by their sum")
    common.add_argument("-v", "--verbose", action="store_true", default=argparse.SUPPRESS, help="debug logging on stderr")
    return common


def _channel_arguments(parser):
    parser.add_argument("--matrix", help="channel file {\"rows\": [[P(y|x) ...] ...]}")
    parser.add_argument("--bsc", type=float, help="binary symmetric channel with this crossover probability")
    parser.add_argument("--input-probs", help="input distribution (default uniform)")


def _coding_arguments(parser):
    parser.add_argument("--rate", type=float, required=True)
    parser.add_argument("--policy", choices=["uniform", "lexicographic", "supplied"], default="uniform")
    parser.add_argument("--codebook", help="comma-separated codewords over the input alphabet")
    parser.add_argument("--decoder-scale", choices=["transition", "output"], default="transition")


def build_parser():
    common = _common()
    parser = argparse.ArgumentParser(
        prog="abelian-info",
        description="Probability and information theory over finite abelian algebras",
        parents=[common],
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("entropy", parents=[common], help="Shannon entropy of a source")
    p.add_argument("--probs", required=True)
    p.set_defaults(func=cmd_entropy)

    p = sub.add_parser("cdf", parents=[common], help="distribution function of an observable")
    p.add_argument("--probs", required=True)
    p.add_argument("--values", required=True, help="coefficients of the observable")
    p.add_argument("--t", type=float)
    p.set_defaults(func=cmd_cdf)

    p = sub.add_parser("aep", parents=[common], help="typical-set mass and size")
    p.add_argument("--probs", required=True)
    p.add_argument("--n", required=True, help="block length(s), comma-separated")
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--lenient", action="store_true", help="drop zero-probability symbols")
    p.add_argument("--method", choices=["type-class", "enumerate"], default="type-class")
    p.set_defaults(func=cmd_aep)

    p = sub.add_parser("binomial", parents=[common], help="P(at most k successes in n trials)")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--p", type=float, required=True)
    p.set_defaults(func=cmd_binomial)

    p = sub.add_parser("waiting", parents=[common], help="waiting time until a pattern appears")
    p.add_argument("--pattern", required=True)
    p.add_argument("--p", type=float, default=0.5, help="probability of symbol 1 for binary trials")
    p.add_argument("--probs", help="per-trial distribution (overrides --p)")
    p.add_argument("--t", type=float, required=True)
    p.set_defaults(func=cmd_waiting)

    p = sub.add_parser("markov", parents=[common], help="path probability of a Markov chain")
    p.add_argument("--file", required=True, help="{\"rows\": ...} or {\"maps\": [...]}, columns are images")
    p.add_argument("--path", required=True)
    p.add_argument("--initial", help="final-state distribution omega (default: file or uniform)")
    p.set_defaults(func=cmd_markov)

    p = sub.add_parser("kraft", parents=[common], help="Kraft inequality in exact integers")
    p.add_argument("--lengths", required=True)
    p.add_argument("--base", type=int, default=2)
    p.set_defaults(func=cmd_kraft)

    code = sub.add_parser("code", help="prefix-free codes")
    code_sub = code.add_subparsers(dest="action", required=True)
    p = code_sub.add_parser("check", parents=[common])
    p.add_argument("--code", required=True)
    p.add_argument("--probs", help="source distribution for the noiseless bound")
    p.set_defaults(func=cmd_code_check)
    p = code_sub.add_parser("encode", parents=[common])
    p.add_argument("--code", required=True)
    p.add_argument("--symbols", required=True)
    p.set_defaults(func=cmd_code_encode)
    p = code_sub.add_parser("decode", parents=[common])
    p.add_argument("--code", required=True)
    p.add_argument("--stream", required=True)
    p.set_defaults(func=cmd_code_decode)

    p = sub.add_parser("independence", parents=[common], help="independence of the factors of a joint state")
    p.add_argument("--probs", required=True, help="joint weights, lexicographic")
    p.add_argument("--dims", required=True)
    p.set_defaults(func=cmd_independence)

    channel = sub.add_parser("channel", help="discrete memoryless channels")
    channel_sub = channel.add_subparsers(dest="action", required=True)
    p = channel_sub.add_parser("info", parents=[common])
    _channel_arguments(p)
    p.set_defaults(func=cmd_channel_info)
    p = channel_sub.add_parser("capacity", parents=[common])
    _channel_arguments(p)
    p.set_defaults(func=cmd_channel_capacity)
    p = channel_sub.add_parser("code-sim", parents=[common])
    _channel_arguments(p)
    _coding_arguments(p)
    p.add_argument("--k", required=True, help="block length(s), comma-separated")
    p.add_argument("--trials", type=int, default=1)
    p.add_argument("--input-distribution", choices=["uniform", "state"], default="uniform")
    p.add_argument("--mode", choices=["exact", "monte-carlo"], default="exact")
    p.add_argument("--samples", type=int, default=1000)
    p.set_defaults(func=cmd_channel_code_sim)
    p = channel_sub.add_parser("zk", parents=[common])
    _channel_arguments(p)
    _coding_arguments(p)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--eps", type=float, required=True)
    p.set_defaults(func=cmd_channel_zk)

    p = sub.add_parser("sweep", parents=[common], help="run a YAML parameter grid")
    p.add_argument("--config", required=True)
    p.add_argument("--output", help="write the report here instead of stdout")
    p.set_defaults(func=cmd_sweep)
    return parser


def _resolve(args):
    args.seed_given = hasattr(args, "seed")
    for name, default in (("format", "json"), ("seed", 0), ("budget", None), ("renormalize", False), ("verbose", False)):
        if not hasattr(args, name):
            setattr(args, name, default)
    return args


def _render(command, args, result, rows):
    if args.format == "csv":
        return to_csv(rows if rows is not None else [result])
    if "meta" not in result:
        result = {**result, "meta": report_meta(command, args.seed)}
    return to_json(result)


def run(argv=None, stdout=None):
    """Parse `argv`, run the subcommand and print the report; returns the exit status."""
    stdout = stdout or sys.stdout
    parser = build_parser()
    try:
        args = _resolve(parser.parse_args(argv))
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else 2

    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        stream=sys.stderr,
        format="%(levelname)s %(name)s: %(message)s",
        force=True,
    )
    command = " ".join(filter(None, [args.command, getattr(args, "action", None)]))
    try:
        if args.budget is not None:
            configure(budget_log2=args.budget)
        result, rows = args.func(args)
        text = _render(command, args, result, rows)
        if getattr(args, "output", None):
            write_text(args.output, text)
        else:
            stdout.write(text)
    except ValidationError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except ComputationError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    finally:
        if args.budget is not None:
            reset()
    return 0
