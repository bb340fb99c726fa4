"""
Command line interface.

Exit codes are 0 on success, 1 when a numerical procedure didn't converge
(results are still written and flagged) and 2 when an input is invalid.
"""

import argparse
import logging
import os
import sys

from tippo import Callable, Dict, List, Optional, Sequence

from qdetco import config
from qdetco.analysis import flag_crosstalk, format_table, individual_vs_parallel
from qdetco.detector_model import (
    DetectorPovm,
    check_povm,
    ideal_computational_povm,
    reduce_detector,
)
from qdetco.detector_simulator import (
    NoisySpec,
    make_noisy_detector,
    simulate_parallel_experiment,
    simulate_qdt_experiment,
)
from qdetco.mitigation import (
    ResponseMatrix,
    build_response_matrix_crosstalk,
    mitigate_inversion,
    mitigate_lsq,
)
from qdetco.reference_devices import device_names, device_povm
from qdetco.reporting import json_report, svg_report, text_report
from qdetco.serialization import (
    RESPONSE_SCHEMA,
    bootstrap_from_json,
    bootstrap_to_json,
    counts_from_json,
    counts_to_json,
    diagnostics_to_json,
    distribution_from_json,
    distribution_to_json,
    dumps,
    povm_from_json,
    povm_to_json,
    read_json,
    response_from_json,
    response_to_json,
    table_to_json,
    write_json,
)
from qdetco.tomography_engine import MleConfig, bootstrap, run_mle
from qdetco.validation import (
    IdentityReductionError,
    NumericalError,
    ValidationError,
)

__all__ = ["EXIT_OK", "EXIT_NOT_CONVERGED", "EXIT_INVALID", "build_parser", "main"]

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_NOT_CONVERGED = 1
EXIT_INVALID = 2

_LOG_FORMAT = "%(asctime)s [%(levelname)s] %(message)s"
_LOG_LEVELS = (logging.WARNING, logging.INFO, logging.DEBUG)


def _emit(path, text):
    # type: (Optional[str], str) -> None
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(text)
    logger.info("wrote %s", path)


def _distinct_paths(inputs, outputs):
    # type: (Sequence[Optional[str]], Sequence[Optional[str]]) -> None
    """
    Check that no output file is named twice or also read as an input.

    :param inputs: Input paths (None entries are ignored).
    :param outputs: Output paths (None and "-" entries are ignored).
    :raise ValidationError: Two paths resolve to the same file.
    """
    seen = {}  # type: Dict[str, str]
    for path in inputs:
        if path is not None:
            seen.setdefault(os.path.realpath(path), "input")
    for path in outputs:
        if path is None or path == "-":
            continue
        key = os.path.realpath(path)
        if key in seen:
            error = "output path {!r} is already used as an {}".format(path, seen[key])
            raise ValidationError(error)
        seen[key] = "output"


def _int_list(text):
    # type: (str) -> List[int]
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError("expected comma-separated integers")


def _noise_spec(text):
    # type: (str) -> NoisySpec
    try:
        values = [float(t) for t in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError("expected p01,p10[,tilt_x,tilt_y]")
    if len(values) not in (2, 4):
        raise argparse.ArgumentTypeError("expected p01,p10[,tilt_x,tilt_y]")
    try:
        return NoisySpec(*values)
    except ValidationError as e:
        raise argparse.ArgumentTypeError(str(e))


def _mle_config(args):
    # type: (argparse.Namespace) -> MleConfig
    return MleConfig(epsilon=args.epsilon, max_iterations=args.max_iters)


def _detector(args):
    # type: (argparse.Namespace) -> DetectorPovm
    if args.povm is not None:
        return povm_from_json(read_json(args.povm))
    if args.preset is not None:
        qubits = range(args.qubits) if args.qubits is not None else None
        return device_povm(args.preset, qubits)
    if args.noise:
        specs = list(args.noise)
        if len(specs) == 1 and args.qubits is not None:
            specs = specs * args.qubits
        elif args.qubits is not None and len(specs) != args.qubits:
            error = "got noise for {} qubits, --qubits is {}".format(
                len(specs), args.qubits
            )
            raise ValidationError(error)
        return make_noisy_detector(specs)
    if args.qubits is None:
        raise ValidationError("--ideal needs --qubits")
    return ideal_computational_povm(args.qubits)


def cmd_simulate(args):
    # type: (argparse.Namespace) -> int
    _distinct_paths([args.povm], [args.out])
    p = _detector(args)
    if args.povm is not None:
        source = "povm:{}".format(args.povm)
    elif args.preset is not None:
        source = "preset:{}".format(args.preset)
    elif args.noise:
        source = "noise"
    else:
        source = "ideal"
    metadata = {"detector": source, "protocol": args.protocol}
    if args.protocol == "parallel":
        dataset = simulate_parallel_experiment(
            p, args.shots, args.runs, args.seed, metadata
        )
    else:
        dataset = simulate_qdt_experiment(
            p, args.shots, args.runs, args.seed, metadata, args.allow_large
        )
    write_json(args.out, counts_to_json(dataset))
    return EXIT_OK


def cmd_tomo(args):
    # type: (argparse.Namespace) -> int
    _distinct_paths([args.counts], [args.out_povm, args.out_diag])
    dataset = counts_from_json(read_json(args.counts))
    result = run_mle(dataset, _mle_config(args))
    write_json(args.out_povm, povm_to_json(result.povm))
    if args.out_diag is not None:
        write_json(args.out_diag, diagnostics_to_json(result))
    return EXIT_OK if result.converged else EXIT_NOT_CONVERGED


def cmd_reduce(args):
    # type: (argparse.Namespace) -> int
    _distinct_paths([args.povm], [args.out])
    p = povm_from_json(read_json(args.povm))
    try:
        reduced = reduce_detector(p, args.keep)
    except IdentityReductionError as e:
        logger.warning("%s, writing the detector unchanged", e)
        reduced = e.povm
    write_json(args.out, povm_to_json(reduced))
    return EXIT_OK


def _per_qubit(p):
    # type: (DetectorPovm) -> Dict[int, DetectorPovm]
    if p.num_qubits == 1:
        return {0: p}
    return {q: reduce_detector(p, [q]) for q in range(p.num_qubits)}


def cmd_compare(args):
    # type: (argparse.Namespace) -> int
    _distinct_paths([args.a, args.b], [args.out])
    a = povm_from_json(read_json(args.a))
    b = povm_from_json(read_json(args.b))
    if a.num_qubits != b.num_qubits:
        error = "detectors act on {} and {} qubits".format(a.num_qubits, b.num_qubits)
        raise ValidationError(error)
    table = individual_vs_parallel(_per_qubit(a), _per_qubit(b), args.floor)
    if args.out is not None:
        write_json(args.out, table_to_json(table))
    lines = [format_table(table)]
    for flag in flag_crosstalk(table, args.multiplier):
        if flag.flagged:
            lines.append(
                "qubit {} flagged: {:.4f} > {:.4f}\n".format(
                    flag.qubit_pair[0], flag.distance, flag.threshold
                )
            )
    _emit(None, "".join(lines))
    return EXIT_OK


def _response_matrix(path):
    # type: (str) -> ResponseMatrix
    document = read_json(path)
    if document.get("schema") == RESPONSE_SCHEMA:
        return response_from_json(document)
    return build_response_matrix_crosstalk(povm_from_json(document))


def cmd_mitigate(args):
    # type: (argparse.Namespace) -> int
    _distinct_paths([args.matrix_from, args.dist], [args.out, args.out_matrix])
    m = _response_matrix(args.matrix_from)
    if args.out_matrix is not None:
        write_json(args.out_matrix, response_to_json(m))
    observed = distribution_from_json(read_json(args.dist))
    if args.method == "inversion":
        result = mitigate_inversion(m, observed)
    else:
        result = mitigate_lsq(m, observed, args.tol, args.max_iters)
    write_json(args.out, distribution_to_json(result.corrected, result))
    return EXIT_OK if result.converged else EXIT_NOT_CONVERGED


def cmd_bootstrap(args):
    # type: (argparse.Namespace) -> int
    _distinct_paths([args.counts], [args.out])
    dataset = counts_from_json(read_json(args.counts))
    report = bootstrap(dataset, args.resamples, args.seed, _mle_config(args))
    write_json(args.out, bootstrap_to_json(report))
    return EXIT_OK


def cmd_report(args):
    # type: (argparse.Namespace) -> int
    _distinct_paths([args.povm, args.bootstrap], [args.out])
    p = povm_from_json(read_json(args.povm))
    report = None
    if args.bootstrap is not None:
        report = bootstrap_from_json(read_json(args.bootstrap))
    if not check_povm(p).is_valid:
        logger.warning("reporting an invalid detector")
    if args.format == "json":
        text = dumps(json_report(p, report))
    elif args.format == "svg":
        text = svg_report(p)
    else:
        text = text_report(p, report)
    _emit(args.out, text)
    return EXIT_OK


def _add_mle_options(parser):
    # type: (argparse.ArgumentParser) -> None
    parser.add_argument("--epsilon", type=float, default=config.MLE_EPSILON)
    parser.add_argument("--max-iters", type=int, default=config.MLE_MAX_ITERATIONS)


def build_parser():
    # type: () -> argparse.ArgumentParser
    """
    Build the argument parser.

    :return: Parser with one sub-command per operation.
    """
    parser = argparse.ArgumentParser(
        prog="qdetco", description="Quantum detector tomography toolkit."
    )
    parser.add_argument(
        "-v", "--verbose", action="count", default=0, help="-v info, -vv debug"
    )
    commands = parser.add_subparsers(dest="command", metavar="command")
    commands.required = True

    simulate = commands.add_parser("simulate", help="simulate tomography counts")
    source = simulate.add_mutually_exclusive_group(required=True)
    source.add_argument("--ideal", action="store_true", help="ideal detector")
    source.add_argument("--povm", help="detector file")
    source.add_argument(
        "--noise",
        type=_noise_spec,
        action="append",
        help="p01,p10[,tilt_x,tilt_y], once per qubit or once for all",
    )
    source.add_argument("--preset", choices=device_names(), help="tabulated device")
    simulate.add_argument("--qubits", type=int)
    simulate.add_argument("--protocol", choices=("full", "parallel"), default="full")
    simulate.add_argument("--shots", type=int, default=config.DEFAULT_SHOTS)
    simulate.add_argument("--runs", type=int, default=1)
    simulate.add_argument("--seed", type=int, default=0)
    simulate.add_argument("--allow-large", action="store_true")
    simulate.add_argument("--out", required=True)
    simulate.set_defaults(handler=cmd_simulate)

    tomo = commands.add_parser("tomo", help="reconstruct a detector from counts")
    tomo.add_argument("--counts", required=True)
    _add_mle_options(tomo)
    tomo.add_argument("--out-povm", required=True)
    tomo.add_argument("--out-diag")
    tomo.set_defaults(handler=cmd_tomo)

    reduce = commands.add_parser("reduce", help="reduce a detector to some qubits")
    reduce.add_argument("--povm", required=True)
    reduce.add_argument("--keep", type=_int_list, required=True)
    reduce.add_argument("--out", required=True)
    reduce.set_defaults(handler=cmd_reduce)

    compare = commands.add_parser("compare", help="compare two detectors per qubit")
    compare.add_argument("--a", required=True)
    compare.add_argument("--b", required=True)
    compare.add_argument("--floor", type=float, default=config.FLUCTUATION_SCALE)
    compare.add_argument(
        "--multiplier", type=float, default=config.CROSSTALK_MULTIPLIER
    )
    compare.add_argument("--out")
    compare.set_defaults(handler=cmd_compare)

    mitigate = commands.add_parser("mitigate", help="correct a distribution")
    mitigate.add_argument(
        "--matrix-from", required=True, help="detector or response matrix file"
    )
    mitigate.add_argument("--dist", required=True)
    mitigate.add_argument("--method", choices=("inversion", "lsq"), default="lsq")
    mitigate.add_argument("--tol", type=float, default=config.LSQ_TOL)
    mitigate.add_argument("--max-iters", type=int, default=config.LSQ_MAX_ITERATIONS)
    mitigate.add_argument("--out", required=True)
    mitigate.add_argument("--out-matrix")
    mitigate.set_defaults(handler=cmd_mitigate)

    boot = commands.add_parser("bootstrap", help="bootstrap coefficient errors")
    boot.add_argument("--counts", required=True)
    boot.add_argument("--resamples", type=int, default=config.BOOTSTRAP_RESAMPLES)
    boot.add_argument("--seed", type=int, default=0)
    _add_mle_options(boot)
    boot.add_argument("--out", required=True)
    boot.set_defaults(handler=cmd_bootstrap)

    report = commands.add_parser("report", help="describe a detector")
    report.add_argument("--povm", required=True)
    report.add_argument("--bootstrap")
    report.add_argument("--format", choices=("json", "text", "svg"), default="text")
    report.add_argument("--out")
    report.set_defaults(handler=cmd_report)

    return parser


def main(argv=None):
    # type: (Optional[Sequence[str]]) -> int
    """
    Run the command line interface.

    :param argv: Arguments, `sys.argv[1:]` when None.
    :return: Exit code.
    """
    parser = build_parser()
    args = parser.parse_args(argv)
    level = _LOG_LEVELS[min(args.verbose, len(_LOG_LEVELS) - 1)]
    logging.basicConfig(level=level, format=_LOG_FORMAT)
    handler = args.handler  # type: Callable[[argparse.Namespace], int]
    try:
        return handler(args)
    except (ValidationError, OSError) as e:
        logger.error("%s", e)
        sys.stderr.write("error: {}\n".format(e))
        return EXIT_INVALID
    except NumericalError as e:
        logger.error("%s", e)
        sys.stderr.write("error: {}\n".format(e))
        return EXIT_NOT_CONVERGED
