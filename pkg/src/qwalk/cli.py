"""Command-line tools ``qw1d``, ``qw2d`` and ``qwamplify``.

Exit codes: 0 success, 1 usage or input error, 2 runtime error.
"""

from __future__ import annotations

import argparse
import os
import sys
import time
import warnings

from .config import errors, parse, validate
from .errors import ConfigError, QWalkError
from .lattice import norm_sq
from .measurement import run_ensemble
from .output import amplify, bundle_from_result, parse_region, write_bundle

EXIT_OK, EXIT_USAGE, EXIT_RUNTIME = 0, 1, 2


def _err(tool, msg):
    print(f"{tool}: {msg}", file=sys.stderr)


def simulate_file(path, dimension: int, out=None, tool=None) -> int:
    out = sys.stdout if out is None else out
    tool = tool or ("qw1d" if dimension == 1 else "qw2d")
    try:
        with open(path, encoding="utf-8", errors="replace") as fh:
            text = fh.read()
    except OSError as exc:
        _err(tool, f"cannot read {path}: {exc.strerror}")
        return EXIT_USAGE
    try:
        config = parse(text, dimension)
    except ConfigError as exc:
        _err(tool, f"{path}: {exc}")
        return EXIT_USAGE
    diagnostics = validate(config)
    for d in diagnostics:
        _err(tool, f"{path}: {d}")
    if errors(diagnostics):
        return EXIT_USAGE

    base = os.path.splitext(path)[0]
    t0 = time.perf_counter()
    try:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            result = run_ensemble(config)
        for w in caught:
            _err(tool, f"warning: {w.message}")
        written = write_bundle(bundle_from_result(result, base))
    except ConfigError as exc:
        _err(tool, f"{path}: {exc}")
        return EXIT_USAGE
    except (QWalkError, OSError) as exc:
        _err(tool, str(exc))
        return EXIT_RUNTIME
    elapsed = time.perf_counter() - t0

    spec = result.distribution.spec
    size = "x".join(str(n) for n in spec.shape)
    print(f"{tool}: {path}", file=out)
    print(f"  lattice     {spec.kind} {size}", file=out)
    print(f"  steps       {result.steps_run} of {config.steps}", file=out)
    if result.experiments > 1:
        print(f"  experiments {result.experiments}", file=out)
    print(f"  final norm  {norm_sq(result.wavefunction):.15f}", file=out)
    for name, ok in result.checks.items():
        print(f"  check {name:<9} {'passed' if ok else 'FAILED'}", file=out)
    print(f"  runtime     {elapsed:.3f} s", file=out)
    print("  output      " + " ".join(written), file=out)
    return EXIT_OK


def _sim_main(dimension: int, argv=None) -> int:
    tool = "qw1d" if dimension == 1 else "qw2d"
    argv = sys.argv[1:] if argv is None else argv
    if len(argv) != 1 or argv[0] in ("-h", "--help"):
        print(f"usage: {tool} FILE.in\n\nSimulates the {dimension}D quantum walk described "
              f"by FILE.in and writes FILE.dat, FILE-wave.dat, FILE.sta, FILE.plt\n"
              f"(plus FILE-pb.dat / FILE-screen.dat when requested).\n"
              f"Ensemble runs use up to $QWALK_THREADS threads.",
              file=sys.stderr if len(argv) != 1 else sys.stdout)
        return EXIT_OK if argv and argv[0] in ("-h", "--help") else EXIT_USAGE
    return simulate_file(argv[0], dimension, tool=tool)


def main_qw1d(argv=None) -> int:
    return _sim_main(1, argv)


def main_qw2d(argv=None) -> int:
    return _sim_main(2, argv)


def _amplify_parser():
    p = argparse.ArgumentParser(
        prog="qwamplify",
        description="Multiply the probabilities of a region of a .dat file by a factor. "
                    "The original file is kept as FILE.bak.",
        epilog="example: qwamplify file.dat -r 'x>=20' -f 5")
    p.add_argument("file", help=".dat file written by qw1d or qw2d")
    p.add_argument("-r", "--region", action="append", default=[], metavar="COND",
                   help="condition on x or y such as 'x>=20' or 'y<0'; repeat to "
                        "intersect; no condition selects the whole file")
    p.add_argument("-f", "--factor", type=float, required=True, help="amplification factor")
    return p


def main_qwamplify(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    parser = _amplify_parser()
    if not argv:
        parser.print_help()
        return EXIT_OK
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    if not os.path.isfile(args.file):
        _err("qwamplify", f"cannot read {args.file}")
        return EXIT_USAGE
    try:
        region = parse_region(args.region)
    except QWalkError as exc:
        _err("qwamplify", str(exc))
        return EXIT_USAGE
    try:
        backup = amplify(args.file, region, args.factor)
    except QWalkError as exc:
        _err("qwamplify", str(exc))
        return EXIT_RUNTIME
    print(f"qwamplify: {args.file} amplified by {args.factor:g}; original saved as {backup}")
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main_qw2d())
