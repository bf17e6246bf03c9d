"""Command-line interface: ``tunable-gmm <command> ...``.

Exit codes: 0 success, 1 usage error, 2 data error, 3 numeric error.
Errors are written to stderr as a single ``error[<code>]: <message>`` line.
"""

import argparse
import sys

from . import __version__
from ._random import RNG_VERSION
from .encoding import encode_dataset
from .exceptions import DataError, EmptyVectorError, TunableGMMError, UsageError
from .gcws import GammaSketch, Mode, Sampler, estimate_ggmm, estimate_pgmm, format_sketches, parse_sketches
from .kernels import Family, KernelSpec, gram, write_precomputed
from .linear import evaluate_accuracy, format_model, parse_model, train
from .vectors import LabeledDataset, parse_dataset, transform, write_dataset


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _read(path):
    if path == "-":
        return sys.stdin.buffer.read()
    try:
        with open(path, "rb") as fh:
            return fh.read()
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc.strerror}") from None


def _write(path, data):
    if isinstance(data, str):
        data = data.encode("ascii")
    if path == "-":
        sys.stdout.buffer.write(data)
        sys.stdout.buffer.flush()
        return
    try:
        with open(path, "wb") as fh:
            fh.write(data)
    except OSError as exc:
        raise DataError(f"cannot write {path}: {exc.strerror}") from None


def _load(args, path=None, dim=None):
    return parse_dataset(_read(path or args.input), dim=dim or args.dim, lenient=args.lenient)


def _report(args, extra):
    """TSV report: the full run configuration, then the results."""
    rows = [("command", args.command), ("version", __version__)]
    for key, value in sorted(vars(args).items()):
        if key not in ("command", "func"):
            rows.append((key, value))
    rows.extend(extra)
    return "".join(f"{k}\t{v}\n" for k, v in rows)


def cmd_transform(args):
    ds = _load(args)
    out = LabeledDataset(tuple((label, transform(v)) for label, v in ds), 2 * ds.dim)
    _write(args.output, write_dataset(out))


def _spec(args):
    return KernelSpec(args.kernel, lambda_e=args.lambda_e, p=args.p, gamma=args.gamma)


def cmd_gram(args):
    spec = _spec(args)
    ds = _load(args)
    gm = gram(ds, spec, block_size=args.block_size, n_jobs=args.threads)
    _write(args.output, write_precomputed(gm))


def cmd_hash(args):
    ds = _load(args)
    sampler = Sampler(args.seed, args.k, 2 * ds.dim)
    vectors = []
    for n, v in enumerate(ds.vectors, start=1):
        if v.nnz == 0:
            raise EmptyVectorError(f"record {n} is all zero and cannot be hashed")
        vectors.append(transform(v))
    if args.gamma is not None:
        if args.p is not None and args.p != 1.0:
            raise UsageError("--gamma hashing fixes p at 1")
        sketches = [sampler.gamma_sketch(v, args.gamma) for v in vectors]
    else:
        if args.p is None:
            raise UsageError("hash requires --p (or --gamma)")
        sketches = sampler.sketch_many(vectors, args.p, n_jobs=args.threads)
    _write(args.output, format_sketches(sketches))


def cmd_encode(args):
    ds = _load(args)
    out = encode_dataset(ds, args.p, args.seed, args.k, args.b, n_jobs=args.threads)
    _write(args.output, write_dataset(out))


def _pick(sketches, row, path):
    if not 1 <= row <= len(sketches):
        raise UsageError(f"{path} holds {len(sketches)} sketches; row {row} does not exist")
    return sketches[row - 1]


def cmd_estimate(args):
    su = _pick(parse_sketches(_read(args.sketch_a)), args.row_a, args.sketch_a)
    sv = _pick(parse_sketches(_read(args.sketch_b)), args.row_b, args.sketch_b)
    if isinstance(su, GammaSketch) or isinstance(sv, GammaSketch):
        value = estimate_ggmm(su, sv)
    else:
        value = estimate_pgmm(su, sv, Mode(args.mode))
    print(repr(value))


def cmd_train(args):
    ds = _load(args)
    model = train(ds, C=args.C, epochs=args.epochs, seed=args.seed)
    _write(args.model, format_model(model))
    report = _report(args, [
        ("n_records", len(ds)),
        ("dim", ds.dim),
        ("classes", ",".join(str(c) for c in model.classes.tolist())),
        ("train_accuracy", repr(evaluate_accuracy(model, ds))),
    ])
    _write(args.report, report)


def cmd_eval(args):
    try:
        model = parse_model(_read(args.model).decode("ascii"))
    except UnicodeDecodeError:
        raise DataError(f"{args.model} is not a text model file") from None
    ds = _load(args, dim=model.dim)
    report = _report(args, [
        ("n_records", len(ds)),
        ("dim", model.dim),
        ("C", repr(model.C)),
        ("accuracy", repr(evaluate_accuracy(model, ds))),
    ])
    _write(args.report, report)


def build_parser():
    parser = _Parser(prog="tunable-gmm", description="Tunable GMM kernels and GCWS hashing.")
    parser.add_argument("--version", action="version",
                        version=f"%(prog)s {__version__} (rng {RNG_VERSION})")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def dataset_opts(p):
        p.add_argument("--dim", type=int, default=None, help="pin the input dimension")
        p.add_argument("--lenient", action="store_true", help="skip blank lines and # comments")

    def threads(p):
        p.add_argument("--threads", type=int, default=1)

    p = sub.add_parser("transform", help="sign-split a dataset into 2D nonnegative features")
    p.add_argument("input")
    p.add_argument("output")
    dataset_opts(p)
    p.set_defaults(func=cmd_transform)

    p = sub.add_parser("gram", help="write a precomputed-kernel file")
    p.add_argument("input")
    p.add_argument("output")
    p.add_argument("--kernel", required=True, type=str.lower,
                   choices=[f.value for f in Family])
    p.add_argument("--lambda-e", type=float, default=None)
    p.add_argument("--p", type=float, default=None)
    p.add_argument("--gamma", type=float, default=None)
    p.add_argument("--block-size", type=int, default=64)
    dataset_opts(p)
    threads(p)
    p.set_defaults(func=cmd_gram)

    p = sub.add_parser("hash", help="write GCWS sketches, one block per record")
    p.add_argument("input")
    p.add_argument("output")
    p.add_argument("--p", type=float, default=None)
    p.add_argument("--gamma", type=int, default=None, help="integer gamma: replicas per hash")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    dataset_opts(p)
    threads(p)
    p.set_defaults(func=cmd_hash)

    p = sub.add_parser("encode", help="hash and b-bit encode a dataset")
    p.add_argument("input")
    p.add_argument("output")
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--b", type=int, required=True)
    dataset_opts(p)
    threads(p)
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("estimate", help="estimate the kernel from two sketch files")
    p.add_argument("sketch_a")
    p.add_argument("sketch_b")
    p.add_argument("--mode", choices=[m.value for m in Mode], default=Mode.EXACT_PAIR.value)
    p.add_argument("--row-a", type=int, default=1)
    p.add_argument("--row-b", type=int, default=1)
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("train", help="fit the one-vs-rest linear learner")
    p.add_argument("input")
    p.add_argument("model")
    p.add_argument("--C", type=float, default=1.0)
    p.add_argument("--epochs", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--report", default="-")
    dataset_opts(p)
    threads(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="report the accuracy of a saved model")
    p.add_argument("model")
    p.add_argument("input")
    p.add_argument("--report", default="-")
    p.add_argument("--lenient", action="store_true")
    p.set_defaults(func=cmd_eval, dim=None)
    return parser


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
        args.func(args)
    except TunableGMMError as exc:
        print(f"error[{exc.exit_code}]: {' '.join(str(exc).split())}", file=sys.stderr)
        return exc.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
