"""Command-line front end: certify / bounds / sweep / verify / worstcase.

Every run that writes artifacts also writes a ``<out>.manifest.json``
recording the subcommand, full parameter set, seed, tool version, output
paths, and wall-clock duration; re-running with the same parameters
reproduces the data files byte-for-byte.

Exit codes: 0 success, 1 input error, 2 failed verification suite.
"""

from __future__ import annotations

import argparse
import os
import sys
import time
from dataclasses import dataclass, field

import numpy as np

from . import __version__, bounds, harness, worstcase
from .certify import (
    RESULT_CSV_COLUMNS,
    CertifyConfig,
    ProbabilityPair,
    certify,
    result_csv_rows,
    result_record,
)
from .distributions import RngStream, parse_distribution
from .reporting import (
    format_value,
    norm_order_token,
    parse_norm_order,
    read_csv_rows,
    rows_to_csv_text,
    to_json_text,
    write_text_atomic,
)

DEFAULT_SEED = 12648430
SEED_ENV_VAR = "CERTLAB_SEED"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


@dataclass
class RunManifest:
    """Reproducibility record written alongside every output artifact."""

    subcommand: str
    parameters: dict
    seed: int
    version: str = __version__
    outputs: list = field(default_factory=list)
    duration_seconds: float = 0.0

    def to_json(self) -> dict:
        return {
            "subcommand": self.subcommand,
            "parameters": self.parameters,
            "seed": self.seed,
            "version": self.version,
            "outputs": self.outputs,
            "duration_seconds": self.duration_seconds,
        }


class _Emitter:
    """Writes csv/json/manifest artifacts for one subcommand run."""

    def __init__(self, args, parameters: dict, seed: int):
        self.out = getattr(args, "out", None)
        self.fmt = getattr(args, "format", "both")
        self.manifest = RunManifest(subcommand=args.subcommand, parameters=parameters,
                                    seed=seed)
        self.started = time.monotonic()

    def emit(self, rows, columns, json_payload) -> None:
        if not self.out:
            return
        if self.fmt in ("csv", "both"):
            path = f"{self.out}.csv"
            write_text_atomic(path, rows_to_csv_text(rows, columns))
            self.manifest.outputs.append(path)
        if self.fmt in ("json", "both"):
            path = f"{self.out}.json"
            write_text_atomic(path, to_json_text(json_payload))
            self.manifest.outputs.append(path)

    def finish(self) -> None:
        if not self.out or not self.manifest.outputs:
            return
        self.manifest.duration_seconds = time.monotonic() - self.started
        write_text_atomic(f"{self.out}.manifest.json", to_json_text(self.manifest.to_json()))


def _resolve_seed(args) -> int:
    if getattr(args, "seed", None) is not None:
        seed = args.seed
    else:
        seed = int(os.environ.get(SEED_ENV_VAR, DEFAULT_SEED))
    if not 0 <= seed < 2**64:
        raise UsageError(f"seed must be a 64-bit unsigned integer, got {seed}")
    return seed


def _parse_float_list(text: str, name: str) -> list[float]:
    try:
        return [float(tok) for tok in text.split(",") if tok.strip()]
    except ValueError:
        raise UsageError(f"--{name} expects a comma-separated number list, got {text!r}") from None


def _parse_norm_list(text: str) -> list[float]:
    try:
        return [parse_norm_order(tok) for tok in text.split(",") if tok.strip()]
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _parse_int_list(text: str, name: str) -> list[int]:
    try:
        return [int(tok) for tok in text.split(",") if tok.strip()]
    except ValueError:
        raise UsageError(f"--{name} expects a comma-separated integer list, got {text!r}") from None


def _parse_kv(text: str, spec: str) -> dict:
    params = {}
    for item in text.split(","):
        if not item.strip():
            continue
        key, sep, value = item.partition("=")
        if not sep:
            raise UsageError(f"malformed parameter {item!r} in {spec!r}")
        params[key.strip()] = value.strip()
    return params


def _build_classifier(spec: str):
    """Returns (builder(d) -> (classifier, task_points | None))."""
    head, _, rest = spec.partition(":")
    kind = head.strip().lower()
    if kind == "constant":
        try:
            label = int(rest)
        except ValueError:
            raise UsageError(f"constant classifier expects a label, got {spec!r}") from None
        return lambda d: (harness.ConstantClassifier(label), None)
    if kind == "linear":
        params = _parse_kv(rest, spec)
        seed = int(params.pop("seed", 0))
        t = float(params.pop("t", 0.0))
        if params:
            raise UsageError(f"unexpected linear parameters {sorted(params)} in {spec!r}")

        def build_linear(d):
            gen = np.random.Generator(np.random.PCG64(np.random.SeedSequence((seed, 0))))
            w = gen.standard_normal(d)
            w /= np.linalg.norm(w)
            return harness.LinearClassifier(w, t), None

        return build_linear
    if kind == "prototype":
        params = _parse_kv(rest, spec)
        classes = int(params.pop("classes", 2))
        sep = float(params.pop("sep", 4.0))
        seed = int(params.pop("seed", 20_240_001))
        if params:
            raise UsageError(f"unexpected prototype parameters {sorted(params)} in {spec!r}")

        def build_prototype(d):
            classifier, points = harness.make_blob_task(d, classes, sep, seed)
            return classifier, points

        return build_prototype
    raise UsageError(f"unknown classifier spec {spec!r}")


def _load_points(input_spec: str, task_points) -> np.ndarray:
    head, _, rest = input_spec.partition(":")
    kind = head.strip().lower()
    if kind == "csv":
        points = np.loadtxt(rest, delimiter=",", ndmin=2)
        if points.size == 0:
            raise UsageError(f"no points found in {rest!r}")
        return points
    if kind == "zeros":
        params = _parse_kv(rest, input_spec)
        d = int(params.get("d", 0))
        if d < 1:
            raise UsageError(f"zeros input needs d >= 1, got {input_spec!r}")
        return np.zeros((1, d))
    if kind == "task":
        if task_points is None:
            raise UsageError("input 'task' requires a prototype classifier")
        return np.asarray(task_points)
    raise UsageError(f"unknown input spec {input_spec!r}")


def _input_dimension(input_spec: str) -> int | None:
    head, _, rest = input_spec.partition(":")
    if head.strip().lower() == "zeros":
        return int(_parse_kv(rest, input_spec).get("d", 0))
    if head.strip().lower() == "csv":
        return None
    return None


# --- subcommands ---

def _cmd_certify(args) -> int:
    seed = _resolve_seed(args)
    p_list = _parse_norm_list(args.p)
    if any(p < 2.0 for p in p_list):
        raise UsageError("certified norm orders must satisfy p >= 2")
    if args.n0 < 1 or args.n < 1:
        raise UsageError("sample counts must be >= 1")
    if not 0.0 < args.alpha < 1.0:
        raise UsageError(f"alpha must lie in (0, 1), got {args.alpha}")
    if args.workers < 1:
        raise UsageError("workers must be >= 1")
    try:
        dist = parse_distribution(args.dist)
    except ValueError as exc:
        raise UsageError(str(exc)) from None

    if args.input is None:
        args.input = f"zeros:d={args.d if args.d else 16}"
    builder = _build_classifier(args.classifier)
    probe_d = _input_dimension(args.input)
    if args.input.startswith("csv:"):
        points = _load_points(args.input, None)
        classifier, task_points = builder(points.shape[1])
    else:
        if args.input == "task" and probe_d is None:
            if args.d is None:
                raise UsageError("input 'task' needs --d to size the synthetic task")
            probe_d = args.d
        classifier, task_points = builder(probe_d)
        points = _load_points(args.input, task_points)

    config = CertifyConfig(n0=args.n0, n=args.n, alpha=args.alpha, seed=seed)
    emitter = _Emitter(args, _manifest_params(args), seed)

    records, csv_rows = [], []
    for i, x in enumerate(points):
        result = certify(classifier, x, dist, config, p_list,
                         workers=args.workers, point_index=i)
        records.append(result_record(result, i))
        csv_rows.extend(result_csv_rows(result, i))
        radii_text = ", ".join(f"l{norm_order_token(p)}={format_value(r)}"
                               for p, r in result.radii) or "-"
        print(f"point {i}: class={result.predicted_class} abstain={result.abstain} "
              f"p1_lower={format_value(result.p1_lower)} radii: {radii_text}")

    emitter.emit(csv_rows, RESULT_CSV_COLUMNS, records)
    emitter.finish()
    return 0


def _cmd_bounds(args) -> int:
    if (args.sigma is None) == (args.b is None):
        raise UsageError("give exactly one of --sigma or --b")
    p = parse_norm_order(args.p)
    if args.d < 1:
        raise UsageError(f"--d must be >= 1, got {args.d}")
    pair = None
    if args.p1 is not None:
        p2 = args.p2 if args.p2 is not None else 1.0 - args.p1
        try:
            pair = ProbabilityPair(args.p1, p2)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    elif args.family in ("iid", "gengauss"):
        raise UsageError(f"family {args.family!r} needs --p1")

    try:
        query = bounds.BoundQuery(family=args.family, d=args.d, p=p,
                                  sigma=args.sigma, b=args.b, pair=pair)
        result = bounds.evaluate_bound(query)
    except ValueError as exc:
        raise UsageError(str(exc)) from None

    print(format_value(result.value))
    print(f"theorem={result.theorem} preconditions_met={format_value(result.preconditions_met)}"
          + (f" note={result.precondition_notes}" if result.precondition_notes else ""))

    emitter = _Emitter(args, _manifest_params(args), _resolve_seed(args))
    row = {"family": args.family, "sigma": args.sigma, "b": args.b, "d": args.d,
           "p": norm_order_token(p), "p1": pair.p1 if pair else None,
           "p2": pair.p2 if pair else None, "theorem": result.theorem,
           "bound": result.value, "preconditions_met": result.preconditions_met,
           "gaussian_radius": None, "note": result.precondition_notes}
    emitter.emit([row], bounds.SWEEP_CSV_COLUMNS, [row])
    emitter.finish()
    return 0


def _sweep_done_keys(args, key_columns) -> tuple[set, list]:
    """Existing rows (for --resume) keyed by the parameter columns."""
    if not (args.resume and args.out and os.path.exists(f"{args.out}.csv")):
        return set(), []
    existing = read_csv_rows(f"{args.out}.csv")
    keys = {tuple(row[c] for c in key_columns) for row in existing}
    return keys, existing


def _cmd_sweep(args) -> int:
    seed = _resolve_seed(args)
    emitter = _Emitter(args, _manifest_params(args), seed)

    if args.kind == "bounds":
        families = [f.strip() for f in args.families.split(",") if f.strip()]
        dims = _parse_int_list(args.dims, "dims")
        ps = _parse_norm_list(args.ps)
        p1s = _parse_float_list(args.p1s, "p1s") if args.p1s else []
        rows = bounds.bound_sweep(families, dims, ps, p1s, sigma=args.sigma, b=args.b)
        for row in rows:
            row["p"] = norm_order_token(row["p"])
        columns = bounds.SWEEP_CSV_COLUMNS
    elif args.kind == "cert-vs-bound":
        if args.sigma is None:
            raise UsageError("cert-vs-bound sweep needs --sigma")
        ps = _parse_norm_list(args.ps)
        builder = _build_classifier(args.classifier)
        probe_d = _input_dimension(args.input) or args.d
        if args.input == "task" and probe_d is None:
            raise UsageError("input 'task' needs --d to size the synthetic task")
        if args.input.startswith("csv:"):
            points = _load_points(args.input, None)
            classifier, task_points = builder(points.shape[1])
        else:
            classifier, task_points = builder(probe_d)
            points = _load_points(args.input, task_points)
        config = CertifyConfig(n0=args.n0, n=args.n, alpha=args.alpha, seed=seed)
        done, existing = _sweep_done_keys(args, ("point_id", "q", "p"))
        rows = harness.run_bound_vs_certificate(points, classifier, args.sigma, ps,
                                                config, workers=args.workers,
                                                done_keys=done)
        for row in rows:
            row["p"] = norm_order_token(row["p"])
        rows = existing + rows
        columns = harness.BOUND_VS_CERT_COLUMNS
    elif args.kind == "resolution":
        if args.sigma is None:
            raise UsageError("resolution sweep needs --sigma")
        ps = _parse_norm_list(args.ps)
        sides = _parse_int_list(args.sides, "sides")
        specs = [harness.ResolutionSpec(side, args.channels) for side in sides]
        config = CertifyConfig(n0=args.n0, n=args.n, alpha=args.alpha, seed=seed)
        done, existing = _sweep_done_keys(args, ("resolution", "d", "p"))
        rows = harness.run_dimension_sweep(specs, args.sigma, ps, config,
                                           separation=args.separation,
                                           workers=args.workers, done_keys=done)
        for row in rows:
            row["p"] = norm_order_token(row["p"])
        rows = existing + rows
        columns = harness.DIMENSION_SWEEP_COLUMNS
    else:  # pragma: no cover - argparse restricts choices
        raise UsageError(f"unknown sweep kind {args.kind!r}")

    if args.out:
        emitter.emit(rows, columns, rows)
        emitter.finish()
    else:
        sys.stdout.write(rows_to_csv_text(rows, columns))
    print(f"sweep {args.kind}: {len(rows)} rows", file=sys.stderr)
    return 0


def _cmd_verify(args) -> int:
    seed = _resolve_seed(args)
    names = list(worstcase.SUITES) if args.suite == "all" else [args.suite]
    if args.n < 10_000:
        raise UsageError("verification needs --n >= 10000")

    reports = []
    for name in names:
        if name == "flip":
            report = worstcase.run_flip_suite(n=args.n, seed=seed,
                                              quantile_samples=args.quantile_samples)
        elif name == "lemma2":
            dims = (args.d,) if args.d else (2, 3)
            eps_values = (args.eps,) if args.eps else (0.3, 1.0)
            report = worstcase.run_lemma2_suite(dims=dims, b=args.b,
                                                eps_values=eps_values, step=args.step)
        elif name == "box":
            cells = ((args.d, args.eps),) if args.d and args.eps else \
                ((2, 0.2), (5, 0.1), (16, 0.05))
            report = worstcase.run_box_suite(cells_spec=cells, b=args.b, n=args.n, seed=seed)
        else:
            cells = ((args.d, args.eps),) if args.d and args.eps else \
                ((2, 0.2), (3, 0.3), (5, 0.5))
            report = worstcase.run_l1_suite(cells_spec=cells, b=args.b, n=args.n, seed=seed)
        reports.append(report)
        print(report.summary_line())

    if args.out:
        emitter = _Emitter(args, _manifest_params(args), seed)
        payload = [r.to_json() for r in reports]
        write_text_atomic(f"{args.out}.json", to_json_text(payload))
        emitter.manifest.outputs.append(f"{args.out}.json")
        emitter.finish()
    return 0 if all(r.passed for r in reports) else 2


def _cmd_worstcase(args) -> int:
    seed = _resolve_seed(args)
    try:
        dist = parse_distribution(args.dist)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if args.d < 1:
        raise UsageError(f"--d must be >= 1, got {args.d}")
    p2 = args.p2 if args.p2 is not None else 1.0 - args.p1
    try:
        pair = ProbabilityPair(args.p1, p2)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    multipliers = _parse_float_list(args.multipliers, "multipliers")
    norms = _parse_norm_list(args.norms)
    if args.n < 10_000:
        raise UsageError("flip verification needs --n >= 10000")

    base = RngStream(seed, 3)
    construction = worstcase.build_halfspace(dist, args.d, pair, rng=base.substream(0),
                                             quantile_samples=args.quantile_samples)
    print(f"s1={format_value(construction.s1)} (stderr {format_value(construction.s1_stderr)})")
    print(f"s2={format_value(construction.s2)} (stderr {format_value(construction.s2_stderr)})")
    print(f"eps_star={format_value(construction.eps_star)}")
    for p in norms:
        print(f"flip l{norm_order_token(p)} norm: "
              f"{format_value(worstcase.flip_lp_norm(construction, p))}")

    rows = worstcase.verify_flip(construction, multipliers, args.n, base.substream(1))
    table = []
    for row in rows:
        print(f"m={format_value(row.multiplier)}: p1={row.p1_hat:.5f} p2={row.p2_hat:.5f} "
              f"sign={row.sign:+d} ({row.status})")
        table.append({"multiplier": row.multiplier, "p1_hat": row.p1_hat,
                      "p2_hat": row.p2_hat, "sign": row.sign,
                      "stderr": row.stderr, "status": row.status})

    emitter = _Emitter(args, _manifest_params(args), seed)
    emitter.emit(table, ("multiplier", "p1_hat", "p2_hat", "sign", "stderr", "status"),
                 {"construction": {"dist": args.dist, "d": args.d, "p1": pair.p1,
                                   "p2": pair.p2, "s1": construction.s1,
                                   "s2": construction.s2,
                                   "eps_star": construction.eps_star},
                  "rows": table})
    emitter.finish()
    return 0


def _manifest_params(args) -> dict:
    skip = {"func", "subcommand"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="certlab",
                     description="randomized-smoothing certification and its limits")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def common(p, with_workers=True):
        p.add_argument("--seed", type=int, default=None,
                       help=f"RNG seed (falls back to ${SEED_ENV_VAR})")
        p.add_argument("--out", default=None, help="output path prefix")
        p.add_argument("--format", choices=("csv", "json", "both"), default="both")
        if with_workers:
            p.add_argument("--workers", type=int, default=1)

    p_cert = sub.add_parser("certify", help="certify points under a smoothing distribution")
    p_cert.add_argument("--dist", required=True, help='e.g. "gengauss:q=2,sigma=0.25"')
    p_cert.add_argument("--classifier", required=True,
                        help='"constant:<label>", "linear:seed=..[,t=..]", '
                             '"prototype:classes=..,sep=..,seed=.."')
    p_cert.add_argument("--input", default=None, help='"csv:<path>", "zeros:d=<d>", or "task"')
    p_cert.add_argument("--d", type=int, default=None, help="dimension for task input")
    p_cert.add_argument("--n0", type=int, default=100)
    p_cert.add_argument("--n", type=int, default=100_000)
    p_cert.add_argument("--alpha", type=float, default=0.001)
    p_cert.add_argument("--p", default="2", help='comma list of norm orders, e.g. "2,inf"')
    common(p_cert)
    p_cert.set_defaults(func=_cmd_certify)

    p_bounds = sub.add_parser("bounds", help="evaluate one certified-radius upper bound")
    p_bounds.add_argument("--family", required=True, choices=bounds.FAMILIES)
    p_bounds.add_argument("--sigma", type=float, default=None)
    p_bounds.add_argument("--b", type=float, default=None)
    p_bounds.add_argument("--d", type=int, required=True)
    p_bounds.add_argument("--p", required=True, help='norm order (positive real or "inf")')
    p_bounds.add_argument("--p1", type=float, default=None)
    p_bounds.add_argument("--p2", type=float, default=None)
    common(p_bounds, with_workers=False)
    p_bounds.set_defaults(func=_cmd_bounds)

    p_sweep = sub.add_parser("sweep", help="tabulate bounds/certificates over grids")
    p_sweep.add_argument("--kind", choices=("bounds", "cert-vs-bound", "resolution"),
                         default="bounds")
    p_sweep.add_argument("--families", default=",".join(bounds.FAMILIES))
    p_sweep.add_argument("--sigma", type=float, default=None)
    p_sweep.add_argument("--b", type=float, default=None)
    p_sweep.add_argument("--dims", default="192,768,3072")
    p_sweep.add_argument("--ps", default="2,4,inf")
    p_sweep.add_argument("--p1s", default="0.9,0.99,0.999")
    p_sweep.add_argument("--classifier", default="prototype:classes=2,sep=4,seed=20240001")
    p_sweep.add_argument("--input", default="task")
    p_sweep.add_argument("--d", type=int, default=None)
    p_sweep.add_argument("--sides", default="8,16,32")
    p_sweep.add_argument("--channels", type=int, default=3)
    p_sweep.add_argument("--separation", type=float, default=4.0)
    p_sweep.add_argument("--n0", type=int, default=100)
    p_sweep.add_argument("--n", type=int, default=100_000)
    p_sweep.add_argument("--alpha", type=float, default=0.001)
    p_sweep.add_argument("--resume", action="store_true",
                         help="skip rows already present in <out>.csv")
    common(p_sweep)
    p_sweep.set_defaults(func=_cmd_sweep)

    p_verify = sub.add_parser("verify", help="run construction verification suites")
    p_verify.add_argument("--suite", required=True,
                          choices=tuple(worstcase.SUITES) + ("all",))
    p_verify.add_argument("--n", type=int, default=100_000)
    p_verify.add_argument("--quantile-samples", type=int, default=1_000_000,
                          dest="quantile_samples")
    p_verify.add_argument("--d", type=int, default=None)
    p_verify.add_argument("--b", type=float, default=1.0)
    p_verify.add_argument("--eps", type=float, default=None)
    p_verify.add_argument("--step", type=float, default=0.02)
    common(p_verify, with_workers=False)
    p_verify.set_defaults(func=_cmd_verify)

    p_worst = sub.add_parser("worstcase", help="build and probe a half-space construction")
    p_worst.add_argument("--dist", default="gengauss:q=2,sigma=1")
    p_worst.add_argument("--d", type=int, required=True)
    p_worst.add_argument("--p1", type=float, required=True)
    p_worst.add_argument("--p2", type=float, default=None)
    p_worst.add_argument("--multipliers", default="0,0.9,1,1.1")
    p_worst.add_argument("--norms", default="1,2,inf")
    p_worst.add_argument("--n", type=int, default=100_000)
    p_worst.add_argument("--quantile-samples", type=int, default=1_000_000,
                         dest="quantile_samples")
    common(p_worst, with_workers=False)
    p_worst.set_defaults(func=_cmd_worstcase)

    return parser


def dispatch(argv) -> int:
    """Parse and run; returns the process exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return 1
    except SystemExit as exc:  # argparse --help
        return int(exc.code or 0)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
