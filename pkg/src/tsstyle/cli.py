"""Command-line front end.

Every command writes a manifest next to its output: one ``key=value`` line
per resolved option, keys sorted. ``tsstyle replay <manifest>`` re-runs the
command it describes and reproduces the outputs byte for byte.

Exit codes: 0 success, 2 usage or configuration error, 1 runtime or data
error.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import __version__
from .csvio import ingest_csv, read_windows_csv, write_series_csv, write_windows_csv
from .datagen import (
    AUGMENT_METHODS,
    ShockConfig,
    SwitchingArConfig,
    augment_dataset,
    gen_switching_ar1,
    generate_stylized_dataset,
    minmax_scale,
    perturb_dataset,
    sliding_windows,
    train_test_split,
)
from .errors import BadSplit, ConfigError, TsStyleError
from .features import EDGE_POLICIES, POSITIVITY_POLICIES, RETURN_KINDS, FeatureConfig, TrendConfig
from .losses import LossWeights
from .metrics import EvalConfig, evaluate
from .optimizer import LR_SCALES, OptimizerConfig

log = logging.getLogger("tsstyle")

USAGE_ERRORS = (ConfigError, BadSplit)
# options that never affect outputs and are left out of manifests
UNRECORDED = {"quiet", "jobs", "verbose", "func", "command"}


class UsageError(Exception):
    pass


def _range(text: str) -> tuple[float, float]:
    try:
        lo, hi = (float(p) for p in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected lo:hi, got {text!r}") from None
    if lo > hi:
        raise argparse.ArgumentTypeError(f"range {text!r} is not ordered")
    return lo, hi


def _int_range(text: str) -> tuple[int, int]:
    lo, hi = _range(text)
    if lo != int(lo) or hi != int(hi):
        raise argparse.ArgumentTypeError(f"expected integer lo:hi, got {text!r}")
    return int(lo), int(hi)


def _seed(text: str) -> int:
    v = int(text)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be a 64-bit unsigned integer")
    return v


def _format(value) -> str:
    if isinstance(value, tuple):
        return ":".join(_format(v) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


# ---------------------------------------------------------------- manifests


def manifest_lines(args: argparse.Namespace) -> list[str]:
    items = {k: v for k, v in vars(args).items() if k not in UNRECORDED and v is not None}
    items["command"] = args.command
    items["version"] = __version__
    return [f"{k}={_format(items[k])}" for k in sorted(items)]


def write_manifest(path, args) -> Path:
    path = Path(str(path) + ".manifest")
    path.write_text("\n".join(manifest_lines(args)) + "\n")
    return path


def read_manifest(path) -> dict[str, str]:
    out = {}
    for n, line in enumerate(Path(path).read_text().splitlines(), start=1):
        if not line.strip():
            continue
        if "=" not in line:
            raise UsageError(f"{path}: line {n} is not key=value")
        k, v = line.split("=", 1)
        out[k] = v
    return out


def manifest_argv(parser: argparse.ArgumentParser, entries: dict[str, str]) -> list[str]:
    """Rebuild a command line from manifest entries."""
    entries = dict(entries)
    command = entries.pop("command", None)
    version = entries.pop("version", None)
    if command is None:
        raise UsageError("manifest has no command entry")
    if version != __version__:
        log.warning("manifest written by version %s, running %s", version, __version__)
    sub = _subparsers(parser).get(command)
    if sub is None:
        raise UsageError(f"manifest names unknown command {command!r}")
    argv = [command]
    actions = {a.dest: a for a in sub._actions}
    for key, value in entries.items():
        action = actions.get(key)
        if action is None:
            raise UsageError(f"manifest key {key!r} is not an option of {command!r}")
        if not action.option_strings:
            argv.append(value)
        elif isinstance(action, argparse._StoreTrueAction):
            if value == "True":
                argv.append(action.option_strings[0])
        else:
            argv.append(f"{action.option_strings[0]}={value}")
    return argv


def _subparsers(parser) -> dict:
    for action in parser._actions:
        if isinstance(action, argparse._SubParsersAction):
            return action.choices
    return {}


# ----------------------------------------------------------------- commands


def _summary(args, text: str) -> None:
    if not args.quiet:
        print(text)


def cmd_gen(args) -> None:
    config = SwitchingArConfig(
        a10=args.a10,
        a11=args.a11,
        a20=args.a20,
        a21=args.a21,
        horizon=args.t,
        switch_fraction=args.switch_fraction,
        noise_std=args.noise_std,
        seed=args.seed,
    )
    series = gen_switching_ar1(config)
    write_series_csv(args.out, series)
    write_manifest(args.out, args)
    _summary(args, f"wrote {len(series)} values to {args.out}")


def cmd_window(args) -> None:
    series = ingest_csv(args.input, args.column)
    if args.scale == "minmax":
        series = minmax_scale(series)
    ds = sliding_windows(series, args.w)
    train, test = train_test_split(ds, args.train)
    prefix = args.out_prefix
    write_windows_csv(f"{prefix}.train.csv", train)
    write_windows_csv(f"{prefix}.test.csv", test)
    write_manifest(prefix, args)
    _summary(args, f"wrote {len(train)} training and {len(test)} test windows of length {ds.window_length}")


def _configs(args):
    weights = LossWeights(args.alpha, args.beta, args.gamma)
    opt = OptimizerConfig(
        iterations=args.iterations,
        base_lr=args.base_lr,
        rms_decay=args.rms_decay,
        rms_epsilon=args.rms_epsilon,
        return_best=not args.return_last,
        lr_scale=args.lr_scale,
    )
    fc = FeatureConfig(args.tau_max, args.return_kind, args.positivity_policy)
    tc = TrendConfig(args.trend_window, args.edge_policy)
    return weights, opt, fc, tc


def cmd_stylize(args) -> None:
    if args.n < 1:
        raise ConfigError(f"--n must be positive, got {args.n}")
    if args.jobs < 1:
        raise ConfigError(f"--jobs must be positive, got {args.jobs}")
    weights, opt, fc, tc = _configs(args)
    style = read_windows_csv(args.style)
    content = read_windows_csv(args.content)
    if args.perturb:
        shock = ShockConfig.relative_to(content, args.shock_amp, args.shock_shift, seed=args.seed)
        content = perturb_dataset(content, shock)
    out = generate_stylized_dataset(content, style, args.n, weights, opt, fc, tc, args.seed, args.jobs, args.skip_errors)
    write_windows_csv(args.out, out)
    write_manifest(args.out, args)
    _summary(args, f"wrote {len(out)} stylized windows to {args.out}")


def cmd_augment(args) -> None:
    ds = read_windows_csv(args.input)
    out = augment_dataset(ds, args.method, args.seed, sigma=args.sigma, knots=args.knots, warp_std=args.warp_std)
    write_windows_csv(args.out, out)
    write_manifest(args.out, args)
    _summary(args, f"wrote {len(out)} {args.method} windows to {args.out}")


def cmd_eval(args) -> None:
    cfg = EvalConfig(args.k, args.ridge, args.augment_level)
    report = evaluate(read_windows_csv(args.real_train), read_windows_csv(args.real_test), read_windows_csv(args.synth), cfg)
    record = report.to_record()
    out = Path(args.out)
    if out.suffix in (".json", ".jsonl"):
        out.write_text(json.dumps({k: float(v) for k, v in record.items()}) + "\n")
    else:
        out.write_text("key,value\n" + "".join(f"{k},{v!r}\n" for k, v in record.items()))
    write_manifest(args.out, args)
    _summary(args, " ".join(f"{k}={v:.4f}" for k, v in record.items()))


def cmd_replay(args) -> None:
    parser = build_parser()
    argv = manifest_argv(parser, read_manifest(args.manifest))
    if args.quiet:
        argv = ["--quiet", *argv]
    if args.jobs is not None:
        argv = ["--jobs", str(args.jobs), *argv]
    inner = parser.parse_args(argv)
    inner.func(inner)


# ------------------------------------------------------------------ parser


def _add_stylize_options(p) -> None:
    w, o, f, t = LossWeights(), OptimizerConfig(), FeatureConfig(), TrendConfig()
    p.add_argument("--alpha", type=float, default=w.alpha, help="content weight")
    p.add_argument("--beta", type=float, default=w.beta, help="style weight")
    p.add_argument("--gamma", type=float, default=w.gamma, help="smoothness weight")
    p.add_argument("--iterations", type=int, default=o.iterations)
    p.add_argument("--base-lr", type=float, default=o.base_lr)
    p.add_argument("--rms-decay", type=float, default=o.rms_decay)
    p.add_argument("--rms-epsilon", type=float, default=o.rms_epsilon)
    p.add_argument("--lr-scale", choices=LR_SCALES, default=o.lr_scale, help="step size relative to the style window's scale, or absolute")
    p.add_argument("--return-last", action="store_true", help="return the final iterate instead of the best one")
    p.add_argument("--tau-max", type=int, default=f.tau_max)
    p.add_argument("--return-kind", choices=RETURN_KINDS, default=f.return_kind)
    p.add_argument("--positivity-policy", choices=POSITIVITY_POLICIES, default=f.positivity_policy)
    p.add_argument("--trend-window", type=int, default=t.window)
    p.add_argument("--edge-policy", choices=EDGE_POLICIES, default=t.edge_policy)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tsstyle", description="Synthetic time series by style transfer.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--quiet", action="store_true", help="suppress the summary line")
    parser.add_argument("--verbose", action="store_true", help="log progress to standard error")
    parser.add_argument("--jobs", type=int, default=1, help="worker processes for stylization")
    sub = parser.add_subparsers(dest="command", required=True)

    d = SwitchingArConfig()
    p = sub.add_parser("gen", help="generate a synthetic series")
    p.add_argument("kind", choices=["switching-ar1"])
    p.add_argument("--t", type=int, default=d.horizon, help="number of values")
    p.add_argument("--a10", type=float, default=d.a10)
    p.add_argument("--a11", type=float, default=d.a11)
    p.add_argument("--a20", type=float, default=d.a20)
    p.add_argument("--a21", type=float, default=d.a21)
    p.add_argument("--switch-fraction", type=float, default=d.switch_fraction)
    p.add_argument("--noise-std", type=float, default=d.noise_std)
    p.add_argument("--seed", type=_seed, default=d.seed)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("window", help="cut a series into sliding windows and split them")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--column", default="0", help="column name or 0-based index")
    p.add_argument("--w", type=int, default=30, help="window size (windows hold w + 1 values)")
    p.add_argument("--train", type=int, default=2400, help="number of training windows")
    p.add_argument("--scale", choices=["minmax", "none"], default="minmax", help="rescale the series onto [0, 1] first")
    p.add_argument("--out-prefix", required=True)
    p.set_defaults(func=cmd_window)

    p = sub.add_parser("stylize", help="generate a stylized window dataset")
    p.add_argument("--content", required=True, help="content window CSV")
    p.add_argument("--style", required=True, help="style window CSV")
    p.add_argument("--n", type=int, required=True, help="number of samples")
    _add_stylize_options(p)
    p.add_argument("--perturb", action="store_true", help="add a random step shock to each content window")
    p.add_argument("--shock-amp", type=_range, default=(-2.0, 2.0), help="amplitude range in units of the mean window std")
    p.add_argument("--shock-shift", type=_int_range, default=None, help="step position range (default: middle half)")
    p.add_argument("--skip-errors", action="store_true", help="drop failing samples instead of aborting")
    p.add_argument("--seed", type=_seed, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_stylize)

    p = sub.add_parser("augment", help="augment windows with a classic transformation")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--method", choices=AUGMENT_METHODS, required=True)
    p.add_argument("--sigma", type=float, default=0.03, help="jitter noise std")
    p.add_argument("--knots", type=int, default=4, help="time-warp segments")
    p.add_argument("--warp-std", type=float, default=0.2, help="time-warp log-speed std")
    p.add_argument("--seed", type=_seed, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_augment)

    e = EvalConfig()
    p = sub.add_parser("eval", help="score a synthetic dataset against real windows")
    p.add_argument("--real-train", required=True)
    p.add_argument("--real-test", required=True)
    p.add_argument("--synth", required=True)
    p.add_argument("--k", type=int, default=e.k)
    p.add_argument("--ridge", type=float, default=e.ridge)
    p.add_argument("--augment-level", type=int, default=None, help="train on real windows plus this many synthetic ones")
    p.add_argument("--out", required=True, help=".json/.jsonl for a JSON record, otherwise key,value CSV")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("replay", help="re-run the command recorded in a manifest")
    p.add_argument("manifest")
    p.set_defaults(func=cmd_replay)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "replay" and "--jobs" not in (argv if argv is not None else sys.argv[1:]):
        args.jobs = None
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        args.func(args)
    except (UsageError, *USAGE_ERRORS) as exc:
        print(f"tsstyle {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except (TsStyleError, OSError) as exc:
        print(f"tsstyle {args.command}: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
