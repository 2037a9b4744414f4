"""Command-line interface.

Exit codes: 0 success, 2 usage/validation/parse errors, 3 domain failures.
"""

from __future__ import annotations

import argparse
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import diagnostics, security
from .diagnostics import InsufficientDataError, NormTrace, TraceParseError
from .ntru import (
    KeygenExhausted,
    KeygenPolicy,
    decrypt,
    encrypt,
    keygen,
    random_ternary,
    write_private_key,
    write_public_key,
)
from .polyring import RingParams
from .sampler import DEFAULT_STEPS, GaussianConfig, run_chain

EXIT_USAGE = 2
EXIT_DOMAIN = 3

SUMMARY_HEADER = "N,sigma,seed,mean_norm,acceptance_rate,convergence_iteration,log10_q_security"


class UsageError(Exception):
    pass


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return v


def _nonneg_int(text: str) -> int:
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError(f"expected a non-negative integer, got {text}")
    return v


def _positive_float(text: str) -> float:
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text}")
    return v


def _dimension(text: str) -> int:
    v = int(text)
    if v < 2:
        raise argparse.ArgumentTypeError(f"n must be >= 2, got {text}")
    return v


def _conv_text(conv: int | None) -> str:
    return "NotConverged" if conv is None else str(conv)


# --- sample / analyze ------------------------------------------------------


def cmd_sample(args) -> int:
    burn_in = args.burn_in if args.burn_in is not None else args.steps // 5
    if burn_in >= args.steps:
        raise UsageError(f"--burn-in must be smaller than --steps ({args.steps})")
    config = GaussianConfig(N=args.n, sigma=args.sigma, proposal_sigma=args.proposal_sigma,
                            steps=args.steps, burn_in=burn_in, seed=args.seed)
    _, trace = run_chain(config)
    trace.to_csv(args.out)
    print(f"mean_norm={trace.mean_norm():.6f} acceptance_rate={trace.acceptance_rate():.6f}")
    return 0


def _hist_path(trace_path: Path) -> Path:
    name = trace_path.name
    stem = name[: -len(".csv")] if name.endswith(".csv") else name
    return trace_path.with_name(stem + ".hist.csv")


def cmd_analyze(args) -> int:
    path = Path(args.trace)
    if not path.is_file():
        raise UsageError(f"trace file not found: {path}")
    trace = NormTrace.from_csv(path, burn_in=args.burn_in)
    if len(trace) == 0:
        raise UsageError(f"{path}: trace has no rows")
    if trace.burn_in >= len(trace):
        raise UsageError(f"--burn-in must be smaller than the trace length ({len(trace)})")
    summary = diagnostics.summarize(trace, args.bins, args.window, args.delta)
    summary.to_csv(_hist_path(path))
    sys.stdout.write(diagnostics.format_report(trace, summary))
    return 0


# --- table -----------------------------------------------------------------


def cmd_table(args) -> int:
    if args.builtin_table1:
        configs = list(security.TABLE1_CONFIGS)
    else:
        try:
            text = Path(args.config).read_text()
        except OSError as exc:
            raise UsageError(f"cannot read config: {exc}") from None
        configs = security.parse_config(text, source=args.config)
    sys.stdout.write(security.format_table(security.build_table(configs, kappa=args.kappa)))
    return 0


# --- keys ------------------------------------------------------------------


def _keypair_from_args(args):
    params = RingParams(args.n, args.q, args.p)
    policy = KeygenPolicy(key_sigma=args.key_sigma, max_resamples=args.max_resamples,
                          margin_check=not args.no_margin_check)
    return keygen(params, policy, seed=args.seed)


def cmd_keygen(args) -> int:
    kp = _keypair_from_args(args)
    pub, priv = Path(args.out_prefix + ".pub"), Path(args.out_prefix + ".priv")
    write_public_key(pub, kp.params, kp.h)
    write_private_key(priv, kp)
    print(f"public={pub} private={priv}")
    return 0


def cmd_roundtrip(args) -> int:
    kp = _keypair_from_args(args)
    rng = np.random.default_rng([args.seed, 1])
    successes = 0
    for _ in range(args.trials):
        m = random_ternary(args.n, rng)
        r = random_ternary(args.n, rng)
        successes += decrypt(kp, encrypt(kp.h, m, r, kp.params)) == m
    print(f"trials={args.trials} successes={successes}")
    return 0


# --- sweep -----------------------------------------------------------------


@dataclass(frozen=True)
class SweepSpec:
    dims: tuple[int, ...]
    sigmas: tuple[float, ...]
    seeds: tuple[int, ...]
    output_dir: Path
    steps: int = DEFAULT_STEPS
    burn_in: int | None = None
    bins: int = diagnostics.DEFAULT_BINS
    window: int = diagnostics.DEFAULT_WINDOW
    delta: float = diagnostics.DEFAULT_DELTA

    def __post_init__(self):
        if not (self.dims and self.sigmas and self.seeds):
            raise ValueError("dims, sigmas and seeds must be non-empty")
        if any(n < 2 for n in self.dims) or any(not s > 0 for s in self.sigmas):
            raise ValueError("dims must be >= 2 and sigmas positive")
        if self.steps < 4 * self.window:
            raise ValueError(f"steps must be at least 4 * window = {4 * self.window}")

    def jobs(self) -> list[tuple[int, float, int]]:
        return sorted((n, s, seed) for n in self.dims for s in self.sigmas for seed in self.seeds)


_LIST_KEYS = {"dims": int, "sigmas": float, "seeds": int}
_SCALAR_KEYS = {"steps": int, "burn_in": int, "bins": int, "window": int, "delta": float}


def parse_sweep_spec(text: str, source: str = "<spec>") -> SweepSpec:
    """Flat ``key=value`` lines, lists comma-separated, ``#`` comments."""
    fields: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = (part.strip() for part in line.partition("="))
        try:
            if not sep:
                raise ValueError("expected key=value")
            if key in _LIST_KEYS:
                fields[key] = tuple(_LIST_KEYS[key](v) for v in value.split(",") if v.strip())
            elif key in _SCALAR_KEYS:
                fields[key] = _SCALAR_KEYS[key](value)
            elif key == "output_dir":
                fields[key] = Path(value)
            else:
                raise ValueError(f"unknown key {key!r}")
        except ValueError as exc:
            raise ValueError(f"{source}:{lineno}: {exc}") from None
    missing = {"dims", "sigmas", "seeds", "output_dir"} - fields.keys()
    if missing:
        raise ValueError(f"{source}: missing keys: {', '.join(sorted(missing))}")
    try:
        return SweepSpec(**fields)
    except ValueError as exc:
        raise ValueError(f"{source}: {exc}") from None


def _run_one(spec: SweepSpec, N: int, sigma: float, seed: int) -> str:
    config = GaussianConfig(N=N, sigma=sigma, steps=spec.steps, burn_in=spec.burn_in, seed=seed)
    _, trace = run_chain(config)
    summary = diagnostics.summarize(trace, spec.bins, spec.window, spec.delta)
    stem = spec.output_dir / f"N{N}_sigma{sigma:g}_seed{seed}"
    trace.to_csv(stem.with_name(stem.name + ".trace.csv"))
    summary.to_csv(stem.with_name(stem.name + ".hist.csv"))
    stem.with_name(stem.name + ".analysis.txt").write_text(diagnostics.format_report(trace, summary))
    _, log10_q = security.log_q_security(N, sigma)
    return (f"{N},{sigma:g},{seed},{trace.mean_norm():.6f},{trace.acceptance_rate():.6f},"
            f"{_conv_text(summary.convergence_iteration)},{log10_q:.2f}")


def _ensure_writable(directory: Path) -> None:
    try:
        directory.mkdir(parents=True, exist_ok=True)
        probe = directory / ".write_probe"
        probe.write_text("")
        probe.unlink()
    except OSError as exc:
        raise UsageError(f"output_dir {directory} is not writable: {exc}") from None


def run_sweep(spec: SweepSpec, jobs: int = 1) -> Path:
    """Run every (N, sigma, seed) chain and write ``summary.csv``; returns its path."""
    _ensure_writable(spec.output_dir)
    work = spec.jobs()
    if jobs <= 1:
        rows = [_run_one(spec, *w) for w in work]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_run_one, *zip(*[(spec, *w) for w in work])))
    out = spec.output_dir / "summary.csv"
    out.write_text("\n".join([SUMMARY_HEADER, *rows]) + "\n")
    return out


def cmd_sweep(args) -> int:
    try:
        text = Path(args.spec).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read spec: {exc}") from None
    spec = parse_sweep_spec(text, source=args.spec)
    out = run_sweep(spec, args.jobs)
    print(f"summary={out} chains={len(spec.jobs())}")
    return 0


# --- parser ----------------------------------------------------------------


def _add_key_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--n", type=_dimension, required=True)
    p.add_argument("--q", type=_positive_int, default=2048)
    p.add_argument("--p", type=_positive_int, default=3)
    p.add_argument("--key-sigma", type=_positive_float, default=1.2)
    p.add_argument("--max-resamples", type=_positive_int, default=100)
    p.add_argument("--no-margin-check", action="store_true")
    p.add_argument("--seed", type=_nonneg_int, default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ntru-mcmc", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sample", help="run one chain and write its norm trace")
    p.add_argument("--n", type=_dimension, required=True)
    p.add_argument("--sigma", type=_positive_float, required=True)
    p.add_argument("--steps", type=_positive_int, default=DEFAULT_STEPS)
    p.add_argument("--burn-in", type=_nonneg_int, default=None)
    p.add_argument("--proposal-sigma", type=_positive_float, default=None)
    p.add_argument("--seed", type=_nonneg_int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("analyze", help="histogram, peaks and convergence of a trace")
    p.add_argument("--trace", required=True)
    p.add_argument("--bins", type=_positive_int, default=diagnostics.DEFAULT_BINS)
    p.add_argument("--window", type=_positive_int, default=diagnostics.DEFAULT_WINDOW)
    p.add_argument("--delta", type=_positive_float, default=diagnostics.DEFAULT_DELTA)
    p.add_argument("--burn-in", type=_nonneg_int, default=None)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("table", help="security metric table as CSV")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--config")
    src.add_argument("--builtin-table1", action="store_true")
    p.add_argument("--kappa", type=_positive_float, default=security.DEFAULT_KAPPA)
    p.set_defaults(func=cmd_table)

    p = sub.add_parser("keygen", help="generate an NTRU key pair")
    _add_key_args(p)
    p.add_argument("--out-prefix", default="ntru_key")
    p.set_defaults(func=cmd_keygen)

    p = sub.add_parser("roundtrip", help="encrypt/decrypt random ternary messages")
    _add_key_args(p)
    p.add_argument("--trials", type=_positive_int, default=1000)
    p.set_defaults(func=cmd_roundtrip)

    p = sub.add_parser("sweep", help="run a grid of chains")
    p.add_argument("--spec", required=True)
    p.add_argument("--jobs", type=_positive_int, default=1)
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "analyze" and args.bins < 2:
            raise UsageError("--bins must be at least 2")
        return args.func(args)
    except KeygenExhausted as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except (UsageError, TraceParseError, InsufficientDataError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
