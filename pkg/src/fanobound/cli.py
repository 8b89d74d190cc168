"""Command-line front end.

Exit statuses: 0 success (vacuous bounds included), 1 soundness violation
found by ``verify``, 2 unreadable or malformed input, 3 validation failure
(row sums, loss range, parameter domains, transcript cap).

Reports go to stdout and diagnostics to stderr.  ``FANOBOUND_SEED`` overrides
the default seed of ``verify`` and ``mc``.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Optional, Sequence

from . import __version__
from .bounds import (
    DEFAULT_T_REFINE,
    BoundReport,
    cvar_lower_bound,
    cvar_lower_bound_kl_pinsker,
    hinge_lower_bound,
    one_sided_transform_bound,
    quantile_fano_bound,
    tail_to_expectation,
    two_sided_transform_bound,
)
from .divergences import as_spec
from .errors import InstanceFormatError, ValidationError
from .inversion import DEFAULT_TOL
from .io import load_bandit, load_instance, load_reference
from .isdm import FiniteISDM, compile_bandit, mixture_reference, mutual_information
from .transforms import parse_transform
from .verify import DEFAULT_SEED, MC_SEED, FuzzConfig, McSettings, fuzz_soundness, mc_transform_estimate, summary_json

EXIT_OK, EXIT_VIOLATION, EXIT_FORMAT, EXIT_VALIDATION = 0, 1, 2, 3
SEED_ENV = "FANOBOUND_SEED"
BOUND_KINDS = ("two-sided", "one-sided", "quantile", "hinge", "cvar", "cvar-pinsker")


class UsageError(Exception):
    """Bad flag combination or unparsable flag value (exit 2)."""


def _env_seed(default: int) -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None or raw == "":
        return default
    try:
        seed = int(raw, 0)
    except ValueError:
        raise UsageError(f"{SEED_ENV} must be an integer, got {raw!r}") from None
    if seed < 0:
        raise UsageError(f"{SEED_ENV} must be nonnegative")
    return seed


def _positive_float(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not v > 0:
        raise argparse.ArgumentTypeError(f"must be positive, got {text!r}")
    return v


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {text!r}")
    return v


def _nonneg_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v < 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {text!r}")
    return v


def _add_bound_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--transform", help="kind:key=value,... e.g. hinge:t=2,lmax=10 or indicator:delta=1")
    p.add_argument("--delta", type=_positive_float, help="loss level for quantile bounds")
    p.add_argument("--t", type=float, help="hinge threshold (loss units)")
    p.add_argument("--alpha", type=float, help="CVaR level in (0, 1)")
    p.add_argument("--div", default="kl", help="kl, tv, chi2 or hellinger (default kl)")
    p.add_argument(
        "--ref",
        default=None,
        help="mixture, candidates, model:<i> or a JSON file with a reference law "
        "(default: candidates for one-sided/quantile, mixture otherwise)",
    )
    p.add_argument("--tol", type=_positive_float, default=DEFAULT_TOL, help="bisection tolerance")
    p.add_argument("--check-tol", type=_positive_float, default=1e-8, help="tolerance of the exact self-check")
    p.add_argument("--t-refine", type=_positive_int, default=DEFAULT_T_REFINE, help="subdivisions per atom gap")
    p.add_argument("--format", choices=("json", "csv", "table"), default="json")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fanobound", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    bound = sub.add_parser("bound", help="compute a bound on an instance file")
    bound_sub = bound.add_subparsers(dest="kind", required=True)
    for kind in BOUND_KINDS:
        p = bound_sub.add_parser(kind)
        _add_bound_options(p)
        p.add_argument("instance", help="instance JSON file")

    bandit = sub.add_parser("bandit", help="compile a bandit spec and compute a bound")
    bandit.add_argument("spec", help="bandit spec JSON file")
    bandit.add_argument("--transcript-cap", type=_positive_int, default=None)
    bandit_sub = bandit.add_subparsers(dest="kind", required=True)
    for kind in BOUND_KINDS:
        _add_bound_options(bandit_sub.add_parser(kind))

    verify = sub.add_parser("verify", help="run the randomized soundness suite")
    verify.add_argument("--iterations", type=_nonneg_int, default=FuzzConfig.iterations)
    verify.add_argument("--seed", type=_nonneg_int, default=None, help=f"master seed (default {DEFAULT_SEED})")
    verify.add_argument("--workers", type=_positive_int, default=1)
    verify.add_argument("--tol", type=_positive_float, default=FuzzConfig.tol)
    verify.add_argument("--check-tol", type=_positive_float, default=FuzzConfig.check_tol)
    verify.add_argument("--t-refine", type=_positive_int, default=FuzzConfig.t_refine)

    mc = sub.add_parser("mc", help="Monte Carlo estimate of E[phi(L)] via the one-bit statistic")
    mc.add_argument("--transform", required=True)
    mc.add_argument("--samples", type=_positive_int, default=100_000)
    mc.add_argument("--seed", type=_nonneg_int, default=None, help=f"seed (default {MC_SEED})")
    mc.add_argument("--stream", type=_nonneg_int, default=0, help="sub-stream id")
    mc.add_argument("instance")
    return parser


def _reference(arg: Optional[str], instance: FiniteISDM):
    """Single reference for mixture-style bounds."""
    if arg is None or arg == "mixture":
        return None
    if arg == "candidates":
        raise UsageError("--ref candidates only applies to one-sided and quantile bounds")
    if arg.startswith("model:"):
        try:
            i = int(arg.split(":", 1)[1])
        except ValueError:
            raise UsageError(f"bad model index in --ref {arg!r}") from None
        if not 0 <= i < instance.n_models:
            raise UsageError(f"--ref model index must lie in [0, {instance.n_models})")
        return instance.obs_laws[i]
    return load_reference(arg, instance.n_outcomes)


def _candidate_args(arg: Optional[str], instance: FiniteISDM, extra: list) -> tuple[list, bool]:
    if arg is None or arg == "candidates":
        return extra, True
    if arg == "mixture":
        return [mixture_reference(instance)], False
    return [_reference(arg, instance)], False


def _need(value, flag: str, kind: str):
    if value is None:
        raise UsageError(f"{kind} needs {flag}")
    return value


def _transform(text: str, l_max: float):
    try:
        return parse_transform(text, l_max=l_max)
    except ValidationError:
        raise
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def run_bound(kind: str, args, instance: FiniteISDM, extra_refs: list) -> BoundReport:
    try:
        spec = as_spec(args.div)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    tol, ctol = args.tol, args.check_tol
    if kind in ("two-sided", "one-sided"):
        transform = _transform(_need(args.transform, "--transform", kind), instance.l_max)
        if kind == "two-sided":
            return two_sided_transform_bound(instance, transform, spec, _reference(args.ref, instance), tol, ctol)
        refs, defaults = _candidate_args(args.ref, instance, extra_refs)
        return one_sided_transform_bound(instance, transform, spec, refs, tol, ctol, include_defaults=defaults)
    if kind == "quantile":
        delta = _need(args.delta, "--delta", kind)
        refs, defaults = _candidate_args(args.ref, instance, extra_refs)
        report = quantile_fano_bound(instance, delta, spec, refs, tol, ctol, include_defaults=defaults)
        # the Markov consequence rides along in the same report
        report.quantities["expected_loss_lower"] = tail_to_expectation(report, check_tol=ctol).bound
        return report
    if kind == "hinge":
        t = _need(args.t, "--t", kind)
        return hinge_lower_bound(instance, t, spec, _reference(args.ref, instance), tol, ctol)
    alpha = _need(args.alpha, "--alpha", kind)
    if kind == "cvar":
        return cvar_lower_bound(instance, alpha, spec, _reference(args.ref, instance), args.t_refine, tol, ctol)
    if args.div.lower() != "kl" or args.ref not in (None, "mixture"):
        raise UsageError("cvar-pinsker always uses KL and the mixture reference")
    return cvar_lower_bound_kl_pinsker(instance, alpha, args.t_refine, tol, ctol)


def render(report: BoundReport, fmt: str) -> str:
    if fmt == "csv":
        return report.to_csv().rstrip("\n")
    if fmt == "table":
        return report.to_table()
    return report.to_json()


def _cmd_bound(args) -> int:
    instance, extra = load_instance(args.instance)
    print(render(run_bound(args.kind, args, instance, extra), args.format))
    return EXIT_OK


def _cmd_bandit(args) -> int:
    spec = load_bandit(args.spec, args.transcript_cap)
    instance = compile_bandit(spec)
    report = run_bound(args.kind, args, instance, [])
    report.quantities["n_transcripts"] = instance.n_outcomes
    report.quantities["l_max"] = instance.l_max
    report.quantities["mutual_information"] = mutual_information(instance)
    print(render(report, args.format))
    return EXIT_OK


def _cmd_verify(args) -> int:
    seed = args.seed if args.seed is not None else _env_seed(DEFAULT_SEED)
    config = FuzzConfig(
        iterations=args.iterations,
        seed=seed,
        workers=args.workers,
        tol=args.tol,
        check_tol=args.check_tol,
        t_refine=args.t_refine,
    )
    summary = fuzz_soundness(config)
    print(summary_json(summary))
    if summary["violations"]:
        for f in summary["failures"]:
            print(f"violation: {f['check']} at seed {f['seed']} ({f.get('divergence', '')})", file=sys.stderr)
        return EXIT_VIOLATION
    return EXIT_OK


def _cmd_mc(args) -> int:
    instance, _ = load_instance(args.instance)
    transform = _transform(args.transform, instance.l_max)
    seed = args.seed if args.seed is not None else _env_seed(MC_SEED)
    settings = McSettings(samples=args.samples, seed=seed, stream_id=args.stream)
    est, se = mc_transform_estimate(instance, transform, settings)
    print(json.dumps({
        "transform": transform.label(),
        "estimate": est,
        "std_error": se,
        "samples": settings.samples,
        "seed": settings.seed,
        "stream_id": settings.stream_id,
    }, indent=2))
    return EXIT_OK


_COMMANDS = {"bound": _cmd_bound, "bandit": _cmd_bandit, "verify": _cmd_verify, "mc": _cmd_mc}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (InstanceFormatError, UsageError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FORMAT
    except ValueError as exc:  # ValidationError and domain errors from the numerics
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
