"""Command line entry point: ``duality-lab <scenario> [options]``."""
from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

from .experiments import RUNNERS, ScenarioSpec, render, run_selfcheck


def parse_list(text: str) -> list[float]:
    return [float(x) for x in text.replace(",", " ").split()]


def read_scenario_file(path: str | Path) -> dict[str, str]:
    """Read ``key = value`` lines; ``#`` starts a comment."""
    values = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        values[key.replace("_", "-")] = value
    return values


_FILE_KEYS = {
    "tan2a": ("tan2a", parse_list),
    "sin2n": ("sin2n", float),
    "theta-a": ("theta_a", parse_list),
    "theta-n": ("theta_n", float),
    "strategy": ("strategy", str),
    "photons": ("photons", float),
    "phases": ("phases", int),
    "repeats": ("repeats", int),
    "seed": ("seed", int),
    "loop-visibility": ("loop_visibility", float),
    "k-sigma": ("k_sigma", float),
    "workers": ("workers", int),
    "out": ("out", str),
    "format": ("format", str),
    "exact": ("exact", lambda s: s.strip().lower() in ("1", "true", "yes", "on")),
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="scenario file with key = value lines")
    common.add_argument("--tan2a", type=parse_list, help="symmetry values tan(2 theta_a), comma separated")
    common.add_argument("--sin2n", type=float, help="overlap sin(2 theta_n)")
    common.add_argument("--theta-a", type=parse_list, help="raw H1 angles in degrees (instead of --tan2a)")
    common.add_argument("--theta-n", type=float, help="raw H2 angle in degrees (instead of --sin2n)")
    common.add_argument("--strategy", choices=("uqsd", "med", "both"))
    common.add_argument("--photons", type=float, help="mean photons per setting")
    common.add_argument("--phases", type=int, help="phase points per sweep")
    common.add_argument("--repeats", type=int)
    common.add_argument("--seed", type=int)
    common.add_argument("--loop-visibility", type=float)
    common.add_argument("--k-sigma", type=float, help="pass if residual <= k * sigma")
    common.add_argument("--exact", action="store_true", default=None, help="expected counts, no sampling")
    common.add_argument("--workers", type=int)
    common.add_argument("--out", help="output file (default stdout)")
    common.add_argument("--format", choices=("csv", "json"))

    parser = argparse.ArgumentParser(prog="duality-lab", description=__doc__)
    sub = parser.add_subparsers(dest="scenario", required=True)
    sub.add_parser("phase-sweep", parents=[common], help="normalized detector counts against phase")
    sub.add_parser("duality-curve", parents=[common], help="V, D and duality sums over symmetry")
    sub.add_parser("mutual-info", parents=[common], help="mutual information for MED and UQSD")
    check = sub.add_parser("selfcheck", parents=[common], help="run the invariant suite")
    check.add_argument("--perturb-hwp", action="store_true", help="negative control: wrong plate convention")
    return parser


def spec_from_args(args: argparse.Namespace) -> ScenarioSpec:
    fields: dict = {}
    if args.config:
        for key, value in read_scenario_file(args.config).items():
            if key not in _FILE_KEYS:
                raise ValueError(f"unknown scenario key {key!r}")
            name, conv = _FILE_KEYS[key]
            fields[name] = conv(value)
    for _, (name, _conv) in _FILE_KEYS.items():
        value = getattr(args, name, None)
        if value is not None:
            fields[name] = value

    theta_a = fields.pop("theta_a", None)
    theta_n = fields.pop("theta_n", None)
    if theta_a is not None:
        fields["tan2a"] = [math.tan(2 * math.radians(t)) for t in theta_a]
    if theta_n is not None:
        fields["sin2n"] = math.sin(2 * math.radians(theta_n))
    if args.scenario == "phase-sweep":
        fields.setdefault("strategy", "uqsd")
    return ScenarioSpec(
        scenario=args.scenario, perturb_hwp=getattr(args, "perturb_hwp", False), **fields
    )


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8", newline="\n")
    else:
        sys.stdout.write(text)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        spec = spec_from_args(args)
    except ValueError as exc:
        parser.error(str(exc))

    if spec.scenario == "selfcheck":
        summary = run_selfcheck(spec)
        _emit(json.dumps(summary, indent=1) + "\n", spec.out)
        if spec.out:
            print(f"selfcheck: {summary['n_checks'] - summary['n_failed']}/{summary['n_checks']} passed",
                  file=sys.stderr)
        return 0 if summary["passed"] else 1

    try:
        rows = RUNNERS[spec.scenario](spec)
    except ValueError as exc:
        parser.error(str(exc))
    _emit(render(rows, spec.format), spec.out)
    n_pass = sum(r.passed for r in rows)
    print(f"{spec.scenario}: {n_pass}/{len(rows)} rows within {spec.k_sigma:g} sigma", file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
