"""Command-line entry point: ``scmqkd {noise-profile,keyrate,gain,verify}``."""
from __future__ import annotations

import argparse
import contextlib
import logging
import sys
from pathlib import Path
from unittest import mock

from . import intermod, spectrum, verify
from .config import ConfigError, build_config, read_config_file
from .experiments import gain_table, keyrate_table, noise_profile_table
from .plotting import plot_gain, plot_keyrate, plot_noise_profile

log = logging.getLogger("scmqkd")

EXIT_OK, EXIT_VALIDATION, EXIT_IO, EXIT_VERIFY = 0, 1, 2, 3

COMMANDS = {
    "noise-profile": (noise_profile_table, plot_noise_profile),
    "keyrate": (keyrate_table, plot_keyrate),
    "gain": (gain_table, plot_gain),
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="key=value file; flags override it")
    common.add_argument("--plan", dest="plans",
                        help="comma list of low|medium|high|custom:N")
    common.add_argument("--mbar", type=float, help="mean modulation index")
    common.add_argument("--va", type=float, help="modulation variance V_A (SNU)")
    common.add_argument("--mlo", type=float, help="LO modulation index")
    common.add_argument("--preset", help="parameter preset (default paper-sec6)")
    common.add_argument("--beta", type=float, help="reconciliation efficiency")
    common.add_argument("--eps", type=float, help="channel excess noise (SNU)")
    common.add_argument("--eta", type=float, help="detector efficiency")
    common.add_argument("--vel", type=float, help="electronic noise (SNU)")
    common.add_argument("--frep", type=float, help="repetition rate [Hz]")
    common.add_argument("--sweep", choices=["distance", "mbar"])
    common.add_argument("--from", dest="start", type=float)
    common.add_argument("--to", dest="stop", type=float)
    common.add_argument("--step", type=float)
    common.add_argument("--distance", type=float, help="fixed distance [km] for mbar sweeps")
    common.add_argument("--out", type=Path, help="output CSV (stdout when omitted)")
    common.add_argument("--seed", type=int)
    common.add_argument("--trials", type=int)
    common.add_argument("--workers", type=int)
    common.add_argument("--svg", action="store_true", default=None,
                        help="also render an SVG figure next to --out")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="scmqkd", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("noise-profile", parents=[common],
                   help="extra source noise per channel, or first/last channel vs mbar")
    sub.add_parser("keyrate", parents=[common], help="per-channel and total key rate vs distance")
    sub.add_parser("gain", parents=[common], help="multi-channel gain vs mbar or distance")
    v = sub.add_parser("verify", parents=[common], help="run the oracle suite")
    v.add_argument("--inject-fault", choices=["m2"], help=argparse.SUPPRESS)
    return p


_DEFAULT_PLANS = {"noise-profile": "high", "keyrate": "low,medium,high", "gain": "low,medium,high"}
_NOT_CONFIG = {"command", "config", "verbose", "inject_fault"}


def _config(args):
    file_settings = read_config_file(args.config) if args.config else {}
    overrides = {k: v for k, v in vars(args).items() if k not in _NOT_CONFIG}
    if "plans" not in file_settings and "plan" not in file_settings and overrides.get("plans") is None:
        overrides["plans"] = _DEFAULT_PLANS.get(args.command, "high")
    return build_config(file_settings, overrides)


def _m2_off_by_one(n, k):
    spectrum.check_index(n, k)
    return 2 * n - k


@contextlib.contextmanager
def _fault(name):
    if name != "m2":
        yield
        return
    with mock.patch.object(spectrum, "m2_count", _m2_off_by_one), \
            mock.patch.object(intermod, "m2_count", _m2_off_by_one):
        yield


def _emit(text: str, out: Path | None) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    with open(out, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = _config(args)
    except ConfigError as exc:
        print(f"scmqkd: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_VALIDATION

    if args.command == "verify":
        with _fault(getattr(args, "inject_fault", None)):
            checks = verify.run_checks(cfg.seed, cfg.trials, cfg.workers, cfg.mbar, cfg.va)
        text = verify.report(checks)
        try:
            _emit(text, cfg.out)
        except OSError as exc:
            print(f"scmqkd: cannot write {cfg.out}: {exc.strerror}", file=sys.stderr)
            return EXIT_IO
        if cfg.out is not None:
            sys.stdout.write(text)
        return EXIT_OK if all(c.passed for c in checks) else EXIT_VERIFY

    make_table, plot = COMMANDS[args.command]
    try:
        table = make_table(cfg)
    except ValueError as exc:
        print(f"scmqkd: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    table.provenance = {"command": args.command, **table.provenance}
    try:
        _emit(table.to_csv(), cfg.out)
        if cfg.svg:
            svg = cfg.out.with_suffix(".svg")
            plot(table, svg)
            log.info("wrote %s", svg)
    except OSError as exc:
        print(f"scmqkd: cannot write {exc.filename or cfg.out}: {exc.strerror}", file=sys.stderr)
        return EXIT_IO
    log.info("wrote %d rows", len(table.rows))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
