"""Command-line harness.

Subcommands: ``design``, ``interpolate``, ``regress``, ``rates``, ``bq``,
``bo`` (all driven by a JSON config), ``accept`` (the full acceptance
suite), and ``list`` (registry contents).  Exit codes: 0 all verdicts pass
or non-gating, 1 a gated verdict failed, 2 config/validation error, 3
numerical abort.

BLAS thread pools are pinned to one thread before numpy is first imported
so that ``--threads`` (recorded, otherwise unused) can never change
results; per-experiment determinism comes from derived seeds.
"""

from __future__ import annotations

import argparse
import filecmp
import json
import os
import sys

_ENV_OUT = "GPRATES_OUT_DIR"


def _pin_blas_threads():
    for var in (
        "OPENBLAS_NUM_THREADS",
        "MKL_NUM_THREADS",
        "OMP_NUM_THREADS",
        "NUMEXPR_NUM_THREADS",
    ):
        os.environ.setdefault(var, "1")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gprates",
        description="Kernel interpolation/regression convergence-rate experiments",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_config_cmd(name: str, help_text: str):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="path to a JSON experiment config")
        p.add_argument("--seed", type=int, default=None, help="override the config seed")
        p.add_argument("--out", default=None, help="output directory (default: cwd)")
        p.add_argument("--threads", type=int, default=1,
                       help="worker hint; recorded, must not change results")
        return p

    add_config_cmd("run", "run a config of any kind")
    add_config_cmd("design", "generate a design and its metrics")
    add_config_cmd("interpolate", "single interpolation fit diagnostics")
    add_config_cmd("regress", "single regression fit diagnostics")
    add_config_cmd("rates", "convergence-rate ladder experiment")
    add_config_cmd("bq", "quadrature error ladder")
    add_config_cmd("bo", "stabilized optimization runs")

    p = sub.add_parser("accept", help="run the acceptance suite")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", default=None)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--skip-determinism", action="store_true",
                   help="skip the byte-identical rerun check")

    sub.add_parser("list", help="list registry targets, densities, designs, experiments")
    return parser


def _resolve_out(cli_out) -> str:
    return cli_out or os.environ.get(_ENV_OUT) or os.getcwd()


def _cmd_config(args, forced_kind: str | None) -> int:
    from .errors import ConfigurationError, SingularDesignError
    from .experiments import config_from_dict, run_experiment

    try:
        with open(args.config) as fh:
            raw = json.load(fh)
    except FileNotFoundError:
        print(f"config error: no such file {args.config!r}", file=sys.stderr)
        return 2
    except json.JSONDecodeError as exc:
        print(f"config error: invalid JSON at line {exc.lineno}: {exc.msg}", file=sys.stderr)
        return 2
    if args.seed is not None:
        raw["seed"] = args.seed
        if isinstance(raw.get("noise"), dict):
            pass  # noise seed follows the config seed during parsing
    try:
        cfg = config_from_dict(raw)
        if forced_kind is not None and cfg.kind != forced_kind:
            raise ConfigurationError(
                f"subcommand {forced_kind!r} got a config of kind {cfg.kind!r}"
            )
        code, lines = run_experiment(cfg, _resolve_out(args.out))
    except ConfigurationError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except SingularDesignError as exc:
        print(f"numerical abort: {exc}", file=sys.stderr)
        return 3
    for line in lines:
        print(line)
    return code


def _compare_trees(a: str, b: str) -> list[str]:
    """Relative paths under ``a`` whose bytes differ from (or are absent in) ``b``."""
    bad = []
    for root, _, files in os.walk(a):
        for name in files:
            pa = os.path.join(root, name)
            rel = os.path.relpath(pa, a)
            pb = os.path.join(b, rel)
            if not os.path.exists(pb) or not filecmp.cmp(pa, pb, shallow=False):
                bad.append(rel)
    return sorted(bad)


def _cmd_accept(args) -> int:
    import tempfile

    from .acceptance import DEFAULT_SEED, run_acceptance

    seed = args.seed if args.seed is not None else DEFAULT_SEED
    out = _resolve_out(args.out)
    summary = run_acceptance(out, seed=seed)
    all_ok = summary["all_pass"]
    if not args.skip_determinism:
        with tempfile.TemporaryDirectory() as tmp:
            run_acceptance(tmp, seed=seed, echo=lambda *_: None)
            diffs = _compare_trees(out, tmp)
        det_ok = not diffs
        line = (
            "[PASS] a10: rerun with the same seed is byte-identical"
            if det_ok
            else f"[FAIL] a10: artifacts differ on rerun: {diffs}"
        )
        print(line)
        with open(os.path.join(out, "acceptance_determinism.json"), "w", newline="\n") as fh:
            json.dump({"ok": det_ok, "differing_files": diffs}, fh, indent=2, sort_keys=True)
            fh.write("\n")
        all_ok = all_ok and det_ok
    return 0 if all_ok else 1


def _cmd_list() -> int:
    from .acceptance import acceptance_configs
    from .quadrature import DENSITY_REGISTRY
    from .targets import registry_entries

    print("targets (name, smoothness, description):")
    for name, tau, doc in registry_entries():
        tau_str = "smooth" if tau == float("inf") else f"tau_f={tau:g}"
        print(f"  {name:16s} {tau_str:12s} {doc}")
    print("densities:", ", ".join(sorted(DENSITY_REGISTRY)))
    print("designs: grid, random, p_greedy")
    print("experiments:", ", ".join(sorted(acceptance_configs())))
    return 0


def main(argv=None) -> int:
    _pin_blas_threads()
    args = _build_parser().parse_args(argv)
    if args.command == "list":
        return _cmd_list()
    if args.command == "accept":
        return _cmd_accept(args)
    forced = None if args.command == "run" else args.command
    return _cmd_config(args, forced)


if __name__ == "__main__":
    sys.exit(main())
