"""Command-line front end.

Subcommands: ``matrix``, ``spectrum``, ``asymptotics``, ``smallball``,
``sample`` and ``verify``. Options may also come from a JSON file given with
``--config``; its keys are the long option names (with underscores) and
explicit flags override them.

Exit codes: 0 success, 1 a ``verify`` criterion failed, 2 invalid input,
3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field, fields

import numpy as np

from . import __version__
from .errors import NumericalError

__all__ = ["RunConfig", "main", "build_parser"]

DEFAULT_SEED = 0x5F5BC0FFEE
EXIT_OK, EXIT_FAILED, EXIT_INPUT, EXIT_NUMERIC = 0, 1, 2, 3

_DEFAULT_TRUNCATION = {"matrix": 64, "spectrum": 1024, "asymptotics": 2048, "smallball": 1024, "sample": 512}
_DEFAULT_METHOD = {"matrix": "reduced1d", "spectrum": "reduced1d", "asymptotics": "reduced1d",
                   "smallball": "saddle", "sample": "kl"}
_METHODS = {
    "matrix": ("oracle2d", "reduced1d", "asymptotic"),
    "spectrum": ("oracle2d", "reduced1d", "asymptotic"),
    "asymptotics": ("oracle2d", "reduced1d", "asymptotic"),
    "smallball": ("saddle", "mc-plain", "mc-tilted"),
    "sample": ("kl", "cholesky"),
}


@dataclass
class RunConfig:
    """Validated options of one command."""

    command: str
    process: str = "sfbm"
    hurst: float = 0.75
    truncation: int | None = None
    method: str | None = None
    epsilon: list = field(default_factory=lambda: [0.01])
    samples: int = 100_000
    seed: int = DEFAULT_SEED
    threads: int = 1
    out: str | None = None
    format: str = "json"
    window: list | None = None
    modes: int = 256
    grid: int = 64
    prefactor: bool = False

    def validate(self) -> "RunConfig":
        from .kernels import ProcessKind, check_hurst

        self.process = ProcessKind.parse(self.process).value
        if self.command != "verify":
            check_hurst(self.hurst, self.process)
        if self.truncation is None:
            self.truncation = _DEFAULT_TRUNCATION.get(self.command, 64)
        if self.method is None:
            self.method = _DEFAULT_METHOD.get(self.command)
        allowed = _METHODS.get(self.command)
        if allowed is not None and self.method not in allowed:
            raise ValueError(f"--method for {self.command} must be one of {', '.join(allowed)}")
        if self.truncation < 1:
            raise ValueError("--truncation must be positive")
        if self.threads < 1:
            raise ValueError("--threads must be positive")
        if not (0 <= self.seed < 1 << 64):
            raise ValueError("--seed must be a 64-bit unsigned integer")
        formats = ("json", "csv", "fspc") if self.command == "sample" else ("json", "csv")
        if self.format not in formats:
            raise ValueError(f"--format must be one of {', '.join(formats)}")
        if any(e <= 0 for e in self.epsilon):
            raise ValueError("--epsilon values must be positive")
        return self


_CONFIG_KEYS = {f.name for f in fields(RunConfig)} - {"command"}


def _int_auto(text: str) -> int:
    return int(text, 0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sfbm-kl", description="Karhunen-Loeve spectra of fBm and sub-fractional Bm.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        # defaults are None so that config values survive unless a flag is given
        p.add_argument("--config", help="JSON file with option values")
        p.add_argument("--process", choices=["fbm", "sfbm", "sfbm-noise"], default=None)
        p.add_argument("--hurst", type=float, default=None)
        p.add_argument("--truncation", type=int, default=None)
        p.add_argument("--method", default=None)
        p.add_argument("--seed", type=_int_auto, default=None)
        p.add_argument("--threads", type=int, default=None)
        p.add_argument("--out", default=None, help="output path (default: stdout)")
        p.add_argument("--format", default=None, help="json or csv (sample also accepts fspc)")
        return p

    common(sub.add_parser("matrix", help="assemble a Galerkin matrix"))
    common(sub.add_parser("spectrum", help="eigenvalues of a Galerkin matrix"))
    p = common(sub.add_parser("asymptotics", help="fit eigenvalue laws and compare both normalisations"))
    p.add_argument("--window", type=int, nargs=2, default=None, metavar=("LO", "HI"))
    p = common(sub.add_parser("smallball", help="small-ball log-probabilities"))
    p.add_argument("--epsilon", type=float, nargs="+", default=None)
    p.add_argument("--samples", type=int, default=None)
    p.add_argument("--prefactor", action="store_true", default=None)
    p = common(sub.add_parser("sample", help="sample paths"))
    p.add_argument("--samples", type=int, default=None)
    p.add_argument("--modes", type=int, default=None)
    p.add_argument("--grid", type=int, default=None, help="number of uniform grid points")
    p = sub.add_parser("verify", help="run the acceptance suite")
    p.add_argument("--config", help=argparse.SUPPRESS)
    return parser


def _config(args: argparse.Namespace) -> RunConfig:
    values = {}
    if getattr(args, "config", None):
        with open(args.config) as fh:
            loaded = json.load(fh)
        if not isinstance(loaded, dict):
            raise ValueError("config file must hold a JSON object")
        unknown = set(loaded) - _CONFIG_KEYS
        if unknown:
            raise ValueError(f"unknown config keys: {', '.join(sorted(unknown))}")
        values.update(loaded)
    for key in _CONFIG_KEYS:
        v = getattr(args, key, None)
        if v is not None:
            values[key] = v
    if isinstance(values.get("epsilon"), (int, float)):
        values["epsilon"] = [values["epsilon"]]
    return RunConfig(command=args.command, **values).validate()


def _emit(cfg: RunConfig, payload) -> None:
    if isinstance(payload, str):
        data = payload.encode()
    else:
        data = payload
    if cfg.out:
        with open(cfg.out, "wb") as fh:
            fh.write(data)
    else:
        sys.stdout.buffer.write(data)
        if data and not data.endswith(b"\n"):
            sys.stdout.buffer.write(b"\n")
        sys.stdout.flush()


def _dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True) + "\n"


def cmd_matrix(cfg: RunConfig) -> int:
    from .galerkin import Method, assemble

    mat = assemble(cfg.process, cfg.hurst, cfg.truncation, Method.parse(cfg.method), threads=cfg.threads)
    _emit(cfg, mat.to_json() + "\n" if cfg.format == "json" else mat.to_csv())
    return EXIT_OK


def cmd_spectrum(cfg: RunConfig) -> int:
    from .eigensolve import spectrum
    from .galerkin import Method, assemble

    sp = spectrum(assemble(cfg.process, cfg.hurst, cfg.truncation, Method.parse(cfg.method), threads=cfg.threads))
    _emit(cfg, sp.to_json() + "\n" if cfg.format == "json" else sp.to_csv())
    return EXIT_OK


def cmd_asymptotics(cfg: RunConfig) -> int:
    from .asymptotics import format_table, report
    from .eigensolve import spectrum
    from .galerkin import Method, assemble

    N = cfg.truncation
    window = cfg.window or (16, min(48, N // 4))
    sp = spectrum(assemble(cfg.process, cfg.hurst, N, Method.parse(cfg.method), threads=cfg.threads))
    rep = report(cfg.process, cfg.hurst, sp, window)
    print(format_table(rep), file=sys.stderr)
    if cfg.format == "json":
        _emit(cfg, _dumps(rep))
    else:
        lines = ["hypothesis,constant,fitted_constant,relative_deviation"]
        for hyp, law in rep["law"].items():
            lines.append(f"{hyp},{law['constant']:.17g},{rep['fit']['fitted_constant']:.17g},"
                         f"{rep['hypothesis_verdict']['deviation'][hyp]:.17g}")
        _emit(cfg, "\n".join(lines) + "\n")
    return EXIT_OK


def cmd_smallball(cfg: RunConfig) -> int:
    from .asymptotics import leading_law
    from .eigensolve import spectrum
    from .galerkin import assemble
    from .smallball import TailModel, chernoff_smallball, mc_smallball, results_to_csv

    sp = spectrum(assemble(cfg.process, cfg.hurst, cfg.truncation, threads=cfg.threads))
    tail = TailModel.from_spectrum(sp, leading_law(cfg.process, cfg.hurst).power)
    results = []
    for eps in cfg.epsilon:
        if cfg.method == "saddle":
            results.append(chernoff_smallball(tail, eps, prefactor=cfg.prefactor))
        else:
            results.append(mc_smallball(tail, eps, cfg.samples, cfg.seed, tilted=cfg.method == "mc-tilted",
                                        threads=cfg.threads))
    if cfg.format == "json":
        body = [r.to_dict() for r in results]
        _emit(cfg, _dumps(body[0] if len(body) == 1 else body))
    else:
        _emit(cfg, results_to_csv(results))
    return EXIT_OK


def cmd_sample(cfg: RunConfig) -> int:
    from .sampler import cholesky_sample, kl_sample

    grid = np.arange(1, cfg.grid + 1) / cfg.grid
    if cfg.method == "kl":
        batch = kl_sample(cfg.process, cfg.hurst, cfg.modes, grid, cfg.samples, cfg.seed,
                          truncation=max(cfg.truncation, cfg.modes), threads=cfg.threads)
    else:
        batch = cholesky_sample(cfg.process, cfg.hurst, grid, cfg.samples, cfg.seed, threads=cfg.threads)
    if cfg.format == "fspc":
        _emit(cfg, batch.to_bytes())
    elif cfg.format == "csv":
        _emit(cfg, batch.to_csv())
    else:
        _emit(cfg, _dumps({
            "kind": batch.kind.value, "h": batch.h, "generator": batch.generator.value, "seed": batch.seed,
            "n_modes": batch.n_modes, "bias_bound": batch.bias_bound,
            "grid": batch.grid.tolist(), "paths": batch.paths.tolist(),
        }))
    return EXIT_OK


def cmd_verify(cfg: RunConfig) -> int:
    from . import acceptance

    results = acceptance.run(stream=sys.stdout)
    print()
    print(acceptance.verdict_table())
    failed = [r.number for r in results if not r.passed]
    print(f"\n{len(results) - len(failed)}/{len(results)} criteria passed"
          + (f"; failed: {', '.join(map(str, failed))}" if failed else ""))
    return EXIT_FAILED if failed else EXIT_OK


_COMMANDS = {
    "matrix": cmd_matrix, "spectrum": cmd_spectrum, "asymptotics": cmd_asymptotics,
    "smallball": cmd_smallball, "sample": cmd_sample, "verify": cmd_verify,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _config(args)
        if args.command != "verify":
            print(f"seed: {cfg.seed:#x}", file=sys.stderr)
        return _COMMANDS[cfg.command](cfg)
    except NumericalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ValueError, OSError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
