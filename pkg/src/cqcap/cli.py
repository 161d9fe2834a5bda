"""Command-line front end: ``cqcap <subcommand> [flags]``.

Every subcommand writes a CSV table (to ``--output`` or stdout) and can save
an SVG figure with ``--plot``.  Flags may also come from a ``--config`` file
of ``key = value`` lines; flags given on the command line win.

Exit status is 0 on success, 2 for usage errors and 3 when a computation
rejects its inputs (domain, truncation, root-finding or sampling failures).
"""

from __future__ import annotations

import argparse
import contextlib
import csv
import math
import sys
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from . import discretizer, gaussian, montecarlo, reliability
from .errors import DimensionMismatch, DomainError, NoRoot, SamplingTimeout, TruncationError

EXIT_OK, EXIT_USAGE, EXIT_DOMAIN = 0, 2, 3
NUMERIC_ERRORS = (DomainError, TruncationError, DimensionMismatch, NoRoot, SamplingTimeout)
COMMANDS = ("capacity", "equivalence", "exponents", "simulate", "discretize")


class UsageError(Exception):
    pass


def _int_list(text) -> tuple[int, ...]:
    if isinstance(text, (tuple, list)):
        return tuple(int(x) for x in text)
    parts = [x for x in str(text).replace(" ", "").split(",") if x]
    try:
        return tuple(int(x) for x in parts)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


@dataclass
class RunConfig:
    command: str
    energy: float = 1.0
    noise: float = 0.0
    dim: int = 40
    seed: int = 0
    output: str | None = None
    bits: bool = False
    plot: str | None = None
    levels: tuple = (2, 4, 8, 16)
    radius: float | None = None
    rate_min: float | None = None
    rate_max: float | None = None
    rate_count: int = 50
    rate: float = 0.3
    n_list: tuple = (2, 4, 6, 8)
    trials: int = 200
    delta: float = 1.0

    def validate(self) -> "RunConfig":
        if self.command not in COMMANDS:
            raise UsageError(f"unknown subcommand {self.command!r}")
        checks = [
            (self.energy >= 0, "--energy must be >= 0"),
            (self.noise >= 0, "--noise must be >= 0"),
            (8 <= self.dim <= 512, "--dim must lie in [8, 512]"),
            (1 <= self.rate_count <= 10**4, "--rate-count must lie in [1, 10000]"),
            (len(self.levels) > 0 and min(self.levels) >= 1, "--levels needs positive integers"),
            (len(self.n_list) > 0 and min(self.n_list) >= 1, "--n-list needs positive integers"),
            (self.trials >= 1, "--trials must be >= 1"),
            (self.delta > 0, "--delta must be > 0"),
            (self.rate >= 0, "--rate must be >= 0"),
            (self.radius is None or self.radius > 0, "--radius must be > 0"),
        ]
        for ok, msg in checks:
            if not ok:
                raise UsageError(msg)
        if self.rate_min is not None and self.rate_max is not None and self.rate_min > self.rate_max:
            raise UsageError("--rate-min exceeds --rate-max")
        return self

    @property
    def unit(self) -> float:
        """Divisor applied to information quantities on output."""
        return math.log(2.0) if self.bits else 1.0


def build_parser() -> argparse.ArgumentParser:
    # defaults are suppressed so that config-file values can fill the gaps
    common = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    common.add_argument("--energy", type=float, help="mean signal quanta E")
    common.add_argument("--noise", type=float, help="mean noise quanta N")
    common.add_argument("--dim", type=int, help="Fock-space truncation")
    common.add_argument("--seed", type=int)
    common.add_argument("--output", help="CSV path (default: stdout)")
    common.add_argument("--bits", action="store_true", help="report information in bits")
    common.add_argument("--plot", nargs="?", const="", help="write an SVG figure (optional path)")
    common.add_argument("--config", help="file of 'key = value' lines")

    parser = argparse.ArgumentParser(prog="cqcap", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("capacity", parents=[common], help="closed-form capacity and its entropy terms")
    p = sub.add_parser("equivalence", parents=[common],
                       help="photon and discretised Gaussian ensembles against the capacity")
    p.add_argument("--levels", type=_int_list, default=argparse.SUPPRESS)
    p.add_argument("--radius", type=float, default=argparse.SUPPRESS)
    p = sub.add_parser("exponents", parents=[common], help="random-coding and expurgated exponents")
    p.add_argument("--rate-min", type=float, default=argparse.SUPPRESS)
    p.add_argument("--rate-max", type=float, default=argparse.SUPPRESS)
    p.add_argument("--rate-count", type=int, default=argparse.SUPPRESS)
    p = sub.add_parser("simulate", parents=[common], help="Monte Carlo random coding with SRM decoding")
    p.add_argument("--rate", type=float, default=argparse.SUPPRESS, help="rate in nats")
    p.add_argument("--n-list", type=_int_list, default=argparse.SUPPRESS)
    p.add_argument("--trials", type=int, default=argparse.SUPPRESS)
    p.add_argument("--delta", type=float, default=argparse.SUPPRESS)
    p = sub.add_parser("discretize", parents=[common], help="convergence of the discretised prior")
    p.add_argument("--levels", type=_int_list, default=argparse.SUPPRESS)
    p.add_argument("--radius", type=float, default=argparse.SUPPRESS)
    return parser


def read_config(path) -> dict[str, str]:
    out = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise UsageError(f"{path}:{lineno}: expected 'key = value'")
        out[key.strip().replace("-", "_")] = value.strip()
    return out


def _coerce(name: str, value):
    kinds = {f.name: f.type for f in fields(RunConfig)}
    kind = kinds.get(name)
    if kind is None:
        raise UsageError(f"unknown setting {name!r}")
    if not isinstance(value, str):
        return value
    try:
        if name in ("levels", "n_list"):
            return _int_list(value)
        if name == "bits":
            return value.lower() in ("1", "true", "yes", "on")
        if kind.startswith("int"):
            return int(value)
        if kind.startswith("float"):
            return float(value)
    except (ValueError, argparse.ArgumentTypeError) as exc:
        raise UsageError(f"bad value for {name}: {value!r} ({exc})")
    return value


def make_config(argv=None) -> RunConfig:
    ns = vars(build_parser().parse_args(argv))
    command = ns.pop("command")
    merged = {}
    if "config" in ns:
        merged.update(read_config(ns.pop("config")))
    merged.update(ns)
    defaults = {"equivalence": {"dim": 80, "noise": 0.5, "levels": (1, 2, 3)},
                "discretize": {"levels": (2, 4, 8, 16)}}.get(command, {})
    values = {**defaults, **merged}
    return RunConfig(command, **{k: _coerce(k, v) for k, v in values.items()}).validate()


@contextlib.contextmanager
def _sink(path):
    if path:
        with open(path, "w", newline="") as fh:
            yield fh
    else:
        yield sys.stdout


def _fmt(x: float) -> str:
    return repr(float(x))


def cmd_capacity(cfg: RunConfig, fh) -> None:
    ch = gaussian.GaussianChannel(cfg.noise, cfg.energy)
    w = csv.writer(fh)
    w.writerow(("quantity", "value"))
    w.writerow(("capacity", _fmt(gaussian.gaussian_capacity(ch) / cfg.unit)))
    w.writerow(("output_entropy", _fmt(gaussian.max_output_entropy(ch) / cfg.unit)))
    w.writerow(("noise_entropy", _fmt(gaussian.thermal_entropy(ch.noise) / cfg.unit)))


def cmd_equivalence(cfg: RunConfig, fh):
    ch = gaussian.GaussianChannel(cfg.noise, cfg.energy)
    rep = gaussian.equivalence_check(ch, cfg.dim, cfg.levels, cfg.radius)
    w = csv.writer(fh)
    w.writerow(("source", "level", "delta_h", "deviation"))
    for src, lvl, v, dev in rep.rows():
        w.writerow((src, lvl, _fmt(v / cfg.unit), _fmt(dev / cfg.unit)))
    return rep


def rate_grid(cfg: RunConfig) -> np.ndarray:
    """``rate_count`` rates; by default evenly spaced up to and including C."""
    C = reliability.capacity_pure(cfg.energy)
    lo = cfg.rate_min if cfg.rate_min is not None else C / cfg.rate_count
    hi = cfg.rate_max if cfg.rate_max is not None else C
    return np.linspace(lo, hi, cfg.rate_count)


def cmd_exponents(cfg: RunConfig, fh):
    curve = reliability.exponent_curve(cfg.energy, rate_grid(cfg))
    w = csv.writer(fh)
    w.writerow(reliability.CURVE_COLUMNS)
    for R, er, ex, regime, s, p in curve.rows():
        w.writerow((_fmt(R / cfg.unit), _fmt(er / cfg.unit), _fmt(ex / cfg.unit), regime,
                    _fmt(s), _fmt(p)))
    return curve


def cmd_simulate(cfg: RunConfig, fh):
    reps = montecarlo.run_experiment(cfg.energy, cfg.rate, cfg.n_list, cfg.trials, cfg.delta,
                                     cfg.seed)
    w = csv.writer(fh)
    w.writerow(montecarlo.REPORT_COLUMNS)
    for r in reps:
        w.writerow((r.n, r.N, _fmt(r.R / cfg.unit), _fmt(r.mean_error), _fmt(r.stderr),
                    _fmt(r.nu_hat), _fmt(r.bound40), _fmt(r.bound43), r.seed))
    return reps


def cmd_discretize(cfg: RunConfig, fh):
    ch = gaussian.GaussianChannel(cfg.noise, cfg.energy)
    radius = cfg.radius or gaussian.default_radius(cfg.energy)
    prior = gaussian.optimal_gaussian_prior(ch)
    rep = discretizer.convergence_report(prior, gaussian.gaussian_family(ch, cfg.dim),
                                         discretizer.energy_cost, cfg.energy, cfg.levels, radius)
    w = csv.writer(fh)
    w.writerow(("level", "delta_h", "deficit"))
    for lvl, dh, d in rep.rows():
        w.writerow((lvl, _fmt(dh / cfg.unit), _fmt(d / cfg.unit)))
    return rep


def _plot(cfg: RunConfig, result) -> Path | None:
    if cfg.plot is None or cfg.command == "capacity":
        return None
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    if cfg.plot:
        path = Path(cfg.plot)
    elif cfg.output:
        path = Path(cfg.output).with_suffix(".svg")
    else:
        path = Path(f"{cfg.command}.svg")
    unit = "bits" if cfg.bits else "nats"
    fig, ax = plt.subplots(figsize=(6, 4))
    if cfg.command == "exponents":
        ax.plot(result.R / cfg.unit, result.E_r / cfg.unit, label="random coding")
        ax.plot(result.R / cfg.unit, result.E_ex / cfg.unit, "--", label="expurgated")
        for b in result.boundaries:
            ax.axvline(b / cfg.unit, color="0.7", lw=0.8)
        ax.set(xlabel=f"rate ({unit})", ylabel=f"exponent ({unit})")
        ax.legend()
    elif cfg.command == "simulate":
        n = [r.n for r in result]
        ax.errorbar(n, [r.mean_error for r in result], yerr=[2 * r.stderr for r in result],
                    marker="o", capsize=3)
        ax.set(yscale="log", xlabel="word length n", ylabel="mean SRM error")
    elif cfg.command == "discretize":
        ax.plot(result.levels, np.array(result.delta_h) / cfg.unit, marker="o")
        ax.axhline(result.target / cfg.unit, color="0.5", ls="--", label="reference")
        ax.set(xlabel="level", ylabel=f"Holevo quantity ({unit})")
        ax.legend()
    else:
        levels = sorted(result.gaussian)
        ax.plot(levels, [result.gaussian[l] / cfg.unit for l in levels], marker="o",
                label="Gaussian grid")
        ax.axhline(result.photon / cfg.unit, color="C1", ls=":", label="photon")
        ax.axhline(result.capacity / cfg.unit, color="0.5", ls="--", label="closed form")
        ax.set(xlabel="level", ylabel=f"Holevo quantity ({unit})")
        ax.legend()
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return path


HANDLERS = {
    "capacity": cmd_capacity,
    "equivalence": cmd_equivalence,
    "exponents": cmd_exponents,
    "simulate": cmd_simulate,
    "discretize": cmd_discretize,
}


def main(argv=None) -> int:
    try:
        cfg = make_config(argv)
    except SystemExit as exc:  # argparse reports usage errors this way
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    except (UsageError, OSError) as exc:
        print(f"cqcap: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        with _sink(cfg.output) as fh:
            result = HANDLERS[cfg.command](cfg, fh)
        _plot(cfg, result)
    except NUMERIC_ERRORS as exc:
        print(f"cqcap: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
