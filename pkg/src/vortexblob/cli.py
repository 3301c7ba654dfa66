"""Command-line entry point: ``vortexblob {run, verify, converge}``.

Exit codes: 0 success, 1 criterion or physics failure, 2 usage or config error.
"""

from __future__ import annotations

import argparse
import csv
import inspect
import io
import json
import math
import os
import re
import sys
import tempfile
import time
from dataclasses import asdict, dataclass, field as dc_field
from pathlib import Path

import numpy as np

from . import __version__
from .kernel import BESSEL_BLOB, EULER_POINT, KernelKind, SingularityError

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class ConfigError(ValueError):
    def __init__(self, message, line=None):
        super().__init__(message)
        self.line = line


# ---------------------------------------------------------------- output helpers

def write_atomic(path, text):
    """Write ``text`` to ``path`` through a temporary file and a rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def fmt(v):
    """Shortest round-trip decimal for floats, plain str otherwise."""
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (np.integer,)):
        return str(int(v))
    return str(v)


def csv_text(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) for v in row])
    return buf.getvalue()


def package_version():
    try:
        from importlib.metadata import version
        return version("artifact")
    except Exception:
        return __version__


# ---------------------------------------------------------------- config parsing

def key_line(text, key):
    """1-based line of the first ``"key":`` in ``text``, or None."""
    m = re.search(r'"%s"\s*:' % re.escape(key), text)
    return text.count("\n", 0, m.start()) + 1 if m else None


def load_json(path):
    try:
        text = Path(path).read_text()
    except OSError as err:
        raise ConfigError(f"cannot read config: {err.strerror}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as err:
        raise ConfigError(f"invalid JSON: {err.msg} (column {err.colno})", err.lineno) from None
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object", 1)
    return text, data


class _Fields:
    """Typed access to a config dict with line-anchored errors."""

    def __init__(self, data, text):
        self.data = data
        self.text = text or ""

    def fail(self, key, msg):
        raise ConfigError(msg, key_line(self.text, key) if key else None)

    def require(self, key):
        if key not in self.data:
            raise ConfigError(f"missing required field '{key}'", None)
        return self.data[key]

    def number(self, key, default=None, positive=True, integer=False):
        if key not in self.data:
            if default is None:
                self.require(key)
            return default
        v = self.data[key]
        if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
            self.fail(key, f"field '{key}' must be a finite number, got {v!r}")
        if integer and int(v) != v:
            self.fail(key, f"field '{key}' must be an integer, got {v!r}")
        if positive and not v > 0:
            self.fail(key, f"field '{key}' must be positive, got {v!r}")
        return int(v) if integer else float(v)


@dataclass
class RunConfig:
    kernel: KernelKind
    initial: dict
    t_end: float
    dt: float
    record_every: int = 1
    rhs: str = "direct"
    rel_tol: float = 1e-6
    seed: int = 0
    output_dir: str = "run-output"

    def resolved(self):
        d = asdict(self)
        d["kernel"] = self.kernel.variant
        d["alpha"] = self.kernel.alpha
        return d


def parse_kernel(f: _Fields):
    variant = f.require("kernel")
    if variant not in (EULER_POINT, BESSEL_BLOB):
        f.fail("kernel", f"field 'kernel' must be '{EULER_POINT}' or '{BESSEL_BLOB}', got {variant!r}")
    if variant == EULER_POINT:
        return KernelKind.euler()
    return KernelKind.blob(f.number("alpha"))


def parse_run_config(data, text=None) -> RunConfig:
    f = _Fields(data, text)
    kind = parse_kernel(f)
    initial = f.require("initial")
    if not isinstance(initial, dict):
        f.fail("initial", "field 'initial' must be an object")
    has = [k for k in ("particles", "field") if k in initial]
    if len(has) != 1:
        f.fail("initial", "field 'initial' needs exactly one of 'particles' or 'field'")
    if "field" in initial:
        sub = _Fields(initial, text)
        if not isinstance(initial["field"], str):
            f.fail("field", "field 'field' must be a preset string such as \"rankine(1, 1)\"")
        sub.number("h")
    elif not isinstance(initial["particles"], (list, str)):
        f.fail("particles", "field 'particles' must be a list of [x, y, gamma] or a preset string")
    rhs = data.get("rhs", "direct")
    if rhs not in ("direct", "fast"):
        f.fail("rhs", f"field 'rhs' must be 'direct' or 'fast', got {rhs!r}")
    if rhs == "fast" and not kind.is_blob:
        f.fail("rhs", "the fast right-hand side needs the bessel-blob kernel")
    seed = data.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int) or seed < 0:
        f.fail("seed", f"field 'seed' must be a non-negative integer, got {seed!r}")
    out = data.get("output_dir", "run-output")
    if not isinstance(out, str) or not out:
        f.fail("output_dir", "field 'output_dir' must be a non-empty string")
    return RunConfig(
        kernel=kind,
        initial=initial,
        t_end=f.number("t_end"),
        dt=f.number("dt"),
        record_every=f.number("record_every", 1, integer=True),
        rhs=rhs,
        rel_tol=f.number("rel_tol", 1e-6),
        seed=seed,
        output_dir=out,
    )


_CALL_RE = re.compile(r"^\s*([a-z][a-z_-]*)\s*\(\s*([^()]*)\)\s*$")


def particle_preset(preset, seed):
    """Rows [x, y, gamma] for named particle presets.

    equal-pair(d, gamma), dipole(d, gamma), collapse-triple(), random(n, radius)
    """
    m = _CALL_RE.match(preset)
    if not m:
        raise ConfigError(f"cannot parse particle preset {preset!r}")
    name = m.group(1)
    try:
        args = [float(a) for a in m.group(2).split(",") if a.strip()]
    except ValueError:
        raise ConfigError(f"non-numeric argument in preset {preset!r}") from None
    if name in ("equal-pair", "dipole"):
        d = args[0] if args else 1.0
        g = args[1] if len(args) > 1 else 1.0
        if len(args) > 2 or d <= 0:
            raise ConfigError(f"preset {preset!r} takes (d > 0, gamma)")
        s = 1.0 if name == "equal-pair" else -1.0
        return [[-0.5 * d, 0.0, g], [0.5 * d, 0.0, s * g]]
    if name == "collapse-triple" and not args:
        from .analysis import find_collapse_configuration
        c = find_collapse_configuration()
        return np.c_[c.positions, c.circulations].tolist()
    if name == "random" and len(args) == 2 and args[0] >= 1 and int(args[0]) == args[0]:
        n, radius = int(args[0]), args[1]
        rng = np.random.default_rng(seed)
        r = radius * np.sqrt(rng.uniform(0, 1, n))
        th = rng.uniform(0, 2 * np.pi, n)
        return np.c_[r * np.cos(th), r * np.sin(th), rng.uniform(-1, 1, n)].tolist()
    raise ConfigError(f"unknown particle preset {preset!r}; expected equal-pair(d, gamma), "
                      "dipole(d, gamma), collapse-triple() or random(n, radius)")


def initial_configuration(cfg: RunConfig, text=None):
    from .discretize import field_from_preset, grid_approximation
    from .vortex_system import VortexConfiguration

    init = cfg.initial
    if "field" in init:
        try:
            fld = field_from_preset(init["field"])
            return grid_approximation(fld, float(init["h"]), cfg.kernel)
        except ValueError as err:
            raise ConfigError(str(err), key_line(text or "", "field")) from None
    rows = init["particles"]
    if isinstance(rows, str):
        try:
            rows = particle_preset(rows, cfg.seed)
        except ConfigError as err:
            err.line = key_line(text or "", "particles")
            raise
    try:
        return VortexConfiguration.from_rows(rows, cfg.kernel)
    except (ValueError, TypeError) as err:
        raise ConfigError(f"bad particle list: {err}", key_line(text or "", "particles")) from None


# ---------------------------------------------------------------- commands

def cmd_run(args):
    from .dynamics import fast_evaluator, integrate, rhs_direct

    if not args.config:
        raise ConfigError("the run command needs --config PATH")
    text, data = load_json(args.config)
    cfg = parse_run_config(data, text)
    if args.seed is not None:
        cfg.seed = args.seed
    if args.output:
        cfg.output_dir = args.output
    config = initial_configuration(cfg, text)
    rhs = fast_evaluator(cfg.rel_tol) if cfg.rhs == "fast" else rhs_direct
    start = time.perf_counter()
    try:
        traj = integrate(config, cfg.t_end, cfg.dt, cfg.record_every, rhs)
    except SingularityError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_FAIL
    wall = time.perf_counter() - start
    out = Path(cfg.output_dir)
    traj_rows = (
        (t, i, p[0], p[1], g)
        for t, s in zip(traj.times, traj.states)
        for i, (p, g) in enumerate(zip(s.positions, s.circulations))
    )
    write_atomic(out / "trajectory.csv", csv_text(["t", "particle", "x", "y", "gamma"], traj_rows))
    inv_rows = ((t,) + snap.as_row() for t, snap in zip(traj.times, traj.snapshots))
    write_atomic(out / "invariants.csv",
                 csv_text(["t", "circulation", "Px", "Py", "I", "H", "min_sep"], inv_rows))
    write_manifest(out, "run", cfg.resolved(), wall, args,
                   files=["trajectory.csv", "invariants.csv"], n_particles=config.n)
    print(f"wrote {len(traj)} records of {config.n} particles to {out}")
    return EXIT_OK


def write_manifest(out, command, resolved, wall, args, **extra):
    manifest = {
        "command": command,
        "version": package_version(),
        "config": resolved,
        "config_path": str(args.config) if args.config else None,
        "single_worker": bool(args.single_worker),
        "wall_time_seconds": wall,
    }
    manifest.update(extra)
    write_atomic(Path(out) / "manifest.json", json.dumps(manifest, indent=2, default=str) + "\n")


def cmd_verify(args):
    from .verification import SUITES

    suite = SUITES[args.suite]
    kwargs = {}
    params = inspect.signature(suite).parameters
    if "seed" in params and args.seed is not None:
        kwargs["seed"] = args.seed
    series = {}
    if "series" in params:
        kwargs["series"] = series
    start = time.perf_counter()
    results = suite(**kwargs)
    wall = time.perf_counter() - start
    out = Path(args.output or f"verify-{args.suite}")
    rows = ((r.criterion, r.name, r.value, r.threshold, "pass" if r.passed else "fail", r.detail)
            for r in results)
    write_atomic(out / "report.csv",
                 csv_text(["criterion", "check", "value", "threshold", "status", "detail"], rows))
    files = ["report.csv"]
    for name, arr in series.items():
        write_atomic(out / f"{name}.csv", csv_text(["t", "min_distance"], arr.tolist()))
        files.append(f"{name}.csv")
    write_manifest(out, "verify", {"suite": args.suite, "seed": args.seed}, wall, args, files=files)
    for r in results:
        print(r.line())
    failed = sorted({r.criterion for r in results if not r.passed})
    if failed:
        print(f"suite {args.suite}: FAIL (criteria {', '.join(map(str, failed))})")
        return EXIT_FAIL
    print(f"suite {args.suite}: PASS")
    return EXIT_OK


@dataclass
class StudyConfig:
    field: str = "rankine(1, 1)"
    alphas: list = dc_field(default_factory=lambda: [0.2, 0.1, 0.05])
    h_over_alpha: float = 0.5
    t_end: float = 1.0
    dt: float = 0.05
    rhs: str = "fast"
    rel_tol: float = 1e-6
    output_dir: str = "converge-output"


def parse_study_config(data, text=None) -> StudyConfig:
    f = _Fields(data, text)
    cfg = StudyConfig()
    if "field" in data:
        if not isinstance(data["field"], str):
            f.fail("field", "field 'field' must be a preset string such as \"rankine(1, 1)\"")
        cfg.field = data["field"]
    if "alphas" in data:
        a = data["alphas"]
        if (not isinstance(a, list) or not a
                or not all(isinstance(v, (int, float)) and not isinstance(v, bool) and 0 < v
                           for v in a)):
            f.fail("alphas", "field 'alphas' must be a list of positive numbers")
        cfg.alphas = [float(v) for v in a]
    if len(cfg.alphas) < 2:
        f.fail("alphas", "field 'alphas' needs at least two values to fit an order")
    cfg.h_over_alpha = f.number("h_over_alpha", cfg.h_over_alpha)
    cfg.t_end = f.number("t_end", cfg.t_end)
    cfg.dt = f.number("dt", cfg.dt)
    cfg.rel_tol = f.number("rel_tol", cfg.rel_tol)
    cfg.rhs = data.get("rhs", cfg.rhs)
    if cfg.rhs not in ("direct", "fast"):
        f.fail("rhs", f"field 'rhs' must be 'direct' or 'fast', got {cfg.rhs!r}")
    cfg.output_dir = data.get("output_dir", cfg.output_dir)
    return cfg


def cmd_converge(args):
    from .analysis import euler_alpha_convergence_study
    from .discretize import field_from_preset

    text, data = load_json(args.config) if args.config else (None, {})
    cfg = parse_study_config(data, text)
    if args.output:
        cfg.output_dir = args.output
    try:
        fld = field_from_preset(cfg.field)
    except ValueError as err:
        raise ConfigError(str(err), key_line(text or "", "field")) from None
    ratio = cfg.h_over_alpha
    start = time.perf_counter()
    table = euler_alpha_convergence_study(
        fld, cfg.alphas, lambda a: ratio * a, cfg.t_end, cfg.dt, cfg.rhs, cfg.rel_tol
    )
    wall = time.perf_counter() - start
    out = Path(cfg.output_dir)
    buf = io.StringIO()
    table.write(buf)
    write_atomic(out / "rate_table.csv", buf.getvalue())
    write_manifest(out, "converge", asdict(cfg), wall, args, files=["rate_table.csv"],
                   envelope_constants=table.envelope_constants,
                   leave_one_out_orders=table.loo_orders)
    for r in table.rows:
        print(f"alpha={r.alpha!r} h={r.h!r} N={r.n} sup_error={r.sup_error!r} "
              f"runtime={r.runtime_seconds:.2f}s")
    print(f"fitted_order={table.fitted_order!r}")
    ok = table.monotone and table.min_order >= 0.9 and (
        table.envelope_margin is None or table.below_envelope)
    if not ok:
        print(f"convergence criteria not met: monotone={table.monotone}, "
              f"min_order={table.min_order:.4f}, envelope_margin={table.envelope_margin}")
        return EXIT_FAIL
    return EXIT_OK


# ---------------------------------------------------------------- entry point

def build_parser():
    from .verification import SUITES

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="JSON configuration file")
    common.add_argument("--single-worker", action="store_true",
                        help="use one thread for bit-reproducible results")
    common.add_argument("--seed", type=int, metavar="N", help="override the configured seed")
    common.add_argument("--output", metavar="DIR", help="output directory")
    parser = argparse.ArgumentParser(prog="vortexblob", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {package_version()}")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("run", parents=[common], help="integrate a configuration")
    v = sub.add_parser("verify", parents=[common], help="run a verification suite")
    v.add_argument("suite", choices=sorted(SUITES))
    sub.add_parser("converge", parents=[common], help="alpha -> 0 convergence study")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    if args.seed is not None and args.seed < 0:
        print("error: --seed must be non-negative", file=sys.stderr)
        return EXIT_USAGE
    if args.single_worker:
        import numba
        numba.set_num_threads(1)
    handler = {"run": cmd_run, "verify": cmd_verify, "converge": cmd_converge}[args.command]
    try:
        return handler(args)
    except ConfigError as err:
        where = args.config or "config"
        line = f":{err.line}" if err.line else ""
        print(f"error: {where}{line}: {err}", file=sys.stderr)
        return EXIT_USAGE
    except SingularityError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
