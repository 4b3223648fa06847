"""Command-line front end: ``gjf-spectral {solve,sweep,viscosity,check,tables}``.

Settings come from built-in defaults, then an optional INI file
(``--config``), then command-line flags; later sources win. Every CSV starts
with ``#`` metadata lines followed by a header row.

Exit codes: 0 success, 2 usage or range error, 3 numerical failure,
4 failed checks.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import dataclasses
import datetime as _dt
import hashlib
import json
import logging
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .analysis import (
    appendix_checks,
    convergence_sweep,
    error_report,
    family_rates,
    parse_norm_id,
    viscosity_study,
)
from .errors import DomainError, GJFError
from .oracle import ProblemSpec, Variant
from .gjf import FracOrders
from .solver import evaluate_grid
from .svg import heatmap_panels, semilog_plot

__all__ = ["RunConfig", "ConfigError", "parse_config", "run", "main", "parse_list"]

log = logging.getLogger("gjf_spectral")

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC, EXIT_CHECK = 0, 2, 3, 4

COMMANDS = ("solve", "sweep", "viscosity", "check", "tables")
_FLOAT_KEYS = ("alpha", "beta", "gamma", "mu", "eps", "T", "eta", "theta")


class ConfigError(DomainError):
    """Invalid flag, config-file entry or parameter combination."""


def fmt(v: float) -> str:
    return "%.17g" % v


def parse_list(text: str, kind=float) -> list:
    """``start:step:end`` (inclusive) or a comma-separated list."""
    text = text.strip()
    if not text:
        raise ConfigError("empty list")
    try:
        if ":" in text:
            parts = text.split(":")
            if len(parts) != 3:
                raise ConfigError(f"range {text!r} must look like start:step:end")
            a, h, b = (float(p) for p in parts)
            if h <= 0 or b < a:
                raise ConfigError(f"range {text!r} needs a positive step and start <= end")
            count = int(np.floor((b - a) / h + 1e-9)) + 1
            vals = [round(a + k * h, 12) for k in range(count)]
        else:
            vals = [float(p) for p in text.split(",") if p.strip()]
    except ValueError as exc:
        raise ConfigError(f"cannot parse list {text!r}: {exc}") from exc
    if kind is int:
        if any(v != int(v) for v in vals):
            raise ConfigError(f"list {text!r} must contain integers")
        return [int(v) for v in vals]
    return vals


@dataclass
class RunConfig:
    """Fully resolved settings of one CLI invocation."""

    command: str
    problem: str = "tp1"
    alpha: float = 0.5
    beta: float = 1.2
    gamma: float = 0.2
    mu: float = 1.8
    eps: float = 1.0
    T: float = 1.0
    eta: float = 4.0
    theta: float = 4.0
    M: int = 20
    N: int = 20
    M_list: Optional[list] = None
    N_list: Optional[list] = None
    eps_list: Optional[list] = None
    norms: list = field(default_factory=lambda: ["l2"])
    grid: int = 101
    quad_size: Optional[int] = None
    out: str = "."
    plots: bool = False
    timestamp: bool = True

    def spec(self) -> ProblemSpec:
        orders = FracOrders(self.alpha, self.beta, self.gamma, self.mu, self.eps, self.T)
        variant = Variant(self.problem)
        return ProblemSpec(orders, self.eta, self.theta, variant)

    def public(self) -> dict:
        """Settings that determine the outputs (used for metadata and file hashes)."""
        d = dataclasses.asdict(self)
        d.pop("timestamp")
        d.pop("plots")
        d.pop("out")
        return d

    def digest(self) -> str:
        return hashlib.sha256(json.dumps(self.public(), sort_keys=True).encode()).hexdigest()[:12]


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("problem")
    g.add_argument("--problem", choices=[v.value for v in Variant], help="test problem preset (default tp1; tp3 for viscosity)")
    for name in _FLOAT_KEYS:
        g.add_argument(f"--{name}", type=float, metavar="X")
    d = common.add_argument_group("discretisation")
    d.add_argument("--M", type=int, help="space basis size (M-1 functions)")
    d.add_argument("--N", type=int, help="time basis size")
    d.add_argument("--M-list", dest="M_list", metavar="LIST", help="start:step:end or comma list")
    d.add_argument("--N-list", dest="N_list", metavar="LIST")
    d.add_argument("--eps-list", dest="eps_list", metavar="LIST")
    d.add_argument("--norms", metavar="IDS", help="comma list of l2, t<l>, x<k> (suffix w for weighted)")
    d.add_argument("--grid", type=int, help="points per axis of the viscosity snapshots (default 101)")
    d.add_argument("--quad-size", dest="quad_size", type=int, help="load-matrix quadrature size")
    o = common.add_argument_group("output")
    o.add_argument("--out", metavar="DIR", help="output directory (default .)")
    o.add_argument("--plots", action="store_const", const=True, help="also write SVG plots")
    o.add_argument("--no-timestamp", dest="no_timestamp", action="store_const", const=True, help="omit the timestamp line")
    o.add_argument("--config", metavar="FILE", help="INI file with default settings")
    o.add_argument("-v", "--verbose", action="count", default=0)

    parser = argparse.ArgumentParser(
        prog="gjf-spectral",
        description="Space-time Petrov-Galerkin spectral solver for fractional reaction-diffusion with viscosity.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "solve": "solve one problem and report error norms",
        "sweep": "convergence sweep over M and/or N",
        "viscosity": "solve for several eps with a fixed source",
        "check": "numerical checks of the normalisation-constant lemmas",
        "tables": "regenerate every figure sweep and the checks",
    }
    for cmd in COMMANDS:
        sub.add_parser(cmd, parents=[common], help=helps[cmd])
    return parser


_KEY_ALIASES = {"m": "M", "n": "N", "t": "T", "m_list": "M_list", "n_list": "N_list", "no_timestamp": "no_timestamp"}


def _read_config_file(path: str) -> dict:
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"--config: cannot read {path}: {exc}") from exc
    try:
        cp.read_string(text if text.lstrip().startswith("[") else "[run]\n" + text)
    except configparser.Error as exc:
        raise ConfigError(f"--config: {exc}") from exc
    out = {}
    for section in cp.sections():
        for key, val in cp.items(section):
            k = key.strip().replace("-", "_")
            k = _KEY_ALIASES.get(k.lower(), k) if k not in ("M", "N", "T") else k
            out[k] = val.strip()
    return out


def _coerce(key: str, val):
    """Turn a config-file string into the type of the matching flag."""
    if not isinstance(val, str):
        return val
    try:
        if key in _FLOAT_KEYS:
            return float(val)
        if key in ("M", "N", "grid", "quad_size"):
            return int(val)
        if key in ("plots", "no_timestamp"):
            low = val.lower()
            if low not in ("1", "0", "true", "false", "yes", "no", "on", "off"):
                raise ValueError(f"not a boolean: {val!r}")
            return low in ("1", "true", "yes", "on")
    except ValueError as exc:
        raise ConfigError(f"config key {key!r}: {exc}") from exc
    return val


_KNOWN = set(_FLOAT_KEYS) | {
    "problem", "M", "N", "M_list", "N_list", "eps_list", "norms", "grid", "quad_size", "out", "plots", "no_timestamp",
}


def parse_config(args: Sequence[str], config_file: Optional[str] = None) -> RunConfig:
    """Resolve defaults, an optional INI file and flags into a :class:`RunConfig`.

    Raises
    ------
    ConfigError
        On unknown keys, malformed values or parameters outside their ranges.
    SystemExit
        From argparse on malformed flags (code 2) or ``--help`` (code 0).
    """
    ns = _build_parser().parse_args(list(args))
    values: dict = {}
    path = ns.config or config_file
    if path:
        file_vals = _read_config_file(path)
        unknown = set(file_vals) - _KNOWN
        if unknown:
            raise ConfigError(f"--config: unknown keys {sorted(unknown)}")
        values.update({k: _coerce(k, v) for k, v in file_vals.items()})
    for key in _KNOWN:
        v = getattr(ns, key, None)
        if v is not None:
            values[key] = v
    logging.basicConfig(level=logging.WARNING - 10 * min(ns.verbose, 2), format="%(levelname)s %(name)s: %(message)s")
    return _resolve(ns.command, values)


def _resolve(command: str, v: dict) -> RunConfig:
    problem = v.get("problem") or ("tp3" if command == "viscosity" else "tp1")
    try:
        variant = Variant(problem)
    except ValueError as exc:
        raise ConfigError(f"--problem must be one of tp1, tp2, tp3, custom; got {problem!r}") from exc
    fields = {}
    if variant is Variant.CUSTOM:
        missing = [k for k in ("alpha", "beta", "gamma", "mu") if k not in v]
        if missing:
            raise ConfigError(f"--problem custom needs {', '.join('--' + m for m in missing)}")
        fields.update(eps=0.0, T=1.0, eta=4.0, theta=4.0)
    else:
        base = ProblemSpec.preset(variant)
        o = base.orders
        fields.update(
            alpha=o.alpha, beta=o.beta, gamma=o.gamma, mu=o.mu, eps=o.eps, T=o.T, eta=base.eta, theta=base.theta
        )
    for k in _FLOAT_KEYS:
        if k in v:
            fields[k] = float(v[k])
    cfg = RunConfig(command=command, problem=variant.value, **fields)
    for k in ("M", "N", "grid", "quad_size"):
        if k in v:
            setattr(cfg, k, int(v[k]))
    if "M_list" in v:
        cfg.M_list = parse_list(str(v["M_list"]), int)
    if "N_list" in v:
        cfg.N_list = parse_list(str(v["N_list"]), int)
    if "eps_list" in v:
        cfg.eps_list = parse_list(str(v["eps_list"]), float)
    if "norms" in v:
        cfg.norms = [n.strip() for n in str(v["norms"]).split(",") if n.strip()]
    elif command == "solve":
        cfg.norms = ["l2", "t0", "x0"]
    if "out" in v:
        cfg.out = str(v["out"])
    cfg.plots = bool(v.get("plots", False))
    cfg.timestamp = not bool(v.get("no_timestamp", False))

    if command == "sweep" and cfg.M_list is None and cfg.N_list is None:
        cfg.N_list = list(range(4, 21))
    if command == "viscosity" and cfg.eps_list is None:
        cfg.eps_list = [0.0, 0.2, 0.4, 0.6, 0.8, 1.0]
    _validate(cfg)
    return cfg


def _validate(cfg: RunConfig) -> None:
    try:
        spec = cfg.spec()
    except DomainError as exc:
        raise ConfigError(f"invalid problem parameters: {exc}") from exc
    o = spec.orders
    if cfg.command in ("solve", "sweep") and not o.eps_in_theory_range:
        log.warning(
            "eps = %g exceeds min(2**(gamma - alpha), 1) = %.6g; stability is not covered by the theory",
            o.eps, o.eps_max,
        )
    for name in ("M", "N"):
        val = getattr(cfg, name)
        lo = 2 if name == "M" else 1
        if val < lo or val > 64:
            raise ConfigError(f"--{name} must lie in {lo}..64, got {val}")
    for name, lo in (("M_list", 2), ("N_list", 1)):
        lst = getattr(cfg, name)
        if lst is not None and (not lst or min(lst) < lo or max(lst) > 64):
            raise ConfigError(f"--{name.replace('_', '-')} entries must lie in {lo}..64")
    if cfg.eps_list is not None:
        for e in cfg.eps_list:
            if not 0.0 <= e <= 1.0:
                raise ConfigError(f"--eps-list entries must lie in [0, 1], got {e}")
    if cfg.grid < 2:
        raise ConfigError(f"--grid must be >= 2, got {cfg.grid}")
    if cfg.quad_size is not None and not 2 <= cfg.quad_size <= 256:
        raise ConfigError(f"--quad-size must lie in 2..256, got {cfg.quad_size}")
    for n in cfg.norms:
        try:
            parse_norm_id(n)
        except DomainError as exc:
            raise ConfigError(f"--norms: {exc}") from exc


# ---------------------------------------------------------------- output


def _header(cfg: RunConfig, extra: str = "") -> list:
    lines = [
        f"# gjf-spectral {__version__}",
        f"# command: {cfg.command}{(' ' + extra) if extra else ''}",
        f"# config: {json.dumps(cfg.public(), sort_keys=True)}",
    ]
    if cfg.timestamp:
        lines.append(f"# timestamp: {_dt.datetime.now(_dt.timezone.utc).isoformat(timespec='seconds')}")
    return lines


def _write_csv(path: Path, cfg: RunConfig, header: Sequence[str], rows, extra: str = "") -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        for line in _header(cfg, extra):
            fh.write(line + "\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow(r)
    return path


def _write_svg(cfg: RunConfig, label: str, text: str) -> Path:
    path = Path(cfg.out) / f"{cfg.command}_{label}_{cfg.digest()}.svg"
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")
    return path


def _sweep_rows(table) -> list:
    return [[r.M, r.N, r.norm_id, fmt(r.error)] for r in table.rows]


def _sweep_plot(table, title: str) -> str:
    curves = []
    for nid in table.norm_ids():
        n, e, _ = table.series(nid)
        curves.append((nid, n, e))
    return semilog_plot(curves, title, table.swept)


def _run_solve(cfg: RunConfig) -> int:
    spec = cfg.spec()
    u, rep = error_report(spec, cfg.M, cfg.N, cfg.norms, cfg.quad_size)
    rows = []
    for nid in cfg.norms:
        n = parse_norm_id(nid)
        err = rep.l2 if n.is_l2 else rep.seminorms[(spec.orders.s + n.l, spec.orders.sigma + n.k, n.k, n.l, n.weighted)]
        rows.append([cfg.M, cfg.N, nid, fmt(err)])
    path = _write_csv(Path(cfg.out) / f"solve_{cfg.problem}.csv", cfg, ["M", "N", "norm_id", "error"], rows,
                      f"condition={u.condition:.3e}")
    if cfg.plots:
        x = np.linspace(-1, 1, 41)
        t = np.linspace(0, spec.orders.T, 41)
        _write_svg(cfg, cfg.problem, heatmap_panels([(f"M={cfg.M}, N={cfg.N}", evaluate_grid(u, x, t))], "numerical solution"))
    print(f"solve {cfg.problem} M={cfg.M} N={cfg.N}: l2 error {rep.l2:.3e}, condition {u.condition:.3e} -> {path}")
    return EXIT_OK


def _run_sweep(cfg: RunConfig) -> int:
    spec = cfg.spec()
    M_list = cfg.M_list or [cfg.M]
    N_list = cfg.N_list or [cfg.N]
    table = convergence_sweep(spec, M_list, N_list, cfg.norms, cfg.quad_size)
    path = _write_csv(Path(cfg.out) / f"sweep_{cfg.problem}.csv", cfg, ["M", "N", "norm_id", "error"], _sweep_rows(table))
    if cfg.plots:
        _write_svg(cfg, cfg.problem, _sweep_plot(table, f"{cfg.problem} error vs {table.swept}"))
    fits = ", ".join(f"{k}: {v.semilog_rate:.3g} dec/mode" for k, v in table.fits.items())
    print(f"sweep {cfg.problem}: {len(table.rows)} rows{(' (' + fits + ')') if fits else ''} -> {path}")
    return EXIT_OK


def _viscosity_rows(records) -> list:
    rows = []
    for rec in records:
        for i, xv in enumerate(rec.x):
            for j, tv in enumerate(rec.t):
                rows.append([fmt(rec.eps), fmt(xv), fmt(tv), fmt(rec.values[i, j])])
    return rows


def _viscosity_svg(records, title: str) -> str:
    step = max(1, (records[0].x.size - 1) // 40)
    return heatmap_panels([(f"eps={r.eps:g}", r.values[::step, ::step]) for r in records], title)


def _run_viscosity(cfg: RunConfig) -> int:
    spec = cfg.spec()
    recs = viscosity_study(spec, cfg.eps_list, cfg.M, cfg.N, cfg.grid, cfg.quad_size)
    path = _write_csv(Path(cfg.out) / f"viscosity_{cfg.problem}.csv", cfg, ["eps", "x", "t", "u"], _viscosity_rows(recs))
    if cfg.plots:
        _write_svg(cfg, cfg.problem, _viscosity_svg(recs, f"{cfg.problem} solutions for several eps"))
    peaks = ", ".join(f"{r.eps:g}:{r.max_value:.4g}" for r in recs)
    print(f"viscosity {cfg.problem}: {len(recs)} runs, peak values {peaks} -> {path}")
    return EXIT_OK


def _check_rows(results) -> list:
    return [[c.check_id, c.params, "PASS" if c.passed else "FAIL"] for c in results]


def _run_check(cfg: RunConfig) -> int:
    res = appendix_checks()
    path = _write_csv(Path(cfg.out) / "check_appendix.csv", cfg, ["check_id", "params", "status"], _check_rows(res))
    failed = sum(not c.passed for c in res)
    print(f"check: {len(res) - failed}/{len(res)} passed -> {path}")
    return EXIT_CHECK if failed else EXIT_OK


def _run_tables(cfg: RunConfig) -> int:
    out = Path(cfg.out)
    tp1, tp2, tp3 = (ProblemSpec.preset(v) for v in ("tp1", "tp2", "tp3"))
    span = list(range(4, 21))
    jobs = [
        ("fig1_tp1", "l2 error vs N", lambda: [convergence_sweep(tp1, [m], span, ["l2"], cfg.quad_size) for m in (8, 12, 16, 20)]),
        ("fig2_tp1", "l2 error vs M", lambda: [convergence_sweep(tp1, span, [n], ["l2"], cfg.quad_size) for n in (8, 12, 16, 20)]),
        ("fig3_tp2", "time seminorms vs N", lambda: [convergence_sweep(tp2, [28], span, ["t0", "t1", "t2"], cfg.quad_size)]),
        ("fig4_tp2", "space seminorms vs M", lambda: [convergence_sweep(tp2, span, [28], ["x0", "x1", "x2"], cfg.quad_size)]),
    ]
    written = []
    for label, title, make in jobs:
        tables = make()
        rows = [row for tb in tables for row in _sweep_rows(tb)]
        written.append(_write_csv(out / f"tables_{label}.csv", cfg, ["M", "N", "norm_id", "error"], rows, label))
        if cfg.plots:
            curves = []
            for tb in tables:
                fixed = tb.rows[0].M if tb.swept == "N" else tb.rows[0].N
                for nid in tb.norm_ids():
                    n, e, _ = tb.series(nid)
                    tag = nid if len(tables) == 1 else f"{'M' if tb.swept == 'N' else 'N'}={fixed}"
                    curves.append((tag, n, e))
            _write_svg(cfg, label, semilog_plot(curves, title, tables[0].swept))
        if label in ("fig3_tp2", "fig4_tp2"):
            rates = family_rates(tables[0], tables[0].norm_ids())
            log.info("%s rates: %s", label, {k: round(v.semilog_rate, 4) for k, v in rates.items()})
    recs = viscosity_study(tp3, [0.0, 0.2, 0.4, 0.6, 0.8, 1.0], 20, 20, cfg.grid, cfg.quad_size)
    written.append(_write_csv(out / "tables_fig5_tp3.csv", cfg, ["eps", "x", "t", "u"], _viscosity_rows(recs), "fig5_tp3"))
    if cfg.plots:
        _write_svg(cfg, "fig5_tp3", _viscosity_svg(recs, "tp3 solutions for several eps"))
    res = appendix_checks()
    written.append(_write_csv(out / "tables_check.csv", cfg, ["check_id", "params", "status"], _check_rows(res), "appendix"))
    failed = sum(not c.passed for c in res)
    print(f"tables: {len(written)} files written to {out}, checks {len(res) - failed}/{len(res)} passed")
    return EXIT_CHECK if failed else EXIT_OK


_RUNNERS = {
    "solve": _run_solve,
    "sweep": _run_sweep,
    "viscosity": _run_viscosity,
    "check": _run_check,
    "tables": _run_tables,
}


def run(config: RunConfig) -> int:
    """Execute a resolved configuration and return the exit status."""
    try:
        return _RUNNERS[config.command](config)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except GJFError as exc:
        print(f"numerical failure in {config.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        cfg = parse_config(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return run(cfg)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
