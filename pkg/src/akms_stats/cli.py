"""Command-line front end: evaluates curves and tables from an INI config and writes CSV.

Config files are flat ``key = value`` sections.  Keys ending in ``_db`` are
read in decibels and converted to linear units.  Sections:

``[link1]``, ``[link2]``
    Pair links for the product/ratio commands (``alpha``, ``kappa``, ``mu``,
    ``m``, ``gamma_bar`` or ``gamma_bar_db``).
``[sd]``, ``[se]``, ``[secrecy]``
    Secrecy links and ``rate_rs`` for ``sop`` and ``spsc``.
``[sd]``, ``[sr]``, ``[rd]``, ``[irs]``
    IRS links and ``n_elements``, ``gamma_s_db``, ``pathloss_beta``, ``method``.
``[policy]``
    ``tol``, ``max_uv``, ``accept`` of the pair evaluators.
``[grid]``
    ``start``, ``stop``, ``points``, ``spacing`` in {linear, log, db} and, for
    the parameter sweeps ``af``, ``sop`` and ``spsc``, ``param`` such as
    ``link1.alpha`` or ``se.gamma_bar``.

Exit codes: 0 success, 1 I/O error, 2 config or parameter error, 3 accuracy
error (including a failed Monte Carlo gate).
"""

from __future__ import annotations

import argparse
import configparser
import dataclasses
import hashlib
import math
import os
import sys
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import partial

import numpy as np

from . import __version__
from .akmu import FadingParams
from .approx import beta_prime_cdf, fit_beta_prime_ratio, fit_gamma_product, gamma_cdf
from .apps import IrsScenario, SecrecyScenario, amount_of_fading, cascade_outage, irs_outage, secrecy_outage, spsc
from .errors import AccuracyError, AkmsError, MomentUndefinedError, ParameterError
from .mc import McConfig, ks_product, ks_ratio, simulate_irs, simulate_product, simulate_ratio
from .prodratio import (
    PairStats,
    Policy,
    product_cdf_curve,
    product_moment,
    product_pdf_array,
    ratio_cdf_curve,
    ratio_moment,
    ratio_pdf_array,
)

COMMANDS = ("pdf-product", "cdf-product", "pdf-ratio", "cdf-ratio", "moments", "approx-fit",
            "op-cascade", "af", "sop", "spsc", "irs-op", "validate")
KS_GATE = 0.0017
IRS_GAP = 0.02

_LINK_KEYS = ("alpha", "kappa", "mu", "m", "gamma_bar")
_SECTION_KEYS = {
    "policy": {"tol", "max_uv", "accept"},
    "grid": {"start", "stop", "points", "spacing", "param"},
    "secrecy": {"rate_rs"},
    "irs": {"n_elements", "gamma_s_db", "pathloss_beta", "method"},
    "mc": {"master_seed", "trials", "stream_count"},
}
_DEFAULT_AXIS = {
    "pdf-product": "y", "cdf-product": "y", "pdf-ratio": "z", "cdf-ratio": "z",
    "moments": "n", "approx-fit": "x", "op-cascade": "gamma_th", "irs-op": "gamma_th",
    "af": "link1.alpha", "sop": "se.gamma_bar", "spsc": "se.gamma_bar", "validate": "gamma_th",
}


class ConfigError(ParameterError):
    """Malformed or inconsistent run configuration."""


# ---------------------------------------------------------------------------
# configuration


@dataclass(frozen=True)
class GridSpec:
    start: float
    stop: float
    points: int
    spacing: str = "linear"
    param: str = ""

    def __post_init__(self):
        if self.spacing not in ("linear", "log", "db"):
            raise ConfigError(f"grid spacing must be linear, log or db, got {self.spacing!r}")
        if self.points < 1:
            raise ConfigError("grid points must be >= 1")
        if self.points > 1 and not self.stop > self.start:
            raise ConfigError("grid must be strictly increasing: stop > start")
        if self.spacing == "log" and not self.start > 0:
            raise ConfigError("log grid needs start > 0")

    def axis(self) -> np.ndarray:
        """Grid values in the units written to the CSV (dB for ``db`` spacing)."""
        if self.spacing == "log":
            return np.logspace(math.log10(self.start), math.log10(self.stop), self.points)
        return np.linspace(self.start, self.stop, self.points)

    def linear(self) -> np.ndarray:
        a = self.axis()
        return 10.0 ** (a / 10.0) if self.spacing == "db" else a


@dataclass(frozen=True)
class RunConfig:
    """Validated contents of a config file plus the command-line overrides."""

    command: str
    sections: dict
    links: dict
    policy: Policy
    grid: GridSpec | None
    mc: McConfig
    what: str = ""
    raw_hash: str = field(default="", compare=False)

    def pair(self) -> PairStats:
        return PairStats(self._link("link1"), self._link("link2"), self.policy)

    def _link(self, name) -> FadingParams:
        if name not in self.links:
            raise ConfigError(f"missing section [{name}]")
        return self.links[name]

    def secrecy(self) -> SecrecyScenario:
        sec = self.sections.get("secrecy", {})
        return SecrecyScenario(self._link("sd"), self._link("se"), float(sec.get("rate_rs", 1.0)))

    def irs(self) -> IrsScenario:
        kw = dict(self.sections.get("irs", {}))
        kw.pop("method", None)
        conv = {"n_elements": int, "gamma_s_db": float, "pathloss_beta": float}
        kw = {k: conv[k](v) for k, v in kw.items()}
        return IrsScenario(self._link("sd"), self._link("sr"), self._link("rd"), **kw)

    def irs_method(self) -> str:
        return self.sections.get("irs", {}).get("method", "auto")

    def need_grid(self) -> GridSpec:
        if self.grid is None:
            raise ConfigError(f"command {self.command} needs a [grid] section")
        return self.grid


def _num(section, key, value, kind=float):
    try:
        v = kind(value)
    except ValueError:
        raise ConfigError(f"[{section}] {key} = {value!r} is not a valid {kind.__name__}") from None
    if kind is float and not math.isfinite(v):
        raise ConfigError(f"[{section}] {key} must be finite")
    return v


def _parse_link(name, items: dict) -> FadingParams:
    kw = {}
    for key, value in items.items():
        base = key[:-3] if key.endswith("_db") else key
        if base not in _LINK_KEYS:
            raise ConfigError(f"[{name}] unknown key {key!r}")
        if base in kw:
            raise ConfigError(f"[{name}] {base} given twice")
        v = _num(name, key, value)
        kw[base] = 10.0 ** (v / 10.0) if key.endswith("_db") else v
    missing = [k for k in _LINK_KEYS[:4] if k not in kw]
    if missing:
        raise ConfigError(f"[{name}] missing keys {missing}")
    return FadingParams(**kw)


def load_config(text: str, command: str, *, tol=None, seed=None, trials=None, what="") -> RunConfig:
    """Parse and validate an INI config for ``command``."""
    cp = configparser.ConfigParser(interpolation=None)
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"config syntax: {exc}".replace("\n", " ")) from None
    sections = {s: dict(cp.items(s)) for s in cp.sections()}

    links = {}
    for name, items in sections.items():
        if name in _SECTION_KEYS:
            bad = set(items) - _SECTION_KEYS[name]
            if bad:
                raise ConfigError(f"[{name}] unknown keys {sorted(bad)}")
        else:
            links[name] = _parse_link(name, items)

    pol = sections.get("policy", {})
    policy = Policy(
        tol=_num("policy", "tol", pol.get("tol", Policy.tol)),
        max_uv=_num("policy", "max_uv", pol.get("max_uv", Policy.max_uv), int),
        accept=_num("policy", "accept", pol.get("accept", Policy.accept)),
    )
    if tol is not None:
        policy = dataclasses.replace(policy, tol=float(tol))
    if not 0 < policy.tol < 1 or not policy.accept > 0 or policy.max_uv < 1:
        raise ConfigError("policy needs 0 < tol < 1, accept > 0 and max_uv >= 1")

    grid = None
    if "grid" in sections:
        g = sections["grid"]
        for key in ("start", "stop", "points"):
            if key not in g:
                raise ConfigError(f"[grid] missing key {key!r}")
        grid = GridSpec(_num("grid", "start", g["start"]), _num("grid", "stop", g["stop"]),
                        _num("grid", "points", g["points"], int), g.get("spacing", "linear").lower(),
                        g.get("param", _DEFAULT_AXIS.get(command, "")))

    m = sections.get("mc", {})
    mc = McConfig(
        master_seed=_num("mc", "master_seed", seed if seed is not None else m.get("master_seed", 2024), int),
        trials=_num("mc", "trials", trials if trials is not None else m.get("trials", 1_000_000), int),
        stream_count=_num("mc", "stream_count", m.get("stream_count", 8), int),
    )

    canon = "\n".join(f"[{s}]" + "".join(f"\n{k}={v}" for k, v in sorted(items.items()))
                      for s, items in sorted(sections.items()))
    extra = f"\ncommand={command}\nwhat={what}\ntol={policy.tol!r}\nseed={mc.master_seed}\ntrials={mc.trials}"
    digest = hashlib.sha256((canon + extra).encode()).hexdigest()[:16]
    return RunConfig(command, sections, links, policy, grid, mc, what, digest)


# ---------------------------------------------------------------------------
# grid evaluation


def _chunks(x: np.ndarray, jobs: int) -> list[np.ndarray]:
    return [c for c in np.array_split(x, max(1, min(jobs, x.size))) if c.size]


def _map_grid(fn, x: np.ndarray, jobs: int) -> list:
    """Apply ``fn`` to chunks of ``x`` and concatenate the per-chunk lists in grid order."""
    if jobs <= 1 or x.size < 2:
        return list(fn(x))
    with ProcessPoolExecutor(max_workers=jobs) as ex:
        parts = list(ex.map(fn, _chunks(x, jobs)))
    return [row for part in parts for row in part]


def _pdf_rows(ps, ratio, x):
    val, err = (ratio_pdf_array if ratio else product_pdf_array)(ps, x)
    return list(zip(val, err))


def _cdf_rows(ps, ratio, x):
    curve = ratio_cdf_curve if ratio else product_cdf_curve
    val = curve(ps, x)
    # a lower-order rule on the same cells bounds the cumulative error
    err = np.abs(val - curve(ps, x, order=12))
    return list(zip(val, err))


def _moment_rows(ps, ns):
    rows = []
    for n in ns:
        try:
            r = ratio_moment(ps, n)
        except MomentUndefinedError:
            r = math.nan
        rows.append((product_moment(ps, n), r))
    return rows


def _scalar_rows(fn, x):
    out = []
    for v in x:
        r = fn(float(v))
        out.append((r.value, r.abs_err_est))
    return out


def _set_param(cfg: RunConfig, param: str, value: float) -> RunConfig:
    try:
        link, key = param.split(".")
    except ValueError:
        raise ConfigError(f"[grid] param must look like link.key, got {param!r}") from None
    if link not in cfg.links or key not in _LINK_KEYS:
        raise ConfigError(f"[grid] param {param!r} does not name a link parameter")
    links = dict(cfg.links)
    links[link] = dataclasses.replace(links[link], **{key: float(value)})
    return dataclasses.replace(cfg, links=links)


def _af_row(cfg, param, x):
    return [(amount_of_fading(_set_param(cfg, param, v).pair()), 0.0) for v in x]


def _secrecy_row(cfg, param, positive, x):
    out = []
    for v in x:
        sc = _set_param(cfg, param, v).secrecy()
        r = spsc(sc) if positive else secrecy_outage(sc)
        out.append((r.value, r.abs_err_est))
    return out


def _irs_rows(sc, method, x):
    return _scalar_rows(lambda g: irs_outage(sc, g, method), x)


def _axis_name(grid: GridSpec, base: str) -> str:
    return base + "_db" if grid.spacing == "db" else base


@dataclass
class Table:
    header: list
    rows: list
    max_err: float = 0.0
    status: int = 0
    note: str = ""


def _evaluate(cfg: RunConfig, jobs: int) -> Table:
    cmd = cfg.command
    if cmd == "validate":
        return _validate(cfg, jobs)
    grid = cfg.need_grid()
    axis, x = grid.axis(), grid.linear()
    if cmd in ("pdf-product", "pdf-ratio", "cdf-product", "cdf-ratio"):
        ratio = cmd.endswith("ratio")
        if cmd.startswith("pdf"):
            rows = _map_grid(partial(_pdf_rows, cfg.pair(), ratio), x, jobs)
        else:
            # the curve is accumulated along the whole grid, so it is not split
            rows = _cdf_rows(cfg.pair(), ratio, x)
        name = "pdf" if cmd.startswith("pdf") else "cdf"
        return Table([_axis_name(grid, _DEFAULT_AXIS[cmd]), name, "abs_err"],
                     [(a, v, e) for a, (v, e) in zip(axis, rows)], max(e for _, e in rows))
    if cmd == "moments":
        rows = _moment_rows(cfg.pair(), x)
        return Table([_axis_name(grid, "n"), "product_moment", "ratio_moment"],
                     [(a, p, r) for a, (p, r) in zip(axis, rows)])
    if cmd == "approx-fit":
        ps = cfg.pair()
        gf, bf = fit_gamma_product(ps), fit_beta_prime_ratio(ps)
        cols = (product_cdf_curve(ps, x), gamma_cdf(gf, x), ratio_cdf_curve(ps, x), beta_prime_cdf(bf, x))
        gap = max(float(np.max(np.abs(cols[0] - cols[1]))), float(np.max(np.abs(cols[2] - cols[3]))))
        return Table([_axis_name(grid, "x"), "product_cdf", "gamma_cdf", "ratio_cdf", "beta_prime_cdf"],
                     list(zip(axis, *cols)),
                     note=f"gamma k={gf.k:.6g} theta={gf.theta:.6g}; beta-prime k1={bf.k1:.6g} "
                          f"k2={bf.k2:.6g}; max cdf gap {gap:.3g}")
    if cmd == "op-cascade":
        rows = _map_grid(partial(_scalar_rows, partial(cascade_outage, cfg.pair())), x, jobs)
        return Table([_axis_name(grid, "gamma_th"), "op", "abs_err"],
                     [(a, v, e) for a, (v, e) in zip(axis, rows)], max(e for _, e in rows))
    if cmd in ("af", "sop", "spsc"):
        param = grid.param
        fn = partial(_af_row, cfg, param) if cmd == "af" else partial(_secrecy_row, cfg, param, cmd == "spsc")
        rows = _map_grid(fn, x, jobs)
        return Table([_axis_name(grid, param), cmd, "abs_err"],
                     [(a, v, e) for a, (v, e) in zip(axis, rows)], max(e for _, e in rows))
    if cmd == "irs-op":
        rows = _map_grid(partial(_irs_rows, cfg.irs(), cfg.irs_method()), x, jobs)
        return Table([_axis_name(grid, "gamma_th"), "op", "abs_err"],
                     [(a, v, e) for a, (v, e) in zip(axis, rows)], max(e for _, e in rows))
    raise ConfigError(f"unknown command {cmd!r}")


def _validate(cfg: RunConfig, jobs: int) -> Table:
    what = cfg.what
    if what in ("product", "ratio"):
        ps = cfg.pair()
        sim = (simulate_product if what == "product" else simulate_ratio)(ps, cfg.mc, jobs)
        ks = (ks_product if what == "product" else ks_ratio)(ps, sim)
        exact = product_moment(ps, 1.0) if what == "product" else _safe_ratio_mean(ps)
        ok = ks < KS_GATE
        return Table(["statistic", "ks", "threshold", "mc_mean", "mc_mean_se", "exact_mean", "pass"],
                     [(what, ks, KS_GATE, sim.mean, sim.mean_se, exact, int(ok))],
                     status=0 if ok else 3, note=f"KS {ks:.3g} vs {KS_GATE}")
    if what == "irs":
        grid = cfg.need_grid()
        sc, method = cfg.irs(), cfg.irs_method()
        axis, x = grid.axis(), grid.linear()
        curve = simulate_irs(sc, cfg.mc, 10.0 * np.log10(x), jobs=jobs)
        rows, ok_all, max_err = [], True, 0.0
        for a, g, op, lo, hi in zip(axis, x, curve.op, curve.lower, curve.upper):
            r = irs_outage(sc, float(g), method)
            ok = abs(r.value - op) <= max(0.5 * (hi - lo), IRS_GAP)
            ok_all &= ok
            max_err = max(max_err, r.abs_err_est)
            rows.append((a, r.value, op, lo, hi, int(ok)))
        return Table([_axis_name(grid, "gamma_th"), "op", "mc_op", "mc_lower", "mc_upper", "pass"],
                     rows, max_err, status=0 if ok_all else 3)
    raise ConfigError(f"validate needs --what product|ratio|irs, got {what!r}")


def _safe_ratio_mean(ps):
    try:
        return ratio_moment(ps, 1.0)
    except MomentUndefinedError:
        return math.nan


# ---------------------------------------------------------------------------
# output


def _fmt(v) -> str:
    if isinstance(v, str):
        return v
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    return "%.12g" % float(v)


def format_csv(cfg: RunConfig, table: Table) -> str:
    lines = [f"# fading-stats v{__version__}, {cfg.command}, {cfg.raw_hash}", ",".join(table.header)]
    lines += [",".join(_fmt(v) for v in row) for row in table.rows]
    return "\n".join(lines) + "\n"


def write_atomic(path: str, text: str) -> None:
    """Write ``text`` to ``path`` through a temporary file in the same directory."""
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix=".csv")
    try:
        with os.fdopen(fd, "w", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# ---------------------------------------------------------------------------
# entry points


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def _parser() -> argparse.ArgumentParser:
    p = _Parser(prog="akms", description="Product/ratio statistics of alpha-kappa-mu shadowed links.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", required=True, help="INI file with link, grid and option sections")
    p.add_argument("--out", required=True, help="CSV output path (written atomically)")
    p.add_argument("--jobs", type=int, default=os.cpu_count() or 1, help="worker processes; output does not depend on it")
    p.add_argument("--tol", type=float, help="series tolerance, overrides [policy] tol")
    p.add_argument("--seed", type=int, help="master seed for validate, overrides [mc] master_seed")
    p.add_argument("--trials", type=int, help="Monte Carlo trials for validate, overrides [mc] trials")
    p.add_argument("--what", choices=("product", "ratio", "irs"), default="", help="statistic checked by validate")
    return p


def run(argv=None) -> int:
    """Run one command; returns the process exit code."""
    try:
        args = _parser().parse_args(argv)
        if args.trials is not None and args.command != "validate":
            raise ConfigError("--trials applies to validate only")
        if args.jobs < 1:
            raise ConfigError("--jobs must be >= 1")
        with open(args.config, encoding="utf-8") as fh:
            text = fh.read()
        cfg = load_config(text, args.command, tol=args.tol, seed=args.seed,
                          trials=args.trials, what=args.what)
        table = _evaluate(cfg, args.jobs)
        if table.status:
            print(f"error: {args.command} failed its acceptance gate: {table.note}", file=sys.stderr)
            return table.status
        write_atomic(args.out, format_csv(cfg, table))
    except AccuracyError as exc:
        print(f"accuracy error: {exc}", file=sys.stderr)
        return 3
    except (AkmsError, ValueError, ArithmeticError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return 1
    note = f"; {table.note}" if table.note else ""
    print(f"{args.command}: wrote {len(table.rows)} rows to {args.out}; "
          f"max abs_err_est {table.max_err:.3g}{note}")
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
