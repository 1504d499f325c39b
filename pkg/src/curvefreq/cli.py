"""Command-line interface and scenario files.

Every subcommand builds a ``Report`` (a header row, string rows and an
optional JSON block).  Exact rationals are the data; decimals are derived
from them with 20 significant digits.  ``--out`` writes the report as JSON
or CSV depending on the file suffix.

Exit codes: 0 success, 1 computation guard or failed check, 2 invalid input.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import time
from dataclasses import dataclass, field
from decimal import Context, Decimal
from fractions import Fraction
from pathlib import Path
from typing import Any, Sequence

import yaml

from .arcs import ArcChart, FlipSpec, Scenario
from .asym import (
    PhiSpec,
    breve_varphi_closed,
    builtin_phi_spec,
    coefficient_asymptotic,
    order_table,
    sep_vs_ns_order,
    singularity_data,
)
from .errors import CurveFreqError, GuardError, ValidationError
from .frequency import (
    MAX_POINTS,
    appendix_checks,
    builtin_scenario,
    frequency,
    frequency_counting_estimate,
)
from .lattice import count_lattice_points, norbury_ratio
from .polyalg import format_rational, parse_rational
from .tau import TauDiskCache, tau, tau_main_term, tau_upper_bound_holds
from .volume import SurfaceType, kontsevich_polynomial, main_term_polynomial

__all__ = ["Report", "decimal_string", "parse_scenario", "load_scenario", "scenario_to_dict",
           "dump_scenario", "build_parser", "run", "main"]

DIGITS = 20
_CTX = Context(prec=DIGITS)


def decimal_string(q: Fraction | int) -> str:
    """q rounded half-even to 20 significant digits."""
    q = Fraction(q)
    return str(_CTX.divide(Decimal(q.numerator), Decimal(q.denominator)))


def _exact(q: Fraction | int) -> str:
    return format_rational(q)


@dataclass
class Report:
    command: str
    inputs: dict[str, Any]
    columns: list[str]
    rows: list[list[str]] = field(default_factory=list)
    extra: dict[str, Any] = field(default_factory=dict)
    timings: dict[str, float] = field(default_factory=dict)
    ok: bool = True

    def add(self, *values: Any) -> None:
        self.rows.append([str(v) for v in values])

    def csv_text(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        w.writerows(self.rows)
        return buf.getvalue()

    def to_dict(self, with_timings: bool = False) -> dict:
        out = {
            "command": self.command,
            "inputs": self.inputs,
            "columns": self.columns,
            "rows": self.rows,
        }
        if self.extra:
            out["extra"] = self.extra
        if with_timings:
            out["timings"] = self.timings
        return out

    def text(self) -> str:
        out = self.csv_text()
        if self.extra:
            out += json.dumps(self.extra, indent=2, sort_keys=True) + "\n"
        return out

    def write(self, path: Path, with_timings: bool = False) -> None:
        if path.suffix.lower() == ".csv":
            path.write_text(self.csv_text(), encoding="utf-8")
        else:
            path.write_text(json.dumps(self.to_dict(with_timings), indent=2, sort_keys=True) + "\n",
                            encoding="utf-8")


# -- scenario files -----------------------------------------------------------

def _as_int(value: Any, where: str, errors: list[str]) -> int | None:
    if isinstance(value, bool) or not isinstance(value, int):
        errors.append(f"{where}: expected an integer, got {value!r}")
        return None
    return value


def _as_fraction(value: Any, where: str, errors: list[str]) -> Fraction | None:
    try:
        if isinstance(value, bool):
            raise ValueError
        if isinstance(value, int):
            return Fraction(value)
        return parse_rational(str(value))
    except (ValueError, ZeroDivisionError, ValidationError):
        errors.append(f"{where}: expected a rational, got {value!r}")
        return None


def _section(doc: dict, key: str, errors: list[str], required: bool = True) -> dict:
    sec = doc.get(key)
    if sec is None:
        if required:
            errors.append(f"missing section '{key}'")
        return {}
    if not isinstance(sec, dict):
        errors.append(f"section '{key}' must be a mapping")
        return {}
    return sec


def _parse_charts(items: Any, errors: list[str]) -> list[ArcChart]:
    if not isinstance(items, list) or not items:
        errors.append("'charts' must be a non-empty list")
        return []
    charts = []
    for i, item in enumerate(items, start=1):
        if not isinstance(item, dict):
            errors.append(f"charts[{i}] must be a mapping")
            continue
        name = str(item.get("name", f"chart{i}"))
        try:
            charts.append(ArcChart(
                tuple(tuple(row) for row in item.get("incidence", [])),
                tuple(item.get("iota", [])),
                stabilizer_order=int(item.get("stabilizer", 1)),
                name=name,
                n_boundary=item.get("n_boundary"),
            ))
        except ValidationError as exc:
            errors.extend(exc.errors)
        except (TypeError, ValueError) as exc:
            errors.append(f"{name}: malformed chart ({exc})")
    return charts


def _parse_flip(sigma: dict, n_boundary: int, errors: list[str]) -> FlipSpec | None:
    orbits = sigma.get("flip", [])
    if not isinstance(orbits, list):
        errors.append("sigma.flip must be a list of orbits")
        return None
    swaps = []
    for k, orbit in enumerate(orbits, start=1):
        orbit = orbit if isinstance(orbit, list) else [orbit]
        if len(orbit) == 2:
            swaps.append(tuple(orbit))
        elif len(orbit) != 1:
            errors.append(f"sigma.flip[{k}] must have one or two boundaries, got {orbit}")
    n_prime = sigma.get("n_prime", 0)
    try:
        return FlipSpec(n_boundary, tuple(swaps), n_annuli=int(n_prime))
    except ValidationError as exc:
        errors.extend(exc.errors)
    except (TypeError, ValueError):
        errors.append(f"sigma.n_prime: expected an integer, got {n_prime!r}")
    return None


def parse_scenario(text: str, source: str = "<string>") -> Scenario:
    """Scenario from YAML (or JSON) text; raises ValidationError listing every problem."""
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f"{source}:{mark.line + 1}:{mark.column + 1}" if mark else source
        raise ValidationError(f"{where}: syntax error: {getattr(exc, 'problem', exc)}") from None
    if not isinstance(doc, dict):
        raise ValidationError(f"{source}: top level must be a mapping")
    errors: list[str] = []
    warnings: list[str] = []
    meta = _section(doc, "meta", errors, required=False)
    sigma = _section(doc, "sigma", errors)
    zsec = _section(doc, "Z", errors)
    consts = _section(doc, "constants", errors, required=False)
    charts = _parse_charts(doc.get("charts"), errors)

    n_boundary = sigma.get("n_boundary", charts[0].n if charts else 0)
    flip = _parse_flip(sigma, n_boundary, errors)
    chi = _as_int(sigma.get("chi"), "sigma.chi", errors)

    comps = zsec.get("components", [])
    types = []
    if not isinstance(comps, list) or not comps:
        errors.append("Z.components must be a non-empty list")
    else:
        for i, c in enumerate(comps, start=1):
            if not isinstance(c, dict) or "g" not in c or "n" not in c:
                errors.append(f"Z.components[{i}] needs integer fields g and n")
                continue
            g = _as_int(c["g"], f"Z.components[{i}].g", errors)
            n = _as_int(c["n"], f"Z.components[{i}].n", errors)
            if g is not None and n is not None:
                types.append((g, n))
    Z = None
    if types:
        try:
            Z = SurfaceType.from_types(types)
        except ValidationError as exc:
            errors.extend(exc.errors)
    gluing_raw = zsec.get("gluing", {})
    gluing: dict[str, tuple[str, ...]] = {}
    if not isinstance(gluing_raw, dict):
        errors.append("Z.gluing must be a mapping")
    else:
        for key, targets in gluing_raw.items():
            targets = targets if isinstance(targets, list) else [targets]
            gluing[str(key)] = tuple(str(t) for t in targets)

    k = {}
    for name in ("k1", "k2"):
        if name in consts:
            k[name] = _as_fraction(consts[name], f"constants.{name}", errors)
        else:
            k[name] = Fraction(1)
            warnings.append(f"constants.{name} missing, using 1")
    sym = _as_int(consts.get("sym", 1), "constants.sym", errors)

    def opt_int(key: str) -> int | None:
        return _as_int(meta[key], f"meta.{key}", errors) if key in meta else None

    genus, K = opt_int("genus"), opt_int("K")
    if errors or flip is None or Z is None or chi is None:
        raise ValidationError(errors or [f"{source}: incomplete scenario"])
    try:
        return Scenario(
            name=str(meta.get("name", Path(source).stem)),
            charts=tuple(charts),
            flip=flip,
            Z=Z,
            gluing=gluing,
            chi_sigma=chi,
            sym=sym,
            k1=k["k1"],
            k2=k["k2"],
            genus=genus,
            K=K,
            genus_formula=None if meta.get("genus_formula") is None else str(meta["genus_formula"]),
            warnings=tuple(warnings),
        )
    except ValidationError as exc:
        raise ValidationError([f"{source}: {e}" for e in exc.errors]) from None


def load_scenario(ref: str) -> Scenario:
    """``builtin:<name>`` or a path to a scenario file."""
    if ref.startswith("builtin:"):
        return builtin_scenario(ref[len("builtin:"):])
    path = Path(ref)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ValidationError(f"cannot read {ref}: {exc.strerror}") from None
    return parse_scenario(text, str(path))


def scenario_to_dict(s: Scenario) -> dict:
    meta: dict[str, Any] = {"name": s.name}
    if s.genus is not None:
        meta["genus"] = s.genus
    if s.genus_formula is not None:
        meta["genus_formula"] = s.genus_formula
    if s.K is not None:
        meta["K"] = s.K
    return {
        "meta": meta,
        "sigma": {
            "chi": s.chi_sigma,
            "n_boundary": s.n_boundary,
            "n_prime": s.n_prime,
            "flip": [list(p) for p in s.flip.swaps] + [[j] for j in s.flip.fixed],
        },
        "charts": [c.to_dict() for c in s.charts],
        "Z": {
            "components": [{"g": c.g, "n": c.n} for c in s.Z.components],
            "gluing": {k: list(v) for k, v in s.gluing.items()},
        },
        "constants": {"sym": s.sym, "k1": _exact(s.k1), "k2": _exact(s.k2)},
    }


def dump_scenario(s: Scenario) -> str:
    return yaml.safe_dump(scenario_to_dict(s), sort_keys=False, default_flow_style=None)


def _load_phi_spec(ref: str) -> PhiSpec:
    if ref.startswith("builtin:"):
        return builtin_phi_spec(ref[len("builtin:"):])
    path = Path(ref)
    try:
        doc = yaml.safe_load(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ValidationError(f"cannot read {ref}: {exc.strerror}") from None
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f"{ref}:{mark.line + 1}:{mark.column + 1}" if mark else ref
        raise ValidationError(f"{where}: syntax error") from None
    if not isinstance(doc, dict):
        raise ValidationError(f"{ref}: top level must be a mapping")
    errors: list[str] = []
    charts = _parse_charts(doc.get("charts"), errors)
    n_prime = doc.get("n_prime", doc.get("sigma", {}).get("n_prime", 0))
    if errors:
        raise ValidationError(errors)
    return PhiSpec(str(doc.get("name", path.stem)), tuple(charts), int(n_prime))


# -- subcommands --------------------------------------------------------------

def _cmd_tau(args) -> Report:
    d = list(args.d)
    rep = Report("tau", {"g": args.g, "d": d}, ["quantity", "exact", "decimal"])
    value = tau(args.g, d, allow_large=args.allow_large)
    rep.add("tau", _exact(value), decimal_string(value))
    if args.compare:
        main = tau_main_term(args.g, d)
        rep.add("main_term", _exact(main), decimal_string(main))
        if main:
            rep.add("ratio", _exact(value / main), decimal_string(value / main))
        rep.add("bound_holds", str(tau_upper_bound_holds(args.g, d)).lower(), "")
    return rep


def _cmd_volume(args) -> Report:
    poly = (main_term_polynomial if args.main_term else kontsevich_polynomial)(args.g, args.n)
    rep = Report("volume", {"g": args.g, "n": args.n, "main_term": args.main_term},
                 ["monomial", "coefficient"])
    for exps, c in sorted(poly.items(), reverse=True):
        mono = "*".join(f"{v}^{e}" if e > 1 else v for v, e in zip(poly.variables, exps) if e) or "1"
        rep.add(mono, _exact(c))
    return rep


def _cmd_freq(args) -> Report:
    s = load_scenario(args.scenario)
    rep = Report("freq", {"scenario": args.scenario}, ["item", "exact", "decimal"])
    for w in s.warnings:
        print(f"warning: {w}", file=sys.stderr)
    t = time.perf_counter()
    result = frequency(s, jobs=args.jobs)
    rep.timings["frequency"] = time.perf_counter() - t
    rep.add("prefactor", _exact(result.prefactor), decimal_string(result.prefactor))
    for name, v in result.contributions:
        rep.add(f"chart:{name}", _exact(v), decimal_string(v))
    rep.add("frequency", _exact(result.total), decimal_string(result.total))
    if args.estimate:
        limit = sys.maxsize if args.allow_large else MAX_POINTS
        t = time.perf_counter()
        est = frequency_counting_estimate(s, args.estimate, jobs=args.jobs, max_points=limit)
        rep.timings["estimate"] = time.perf_counter() - t
        rep.inputs["estimate"] = args.estimate
        rep.add(f"estimate(L={args.estimate})", _exact(est), decimal_string(est))
        if result.total:
            err = abs(est - result.total) / result.total
            rep.add("relative_error", _exact(err), decimal_string(err))
    return rep


def _order_report(K: int, command: str) -> Report:
    rep = Report(command, {"K": K}, ["local type", "case", "order"])
    for label, order in order_table(K):
        rep.add(label, order.case, str(order))
    rep.extra = sep_vs_ns_order(K)
    return rep


def _cmd_asym(args) -> Report:
    if args.action == "table":
        if args.K is None:
            raise ValidationError("asym table needs --K")
        return _order_report(args.K, "asym table")
    if not args.spec:
        raise ValidationError("asym needs --spec (or the 'table' action)")
    if args.N < 1:
        raise ValidationError("--N must be positive")
    spec = _load_phi_spec(args.spec)
    rep = Report("asym", {"spec": args.spec, "N": args.N},
                 ["N", "exact", "main_term", "ratio"])
    data = singularity_data(spec)
    for N in range(1, args.N + 1):
        exact = breve_varphi_closed(spec, N)
        main = coefficient_asymptotic(spec, N)
        if main.log_power:
            main_txt = f"{_exact(main.rational)}*log(N)^{main.log_power}"
        else:
            main_txt = _exact(main.rational)
        if not main.rational:
            ratio = ""
        elif main.log_power:
            # irrational: float precision only
            ratio = f"{main.ratio(exact):.15g}"
        else:
            ratio = decimal_string(exact / main.rational)
        rep.add(N, _exact(exact), main_txt, ratio)
    rep.extra = {"singularity": data.to_dict(), "case": coefficient_asymptotic(spec, 1).case}
    return rep


def _cmd_lattice(args) -> Report:
    if args.norbury:
        scales = args.scales or [1, 2, 4, 8]
        rep = Report("lattice", {"g": args.g, "n": args.n, "norbury": True, "scales": scales},
                     ["scale", "N", "leading", "ratio"])
        for k in scales:
            N, V = norbury_ratio(args.g, args.n, k, args.b)
            rep.add(k, _exact(N), _exact(V), decimal_string(N / V) if V else "")
        return rep
    if args.b is None:
        raise ValidationError("lattice needs --b (or --norbury)")
    N = count_lattice_points(args.g, args.n, args.b, trivalent_only=args.trivalent_only,
                             allow_zero_edges=args.allow_zero_edges)
    rep = Report("lattice", {"g": args.g, "n": args.n, "b": list(args.b)}, ["b", "N", "decimal"])
    rep.add(" ".join(map(str, args.b)), _exact(N), decimal_string(N))
    return rep


def _cmd_table(args) -> Report:
    return _order_report(args.K, "table")


def _cmd_appendix(args) -> Report:
    rep = Report("appendix-check", {}, ["status", "quantity", "expected", "computed"])
    for name, expected, computed in appendix_checks():
        ok = expected == computed
        rep.ok &= ok
        rep.add("PASS" if ok else "FAIL", name, _exact(expected), _exact(computed))
    return rep


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--out", type=Path, help="write the report as JSON (or CSV for *.csv)")
    p.add_argument("--jobs", type=int, default=1, help="worker threads (results do not depend on it)")
    p.add_argument("--allow-large", action="store_true", help="lift the desk-scale size guards")
    p.add_argument("--timings", action="store_true", help="include timings in the --out JSON")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(prog="curvefreq", description="Frequencies of curves on hyperbolic surfaces.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("tau", parents=[common], help="intersection number <tau_d1 ... tau_dn>_g")
    p.add_argument("--g", type=int, required=True)
    p.add_argument("--d", type=int, nargs="+", required=True)
    p.add_argument("--compare", action="store_true", help="also print the large-genus main term")
    p.set_defaults(func=_cmd_tau)

    p = sub.add_parser("volume", parents=[common], help="Kontsevich polynomial V_{g,n}")
    p.add_argument("--g", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--main-term", action="store_true", help="print the large-genus approximation")
    p.set_defaults(func=_cmd_volume)

    p = sub.add_parser("freq", parents=[common], help="exact frequency of a scenario")
    p.add_argument("--scenario", required=True, help="file path or builtin:<name>")
    p.add_argument("--estimate", type=int, metavar="L", help="also run the lattice-count estimate at L")
    p.set_defaults(func=_cmd_freq)

    p = sub.add_parser("asym", parents=[common], help="coefficient asymptotics, or 'asym table'")
    p.add_argument("action", nargs="?", choices=["table"])
    p.add_argument("--spec", help="file path or builtin:<name>")
    p.add_argument("--N", type=int, default=20)
    p.add_argument("--K", type=int)
    p.set_defaults(func=_cmd_asym)

    p = sub.add_parser("lattice", parents=[common], help="lattice counts N_{g,n}(b)")
    p.add_argument("--g", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--b", type=int, nargs="+")
    p.add_argument("--trivalent-only", action="store_true")
    p.add_argument("--allow-zero-edges", action="store_true")
    p.add_argument("--norbury", action="store_true", help="compare N(kb) with its polynomial leading part")
    p.add_argument("--scales", type=int, nargs="+")
    p.set_defaults(func=_cmd_lattice)

    p = sub.add_parser("table", parents=[common], help="large-genus order table for K self-intersections")
    p.add_argument("--K", type=int, required=True)
    p.set_defaults(func=_cmd_table)

    p = sub.add_parser("appendix-check", parents=[common], help="check the worked genus-2 values")
    p.set_defaults(func=_cmd_appendix)
    return parser


def run(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    cache = TauDiskCache.from_env()
    try:
        if cache:
            cache.load()
        report = args.func(args)
        if cache:
            cache.save()
    except GuardError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ValidationError as exc:
        for e in exc.errors:
            print(f"error: {e}", file=sys.stderr)
        return 2
    except CurveFreqError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    sys.stdout.write(report.text())
    if args.out:
        report.write(args.out, with_timings=args.timings)
    return 0 if report.ok else 1


def main() -> None:
    sys.exit(run())
