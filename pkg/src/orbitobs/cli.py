"""Command-line front end.

Exit codes: 0 success, 1 invalid input, 2 budget exhausted (partial
results may still be printed), 3 internal invariant violation.
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import logging
import os
import sys
from fractions import Fraction

from . import adelic, arith, codec, config, elliptic, order, power
from .arith import as_rat, rat_str
from .cache import FactorCache
from .errors import InvalidInput, InvariantViolation, OrbitObsError

log = logging.getLogger("orbitobs")

FORMATS = ("json", "csv", "text")
TABULAR = {"order-spectrum", "zsigmondy", "ec-spectrum"}


@dataclasses.dataclass(frozen=True)
class RunConfig:
    prime_budget: int = config.Settings.prime_budget
    factor_effort: int = config.Settings.factor_effort
    coordinate_bit_cap: int = config.Settings.coordinate_bit_cap
    cache_path: str | None = None
    output_format: str = "json"

    def __post_init__(self):
        for name in ("prime_budget", "factor_effort", "coordinate_bit_cap"):
            if getattr(self, name) <= 0:
                raise InvalidInput(f"{name} must be positive")
        if self.output_format not in FORMATS:
            raise InvalidInput(f"output_format must be one of {', '.join(FORMATS)}")


def load_config_file(path: str) -> dict:
    """Flat ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise InvalidInput(f"{path}:{lineno}: expected key = value")
            key, value = (s.strip() for s in line.split("=", 1))
            if key not in {f.name for f in dataclasses.fields(RunConfig)}:
                raise InvalidInput(f"{path}:{lineno}: unknown key {key!r}")
            out[key] = value
    return out


def build_config(args) -> RunConfig:
    values: dict = {}
    if args.config:
        values.update(load_config_file(args.config))
    if os.environ.get("ORBITOBS_CACHE"):
        values["cache_path"] = os.environ["ORBITOBS_CACHE"]
    for key in ("prime_budget", "factor_effort", "coordinate_bit_cap", "cache_path",
                "output_format"):
        flag = getattr(args, key, None)
        if flag is not None:
            values[key] = flag
    try:
        for key in ("prime_budget", "factor_effort", "coordinate_bit_cap"):
            if key in values:
                values[key] = int(values[key])
    except ValueError as exc:
        raise InvalidInput(str(exc)) from exc
    return RunConfig(**values)


# ------------------------------------------------------------ reports

@dataclasses.dataclass(frozen=True)
class ZsigmondyReport:
    lam: Fraction
    n_max: int
    entries: tuple[order.PrimitiveDivisors, ...]

    @property
    def exceptional(self) -> tuple[int, ...]:
        return tuple(e.n for e in self.entries if e.exceptional)


@dataclasses.dataclass(frozen=True)
class TrichotomyReport:
    point: power.ProjPoint2
    curve: power.TorusCurve
    d: int
    verdict: power.TrichotomyVerdict
    curve_preperiodicity: tuple[int, int] | None
    scan: power.IntersectionReport | None


@dataclasses.dataclass(frozen=True)
class LineReport:
    point: power.ProjPoint2
    line: power.LineCurve
    d: int
    result: power.LineIntersection


@dataclasses.dataclass(frozen=True)
class TranslateReport:
    curve: elliptic.EllipticCurve
    point: elliptic.Point
    target: elliptic.Point
    d: int
    outcome: elliptic.TranslateOutcome


codec.register(ZsigmondyReport, TrichotomyReport, LineReport, TranslateReport)


def _rows(command: str, report) -> tuple[list[str], list[list]]:
    if command == "order-spectrum":
        head = ["n", "status", "p", "order", "group_order"]
        rows = []
        for n in range(1, report.n_max + 1):
            if n in report.realized:
                c = report.realized[n]
                rows.append([n, "realized", c.p, c.order, c.group_order])
            else:
                status = "proven-exceptional" if n in report.proven_exceptional else "missing"
                rows.append([n, status, "", "", ""])
        return head, rows
    if command == "ec-spectrum":
        head = ["n", "status", "p", "point_order", "group_order"]
        rows = []
        for n in range(1, report.n_max + 1):
            if n in report.realized:
                c = report.realized[n]
                rows.append([n, "realized", c.p, c.point_order, c.group_order])
            else:
                rows.append([n, "missing", "", "", ""])
        return head, rows
    head = ["n", "status", "cyclotomic_value", "primitive_primes"]
    rows = []
    for e in report.entries:
        status = "exceptional" if e.exceptional else ("primitive" if e.primitive_primes
                                                      else "incomplete")
        rows.append([e.n, status, e.cyclotomic_value, " ".join(map(str, e.primitive_primes))])
    return head, rows


def _text(value, indent=0) -> list[str]:
    pad = "  " * indent
    lines = []
    if isinstance(value, dict):
        for k, v in value.items():
            if isinstance(v, (dict, list)) and v:
                lines.append(f"{pad}{k}:")
                lines.extend(_text(v, indent + 1))
            else:
                lines.append(f"{pad}{k}: {v}")
    elif isinstance(value, list):
        for v in value:
            if isinstance(v, (dict, list)):
                lines.append(f"{pad}-")
                lines.extend(_text(v, indent + 1))
            else:
                lines.append(f"{pad}- {v}")
    else:
        lines.append(f"{pad}{value}")
    return lines


def render(command: str, report, fmt: str, extra: dict | None = None) -> str:
    if fmt == "csv":
        if command not in TABULAR:
            raise InvalidInput(f"{command} produces a structured verdict; use json or text")
        head, rows = _rows(command, report)
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(head)
        writer.writerows(rows)
        return buf.getvalue()
    doc = codec.envelope(command, report, **(extra or {}))
    if fmt == "json":
        return json.dumps(doc, indent=2) + "\n"
    return "\n".join(_text(doc)) + "\n"


# ------------------------------------------------------------ parsing

def parse_point(text: str) -> power.ProjPoint2:
    parts = text.split(",")
    if len(parts) != 3:
        raise InvalidInput(f"point must be a,b,c: {text!r}")
    return power.ProjPoint2.of(*(as_rat(p) for p in parts))


def parse_torus(text: str) -> power.TorusCurve:
    parts = text.split(",")
    if len(parts) != 4:
        raise InvalidInput(f"curve must be A,B,k,l: {text!r}")
    try:
        k, l = int(parts[2]), int(parts[3])
    except ValueError as exc:
        raise InvalidInput(f"k, l must be integers: {text!r}") from exc
    return power.TorusCurve(as_rat(parts[0]), as_rat(parts[1]), k, l)


def parse_line(text: str) -> power.LineCurve:
    parts = text.split(",")
    if len(parts) != 3:
        raise InvalidInput(f"line must be A,B,C: {text!r}")
    return power.LineCurve(*(as_rat(p) for p in parts))


def _json_arg(text: str):
    try:
        return json.loads(text)
    except ValueError as exc:
        raise InvalidInput(f"not valid JSON: {text!r}") from exc


def parse_ec_point(value) -> elliptic.Point:
    if isinstance(value, str) and value.strip().startswith(("[", '"')):
        value = _json_arg(value)
    if value == "inf":
        return None
    if not isinstance(value, list) or len(value) != 2:
        raise InvalidInput(f'point must be ["x", "y"] or "inf": {value!r}')
    return elliptic.make_point(*(str(v) for v in value))


def parse_curve(text: str) -> tuple[elliptic.EllipticCurve, elliptic.Point]:
    """Curve JSON ``{"a4": "...", "a6": "...", "P": [...] | "inf"}``; P optional."""
    data = _json_arg(text)
    if not isinstance(data, dict) or "a4" not in data or "a6" not in data:
        raise InvalidInput("curve JSON needs a4 and a6")
    try:
        E = elliptic.EllipticCurve(int(data["a4"]), int(data["a6"]))
    except (TypeError, ValueError) as exc:
        raise InvalidInput(f"a4, a6 must be integers: {exc}") from exc
    P = parse_ec_point(data["P"]) if "P" in data else None
    if "P" in data and not elliptic.on_curve(E, P):
        raise InvalidInput(f"{data['P']} is not on {E}")
    return E, P


def _ec_inputs(args):
    E, P = parse_curve(args.curve)
    if args.point is not None:
        P = parse_ec_point(args.point)
    if not elliptic.on_curve(E, P):
        raise InvalidInput(f"point is not on {E}")
    return E, P


# ----------------------------------------------------------- commands

def cmd_order_spectrum(args, cfg):
    report = order.order_spectrum(as_rat(args.lam), args.nmax, args.pmax or cfg.prime_budget)
    partial = any(n not in report.proven_exceptional for n in report.missing)
    return report, {}, 2 if partial else 0


def cmd_zsigmondy(args, cfg):
    lam = as_rat(args.lam)
    entries = tuple(order.primitive_divisors(lam, n) for n in range(1, args.nmax + 1))
    report = ZsigmondyReport(lam, args.nmax, entries)
    return report, {}, 0 if all(e.complete for e in entries) else 2


def cmd_trichotomy(args, cfg):
    P, V = parse_point(args.point), parse_torus(args.curve)
    verdict = power.torus_trichotomy(P, V, args.d)
    scan = None
    if args.check is not None:
        scan = power.orbit_torus_intersection(P, V, args.d, args.check)
    report = TrichotomyReport(P, V, args.d, verdict, power.curve_preperiodic(V, args.d), scan)
    return report, {}, 0


def cmd_line_intersect(args, cfg):
    P, L = parse_point(args.point), parse_line(args.line)
    return LineReport(P, L, args.d, power.line_orbit_intersection(P, L, args.d)), {}, 0


def cmd_prop4(args, cfg):
    t = adelic.power_limit_decide(as_rat(args.lam), as_rat(args.xi), args.d,
                                  args.budget, cfg.prime_budget)
    extra = {"lambda": rat_str(t.lam), "xi": rat_str(t.xi), "d": t.d,
             "outcome": type(t.outcome).__name__, "witnesses": []}
    if isinstance(t.outcome, adelic.Refuted):
        extra["witnesses"] = [
            {"p": w.p, "order": w.claimed_order, "subject": w.subject,
             "check_value": w.observed}
            for w in t.outcome.xi_forcing + t.outcome.lambda_forcing]
    if not t.replays():
        raise InvariantViolation("power-limit transcript failed to replay")
    return t, extra, 0


def cmd_ec_spectrum(args, cfg):
    E, P = _ec_inputs(args)
    report = elliptic.elliptic_order_spectrum(E, P, args.nmax, args.pmax or cfg.prime_budget)
    for n, cert in report.realized.items():
        if not cert.verify(E, P):
            raise InvariantViolation(f"certificate for n={n} failed to replay")
    return report, {}, 0


def cmd_ec_translate(args, cfg):
    E, P = _ec_inputs(args)
    T = parse_ec_point(args.target)
    outcome = elliptic.translated_subvariety_check(E, P, T, args.d, args.budget,
                                                   cfg.prime_budget)
    return TranslateReport(E, P, T, args.d, outcome), {}, 0


def cmd_zhat(args, cfg):
    verdict = adelic.zhat_power_limit(args.d, args.m)
    if not verdict.reason.valid_for(args.d, args.m):
        raise InvariantViolation("zhat reason does not check out")
    return verdict, {}, 0


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="file of flat 'key = value' RunConfig settings")
    common.add_argument("--format", dest="output_format", choices=FORMATS)
    common.add_argument("--prime-budget", dest="prime_budget", type=int)
    common.add_argument("--factor-effort", dest="factor_effort", type=int)
    common.add_argument("--coordinate-bit-cap", dest="coordinate_bit_cap", type=int)
    common.add_argument("--cache", dest="cache_path",
                        help="factor cache file (env ORBITOBS_CACHE also works)")
    common.add_argument("-o", "--output", help="write the report here instead of stdout")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = _Parser(prog="orbitobs", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("order-spectrum", parents=[common],
                       help="orders of lambda modulo primes, 1..nmax")
    p.add_argument("--lambda", dest="lam", required=True, help="rational a/b")
    p.add_argument("--nmax", type=int, required=True)
    p.add_argument("--pmax", type=int)
    p.set_defaults(func=cmd_order_spectrum)

    p = sub.add_parser("zsigmondy", parents=[common],
                       help="primitive divisors of a^n - b^n via Phi_n(a, b)")
    p.add_argument("--lambda", dest="lam", required=True)
    p.add_argument("--nmax", type=int, required=True)
    p.set_defaults(func=cmd_zsigmondy)

    p = sub.add_parser("trichotomy", parents=[common],
                       help="power-map orbit against A X^k = B Y^l")
    p.add_argument("--point", required=True, help="a,b,c")
    p.add_argument("--curve", required=True, help="A,B,k,l")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--check", type=int, help="also scan n <= CHECK directly")
    p.set_defaults(func=cmd_trichotomy)

    p = sub.add_parser("line-intersect", parents=[common],
                       help="power-map orbit against A X + B Y + C Z = 0")
    p.add_argument("--point", required=True, help="a,b,c")
    p.add_argument("--line", required=True, help="A,B,C")
    p.add_argument("--d", type=int, required=True)
    p.set_defaults(func=cmd_line_intersect)

    p = sub.add_parser("prop4", parents=[common],
                       help="decide or refute xi = lim lambda^(d^n) at finite places")
    p.add_argument("--lambda", dest="lam", required=True)
    p.add_argument("--xi", required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--budget", type=int, default=3, help="witnesses per phase")
    p.set_defaults(func=cmd_prop4)

    p = sub.add_parser("ec-spectrum", parents=[common],
                       help="orders of a rational point modulo good primes")
    p.add_argument("--curve", required=True, help='{"a4": "..", "a6": "..", "P": [..]}')
    p.add_argument("--point", help='["x", "y"]; overrides P in --curve')
    p.add_argument("--nmax", type=int, required=True)
    p.add_argument("--pmax", type=int)
    p.set_defaults(func=cmd_ec_spectrum)

    p = sub.add_parser("ec-translate", parents=[common],
                       help="congruence test for lim [d^n] P = T")
    p.add_argument("--curve", required=True)
    p.add_argument("--point", help='["x", "y"]; overrides P in --curve')
    p.add_argument("--target", required=True, help='["x", "y"] or "inf"')
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--budget", type=int, default=3)
    p.set_defaults(func=cmd_ec_translate)

    for name in ("zhat-limit", "zhat"):
        p = sub.add_parser(name, parents=[common],
                           help="can d^(r_i) -> m in Z-hat?")
        p.add_argument("--d", type=int, required=True)
        p.add_argument("--m", type=int, required=True)
        p.set_defaults(func=cmd_zhat)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    command = "zhat-limit" if args.command == "zhat" else args.command
    cache = None
    previous = None
    try:
        cfg = build_config(args)
        if cfg.output_format == "csv" and command not in TABULAR:
            raise InvalidInput(f"{command} produces a structured verdict; use json or text")
        if cfg.cache_path:
            cache = FactorCache(cfg.cache_path)
            if cache.dropped:
                log.warning("dropped %d corrupt cache entries", cache.dropped)
            previous = arith.install_cache(cache)
        with config.override(prime_budget=cfg.prime_budget,
                             factor_effort=cfg.factor_effort,
                             coordinate_bit_cap=cfg.coordinate_bit_cap):
            report, extra, code = args.func(args, cfg)
            text = render(command, report, cfg.output_format, extra)
    except OrbitObsError as exc:
        print(f"orbitobs: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    except Exception as exc:  # anything unexpected is a bug
        log.exception("internal error")
        print(f"orbitobs: internal error: {exc!r}", file=sys.stderr)
        return 3
    finally:
        if cache is not None:
            arith.install_cache(previous)
            cache.save()
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
