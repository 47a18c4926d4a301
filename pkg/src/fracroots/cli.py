"""Command-line front end.

Exit codes: 0 ok, 1 undecided or incomplete, 2 bad input, 3 internal
disagreement, 4 verification failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import re
import sys
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from decimal import Decimal, InvalidOperation
from fractions import Fraction

from . import __version__
from .atypical import (
    EnumerationReport,
    AtypicalCertificate,
    check_typical_identity,
    enumerate_both,
    enumerate_continuant,
    replay_certificate,
    replay_report,
    scan_direct,
    verify_rational_bound,
)
from .contfrac import cf_of, convergents, format_cf, lambda_k
from .errors import (
    DomainError,
    InputError,
    InternalDisagreement,
    UndecidedError,
    VerificationFailure,
)
from .families import (
    VerificationReport,
    build_root2_case,
    count_statistics,
    parse_family,
    sample_thetas,
    verify_empty,
    verify_infinite,
)
from .mtheta import (
    _LogValue,
    is_atypical,
    m_prime,
    m_theta,
    parse_quadratic,
    parse_theta,
    typical_value,
)
from .realnum import Ball, Rational, RecipLogTheta, RefinePolicy, compare, evaluate

SCHEMA_VERSION = "1"
ENV_PREFIX = "FRACROOTS_"

EXIT_OK, EXIT_UNDECIDED, EXIT_INPUT, EXIT_INTERNAL, EXIT_VERIFY = 0, 1, 2, 3, 4


@dataclass
class RunConfig:
    command: str
    options: dict = field(default_factory=dict)
    precision_start: int = 64
    precision_cap: int = 16384
    format: str = "json"
    jobs: int = 1
    seed: int = 0

    @property
    def policy(self) -> RefinePolicy:
        return RefinePolicy(start=self.precision_start, cap=self.precision_cap)


class CommandResult:
    def __init__(self, payload, rows=None, columns=None, exit_code=EXIT_OK):
        self.payload = payload
        self.rows = rows
        self.columns = columns
        self.exit_code = exit_code


# ---------------------------------------------------------------------------
# argument helpers


def parse_int(text: str) -> int:
    """Integers written plainly or as ``1e15``."""
    try:
        d = Decimal(text.strip())
    except InvalidOperation as exc:
        raise InputError(f"not an integer: {text!r}") from exc
    if d != d.to_integral_value():
        raise InputError(f"not an integer: {text!r}")
    return int(d)


def parse_range(text: str) -> range:
    num = r"-?\d+(?:[eE]\+?\d+)?"
    m = re.fullmatch(rf"\s*({num})\s*(?:\.\.\s*({num}))?\s*", text)
    if not m:
        raise InputError(f"bad range {text!r}; expected a..b or a single integer")
    lo = parse_int(m.group(1))
    hi = parse_int(m.group(2)) if m.group(2) else lo
    if hi < lo:
        raise InputError(f"empty range {text!r}")
    return range(lo, hi + 1)


def parse_params(text: str | None) -> dict:
    """``c=4``, ``p=10,q=1`` or ``a=[1;period(2,1)]`` (brackets may contain commas)."""
    out = {}
    if not text:
        return out
    for m in re.finditer(r"(\w+)=(\[[^\]]*\]|[^,]+)", text):
        out[m.group(1)] = m.group(2).strip()
    if not out:
        raise InputError(f"bad params {text!r}")
    return out


def parse_value(text: str):
    """``2/log(<theta>)``, ``1/log(<theta>)`` or ``quad:(a+b*sqrt(d))/c``."""
    t = text.strip()
    m = re.fullmatch(r"(\d+)/log\((.+)\)", t)
    if m:
        return RecipLogTheta(parse_theta(m.group(2)), int(m.group(1)))
    if t.startswith("quad:"):
        q = parse_quadratic(t[5:])
        if isinstance(q, Fraction):
            raise InputError("value is rational; it has a finite continued fraction")
        return q
    raise InputError(f"bad value {text!r}; expected m/log(theta) or quad:(a+b*sqrt(d))/c")


def ball_text(b: Ball | None) -> str:
    if b is None:
        return ""
    if b.is_exact():
        return f"{float(b.lo):.12g}"
    return f"{float(b.mid):.12g} ± {float(b.width / 2):.2g}"


# ---------------------------------------------------------------------------
# commands


def cmd_mtheta(cfg: RunConfig) -> CommandResult:
    theta = parse_theta(cfg.options["theta"])
    pol = cfg.policy
    rows, undecided = [], False
    for n in parse_range(cfg.options["n"]):
        if n == 0:
            continue
        row = {"n": str(n), "m_theta": None, "m_prime": None, "typical": None, "atypical": None, "status": "ok"}
        try:
            row["m_prime"] = str(m_prime(theta, n, pol))
            row["typical"] = str(typical_value(theta, n, pol))
            if n >= 1:
                try:
                    row["m_theta"] = str(m_theta(theta, n, pol))
                except DomainError:
                    row["status"] = "m_theta undefined: integer root"
                row["atypical"] = is_atypical(theta, n, paranoid=cfg.options.get("paranoid", False), policy=pol).atypical
        except UndecidedError as exc:
            row["status"] = f"undecided: {exc}"
            undecided = True
        rows.append(row)
    payload = {"theta": theta.canonical(), "rows": rows}
    cols = ["n", "m_theta", "m_prime", "typical", "atypical", "status"]
    return CommandResult(payload, rows, cols, EXIT_UNDECIDED if undecided else EXIT_OK)


def _auto_method(theta, pol) -> str:
    if theta.log_is_rational:
        return "direct"
    return "continuant" if compare(_LogValue(theta), 3, "<", pol) else "direct"


def cmd_atypical(cfg: RunConfig) -> CommandResult:
    theta = parse_theta(cfg.options["theta"])
    N = parse_int(cfg.options["limit"])
    method = cfg.options.get("method") or "auto"
    pol = cfg.policy
    if method == "auto":
        method = _auto_method(theta, pol)
    kw = {"jobs": cfg.jobs, "paranoid": cfg.options.get("paranoid", False), "policy": pol}
    if method == "direct":
        rep = scan_direct(theta, N, **kw)
    elif method == "continuant":
        rep = enumerate_continuant(theta, N, **kw)
    elif method == "both":
        rep = enumerate_both(theta, N, **kw)
    else:
        raise InputError(f"unknown method {method!r}")
    rows = [{"n": str(n)} for n in rep.members]
    return CommandResult(rep.to_json(), rows, ["n"], EXIT_OK if rep.complete else EXIT_UNDECIDED)


def cmd_cf(cfg: RunConfig) -> CommandResult:
    x = parse_value(cfg.options["value"])
    K = int(cfg.options.get("terms") or 20)
    # extra terms keep the last lambda_k values tight
    cf = cf_of(x, K + 40, cfg.policy)
    upto = K if cf.is_periodic else min(K, cf.certified_upto)
    rows = []
    for k in range(upto + 1):
        c = convergents(cf, k)
        row = {"k": k, "a": str(cf.term(k)), "A": str(c.A), "B": str(c.B), "lambda": None, "lambda_exact": None, "coarse": None}
        if k >= 1:
            lam = lambda_k(cf, k, 64)
            row["lambda"] = lam.ball.to_json()
            row["lambda_text"] = ball_text(lam.ball)
            row["lambda_exact"] = None if lam.exact is None else str(lam.exact)
            row["coarse"] = lam.coarse
        rows.append(row)
    payload = {
        "value": x.canonical() if hasattr(x, "canonical") else str(x),
        "expansion": format_cf(cf.preperiod, cf.period) if cf.is_periodic else format_cf(cf.a),
        "periodic": cf.is_periodic,
        "requested_terms": K,
        "certified_upto": upto,
        "rows": rows,
    }
    short = upto < K
    return CommandResult(payload, rows, ["k", "a", "A", "B", "lambda_text", "coarse"], EXIT_UNDECIDED if short else EXIT_OK)


def _verify_log2_endpoints(cfg) -> dict:
    pol = cfg.policy
    theta = parse_theta("rational:2")
    rep = VerificationReport("log2-endpoints")
    N = 10**15
    er = enumerate_continuant(theta, N, policy=pol)
    B35 = 777451915729368
    rep.check("A_2 up to 1e15 is {1, B35}", er.complete and er.members == [1, B35], members=[str(n) for n in er.members])
    exceed = [row["k"] for row in er.lambda_table if row.get("exceeds_6_over_log")]
    rep.check("lambda_2 and lambda_36 are the only even lambdas above 6/log 2", exceed == [2, 36], exceeding=exceed)
    cf = cf_of(RecipLogTheta(theta, 2), 40, pol)
    lam2 = lambda_k(cf, 2, 128).ball
    six = RecipLogTheta(theta, 6).ball(128)
    rep.check(
        "8.65 < 6/log 2 < lambda_2 < 8.73",
        six.gt(Rational(Fraction(865, 100)).ball(128)) and lam2.gt(six) and lam2.lt(Rational(Fraction(873, 100)).ball(128)),
        lambda_2=ball_text(lam2),
    )
    rep.check("B_35 = 777451915729368", cf.B(35) == B35)
    for n in (1, B35):
        r = is_atypical(theta, n, paranoid=True, policy=pol)
        rep.check(f"{n} is atypical", r.atypical, via=r.via)
    rep.check(
        "M_2(B35) = typical + 1",
        m_theta(theta, B35, pol) == typical_value(theta, B35, pol) + 1,
    )
    return rep.to_json()


def _verify_root2_identity(cfg, params) -> dict:
    pol = cfg.policy
    L = parse_int(params.get("limit", "10000"))
    theta = parse_theta("exp-quadratic:(0+1*sqrt(2))/1")
    rep = VerificationReport("root2-identity")
    bad = check_typical_identity(theta, range(-L, L + 1), pol)
    rep.check(f"M'(n) = floor(n/sqrt 2 - 1/2) for 0 < |n| <= {L}", not bad, exceptions=bad[:10])
    er = enumerate_continuant(theta, 10**12, policy=pol)
    rep.check("no continuant candidate up to 1e12", er.candidates_examined == 0 and not er.members)
    fam = verify_empty(build_root2_case(), int(params.get("depth", 25)), min(L, 10**4), policy=pol)
    rep.checks.extend(fam.checks)
    rep.failures.extend(fam.failures)
    rep.passed = rep.passed and fam.passed
    return rep.to_json()


def cmd_verify(cfg: RunConfig) -> CommandResult:
    case = cfg.options["case"]
    params = parse_params(cfg.options.get("params"))
    depth = cfg.options.get("depth")
    limit = cfg.options.get("limit")
    pol = cfg.policy
    if case == "log2-endpoints":
        out = _verify_log2_endpoints(cfg)
    elif case == "root2-identity":
        if limit:
            params.setdefault("limit", limit)
        out = _verify_root2_identity(cfg, params)
    elif case == "family-empty":
        fp = _family_from_params("empty", params)
        out = verify_empty(fp, int(depth or 25), parse_int(limit or "10000"), policy=pol).to_json()
        out["family"] = fp.to_json()
    elif case == "family-infinite":
        fp = _family_from_params("infinite", params)
        out = verify_infinite(fp, int(depth or 20), policy=pol).to_json()
        out["family"] = fp.to_json()
    elif case == "rational-bound":
        try:
            p, q = int(params["p"]), int(params.get("q", 1))
        except (KeyError, ValueError) as exc:
            raise InputError("rational-bound needs params p=<int>,q=<int>") from exc
        r = verify_rational_bound(p, q, int(params.get("margin", 100)), jobs=cfg.jobs)
        out = {
            "kind": "verification",
            "name": "rational-bound",
            "passed": r["passed"],
            "checks": [{"check": "no atypical n >= p^2/(6q)", "ok": r["passed"], **{k: (v if not isinstance(v, list) else [str(x) for x in v]) for k, v in r.items() if k != "passed"}}],
            "failures": [] if r["passed"] else [{"violations": [str(v) for v in r["violations"]]}],
            "notes": [],
        }
    else:
        raise InputError(f"unknown case {case!r}")
    rows = [{"check": c["check"], "ok": c["ok"]} for c in out["checks"]]
    return CommandResult(out, rows, ["check", "ok"], EXIT_OK if out["passed"] else EXIT_VERIFY)


def _family_from_params(kind: str, params: dict):
    if "c" in params:
        return parse_family(f"{kind}:c={params['c']}")
    if "a" in params:
        return parse_family(f"{kind}:a={params['a']}")
    if "family" in params:
        return parse_family(params["family"])
    raise InputError("family cases need params c=<int> or a=[...]")


def cmd_stats(cfg: RunConfig) -> CommandResult:
    samples = int(cfg.options.get("samples") or 50)
    N = parse_int(cfg.options.get("limit") or "1e12")
    thetas = sample_thetas(samples, cfg.seed, cfg.options.get("kind") or "rational")
    for t in cfg.options.get("force_theta") or []:
        thetas.append(parse_theta(t))
    rows = []
    tot_c, tot_e = 0, 0.0
    for th in thetas:
        try:
            s = count_statistics(th, N, policy=cfg.policy)
        except (InputError, UndecidedError) as exc:
            rows.append({"theta": th.canonical(), "limit": str(N), "count": None, "expected": None, "ratio": None, "error": str(exc)})
            continue
        tot_c += s.count
        tot_e += s.expected
        rows.append({"theta": s.theta, "limit": str(N), "count": s.count, "expected": round(s.expected, 12), "ratio": None if s.ratio is None else round(s.ratio, 12), "error": None})
    agg = tot_c / tot_e if tot_e else None
    rows.append({"theta": "aggregate", "limit": str(N), "count": tot_c, "expected": round(tot_e, 12), "ratio": None if agg is None else round(agg, 12), "error": None})
    payload = {"seed": cfg.seed, "samples": samples, "rows": rows}
    return CommandResult(payload, rows, ["theta", "limit", "count", "expected", "ratio", "error"])


def cmd_replay(cfg: RunConfig) -> CommandResult:
    path = cfg.options["file"]
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    data = doc.get("result", doc)
    kind = data.get("kind")
    if kind == "enumeration-report":
        rep = EnumerationReport.from_json(data)
        problems = replay_report(rep, cfg.policy)
        count = len(rep.certificates)
    elif kind == "certificate":
        problems = replay_certificate(AtypicalCertificate.from_json(data), cfg.policy)
        count = 1
    else:
        raise InputError(f"nothing to replay in {path} (kind={kind!r})")
    payload = {"kind": "replay", "file": path, "replayed": count, "problems": problems, "passed": not problems}
    rows = [{"problem": p} for p in problems]
    return CommandResult(payload, rows, ["problem"], EXIT_OK if not problems else EXIT_VERIFY)


def cmd_explore(cfg: RunConfig) -> CommandResult:
    """Observed atypical n for any theta; reports data only."""
    theta = parse_theta(cfg.options["theta"])
    N = parse_int(cfg.options.get("limit") or "10000")
    rep = scan_direct(theta, N, jobs=cfg.jobs, policy=cfg.policy)
    rows = []
    for n in rep.members:
        x = n / float(evaluate(_LogValue(theta), 64).mid)
        rows.append({"n": str(n), "n_over_log_theta": f"{x:.12g}"})
    payload = {
        "theta": theta.canonical(),
        "limit": str(N),
        "observed": [str(n) for n in rep.members],
        "complete": rep.complete,
        "note": "observed members only; nothing is claimed beyond the scanned range",
    }
    return CommandResult(payload, rows, ["n", "n_over_log_theta"], EXIT_OK if rep.complete else EXIT_UNDECIDED)


COMMANDS = {
    "mtheta": cmd_mtheta,
    "atypical": cmd_atypical,
    "cf": cmd_cf,
    "verify": cmd_verify,
    "stats": cmd_stats,
    "replay": cmd_replay,
    "explore": cmd_explore,
}


# ---------------------------------------------------------------------------
# parser and output


def _env(name: str, default):
    return os.environ.get(ENV_PREFIX + name, default)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--precision-start", type=int, default=None, help="first working precision in bits")
    common.add_argument("--precision-cap", type=int, default=None, help="give up (undecided) beyond this many bits")
    common.add_argument("--format", choices=["json", "csv", "table"], default=None)
    common.add_argument("--jobs", type=int, default=None, help="worker processes for scans")
    common.add_argument("--seed", type=int, default=None, help="seed for sampling commands")
    common.add_argument("--paranoid", action="store_true", help="recompute membership three ways")
    common.add_argument("--output", "-o", help="write to this file instead of stdout")

    p = argparse.ArgumentParser(prog="fracroots", description="Fractional parts of roots and their atypical set.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("mtheta", parents=[common], help="M, M' and the typical value over a range of n")
    s.add_argument("--theta", required=True)
    s.add_argument("--n", required=True, help="a..b or a single integer (nonzero)")

    s = sub.add_parser("atypical", parents=[common], help="enumerate the atypical set up to a limit")
    s.add_argument("--theta", required=True)
    s.add_argument("--limit", required=True)
    s.add_argument("--method", choices=["auto", "direct", "continuant", "both"], default="auto")

    s = sub.add_parser("cf", parents=[common], help="continued fraction, convergents and lambda_k")
    s.add_argument("--value", required=True, help="2/log(<theta>), 1/log(<theta>) or quad:(a+b*sqrt(d))/c")
    s.add_argument("--terms", type=int, default=20)

    s = sub.add_parser("verify", parents=[common], help="run a named verification scenario")
    s.add_argument(
        "--case",
        required=True,
        choices=["log2-endpoints", "root2-identity", "family-empty", "family-infinite", "rational-bound"],
    )
    s.add_argument("--params", help="e.g. c=4 or p=10,q=1 or a=[1;period(2,1)]")
    s.add_argument("--depth", type=int)
    s.add_argument("--limit")

    s = sub.add_parser("stats", parents=[common], help="counts against the (log theta/12) ln N prediction")
    s.add_argument("--samples", type=int, default=50)
    s.add_argument("--limit", default="1e12")
    s.add_argument("--kind", choices=["rational", "quadratic"], default="rational", help="theta sampler")
    s.add_argument("--force-theta", action="append", help="extra theta to include (repeatable)")

    s = sub.add_parser("replay", parents=[common], help="re-verify a saved JSON report")
    s.add_argument("file")

    s = sub.add_parser("explore", parents=[common], help="observed atypical n for any theta (no claims)")
    s.add_argument("--theta", required=True)
    s.add_argument("--limit", default="10000")
    return p


def make_config(ns: argparse.Namespace) -> RunConfig:
    fmt = ns.format or _env("FORMAT", "json")
    if fmt not in ("json", "csv", "table"):
        raise InputError(f"unknown format {fmt!r}")
    try:
        start = ns.precision_start or int(_env("PRECISION_START", 64))
        cap = ns.precision_cap or int(_env("PRECISION_CAP", 16384))
        jobs = ns.jobs or int(_env("JOBS", 1))
        seed = ns.seed if ns.seed is not None else int(_env("SEED", 0))
    except ValueError as exc:
        raise InputError(f"bad numeric setting: {exc}") from exc
    if cap < start:
        raise InputError("precision cap is below the starting precision")
    skip = {"command", "precision_start", "precision_cap", "format", "jobs", "seed", "output"}
    opts = {k: v for k, v in vars(ns).items() if k not in skip and v is not None}
    return RunConfig(ns.command, opts, start, cap, fmt, max(1, jobs), seed)


def _timestamp() -> str:
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    when = datetime.fromtimestamp(int(epoch), timezone.utc) if epoch else datetime.now(timezone.utc)
    return when.strftime("%Y-%m-%dT%H:%M:%SZ")


def render(cfg: RunConfig, result: CommandResult) -> str:
    if cfg.format == "json":
        doc = {
            "schema_version": SCHEMA_VERSION,
            "tool_version": __version__,
            "command": cfg.command,
            "config": asdict(cfg),
            "exit_code": result.exit_code,
            "generated_at": _timestamp(),
            "result": result.payload,
        }
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"
    rows = result.rows or []
    cols = result.columns or (sorted(rows[0]) if rows else [])
    if cfg.format == "csv":
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=cols, extrasaction="ignore", lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({k: ("" if r.get(k) is None else r.get(k)) for k in cols})
        return buf.getvalue()
    cells = [[str("" if r.get(c) is None else r.get(c)) for c in cols] for r in rows]
    widths = [max([len(c)] + [len(row[i]) for row in cells]) for i, c in enumerate(cols)]
    lines = ["  ".join(c.ljust(w) for c, w in zip(cols, widths)).rstrip()]
    lines.append("  ".join("-" * w for w in widths))
    lines += ["  ".join(v.ljust(w) for v, w in zip(row, widths)).rstrip() for row in cells]
    return "\n".join(lines) + "\n"


def _error_doc(code: int, exc: BaseException) -> str:
    details = getattr(exc, "details", None) or getattr(exc, "report", None)
    doc = {"error": type(exc).__name__, "message": str(exc), "exit_code": code}
    if details:
        doc["details"] = details
    return json.dumps(doc, indent=2, sort_keys=True, default=str) + "\n"


def _glue_negative_values(argv: list[str]) -> list[str]:
    """``--n -5..5`` would be read as an option; rewrite it as ``--n=-5..5``."""
    out, i = [], 0
    while i < len(argv):
        a = argv[i]
        if a in ("--n", "--limit") and i + 1 < len(argv) and re.match(r"-\d", argv[i + 1]):
            out.append(f"{a}={argv[i + 1]}")
            i += 2
            continue
        out.append(a)
        i += 1
    return out


def main(argv=None) -> int:
    parser = build_parser()
    argv = _glue_negative_values(list(sys.argv[1:] if argv is None else argv))
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code not in (0, None) else EXIT_OK
    out_path = ns.output
    try:
        cfg = make_config(ns)
        result = COMMANDS[cfg.command](cfg)
        text, code = render(cfg, result), result.exit_code
    except VerificationFailure as exc:
        text, code = _error_doc(EXIT_VERIFY, exc), EXIT_VERIFY
    except InternalDisagreement as exc:
        text, code = _error_doc(EXIT_INTERNAL, exc), EXIT_INTERNAL
    except UndecidedError as exc:
        text, code = _error_doc(EXIT_UNDECIDED, exc), EXIT_UNDECIDED
    except InputError as exc:
        sys.stderr.write(_error_doc(EXIT_INPUT, exc))
        return EXIT_INPUT
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
