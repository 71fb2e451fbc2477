"""Command-line front end.

Exit codes (stable):

    0  success
    1  a construction search found nothing
    2  usage error (argparse)
    3  input could not be read or parsed
    4  validation error (bad field, variety, cover or arguments)
    5  budget exceeded; any partial report is still printed
    6  selftest failure
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import dataclass

from . import __version__, bounds, config
from .constructions import DEFAULT_SEED, kummer_cover, product_cover, search_section
from .covers import CoverDesc, CoverError, StarReport, star_report, METHODOLOGY, INDETERMINATE
from .geometry import GeometryError
from .mpoly import Multinomial, ParseError, parse
from .problem import ProblemParseError, ProblemValidationError, dumps, load_problem

EXIT_OK = 0
EXIT_NOT_FOUND = 1
EXIT_USAGE = 2
EXIT_PARSE = 3
EXIT_VALIDATION = 4
EXIT_BUDGET = 5
EXIT_SELFTEST = 6

FORMATS = ("table", "csv", "structured")

WEIL_NOTE = "Point-count window: |#Z(F_q) - q^d| <= (sigma_c - 1) q^(d - 1/2)."

ROW_FIELDS = (
    "m", "q", "source_points", "target_points", "image_points", "injective", "surjective",
    "max_fiber", "ramified_points", "branch_points", "off_diagonal_pairs",
    "off_diagonal_unramified", "fiber_bound_ok", "all_ramified",
)


@dataclass(frozen=True)
class RunConfig:
    budget: int = config.DEFAULT_BUDGET
    max_ext: int = 1
    seed: int = DEFAULT_SEED
    format: str = "table"
    verify_depth: int = 1

    def __post_init__(self):
        if self.budget < 1:
            raise ValueError("budget must be >= 1")
        if self.max_ext < 1:
            raise ValueError("max_ext must be >= 1")
        if self.verify_depth < 1:
            raise ValueError("verify_depth must be >= 1")
        if self.format not in FORMATS:
            raise ValueError(f"format must be one of {', '.join(FORMATS)}")


class _Failure(Exception):
    def __init__(self, code, message):
        self.code = code
        super().__init__(message)


# -- report rendering


def _cell(v):
    if v is None:
        return "n/a"
    if isinstance(v, bool):
        return "true" if v else "false"
    return str(v)


def report_dict(report: StarReport, cfg: RunConfig) -> dict:
    return {
        "cover": report.cover,
        "field": report.field,
        "degree": report.degree,
        "max_ext": report.max_ext,
        "verify_depth": cfg.verify_depth,
        "budget": cfg.budget,
        "seed": cfg.seed,
        "verdict": report.verdict,
        "verdict_text": report.verdict_text,
        "refuted_at": report.refuted_at,
        "tested_up_to": report.tested_up_to,
        "truncated": report.truncated,
        "truncation": report.truncation,
        "rows": [{k: getattr(r, k) for k in ROW_FIELDS} for r in report.rows],
        "methodology": report.methodology + " " + WEIL_NOTE,
    }


def _truncation_line(d):
    return f"TRUNCATED: {d['truncation']}" if d["truncated"] else "complete"


def render_reports(reports: list[StarReport], cfg: RunConfig) -> str:
    ds = [report_dict(r, cfg) for r in reports]
    if cfg.format == "structured":
        return json.dumps({"covlab_format": 1, "reports": ds}, indent=2, sort_keys=True) + "\n"
    if cfg.format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(("cover",) + ROW_FIELDS)
        for d in ds:
            for row in d["rows"]:
                w.writerow([d["cover"]] + [_cell(row[k]) for k in ROW_FIELDS])
        for d in ds:
            buf.write(f"# {d['cover']}: verdict {d['verdict_text']}; {_truncation_line(d)}\n")
        buf.write(f"# seed {cfg.seed}; verify_depth {cfg.verify_depth}; budget {cfg.budget}\n")
        buf.write(f"# methodology: {ds[0]['methodology'] if ds else METHODOLOGY}\n")
        return buf.getvalue()
    out = []
    headers = ("m", "q", "|X|", "|Y|", "|f(X)|", "inj", "surj", "maxfib", "ram", "branch",
               "offdiag", "offdiag-unram", "fib<=deg")
    keys = ROW_FIELDS[:-1]
    for d in ds:
        out.append(f"cover    {d['cover']}")
        out.append(f"field    {d['field']}   degree {d['degree']}   max_ext {d['max_ext']}")
        out.append(f"verdict  {d['verdict_text']}")
        out.append(f"status   {_truncation_line(d)}")
        cells = [headers] + [tuple(_cell(r[k]) for k in keys) for r in d["rows"]]
        widths = [max(len(c[i]) for c in cells) for i in range(len(headers))]
        for c in cells:
            out.append("  ".join(s.rjust(wd) for s, wd in zip(c, widths)))
        if any(r["all_ramified"] for r in d["rows"]):
            out.append("note     every rational source point is ramified at some m")
        out.append("")
    out.append(f"seed {cfg.seed}; verify_depth {cfg.verify_depth}; budget {cfg.budget}")
    out.append("methodology: " + (ds[0]["methodology"] if ds else METHODOLOGY + " " + WEIL_NOTE))
    return "\n".join(out) + "\n"


def render_mapping(d: dict, fmt: str) -> str:
    """Render a flat result mapping for the bounds commands."""
    if fmt == "structured":
        return json.dumps(d, indent=2, sort_keys=True) + "\n"
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(("key", "value"))
        for k, v in d.items():
            w.writerow((k, json.dumps(v) if isinstance(v, (list, dict)) else _cell(v)))
        return buf.getvalue()
    width = max(len(k) for k in d)
    lines = []
    for k, v in d.items():
        if isinstance(v, list) and not any(isinstance(x, list) for x in v):
            lines.append(f"{k.ljust(width)}  {' '.join(map(str, v))}")
        elif isinstance(v, list):
            lines.append(f"{k.ljust(width)}  ({len(v)} entries)")
            lines += ["  " + " ".join(map(str, item)) for item in v]
        else:
            lines.append(f"{k.ljust(width)}  {_cell(v)}")
    return "\n".join(lines) + "\n"


# -- command implementations


def run_analyze(cfg: RunConfig, cover: CoverDesc) -> str:
    """Render the star report of one cover under ``cfg``."""
    with config.budget(cfg.budget):
        return render_reports([star_report(cover, cfg.max_ext)], cfg)


def _load(path, cfg: RunConfig):
    try:
        with config.budget(cfg.budget):
            return load_problem(path, cfg.verify_depth)
    except FileNotFoundError:
        raise _Failure(EXIT_PARSE, f"{path}: no such file") from None
    except (OSError, UnicodeDecodeError) as exc:
        raise _Failure(EXIT_PARSE, f"{path}: {exc}") from None
    except ProblemParseError as exc:
        raise _Failure(EXIT_PARSE, str(exc)) from None
    except ProblemValidationError as exc:
        msg = str(exc)
        if exc.witness is not None:
            msg += f" (witness {exc.witness})"
        raise _Failure(EXIT_VALIDATION, msg) from None


def _cmd_analyze(args, cfg: RunConfig):
    try:
        prob = _load(args.file, cfg)
    except config.BudgetExceeded as exc:
        empty = StarReport(
            cover=args.cover or "", field="", degree=0, max_ext=cfg.max_ext, rows=[],
            verdict=INDETERMINATE, truncated=True,
            truncation=f"stopped during load-time verification: {exc}",
        )
        return render_reports([empty], cfg), EXIT_BUDGET
    covers = prob.covers
    if args.cover is not None:
        if args.cover not in covers:
            raise _Failure(EXIT_VALIDATION, f"no cover named {args.cover!r} in {args.file}")
        covers = {args.cover: covers[args.cover]}
    if not covers:
        raise _Failure(EXIT_VALIDATION, f"{args.file} defines no cover")
    reports = []
    with config.budget(cfg.budget):
        for f in covers.values():
            try:
                reports.append(star_report(f, cfg.max_ext))
            except (GeometryError, CoverError) as exc:
                raise _Failure(EXIT_VALIDATION, f"[cover {f.name}] {exc}") from None
    code = EXIT_BUDGET if any(r.truncated for r in reports) else EXIT_OK
    return render_reports(reports, cfg), code


def _pick_variety(prob, name, path):
    vs = prob.varieties
    if name is not None:
        if name not in vs:
            raise _Failure(EXIT_VALIDATION, f"no variety named {name!r} in {path}")
        return vs[name]
    if not vs:
        raise _Failure(EXIT_VALIDATION, f"{path} defines no variety")
    return next(iter(vs.values()))


def _emit_file(text, out):
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
        return ""
    return text


def _cmd_construct(args, cfg: RunConfig):
    with config.budget(cfg.budget):
        if args.kind == "kummer":
            base = _pick_variety(_load(args.base, cfg), args.variety, args.base)
            try:
                u = parse(args.u, base.nvars, base.field)
                f = kummer_cover(base, u, args.ell, name="kummer")
            except ParseError as exc:
                raise _Failure(EXIT_PARSE, f"--u: {exc}") from None
            text = dumps(covers={"kummer": f}, comment=f"kummer cover: x^{args.ell} = {u}")
        elif args.kind == "product":
            Y = _pick_variety(_load(args.base, cfg), args.variety, args.base)
            V = _pick_variety(_load(args.fiber, cfg), args.fiber_variety, args.fiber)
            f = product_cover(Y, V, name="product")
            text = dumps(covers={"product": f}, comment="projection of a product onto its first factor")
        else:
            X = _pick_variety(_load(args.input, cfg), args.variety, args.input)
            res = search_section(X, args.dmax, args.mode, args.trials, cfg.seed)
            if res is None:
                raise _Failure(
                    EXIT_NOT_FOUND,
                    f"no {args.mode} section of degree <= {args.dmax} in {args.trials} trials (seed {cfg.seed})",
                )
            Z = res.variety
            block = tuple(Multinomial.variable(X.field, X.nvars, j) for j in range(X.nvars))
            inc = CoverDesc(Z, X, (block,), 1, "inclusion", finite=False)
            text = dumps(
                varieties={"X": X, "Z": Z}, covers={"inclusion": inc},
                comment=f"{args.mode} section H = {res.form} (degree {res.degree}, trial {res.trial}, seed {res.seed})",
            )
    return _emit_file(text, args.output), EXIT_OK


def _hodge_arg(text):
    try:
        return bounds.HodgeDiamond.from_flat([int(v) for v in text.replace(" ", "").split(",")])
    except ValueError as exc:
        raise _Failure(EXIT_VALIDATION, f"--hodge: {exc}") from None


def _poly_text(coeffs):
    terms = []
    for c, mono in zip(coeffs, ("T^2", "T", "")):
        if c == 0:
            continue
        sign = "-" if c < 0 else "+"
        body = str(abs(c)) + (f" {mono}" if mono else "")
        terms.append((sign, body))
    if not terms:
        return "0"
    head = ("-" if terms[0][0] == "-" else "") + terms[0][1]
    return " ".join([head] + [f"{s} {b}" for s, b in terms[1:]])


def _cmd_bounds(args, cfg: RunConfig):
    k = args.kind
    if k == "nonempty":
        C = bounds.nonempty_threshold(args.sigma, args.dim)
        d = {"formula": "C = (sigma_c - 1)^2", "window": WEIL_NOTE, "sigma_c": args.sigma,
             "dim": args.dim, "threshold": C}
    elif k == "crossover":
        C = bounds.crossover_threshold(args.sigma_z, args.dim_z, args.sigma_r, args.dim_r)
        d = {"formula": "least C with q^dZ - (sigmaZ - 1) q^(dZ - 1/2) > sigmaR q^dR for all q > C",
             "sigma_z": args.sigma_z, "dim_z": args.dim_z, "sigma_r": args.sigma_r,
             "dim_r": args.dim_r, "threshold": C}
    elif k == "surface":
        h = _hodge_arg(args.hodge)
        s = bounds.surface_embedding_data(h)
        a, b, c = s.hilbert
        d = {"formula": "chi = h00 - h01 + h02; K^2 = 12 chi - e_top; N = 10 K^2 + chi - 1; "
                        "P(T) = (25/2) K^2 T^2 - (5/2) K^2 T + chi",
             "hodge": list(h.flat()), "betti": list(h.betti()), "chi": s.chi,
             "k_squared": s.k_squared, "n": s.n, "hilbert": _poly_text((a, b, c)),
             "hilbert_values": [int(s.hilbert_value(t)) for t in range(0, 4)]}
    else:
        cands = bounds.hodge_candidates(args.b1, args.b2, args.b3)
        d = {"formula": "(b1 + 1) * C(b2 + 2, 2) * (b3 + 1)", "b1": args.b1, "b2": args.b2,
             "b3": args.b3, "count": len(cands),
             "closed_form": bounds.hodge_candidate_count(args.b1, args.b2, args.b3)}
        if args.list:
            d["candidates"] = [list(h.flat()) for h in cands]
    return render_mapping(d, cfg.format), EXIT_OK


def _cmd_selftest(args, cfg: RunConfig):
    from . import selftest

    with config.budget(cfg.budget):
        lines, ok = selftest.run()
    return "\n".join(lines) + "\n", EXIT_OK if ok else EXIT_SELFTEST


# -- argument parsing


def _budget_arg(text):
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid budget {text!r}") from None
    if v != int(v) or v < 1:
        raise argparse.ArgumentTypeError("budget must be a positive integer")
    return int(v)


def _positive(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--budget", type=_budget_arg, default=None,
                        help="max enumeration visits (default: $COVLAB_BUDGET or 1e8)")
    common.add_argument("--format", choices=FORMATS, default="table")
    common.add_argument("--seed", type=int, default=DEFAULT_SEED)
    common.add_argument("--verify-depth", type=_positive, default=1,
                        help="extension degrees checked when loading covers")

    ap = argparse.ArgumentParser(prog="covlab", description="Exceptional-cover evidence over finite fields.")
    ap.add_argument("--version", action="version", version=f"covlab {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    an = sub.add_parser("analyze", parents=[common], help="per-extension injectivity/surjectivity report")
    an.add_argument("file")
    an.add_argument("--max-ext", type=_positive, default=1)
    an.add_argument("--cover", default=None, help="analyse only this cover")

    co = sub.add_parser("construct", help="write a cover file")
    csub = co.add_subparsers(dest="kind", required=True)
    k = csub.add_parser("kummer", parents=[common])
    k.add_argument("--base", required=True)
    k.add_argument("--variety", default=None)
    k.add_argument("--u", required=True)
    k.add_argument("--ell", type=int, required=True)
    pr = csub.add_parser("product", parents=[common])
    pr.add_argument("--base", required=True)
    pr.add_argument("--variety", default=None)
    pr.add_argument("--fiber", required=True)
    pr.add_argument("--fiber-variety", default=None)
    se = csub.add_parser("section", parents=[common])
    se.add_argument("--input", required=True)
    se.add_argument("--variety", default=None)
    se.add_argument("--mode", choices=("fill", "avoid"), required=True)
    se.add_argument("--dmax", type=_positive, default=3)
    se.add_argument("--trials", type=_positive, default=100)
    for p in (k, pr, se):
        p.add_argument("-o", "--output", default=None)

    bo = sub.add_parser("bounds", help="effective constants")
    bsub = bo.add_subparsers(dest="kind", required=True)
    b = bsub.add_parser("nonempty", parents=[common])
    b.add_argument("--sigma", type=int, required=True)
    b.add_argument("--dim", type=int, required=True)
    b = bsub.add_parser("crossover", parents=[common])
    b.add_argument("--sigma-z", type=int, required=True)
    b.add_argument("--dim-z", type=int, required=True)
    b.add_argument("--sigma-r", type=int, required=True)
    b.add_argument("--dim-r", type=int, required=True)
    b = bsub.add_parser("surface", parents=[common])
    b.add_argument("--hodge", required=True, help="h00,h01,h02,h10,h11,h12,h20,h21,h22")
    b = bsub.add_parser("hodge-candidates", parents=[common])
    b.add_argument("--b1", type=int, required=True)
    b.add_argument("--b2", type=int, required=True)
    b.add_argument("--b3", type=int, required=True)
    b.add_argument("--list", action="store_true", help="print every candidate diamond")

    sub.add_parser("selftest", parents=[common], help="quick consistency checks")
    return ap


_COMMANDS = {"analyze": _cmd_analyze, "construct": _cmd_construct, "bounds": _cmd_bounds,
             "selftest": _cmd_selftest}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = RunConfig(
            budget=args.budget if args.budget is not None else config.get_budget(),
            max_ext=getattr(args, "max_ext", 1), seed=args.seed, format=args.format,
            verify_depth=args.verify_depth,
        )
        text, code = _COMMANDS[args.command](args, cfg)
    except _Failure as exc:
        print(f"covlab: {exc}", file=sys.stderr)
        return exc.code
    except config.BudgetExceeded as exc:
        print(f"covlab: budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (ValueError, GeometryError, CoverError) as exc:
        print(f"covlab: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    sys.stdout.write(text)
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
