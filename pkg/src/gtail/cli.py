"""Command-line interface.

Subcommands:
  plot    tail plot of g_hat(d) with pointwise confidence bounds (CSV, SVG)
  altail  spread of randomized-pairing curves plus the U-statistic curve
  theory  closed-form / quadrature table for a gamma law
  sim     variance | coverage | are simulation studies

Data rows go to --out (or stdout); diagnostics go to stderr, so outputs are
pipeline-safe.  All randomness is controlled by --seed and outputs are
byte-identical across runs.
"""

import argparse
import csv
import io
import math
import sys
from dataclasses import dataclass

import numpy as np

from .core import Sample, g_hat_curve, g_tilde_from_pairs
from .errors import (EmptyAfterFilter, GtailError, NegativeVariance,
                     NoExceedance, OutOfRange)
from .seeding import TAG_PAIRING, substream, validate_seed
from .simulate import SimConfig, empirical_are, run_coverage_study, \
    run_variance_study
from .theory import GammaParams, are, asymp_sigma_sq, invert_c
from .variance import confidence_interval, parse_method

_DELIMITERS = (",", ";", "\t")


@dataclass
class DatasetSpec:
    path: str
    column: str = None
    drop_nonpositive: bool = True
    rescale_mean_one: bool = False


def _fmt(x):
    if x is None:
        return ""
    return format(float(x), ".12g")


def _sniff_delimiter(lines):
    counts = {d: [ln.count(d) for ln in lines] for d in _DELIMITERS}
    best = None
    for d, cs in counts.items():
        if cs and min(cs) > 0 and len(set(cs)) == 1:
            if best is None or cs[0] > counts[best][0]:
                best = d
    return best


def _parse_float(cell):
    try:
        v = float(cell)
    except ValueError:
        return None
    return v if math.isfinite(v) else None


def ingest(spec, report_stream=None):
    """Read one numeric column from a delimited text file into a Sample.

    Delimiter (comma / semicolon / tab) and a header row are auto-detected;
    the default column is the first whose data cells all parse as numbers.
    Non-positive values are dropped unless the spec disables that, and the
    result can be rescaled to mean 1.  A short report goes to stderr.
    """
    report = report_stream if report_stream is not None else sys.stderr
    with open(spec.path, "r", encoding="utf-8-sig", newline="") as fh:
        text = fh.read()
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise EmptyAfterFilter(f"{spec.path}: file holds no data")
    delim = _sniff_delimiter(lines[:50])
    if delim is None:
        rows = [[ln.strip()] for ln in lines]
    else:
        rows = list(csv.reader(io.StringIO("\n".join(lines)), delimiter=delim))
    width = max(len(r) for r in rows)
    rows = [r + [""] * (width - len(r)) for r in rows]

    has_header = any(_parse_float(c) is None for c in rows[0] if c.strip())
    header = [c.strip() for c in rows[0]] if has_header else []
    data = rows[1:] if has_header else rows
    if not data:
        raise EmptyAfterFilter(f"{spec.path}: no rows after the header")

    if spec.column is None:
        col = None
        for j in range(width):
            cells = [r[j] for r in data if r[j].strip()]
            if cells and all(_parse_float(c) is not None for c in cells):
                col = j
                break
        if col is None:
            raise EmptyAfterFilter(f"{spec.path}: no fully numeric column")
    else:
        try:
            col = int(spec.column)
        except ValueError:
            if spec.column not in header:
                raise EmptyAfterFilter(
                    f"{spec.path}: column {spec.column!r} not in header {header}"
                )
            col = header.index(spec.column)
        if not 0 <= col < width:
            raise EmptyAfterFilter(f"{spec.path}: column index {col} out of range")

    raw = [_parse_float(r[col]) for r in data if r[col].strip()]
    n_bad = sum(v is None for v in raw)
    values = np.array([v for v in raw if v is not None], dtype=np.float64)
    n_nonpos = int(np.count_nonzero(values <= 0.0))
    if spec.drop_nonpositive:
        values = values[values > 0.0]
        dropped = n_nonpos
    else:
        dropped = 0
    if values.size < 2:
        raise EmptyAfterFilter(
            f"{spec.path}: fewer than 2 usable values remain"
        )
    if spec.rescale_mean_one:
        values = values / values.mean()
    sample = Sample(values)
    print(
        f"ingest: {spec.path}: n={sample.n} dropped={dropped}"
        f"{' unparsed=' + str(n_bad) if n_bad else ''}"
        f" min={_fmt(values.min())} max={_fmt(values.max())}"
        f" mean={_fmt(values.mean())}",
        file=report,
    )
    return sample


def _pairwise_sum_quantile(values, q):
    """q-quantile of the n(n-1)/2 pairwise sums, by counting bisection."""
    x = np.sort(values)
    n = x.size
    total = n * (n - 1) // 2
    target = q * total

    def count_le(t):
        # pairs i<j with x_i + x_j <= t
        j = n - 1
        cnt = 0
        for i in range(n):
            if j <= i:
                break
            while j > i and x[i] + x[j] > t:
                j -= 1
            cnt += max(0, j - i)
        return cnt

    lo, hi = 2.0 * x[0], 2.0 * x[-1]
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if count_le(mid) < target:
            lo = mid
        else:
            hi = mid
    return hi


def _resolve_grid(args, sample=None):
    if args.d_list:
        grid = [float(t) for t in args.d_list.split(",") if t.strip()]
        if any(b < a for a, b in zip(grid, grid[1:])):
            raise GtailError("--d-list must be ascending")
        return grid
    d_min = args.d_min if args.d_min is not None else 0.0
    if args.d_max is not None:
        d_max = args.d_max
    elif sample is not None:
        d_max = _pairwise_sum_quantile(sample.values, 0.98)
    else:
        raise GtailError("--d-max or --d-list is required here")
    steps = args.d_steps if args.d_steps is not None else 25
    if steps < 1 or d_max < d_min:
        raise GtailError("bad d grid specification")
    return list(np.linspace(d_min, d_max, steps))


def _open_out(path):
    if path is None:
        return sys.stdout, False
    return open(path, "w", encoding="utf-8", newline=""), True


def _write_rows(path, header, rows):
    fh, close = _open_out(path)
    try:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(row) + "\n")
    finally:
        if close:
            fh.close()


def _svg_plot(rows, out_path, level):
    """Self-contained SVG: g_hat curve with its confidence band."""
    pts = [r for r in rows if r["g_hat"] is not None]
    if not pts:
        return
    width, height, mleft, mbot, mtop, mright = 720, 480, 60, 50, 20, 20
    xs = [r["d"] for r in pts]
    x0, x1 = min(xs), max(xs)
    if x1 == x0:
        x1 = x0 + 1.0

    def sx(d):
        return mleft + (d - x0) / (x1 - x0) * (width - mleft - mright)

    def sy(g):
        return height - mbot - g * (height - mbot - mtop)

    band = [r for r in pts if r["ci_lower"] is not None]
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
    ]
    if band:
        poly = [f"{sx(r['d']):.2f},{sy(r['ci_upper']):.2f}" for r in band]
        poly += [f"{sx(r['d']):.2f},{sy(r['ci_lower']):.2f}" for r in reversed(band)]
        parts.append(
            f'<polygon points="{" ".join(poly)}" fill="#9ecae1" opacity="0.55"/>'
        )
    line = " ".join(f"{sx(r['d']):.2f},{sy(r['g_hat']):.2f}" for r in pts)
    parts.append(
        f'<polyline points="{line}" fill="none" stroke="#d62728" stroke-width="2"/>'
    )
    # axes and ticks
    parts.append(
        f'<line x1="{mleft}" y1="{height-mbot}" x2="{width-mright}" '
        f'y2="{height-mbot}" stroke="black"/>'
    )
    parts.append(
        f'<line x1="{mleft}" y1="{mtop}" x2="{mleft}" y2="{height-mbot}" stroke="black"/>'
    )
    for g in (0.0, 0.25, 0.5, 0.75, 1.0):
        y = sy(g)
        parts.append(f'<line x1="{mleft-5}" y1="{y:.2f}" x2="{mleft}" y2="{y:.2f}" stroke="black"/>')
        parts.append(f'<text x="{mleft-10}" y="{y+4:.2f}" font-size="12" text-anchor="end">{g:g}</text>')
    for i in range(6):
        d = x0 + (x1 - x0) * i / 5
        x = sx(d)
        parts.append(f'<line x1="{x:.2f}" y1="{height-mbot}" x2="{x:.2f}" y2="{height-mbot+5}" stroke="black"/>')
        parts.append(f'<text x="{x:.2f}" y="{height-mbot+20}" font-size="12" text-anchor="middle">{d:.3g}</text>')
    parts.append(
        f'<text x="{(mleft+width-mright)//2}" y="{height-12}" font-size="13" '
        f'text-anchor="middle">threshold d</text>'
    )
    parts.append(
        f'<text x="18" y="{(mtop+height-mbot)//2}" font-size="13" text-anchor="middle" '
        f'transform="rotate(-90 18 {(mtop+height-mbot)//2})">g estimate '
        f'({level:.0%} band)</text>'
    )
    parts.append("</svg>")
    with open(out_path, "w", encoding="utf-8", newline="") as fh:
        fh.write("\n".join(parts) + "\n")


def _dataset_spec(args):
    return DatasetSpec(
        path=args.input,
        column=args.column,
        drop_nonpositive=not args.keep_nonpositive,
        rescale_mean_one=args.rescale,
    )


def cmd_plot(args):
    sample = ingest(_dataset_spec(args))
    grid = _resolve_grid(args, sample)
    method = parse_method(args.method, args.boot_m)
    estimates = g_hat_curve(sample, grid)
    rows = []
    for d, est in zip(grid, estimates):
        row = {"d": d, "n_exceed": 0, "g_hat": None, "se": None,
               "ci_lower": None, "ci_upper": None, "implied_alpha": None}
        if est is None:
            print(f"plot: d={_fmt(d)}: no exceeding pair", file=sys.stderr)
            rows.append(row)
            continue
        row["n_exceed"] = est.n_pairs_exceed
        row["g_hat"] = est.g_hat
        try:
            ci = confidence_interval(est, method, level=args.level,
                                     seed=args.seed)
            row["se"] = ci.se
            row["ci_lower"] = ci.lower
            row["ci_upper"] = ci.upper
        except (NegativeVariance, GtailError) as exc:
            print(f"plot: d={_fmt(d)}: {exc}", file=sys.stderr)
        try:
            row["implied_alpha"] = invert_c(est.g_hat)
        except (OutOfRange, GtailError):
            pass
        rows.append(row)
    header = ["d", "n_exceed", "g_hat", "se", "ci_lower", "ci_upper",
              "implied_alpha"]
    _write_rows(args.out, header, (
        [_fmt(r["d"]), str(r["n_exceed"]), _fmt(r["g_hat"]), _fmt(r["se"]),
         _fmt(r["ci_lower"]), _fmt(r["ci_upper"]), _fmt(r["implied_alpha"])]
        for r in rows
    ))
    if args.svg:
        if args.out is None:
            raise GtailError("--svg needs --out to derive the image path")
        svg_path = args.out.rsplit(".", 1)[0] + ".svg"
        _svg_plot(rows, svg_path, args.level)
        print(f"plot: wrote {svg_path}", file=sys.stderr)
    return 0


def cmd_altail(args):
    sample = ingest(_dataset_spec(args))
    grid = _resolve_grid(args, sample)
    validate_seed(args.seed)
    out_rows = []
    estimates = g_hat_curve(sample, grid)
    for d, est in zip(grid, estimates):
        out_rows.append(["ustat", _fmt(d), _fmt(None if est is None else est.g_hat)])
        if est is None:
            print(f"altail: ustat d={_fmt(d)}: no exceeding pair", file=sys.stderr)
    n = sample.n
    n_even = n - (n % 2)
    for rep in range(args.replications):
        rng = substream(args.seed, TAG_PAIRING, rep)
        perm = rng.permutation(n)[:n_even]
        y = sample.values[perm[0::2]]
        z = sample.values[perm[1::2]]
        cid = f"alt{rep + 1:03d}"
        for d in grid:
            try:
                val = g_tilde_from_pairs(y, z, d)
            except NoExceedance:
                val = None
                print(f"altail: {cid} d={_fmt(d)}: no exceeding pair",
                      file=sys.stderr)
            out_rows.append([cid, _fmt(d), _fmt(val)])
    _write_rows(args.out, ["curve_id", "d", "value"], out_rows)
    return 0


def cmd_theory(args):
    params = GammaParams(args.alpha, args.beta if args.beta else args.alpha)
    grid = [float(t) for t in args.d_list.split(",") if t.strip()]
    rows = []
    for d in grid:
        av = asymp_sigma_sq(params, d)
        rows.append([_fmt(d), _fmt(av.nu_d), _fmt(av.g_d), _fmt(av.g2_d),
                     _fmt(av.sigma_tilde_sq), _fmt(av.sigma_sq),
                     _fmt(av.sigma_sq / (2.0 * av.sigma_tilde_sq))])
    _write_rows(args.out, ["d", "nu_d", "g", "g2", "sigma_tilde_sq",
                           "sigma_sq", "are"], rows)
    return 0


def _parse_list(text, cast=float):
    return [cast(t) for t in str(text).split(",") if t.strip()]


def _sim_design(args):
    alphas = _parse_list(args.alpha)
    ds = _parse_list(args.d)
    n_effs = _parse_list(args.n_eff)
    lists = [("alpha", alphas), ("d", ds), ("n_eff", n_effs)]
    varying = [name for name, vals in lists if len(vals) > 1]
    if len(varying) > 1:
        raise GtailError("only one of --alpha/--d/--n-eff may list several values")
    rows = []
    label = varying[0] if varying else "alpha"
    for a in alphas:
        for d in ds:
            for ne in n_effs:
                rows.append({"alpha": a, "d": d, "n_eff": ne})
    return label, rows


def _render_cell(stat, attr):
    if stat.negative_fraction > 0.01:
        return "-"
    v = getattr(stat, attr)
    return _fmt(v) if not math.isnan(v) else ""


def _aligned_table(title, col_names, line_rows):
    widths = [max(len(str(c)), 9) for c in col_names]
    out = [title]
    out.append("  ".join(str(c).rjust(w) for c, w in zip(col_names, widths)))
    for row in line_rows:
        out.append("  ".join(str(c).rjust(w) for c, w in zip(row, widths)))
    return "\n".join(out)


def cmd_sim(args):
    beta_of = (lambda a: args.beta) if args.beta else (lambda a: a)
    if args.which == "are":
        rows = []
        for d in _parse_list(args.d):
            params = GammaParams(args.alpha_single, beta_of(args.alpha_single))
            mc = empirical_are(params, d, n=args.n, reps=args.reps,
                               seed=args.seed)
            th = are(params, d)
            rows.append([_fmt(params.shape), _fmt(params.rate), _fmt(d),
                         str(args.n), str(args.reps), _fmt(mc), _fmt(th)])
        _write_rows(args.out, ["alpha", "beta", "d", "n", "reps", "are_mc",
                               "are_theory"], rows)
        return 0

    methods = tuple(parse_method(t, args.boot_m)
                    for t in args.methods.split(","))
    label, design = _sim_design(args)
    csv_rows = []
    text_rows = []
    for point in design:
        params = GammaParams(point["alpha"], beta_of(point["alpha"]))
        cfg = SimConfig(params=params, d=point["d"], n_eff=point["n_eff"],
                        reps=args.reps, methods=methods, level=args.level,
                        seed=args.seed, truth_reps=args.truth_reps)
        if args.which == "variance":
            res = run_variance_study(cfg)
            for s in res.stats:
                csv_rows.append([
                    _fmt(point["alpha"]), _fmt(point["d"]), _fmt(point["n_eff"]),
                    str(res.n_used), str(s.method), _render_cell(s, "ave_relative"),
                    _render_cell(s, "rmse"), _fmt(s.negative_fraction),
                ])
            text_rows.append([_fmt(point[label]), "Ave"]
                             + [_render_cell(s, "ave_relative") for s in res.stats])
            text_rows.append(["", "RMSE"]
                             + [_render_cell(s, "rmse") for s in res.stats])
        else:
            res = run_coverage_study(cfg)
            for s in res.stats:
                csv_rows.append([
                    _fmt(point["alpha"]), _fmt(point["d"]), _fmt(point["n_eff"]),
                    str(res.n_used), str(s.method), _render_cell(s, "coverage"),
                    _fmt(s.negative_fraction), _fmt(s.failed_fraction),
                ])
            text_rows.append([_fmt(point[label]), "cover"]
                             + [_render_cell(s, "coverage") for s in res.stats])
    if args.which == "variance":
        header = ["alpha", "d", "n_eff", "n", "method", "ave_relative",
                  "rmse", "negative_fraction"]
    else:
        header = ["alpha", "d", "n_eff", "n", "method", "coverage",
                  "negative_fraction", "failed_fraction"]
    _write_rows(args.out, header, csv_rows)
    if args.out is not None:
        table = _aligned_table(
            f"{args.which} study ({label} varies)",
            [label, ""] + [str(m) for m in methods], text_rows,
        )
        print(table)
    return 0


def build_parser():
    ap = argparse.ArgumentParser(
        prog="gtail",
        description="Tail statistic g(d): estimation, confidence bands, "
                    "gamma theory, and simulation studies.",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    def add_data_flags(p):
        p.add_argument("--input", required=True, help="delimited text file")
        p.add_argument("--column", default=None,
                       help="column name or 0-based index")
        p.add_argument("--rescale", action="store_true",
                       help="rescale the sample to mean 1")
        p.add_argument("--keep-nonpositive", action="store_true",
                       help="do not drop non-positive values")

    def add_grid_flags(p):
        p.add_argument("--d-min", type=float, default=None)
        p.add_argument("--d-max", type=float, default=None)
        p.add_argument("--d-steps", type=int, default=None)
        p.add_argument("--d-list", default=None,
                       help="explicit ascending thresholds, comma separated")

    def add_common(p):
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out", default=None, help="output CSV path")

    p = sub.add_parser("plot", help="tail plot with confidence bounds")
    add_data_flags(p)
    add_grid_flags(p)
    p.add_argument("--method", default="unbiased")
    p.add_argument("--boot-m", type=int, default=999)
    p.add_argument("--level", type=float, default=0.95)
    p.add_argument("--svg", action="store_true",
                   help="also write an SVG next to --out")
    add_common(p)
    p.set_defaults(func=cmd_plot)

    p = sub.add_parser("altail", help="randomized-pairing curve spread")
    add_data_flags(p)
    add_grid_flags(p)
    p.add_argument("--replications", type=int, default=20)
    add_common(p)
    p.set_defaults(func=cmd_altail)

    p = sub.add_parser("theory", help="gamma-law theory table")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--beta", type=float, default=None,
                   help="rate (defaults to alpha, giving mean 1)")
    p.add_argument("--d-list", default="0,1,2,3,4,5")
    add_common(p)
    p.set_defaults(func=cmd_theory)

    p = sub.add_parser("sim", help="simulation studies")
    p.add_argument("which", choices=["variance", "coverage", "are"])
    p.add_argument("--alpha", default="1.0",
                   help="shape, or comma list (variance/coverage row axis)")
    p.add_argument("--alpha-single", type=float, default=1.0,
                   help="shape for the are study")
    p.add_argument("--beta", type=float, default=None,
                   help="rate (defaults to alpha, giving mean 1)")
    p.add_argument("--d", default="3.0", help="threshold, or comma list")
    p.add_argument("--n-eff", default="20", help="effective size, or comma list")
    p.add_argument("--n", type=int, default=2000,
                   help="total sample size for the are study")
    p.add_argument("--reps", type=int, default=2000)
    p.add_argument("--truth-reps", type=int, default=100_000)
    p.add_argument("--methods",
                   default="unbiased,noether,noether-mod,large-sample,"
                           "bootstrap,jackknife")
    p.add_argument("--boot-m", type=int, default=999)
    p.add_argument("--level", type=float, default=0.95)
    add_common(p)
    p.set_defaults(func=cmd_sim)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except GtailError as exc:
        print(f"gtail: error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"gtail: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
