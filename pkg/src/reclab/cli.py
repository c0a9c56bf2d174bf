"""Command-line front end: every operation as a subcommand, plus recipes.

Exit codes: 0 success, 1 usage/configuration error, 2 mathematical-assertion
failure (a certificate violated, a bound missed).  Identical configuration and
seed produce byte-identical output regardless of worker count, so emitted
headers record the mathematical configuration only, never execution knobs.
"""

from __future__ import annotations

import argparse
import math
import sys
from fractions import Fraction
from importlib import resources
from pathlib import Path

from . import averages, intersectivity, lemma, sequences, torus
from .fixedpoint import AlphaSpec, Precision, PrecisionError, frac_npow, realize

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_ASSERTION = 2


class CliError(Exception):
    """Usage or configuration problem; maps to exit code 1."""


class AssertionFailure(Exception):
    """A mathematical check failed; maps to exit code 2."""


def read_config(path: str | Path) -> dict[str, str]:
    """Plain key=value lines; # starts a comment."""
    cfg: dict[str, str] = {}
    for raw in Path(path).read_text().splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise CliError(f"bad config line {raw!r}: expected key=value")
        key, value = line.split("=", 1)
        cfg[key.strip()] = value.strip()
    return cfg


def _recipe_config(name: str) -> dict[str, str]:
    ref = resources.files("reclab").joinpath(f"recipes/{name}.cfg")
    with resources.as_file(ref) as path:
        return read_config(path)


class _Settings:
    """Effective values: command line first, then config file, then default."""

    def __init__(self, args: argparse.Namespace, cfg: dict[str, str]):
        self.args = args
        self.cfg = cfg

    def get(self, key: str, default=None, conv=str):
        explicit = getattr(self.args, key, None)
        if explicit is not None:
            return explicit
        if key in self.cfg:
            try:
                return conv(self.cfg[key])
            except ValueError as exc:
                raise CliError(f"bad config value for {key}: {exc}") from exc
        return default

    def alpha(self, key: str = "alpha", default: str = "surd:0,1,1,2") -> AlphaSpec:
        return AlphaSpec.parse(str(self.get(key, default)))

    def fraction(self, key: str, default: str) -> Fraction:
        return Fraction(str(self.get(key, default)))


def _config_comment(pairs: dict) -> str:
    body = " ".join(f"{k}={v}" for k, v in pairs.items())
    return f"# config: {body}"


class _Output:
    def __init__(self, path: str | None):
        self.path = path
        self.fh = open(path, "w") if path else sys.stdout

    def __enter__(self):
        return self.fh

    def __exit__(self, *exc):
        if self.path:
            self.fh.close()
        return False


def _fmt(x: float) -> str:
    return repr(float(x))


# ---------------------------------------------------------------- subcommands


def cmd_solve_lemma(s: _Settings) -> int:
    k = s.get("k", 2, int)
    sol = lemma.solve_canonical(k)
    cross = lemma.solve_by_elimination(k)
    if [x * cross.m for x in sol.l] != [x * sol.m for x in cross.l]:
        raise AssertionFailure("canonical and elimination solvers disagree")
    with _Output(s.get("out")) as fh:
        fh.write("l: " + " ".join(str(x) for x in sol.l) + "\n")
        fh.write(f"m: {sol.m}\n")
        fh.write(f"M: {sol.M}\n")
    return EXIT_OK


def _gen_stream(s: _Settings, kind: str, k: int, alpha: AlphaSpec):
    workers = s.get("workers", 1, int)
    bits = s.get("precision_bits", None, int)
    if kind == "sk":
        n_max = s.get("nmax", 10**5, int)
        return sequences.gen_Sk(k, alpha, n_max, bits=bits, workers=workers)
    if kind == "skprime":
        n_max = s.get("nmax", 10**5, int)
        j_max = s.get("jmax", None, int)
        if j_max is None:
            # largest j whose block [2^j, 2^(j+1)] fits under nmax
            j_max = max(0, n_max.bit_length() - 2)
        return sequences.gen_SkPrime(k, alpha, j_max, bits=bits, workers=workers)
    raise CliError(f"unknown set kind {kind!r}")


def cmd_gen_set(s: _Settings) -> int:
    kind = s.get("kind", "sk")
    k = s.get("k", 2, int)
    alpha = s.alpha()
    stream = _gen_stream(s, kind, k, alpha)
    fmt = s.get("format", "plain")
    with _Output(s.get("out")) as fh:
        if fmt == "csv":
            fh.write(_config_comment({
                "cmd": "gen-set", "kind": kind, "k": k, "alpha": alpha.to_text(),
                "bits": stream.bits, "uncertain": stream.uncertain_count,
            }) + "\n")
            fh.write("n,frac\n")
            a = realize(alpha, Precision(stream.bits))
            for n in stream.elements:
                v = frac_npow(int(n), k, a)
                fh.write(f"{int(n)},{v.to_decimal(30)}\n")
        else:
            for n in stream.elements:
                fh.write(f"{int(n)}\n")
    return EXIT_OK


def cmd_simulate(s: _Settings) -> int:
    k = s.get("k", 2, int)
    alpha = s.alpha()
    n = s.get("n", 1, int)
    point_text = s.get("point", ",".join(["0"] * k))
    coords = [Fraction(t) for t in str(point_text).split(",")]
    if len(coords) != k:
        raise CliError(f"point needs {k} coordinates, got {len(coords)}")
    bits = s.get("precision_bits", None, int)
    prec = Precision.for_run(k, max(n, 2), bits)
    sys_ = torus.SkewSystem(k, realize(alpha, prec))
    p = torus.TorusPoint.from_fractions(coords, prec.bits)
    q = torus.orbit_point(sys_, p, n)
    with _Output(s.get("out")) as fh:
        for c in q.coords:
            fh.write(c.to_decimal(30) + "\n")
    return EXIT_OK


def cmd_certify(s: _Settings) -> int:
    k = s.get("k", 2, int)
    alpha = s.alpha()
    n_max = s.get("nmax", 10**5, int)
    eps = s.fraction("eps", "1/10")
    bits = s.get("precision_bits", None, int)
    workers = s.get("workers", 1, int)
    stream = sequences.gen_Sk(k, alpha, n_max, bits=bits, workers=workers)
    report = torus.nonrecurrence_certificate(k, alpha, stream, eps, n_max, bits=bits)
    with _Output(s.get("out")) as fh:
        bad = set(report.failures) | set(report.uncertain)
        for n in stream.elements:
            n = int(n)
            fh.write(f"{n} {'FAIL' if n in bad else 'OK'}\n")
        fh.write(
            f"# certified {report.certified}/{report.n_checked}"
            f" epsilon={eps} m={report.m}"
            f" system_alpha={report.system_alpha.to_text()}"
            f" uncertain={len(report.uncertain)}\n"
        )
    if not report.all_certified:
        raise AssertionFailure(
            f"{len(report.failures)} members failed the distance bound"
        )
    return EXIT_OK


def cmd_weyl_sum(s: _Settings) -> int:
    k = s.get("k", 2, int)
    alpha = s.alpha()
    n_terms = s.get("nmax", 10**5, int)
    kind = s.get("seq", "range")
    workers = s.get("workers", 1, int)
    bits = s.get("precision_bits", None, int)
    seq = None if kind == "range" else _gen_stream(s, kind, k, alpha)
    if seq is not None:
        n_terms = min(n_terms, len(seq.elements))
        if n_terms == 0:
            raise CliError("stream is empty; nothing to average")
    checkpoints = [1 << e for e in range(1, n_terms.bit_length()) if (1 << e) <= n_terms]
    if n_terms not in checkpoints:
        checkpoints.append(n_terms)
    rows = averages.weyl_trajectory(
        seq, k, alpha, n_terms, checkpoints, bits=bits, workers=workers
    )
    with _Output(s.get("out")) as fh:
        fh.write(_config_comment({
            "cmd": "weyl-sum", "seq": kind, "k": k, "alpha": alpha.to_text(),
            "n": n_terms,
        }) + "\n")
        fh.write("window,N,re,im,modulus\n")
        for i, (c, avg) in enumerate(rows):
            fh.write(
                f"{i},{c},{_fmt(avg.re)},{_fmt(avg.im)},{_fmt(avg.modulus)}\n"
            )
    _maybe_plot(s, ["N", "re", "im"], "weyl-sum")
    return EXIT_OK


def cmd_block_report(s: _Settings) -> int:
    k = s.get("k", 2, int)
    alpha = s.alpha()
    j_max = s.get("jmax", 12, int)
    workers = s.get("workers", 1, int)
    bits = s.get("precision_bits", None, int)
    report = averages.block_sign_report(k, alpha, j_max, bits=bits, workers=workers)
    with _Output(s.get("out")) as fh:
        fh.write(_config_comment({
            "cmd": "block-report", "k": k, "alpha": alpha.to_text(), "jmax": j_max,
            "uncertain": report.stream.uncertain_count,
        }) + "\n")
        fh.write("kind,id,N,re,im,modulus\n")
        for b in report.blocks:
            z = math.hypot(b.re, b.im)
            fh.write(f"block,{b.j},{b.count},{_fmt(b.re)},{_fmt(b.im)},{_fmt(z)}\n")
        for t in report.trajectory:
            z = math.hypot(t.re, t.im)
            fh.write(
                f"anchor,{t.j},{t.n_elements},{_fmt(t.re)},{_fmt(t.im)},{_fmt(z)}\n"
            )
        for w in report.b_windows:
            z = math.hypot(w.re, w.im)
            fh.write(f"bwindow,{w.n},{w.n},{_fmt(w.re)},{_fmt(w.im)},{_fmt(z)}\n")
    _maybe_plot(s, ["N", "re", "im"], "block-report")
    if not report.sign_ok:
        raise AssertionFailure("a nonempty block violated its cosine bound")
    bad = [w.n for w in report.b_windows if w.identity_residual > 1e-12]
    if bad:
        raise AssertionFailure(f"B_N = 2A_2N - A_N violated at N in {bad}")
    return EXIT_OK


def cmd_avg_diff(s: _Settings) -> int:
    k = s.get("k", 2, int)
    alpha = s.alpha()
    beta = s.alpha("beta", "surd:1,1,2,5")
    exponents = tuple(
        int(x) for x in str(s.get("exponents", "1" if k > 1 else "")).split(",") if x
    )
    lo = s.fraction("lo", "1/4")
    hi = s.fraction("hi", "3/4")
    m_start = s.get("mstart", 0, int)
    n_stop = s.get("nmax", 10**5, int)
    d = averages.weighted_average_diff(
        k, alpha, beta, (lo, hi), exponents, m_start, n_stop,
        bits=s.get("precision_bits", None, int),
        workers=s.get("workers", 1, int),
    )
    with _Output(s.get("out")) as fh:
        fh.write(f"D = {_fmt(d)}\n")
    return EXIT_OK


def cmd_recurrence_avg(s: _Settings) -> int:
    k = s.get("k", 2, int)
    alpha = s.alpha()
    beta = s.alpha("beta", "surd:0,1,1,3")
    arc_text = str(s.get("arc", "0,3/10"))
    arc_lo, arc_hi = (Fraction(t) for t in arc_text.split(","))
    n_stop = s.get("nmax", 10**5, int)
    value = averages.recurrence_average(
        k, alpha, beta, (arc_lo, arc_hi), n_stop,
        bits=s.get("precision_bits", None, int),
        workers=s.get("workers", 1, int),
    )
    with _Output(s.get("out")) as fh:
        fh.write(f"average = {_fmt(value)}\n")
    return EXIT_OK


def cmd_find_ap(s: _Settings) -> int:
    set_file = s.get("set_file")
    if not set_file:
        raise CliError("find-ap requires --set-file")
    k = s.get("k", 2, int)
    dense = intersectivity.DenseSet.load(set_file, n_max=s.get("nmax", None, int))
    kind = s.get("diff_kind", "sk")
    alpha = s.alpha()
    diffs = _gen_stream_for_range(s, kind, k, alpha, dense.n_max)
    witness = intersectivity.find_ap(dense, diffs, k)
    with _Output(s.get("out")) as fh:
        if witness is None:
            fh.write("NOTFOUND\n")
        else:
            fh.write(f"FOUND {witness.start} {witness.diff}\n")
    return EXIT_OK


def _gen_stream_for_range(s, kind, k, alpha, n_max):
    workers = s.get("workers", 1, int)
    bits = s.get("precision_bits", None, int)
    if kind == "sk":
        return sequences.gen_Sk(k, alpha, n_max, bits=bits, workers=workers)
    if kind == "skprime":
        j_max = max(0, n_max.bit_length() - 2)
        return sequences.gen_SkPrime(k, alpha, j_max, bits=bits, workers=workers)
    raise CliError(f"unknown diff kind {kind!r}")


def cmd_build_witness(s: _Settings) -> int:
    k = s.get("k", 2, int)
    alpha = s.alpha()
    delta = s.fraction("delta", "1/32")
    n_max = s.get("nmax", 2 * 10**4, int)
    dense = intersectivity.build_witness(
        k, alpha, delta, n_max, bits=s.get("precision_bits", None, int)
    )
    out = s.get("out")
    if out:
        dense.save(out)
        sys.stdout.write(f"wrote {out}\n")
    sys.stdout.write(
        f"members={len(dense)} density={_fmt(float(dense.density))}"
        f" uncertain={dense.uncertain_count}\n"
    )
    return EXIT_OK


def _maybe_plot(s: _Settings, columns, title: str) -> None:
    out = s.get("out")
    if not out or not s.get("plot", False):
        return
    gp = Path(str(out) + ".gp")
    lines = [
        f'set title "{title}"',
        "set datafile separator ','",
        "set key outside",
        f"plot '{out}' using 2:3 with linespoints title 're', \\",
        f"     '{out}' using 2:4 with linespoints title 'im'",
    ]
    gp.write_text("\n".join(lines) + "\n")


# ------------------------------------------------------------------- recipes


class _Recorder:
    def __init__(self, fh):
        self.fh = fh
        self.failures: list[str] = []

    def line(self, ok: bool, name: str, detail: str) -> bool:
        self.fh.write(f"{'PASS' if ok else 'FAIL'} {name} {detail}\n")
        if not ok:
            self.failures.append(name)
        return ok


def _reproduce_thmA(s: _Settings, rec: _Recorder) -> bool:
    k = s.get("k", 2, int)
    alpha = s.alpha()
    n_max = s.get("nmax", 10**6, int)
    eps = s.fraction("epsilon", "1/10")
    beta = s.alpha("beta", "surd:0,1,1,3")
    rec_n = s.get("rec_nmax", 10**5, int)
    density_tol = s.fraction("density_tol", "1/100")
    workers = s.get("workers", 1, int)
    bits = s.get("precision_bits", None, int)

    stream = sequences.gen_Sk(k, alpha, n_max, bits=bits, workers=workers)
    cert = torus.nonrecurrence_certificate(k, alpha, stream, eps, n_max, bits=bits)
    ok = rec.line(
        cert.all_certified and stream.uncertain_count == 0,
        "certificate",
        f"certified={cert.certified}/{cert.n_checked}"
        f" failures={len(cert.failures)} uncertain={stream.uncertain_count}"
        f" epsilon={eps}",
    )
    dens = stream.density(n_max)
    gap = abs(dens - Fraction(1, 2))
    ok &= rec.line(
        gap <= density_tol,
        "density_half",
        f"density={_fmt(float(dens))} gap={_fmt(float(gap))} tol={_fmt(float(density_tol))}",
    )
    arc_lo, arc_hi = (Fraction(t) for t in str(s.get("arc", "0,3/10")).split(","))
    avg = averages.recurrence_average(
        k, alpha, beta, (arc_lo, arc_hi), rec_n, bits=bits, workers=workers
    )
    ok &= rec.line(avg >= 0.01, "recurrence_average", f"value={_fmt(avg)} min=0.01")
    return ok


def _reproduce_thmB(s: _Settings, rec: _Recorder) -> bool:
    k = s.get("k", 2, int)
    alpha = s.alpha()
    j_max = s.get("jmax", 16, int)
    gap_from = s.get("gap_from_j", 10, int)
    workers = s.get("workers", 1, int)
    report = averages.block_sign_report(
        k, alpha, j_max, bits=s.get("precision_bits", None, int), workers=workers
    )
    nonempty = [b for b in report.blocks if b.count]
    ok = rec.line(
        report.sign_ok and report.stream.uncertain_count == 0,
        "block_signs",
        f"nonempty_blocks={len(nonempty)} uncertain={report.stream.uncertain_count}",
    )
    gaps = [(j, g) for j, g in report.trajectory_gaps() if j >= gap_from]
    min_gap = min((g for _, g in gaps), default=0.0)
    ok &= rec.line(
        bool(gaps) and min_gap >= 0.1,
        "trajectory_gaps",
        f"min_gap={_fmt(min_gap)} from_j={gap_from} windows={len(gaps)}",
    )
    worst = max((w.identity_residual for w in report.b_windows), default=0.0)
    ok &= rec.line(
        worst <= 1e-12,
        "window_identity",
        f"max_residual={_fmt(worst)} windows={len(report.b_windows)}",
    )
    return ok


def _reproduce_intersective(s: _Settings, rec: _Recorder) -> bool:
    k = s.get("k", 2, int)
    alpha = s.alpha()
    delta = s.fraction("delta", "1/32")
    n_max = s.get("nmax", 2 * 10**4, int)
    controls = s.get("controls", 5, int)
    control_n = s.get("control_nmax", 2000, int)
    workers = s.get("workers", 1, int)
    bits = s.get("precision_bits", None, int)

    dense = intersectivity.build_witness(k, alpha, delta, n_max, bits=bits)
    gap = abs(float(dense.density) - float(delta))
    ok = rec.line(
        gap <= 0.02 and dense.uncertain_count == 0,
        "witness_density",
        f"density={_fmt(float(dense.density))} target={_fmt(float(delta))} gap={_fmt(gap)}",
    )
    diffs = sequences.gen_Sk(k, alpha, n_max, bits=bits, workers=workers)
    witness = intersectivity.find_ap(dense, diffs, k)
    ok &= rec.line(
        witness is None,
        "no_progression",
        "NOTFOUND" if witness is None else f"FOUND {witness.start} {witness.diff}",
    )
    seed0 = s.get("seed", 0, int)
    control_diffs = sequences.gen_Sk(k, alpha, control_n, bits=bits, workers=workers)
    hits = sum(
        1
        for i in range(controls)
        if intersectivity.intersectivity_scan(
            intersectivity.DenseSet.random_half(control_n, seed0 + i),
            control_diffs,
            k,
        ).total_witnesses
        > 0
    )
    ok &= rec.line(
        hits >= controls - 1,
        "positive_control",
        f"hits={hits}/{controls}",
    )
    return ok


_RECIPES = {
    "thmA": _reproduce_thmA,
    "thmB": _reproduce_thmB,
    "intersective": _reproduce_intersective,
}


def cmd_reproduce(s: _Settings) -> int:
    name = s.get("recipe")
    if name not in _RECIPES:
        raise CliError(f"unknown recipe {name!r}; choose from {sorted(_RECIPES)}")
    out = s.get("out") or f"report_{name}.txt"
    with open(out, "w") as fh:
        fh.write(f"# reclab reproduce {name}\n")
        rec = _Recorder(fh)
        ok = _RECIPES[name](s, rec)
        fh.write(f"RESULT {'PASS' if ok else 'FAIL'}\n")
    sys.stdout.write(f"wrote {out}\n")
    if not ok:
        raise AssertionFailure(
            f"recipe {name} failed: {', '.join(rec.failures)}; see {out}"
        )
    return EXIT_OK


# -------------------------------------------------------------------- parser


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse defaults to exit code 2
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="reclab", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, fn, **kwargs):
        p = sub.add_parser(name, **kwargs)
        p.set_defaults(fn=fn)
        p.add_argument("--config", help="key=value config file")
        p.add_argument("--workers", type=int, help="worker processes (default 1)")
        p.add_argument("--seed", type=int, help="deterministic seed (default 0)")
        p.add_argument("--precision-bits", dest="precision_bits", type=int,
                       help="override the precision policy (must meet the minimum)")
        p.add_argument("--out", help="write output to this file instead of stdout")
        return p

    p = add("solve-lemma", cmd_solve_lemma, help="print l, m, M for order k")
    p.add_argument("--k", type=int)

    p = add("gen-set", cmd_gen_set, help="emit a generated set, one integer per line")
    p.add_argument("--kind", choices=["sk", "skprime"])
    p.add_argument("--k", type=int)
    p.add_argument("--alpha")
    p.add_argument("--nmax", type=int)
    p.add_argument("--jmax", type=int)
    p.add_argument("--format", choices=["plain", "csv"])

    p = add("simulate", cmd_simulate, help="print R^n(point) coordinates")
    p.add_argument("--k", type=int)
    p.add_argument("--alpha")
    p.add_argument("--point")
    p.add_argument("--n", type=int)

    p = add("certify", cmd_certify, help="non-recurrence certificate per member")
    p.add_argument("--k", type=int)
    p.add_argument("--alpha")
    p.add_argument("--eps")
    p.add_argument("--nmax", type=int)

    p = add("weyl-sum", cmd_weyl_sum, help="windowed exponential-sum averages")
    p.add_argument("--k", type=int)
    p.add_argument("--alpha")
    p.add_argument("--nmax", type=int)
    p.add_argument("--seq", choices=["range", "sk", "skprime"])
    p.add_argument("--jmax", type=int)
    p.add_argument("--plot", action="store_true")

    p = add("block-report", cmd_block_report, help="per-block averages and windows")
    p.add_argument("--k", type=int)
    p.add_argument("--alpha")
    p.add_argument("--jmax", type=int)
    p.add_argument("--plot", action="store_true")

    p = add("avg-diff", cmd_avg_diff, help="weighted vs unweighted average distance")
    p.add_argument("--k", type=int)
    p.add_argument("--alpha")
    p.add_argument("--beta")
    p.add_argument("--exponents")
    p.add_argument("--lo")
    p.add_argument("--hi")
    p.add_argument("--mstart", type=int)
    p.add_argument("--nmax", type=int)

    p = add("recurrence-avg", cmd_recurrence_avg, help="weighted arc-intersection average")
    p.add_argument("--k", type=int)
    p.add_argument("--alpha")
    p.add_argument("--beta")
    p.add_argument("--arc")
    p.add_argument("--nmax", type=int)

    p = add("find-ap", cmd_find_ap, help="search progressions with difference in a set")
    p.add_argument("--set-file", dest="set_file")
    p.add_argument("--diff-kind", dest="diff_kind", choices=["sk", "skprime"])
    p.add_argument("--k", type=int)
    p.add_argument("--alpha")
    p.add_argument("--nmax", type=int)

    p = add("build-witness", cmd_build_witness, help="construct the no-progression set")
    p.add_argument("--k", type=int)
    p.add_argument("--alpha")
    p.add_argument("--delta")
    p.add_argument("--nmax", type=int)

    p = add("reproduce", cmd_reproduce, help="run a bundled desk-scale recipe")
    p.add_argument("recipe", choices=sorted(_RECIPES))
    p.add_argument("--k", type=int)
    p.add_argument("--alpha")
    p.add_argument("--nmax", type=int)
    p.add_argument("--jmax", type=int)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg: dict[str, str] = {}
        if args.command == "reproduce":
            cfg.update(_recipe_config(args.recipe))
        if getattr(args, "config", None):
            cfg.update(read_config(args.config))
        settings = _Settings(args, cfg)
        return args.fn(settings)
    except AssertionFailure as exc:
        print(f"reclab: assertion failed: {exc}", file=sys.stderr)
        return EXIT_ASSERTION
    except (CliError, PrecisionError, ValueError, OSError) as exc:
        print(f"reclab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
