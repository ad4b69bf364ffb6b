"""Command-line front end: run check suites, export matrices and spectra.

Reports are JSON documents (see ``report.py``) written to ``--output`` or to
standard output; a one-line-per-check summary goes to standard error.
Exit status: 0 if every check passes, 1 if any check fails, 2 on bad flags.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

from . import spheres as S
from .report import CheckReport
from .represent import (
    NotHermitian,
    ReprConfig,
    export_matrix,
    hermitian_spectrum,
    op_norm_estimate,
    to_matrix,
)

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _angle(text: str) -> float:
    """Angles in radians; ``pi`` expressions such as ``2pi/7`` are accepted."""
    t = text.strip().lower().replace("π", "pi")
    try:
        if "pi" in t:
            num, _, den = t.partition("/")
            coef = num.replace("*", "").replace("pi", "") or "1"
            val = float(coef) * math.pi / (float(den) if den else 1.0)
        else:
            val = float(t)
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad angle {text!r}") from None
    if not 0 <= val < 2 * math.pi:
        raise argparse.ArgumentTypeError(f"angle {text!r} outside [0, 2pi)")
    return val


def _q(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad q {text!r}") from None
    if not 0 < v < 1:
        raise argparse.ArgumentTypeError(f"q={text} must lie in (0, 1)")
    return v


def _positive_int(minimum: int):
    def parse(text: str) -> int:
        try:
            v = int(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"bad integer {text!r}") from None
        if v < minimum:
            raise argparse.ArgumentTypeError(f"{text} must be >= {minimum}")
        return v
    return parse


def _tol(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad tolerance {text!r}") from None
    if not v > 0:
        raise argparse.ArgumentTypeError("tolerance must be > 0")
    return v


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="toeplitz-spheres", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, n_default=2, N_default=10, q_default=(0.5,)):
        sp.add_argument("--n", type=_positive_int(1), default=n_default, help="sphere index n")
        sp.add_argument("--q", type=_q, nargs="+", default=list(q_default), help="deformation parameter(s)")
        sp.add_argument("--N", type=_positive_int(1), default=N_default, help="window cutoff")
        sp.add_argument("--output", "-o", help="write the report here instead of stdout")
        sp.add_argument("--timing", action="store_true", help="include wall times (not reproducible)")

    sp = sub.add_parser("check-relations", help="sphere and SU(2)_q relations, symbolic and numeric")
    common(sp)
    sp.add_argument("--theta", type=_angle, nargs="+", default=None, help="angles for the circle parameter (e.g. 0 2pi/7)")
    sp.add_argument("--phi", type=_angle, nargs="+", default=None, help="boundary angles, each applied to every slot")
    sp.add_argument("--tol", type=_tol, default=S.SYMBOLIC_NUMERIC_TOL, help="numeric residual tolerance")
    sp.add_argument("--su2-N", type=_positive_int(1), default=20, help="window for the SU(2)_q relations")

    sp = sub.add_parser("check-lemma", help="face restriction identities")
    common(sp)
    sp.add_argument("--L", type=_positive_int(0), default=3, help="maximal word length")

    sp = sub.add_parser("check-theorem", help="support in F~_n and ~-invariance of words")
    common(sp, N_default=3)
    sp.add_argument("--L", type=_positive_int(1), default=4, help="maximal word length")

    sp = sub.add_parser("check-sets", help="exhaustive set identities over a window")
    common(sp, N_default=3)
    sp.add_argument("--zmax", type=_positive_int(0), default=3)
    sp.add_argument("--xmax", type=_positive_int(0), default=3)

    sp = sub.add_parser("check-exactness", help="boundary ideal and face compatibility")
    common(sp, N_default=2)
    sp.add_argument("--L", type=_positive_int(0), default=3, help="maximal word length")
    sp.add_argument("--richness-length", type=_positive_int(1), default=8, help="word length for the ideal richness test")

    sp = sub.add_parser("check-qindep", help="Gram-rank proxy for q-independence")
    common(sp, n_default=1, N_default=8, q_default=(0.3, 0.7))
    sp.add_argument("--L", type=_positive_int(0), default=3, help="maximal word length")

    sp = sub.add_parser("check-quotient", help="random checks of the quotient groupoid laws")
    common(sp, N_default=3)
    sp.add_argument("--samples", type=_positive_int(1), default=10_000)
    sp.add_argument("--seed", type=int, default=0, help="LCG seed")
    sp.add_argument("--zmax", type=_positive_int(0), default=2)
    sp.add_argument("--xmax", type=_positive_int(0), default=2)

    sp = sub.add_parser("check-coherence", help="symbolic versus numeric oracle agreement")
    common(sp, N_default=8)
    sp.add_argument("--samples", type=_positive_int(1), default=1000)
    sp.add_argument("--seed", type=int, default=0, help="LCG seed")

    for name, help_ in [("represent", "export the truncated matrix of a word sum"),
                        ("spectrum", "Hermitian spectrum of a word sum")]:
        sp = sub.add_parser(name, help=help_)
        common(sp, N_default=4)
        sp.add_argument("--word", action="append", required=True,
                        help='word such as "Y2* Y1"; repeat to add words; "1" is the unit')
        sp.add_argument("--theta", type=_angle, default=0.0, help="circle parameter angle")
        sp.add_argument("--phi", type=_angle, nargs="+", default=None, help="boundary angles, one per slot")
    return p


def parse_word(text: str, letters: dict) -> tuple:
    word = tuple(text.split())
    if word == ("1",):
        return ()
    for w in word:
        if w not in letters:
            raise UsageError(f"unknown letter {w!r}; expected one of {', '.join(letters)}")
    return word


def _single_q(args) -> float:
    if len(args.q) != 1:
        raise UsageError(f"{args.command} takes a single --q value")
    return args.q[0]


def _word_sum(args):
    gens = S.build_generators(args.n, _single_q(args))
    letters = gens.letters()
    words = S.Words(letters, args.n)
    total = None
    for text in args.word:
        el = words.element(parse_word(text, letters))
        total = el if total is None else total + el
    phi = tuple(args.phi) if args.phi else (0.0,) * args.n
    if len(phi) == 1:
        phi = phi * args.n
    if len(phi) != args.n:
        raise UsageError(f"--phi needs 1 or {args.n} angles")
    cfg = ReprConfig(args.n, args.N, gens.q, args.theta, phi)
    return total, cfg


def _run_checks(args) -> CheckReport:
    cmd = args.command
    params = {k: v for k, v in sorted(vars(args).items()) if k not in ("command", "output", "timing")}
    out = CheckReport(cmd, params)

    def add(rep: CheckReport, tag: str = ""):
        out.merge(rep, prefix=f"[{rep.title}{tag}] ")

    multi = len(args.q) > 1
    if cmd == "check-relations":
        thetas = args.theta or list(S.DEFAULT_ANGLES)
        phis = args.phi or list(S.DEFAULT_ANGLES)
        angles = [(t, f) for t in thetas for f in phis]
        for q in args.q:
            tag = f" q={q}"
            add(S.check_su2q_relations(q, args.su2_N, angles, args.tol), tag)
            add(S.check_sphere_relations(args.n, q, args.N, angles, args.tol), tag)
    elif cmd == "check-lemma":
        if args.n < 2:
            raise UsageError("check-lemma needs --n >= 2")
        for q in args.q:
            add(S.check_lemma_restrictions(args.n, q, args.L), f" q={q}" if multi else "")
    elif cmd == "check-theorem":
        for q in args.q:
            add(S.check_theorem_support(args.n, q, args.L, args.N), f" q={q}" if multi else "")
    elif cmd == "check-sets":
        if args.n < 2:
            raise UsageError("check-sets needs --n >= 2")
        add(S.check_set_identities(args.n, args.zmax, args.xmax, args.N))
    elif cmd == "check-exactness":
        for q in args.q:
            add(S.check_exactness(args.n, q, args.N, args.L, args.richness_length),
                f" q={q}" if multi else "")
    elif cmd == "check-qindep":
        if len(args.q) != 2 or args.q[0] == args.q[1]:
            raise UsageError("check-qindep needs two distinct --q values")
        add(S.check_q_independence_proxy(args.n, args.q[0], args.q[1], args.L, args.N))
    elif cmd == "check-quotient":
        add(S.check_quotient_soundness(args.n, args.samples, args.seed, args.zmax, args.xmax, args.N))
    elif cmd == "check-coherence":
        rels = [S.check_su2q_relations(q) for q in args.q]
        rels += [S.check_sphere_relations(args.n, q, args.N) for q in args.q]
        add(S.check_oracle_coherence(args.samples, args.seed, args.N, rels))
    return out


def _emit(text: str, path: str | None) -> None:
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def run(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if args.command in ("represent", "spectrum"):
            try:
                f, cfg = _word_sum(args)
            except ValueError as exc:
                raise UsageError(f"toeplitz-spheres: error: {exc}") from None
        if args.command == "represent":
            _emit(export_matrix(to_matrix(f, cfg)), args.output)
            return EXIT_OK
        if args.command == "spectrum":
            M = to_matrix(f, cfg)
            try:
                eig = hermitian_spectrum(M)
            except NotHermitian:
                raise UsageError("the word sum is not Hermitian on this window") from None
            doc = {
                "schema_version": 1,
                "n": cfg.n, "N": cfg.N, "q": cfg.q, "theta": cfg.theta, "phi": list(cfg.phi),
                "words": args.word,
                "eigenvalues": [float(v) for v in eig],
                "op_norm": op_norm_estimate(M),
            }
            _emit(json.dumps(doc, indent=2) + "\n", args.output)
            return EXIT_OK
        report = _run_checks(args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    _emit(report.dumps(args.timing), args.output)
    for line in report.summary_lines():
        print(line, file=sys.stderr)
    return EXIT_OK if report.passed else EXIT_FAIL


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
