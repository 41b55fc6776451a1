"""Command-line front end.

Problem files are JSON documents carrying a context header, a spectrum and
optional map/field blocks (see README for the schema).  Reports go to
stdout as deterministic JSON (``--pretty`` indents them); diagnostics go to
stderr as a single machine-readable JSON line.

Exit codes: 0 on success, 2 when the verdict is NotEmbeddable (so scripts
can branch on it), 1 on any error.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from typing import Optional

import numpy as np

from . import serialize
from .embedding import (
    LogChoice,
    check_uniqueness_hypothesis,
    obstruction_check,
    realify_flow,
    synthesize_flow,
)
from .errors import GermflowError, ProblemFileError, UnsupportedPrecisionError
from .generator import build_counterexample, find_weak_partner
from .jets import JetContext, JetField, JetMap, RealStructure, to_w_coords
from .normalform import jordan_field, jordan_map
from .spectrum import (
    Spectrum,
    resonance_class,
    resonance_lattice,
    weakly_resonant_monomials,
)

COMMANDS = ("classify", "lattice", "jordan", "embed", "obstruct", "realify", "generate")

DEFAULT_DEGREE = 10


class _Problem:
    """Parsed problem file plus derived objects."""

    def __init__(self, raw: dict, degree_override: Optional[int]):
        if not isinstance(raw, dict):
            raise ProblemFileError("problem file must be a JSON object")
        self.raw = raw
        header = raw.get("context", {})
        self.spectrum = None
        if "spectrum" in raw:
            self.spectrum = serialize.spectrum_from_dict(raw["spectrum"])
        n = header.get("n")
        if n is None and self.spectrum is not None:
            n = self.spectrum.n
        if n is None:
            raise ProblemFileError("context.n or a spectrum block is required")
        degree = degree_override or header.get("degree", DEFAULT_DEGREE)
        tol = header.get("tol", 1e-12)
        self.ctx = JetContext(int(n), int(degree), float(tol))
        if self.spectrum is not None and self.spectrum.n != self.ctx.n:
            raise ProblemFileError("spectrum dimension does not match context.n")
        self.params = raw.get("params", {})

    def need_spectrum(self) -> Spectrum:
        if self.spectrum is None:
            raise ProblemFileError("this command requires a spectrum block")
        return self.spectrum

    def _jet(self, key: str, loader):
        block = self.raw.get(key)
        if block is None:
            return None
        obj = loader(block, self.ctx, self.spectrum)
        if block.get("coords", "w") == "z":
            obj = to_w_coords(obj, RealStructure(self.need_spectrum().rho))
        return obj

    def map_block(self, key: str = "map") -> Optional[JetMap]:
        return self._jet(key, serialize.jet_map_from_dict)

    def field_block(self, key: str = "field") -> Optional[JetField]:
        return self._jet(key, serialize.jet_field_from_dict)

    def need(self, obj, key: str):
        if obj is None:
            raise ProblemFileError(f"this command requires a {key!r} block")
        return obj

    def nilpotent_linear(self):
        block = self.raw.get("nilpotent_linear")
        if block is None:
            return ()
        return tuple(tuple(complex(v[0], v[1]) for v in row) for row in block)

    def log_choice(self) -> LogChoice:
        return LogChoice(self.need_spectrum(), self.nilpotent_linear())


def _classify_table(obj, s: Spectrum) -> list[dict]:
    rows = []
    for a, j, c in obj.terms():
        cls = resonance_class(a, j, s)
        rows.append(
            {
                "exponents": list(a),
                "component": j,
                "coeff": [float(c.real), float(c.imag)],
                "class": cls.kind,
                "k": cls.k,
            }
        )
    return rows


def _cmd_classify(p: _Problem) -> tuple[dict, int]:
    s = p.need_spectrum()
    obj = p.map_block() or p.field_block()
    if obj is not None:
        return {"table": _classify_table(obj, s)}, 0
    dmin = int(p.params.get("degree_min", 2))
    dmax = int(p.params.get("degree_max", p.ctx.degree))
    weak = weakly_resonant_monomials(s, dmin, dmax)
    return {
        "degree_min": dmin,
        "degree_max": dmax,
        "weak_monomials": [
            {"exponents": list(a), "component": j, "k": k} for a, j, k in weak
        ],
    }, 0


def _cmd_lattice(p: _Problem) -> tuple[dict, int]:
    lat = resonance_lattice(p.need_spectrum())
    return {"rank": lat.rank, "generators": [list(g) for g in lat.generators]}, 0


def _cmd_jordan(p: _Problem) -> tuple[dict, int]:
    s = p.need_spectrum()
    f = p.map_block()
    if f is not None:
        dec = jordan_map(f, s)
        return serialize.decomposition_to_dict(dec, s), 0
    x = p.need(p.field_block(), "map or field")
    dec = jordan_field(x, s)
    return serialize.decomposition_to_dict(dec, s), 0


def _cmd_embed(p: _Problem) -> tuple[dict, int]:
    f = p.need(p.map_block(), "map")
    verdict = synthesize_flow(f, p.log_choice())
    code = 2 if verdict.is_not_embeddable else 0
    return serialize.verdict_to_dict(verdict), code


def _cmd_obstruct(p: _Problem, log_bound: Optional[int], threads: int) -> tuple[dict, int]:
    f = p.need(p.map_block(), "map")
    base = p.log_choice()
    if log_bound:
        choices = LogChoice.enumerate(
            base.spectrum, log_bound, base.nilpotent_linear
        )
    else:
        choices = [base]

    def run(c: LogChoice):
        return obstruction_check(f, c)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            verdicts = list(pool.map(run, choices))
    else:
        verdicts = [run(c) for c in choices]

    per_choice = [
        {"shifts": list(c.shifts), "verdict": serialize.verdict_to_dict(v)}
        for c, v in zip(choices, verdicts)
    ]
    if all(v.is_not_embeddable for v in verdicts):
        aggregate = serialize.verdict_to_dict(verdicts[0])
    else:
        unknown = next((v for v in verdicts if not v.is_not_embeddable), verdicts[0])
        aggregate = serialize.verdict_to_dict(unknown)
    code = 2 if all(v.is_not_embeddable for v in verdicts) else 0
    return {"choices": per_choice, "aggregate": aggregate}, code


def _cmd_realify(p: _Problem) -> tuple[dict, int]:
    s = p.need_spectrum()
    f = p.need(p.map_block(), "map")
    x = p.field_block()
    if x is None:
        verdict = synthesize_flow(f, p.log_choice())
        if not verdict.is_embeddable:
            return {
                "error": "no flow to realify",
                "verdict": serialize.verdict_to_dict(verdict),
            }, 2 if verdict.is_not_embeddable else 1
        x = verdict.flow
    y = realify_flow(f, x, RealStructure(s.rho), s)
    return {"flow": serialize.jet_to_dict(y)}, 0


def _cmd_generate(p: _Problem) -> tuple[dict, int]:
    s = p.need_spectrum()
    xs = p.need(p.field_block("field_semisimple"), "field_semisimple")
    xn = p.need(p.field_block("field_nilpotent"), "field_nilpotent")
    yp = p.field_block("partner")
    if yp is None:
        bound = int(p.params.get("partner_degree_bound", p.ctx.degree))
        yp = find_weak_partner(xn, s, bound)
    l = int(p.params.get("partner_truncation", max(sum(a) for a, _, _ in yp.terms())))
    phi = build_counterexample(xs, xn, yp, l, s)
    weak = [
        {"exponents": list(a), "component": j, "k": resonance_class(a, j, s).k}
        for a, j, _ in phi.terms()
        if resonance_class(a, j, s).is_weak
    ]
    return {
        "counterexample": serialize.jet_to_dict(phi),
        "partner": serialize.jet_to_dict(yp),
        "weak_monomials": weak,
    }, 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="germflow",
        description="Jet-level resonance analysis, Jordan-Chevalley "
        "decomposition and embedding flows for local diffeomorphisms.",
    )
    parser.add_argument("command_pos", nargs="?", choices=COMMANDS, metavar="command")
    parser.add_argument("--command", choices=COMMANDS, dest="command_flag")
    parser.add_argument("--input", required=True, help="problem file (JSON)")
    parser.add_argument("--log-bound", type=int, default=0,
                        help="enumerate logarithm shifts up to this bound (obstruct)")
    parser.add_argument("--degree", type=int, default=None,
                        help="override the truncation degree")
    parser.add_argument("--precision", type=int, default=53,
                        help="coefficient precision in bits (only 53 supported)")
    parser.add_argument("--json", action="store_true", default=True,
                        help="compact JSON report (default)")
    parser.add_argument("--pretty", action="store_true",
                        help="indented JSON report")
    parser.add_argument("--threads", type=int, default=1,
                        help="worker threads for independent log choices")
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    command = args.command_flag or args.command_pos
    if command is None:
        _fail("Parse", "no command given (positional or --command)")
        return 1
    if args.precision != 53:
        _fail(
            UnsupportedPrecisionError.code,
            "coefficients are double precision; only --precision 53 is "
            "supported by this build",
        )
        return 1
    if args.threads < 1:
        _fail("Parse", "--threads must be >= 1")
        return 1

    try:
        with open(args.input, "r", encoding="utf-8") as fh:
            try:
                raw = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ProblemFileError(
                    f"{args.input}: line {exc.lineno} column {exc.colno}: {exc.msg}"
                ) from exc
        problem = _Problem(raw, args.degree)
        if command == "classify":
            report, code = _cmd_classify(problem)
        elif command == "lattice":
            report, code = _cmd_lattice(problem)
        elif command == "jordan":
            report, code = _cmd_jordan(problem)
        elif command == "embed":
            report, code = _cmd_embed(problem)
        elif command == "obstruct":
            report, code = _cmd_obstruct(problem, args.log_bound, args.threads)
        elif command == "realify":
            report, code = _cmd_realify(problem)
        elif command == "generate":
            report, code = _cmd_generate(problem)
        else:  # pragma: no cover
            raise ProblemFileError(f"unknown command {command}")
    except GermflowError as exc:
        _fail(exc.code, str(exc))
        return 1
    except OSError as exc:
        _fail("Parse", str(exc))
        return 1

    out = {"command": command, "report": report}
    sys.stdout.write(serialize.dumps(out, pretty=args.pretty) + "\n")
    return code


def _fail(code: str, message: str) -> None:
    sys.stderr.write(serialize.dumps({"error": {"code": code, "message": message}}) + "\n")


def entry() -> None:  # console-script hook
    sys.exit(main())


if __name__ == "__main__":
    sys.exit(main())
