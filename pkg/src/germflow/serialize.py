"""JSON (de)serialization for spectra, jets, decompositions and verdicts.

The writer is deterministic: terms come out in graded-lex order, keys are
sorted, floats use Python's shortest round-trip representation.  The reader
accepts rational strings (``"p/q"`` or ``"p"``) everywhere an exact number
is expected, and coefficients may be given as ``{"exp_of": [c_1, ...]}``
meaning ``exp(sum c_j * mu_j)`` against an active spectrum, so eigenvalue
powers can be transcribed exactly as written.
"""

from __future__ import annotations

import cmath
import json
from fractions import Fraction
from typing import Optional

from .errors import ProblemFileError
from .jets import JetContext, JetField, JetMap
from .normalform import FieldDecomposition, MapDecomposition
from .spectrum import EigenLog, Spectrum, SpectrumBasis

__all__ = [
    "spectrum_to_dict",
    "spectrum_from_dict",
    "jet_to_dict",
    "jet_map_from_dict",
    "jet_field_from_dict",
    "decomposition_to_dict",
    "verdict_to_dict",
    "dumps",
]


def _fraction_to_str(f: Fraction) -> str:
    return f"{f.numerator}/{f.denominator}"


def _fraction_from(v) -> Fraction:
    try:
        if isinstance(v, str):
            return Fraction(v)
        if isinstance(v, int):
            return Fraction(v)
    except (ValueError, ZeroDivisionError) as exc:
        raise ProblemFileError(f"bad rational {v!r}: {exc}") from exc
    raise ProblemFileError(f"expected an exact rational, got {v!r}")


def _complex_to_pair(c: complex) -> list[float]:
    return [float(c.real), float(c.imag)]


def spectrum_to_dict(s: Spectrum) -> dict:
    return {
        "symbols": list(s.basis.symbols),
        "period_index": s.basis.period_index,
        "values": [_complex_to_pair(v) for v in s.basis.values],
        "logs": [[_fraction_to_str(c) for c in log.coords] for log in s.logs],
        "rho": list(s.rho),
    }


def spectrum_from_dict(d: dict) -> Spectrum:
    try:
        basis = SpectrumBasis(
            tuple(d["symbols"]),
            int(d["period_index"]),
            tuple(complex(v[0], v[1]) for v in d["values"]),
        )
        logs = tuple(
            EigenLog(tuple(_fraction_from(c) for c in row)) for row in d["logs"]
        )
        return Spectrum(basis, logs, tuple(int(r) for r in d["rho"]))
    except KeyError as exc:
        raise ProblemFileError(f"spectrum block is missing key {exc}") from exc


def _coeff_from(v, spectrum: Optional[Spectrum]) -> complex:
    if isinstance(v, dict):
        if "exp_of" not in v:
            raise ProblemFileError(f"unknown coefficient form {v!r}")
        if spectrum is None:
            raise ProblemFileError(
                "exp_of coefficients need a spectrum in scope"
            )
        coeffs = [_fraction_from(c) for c in v["exp_of"]]
        if len(coeffs) != spectrum.n:
            raise ProblemFileError("exp_of vector length must equal n")
        acc = 0j
        for c, j in zip(coeffs, range(spectrum.n)):
            if c:
                acc += float(c) * spectrum.value(j)
        return cmath.exp(acc)
    if isinstance(v, (list, tuple)) and len(v) == 2:
        return complex(float(v[0]), float(v[1]))
    raise ProblemFileError(f"bad coefficient {v!r}")


def jet_to_dict(obj) -> dict:
    return {
        "n": obj.ctx.n,
        "degree": obj.ctx.degree,
        "terms": [
            {
                "exponents": list(a),
                "component": j,
                "coeff": _complex_to_pair(c),
            }
            for a, j, c in obj.terms()
        ],
    }


def _jet_from_dict(cls, d: dict, ctx: Optional[JetContext], spectrum):
    try:
        n = int(d["n"])
        degree = int(d["degree"])
        if ctx is None:
            ctx = JetContext(n, degree)
        elif ctx.n != n or ctx.degree != degree:
            raise ProblemFileError(
                f"jet header ({n}, {degree}) conflicts with context "
                f"({ctx.n}, {ctx.degree})"
            )
        terms = [
            (
                tuple(int(e) for e in t["exponents"]),
                int(t["component"]),
                _coeff_from(t["coeff"], spectrum),
            )
            for t in d["terms"]
        ]
    except KeyError as exc:
        raise ProblemFileError(f"jet block is missing key {exc}") from exc
    try:
        return cls.from_terms(ctx, terms)
    except ValueError as exc:
        raise ProblemFileError(str(exc)) from exc


def jet_map_from_dict(
    d: dict, ctx: Optional[JetContext] = None, spectrum: Optional[Spectrum] = None
) -> JetMap:
    return _jet_from_dict(JetMap, d, ctx, spectrum)


def jet_field_from_dict(
    d: dict, ctx: Optional[JetContext] = None, spectrum: Optional[Spectrum] = None
) -> JetField:
    return _jet_from_dict(JetField, d, ctx, spectrum)


def decomposition_to_dict(dec, s: Spectrum) -> dict:
    if isinstance(dec, FieldDecomposition):
        return {
            "kind": "field",
            "spectrum": spectrum_to_dict(s),
            "semisimple": jet_to_dict(dec.xs),
            "nilpotent": jet_to_dict(dec.xn),
            "eta": jet_to_dict(dec.eta),
        }
    if isinstance(dec, MapDecomposition):
        return {
            "kind": "map",
            "spectrum": spectrum_to_dict(s),
            "semisimple": jet_to_dict(dec.phi_s),
            "unipotent": jet_to_dict(dec.phi_u),
            "eta": jet_to_dict(dec.eta),
        }
    raise TypeError("expected a decomposition")


def verdict_to_dict(v) -> dict:
    return {
        "status": v.status,
        "witness": [
            {
                "exponents": list(a),
                "component": j,
                "coeff": _complex_to_pair(c),
                "k": k,
            }
            for a, j, c, k in v.witness
        ],
        "condition": v.condition,
        "reason": v.reason,
        "flow": None if v.flow is None else jet_to_dict(v.flow),
        "normal_form": None if v.normal_form is None else jet_to_dict(v.normal_form),
    }


def dumps(obj, pretty: bool = False) -> str:
    """Deterministic JSON text (sorted keys, fixed separators)."""
    if pretty:
        return json.dumps(obj, sort_keys=True, indent=2)
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))
