"""Lossless JSON encoding for the scalar tower.

Each value is tagged by kind so mixed trees (polynomials whose coefficients
are themselves field scalars or nested fractions) round-trip exactly.
"""

from __future__ import annotations

from fractions import Fraction

from .expfunc import ExpFunc, ExpPoly
from .field import FieldScalar
from .poly import Poly
from .ratfunc import RatFunc


def scalar_to_json(value) -> dict:
    if isinstance(value, FieldScalar):
        return {"k": "fs", **value.to_json()}
    if isinstance(value, Fraction):
        return {"k": "frac", "num": value.numerator, "den": value.denominator}
    if isinstance(value, int):
        return {"k": "int", "value": value}
    if isinstance(value, Poly):
        return {"k": "poly", "nvars": value.nvars,
                "terms": [[list(key), scalar_to_json(c)]
                          for key, c in value.sorted_terms()]}
    if isinstance(value, RatFunc):
        return {"k": "rf", "num": scalar_to_json(value.num),
                "den": scalar_to_json(value.den)}
    if isinstance(value, ExpPoly):
        return {"k": "ep", "nvars": value.nvars, "q": value.q,
                "terms": [[list(key), scalar_to_json(c)]
                          for key, c in value.sorted_terms()]}
    if isinstance(value, ExpFunc):
        return {"k": "ef", "num": scalar_to_json(value.num),
                "den": scalar_to_json(value.den)}
    raise TypeError(f"cannot serialise {type(value).__name__}")


def scalar_from_json(data: dict):
    kind = data["k"]
    if kind == "fs":
        return FieldScalar.from_json(data)
    if kind == "frac":
        return Fraction(data["num"], data["den"])
    if kind == "int":
        return data["value"]
    if kind == "poly":
        return Poly(data["nvars"],
                    {tuple(key): scalar_from_json(c)
                     for key, c in data["terms"]})
    if kind == "rf":
        return RatFunc(scalar_from_json(data["num"]),
                       scalar_from_json(data["den"]), normalize=False)
    if kind == "ep":
        return ExpPoly(data["nvars"], data["q"],
                       {tuple(key): scalar_from_json(c)
                        for key, c in data["terms"]})
    if kind == "ef":
        return ExpFunc(scalar_from_json(data["num"]),
                       scalar_from_json(data["den"]), normalize=False)
    raise ValueError(f"unknown scalar kind {kind!r}")
