"""Pure-Python kernels for sparse multivariate polynomial arithmetic.

Polynomials are dicts mapping integer exponent tuples to coefficients from an
arbitrary commutative ring (anything supporting ``+``, ``-``, ``*`` and a
truthiness test for zero).  These functions are the hot loops of the package;
``spincm._poly_core`` is the compiled twin with the same signatures.
"""

from __future__ import annotations

BACKEND = "python"


def dict_add(a: dict, b: dict) -> dict:
    """Sum of two exponent->coefficient dicts, zero terms dropped."""
    if not a:
        return dict(b)
    if not b:
        return dict(a)
    out = dict(a)
    for k, c in b.items():
        prev = out.get(k)
        if prev is None:
            out[k] = c
        else:
            s = prev + c
            if s:
                out[k] = s
            else:
                del out[k]
    return out


def dict_sub(a: dict, b: dict) -> dict:
    """Difference a - b of two exponent->coefficient dicts."""
    out = dict(a)
    for k, c in b.items():
        prev = out.get(k)
        if prev is None:
            out[k] = -c
        else:
            s = prev - c
            if s:
                out[k] = s
            else:
                del out[k]
    return out


def dict_neg(a: dict) -> dict:
    return {k: -c for k, c in a.items()}


def dict_scale(a: dict, c) -> dict:
    """Multiply every coefficient by the ring element c."""
    if not c:
        return {}
    out = {}
    for k, v in a.items():
        p = v * c
        if p:
            out[k] = p
    return out


def dict_mul(a: dict, b: dict, max_deg: int = -1) -> dict:
    """Product of two exponent->coefficient dicts.

    If ``max_deg >= 0``, product terms of total degree above it are discarded
    (truncated jet arithmetic).
    """
    if not a or not b:
        return {}
    if len(a) > len(b):
        a, b = b, a
    out: dict = {}
    if max_deg >= 0:
        bitems = [(k, sum(k), c) for k, c in b.items()]
        for ka, ca in a.items():
            da = sum(ka)
            for kb, db, cb in bitems:
                if da + db > max_deg:
                    continue
                k = tuple(x + y for x, y in zip(ka, kb))
                p = ca * cb
                prev = out.get(k)
                if prev is None:
                    if p:
                        out[k] = p
                else:
                    s = prev + p
                    if s:
                        out[k] = s
                    else:
                        del out[k]
        return out
    for ka, ca in a.items():
        for kb, cb in b.items():
            k = tuple(x + y for x, y in zip(ka, kb))
            p = ca * cb
            prev = out.get(k)
            if prev is None:
                if p:
                    out[k] = p
            else:
                s = prev + p
                if s:
                    out[k] = s
                else:
                    del out[k]
    return out
