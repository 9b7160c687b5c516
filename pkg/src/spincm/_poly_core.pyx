# cython: language_level=3
"""Compiled kernels for sparse multivariate polynomial arithmetic.

Same contract as spincm._poly_fallback; coefficients stay generic Python
objects, the speedup comes from typed loops and tuple handling.
"""

BACKEND = "cython"


def dict_add(dict a, dict b):
    if not a:
        return dict(b)
    if not b:
        return dict(a)
    cdef dict out = dict(a)
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


def dict_sub(dict a, dict b):
    cdef dict out = dict(a)
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


def dict_neg(dict a):
    cdef dict out = {}
    for k, c in a.items():
        out[k] = -c
    return out


def dict_scale(dict a, c):
    if not c:
        return {}
    cdef dict out = {}
    for k, v in a.items():
        p = v * c
        if p:
            out[k] = p
    return out


cdef inline tuple _tuple_add(tuple ka, tuple kb):
    cdef Py_ssize_t n = len(ka)
    cdef Py_ssize_t i
    cdef list res = [0] * n
    for i in range(n):
        res[i] = <object> ka[i] + <object> kb[i]
    return tuple(res)


cdef inline long _tuple_sum(tuple k):
    cdef long s = 0
    for x in k:
        s += <long> x
    return s


def dict_mul(dict a, dict b, long max_deg=-1):
    if not a or not b:
        return {}
    if len(a) > len(b):
        a, b = b, a
    cdef dict out = {}
    cdef long da, db
    cdef list bitems
    if max_deg >= 0:
        bitems = [(k, _tuple_sum(<tuple> k), c) for k, c in b.items()]
        for ka, ca in a.items():
            da = _tuple_sum(<tuple> ka)
            for kb, db, cb in bitems:
                if da + db > max_deg:
                    continue
                k = _tuple_add(<tuple> ka, <tuple> kb)
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
            k = _tuple_add(<tuple> ka, <tuple> kb)
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
