# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled sparse polynomial kernels; same contract as ``_pykernel``."""


cpdef tuple mono_mul(tuple a, tuple b):
    cdef Py_ssize_t i = 0, j = 0
    cdef Py_ssize_t la = len(a), lb = len(b)
    cdef list out
    cdef object ia, ib, e, r
    cdef int sign = 1
    if la == 0:
        return b, 1
    if lb == 0:
        return a, 1
    out = []
    while i < la and j < lb:
        ia = a[i]
        ib = b[j]
        if ia == ib:
            e = a[i + 1] + b[j + 1]
            if e:
                out.append(ia)
                out.append(e)
            i += 2
            j += 2
        elif ia < ib:
            out.append(ia)
            out.append(a[i + 1])
            i += 2
        else:
            out.append(ib)
            out.append(b[j + 1])
            j += 2
    while i < la:
        out.append(a[i])
        i += 1
    while j < lb:
        out.append(b[j])
        j += 1
    if out and out[0] == 0:
        e = out[1]
        if e != 1:
            r = e % 2
            if ((e - r) // 2) % 2:
                sign = -1
            if r:
                out[1] = 1
            else:
                del out[0:2]
    return tuple(out), sign


cpdef dict poly_mul(dict p, dict q):
    cdef dict out = {}
    cdef tuple ma, mb, m
    cdef object ca, cb, c, v
    cdef int s
    if len(p) > len(q):
        p, q = q, p
    for ma, ca in p.items():
        for mb, cb in q.items():
            m, s = mono_mul(ma, mb)
            c = ca * cb
            if s < 0:
                c = -c
            v = out.get(m)
            if v is None:
                out[m] = c
            else:
                v = v + c
                if v:
                    out[m] = v
                else:
                    del out[m]
    return out


cpdef dict poly_add(dict p, dict q):
    cdef dict out
    cdef tuple m
    cdef object c, v
    if len(p) < len(q):
        p, q = q, p
    out = dict(p)
    for m, c in q.items():
        v = out.get(m)
        if v is None:
            out[m] = c
        else:
            v = v + c
            if v:
                out[m] = v
            else:
                del out[m]
    return out


cpdef dict poly_iadd(dict acc, dict p, object c, tuple mono):
    cdef tuple m, mm
    cdef object v, w, old
    cdef int s
    if mono:
        for m, v in p.items():
            mm, s = mono_mul(m, mono)
            w = v * c
            if s < 0:
                w = -w
            old = acc.get(mm)
            if old is None:
                acc[mm] = w
            else:
                old = old + w
                if old:
                    acc[mm] = old
                else:
                    del acc[mm]
    else:
        for m, v in p.items():
            w = v * c
            old = acc.get(m)
            if old is None:
                acc[m] = w
            else:
                old = old + w
                if old:
                    acc[m] = old
                else:
                    del acc[m]
    return acc


cpdef dict poly_scale(dict p, object c):
    if not c:
        return {}
    return {m: v * c for m, v in p.items()}


cpdef dict poly_partial(dict p, Py_ssize_t aid):
    cdef dict out = {}
    cdef tuple m, mm
    cdef object c, e, w, old
    cdef Py_ssize_t n, k, mk
    for m, c in p.items():
        n = len(m)
        k = 0
        while k < n:
            mk = m[k]
            if mk == aid:
                e = m[k + 1]
                if e == 1:
                    mm = m[:k] + m[k + 2:]
                else:
                    mm = m[:k] + (aid, e - 1) + m[k + 2:]
                w = c * e
                old = out.get(mm)
                if old is None:
                    out[mm] = w
                else:
                    old = old + w
                    if old:
                        out[mm] = old
                    else:
                        del out[mm]
                break
            if mk > aid:
                break
            k += 2
    return out


cpdef dict poly_rename(dict p, dict idmap):
    cdef dict out = {}
    cdef tuple m, mm
    cdef list pairs, flat
    cdef object c, old, a, e
    cdef Py_ssize_t k
    for m, c in p.items():
        pairs = []
        for k in range(0, len(m), 2):
            pairs.append((idmap.get(m[k], m[k]), m[k + 1]))
        pairs.sort()
        flat = []
        for a, e in pairs:
            if flat and flat[len(flat) - 2] == a:
                flat[len(flat) - 1] = flat[len(flat) - 1] + e
                if not flat[len(flat) - 1]:
                    del flat[len(flat) - 2:]
            else:
                flat.append(a)
                flat.append(e)
        mm = tuple(flat)
        old = out.get(mm)
        if old is None:
            out[mm] = c
        else:
            old = old + c
            if old:
                out[mm] = old
            else:
                del out[mm]
    return out
