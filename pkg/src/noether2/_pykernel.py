"""Sparse polynomial kernels, pure-Python implementation.

A monomial is a flat tuple ``(id0, e0, id1, e1, ...)`` sorted by atom id.
Atom id 0 is reserved for the imaginary unit, whose exponent is reduced
modulo 2 with the matching sign flip.  A polynomial is a dict mapping
monomials to nonzero coefficients.

``_ckernel.pyx`` mirrors every function here; keep the two in sync.
"""


def mono_mul(a, b):
    """Return ``(a*b, sign)`` where sign is +1 or -1 from reducing I**2."""
    if not a:
        return b, 1
    if not b:
        return a, 1
    out = []
    i = j = 0
    la = len(a)
    lb = len(b)
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
    if i < la:
        out.extend(a[i:])
    if j < lb:
        out.extend(b[j:])
    sign = 1
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


def poly_mul(p, q):
    if len(p) > len(q):
        p, q = q, p
    out = {}
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


def poly_add(p, q):
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


def poly_iadd(acc, p, c, mono):
    """In place ``acc += c * mono * p``; ``mono`` may be the empty tuple."""
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


def poly_scale(p, c):
    if not c:
        return {}
    return {m: v * c for m, v in p.items()}


def poly_partial(p, aid):
    """Formal partial derivative with respect to the atom with id ``aid``."""
    out = {}
    for m, c in p.items():
        n = len(m)
        k = 0
        while k < n:
            if m[k] == aid:
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
            if m[k] > aid:
                break
            k += 2
    return out


def poly_rename(p, idmap):
    """Apply an atom-id renaming; the I atom (id 0) never moves."""
    out = {}
    for m, c in p.items():
        pairs = []
        for k in range(0, len(m), 2):
            pairs.append((idmap.get(m[k], m[k]), m[k + 1]))
        pairs.sort()
        flat = []
        for a, e in pairs:
            if flat and flat[-2] == a:
                flat[-1] = flat[-1] + e
                if not flat[-1]:
                    del flat[-2:]
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
