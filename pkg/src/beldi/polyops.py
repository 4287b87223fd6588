"""Dense univariate polynomial helpers over an arbitrary coefficient field.

Coefficients can be any Python objects supporting +, -, *, / and ==; the
caller supplies the zero and one of the field.  Polynomials are lists of
coefficients in ascending order with no trailing zeros, so [] is the zero
polynomial.  These routines back the algebraic extension layers (the u
generator over the rational function field, and the curve equation in y),
where sympy's own domain towers are either unavailable or too rigid.
"""

from .errors import InternalError


def trim(cs, zero):
    n = len(cs)
    while n and cs[n - 1] == zero:
        n -= 1
    return list(cs[:n])


def add(f, g, zero):
    if len(f) < len(g):
        f, g = g, f
    out = list(f)
    for i, c in enumerate(g):
        out[i] = out[i] + c
    return trim(out, zero)


def neg(f):
    return [-c for c in f]


def sub(f, g, zero):
    return add(f, neg(g), zero)


def mul(f, g, zero):
    if not f or not g:
        return []
    out = [zero] * (len(f) + len(g) - 1)
    for i, a in enumerate(f):
        if a == zero:
            continue
        for j, b in enumerate(g):
            out[i + j] = out[i + j] + a * b
    return trim(out, zero)


def scale(f, c, zero):
    if c == zero:
        return []
    return trim([a * c for a in f], zero)


def divmod_poly(f, g, zero):
    """Quotient and remainder of f by g; g must be nonzero."""
    g = trim(g, zero)
    if not g:
        raise InternalError("polynomial division by zero")
    f = trim(f, zero)
    dg = len(g) - 1
    lead = g[-1]
    q = [zero] * max(0, len(f) - dg)
    while len(f) - 1 >= dg and f:
        df = len(f) - 1
        c = f[-1] / lead
        q[df - dg] = c
        for i in range(dg + 1):
            f[df - dg + i] = f[df - dg + i] - c * g[i]
        f = trim(f, zero)
        if len(f) - 1 >= df and f:
            raise InternalError("division failed to reduce degree")
    return trim(q, zero), f


def rem(f, g, zero):
    return divmod_poly(f, g, zero)[1]


def ext_euclid(f, g, zero, one):
    """Return (d, s, t) with s*f + t*g = d = gcd(f, g), d monic."""
    r0, r1 = trim(f, zero), trim(g, zero)
    s0, s1 = [one], []
    t0, t1 = [], [one]
    while r1:
        q, r = divmod_poly(r0, r1, zero)
        r0, r1 = r1, r
        s0, s1 = s1, sub(s0, mul(q, s1, zero), zero)
        t0, t1 = t1, sub(t0, mul(q, t1, zero), zero)
    if not r0:
        return [], s0, t0
    lc = r0[-1]
    inv = one / lc
    return scale(r0, inv, zero), scale(s0, inv, zero), scale(t0, inv, zero)


def invert_mod(f, modulus, zero, one):
    """Inverse of f modulo a monic polynomial, or None if not coprime."""
    d, s, _ = ext_euclid(f, modulus, zero, one)
    if len(d) != 1:
        return None
    return rem(s, modulus, zero)


def eval_poly(f, x, zero):
    out = zero
    for c in reversed(f):
        out = out * x + c
    return out
