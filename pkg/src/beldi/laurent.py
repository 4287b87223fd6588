"""Truncated Laurent series with exact coefficients.

A series knows its coefficients for exponents ``lead <= k < prec`` and
guarantees that every exponent below ``lead`` has coefficient exactly
zero.  Everything at ``prec`` and above is unknown (the O(s^prec) tail).
Coefficients live in a FieldTower, so the same code serves the generic
fields and their specializations.
"""

from .errors import InternalError


class Series:
    """Laurent series sum_{k>=lead} c_k s^k + O(s^prec)."""

    __slots__ = ("tower", "lead", "coeffs", "prec")

    def __init__(self, tower, lead, coeffs):
        self.tower = tower
        self.lead = lead
        self.coeffs = tuple(coeffs)
        self.prec = lead + len(self.coeffs)

    # -- constructors ---------------------------------------------------

    @classmethod
    def zero(cls, tower, prec):
        """The zero series, known to vanish below s^prec."""
        return cls(tower, prec, ())

    @classmethod
    def const(cls, tower, value, prec):
        if prec <= 0:
            return cls.zero(tower, prec)
        zero = tower.zero
        return cls(tower, 0, (value,) + (zero,) * (prec - 1))

    @classmethod
    def monomial(cls, tower, value, exp, prec):
        if prec <= exp:
            return cls.zero(tower, prec)
        zero = tower.zero
        return cls(tower, exp, (value,) + (zero,) * (prec - exp - 1))

    # -- inspection -----------------------------------------------------

    def coeff(self, k):
        """Coefficient of s^k.  Exact zero below lead, error at/above prec."""
        if k >= self.prec:
            raise InternalError(
                "coefficient s^%d requested beyond precision O(s^%d)" % (k, self.prec))
        if k < self.lead:
            return self.tower.zero
        return self.coeffs[k - self.lead]

    def valuation(self):
        """Order of vanishing, or None if zero to working precision."""
        for i, c in enumerate(self.coeffs):
            if c:
                return self.lead + i
        return None

    def is_zero_to_prec(self):
        return self.valuation() is None

    def __str__(self):
        parts = []
        for i, c in enumerate(self.coeffs):
            if c:
                parts.append("(%s)*s^%d" % (c, self.lead + i))
        body = " + ".join(parts) if parts else "0"
        return body + " + O(s^%d)" % self.prec

    # -- arithmetic -----------------------------------------------------

    def _trimmed(self):
        """Equivalent series with lead at the first nonzero coefficient."""
        for i, c in enumerate(self.coeffs):
            if c:
                if i == 0:
                    return self
                return Series(self.tower, self.lead + i, self.coeffs[i:])
        return Series.zero(self.tower, self.prec)

    def __neg__(self):
        return Series(self.tower, self.lead, tuple(-c for c in self.coeffs))

    def __add__(self, other):
        if not isinstance(other, Series):
            return NotImplemented
        prec = min(self.prec, other.prec)
        lead = min(self.lead, other.lead)
        if lead >= prec:
            return Series.zero(self.tower, prec)
        out = []
        for k in range(lead, prec):
            a = self.coeffs[k - self.lead] if self.lead <= k < self.prec else None
            b = other.coeffs[k - other.lead] if other.lead <= k < other.prec else None
            if a is None:
                out.append(b if b is not None else self.tower.zero)
            elif b is None:
                out.append(a)
            else:
                out.append(a + b)
        return Series(self.tower, lead, out)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if not isinstance(other, Series):
            return NotImplemented
        lead = self.lead + other.lead
        prec = min(self.prec + other.lead, other.prec + self.lead)
        if lead >= prec:
            return Series.zero(self.tower, prec)
        n = prec - lead
        zero = self.tower.zero
        out = [zero] * n
        for i, a in enumerate(self.coeffs):
            if not a:
                continue
            jmax = min(len(other.coeffs), n - i)
            for j in range(jmax):
                b = other.coeffs[j]
                if b:
                    out[i + j] = out[i + j] + a * b
        return Series(self.tower, lead, out)

    def scale(self, elem):
        return Series(self.tower, self.lead, tuple(c * elem for c in self.coeffs))

    def shift(self, k):
        """Multiply by s^k."""
        return Series(self.tower, self.lead + k, self.coeffs)

    def truncate(self, prec):
        if prec >= self.prec:
            return self
        if prec <= self.lead:
            return Series.zero(self.tower, prec)
        return Series(self.tower, self.lead, self.coeffs[: prec - self.lead])

    def inverse(self):
        s = self._trimmed()
        if not s.coeffs:
            raise InternalError("cannot invert a series that is zero to precision")
        c0 = s.coeffs[0]
        n = len(s.coeffs)
        inv0 = self.tower.one / c0
        out = [inv0]
        for k in range(1, n):
            acc = self.tower.zero
            for i in range(1, k + 1):
                ci = s.coeffs[i]
                if ci:
                    acc = acc + ci * out[k - i]
            out.append(-inv0 * acc)
        # val(1/f) = -val(f); the known window has the same width.
        return Series(self.tower, -s.lead, out)

    def __pow__(self, n):
        if n < 0:
            return self.inverse() ** (-n)
        # Width of the known window shrinks to the minimum across factors,
        # which for powers of one series is just the original width.
        width = self.prec - self.lead
        result = Series.monomial(self.tower, self.tower.one, 0, width)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def nth_root_of_unit(self, n):
        """The unique n-th root with constant term 1.

        Requires lead == 0 and constant coefficient 1.  Newton iteration
        on W^n = self, doubling precision each round.
        """
        s = self._trimmed()
        if s.lead != 0 or not s.coeffs or s.coeffs[0] != 1:
            raise InternalError("n-th root needs a unit series with constant term 1")
        target = s.prec
        tower = self.tower
        ninv = tower.one / tower.from_fraction(n)
        w = Series.const(tower, tower.one, 1)
        while w.prec < target:
            p2 = min(2 * w.prec, target)
            wl = Series(tower, w.lead, w.coeffs + (tower.zero,) * (p2 - w.prec))
            a = s.truncate(p2)
            err = wl ** n - a
            upd = err * (wl ** (n - 1)).inverse()
            w = (wl - upd.scale(ninv)).truncate(p2)
        return w


# ---------------------------------------------------------------------------
# helpers used by local expansion


def poly_at_series(coeffs, s, prec):
    """Evaluate a polynomial (ascending coefficient list over the tower)
    at the series s, by Horner.  Result truncated to prec."""
    tower = s.tower
    acc = None
    for c in reversed(coeffs):
        if acc is None:
            # skip top zeros so the window is not capped by a fake tail
            if c:
                acc = Series.const(tower, c, prec)
            continue
        acc = acc * s
        if c:
            acc = acc + Series.const(tower, c, prec)
        acc = acc.truncate(prec)
    if acc is None:
        return Series.zero(tower, prec)
    return acc
