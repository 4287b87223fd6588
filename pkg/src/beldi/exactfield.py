"""Exact arithmetic in a tower K = F(t_1, ..., t_k)(u).

F is a number field Q(alpha) given by the minimal polynomial of alpha,
the t_i are independent transcendentals, and u is an optional algebraic
generator with a monic minimal polynomial g(u) over F(t).  Elements are
stored as vectors of canonically normalized rational functions indexed
by powers of u, so equality of values is equality of representations.

The module also provides exact reduced row echelon form over K and the
rationality test for subspaces (all entries of the canonical basis free
of the transcendentals), which later modules use to decide whether flag
data is defined over F.
"""

import itertools
from fractions import Fraction

import sympy as sp
from sympy import QQ, Symbol
from sympy.polys.fields import FracField

from . import polyops, stats
from .errors import InputError, InternalError

DEGREE_CAP = 12
_RESERVED = {"x", "y", "u", "alpha"}

_XSYM = Symbol("x")
_USYM = Symbol("u")
# private variable for root-finding, distinct from the x inside CRootOf
_ZSYM = Symbol("zroot_")


# ---------------------------------------------------------------------------
# tower construction


class FieldTower:
    """A validated coefficient field K = F(t_1,...,t_k)(u).

    Every FieldElem holds a reference to the tower it belongs to, and
    elements of distinct tower objects never compare equal.  Build one
    tower per computation and share it.
    """

    def __init__(self, base_min_poly, transcendentals=(), algebraic_ext=None,
                 _reserved_ok=frozenset()):
        poly = _coerce_base_poly(base_min_poly)
        if poly.degree() < 1:
            raise InputError("base minimal polynomial must have degree >= 1")
        if poly.degree() > DEGREE_CAP:
            raise InputError(
                "base field degree %d exceeds the supported bound %d"
                % (poly.degree(), DEGREE_CAP))
        poly = poly.monic()
        if poly.degree() > 1 and not poly.is_irreducible:
            raise InputError("base minimal polynomial is reducible over Q: %s"
                             % poly.as_expr())
        self.base_min_poly = tuple(Fraction(c.p, c.q) for c in reversed(poly.all_coeffs()))
        self.base_degree = poly.degree()
        if self.base_degree == 1:
            # degree-1 base means F = Q; alpha names the rational root
            self.base_dom = QQ
            self._alpha_root = -poly.all_coeffs()[1]
            self.alpha_const = QQ.from_sympy(self._alpha_root)
        else:
            self._alpha_root = sp.CRootOf(poly, 0)
            self.base_dom = QQ.algebraic_field(self._alpha_root)
            self.alpha_const = self.base_dom([1, 0])

        seen = set()
        for name in transcendentals:
            if not isinstance(name, str) or not name.isidentifier():
                raise InputError("bad transcendental name: %r" % (name,))
            if name in _RESERVED and name not in _reserved_ok:
                raise InputError("transcendental name %r is reserved" % name)
            if name in seen:
                raise InputError("duplicate transcendental name %r" % name)
            seen.add(name)
        self.transcendentals = tuple(transcendentals)
        self.kfield = FracField([Symbol(n) for n in self.transcendentals],
                                self.base_dom)

        self.ext_deg = 1
        self.ext_coeffs = None
        self.ext_string = None
        self._upow_table = ()
        if algebraic_ext is not None:
            coeffs = self._parse_ext_poly(algebraic_ext)
            self._attach_ext(coeffs)

        self._zeta_cache = {}
        self._xfield = None

    # -- extension handling

    def _parse_ext_poly(self, source):
        if isinstance(source, str):
            expr = _to_sympy_expr(source)
        elif isinstance(source, sp.Expr):
            expr = source
        else:
            raise InputError("algebraic extension must be a string or sympy "
                             "expression, got %r" % (source,))
        ulist = _ExtParser(self).walk(expr)
        return [self._norm(c) for c in ulist]

    def _attach_ext(self, coeffs):
        """Install g(u) given as ascending FracElement coefficients."""
        coeffs = [self._norm(c) for c in coeffs]
        coeffs = polyops.trim(coeffs, self.kfield.zero)
        d = len(coeffs) - 1
        if d < 2:
            raise InputError("algebraic extension must have degree >= 2 in u")
        if d > DEGREE_CAP:
            raise InputError("extension degree %d exceeds the supported bound %d"
                             % (d, DEGREE_CAP))
        if coeffs[-1] != self.kfield.one:
            raise InputError("extension polynomial must be monic in u")
        self._check_ext_irreducible(coeffs)
        self.ext_deg = d
        self.ext_coeffs = tuple(coeffs[:-1])
        # reduction table: vector of u^(d+j) for j = 0..d-2
        table = []
        zero = self.kfield.zero
        cur = [-c for c in coeffs[:-1]]
        table.append(list(cur))
        for _ in range(d - 2):
            shifted = [zero] + cur[:-1]
            top = cur[-1]
            if top:
                for i in range(d):
                    shifted[i] = shifted[i] - top * coeffs[i]
            cur = [self._norm(c) for c in shifted]
            table.append(list(cur))
        self._upow_table = tuple(tuple(row) for row in table)
        self.ext_string = self._emit_ext_string()

    def _emit_ext_string(self):
        terms = ["u^%d" % self.ext_deg if self.ext_deg > 1 else "u"]
        for k in range(self.ext_deg - 1, -1, -1):
            c = self.ext_coeffs[k]
            if not c:
                continue
            cs = _emit_frac(self, c)
            if k == 0:
                terms.append("(%s)" % cs)
            elif k == 1:
                terms.append("(%s)*u" % cs)
            else:
                terms.append("(%s)*u^%d" % (cs, k))
        return " + ".join(terms)

    def _check_ext_irreducible(self, coeffs):
        """g must be irreducible over F(t).

        Fast path: if g specialized at some integer point of the t-space
        stays irreducible over F (degree preserved), then g itself is
        irreducible, since any factorization would specialize.  Only when
        every sampled point is inconclusive do we clear denominators and
        factor the bivariate polynomial over F directly.
        """
        if self.transcendentals:
            gens = self.kfield.ring.gens
            for base in (2, 3, 5, 7, 11):
                vals = [(g, self.base_dom(base + 3 * i)) for i, g in enumerate(gens)]
                spec = []
                ok = True
                for c in coeffs:
                    den = c.denom.evaluate(vals) if len(gens) else c.denom.LC
                    if not den:
                        ok = False
                        break
                    num = c.numer.evaluate(vals) if len(gens) else (
                        c.numer.LC if c.numer else self.base_dom.zero)
                    spec.append(num / den)
                if ok and self.base_poly_irreducible(spec):
                    return
        usym = _USYM
        tsyms = [Symbol(n) for n in self.transcendentals]
        num = sp.Integer(0)
        for k, c in enumerate(coeffs):
            if not c:
                continue
            ck = _polyelem_to_expr(self, c.numer) / _polyelem_to_expr(self, c.denom)
            num = num + ck * usym ** k
        cleared = sp.fraction(sp.together(num))[0]
        gens = [usym] + tsyms
        if self.base_degree == 1:
            factors = sp.factor_list(cleared, *gens)
        else:
            factors = sp.factor_list(cleared, *gens, extension=self._alpha_root)
        upositive = [(f, m) for f, m in factors[1] if sp.degree(f, usym) > 0]
        if len(upositive) != 1 or upositive[0][1] != 1:
            raise InputError("extension polynomial is reducible over F(t)")
        if sp.degree(upositive[0][0], usym) != len(coeffs) - 1:
            raise InternalError("degree loss while checking the extension polynomial")

    # -- lazily built fraction field with the extra curve coordinate x

    @property
    def xfield(self):
        if self._xfield is None:
            syms = [Symbol(n) for n in self.transcendentals] + [Symbol("x")]
            self._xfield = FracField(syms, self.base_dom)
        return self._xfield

    # -- normalization

    def _norm(self, fe):
        """Canonical form of a FracElement: reduced with monic denominator."""
        if not fe.numer:
            return self.kfield.zero if fe.field is self.kfield else fe.field.zero
        lc = fe.denom.LC
        if lc == self.base_dom.one:
            return fe
        inv = self.base_dom.one / lc
        return fe.field.raw_new(fe.numer.mul_ground(inv), fe.denom.mul_ground(inv))

    # -- element constructors

    def _make(self, vec):
        return FieldElem(self, tuple(vec))

    def _const_vec(self, fe):
        pad = [self.kfield.zero] * (self.ext_deg - 1)
        return (self._norm(fe),) + tuple(pad)

    @property
    def zero(self):
        return self._make(self._const_vec(self.kfield.zero))

    @property
    def one(self):
        return self._make(self._const_vec(self.kfield.one))

    def from_fraction(self, q):
        q = Fraction(q)
        c = self.base_dom(q.numerator) / self.base_dom(q.denominator)
        return self.from_base_const(c)

    def from_base_const(self, c):
        return self._make(self._const_vec(self.kfield.ground_new(c)))

    def from_frac(self, fe):
        return self._make(self._const_vec(fe))

    def alpha(self):
        return self.from_base_const(self.alpha_const)

    def gen(self, name):
        if name not in self.transcendentals:
            raise InputError("unknown transcendental %r" % name)
        idx = self.transcendentals.index(name)
        return self.from_frac(self.kfield.gens[idx])

    def u(self):
        if self.ext_deg == 1:
            raise InputError("tower has no algebraic generator u")
        vec = [self.kfield.zero] * self.ext_deg
        vec[1] = self.kfield.one
        return self._make(vec)

    def parse(self, s):
        expr = _to_sympy_expr(s)
        return _ElemParser(self).walk(expr)

    # -- reduction of u-polynomials of length > ext_deg

    def _ureduce(self, cs):
        d = self.ext_deg
        zero = self.kfield.zero
        out = list(cs[:d]) + [zero] * max(0, d - len(cs))
        for k in range(d, len(cs)):
            c = cs[k]
            if not c:
                continue
            for i, tc in enumerate(self._upow_table[k - d]):
                if tc:
                    out[i] = out[i] + c * tc
        return tuple(self._norm(c) for c in out)

    # -- roots of polynomials over the base field

    def base_roots(self, coeffs):
        """The set of roots in F of a polynomial with base-constant
        coefficients (ascending), in a deterministic order.  Multiplicities
        are dropped."""
        coeffs = list(coeffs)
        while coeffs and not coeffs[-1]:
            coeffs.pop()
        if len(coeffs) <= 1:
            raise InputError("constant polynomial has no well-defined roots")
        if self.base_degree == 1:
            expr = sp.Integer(0)
            for k, c in enumerate(coeffs):
                expr += self.base_dom.to_sympy(c) * _ZSYM ** k
            factors = sp.factor_list(expr, _ZSYM)
            roots = []
            for f, _m in factors[1]:
                if sp.degree(f, _ZSYM) != 1:
                    continue
                f = sp.expand(f)
                c1 = self.base_dom.from_sympy(f.coeff(_ZSYM, 1))
                c0 = self.base_dom.from_sympy(f.coeff(_ZSYM, 0))
                roots.append(-c0 / c1)
        else:
            roots = _norm_based_linear_factors(self, coeffs)
        roots.sort(key=lambda r: _const_key(self, r))
        return roots

    def base_poly_irreducible(self, coeffs):
        """Irreducibility over F of a polynomial with base-constant
        coefficients, degree >= 1."""
        coeffs = list(coeffs)
        while coeffs and not coeffs[-1]:
            coeffs.pop()
        deg = len(coeffs) - 1
        if deg < 1:
            raise InputError("constant polynomial is neither reducible nor not")
        if deg == 1:
            return True
        if self.base_degree == 1:
            expr = sp.Integer(0)
            for k, c in enumerate(coeffs):
                expr += self.base_dom.to_sympy(c) * _ZSYM ** k
            return sp.Poly(expr, _ZSYM, domain="QQ").is_irreducible
        dom = self.base_dom
        lead = coeffs[-1]
        monic = [c / lead for c in coeffs]
        deriv = [monic[k] * dom(k) for k in range(1, len(monic))]
        if len(_dom_poly_gcd(dom, monic, deriv)) > 1:
            return False
        norm, _s = _squarefree_norm(self, monic)
        return norm.is_irreducible

    def zeta(self, n):
        """A primitive n-th root of unity in F, or InputError if absent."""
        if n in self._zeta_cache:
            return self._zeta_cache[n]
        if n == 1:
            val = self.one
        elif n == 2:
            val = self.from_fraction(-1)
        else:
            poly = sp.Poly(sp.cyclotomic_poly(n, _XSYM), _XSYM)
            coeffs = [self.base_dom(int(c)) for c in reversed(poly.all_coeffs())]
            roots = self.base_roots(coeffs)
            if not roots:
                raise InputError(
                    "the base field does not contain a primitive %d-th root of "
                    "unity; enlarge F" % n)
            val = self.from_base_const(roots[0])
        self._zeta_cache[n] = val
        return val

    def __repr__(self):
        bits = ["Q" if self.base_degree == 1 else "Q(alpha)"]
        if self.transcendentals:
            bits.append("(%s)" % ",".join(self.transcendentals))
        if self.ext_deg > 1:
            bits.append("(u)")
        return "FieldTower<%s>" % "".join(bits)


def tower_build(base_min_poly, transcendentals=(), algebraic_ext=None):
    """Public constructor; see FieldTower."""
    return FieldTower(base_min_poly, transcendentals, algebraic_ext)


# ---------------------------------------------------------------------------
# norm-based factoring helpers over F = Q(alpha)
#
# sympy's factor_list over algebraic extension fields gets very slow beyond
# tiny field degrees, so root finding and irreducibility over F go through
# the classical norm construction: N(x) = Res_z(m(z), p(x - s z)) lands in
# Q[x], where factoring is cheap, and gcds over F recover the factors.

_WSYM = Symbol("wroot_")


def _dom_poly_gcd(dom, f, g):
    """Monic gcd of two polynomials with dom coefficients (ascending lists)."""
    zero = dom.zero
    a = polyops.trim(list(f), zero)
    b = polyops.trim(list(g), zero)
    while b:
        a, b = b, polyops.rem(a, b, zero)
    if a:
        lead = a[-1]
        if lead != dom.one:
            a = [c / lead for c in a]
    return a


def _anp_desc_rep(c):
    rep = c.to_list() if hasattr(c, "to_list") else list(c.rep)
    return rep


def _squarefree_norm(tower, monic):
    """For squarefree monic p over F, find s with Norm(p(x - s*alpha))
    squarefree; returns (norm as a sympy Poly over Q, s)."""
    m_expr = sp.Integer(0)
    for k, q in enumerate(tower.base_min_poly):
        m_expr += sp.Rational(q) * _ZSYM ** k
    for s in range(0, 30):
        shifted = sp.Integer(0)
        for k, c in enumerate(monic):
            ck = sp.Integer(0)
            for v in _anp_desc_rep(c):
                ck = ck * _ZSYM + sp.Rational(int(v.numerator), int(v.denominator))
            shifted += ck * (_WSYM - s * _ZSYM) ** k
        norm = sp.Poly(sp.resultant(m_expr, sp.expand(shifted), _ZSYM),
                       _WSYM, domain="QQ")
        if sp.gcd(norm, norm.diff(_WSYM)).degree() == 0:
            return norm, s
    raise InternalError("no squarefree norm found; input was not squarefree")


def _shift_poly(dom, coeffs, shift):
    """Coefficients of p(x + shift) from those of p (ascending, over dom)."""
    zero = dom.zero
    out = []
    for c in reversed(coeffs):
        out = polyops.mul(out, [shift, dom.one], zero)
        out = polyops.add(out, [c], zero)
    return out


def _norm_based_linear_factors(tower, coeffs):
    """Roots in F of a polynomial with dom coefficients (Trager's method)."""
    dom = tower.base_dom
    lead = coeffs[-1]
    monic = coeffs if lead == dom.one else [c / lead for c in coeffs]
    deriv = [monic[k] * dom(k) for k in range(1, len(monic))]
    common = _dom_poly_gcd(dom, monic, deriv)
    if len(common) > 1:
        monic, rem = polyops.divmod_poly(monic, common, dom.zero)
        if rem:
            raise InternalError("squarefree reduction failed")
    norm, s = _squarefree_norm(tower, monic)
    alpha = tower.alpha_const
    roots = []
    for f, _mult in norm.factor_list()[1]:
        fc = [dom(c.p) / dom(c.q) for c in reversed(f.all_coeffs())]
        shifted = _shift_poly(dom, fc, dom(s) * alpha)
        g = _dom_poly_gcd(dom, monic, shifted)
        if len(g) == 2:
            roots.append(-g[0])
    return roots


def _coerce_base_poly(source):
    if isinstance(source, sp.Poly):
        return sp.Poly(source.as_expr(), _XSYM, domain="QQ")
    if isinstance(source, str):
        return sp.Poly(_to_sympy_expr(source), _XSYM, domain="QQ")
    if isinstance(source, (list, tuple)):
        expr = sum(sp.Rational(Fraction(c)) * _XSYM ** k for k, c in enumerate(source))
        return sp.Poly(expr, _XSYM, domain="QQ")
    if isinstance(source, sp.Expr):
        return sp.Poly(source, _XSYM, domain="QQ")
    raise InputError("cannot interpret base minimal polynomial: %r" % (source,))


def _to_sympy_expr(s):
    try:
        return sp.sympify(s.replace("^", "**"), rational=True)
    except (sp.SympifyError, SyntaxError, TypeError) as exc:
        raise InputError("cannot parse expression %r: %s" % (s, exc))


# ---------------------------------------------------------------------------
# elements


class FieldElem:
    """An element of a FieldTower, canonically represented."""

    __slots__ = ("tower", "vec")

    def __init__(self, tower, vec):
        self.tower = tower
        self.vec = vec

    def _coerce(self, other):
        if isinstance(other, FieldElem):
            if other.tower is not self.tower:
                raise InputError("cannot mix elements of different towers")
            return other
        if isinstance(other, (int, Fraction)):
            return self.tower.from_fraction(other)
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        t = self.tower
        return t._make(tuple(t._norm(a + b) for a, b in zip(self.vec, o.vec)))

    __radd__ = __add__

    def __neg__(self):
        return self.tower._make(tuple(-a for a in self.vec))

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o + (-self)

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        t = self.tower
        if t.ext_deg == 1:
            return t._make((t._norm(self.vec[0] * o.vec[0]),))
        raw = polyops.mul(list(self.vec), list(o.vec), t.kfield.zero)
        return t._make(t._ureduce(raw))

    __rmul__ = __mul__

    def inverse(self):
        t = self.tower
        if not self:
            raise ZeroDivisionError("division by zero in the coefficient tower")
        if t.ext_deg == 1:
            return t._make((t._norm(self.vec[0] ** -1),))
        modulus = list(t.ext_coeffs) + [t.kfield.one]
        inv = polyops.invert_mod(polyops.trim(list(self.vec), t.kfield.zero),
                                 modulus, t.kfield.zero, t.kfield.one)
        if inv is None:
            raise InternalError("nonzero element not invertible; extension "
                                "polynomial cannot be irreducible")
        return t._make(t._ureduce(inv))

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self * o.inverse()

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o * self.inverse()

    def __pow__(self, n):
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            return self.inverse() ** (-n)
        out = self.tower.one
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base if n > 1 else base
            n >>= 1
        return out

    def __bool__(self):
        return any(bool(c) for c in self.vec)

    def __eq__(self, other):
        if isinstance(other, FieldElem):
            if other.tower is not self.tower:
                return False
            return self.vec == other.vec
        if isinstance(other, (int, Fraction)):
            return self == self.tower.from_fraction(other)
        return NotImplemented

    def __hash__(self):
        return hash(self.vec)

    def is_algebraic(self):
        """True iff the canonical form lies in the base number field F."""
        for c in self.vec[1:]:
            if c:
                return False
        c0 = self.vec[0]
        return c0.numer.is_ground and c0.denom.is_ground

    def as_base_const(self):
        if not self.is_algebraic():
            raise InputError("element does not lie in the base field: %s" % self)
        c0 = self.vec[0]
        if not c0.numer:
            return self.tower.base_dom.zero
        return c0.numer.LC / c0.denom.LC

    def as_fraction(self):
        c = self.as_base_const()
        if self.tower.base_degree == 1:
            return Fraction(int(c.numerator), int(c.denominator))
        rep = c.to_list() if hasattr(c, "to_list") else list(c.rep)
        if len(rep) > 1:
            raise InputError("element is irrational: %s" % self)
        val = rep[0] if rep else 0
        return Fraction(int(val.numerator), int(val.denominator))

    def __str__(self):
        return emit(self)

    def __repr__(self):
        return "FieldElem(%s)" % emit(self)


def is_algebraic(e):
    return e.is_algebraic()


# ---------------------------------------------------------------------------
# parsing

class _WalkBase:
    """Shared recursion over sympy expression trees for the string grammar:
    integers, fractions, alpha, the transcendentals, u, + - * / ^."""

    def walk(self, expr):
        if isinstance(expr, sp.Integer):
            return self.const(Fraction(int(expr)))
        if isinstance(expr, sp.Rational):
            return self.const(Fraction(int(expr.p), int(expr.q)))
        if isinstance(expr, sp.Symbol):
            return self.symbol(expr.name)
        if isinstance(expr, sp.Add):
            out = self.walk(expr.args[0])
            for a in expr.args[1:]:
                out = self.add(out, self.walk(a))
            return out
        if isinstance(expr, sp.Mul):
            out = self.walk(expr.args[0])
            for a in expr.args[1:]:
                out = self.mul(out, self.walk(a))
            return out
        if isinstance(expr, sp.Pow):
            base, exp = expr.args
            if not (isinstance(exp, sp.Integer)):
                raise InputError("only integer exponents are supported: %s" % expr)
            return self.power(self.walk(base), int(exp))
        raise InputError("unsupported syntax in expression: %r" % (expr,))


class _ElemParser(_WalkBase):
    def __init__(self, tower):
        self.tower = tower

    def const(self, q):
        return self.tower.from_fraction(q)

    def symbol(self, name):
        t = self.tower
        if name == "alpha":
            return t.alpha()
        if name == "u":
            return t.u()
        if name in t.transcendentals:
            return t.gen(name)
        raise InputError("unknown symbol %r in expression" % name)

    def add(self, a, b):
        return a + b

    def mul(self, a, b):
        return a * b

    def power(self, a, n):
        return a ** n


class _ExtParser(_WalkBase):
    """Parses the extension polynomial before u-arithmetic exists; values
    are u-polynomials as ascending FracElement lists."""

    def __init__(self, tower):
        self.tower = tower
        self.zero = tower.kfield.zero

    def const(self, q):
        c = self.tower.base_dom(q.numerator) / self.tower.base_dom(q.denominator)
        return [self.tower.kfield.ground_new(c)]

    def symbol(self, name):
        t = self.tower
        if name == "alpha":
            return [t.kfield.ground_new(t.alpha_const)]
        if name == "u":
            return [self.zero, t.kfield.one]
        if name in t.transcendentals:
            return [t.kfield.gens[t.transcendentals.index(name)]]
        raise InputError("unknown symbol %r in extension polynomial" % name)

    def add(self, a, b):
        return polyops.add(a, b, self.zero)

    def mul(self, a, b):
        return polyops.mul(a, b, self.zero)

    def power(self, a, n):
        if n < 0:
            if len(a) > 1:
                raise InputError("cannot divide by u inside the extension polynomial")
            if not a or not a[0]:
                raise ZeroDivisionError("division by zero in extension polynomial")
            return [a[0] ** n]
        out = [self.tower.kfield.one]
        for _ in range(n):
            out = polyops.mul(out, a, self.zero)
        return out


# ---------------------------------------------------------------------------
# emission of canonical strings


def _const_key(tower, c):
    """Deterministic sort key for base-field constants."""
    if tower.base_degree == 1:
        return (Fraction(int(c.numerator), int(c.denominator)),)
    rep = c.to_list() if hasattr(c, "to_list") else list(c.rep)
    rep = [Fraction(int(v.numerator), int(v.denominator)) for v in rep]
    rep = [Fraction(0)] * (tower.base_degree - len(rep)) + rep
    return tuple(rep)


def _emit_base_const(tower, c):
    if tower.base_degree == 1:
        f = Fraction(int(c.numerator), int(c.denominator))
        return _emit_fraction(f), True
    rep = c.to_list() if hasattr(c, "to_list") else list(c.rep)
    rep = [Fraction(int(v.numerator), int(v.denominator)) for v in rep]
    # rep is descending in powers of alpha
    deg = len(rep) - 1
    parts = []
    for i, v in enumerate(rep):
        if v == 0:
            continue
        power = deg - i
        if power == 0:
            parts.append(_emit_fraction(v))
        else:
            head = "alpha" if power == 1 else "alpha^%d" % power
            if v == 1:
                parts.append(head)
            elif v == -1:
                parts.append("-" + head)
            else:
                parts.append("%s*%s" % (_emit_fraction(v), head))
    if not parts:
        return "0", True
    s = parts[0]
    for p in parts[1:]:
        s += " - " + p[1:] if p.startswith("-") else " + " + p
    simple = len(parts) == 1 and not s.startswith("-")
    return s, simple


def _emit_fraction(f):
    return str(f.numerator) if f.denominator == 1 else "%d/%d" % (f.numerator, f.denominator)


def _emit_polyelem(tower, p):
    """Canonical string for a PolyElement over the base domain."""
    if not p:
        return "0", True
    ring = p.ring
    names = [str(g) for g in ring.symbols]
    parts = []
    for monom, coeff in p.terms():
        cs, csimple = _emit_base_const(tower, coeff)
        factors = []
        for name, e in zip(names, monom):
            if e == 0:
                continue
            factors.append(name if e == 1 else "%s^%d" % (name, e))
        if not factors:
            parts.append(cs if csimple else "(%s)" % cs)
            continue
        body = "*".join(factors)
        if cs == "1":
            parts.append(body)
        elif cs == "-1":
            parts.append("-" + body)
        elif csimple:
            parts.append("%s*%s" % (cs, body))
        else:
            parts.append("(%s)*%s" % (cs, body))
    s = parts[0]
    for q in parts[1:]:
        s += " - " + q[1:] if q.startswith("-") else " + " + q
    return s, len(parts) == 1 and not s.startswith("-")


def _polyelem_to_expr(tower, p):
    out = sp.Integer(0)
    syms = list(p.ring.symbols)
    for monom, coeff in p.terms():
        term = tower.base_dom.to_sympy(coeff)
        for s, e in zip(syms, monom):
            if e:
                term *= s ** e
        out += term
    return out


def _emit_frac(tower, fe):
    ns, nsimple = _emit_polyelem(tower, fe.numer)
    if fe.denom == fe.field.ring.one:
        return ns
    ds, dsimple = _emit_polyelem(tower, fe.denom)
    left = ns if nsimple else "(%s)" % ns
    right = ds if (dsimple and "*" not in ds and "^" not in ds) else "(%s)" % ds
    return "%s/%s" % (left, right)


def emit(e):
    """Canonical string form of a FieldElem; parse(emit(e)) == e."""
    t = e.tower
    parts = []
    for k, c in enumerate(e.vec):
        if not c:
            continue
        cs = _emit_frac(t, c)
        if k == 0:
            parts.append(cs)
        else:
            upart = "u" if k == 1 else "u^%d" % k
            if cs == "1":
                parts.append(upart)
            elif "+" in cs or " - " in cs or "/" in cs or cs.startswith("-"):
                parts.append("(%s)*%s" % (cs, upart))
            else:
                parts.append("%s*%s" % (cs, upart))
    if not parts:
        return "0"
    s = parts[0]
    for q in parts[1:]:
        s += " + " + q
    return s


# ---------------------------------------------------------------------------
# roots of univariate polynomials over the whole tower


def _elem_from_expr(tower, expr):
    """Rebuild a FieldElem from a sympy expression whose atoms are the
    transcendentals, u, rationals and (possibly) the base root."""
    if tower.base_degree > 1:
        expr = expr.subs(tower._alpha_root, Symbol("alpha"))
    return _ElemParser(tower).walk(expr)


def _fieldelem_to_expr(tower, e, usym):
    out = sp.Integer(0)
    for k, fr in enumerate(e.vec):
        if not fr.numer:
            continue
        piece = _polyelem_to_expr(tower, fr.numer) / _polyelem_to_expr(tower, fr.denom)
        out += piece * usym ** k
    return out


def _zt_factors(tower, expr, zsym):
    """Factor a polynomial expression in zsym and the transcendentals over F.
    Returns (factor, multiplicity) pairs with positive zsym-degree; factors
    come back as sympy expressions."""
    expr = sp.expand(expr)
    gens = (zsym,) + tuple(Symbol(n) for n in tower.transcendentals)
    if tower.base_degree == 1:
        _c, pairs = sp.factor_list(expr, *gens)
    else:
        _c, pairs = sp.factor_list(expr, *gens, extension=tower._alpha_root)
    return [(f, m) for f, m in pairs if sp.degree(f, zsym) >= 1]


def poly_roots_in_tower(tower, coeffs):
    """All roots in the tower of a univariate polynomial with tower
    coefficients (ascending list).  Exact.  Sorted by canonical string.

    Over the rational-function layer this factors directly; across the
    u-extension it runs Trager's trick: shift by multiples of u until the
    resultant with the extension polynomial is squarefree, factor that
    norm downstairs, then recover each root with a gcd upstairs.
    """
    zero = tower.zero
    cs = polyops.trim(list(coeffs), zero)
    if len(cs) <= 1:
        return []
    lead = cs[-1]
    monic = cs if lead == tower.one else [c / lead for c in cs]

    if len(monic) == 2:
        return [-monic[0]]

    deriv = [monic[k] * k for k in range(1, len(monic))]
    common = _dom_poly_gcd(tower, monic, deriv)
    if len(common) > 1:
        monic, sq_rem = polyops.divmod_poly(monic, common, zero)
        if sq_rem:
            raise InternalError("squarefree reduction failed over the tower")

    if not tower.transcendentals and tower.ext_deg == 1:
        found = tower.base_roots([c.as_base_const() for c in monic])
        return sorted((tower.from_base_const(r) for r in found),
                      key=lambda e: emit(e))

    zsym = _ZSYM
    usym = Symbol("uroot_")
    if tower.ext_deg == 1:
        expr = sp.Integer(0)
        for k, c in enumerate(monic):
            expr += _fieldelem_to_expr(tower, c, usym) * zsym ** k
        numer, _den = sp.fraction(sp.together(expr))
        roots = []
        for f, _m in _zt_factors(tower, numer, zsym):
            if sp.degree(f, zsym) != 1:
                continue
            c1 = _elem_from_expr(tower, f.coeff(zsym, 1))
            c0 = _elem_from_expr(tower, f.coeff(zsym, 0))
            roots.append(-c0 / c1)
        return sorted(roots, key=lambda e: emit(e))

    # tower with u: norm down to the rational-function layer
    gexpr = sp.Integer(0)
    for k, c in enumerate(tower.ext_coeffs):
        gexpr += _polyelem_to_expr(tower, c.numer) / _polyelem_to_expr(tower, c.denom) \
            * usym ** k
    gexpr += usym ** tower.ext_deg
    uelem = tower.u()
    for s in range(30):
        shifted = _shift_poly(tower, monic, -uelem * s) if s else monic
        pexpr = sp.Integer(0)
        for k, c in enumerate(shifted):
            pexpr += _fieldelem_to_expr(tower, c, usym) * zsym ** k
        pnum, _pd = sp.fraction(sp.together(pexpr))
        gnum, _gd = sp.fraction(sp.together(gexpr))
        norm = sp.resultant(pnum, gnum, usym)
        pairs = _zt_factors(tower, norm, zsym)
        if any(m > 1 for _f, m in pairs):
            continue
        roots = []
        for f, _m in pairs:
            fpoly = sp.Poly(f, zsym)
            fcs = [_elem_from_expr(tower, c)
                   for c in reversed(fpoly.all_coeffs())]
            flc = fcs[-1]
            if flc != tower.one:
                fcs = [c / flc for c in fcs]
            fshift = _shift_poly(tower, fcs, uelem * s) if s else fcs
            g = _dom_poly_gcd(tower, monic, fshift)
            if len(g) == 2:
                roots.append(-g[0])
        return sorted(roots, key=lambda e: emit(e))
    raise InternalError("root finding: no squarefree norm within shift bound")


# ---------------------------------------------------------------------------
# matrices over K


class Matrix:
    """Row-major rectangular matrix of FieldElem values."""

    __slots__ = ("tower", "rows", "nrows", "ncols")

    def __init__(self, tower, rows, ncols=None):
        self.tower = tower
        coerced = []
        width = ncols
        for row in rows:
            row = [_entry(tower, v) for v in row]
            if width is None:
                width = len(row)
            elif len(row) != width:
                raise InputError("ragged matrix rows")
            coerced.append(tuple(row))
        if width is None:
            raise InputError("matrix with unknown width; pass ncols for empty matrices")
        self.rows = tuple(coerced)
        self.nrows = len(coerced)
        self.ncols = width

    def __eq__(self, other):
        if not isinstance(other, Matrix):
            return NotImplemented
        return self.rows == other.rows and self.ncols == other.ncols

    def __hash__(self):
        return hash((self.rows, self.ncols))

    def __repr__(self):
        body = "; ".join(", ".join(str(v) for v in row) for row in self.rows)
        return "Matrix[%d x %d: %s]" % (self.nrows, self.ncols, body)

    def rref_with_pivots(self):
        stats.bump("rref_calls")
        stats.record_max("rref_max_cells", self.nrows * self.ncols)
        fast = self._base_constant_grid()
        if fast is not None:
            return self._rref_over_base(fast)
        rows = [_clear_row(self.tower, list(r)) for r in self.rows]
        pivots = []
        r = 0
        for col in range(self.ncols):
            if r == self.nrows:
                break
            prow = None
            best = None
            for i in range(r, self.nrows):
                if rows[i][col]:
                    size = _row_weight(rows[i])
                    if best is None or size < best:
                        best = size
                        prow = i
            if prow is None:
                continue
            rows[r], rows[prow] = rows[prow], rows[r]
            inv = rows[r][col].inverse()
            rows[r] = [v * inv for v in rows[r]]
            for i in range(self.nrows):
                if i == r or not rows[i][col]:
                    continue
                f = rows[i][col]
                new_row = [a - f * b for a, b in zip(rows[i], rows[r])]
                # rows not yet used as pivots may be rescaled freely
                rows[i] = new_row if i < r else _clear_row(self.tower, new_row)
            pivots.append(col)
            r += 1
        return Matrix(self.tower, rows, self.ncols), tuple(pivots)

    def rref(self):
        return self.rref_with_pivots()[0]

    def rank(self):
        return len(self.rref_with_pivots()[1])

    def kernel(self):
        """Basis of the right kernel, one vector per free column."""
        R, piv = self.rref_with_pivots()
        pivset = set(piv)
        t = self.tower
        basis = []
        for fc in range(self.ncols):
            if fc in pivset:
                continue
            v = [t.zero] * self.ncols
            v[fc] = t.one
            for i, pc in enumerate(piv):
                v[pc] = -R.rows[i][fc]
            basis.append(v)
        return basis

    # -- fast path for matrices of base-field constants

    def _base_constant_grid(self):
        grid = []
        for row in self.rows:
            out = []
            for v in row:
                if not v.is_algebraic():
                    return None
                out.append(v.as_base_const())
            grid.append(out)
        return grid

    def _rref_over_base(self, grid):
        dom = self.tower.base_dom
        zero = dom.zero
        pivots = []
        r = 0
        for col in range(self.ncols):
            if r == self.nrows:
                break
            prow = None
            for i in range(r, self.nrows):
                if grid[i][col]:
                    prow = i
                    break
            if prow is None:
                continue
            grid[r], grid[prow] = grid[prow], grid[r]
            inv = dom.one / grid[r][col]
            grid[r] = [v * inv for v in grid[r]]
            for i in range(self.nrows):
                if i == r or not grid[i][col]:
                    continue
                f = grid[i][col]
                grid[i] = [a - f * b for a, b in zip(grid[i], grid[r])]
            pivots.append(col)
            r += 1
        t = self.tower
        rows = [[t.from_base_const(v) for v in row] for row in grid]
        return Matrix(t, rows, self.ncols), tuple(pivots)


def _clear_row(tower, row):
    """Scale a row by the least common denominator of its entries.

    Keeps elimination entries polynomial, which avoids most of the
    expensive fraction cancellations over the number field.  Row scaling
    by a nonzero element never changes the row space.
    """
    dens = []
    for e in row:
        for c in e.vec:
            if c and not c.denom.is_ground:
                dens.append(c.denom)
    if not dens:
        return row
    lcd = dens[0]
    for d in dens[1:]:
        g = lcd.gcd(d)
        lcd = lcd * (d.exquo(g) if g != d.ring.one else d)
    scale = tower.from_frac(tower.kfield.raw_new(lcd, tower.kfield.ring.one))
    return [e * scale for e in row]


def _row_weight(row):
    w = 0
    for e in row:
        for c in e.vec:
            if c:
                w += len(c.numer) + len(c.denom)
    return w


def _entry(tower, v):
    if isinstance(v, FieldElem):
        if v.tower is not tower:
            raise InputError("matrix entry from a different tower")
        return v
    if isinstance(v, (int, Fraction)):
        return tower.from_fraction(v)
    raise InputError("bad matrix entry: %r" % (v,))


def rref(m):
    return m.rref()


def subspace_is_rational(basis):
    """True iff the row space of `basis` has a basis defined over F."""
    R = basis.rref()
    return all(v.is_algebraic() for row in R.rows for v in row)


# ---------------------------------------------------------------------------
# enumeration of small elements and base-field extension


def base_integer_iter(tower, radius_cap=None):
    """Deterministic enumeration of F-integers a_0 + a_1 alpha + ... with
    small integer coordinates, ordered by max-norm radius then lexicographically."""
    d = tower.base_degree
    radius = 0
    while radius_cap is None or radius <= radius_cap:
        for coords in itertools.product(range(-radius, radius + 1), repeat=d):
            if radius and max(abs(c) for c in coords) != radius:
                continue
            if tower.base_degree == 1:
                yield tower.from_fraction(coords[0])
            else:
                yield tower.from_base_const(tower.base_dom(list(reversed(coords))))
        radius += 1


def extend_base_with_root(tower, hcoeffs):
    """Build a tower whose base field adjoins a root of h to F.

    hcoeffs: ascending coefficients of h as base-domain constants; h must
    be irreducible over F of degree >= 2.  Returns (new_tower, embed, root)
    with embed mapping FieldElems of the old tower into the new one and
    root a new-tower element with h(root) = 0.
    """
    dom = tower.base_dom
    coeffs = [c for c in hcoeffs]
    while coeffs and not coeffs[-1]:
        coeffs.pop()
    dh = len(coeffs) - 1
    if dh < 2:
        raise InputError("extension polynomial must have degree >= 2")
    lead = coeffs[-1]
    coeffs = [c / lead for c in coeffs]
    total = tower.base_degree * dh
    if total > DEGREE_CAP:
        raise InputError("combined extension degree %d exceeds the supported "
                         "bound %d" % (total, DEGREE_CAP))

    if tower.base_degree == 1:
        base_poly = [Fraction(int(c.numerator), int(c.denominator)) for c in coeffs]
        build_alpha_image = None
    else:
        base_poly, build_alpha_image = _primitive_tower_poly(tower, coeffs)
    new_tower = FieldTower(base_poly, tower.transcendentals, None)
    if build_alpha_image is None:
        def map_const(c):
            return new_tower.base_dom(int(c.numerator)) / new_tower.base_dom(int(c.denominator))
    else:
        alpha_image = build_alpha_image(new_tower)
        if alpha_image is None:
            raise InternalError("no embedding of F into the extension found")
        map_const = _const_mapper(tower, new_tower, alpha_image)
    if tower.ext_deg > 1:
        ext = [_map_fracelem(tower, new_tower, map_const, c) for c in tower.ext_coeffs]
        ext.append(new_tower.kfield.one)
        new_tower._attach_ext(ext)

    embed = _build_embed(tower, new_tower, map_const)
    # locate the promised root of h in the new base field
    new_coeffs = [map_const(c) for c in coeffs]
    roots = new_tower.base_roots(new_coeffs)
    if not roots:
        raise InternalError("extension was built but h has no root in it")
    return new_tower, embed, new_tower.from_base_const(roots[0])


def _const_mapper(old_tower, new_tower, alpha_image):
    def map_const(c):
        rep = c.to_list() if hasattr(c, "to_list") else list(c.rep)
        out = new_tower.base_dom.zero
        for v in rep:
            q = new_tower.base_dom(int(v.numerator)) / new_tower.base_dom(int(v.denominator))
            out = out * alpha_image + q
        return out
    return map_const


def _primitive_tower_poly(old_tower, hcoeffs):
    """Minimal polynomial over Q of gamma = alpha + c*v (v a root of h),
    plus a builder that finds the image of alpha in the new field."""
    zsym = Symbol("z")
    tsym = Symbol("T")
    m_expr = sum(sp.Rational(c) * zsym ** k
                 for k, c in enumerate(old_tower.base_min_poly))
    dh = len(hcoeffs) - 1
    for cmul in range(1, 40):
        h_expr = sp.Integer(0)
        for k, c in enumerate(hcoeffs):
            rep = c.to_list() if hasattr(c, "to_list") else list(c.rep)
            ck = sp.Integer(0)
            for v in rep:
                ck = ck * zsym + sp.Rational(int(v.numerator), int(v.denominator))
            h_expr += ck * (tsym - zsym) ** k * sp.Integer(cmul) ** (dh - k)
        big = sp.resultant(m_expr, sp.expand(h_expr), zsym)
        poly = sp.Poly(big, tsym, domain="QQ")
        if poly.degree() != old_tower.base_degree * dh:
            continue
        if sp.gcd(poly, poly.diff(tsym)).degree() > 0:
            continue
        if not poly.is_irreducible:
            continue
        base_poly = [Fraction(c.p, c.q) for c in reversed(poly.monic().all_coeffs())]

        def build_alpha_image(new_tower):
            mc = []
            for q in old_tower.base_min_poly:
                mc.append(new_tower.base_dom(q.numerator)
                          / new_tower.base_dom(q.denominator))
            roots = new_tower.base_roots(mc)
            for cand in roots:
                # the alpha candidate must let h acquire a root downstairs
                mapper = _const_mapper(old_tower, new_tower, cand)
                hc = [mapper(c) for c in hcoeffs]
                if new_tower.base_roots(hc):
                    return cand
            return None

        return base_poly, build_alpha_image
    raise InternalError("no squarefree primitive element found")


def _map_fracelem(old_tower, new_tower, map_const, fe):
    num = _map_polyelem(new_tower.kfield.ring, map_const, fe.numer)
    den = _map_polyelem(new_tower.kfield.ring, map_const, fe.denom)
    return new_tower._norm(new_tower.kfield.raw_new(num, den))


def _map_polyelem(new_ring, map_const, p):
    out = new_ring.zero
    for monom, coeff in p.terms():
        out += new_ring.from_dict({monom: map_const(coeff)})
    return out


def _build_embed(old_tower, new_tower, map_const):
    def embed(e):
        if not isinstance(e, FieldElem) or e.tower is not old_tower:
            raise InputError("embedding expects an element of the original tower")
        vec = [_map_fracelem(old_tower, new_tower, map_const, c) for c in e.vec]
        return new_tower._make(vec)
    return embed
