"""Riemann-Roch spaces, linear equivalence, and the line-bundle descent
oracle on the cyclic covers.

Everything reduces to one workhorse: L(D) realized as the kernel of a
system of Laurent-coefficient constraints on an ansatz space that
provably contains it.
"""

import itertools

import sympy as sp

from .curve import Curve, CurveFunction, Divisor, Place
from .errors import InputError, InternalError
from .exactfield import Matrix, base_integer_iter, emit, extend_base_with_root
from .laurent import poly_at_series
from . import stats


class FunctionBasis:
    """A K-basis of L(D) = { fn : div(fn) + D >= 0 }."""

    __slots__ = ("curve", "divisor", "functions")

    def __init__(self, curve, divisor, functions):
        self.curve = curve
        self.divisor = divisor
        self.functions = tuple(functions)

    @property
    def dim(self):
        return len(self.functions)

    def __len__(self):
        return len(self.functions)

    def __iter__(self):
        return iter(self.functions)

    def __repr__(self):
        return "L(%r): dim %d" % (self.divisor, self.dim)


# ---------------------------------------------------------------------------
# the ansatz
#
# A function on the cover is uniquely f = sum_{j<N} r_j(x) y^j.  Suppose
# f lies in L(D), and for a point c of the line put
#
#     M_c = max(0, max_{P over c} D(P)).
#
# Averaging f against the deck group recovers each r_j y^j as a linear
# combination of translates of f, and every translate lies in a space
# with pole order at most M_c over c, so
#
#     v_P(r_j y^j) >= -M_c     at every place P over c.
#
# Over a point c with an unramified fiber, v_P(x - c) = 1 and
# v_P(y) = 0, hence ord_c(r_j) >= -M_c: pole order at most B_c = M_c.
#
# Over c = 0 one has v_P(x) = e0 = N/r0 and v_P(y) = a/r0, hence
#     e0 * ord_0(r_j) >= -M_0 - j*(a/r0),
# pole order at most B_0 = floor((M_0 + (N-1)(a/r0)) / e0).  B_0 can be
# positive even when M_0 = 0: y^j x^{-i} may be regular upstairs while
# x^{-i} alone is not.  Symmetrically over c = 1 with b/r1 and e1.
#
# At infinity v(x) = -N and v(y) = -(a+b), so writing r_j = p_j / q,
#     -N*(deg p_j - deg q) - j*(a+b) >= -M_inf,
# giving deg p_j <= deg q + floor((M_inf - j*(a+b)) / N).
#
# The span of { x^k y^j / q } within these bounds therefore contains
# L(D).  Cutting it down by the conditions v_P(f) >= -D(P) at every
# place over the collected x-values and at infinity leaves exactly L(D):
# ansatz members can only have poles over those x-values, and there the
# conditions are verbatim the definition of L(D).
# ---------------------------------------------------------------------------


def _pole_groups(curve, D):
    """Support x-values with their fibers and pole budgets.

    Returns (groups, m_inf): groups maps a deterministic key to a dict
    holding the fiber places, the bound M_c and the budget B_c."""
    tower = curve.tower
    groups = {}

    def slot(key, places):
        if key not in groups:
            groups[key] = {"places": list(places), "m": 0}
        return groups[key]

    # the branch fibers can absorb coefficient poles even when D ignores
    # them, so they are always part of the ansatz
    if curve.a > 0:
        slot("0", curve.places0)
    if curve.b > 0:
        slot("1", curve.places1)
    m_inf = 0
    for p, n in D.items():
        if p.kind == "inf":
            m_inf = max(0, n)
        elif p.kind == "branch0":
            g = groups["0"]
            g["m"] = max(g["m"], n)
        elif p.kind == "branch1":
            g = groups["1"]
            g["m"] = max(g["m"], n)
        else:
            g = slot(emit(p.x0), curve.places_over(p.x0))
            g["m"] = max(g["m"], n)
    for key, g in groups.items():
        if key == "0" and curve.a > 0:
            ap = curve.a // curve.r0
            g["b"] = (g["m"] + (curve.N - 1) * ap) // curve.e0
            g["x"] = tower.zero
        elif key == "1" and curve.b > 0:
            bp = curve.b // curve.r1
            g["b"] = (g["m"] + (curve.N - 1) * bp) // curve.e1
            g["x"] = tower.one
        else:
            g["b"] = g["m"]
            g["x"] = g["places"][0].x0
    return groups, m_inf


def rr_space(curve, D):
    """Basis of L(D), exact over the tower."""
    if not isinstance(D, Divisor) or D.curve is not curve:
        raise InputError("divisor must live on the given curve")
    stats.bump("rr_space_calls")
    tower = curve.tower
    if D.degree() < 0:
        return FunctionBasis(curve, D, ())

    groups, m_inf = _pole_groups(curve, D)
    xel = curve.xtower.gen("x")
    q = curve.xtower.one
    deg_q = 0
    for key in sorted(groups):
        g = groups[key]
        if g["b"] > 0:
            q = q * (xel - curve._inject(g["x"])) ** g["b"]
            deg_q += g["b"]

    ab = curve.a + curve.b
    monomials = []
    for j in range(curve.N):
        dj = deg_q + (m_inf - j * ab) // curve.N
        for k in range(dj + 1):
            monomials.append((j, k))
    if not monomials:
        return FunctionBasis(curve, D, ())

    qcoeffs = curve._xsplit(q.vec[0].numer)
    rows = []
    for key in sorted(groups):
        for place in groups[key]["places"]:
            rows.extend(_constraint_rows(curve, place, monomials, qcoeffs,
                                         D.coeff(place)))
    rows.extend(_constraint_rows(curve, curve.p_inf, monomials, qcoeffs,
                                 D.coeff(curve.p_inf)))

    if rows:
        kernel = Matrix(tower, rows, ncols=len(monomials)).kernel()
    else:
        kernel = [[tower.one if i == c else tower.zero
                   for i in range(len(monomials))]
                  for c in range(len(monomials))]

    funcs = []
    for vec in kernel:
        coeffs = [curve.xtower.zero] * curve.N
        for (j, k), cval in zip(monomials, vec):
            if cval:
                coeffs[j] = coeffs[j] + curve._inject(cval) * xel ** k
        funcs.append(CurveFunction(curve, [c / q for c in coeffs]))
    return FunctionBasis(curve, D, funcs)


def _constraint_rows(curve, place, monomials, qcoeffs, dcoeff):
    """Rows forcing v_place(f) >= -dcoeff on the ansatz.

    All monomials x^k y^j / q share the series of x, y and 1/q at the
    place, so a whole block costs a handful of series products."""
    order = -dcoeff - 1
    L = 2 * curve.N + 4 + max(0, order + 1)
    for _attempt in range(14):
        xs, ys = curve._parametrization(place, L)
        qs = poly_at_series(qcoeffs, xs, xs.lead * len(qcoeffs) + L)
        if qs.is_zero_to_prec():
            L *= 2
            continue
        qinv = qs.inverse()
        xpows = {0: None}
        ypows = {0: None}
        series = {}
        short = False
        for j, k in monomials:
            if k not in xpows:
                xpows[k] = xs ** k
            if j not in ypows:
                ypows[j] = ys ** j
            s = qinv
            if k:
                s = s * xpows[k]
            if j:
                s = s * ypows[j]
            if s.prec < order + 1:
                short = True
                break
            series[(j, k)] = s
        if not short:
            break
        L *= 2
    else:
        raise InternalError("constraint expansion did not stabilize at %r"
                            % place)
    lead = min(s.lead for s in series.values())
    rows = []
    for l in range(lead, order + 1):
        row = [series[jk].coeff(l) for jk in monomials]
        if any(row):
            rows.append(row)
    return rows


# ---------------------------------------------------------------------------
# linear equivalence


def lin_equiv(curve, d1, d2):
    """Whether O(d1) and O(d2) are isomorphic; on success also returns
    the function with divisor exactly d2 - d1."""
    if d1.curve is not curve or d2.curve is not curve:
        raise InputError("divisors must live on the given curve")
    if d1.degree() != d2.degree():
        return False, None
    basis = rr_space(curve, d1 - d2)
    if basis.dim == 0:
        return False, None
    if basis.dim > 1:
        raise InternalError("degree-0 divisor with l > 1")
    w = _normalize_leading(basis.functions[0])
    _verify_witness(curve, w, d2 - d1)
    return True, w


def _normalize_leading(fn):
    """Scale so the first nonzero coefficient has leading numerator 1."""
    c = fn.curve
    for a in fn.coeffs:
        for fr in a.vec:
            if fr.numer:
                lead = fr.numer.LC            # denominators are kept monic
                const = c.tower.from_base_const(lead)
                return fn * c.fn_const(c.tower.one / const)
    return fn


def _verify_witness(curve, w, target):
    total = 0
    for p, n in target.items():
        v = curve.valuation(w, p)
        if v != n:
            raise InternalError(
                "witness valuation %s at %r, divisor asks %s" % (v, p, n))
        total += v
    if total != target.degree():
        raise InternalError("witness degree accounting failed")


def hom_space(curve, d1, d2):
    """Basis of Hom(O(d1), O(d2)), which is L(d2 - d1)."""
    return rr_space(curve, d2 - d1)


# ---------------------------------------------------------------------------
# descent oracle for line bundles


class DescentVerdict:
    """Outcome of the specialization test for a line bundle class.

    When the base field had to grow to house u(tau), `curve` is the
    rebuilt curve and the other fields live on it."""

    __slots__ = ("descends", "curve", "representative", "tau", "witness",
                 "detail")

    def __init__(self, descends, curve=None, representative=None, tau=None,
                 witness=None, detail=""):
        self.descends = descends
        self.curve = curve
        self.representative = representative
        self.tau = tau
        self.witness = witness
        self.detail = detail

    def __repr__(self):
        return "%s(%s)" % ("Descends" if self.descends else "Fails",
                           self.detail)


class _BadTau(Exception):
    pass


def divisor_is_t_free(D):
    for p in D.support():
        if p.kind == "finite":
            if not (p.x0.is_algebraic() and p.y0.is_algebraic()):
                return False
    return True


def line_descent_oracle(curve, D, max_tau=40):
    """Decide whether the class of O(D) comes from the algebraic layer,
    by comparing D against a good specialization D(tau).

    Soundness: Descends carries an explicit witness of D ~ D(tau) with
    D(tau) t-free.  Fails is equally explicit: were the class constant
    in t, specializing would preserve it, so l(D - D(tau)) = 0 at a
    good tau rules that out."""
    tower = curve.tower
    if not tower.transcendentals:
        raise InputError("descent oracle needs at least one transcendental")
    if D.curve is not curve:
        raise InputError("divisor must live on the given curve")
    if divisor_is_t_free(D):
        return DescentVerdict(True, curve=curve, representative=D,
                              detail="divisor is already t-free")

    taus = _tau_tuples(tower, max_tau)
    tried = 0
    # first sweep: tau with u(tau) already in F; extensions only if none fit
    for allow_ext in (False, True):
        for tau in taus:
            tried += 1
            try:
                return _try_tau(curve, D, tau, allow_ext)
            except _BadTau:
                continue
    raise InputError(
        "no good specialization among %d candidates; refusing to guess"
        % tried)


def _tau_tuples(tower, limit):
    """Deterministic stream of small F-integer tuples for the
    transcendentals."""
    k = len(tower.transcendentals)
    pool = []
    for c in base_integer_iter(tower):
        pool.append(c.as_base_const())
        if len(pool) >= limit:
            break
    if k == 1:
        return [(c,) for c in pool]
    combos = sorted(itertools.product(range(len(pool)), repeat=k),
                    key=lambda ix: (max(ix), ix))
    return [tuple(pool[i] for i in ix) for ix in combos[:limit]]


def _try_tau(curve, D, tau, allow_ext):
    tower = curve.tower
    stats.bump("oracle_tau_tried")
    if tower.ext_deg > 1:
        gtau = [_eval_frac(tower, c, tau) for c in tower.ext_coeffs]
        gtau.append(tower.base_dom.one)
        roots = tower.base_roots(gtau)
        if roots:
            u_img = roots[0]
            work_curve, work_D = curve, D
        elif allow_ext:
            work_curve, work_D, u_img, tau = _extend_for_root(curve, D, gtau,
                                                              tau)
        else:
            raise _BadTau("u(tau) needs a field extension")
    else:
        u_img = tower.base_dom.zero
        work_curve, work_D = curve, D

    spec_D = _specialize_divisor(work_curve, work_D, tau, u_img)
    ok, witness = lin_equiv(work_curve, work_D, spec_D)
    tau_str = ", ".join(
        emit(work_curve.tower.from_base_const(c)) for c in tau)
    if ok:
        return DescentVerdict(True, curve=work_curve, representative=spec_D,
                              tau=tau, witness=witness,
                              detail="D ~ D(tau) at tau = (%s)" % tau_str)
    return DescentVerdict(False, curve=work_curve, representative=spec_D,
                          tau=tau,
                          detail="l(D - D(tau)) = 0 at tau = (%s): the "
                          "class moves with t" % tau_str)


def _eval_frac(tower, fe, tau):
    nv = _eval_polyelem(tower, fe.numer, tau)
    dv = _eval_polyelem(tower, fe.denom, tau)
    if not dv:
        raise _BadTau("denominator vanishes at tau")
    return nv / dv


def _eval_polyelem(tower, p, tau):
    if not p:
        return tower.base_dom.zero
    gens = tower.kfield.ring.gens
    if not gens:
        return p.LC
    return p.evaluate(list(zip(gens, tau)))


def _spec_const(tower, e, tau, u_img):
    """Evaluate an element at t = tau, u = u(tau); a tower constant."""
    dom = tower.base_dom
    acc = dom.zero
    upow = dom.one
    for fr in e.vec:
        if fr.numer:
            acc += _eval_frac(tower, fr, tau) * upow
        upow = upow * u_img
    return tower.from_base_const(acc)


def _specialize_divisor(curve, D, tau, u_img):
    tower = curve.tower
    data = {}
    seen = {}
    for p, n in D.items():
        if p.kind != "finite":
            q = p
        else:
            x1 = _spec_const(tower, p.x0, tau, u_img)
            y1 = _spec_const(tower, p.y0, tau, u_img)
            if not x1 or x1 == tower.one:
                raise _BadTau("specialized point hits the branch locus")
            q = Place(curve, "finite", x0=x1, y0=y1, e=1)
            kq = q.key()
            if kq in seen and seen[kq] != p.key():
                raise _BadTau("distinct places collide at tau")
            seen[kq] = p.key()
        data[q] = data.get(q, 0) + n
    return Divisor(curve, data)


def _extend_for_root(curve, D, gtau, tau):
    """Adjoin a root of the specialized extension polynomial to the
    algebraic layer; rebuild the curve, the divisor and tau up there."""
    tower = curve.tower
    factor = _min_degree_factor(tower, gtau)
    try:
        new_tower, embed, root = extend_base_with_root(tower, factor)
    except InputError:
        raise _BadTau("extension for u(tau) exceeds the degree bound")
    new_curve = Curve(curve.N, curve.a, curve.b, new_tower,
                      zeta=embed(curve.zeta))
    data = {}
    for p, n in D.items():
        data[_move_place(new_curve, embed, p)] = n
    new_tau = tuple(embed(tower.from_base_const(c)).as_base_const()
                    for c in tau)
    return new_curve, Divisor(new_curve, data), root.as_base_const(), new_tau


def _min_degree_factor(tower, coeffs):
    """A least-degree irreducible factor over F, ascending coefficients."""
    if tower.base_poly_irreducible(coeffs):
        return coeffs
    zsym = sp.Symbol("zmin_")
    dom = tower.base_dom
    expr = sp.Integer(0)
    for k, c in enumerate(coeffs):
        expr += dom.to_sympy(c) * zsym ** k
    if tower.base_degree == 1:
        factors = sp.factor_list(expr, zsym)
    else:
        factors = sp.factor_list(expr, zsym, extension=tower._alpha_root)
    cands = []
    for f, _m in factors[1]:
        d = sp.degree(f, zsym)
        if d >= 1:
            cands.append((d, sp.sstr(f), f))
    if not cands:
        raise InternalError("specialized extension polynomial lost its roots")
    cands.sort(key=lambda c: (c[0], c[1]))
    f = sp.Poly(cands[0][2], zsym)
    return [dom.from_sympy(c) for c in reversed(f.all_coeffs())]


def _move_place(new_curve, embed, p):
    if p.kind == "inf":
        return new_curve.p_inf
    if p.kind == "branch0":
        return new_curve.places0[p.index]
    if p.kind == "branch1":
        return new_curve.places1[p.index]
    return Place(new_curve, "finite", x0=embed(p.x0), y0=embed(p.y0), e=p.e)
