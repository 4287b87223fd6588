"""Direct images of split bundles along the cover.

The pushforward W = f_*E of E = O(D_1) + ... + O(D_r) is a rank-N*r
bundle on the line.  This module computes its splitting type from the
twist profile h^0(W(m)), models its fibers over 0, 1 and infinity by
truncated jets, builds the flag-and-weight structure those fibers
carry, and verifies that for t-free input the whole structure is
defined over the number field.
"""

from fractions import Fraction

from .curve import Divisor
from .errors import InputError, InternalError
from .exactfield import Matrix, base_integer_iter, subspace_is_rational
from .rrsolver import divisor_is_t_free, rr_space
from . import stats


class SplitBundle:
    """A direct sum of line bundles O(D_1) + ... + O(D_r)."""

    __slots__ = ("curve", "divisors")

    def __init__(self, curve, divisors):
        divisors = tuple(divisors)
        if not divisors:
            raise InputError("a split bundle needs at least one summand")
        for d in divisors:
            if not isinstance(d, Divisor) or d.curve is not curve:
                raise InputError("summand divisors must live on the curve")
        self.curve = curve
        self.divisors = divisors

    @property
    def rank(self):
        return len(self.divisors)

    @property
    def degree(self):
        return sum(d.degree() for d in self.divisors)

    def is_t_free(self):
        return all(divisor_is_t_free(d) for d in self.divisors)

    def __repr__(self):
        return "SplitBundle(rank %d, deg %d)" % (self.rank, self.degree)


_FIBER_LABELS = (("0", 0), ("1", 1), ("infinity", "inf"))


# --- splitting type --------------------------------------------------------

def _h0_twist(E, m):
    """h^0 of f_*E twisted by O(m) on the line, via the projection
    formula: H^0(W(m)) = sum_j L(D_j + m * F_inf)."""
    c = E.curve
    F = c.fiber_divisor("inf")
    return sum(rr_space(c, D + m * F).dim for D in E.divisors)


def pushforward_splitting_type(E):
    """The multiset {m_i} with W = O(m_1) + ... + O(m_Nr), descending.

    First differences of the twist profile count summands:
    h^0(W(m)) - h^0(W(m-1)) = #{i : m_i >= -m}, so the second
    difference at m is the multiplicity of the value -m.  The scan
    window is wide enough for every jump because each |m_i| is bounded
    by |deg E| + rN + g (split summand degrees cannot stray further
    from the average than the h^0 bounds allow)."""
    c = E.curve
    target = E.rank * c.N
    bound = abs(E.degree) + target + c.genus + 1
    ms = []
    h_prev = _h0_twist(E, -bound - 1)
    c_prev = h_prev - _h0_twist(E, -bound - 2)
    if h_prev or c_prev:
        raise InternalError("splitting-type window bound is wrong")
    for m in range(-bound, bound + 1):
        h = _h0_twist(E, m)
        c_m = h - h_prev
        mult = c_m - c_prev
        if mult < 0:
            raise InternalError("twist profile lost monotonicity")
        ms.extend([-m] * mult)
        if len(ms) == target:
            break
        h_prev, c_prev = h, c_m
    else:
        raise InternalError("splitting-type scan exhausted its window")
    euler = E.degree + E.rank * (1 - c.genus) - E.rank * c.N
    if sum(ms) != euler:
        raise InternalError("splitting type violates the degree formula")
    return sorted(ms, reverse=True)


# --- fiber model -----------------------------------------------------------

class FiberModel:
    """Jet-coordinate model of the fiber of f_*E over a base point.

    The fiber splits into blocks V_x, one per place x of the curve over
    the point, of dimension e_x * r.  Coordinates are indexed by
    (place, jet order k < e_x, summand i); summand i is trivialized
    near x by t_x^(-D_i(x)), so its jet entries are expansion
    coefficients shifted by D_i(x)."""

    __slots__ = ("curve", "bundle", "label", "places", "index", "_xcache")

    def __init__(self, bundle, y):
        c = bundle.curve
        self.curve = c
        self.bundle = bundle
        self.label = str(y)
        self.places = list(c.places_over(y))
        self.index = [(pi, k, i)
                      for pi, p in enumerate(self.places)
                      for k in range(p.e)
                      for i in range(bundle.rank)]
        self._xcache = {}
        if len(self.index) != c.N * bundle.rank:
            raise InternalError("fiber dimension is off")

    @property
    def dim(self):
        return len(self.index)

    def block_dims(self):
        return [p.e * self.bundle.rank for p in self.places]

    def _xpow(self, m):
        if m not in self._xcache:
            self._xcache[m] = self.curve.fn_x() ** m
        return self._xcache[m]

    def jet_coordinates(self, sections, twist=0):
        """Coordinate vector of an r-tuple of functions.

        `twist` says the sections live in W(-twist): over infinity the
        line bundle O(twist) is trivialized by x^twist, so the local
        E-section is the product."""
        c = self.curve
        r = self.bundle.rank
        if len(sections) != r:
            raise InternalError("section tuple has the wrong rank")
        out = []
        for pi, p in enumerate(self.places):
            mx = p.e
            block = []
            for i in range(r):
                fn = sections[i]
                if twist and p.kind == "inf":
                    fn = fn * self._xpow(twist)
                shift = self.bundle.divisors[i].coeff(p)
                if not fn:
                    block.append([c.tower.zero] * mx)
                    continue
                ex = c.local_expansion(fn, p, order=mx - 1 - shift)
                v = ex.valuation()
                if v is not None and v < -shift:
                    raise InternalError(
                        "section has a pole beyond its summand bound at %r"
                        % p)
                block.append([ex.coeff(k - shift) for k in range(mx)])
            for k in range(mx):
                for i in range(r):
                    out.append(block[i][k])
        return out

    def __repr__(self):
        return "FiberModel(over %s, blocks %r)" % (self.label,
                                                   self.block_dims())


def fiber_decomposition(E, y):
    return FiberModel(E, y)


def parabolic_filtration(E, y):
    """Flags and weights of the fiber over a branch point of the line.

    Returns (model, flags, weights): flags[pi][k] spans, in jet
    coordinates, the sections whose jet at place pi vanishes to order
    at least k; its weight is k/e_x.  Quotient steps all have dimension
    r, and the top step k = e_x is zero."""
    model = FiberModel(E, y)
    tower = model.curve.tower
    r = E.rank
    flags = []
    weights = []
    for pi, p in enumerate(model.places):
        mx = p.e
        chain = []
        for k in range(mx + 1):
            rows = []
            for ix, (pj, kk, _i) in enumerate(model.index):
                if pj == pi and kk >= k:
                    row = [tower.zero] * model.dim
                    row[ix] = tower.one
                    rows.append(row)
            chain.append(Matrix(tower, rows, ncols=model.dim))
        for k in range(mx):
            if chain[k].nrows - chain[k + 1].nrows != r:
                raise InternalError("flag steps must drop by the rank")
        if chain[mx].nrows != 0:
            raise InternalError("flag chain must end at zero")
        flags.append(chain)
        weights.append([Fraction(k, mx) for k in range(mx)])
    return model, flags, weights


# --- splitting maps --------------------------------------------------------

def good_point(E):
    """Smallest F-integer x-value with a rational fiber, avoiding 0, 1
    and every x-coordinate in the support of E."""
    c = E.curve
    bad = set()
    for D in E.divisors:
        for p in D.support():
            if p.kind == "finite":
                bad.add(p.x0)
    for cand in base_integer_iter(c.tower, radius_cap=40):
        if cand == c.tower.zero or cand == c.tower.one or cand in bad:
            continue
        try:
            places = c.places_over(cand)
        except InputError:
            continue
        return cand, places
    raise InternalError("no usable evaluation point in the search radius")


def _value_column(c, places, sections):
    col = []
    for p in places:
        for fn in sections:
            if not fn:
                col.append(c.tower.zero)
            else:
                col.append(c.local_expansion(fn, p, order=0).coeff(0))
    return col


def _choose_at_twist(tower, cols, cands, quota):
    """Greedily extend `cols` by candidate columns that raise the rank.

    Returns the list of picked candidate indices; the caller treats a
    shortfall as an error."""
    picked = []
    rank = Matrix(tower, cols, ncols=len(cols[0])).rank() if cols else 0
    for ci, col in enumerate(cands):
        if len(picked) == quota:
            break
        trial = cols + [col]
        new_rank = Matrix(tower, trial, ncols=len(col)).rank()
        if new_rank > rank:
            cols.append(col)
            rank = new_rank
            picked.append(ci)
    return picked


def compute_splitting_maps(E):
    """Sections realizing W = O(m_1) + ... + O(m_Nr).

    For each summand a section of W(-m_i), i.e. an r-tuple from
    + L(D_j - m_i F_inf).  Independence is certified by evaluating at
    one good point: the determinant of the induced map is a section of
    a degree-0 line bundle on the line, so full rank at a single point
    makes it an isomorphism everywhere."""
    c = E.curve
    stats.bump("splitting_map_calls")
    ms = pushforward_splitting_type(E)
    F = c.fiber_divisor("inf")
    _pt, places = good_point(E)
    target = E.rank * c.N
    cols = []
    maps = []
    for m in sorted(set(ms), reverse=True):
        quota = ms.count(m)
        cands = []
        for j, Dj in enumerate(E.divisors):
            for fn in rr_space(c, Dj - m * F).functions:
                sec = tuple(fn if jj == j else c.fn_const(0)
                            for jj in range(E.rank))
                cands.append(sec)
        cand_cols = [_value_column(c, places, sec) for sec in cands]
        picked = _choose_at_twist(c.tower, cols, cand_cols, quota)
        if len(picked) < quota:
            raise InternalError(
                "independent sections missing at twist %d" % m)
        maps.extend((m, cands[ci]) for ci in picked)
    if Matrix(c.tower, cols, ncols=target).rank() != target:
        raise InternalError("splitting sections fail the rank certificate")
    return maps


# --- assembly and the rationality verifier ---------------------------------

class ParabolicP1Bundle:
    """The direct image with its flags and weights over 0, 1, infinity.

    Flag matrices are written in the fiber basis induced by the chosen
    splitting maps; rows span the subspace."""

    __slots__ = ("bundle", "splitting", "maps", "flags", "weights", "models")

    def __init__(self, bundle, splitting, maps, flags, weights, models):
        self.bundle = bundle
        self.splitting = tuple(splitting)
        self.maps = maps
        self.flags = flags
        self.weights = weights
        self.models = models
        for label, per_place in weights.items():
            for wl in per_place:
                if wl != sorted(set(wl)):
                    raise InternalError("weights must strictly increase")
                if wl and not (0 <= wl[0] and wl[-1] < 1):
                    raise InternalError("weights must lie in [0, 1)")
        for label, per_place in flags.items():
            for chain in per_place:
                for k in range(len(chain) - 1):
                    if chain[k].nrows <= chain[k + 1].nrows:
                        raise InternalError("flags must strictly decrease")

    def __repr__(self):
        return "ParabolicP1Bundle(splitting %r)" % (self.splitting,)


def _mat_inverse(tower, rows):
    n = len(rows)
    aug = [list(r) + [tower.one if j == i else tower.zero
                      for j in range(n)]
           for i, r in enumerate(rows)]
    R, piv = Matrix(tower, aug, ncols=2 * n).rref_with_pivots()
    if list(piv) != list(range(n)):
        raise InternalError("fiber basis matrix is singular")
    return [list(row[n:]) for row in R.rows]


def assemble_parabolic(E, maps=None):
    """Flags of the jet filtration, rewritten in the splitting basis.

    The splitting sections evaluated in each FiberModel give a basis
    matrix S; a jet-basis subspace spanned by unit vectors turns into
    the corresponding columns of S^(-1)."""
    c = E.curve
    if maps is None:
        maps = compute_splitting_maps(E)
    flags = {}
    weights = {}
    models = {}
    for label, y in _FIBER_LABELS:
        model, jet_flags, wts = parabolic_filtration(E, y)
        s_cols = [model.jet_coordinates(sec, twist=m) for m, sec in maps]
        s_rows = [[s_cols[j][i] for j in range(len(s_cols))]
                  for i in range(model.dim)]
        sinv = _mat_inverse(c.tower, s_rows)
        per_place = []
        for pi in range(len(model.places)):
            chain = []
            for k, jm in enumerate(jet_flags[pi]):
                rows = []
                for ix, (pj, kk, _i) in enumerate(model.index):
                    if pj == pi and kk >= k:
                        rows.append([sinv[rr][ix] for rr in range(model.dim)])
                chain.append(Matrix(c.tower, rows, ncols=model.dim))
            per_place.append(chain)
        flags[label] = per_place
        weights[label] = wts
        models[label] = model
    return ParabolicP1Bundle(E, [m for m, _ in maps], maps, flags, weights,
                             models)


def verify_prop1(E):
    """Check that the parabolic data of the direct image of a t-free
    bundle is defined over the number field: every flag matrix reduces
    to one with algebraic entries."""
    if not E.is_t_free():
        raise InputError("rationality verifier needs a t-free bundle")
    pb = assemble_parabolic(E)
    for label, per_place in pb.flags.items():
        for chain in per_place:
            for mat in chain:
                if mat.nrows and not subspace_is_rational(mat):
                    return False
    return True
