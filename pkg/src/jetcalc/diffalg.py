"""Exact arithmetic on differential polynomials and rational jet expressions.

The universal value type is RatExpr = DiffPoly / DiffPoly with arbitrary
precision rational coefficients.  Everything is immutable after construction
and every constructor returns a normalized value, so values can be shared
freely between tasks.  Zero testing (is_zero) is exact: normalization cancels
integer content and common monomial factors, which is enough to decide whether
the numerator is the zero polynomial.  There is deliberately no multivariate
polynomial GCD; addition and multiplication instead look for exact-division
common denominators to keep denominator towers like (P - P_X)^k flat.
"""

from __future__ import annotations

from fractions import Fraction
from functools import cmp_to_key
from math import gcd


DEFAULT_TERM_CAP = 200_000

_term_cap = DEFAULT_TERM_CAP


def set_term_cap(cap):
    """Set the global expression-size guard (number of stored terms)."""
    global _term_cap
    if cap < 1:
        raise ValueError("term cap must be positive")
    _term_cap = int(cap)


def get_term_cap():
    return _term_cap


class DiffAlgError(Exception):
    """Base class for symbolic-engine errors."""


class SpaceMismatchError(DiffAlgError):
    """An operation mixed jets from two different variable spaces."""


class ZeroDivisionExprError(DiffAlgError):
    """Division by an identically zero expression."""


class TermCapError(DiffAlgError):
    """Expression grew past the configured term-count guard."""


class UnknownVariableError(DiffAlgError):
    """A derivative direction that does not belong to the expression's space."""


# ---------------------------------------------------------------------------
# spaces, fields, jets


class VarSpace:
    """An ordered list of independent variables plus the fields living on them.

    evolution_vars picks the variables that dominate the default jet ranking
    used by the rewrite machinery (e.g. T on the CH space, T_n..T_1 on the
    reciprocal space).
    """

    __slots__ = ("name", "vars", "fields", "evolution_vars", "_by_key", "_var_pos")

    def __init__(self, name, variables, evolution_vars=()):
        variables = tuple(variables)
        if len(set(variables)) != len(variables):
            raise ValueError(f"duplicate variable names in space {name!r}")
        for v in evolution_vars:
            if v not in variables:
                raise ValueError(f"evolution variable {v!r} not in space {name!r}")
        self.name = name
        self.vars = variables
        self.evolution_vars = tuple(evolution_vars)
        self.fields = []
        self._by_key = {}
        self._var_pos = {v: i for i, v in enumerate(variables)}

    def add_field(self, name, index=None, deps=None):
        if name in self._var_pos:
            raise ValueError(f"field name {name!r} collides with a variable of {self.name!r}")
        deps = self.vars if deps is None else tuple(deps)
        for d in deps:
            if d not in self._var_pos:
                raise ValueError(f"dependency {d!r} not a variable of {self.name!r}")
        key = (name, index)
        if key in self._by_key:
            raise ValueError(f"field {key} already declared on {self.name!r}")
        for (other, oidx) in self._by_key:
            if other == name and (oidx is None) != (index is None):
                raise ValueError(f"field family {name!r} mixes indexed and plain symbols")
        f = FieldSymbol(name, index, self, deps, len(self.fields))
        self.fields.append(f)
        self._by_key[key] = f
        return f

    def field(self, name, index=None):
        try:
            return self._by_key[(name, index)]
        except KeyError:
            raise KeyError(f"no field {name!r}"
                           + (f"[{index}]" if index is not None else "")
                           + f" on space {self.name!r}") from None

    def has_field(self, name, index=None):
        return (name, index) in self._by_key

    def field_names(self):
        return sorted({name for (name, _idx) in self._by_key})

    def jet(self, name, index=None, **orders):
        return self.field(name, index).jet(**orders)

    def expr(self, name, index=None, **orders):
        return RatExpr.from_jet(self.jet(name, index, **orders))

    def __repr__(self):
        return f"VarSpace({self.name!r}, vars={self.vars})"


class FieldSymbol:
    """A dependent field, optionally member of an indexed family like Omega[i].

    deps lists the variables the field actually depends on; total derivatives
    along other variables of the same space annihilate its jets (used by the
    mixed space that hosts both hierarchies' fields at once).
    """

    __slots__ = ("name", "index", "space", "deps", "prio", "_dep_pos", "_hash")

    def __init__(self, name, index, space, deps, prio):
        self.name = name
        self.index = index
        self.space = space
        self.deps = tuple(deps)
        self.prio = prio
        self._dep_pos = {v: i for i, v in enumerate(self.deps)}
        self._hash = hash((space.name, name, index))

    def jet(self, **orders):
        counts = [0] * len(self.deps)
        for v, k in orders.items():
            if v not in self._dep_pos:
                raise UnknownVariableError(f"{self.label()} does not depend on {v!r}")
            if k < 0:
                raise ValueError("derivative order must be >= 0")
            counts[self._dep_pos[v]] = k
        return JetVar(self, tuple(counts))

    def base_jet(self):
        return JetVar(self, (0,) * len(self.deps))

    def label(self):
        return self.name if self.index is None else f"{self.name}[{self.index}]"

    def __eq__(self, other):
        if self is other:
            return True
        return (isinstance(other, FieldSymbol)
                and self.name == other.name and self.index == other.index
                and self.space.name == other.space.name)

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return f"FieldSymbol({self.label()} on {self.space.name})"


class JetVar:
    """A field together with a multi-index of derivative orders.

    orders is aligned with field.deps; zero entries are simply zero slots.
    """

    __slots__ = ("field", "orders", "total", "_hash", "_key")

    def __init__(self, field, orders):
        self.field = field
        self.orders = orders
        self.total = sum(orders)
        self._key = (field.prio, field.index if field.index is not None else 0, orders)
        self._hash = hash((field._hash, orders))

    def order_of(self, var):
        pos = self.field._dep_pos.get(var)
        return 0 if pos is None else self.orders[pos]

    def derived(self, var):
        """Jet with one more derivative along var; None if the field does not
        depend on var (the derivative contribution is zero)."""
        pos = self.field._dep_pos.get(var)
        if pos is None:
            return None
        orders = list(self.orders)
        orders[pos] += 1
        return JetVar(self.field, tuple(orders))

    def lowered(self, var):
        pos = self.field._dep_pos[var]
        if self.orders[pos] == 0:
            raise ValueError(f"cannot lower {self.text()} along {var}")
        orders = list(self.orders)
        orders[pos] -= 1
        return JetVar(self.field, tuple(orders))

    def dominates(self, other):
        """Componentwise >= on orders; same field required."""
        return (self.field == other.field
                and all(a >= b for a, b in zip(self.orders, other.orders)))

    def multi_index(self):
        return {v: k for v, k in zip(self.field.deps, self.orders) if k}

    def sort_key(self):
        return self._key

    def text(self):
        s = self.field.label()
        subs = []
        for v, k in zip(self.field.deps, self.orders):
            subs.extend([v] * k)
        if subs:
            s += "_{" + ",".join(subs) + "}"
        return s

    def __eq__(self, other):
        if self is other:
            return True
        return (isinstance(other, JetVar)
                and self.orders == other.orders and self.field == other.field)

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return f"JetVar({self.text()})"


# ---------------------------------------------------------------------------
# monomials


class Monomial:
    """Product of jet variables with positive integer exponents.

    factors is a tuple of (jet, exponent) sorted by the canonical jet key:
    (field priority, field index, multi-index in declared variable order).
    """

    __slots__ = ("factors", "_hash")

    def __init__(self, factors):
        self.factors = factors
        self._hash = hash(factors)

    @staticmethod
    def unit():
        return _MONO_UNIT

    @staticmethod
    def of(jet, exp=1):
        if exp == 0:
            return _MONO_UNIT
        if exp < 0:
            raise ValueError("monomial exponents must be positive")
        return Monomial(((jet, exp),))

    @staticmethod
    def from_pairs(pairs):
        merged = {}
        for j, e in pairs:
            merged[j] = merged.get(j, 0) + e
        out = [(j, e) for j, e in merged.items() if e != 0]
        if any(e < 0 for _, e in out):
            raise ValueError("monomial exponents must be positive")
        out.sort(key=lambda p: p[0].sort_key())
        return Monomial(tuple(out))

    def degree(self):
        return sum(e for _, e in self.factors)

    def exp_of(self, jet):
        for j, e in self.factors:
            if j == jet:
                return e
        return 0

    def mul(self, other):
        if not self.factors:
            return other
        if not other.factors:
            return self
        out = []
        a, b = self.factors, other.factors
        i = j = 0
        while i < len(a) and j < len(b):
            ja, jb = a[i], b[j]
            ka, kb = ja[0]._key, jb[0]._key
            if ka < kb:
                out.append(ja)
                i += 1
            elif kb < ka:
                out.append(jb)
                j += 1
            else:
                out.append((ja[0], ja[1] + jb[1]))
                i += 1
                j += 1
        out.extend(a[i:])
        out.extend(b[j:])
        return Monomial(tuple(out))

    def divides(self, other):
        j = 0
        for jet, e in self.factors:
            while j < len(other.factors) and other.factors[j][0]._key < jet._key:
                j += 1
            if j >= len(other.factors) or other.factors[j][0] != jet or other.factors[j][1] < e:
                return False
        return True

    def div(self, other):
        """Quotient self / other (other must divide self)."""
        rem = {j: e for j, e in self.factors}
        for j, e in other.factors:
            have = rem.get(j, 0)
            if have < e:
                raise ValueError("monomial division is not exact")
            if have == e:
                del rem[j]
            else:
                rem[j] = have - e
        return Monomial.from_pairs(rem.items())

    def without(self, jet):
        """Split into (exponent of jet, remaining monomial)."""
        e = 0
        rest = []
        for j, k in self.factors:
            if j == jet:
                e = k
            else:
                rest.append((j, k))
        return e, Monomial(tuple(rest))

    def jets(self):
        return [j for j, _ in self.factors]

    def __eq__(self, other):
        return self is other or (isinstance(other, Monomial) and self.factors == other.factors)

    def __hash__(self):
        return self._hash

    def __repr__(self):
        if not self.factors:
            return "Monomial(1)"
        return "Monomial(" + "*".join(
            j.text() + (f"^{e}" if e != 1 else "") for j, e in self.factors) + ")"


_MONO_UNIT = Monomial(())


def mono_cmp(a, b):
    """Lexicographic monomial order: the jet with the smallest canonical key is
    the most significant position.  Total order compatible with multiplication,
    so leading-term exact division is sound."""
    fa, fb = a.factors, b.factors
    i = j = 0
    while i < len(fa) and j < len(fb):
        ka, kb = fa[i][0]._key, fb[j][0]._key
        if ka < kb:
            return 1    # a has a positive exponent where b has zero
        if kb < ka:
            return -1
        if fa[i][1] != fb[j][1]:
            return 1 if fa[i][1] > fb[j][1] else -1
        i += 1
        j += 1
    if i < len(fa):
        return 1
    if j < len(fb):
        return -1
    return 0


mono_sort_key = cmp_to_key(mono_cmp)


# ---------------------------------------------------------------------------
# differential polynomials


_SCAN = object()


class DiffPoly:
    """Map monomial -> nonzero exact rational coefficient; zero is the empty map."""

    __slots__ = ("terms", "_space", "_hash")

    def __init__(self, terms, space=_SCAN):
        if len(terms) > _term_cap:
            raise TermCapError(
                f"polynomial with {len(terms)} terms exceeds the cap of {_term_cap}")
        self.terms = terms
        if not terms:
            space = None
        elif space is _SCAN:
            space = None
            for mono in terms:
                for jet in mono.jets():
                    s = jet.field.space
                    if space is None:
                        space = s
                    elif space is not s and space.name != s.name:
                        raise SpaceMismatchError(
                            f"jets from spaces {space.name!r} and {s.name!r} in one polynomial")
        self._space = space
        self._hash = None

    @staticmethod
    def zero():
        return _POLY_ZERO

    @staticmethod
    def const(c):
        c = Fraction(c)
        if c == 0:
            return _POLY_ZERO
        return DiffPoly({_MONO_UNIT: c})

    @staticmethod
    def from_jet(jet, exp=1, coeff=1):
        c = Fraction(coeff)
        if c == 0:
            return _POLY_ZERO
        return DiffPoly({Monomial.of(jet, exp): c})

    def space(self):
        return self._space

    def is_zero(self):
        return not self.terms

    def is_const(self):
        return not self.terms or (len(self.terms) == 1 and _MONO_UNIT in self.terms)

    def const_value(self):
        if not self.terms:
            return Fraction(0)
        return Fraction(self.terms[_MONO_UNIT])

    def jets(self):
        seen = set()
        for mono in self.terms:
            for j in mono.jets():
                if j not in seen:
                    seen.add(j)
                    yield j

    def sorted_terms(self):
        return sorted(self.terms.items(), key=lambda t: mono_sort_key(t[0]), reverse=True)

    def leading(self):
        if not self.terms:
            raise ValueError("zero polynomial has no leading term")
        lm = max(self.terms, key=mono_sort_key)
        return lm, self.terms[lm]

    def _check_space(self, other):
        if (self._space is not None and other._space is not None
                and self._space.name != other._space.name):
            raise SpaceMismatchError(
                f"cannot combine spaces {self._space.name!r} and {other._space.name!r}")

    def add(self, other):
        self._check_space(other)
        out = dict(self.terms)
        for m, c in other.terms.items():
            s = out.get(m)
            if s is None:
                out[m] = c
            else:
                s = s + c
                if s:
                    out[m] = s
                else:
                    del out[m]
        return DiffPoly(out, self._space if self._space is not None else other._space)

    def neg(self):
        return DiffPoly({m: -c for m, c in self.terms.items()}, self._space)

    def sub(self, other):
        return self.add(other.neg())

    def scale(self, c):
        c = Fraction(c)
        if c == 0:
            return _POLY_ZERO
        if c == 1:
            return self
        return DiffPoly({m: c * q for m, q in self.terms.items()}, self._space)

    def mul_term(self, mono, coeff):
        if coeff == 0:
            return _POLY_ZERO
        return DiffPoly({m.mul(mono): c * coeff for m, c in self.terms.items()},
                        _SCAN if mono.factors else self._space)

    def mul(self, other):
        self._check_space(other)
        if not self.terms or not other.terms:
            return _POLY_ZERO
        if other.is_const():
            return self.scale(other.const_value())
        if self.is_const():
            return other.scale(self.const_value())
        out = {}
        cap = _term_cap
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m = m1.mul(m2)
                s = out.get(m)
                if s is None:
                    out[m] = c1 * c2
                else:
                    s = s + c1 * c2
                    if s:
                        out[m] = s
                    else:
                        del out[m]
            if len(out) > cap:
                raise TermCapError(f"product exceeded the term cap of {cap}")
        return DiffPoly(out, self._space if self._space is not None else other._space)

    def total_derivative(self, var):
        out = {}
        for mono, coeff in self.terms.items():
            for idx, (jet, exp) in enumerate(mono.factors):
                dj = jet.derived(var)
                if dj is None:
                    continue
                pairs = list(mono.factors)
                if exp == 1:
                    del pairs[idx]
                else:
                    pairs[idx] = (jet, exp - 1)
                m = Monomial.from_pairs(pairs + [(dj, 1)])
                c = coeff * exp
                s = out.get(m)
                if s is None:
                    out[m] = c
                else:
                    s = s + c
                    if s:
                        out[m] = s
                    else:
                        del out[m]
        return DiffPoly(out, self._space)

    def divexact(self, other, step_limit=None):
        """Exact quotient self/other, or None if other does not divide self."""
        if other.is_zero():
            raise ZeroDivisionExprError("polynomial division by zero")
        if other.is_const():
            return self.scale(1 / other.const_value())
        if self.is_zero():
            return _POLY_ZERO
        self._check_space(other)
        glm, glc = other.leading()
        glc = Fraction(glc)
        work = dict(self.terms)
        quot = {}
        if step_limit is None:
            step_limit = 8 * (len(self.terms) + len(other.terms)) + 64
        for _ in range(step_limit):
            if not work:
                return DiffPoly(quot, self._space)
            lm = max(work, key=mono_sort_key)
            if not glm.divides(lm):
                return None
            qm = lm.div(glm)
            qc = work[lm] / glc
            quot[qm] = quot.get(qm, Fraction(0)) + qc
            if quot[qm] == 0:
                del quot[qm]
            for m, c in other.terms.items():
                mm = m.mul(qm)
                s = work.get(mm, Fraction(0)) - c * qc
                if s:
                    work[mm] = s
                else:
                    work.pop(mm, None)
        return None

    def __eq__(self, other):
        return self is other or (isinstance(other, DiffPoly) and self.terms == other.terms)

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(tuple(sorted(
                ((m, c) for m, c in self.terms.items()),
                key=lambda t: mono_sort_key(t[0]))))
        return self._hash

    def __repr__(self):
        if not self.terms:
            return "DiffPoly(0)"
        bits = []
        for m, c in self.sorted_terms():
            bits.append(f"{c}*{m!r}")
        return "DiffPoly(" + " + ".join(bits) + ")"


_POLY_ZERO = DiffPoly({})
_POLY_ONE = DiffPoly({_MONO_UNIT: Fraction(1)})


def _monomial_gcd(polys):
    """Componentwise minimum exponent over every term of every polynomial."""
    common = None
    for p in polys:
        for mono in p.terms:
            if common is None:
                common = dict(mono.factors)
                continue
            nxt = {}
            for j, e in mono.factors:
                have = common.get(j)
                if have:
                    nxt[j] = min(have, e)
            common = nxt
            if not common:
                return _MONO_UNIT
    if not common:
        return _MONO_UNIT
    return Monomial.from_pairs(common.items())


def _divide_monomial(poly, mono):
    if not mono.factors:
        return poly
    return DiffPoly({m.div(mono): c for m, c in poly.terms.items()})


def _content(polys):
    """Positive rational content of the joint coefficient list."""
    num_gcd = 0
    den_lcm = 1
    for p in polys:
        for c in p.terms.values():
            num_gcd = gcd(num_gcd, abs(c.numerator))
            den_lcm = den_lcm * c.denominator // gcd(den_lcm, c.denominator)
    if num_gcd == 0:
        return Fraction(1)
    return Fraction(num_gcd, den_lcm)


def _intify(poly):
    """Store denominator-one coefficients as plain ints (exact, much faster)."""
    out = {}
    changed = False
    for m, c in poly.terms.items():
        if not isinstance(c, int) and c.denominator == 1:
            out[m] = c.numerator
            changed = True
        else:
            out[m] = c
    return DiffPoly(out) if changed else poly


# ---------------------------------------------------------------------------
# rational expressions


class RatExpr:
    """Normalized quotient of two differential polynomials.

    Invariants: den is nonzero; joint integer content of num and den is 1; the
    leading coefficient of den is positive; no monomial divides every term of
    both num and den; zero is canonically 0/1.
    """

    __slots__ = ("num", "den", "_hash")

    def __init__(self, num, den):
        # use RatExpr.make; this constructor trusts its arguments
        self.num = num
        self.den = den
        self._hash = None

    @staticmethod
    def make(num, den=_POLY_ONE):
        if den.is_zero():
            raise ZeroDivisionExprError("denominator is identically zero")
        num._check_space(den)
        if num.is_zero():
            return RatExpr(_POLY_ZERO, _POLY_ONE)
        g = _monomial_gcd([num])
        h = _monomial_gcd([den])
        common = {}
        for j, e in g.factors:
            k = h.exp_of(j)
            if k:
                common[j] = min(e, k)
        if common:
            m = Monomial.from_pairs(common.items())
            num = _divide_monomial(num, m)
            den = _divide_monomial(den, m)
        content = _content([num, den])
        _, dlc = den.leading()
        sign = 1 if dlc > 0 else -1
        scale = Fraction(sign) / content
        if scale != 1:
            num = num.scale(scale)
            den = den.scale(scale)
        # content-normalized coefficients are coprime integers; storing them
        # as plain ints keeps the hot polynomial loops off Fraction overhead
        return RatExpr(_intify(num), _intify(den))

    @staticmethod
    def const(c):
        c = Fraction(c)
        if c == 0:
            return RAT_ZERO
        return RatExpr(DiffPoly.const(c.numerator), DiffPoly.const(c.denominator))

    @staticmethod
    def from_jet(jet):
        return RatExpr(DiffPoly.from_jet(jet), _POLY_ONE)

    @staticmethod
    def from_poly(p):
        return RatExpr.make(p)

    def space(self):
        return self.num.space() or self.den.space()

    def is_zero(self):
        return self.num.is_zero()

    def is_const(self):
        return self.num.is_const() and self.den.is_const()

    def const_value(self):
        return self.num.const_value() / self.den.const_value()

    def jets(self):
        seen = set()
        for part in (self.num, self.den):
            for j in part.jets():
                if j not in seen:
                    seen.add(j)
                    yield j

    def term_count(self):
        return len(self.num.terms) + len(self.den.terms)

    # -- arithmetic --------------------------------------------------------

    @staticmethod
    def _coerce(x):
        if isinstance(x, RatExpr):
            return x
        if isinstance(x, (int, Fraction)):
            return RatExpr.const(x)
        if isinstance(x, JetVar):
            return RatExpr.from_jet(x)
        raise TypeError(f"cannot use {type(x).__name__} as a rational expression")

    def add(self, other):
        other = RatExpr._coerce(other)
        if self.is_zero():
            return other
        if other.is_zero():
            return self
        if self.den == other.den:
            return RatExpr.make(self.num.add(other.num), self.den)
        q = other.den.divexact(self.den)
        if q is not None:
            return RatExpr.make(self.num.mul(q).add(other.num), other.den)
        q = self.den.divexact(other.den)
        if q is not None:
            return RatExpr.make(self.num.add(other.num.mul(q)), self.den)
        return RatExpr.make(
            self.num.mul(other.den).add(other.num.mul(self.den)),
            self.den.mul(other.den))

    def neg(self):
        if self.is_zero():
            return self
        return RatExpr(self.num.neg(), self.den)

    def sub(self, other):
        return self.add(RatExpr._coerce(other).neg())

    def mul(self, other):
        other = RatExpr._coerce(other)
        if self.is_zero() or other.is_zero():
            return RAT_ZERO
        n1, d1 = self.num, self.den
        n2, d2 = other.num, other.den
        if not d2.is_const():
            q = n1.divexact(d2)
            if q is not None:
                n1, d2 = q, _POLY_ONE
        if not d1.is_const():
            q = n2.divexact(d1)
            if q is not None:
                n2, d1 = q, _POLY_ONE
        return RatExpr.make(n1.mul(n2), d1.mul(d2))

    def div(self, other):
        other = RatExpr._coerce(other)
        if other.is_zero():
            raise ZeroDivisionExprError("division by an identically zero expression")
        return self.mul(RatExpr.make(other.den, other.num))

    def inv(self):
        if self.is_zero():
            raise ZeroDivisionExprError("inverse of the zero expression")
        return RatExpr.make(self.den, self.num)

    def pow(self, k):
        if not isinstance(k, int):
            raise TypeError("exponent must be an integer")
        if k == 0:
            return RAT_ONE
        base = self
        if k < 0:
            if self.is_zero():
                raise ZeroDivisionExprError("zero base raised to a negative power")
            base = self.inv()
            k = -k
        out = None
        acc = base
        while k:
            if k & 1:
                out = acc if out is None else out.mul(acc)
            k >>= 1
            if k:
                acc = acc.mul(acc)
        return out

    def total_derivative(self, var):
        space = self.space()
        if space is not None and var not in space._var_pos:
            raise UnknownVariableError(
                f"variable {var!r} does not belong to space {space.name!r}")
        dn = self.num.total_derivative(var)
        if self.den.is_const():
            return RatExpr.make(dn, self.den)
        dd = self.den.total_derivative(var)
        if dd.is_zero():
            return RatExpr.make(dn, self.den)
        return RatExpr.make(
            dn.mul(self.den).sub(self.num.mul(dd)),
            self.den.mul(self.den))

    __add__ = add
    __radd__ = add
    __sub__ = sub
    __mul__ = mul
    __rmul__ = mul
    __truediv__ = div
    __pow__ = pow
    __neg__ = neg

    def __rsub__(self, other):
        return RatExpr._coerce(other).sub(self)

    def __rtruediv__(self, other):
        return RatExpr._coerce(other).div(self)

    def __eq__(self, other):
        if self is other:
            return True
        return (isinstance(other, RatExpr)
                and self.num == other.num and self.den == other.den)

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.num, self.den))
        return self._hash

    def __repr__(self):
        return f"RatExpr({self.num!r} / {self.den!r})"


RAT_ZERO = RatExpr(_POLY_ZERO, _POLY_ONE)
RAT_ONE = RatExpr(_POLY_ONE, _POLY_ONE)


# ---------------------------------------------------------------------------
# spec operations


def combine(kind, a, b):
    """Field arithmetic entry point: kind in {add, sub, mul, div, pow}."""
    a = RatExpr._coerce(a)
    if kind == "pow":
        if not isinstance(b, int):
            raise TypeError("pow exponent must be an integer")
        return a.pow(b)
    b = RatExpr._coerce(b)
    if kind == "add":
        return a.add(b)
    if kind == "sub":
        return a.sub(b)
    if kind == "mul":
        return a.mul(b)
    if kind == "div":
        return a.div(b)
    raise ValueError(f"unknown combine kind {kind!r}")


def total_derivative(e, var):
    return RatExpr._coerce(e).total_derivative(var)


def is_zero(e):
    return RatExpr._coerce(e).is_zero()


def equivalent(a, b):
    """Cross-multiplied equality: num(a)*den(b) - num(b)*den(a) == 0."""
    a = RatExpr._coerce(a)
    b = RatExpr._coerce(b)
    return a.num.mul(b.den).sub(b.num.mul(a.den)).is_zero()


class Cofactor:
    """Rational multiple of a monomial with integer (possibly negative) exponents."""

    __slots__ = ("coeff", "powers")

    def __init__(self, coeff, powers):
        self.coeff = Fraction(coeff)
        self.powers = tuple(sorted(powers, key=lambda p: p[0].sort_key()))

    def as_ratexpr(self):
        out = RatExpr.const(self.coeff)
        for jet, e in self.powers:
            out = out.mul(RatExpr.from_jet(jet).pow(e))
        return out

    def is_one(self):
        return self.coeff == 1 and not self.powers

    def text(self):
        bits = []
        if self.coeff != 1 or not self.powers:
            bits.append(str(self.coeff))
        for jet, e in self.powers:
            bits.append(jet.text() + (f"^{e}" if e != 1 else ""))
        return "*".join(bits)

    def __eq__(self, other):
        return (isinstance(other, Cofactor)
                and self.coeff == other.coeff and self.powers == other.powers)

    def __hash__(self):
        return hash((self.coeff, self.powers))

    def __repr__(self):
        return f"Cofactor({self.text()})"


def _strip(poly):
    """Split poly into (signed content, monomial gcd, primitive core)."""
    m = _monomial_gcd([poly])
    core = _divide_monomial(poly, m)
    content = _content([core])
    _, lc = core.leading()
    if lc < 0:
        content = -content
    core = core.scale(1 / content)
    return content, m, core


def proportional(a, b):
    """Cofactor c with a = c*b where c is rational times a monomial, else None.

    Pure-monomial inputs are proportional only by a rational factor: a lone
    jet is never reported as a monomial multiple of a different lone jet.
    """
    a = RatExpr._coerce(a)
    b = RatExpr._coerce(b)
    if a.is_zero() or b.is_zero():
        raise ZeroDivisionExprError("proportional() requires nonzero inputs")
    if a.den == b.den:
        f, g = a.num, b.num
    else:
        f = a.num.mul(b.den)
        g = b.num.mul(a.den)
    cf, mf, fcore = _strip(f)
    cg, mg, gcore = _strip(g)
    if fcore != gcore:
        return None
    if fcore.is_const() and mf != mg:
        return None
    powers = {j: e for j, e in mf.factors}
    for j, e in mg.factors:
        powers[j] = powers.get(j, 0) - e
    return Cofactor(cf / cg, [(j, e) for j, e in powers.items() if e])


def substitute_jet(e, jet, replacement):
    """Replace every occurrence of jet in e by the given expression (exactly)."""
    e = RatExpr._coerce(e)
    replacement = RatExpr._coerce(replacement)

    def sub_poly(poly):
        by_exp = {}
        for mono, coeff in poly.terms.items():
            k, rest = mono.without(jet)
            bucket = by_exp.setdefault(k, {})
            s = bucket.get(rest)
            if s is None:
                bucket[rest] = coeff
            else:
                s = s + coeff
                if s:
                    bucket[rest] = s
                else:
                    del bucket[rest]
        out = RAT_ZERO
        for k, bucket in sorted(by_exp.items()):
            part = RatExpr.make(DiffPoly(bucket))
            if k:
                part = part.mul(replacement.pow(k))
            out = out.add(part)
        return out

    num = sub_poly(e.num)
    den = sub_poly(e.den)
    return num.div(den)


# ---------------------------------------------------------------------------
# seeded random expressions (shared by property tests and commutation checks)


def random_jet(space, rng, max_order=2):
    field = rng.choice(space.fields)
    orders = [0] * len(field.deps)
    for _ in range(rng.randrange(0, max_order + 1)):
        orders[rng.randrange(len(field.deps))] += 1
    return JetVar(field, tuple(orders))


def random_expr(space, rng, max_terms=3, max_factors=2, max_order=2, rational=False):
    """Small random expression over the given space, deterministic in rng."""
    terms = {}
    for _ in range(rng.randrange(1, max_terms + 1)):
        pairs = {}
        for _ in range(rng.randrange(1, max_factors + 1)):
            j = random_jet(space, rng, max_order)
            pairs[j] = pairs.get(j, 0) + rng.randrange(1, 3)
        mono = Monomial.from_pairs(pairs.items())
        coeff = Fraction(rng.choice([-3, -2, -1, 1, 2, 3]), rng.choice([1, 1, 2]))
        terms[mono] = terms.get(mono, Fraction(0)) + coeff
    terms = {m: c for m, c in terms.items() if c}
    num = DiffPoly(terms) if terms else DiffPoly.const(rng.choice([1, 2]))
    e = RatExpr.make(num)
    if rational and rng.random() < 0.5:
        j = random_jet(space, rng, 1)
        e = e.div(RatExpr.from_jet(j).add(RatExpr.const(rng.choice([1, 2, 3]))))
    return e
