"""Coordinate/field changes as derivation maps, and transport along them.

A DerivationMap sends designated source jets to target expressions and each
source direction to a derivation of the target space (a coefficient-weighted
sum of target total derivatives).  Transport is the induced differential-ring
homomorphism: higher source jets are reached by applying the derivation
images to the designated images, so an equation can be pushed through a
reciprocal or Miura change without ever integrating.

Five named maps are built here:

  R_CH  CH space -> R space   reciprocal change dT0 = P dX - (1/2) P Omega^(1) dT
  R_Q   Q space  -> R space   reciprocal change dT0 = u dx - u w^(1) dt
  B_CH  R space  -> CH space  partial inverse (d_{Ti}, i >= 2 undefined)
  B_Q   R space  -> Q space   partial inverse (d_{Ti}, i >= 2 undefined)
  C_MR  Q space  -> CH space  composite Miura-reciprocal change

plus two internal composites used by the claim runner: back_mix_map (R -> MR,
both partial inverses sharing the reciprocal-plane derivations) and
miura_mix_map (MR -> CH, C_MR extended identically on the CH fields).

Bare v^(i) has no image under R_Q and C_MR: v enters the reciprocal picture
only through v_x = (1/u) w_x, so v^(i)_x is the designated minimal jet and
equations containing bare v must be differentiated once in x first.  The
integration constant in u w^(i+1) = v^(i) - v^(i)_xx is fixed to zero.
"""

from __future__ import annotations

import random
from fractions import Fraction

from . import hierarchies as hier
from .diffalg import DiffAlgError, RatExpr, random_expr, total_derivative


class TransportError(DiffAlgError):
    """Base class for transport failures."""


class BelowDesignatedJetError(TransportError):
    """A source jet lies below the field's designated minimal imaged jet."""


class UndefinedDerivationError(TransportError):
    """The map does not define the required source direction."""


class DerivationMap:
    """Field images plus first-order derivation images per source variable.

    field_images maps a designated JetVar (usually the order-0 jet, but e.g.
    v^(i)_x for the Qiao auxiliary fields) to a target expression.  op_images
    maps each covered source variable to a tuple of (coefficient, target
    variable) pairs defining a derivation of the target space.
    """

    def __init__(self, name, source, target, field_images, op_images):
        self.name = name
        self.source = source
        self.target = target
        self.field_images = dict(field_images)
        self.op_images = {v: tuple(pairs) for v, pairs in op_images.items()}
        for jet in self.field_images:
            if jet.field.space.name != source.name:
                raise ValueError(f"image key {jet.text()} is not a {source.name} jet")
        for v, pairs in self.op_images.items():
            if v not in source.vars:
                raise ValueError(f"{v!r} is not a variable of {source.name}")
            for _coeff, tv in pairs:
                if tv not in target.vars:
                    raise ValueError(f"{tv!r} is not a variable of {target.name}")
        self._designated = {}
        for jet in self.field_images:
            key = (jet.field.name, jet.field.index)
            self._designated.setdefault(key, []).append(jet)
        for jets in self._designated.values():
            # prefer bases carrying the later directions, so the derivation
            # route spends its excess on the earliest variables (e.g. the
            # partial inverses reach X_{T0,Ti} from X_{Ti} via d_{T0} alone,
            # which is the route valid off-shell)
            jets.sort(key=lambda j: tuple(reversed(j.orders)), reverse=True)
        self._jet_cache = {}

    def derive(self, expr, var):
        """Apply the derivation image of the source direction var."""
        pairs = self.op_images.get(var)
        if pairs is None:
            raise UndefinedDerivationError(
                f"map {self.name} does not define the direction d_{var}")
        out = RatExpr.const(0)
        for coeff, tv in pairs:
            out = out.add(coeff.mul(total_derivative(expr, tv)))
        return out

    def jet_image(self, jet):
        cached = self._jet_cache.get(jet)
        if cached is not None:
            return cached
        image = self.field_images.get(jet)
        if image is None:
            bases = self._designated.get((jet.field.name, jet.field.index))
            if not bases:
                raise BelowDesignatedJetError(
                    f"map {self.name} has no image for field {jet.field.label()}")
            base = next((b for b in bases if jet.dominates(b)), None)
            if base is None:
                raise BelowDesignatedJetError(
                    f"jet {jet.text()} lies below every designated jet of field "
                    f"{jet.field.label()} under map {self.name}")
            for var, have, want in zip(jet.field.deps, base.orders, jet.orders):
                if want > have:
                    image = self.derive(self.jet_image(jet.lowered(var)), var)
                    break
            else:
                raise AssertionError("dominating jet with no excess order")
        self._jet_cache[jet] = image
        return image

    def transport(self, e):
        """Push e (over the source space) to the target space homomorphically."""
        e = RatExpr._coerce(e)
        space = e.space()
        if space is not None and space.name != self.source.name:
            raise TransportError(
                f"map {self.name} transports {self.source.name} expressions, "
                f"got {space.name}")

        def poly_image(poly):
            out = RatExpr.const(0)
            for mono, coeff in poly.sorted_terms():
                part = RatExpr.const(coeff)
                for jet, exp in mono.factors:
                    part = part.mul(self.jet_image(jet).pow(exp))
                out = out.add(part)
            return out

        num = poly_image(e.num)
        den = poly_image(e.den)
        return num.div(den)

    def __repr__(self):
        return f"DerivationMap({self.name}: {self.source.name} -> {self.target.name})"


def transport(m, e):
    return m.transport(e)


def _rx(space, name, index=None, **orders):
    return space.expr(name, index, **orders)


def build_map(which, n):
    """Construct one of the five named maps for hierarchy size n."""
    hier._check_n(n)
    chs, qs, rs = hier.ch_space(n), hier.q_space(n), hier.r_space(n)
    one = RatExpr.const(1)
    if which == "R_CH":
        x0 = _rx(rs, "X", T0=1)
        field_images = {chs.jet("P"): one.div(x0)}
        for i in range(1, n + 1):
            field_images[chs.jet("Omega", i)] = 2 * _rx(rs, "X", **{f"T{i}": 1})
        op_images = {
            "X": ((one.div(x0), "T0"),),
            "T": ((one, "T1"), ((-_rx(rs, "X", T1=1)).div(x0), "T0")),
        }
        return DerivationMap("R_CH", chs, rs, field_images, op_images)
    if which == "R_Q":
        x0 = _rx(rs, "x", T0=1)
        field_images = {qs.jet("u"): one.div(x0)}
        for i in range(1, n + 1):
            field_images[qs.jet("w", i)] = _rx(rs, "x", **{f"T{i}": 1})
            field_images[qs.jet("v", i, x=1)] = _rx(rs, "x", T0=1, **{f"T{i}": 1})
        op_images = {
            "x": ((one.div(x0), "T0"),),
            "t": ((one, "T1"), ((-_rx(rs, "x", T1=1)).div(x0), "T0")),
        }
        return DerivationMap("R_Q", qs, rs, field_images, op_images)
    if which == "B_CH":
        P = _rx(chs, "P")
        field_images = {rs.jet("X", T0=1): one.div(P)}
        for i in range(1, n + 1):
            field_images[rs.jet("X", **{f"T{i}": 1})] = \
                Fraction(1, 2) * _rx(chs, "Omega", i)
        op_images = {
            "T0": ((one.div(P), "X"),),
            "T1": ((one, "T"), (Fraction(1, 2) * _rx(chs, "Omega", 1), "X")),
        }
        return DerivationMap("B_CH", rs, chs, field_images, op_images)
    if which == "B_Q":
        u = _rx(qs, "u")
        field_images = {rs.jet("x", T0=1): one.div(u)}
        for i in range(1, n + 1):
            field_images[rs.jet("x", **{f"T{i}": 1})] = _rx(qs, "w", i)
        op_images = {
            "T0": ((one.div(u), "x"),),
            "T1": ((one, "t"), (_rx(qs, "w", 1), "x")),
        }
        return DerivationMap("B_Q", rs, qs, field_images, op_images)
    if which == "C_MR":
        P = _rx(chs, "P")
        px = _rx(chs, "P", X=1)
        gap = P - px
        field_images = {qs.jet("u"): (P * P).div(gap)}
        for i in range(1, n + 1):
            wi = _rx(chs, "Omega", i)
            field_images[qs.jet("w", i)] = \
                Fraction(1, 2) * (_rx(chs, "Omega", i, X=1) + wi)
            field_images[qs.jet("v", i, x=1)] = \
                (_rx(chs, "Omega", i, X=2) + _rx(chs, "Omega", i, X=1)).div(2 * P)
        op_images = {
            "x": ((P.div(gap), "X"),),
            "t": ((one, "T"), (_rx(chs, "P", T=1).div(gap), "X")),
        }
        return DerivationMap("C_MR", qs, chs, field_images, op_images)
    raise ValueError(f"unknown map selector {which!r}")


def back_mix_map(n):
    """B_CH and B_Q fused on the mixed space, sharing the R-space derivations."""
    rs, ms = hier.r_space(n), hier.mr_space(n)
    one = RatExpr.const(1)
    P = _rx(ms, "P")
    u = _rx(ms, "u")
    field_images = {
        rs.jet("X", T0=1): one.div(P),
        rs.jet("x", T0=1): one.div(u),
    }
    for i in range(1, n + 1):
        field_images[rs.jet("X", **{f"T{i}": 1})] = Fraction(1, 2) * _rx(ms, "Omega", i)
        field_images[rs.jet("x", **{f"T{i}": 1})] = _rx(ms, "w", i)
    op_images = {
        "T0": ((one.div(P), "X"), (one.div(u), "x")),
        "T1": ((one, "T"), (Fraction(1, 2) * _rx(ms, "Omega", 1), "X"),
               (one, "t"), (_rx(ms, "w", 1), "x")),
    }
    return DerivationMap("B_MIX", rs, ms, field_images, op_images)


def miura_mix_map(n):
    """C_MR extended to the mixed space, identical on the CH fields."""
    ms, chs = hier.mr_space(n), hier.ch_space(n)
    one = RatExpr.const(1)
    P = _rx(chs, "P")
    gap = P - _rx(chs, "P", X=1)
    field_images = {ms.jet("P"): P, ms.jet("u"): (P * P).div(gap)}
    for i in range(1, n + 1):
        field_images[ms.jet("Omega", i)] = _rx(chs, "Omega", i)
        field_images[ms.jet("w", i)] = \
            Fraction(1, 2) * (_rx(chs, "Omega", i, X=1) + _rx(chs, "Omega", i))
        field_images[ms.jet("v", i, x=1)] = \
            (_rx(chs, "Omega", i, X=2) + _rx(chs, "Omega", i, X=1)).div(2 * P)
    op_images = {
        "X": ((one, "X"),),
        "T": ((one, "T"),),
        "x": ((P.div(gap), "X"),),
        "t": ((one, "T"), (_rx(chs, "P", T=1).div(gap), "X")),
    }
    return DerivationMap("C_MR_MIX", ms, chs, field_images, op_images)


MAP_NAMES = ("R_CH", "R_Q", "B_CH", "B_Q", "C_MR")


def commutation_pairs(m):
    """Direction pairs that can ever compose on one jet: both directions must
    be defined by the map and belong to one source field's dependencies."""
    pairs = set()
    for f in m.source.fields:
        deps = [v for v in f.deps if v in m.op_images]
        for i in range(len(deps)):
            for j in range(i + 1, len(deps)):
                pairs.add((deps[i], deps[j]))
    return sorted(pairs)


def check_commutation(m, trials, seed, modulo=None):
    """True iff the derivation images commute on `trials` random target
    expressions (exact symbolic zero test) for every direction pair that can
    act on a common field.

    The partial inverse maps commute only on solutions of their hierarchy's
    conservative-form equation (the paper's d^2 T0 = 0), so callers pass the
    corresponding oriented rule via `modulo`; the forward and composite maps
    commute identically and need no modulus.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = random.Random(seed)
    pairs = commutation_pairs(m)
    for _ in range(trials):
        f = random_expr(m.target, rng, max_terms=3, max_factors=2, max_order=2)
        for a, b in pairs:
            comm = m.derive(m.derive(f, b), a).sub(m.derive(m.derive(f, a), b))
            if modulo is not None:
                comm = modulo.reduce(comm)
            if not comm.is_zero():
                return False
    return True
