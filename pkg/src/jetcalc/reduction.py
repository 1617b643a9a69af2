"""Oriented rewrite systems and reduction to normal form.

An equation whose residual is linear in a chosen leading jet is oriented into
a rule lead -> rhs; reduction replaces every jet that dominates a rule's lead
(a prolongation: total derivatives of both sides) by the correspondingly
derived rhs, until no jet in the expression matches.  The jet ranking is
lexicographic on (evolution-variable derivative orders, remaining total
order, field priority, multi-index); rules are validated so every rewrite
strictly lowers the ranked jets present, which gives termination.  Confluence
is not proven: the default strategy is deterministic (highest-ranked matching
jet first), and shuffle mode reruns with a randomized pick to surface any
order dependence.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import hierarchies as hier
from .diffalg import DiffAlgError, DiffPoly, JetVar, RatExpr, substitute_jet

DEFAULT_STEP_CAP = 10_000


class ReductionError(DiffAlgError):
    """Base class for orientation/reduction failures."""


class LeadAbsentError(ReductionError):
    pass


class NonlinearLeadError(ReductionError):
    pass


class RankingViolationError(ReductionError):
    """A rule's right side contains a jet ranked at or above its lead."""


class StepCapError(ReductionError):
    """Reduction exceeded the step cap; reported as non-termination."""

    def __init__(self, message, trace):
        super().__init__(message + "; last rewrites: " + ", ".join(trace))
        self.trace = tuple(trace)


class JetRanking:
    """Ranking key: (evolution orders, remaining total order, field priority,
    multi-index).  Evolution variables default to the space's declaration
    (T on CH, t on Q, T_n..T_1 on the reciprocal plane)."""

    def __init__(self, space, evolution=None):
        self.space = space
        self.evolution = tuple(evolution) if evolution is not None else space.evolution_vars

    def key(self, jet):
        evo = tuple(jet.order_of(v) for v in self.evolution)
        rest = jet.total - sum(evo)
        return (evo, rest, -jet.field.prio, jet.orders)

    def higher(self, a, b):
        return self.key(a) > self.key(b)


@dataclass(frozen=True)
class RewriteRule:
    lead: JetVar
    rhs: RatExpr
    origin: str


def orient(eq, lead):
    """Solve eq's residual for a linearly occurring jet, yielding a rule."""
    residual = eq.residual if isinstance(eq, hier.Equation) else RatExpr._coerce(eq)
    origin = eq.label if isinstance(eq, hier.Equation) else "<expr>"
    for jet in residual.den.jets():
        if jet == lead:
            raise NonlinearLeadError(
                f"{lead.text()} occurs in the denominator of {origin}")
    coeff_terms = {}
    rest_terms = {}
    for mono, c in residual.num.terms.items():
        k, remainder = mono.without(lead)
        if k == 0:
            rest_terms[remainder] = rest_terms.get(remainder, 0) + c
        elif k == 1:
            if any(j == lead for j in remainder.jets()):
                raise NonlinearLeadError(
                    f"{lead.text()} occurs nonlinearly in {origin}")
            coeff_terms[remainder] = coeff_terms.get(remainder, 0) + c
        else:
            raise NonlinearLeadError(
                f"{lead.text()} occurs with exponent {k} in {origin}")
    if not coeff_terms:
        raise LeadAbsentError(f"{lead.text()} is absent from {origin}")
    coeff = DiffPoly({m: c for m, c in coeff_terms.items() if c})
    rest = DiffPoly({m: c for m, c in rest_terms.items() if c})
    if coeff.is_zero():
        raise LeadAbsentError(
            f"solved coefficient of {lead.text()} in {origin} is identically zero")
    # the residual's denominator scales the lead coefficient and the remainder
    # identically, so the solved form is simply -rest/coeff
    rhs = RatExpr.make(rest.neg(), coeff)
    ranking = JetRanking(lead.field.space)
    for jet in rhs.jets():
        if ranking.key(jet) >= ranking.key(lead):
            raise RankingViolationError(
                f"rule for {lead.text()} from {origin} has {jet.text()} "
                "at or above the lead in the ranking")
    return RewriteRule(lead, rhs, origin)


class RewriteSystem:
    """Oriented rules with on-demand prolongation and a step cap."""

    def __init__(self, rules, ranking, step_cap=DEFAULT_STEP_CAP):
        self.rules = tuple(rules)
        self.ranking = ranking
        self.step_cap = step_cap
        self._prolonged = {}
        for rule in self.rules:
            for jet in rule.rhs.jets():
                if ranking.key(jet) >= ranking.key(rule.lead):
                    raise RankingViolationError(
                        f"rule {rule.origin}: {jet.text()} >= lead {rule.lead.text()}")

    def match_all(self, jet):
        return [rule for rule in self.rules if jet.dominates(rule.lead)]

    def match(self, jet):
        """The rule whose (prolongable) lead matches jet; highest lead wins."""
        best = None
        for rule in self.rules:
            if jet.dominates(rule.lead):
                if best is None or self.ranking.higher(rule.lead, best.lead):
                    best = rule
        return best

    def prolonged_rhs(self, rule, jet):
        """rhs of the rule prolonged so that its lead equals jet."""
        cached = self._prolonged.get((rule.lead, jet))
        if cached is not None:
            return cached
        if jet == rule.lead:
            rhs = rule.rhs
        else:
            for var, have, want in zip(jet.field.deps, rule.lead.orders, jet.orders):
                if want > have:
                    lower = jet.lowered(var)
                    rhs = self.prolonged_rhs(rule, lower).total_derivative(var)
                    break
            else:
                raise ValueError("prolongation does not dominate the rule lead")
            key = self.ranking.key(jet)
            for j in rhs.jets():
                if self.ranking.key(j) >= key:
                    raise RankingViolationError(
                        f"prolonged rule for {jet.text()} contains {j.text()}")
        self._prolonged[(rule.lead, jet)] = rhs
        return rhs

    def reduce(self, e, rng=None):
        """Rewrite to normal form: no jet of the result matches any rule.

        Deterministic strategy: replace all occurrences of the highest-ranked
        matching jet, repeat.  With rng given (shuffle mode), the jet and the
        rule applied to it are chosen at random instead.
        """
        e = RatExpr._coerce(e)
        steps = 0
        trace = []
        while True:
            if rng is None:
                jet = None
                for j in e.jets():
                    rule_j = self.match(j)
                    if rule_j is not None and (jet is None or self.ranking.higher(j, jet)):
                        jet, rule = j, rule_j
                if jet is None:
                    return e
            else:
                candidates = [(j, r) for j in e.jets() for r in self.match_all(j)]
                if not candidates:
                    return e
                jet, rule = candidates[rng.randrange(len(candidates))]
            rhs = self.prolonged_rhs(rule, jet)
            e = substitute_jet(e, jet, rhs)
            steps += 1
            trace.append(jet.text())
            if steps > self.step_cap:
                raise StepCapError(
                    f"reduction exceeded {self.step_cap} steps", trace[-12:])


def reduce(sys, e, rng=None):
    return sys.reduce(e, rng=rng)


def ch_system(n, step_cap=DEFAULT_STEP_CAP):
    """Rules P_T -> ..., Omega^(i)_XXX -> ..., Omega^(n)_XX -> ... ."""
    eqs = hier.gen_ch(n)
    space = hier.ch_space(n)
    rules = [orient(eqs[0], space.jet("P", T=1))]
    for i in range(1, n):
        rules.append(orient(eqs[i], space.jet("Omega", i, X=3)))
    rules.append(orient(eqs[n], space.jet("Omega", n, X=2)))
    return RewriteSystem(rules, JetRanking(space), step_cap)


def bcbs_system(n, step_cap=DEFAULT_STEP_CAP):
    """Rules X_{T0,T(i+1)} solved from the transformed CH equations."""
    if n < 2:
        raise ValueError("the transformed system needs n >= 2")
    fam = hier.gen_cbs_family(n)
    space = hier.r_space(n)
    rules = []
    for i, eq in enumerate(fam.bcbs, start=1):
        lead = space.jet("X", T0=1, **{f"T{i + 1}": 1})
        rules.append(orient(eq, lead))
    return RewriteSystem(rules, JetRanking(space), step_cap)


def standard_systems(which, n, step_cap=DEFAULT_STEP_CAP):
    """The two named systems the verification procedures reduce against."""
    which = which.upper()
    if which == "CH":
        return ch_system(n, step_cap)
    if which == "BCBS":
        return bcbs_system(n, step_cap)
    raise ValueError(f"unknown standard system {which!r}")
