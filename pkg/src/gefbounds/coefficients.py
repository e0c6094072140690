"""Exact re-derivation of the bound coefficients.

Bounds are linear forms over aggregate quantities (sum of triple
entropies, sum of pair EoFs, ...). A chain starts from a GEF definition and
replaces one aggregate at a time by a lemma: an upper bound may only be
substituted where the coefficient is nonnegative when deriving an upper
bound, and likewise for lower bounds. Coefficients are affine in the
symbol g2 and use ``Fraction`` throughout, so every comparison with a
printed value is exact.

Lemmas over sums are built by counting how often each subsystem occurs
(for example each pair lies in two of the four triples), not typed in.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations

F = Fraction

S1, S2, S3, E2, G3 = "S1", "S2", "S3", "E2", "G3"
NAMES = {
    S1: "sum S(singles)",
    S2: "sum S(pairs)",
    S3: "sum S(triples)",
    E2: "sum E_F(pairs)",
    G3: "sum E_GF(triples)",
}


@dataclass(frozen=True)
class Affine:
    """c + g * g2 with exact rational parts."""

    c: Fraction = F(0)
    g: Fraction = F(0)

    def __add__(self, other: "Affine") -> "Affine":
        return Affine(self.c + other.c, self.g + other.g)

    def scale(self, k) -> "Affine":
        if isinstance(k, Affine):
            if k.g and self.g:
                raise ValueError("product would be quadratic in g2")
            return Affine(self.c * k.c, self.c * k.g + self.g * k.c)
        return Affine(self.c * k, self.g * k)

    def is_nonnegative(self) -> bool:
        # g2 >= 0 throughout, so both parts nonnegative suffices
        return self.c >= 0 and self.g >= 0

    def __str__(self):
        if not self.g:
            return str(self.c)
        if not self.c:
            return f"{self.g}*g2"
        return f"{self.c} + {self.g}*g2"


def const(x) -> Affine:
    return Affine(F(x))


Form = dict  # symbol -> Affine


def _clean(form: Form) -> Form:
    return {k: v for k, v in form.items() if v != Affine()}


def _add(a: Form, b: Form) -> Form:
    out = dict(a)
    for k, v in b.items():
        out[k] = out.get(k, Affine()) + v
    return _clean(out)


@dataclass(frozen=True)
class Lemma:
    """``symbol`` <= ``bound`` (direction 'upper') or >= (direction 'lower')."""

    name: str
    symbol: str
    direction: str
    bound: Form


def substitute(form: Form, lemma: Lemma, goal: str) -> Form:
    """Replace ``lemma.symbol`` in a bound of direction ``goal``.

    Upper-bounding a positive coefficient needs an upper lemma; a lower
    bound needs a lower lemma. Identities ('eq') work in both directions.
    """
    coef = form.get(lemma.symbol)
    if coef is None:
        raise KeyError(f"{lemma.symbol} does not occur in the form")
    if lemma.direction != "eq":
        if not coef.is_nonnegative():
            raise ValueError(f"coefficient of {lemma.symbol} is not nonnegative")
        if lemma.direction != goal:
            raise ValueError(f"{lemma.name} bounds {lemma.symbol} in the wrong direction")
    rest = {k: v for k, v in form.items() if k != lemma.symbol}
    return _add(rest, {k: v.scale(coef) for k, v in lemma.bound.items()})


# ----------------------------------------------------------------------------
# lemmas by multiplicity counting


def _count(parties: int, inner: int, outer: int) -> Fraction:
    """How many size-``outer`` subsets contain a fixed size-``inner`` subset."""
    return F(sum(1 for s in combinations(range(parties), outer)
                 if set(range(inner)) <= set(s)))


def tri_upper_summed(parties: int = 4) -> Lemma:
    """Per-triple upper bound (1/6) sum S(pairs) + (1/3) sum S(singles), summed."""
    return Lemma("tri upper bound summed over triples", G3, "upper", {
        S2: const(F(1, 6) * _count(parties, 2, 3)),
        S1: const(F(1, 3) * _count(parties, 1, 3)),
    })


def eof_by_entropy(parties: int) -> Lemma:
    """E_F(XY) <= (S(X) + S(Y)) / 2 summed over all pairs."""
    return Lemma("E_F(XY) <= mean(S(X), S(Y)), summed", E2, "upper",
                 {S1: const(F(1, 2) * _count(parties, 1, 2))})


def entropy_dominates_eof(parties: int) -> Lemma:
    """Same inequality read as a lower bound on sum S(singles)."""
    return Lemma("sum S(singles) >= sum E_F(pairs) / c", S1, "lower",
                 {E2: const(1 / (F(1, 2) * _count(parties, 1, 2)))})


F1_UPPER = Lemma("F1", S1, "upper", {S2: const(F(2, 3))})
F1_LOWER = Lemma("F1 read as a bound on pairs", S2, "lower", {S1: const(F(3, 2))})
F3_UPPER = Lemma("F3", S3, "upper", {S2: const(F(4, 3)), S1: const(-1)})
T3_LOWER = Lemma("T3", S2, "lower", {S1: const(1)})
PURE4_TRIPLES = Lemma("pure: S(XYZ) = S(complement)", S3, "eq", {S1: const(1)})
PURE3_SINGLES = Lemma("pure: S(X) = S(YZ)", S1, "eq", {S2: const(1)})
PURE3_PAIRS = Lemma("pure: S(YZ) = S(X)", S2, "eq", {S1: const(1)})
FS_LOWER = Lemma("sum E_GF(triples) >= 2(1+g2)/3 sum E_F(pairs)", G3, "lower",
                 {E2: Affine(F(2, 3), F(2, 3))})


# ----------------------------------------------------------------------------
# chains

TRI_ORIGINAL = {E2: const(F(1, 6)), S2: const(F(1, 6)), S1: const(F(1, 6))}
TRI_MODIFIED = {E2: const(F(1, 3)), S2: const(F(1, 6)), S1: const(F(1, 6))}
FOUR = {G3: const(F(1, 14)), E2: const(F(1, 14)), S3: const(F(1, 14)),
        S2: const(F(1, 14)), S1: const(F(1, 14))}

# the printed values every chain step has to reproduce
PRINTED = {
    "P3U": {S2: const(F(1, 6)), S1: const(F(1, 3))},
    "P3L": {E2: const(F(1, 6)), S1: const(F(1, 3))},
    "P3U2": {S2: const(F(1, 2))},
    "P3L2": {E2: const(F(1, 2))},
    "B3U": {S2: const(F(2, 3))},
    "B3L": {E2: const(F(2, 3))},
    "P4U1": {S3: const(F(1, 14)), S2: const(F(2, 21)), S1: const(F(1, 4))},
    "P4U2": {S2: const(F(4, 21)), S1: const(F(5, 28))},
    "P4U3": {S2: const(F(13, 42))},
    "P4L1": {E2: Affine(F(5, 42), F(2, 42))},
    "P4L2": {E2: Affine(F(5, 42), F(2, 42)), S1: const(F(1, 4))},
    "P4L3": {E2: Affine(F(2, 7), F(1, 21))},
}


@dataclass(frozen=True)
class Step:
    name: str
    derived: Form
    expected: Form
    via: tuple[str, ...]

    @property
    def ok(self) -> bool:
        return _clean(self.derived) == _clean(self.expected)


@dataclass(frozen=True)
class CoefficientReport:
    steps: tuple[Step, ...]
    notes: tuple[str, ...]

    @property
    def ok(self) -> bool:
        return all(s.ok for s in self.steps)


def _restrict(form: Form, symbols) -> Form:
    return {k: v for k, v in form.items() if k in symbols}


def derive_coefficients() -> CoefficientReport:
    steps = []

    def chain(name, form, lemmas, goal, keep=None):
        for lem in lemmas:
            form = substitute(form, lem, goal)
        derived = form if keep is None else _restrict(form, keep)
        steps.append(Step(name, derived, PRINTED[name], tuple(l.name for l in lemmas)))
        return form

    # tri-party, original definition
    chain("P3U", TRI_ORIGINAL, [eof_by_entropy(3)], "upper")
    chain("P3L", TRI_ORIGINAL, [T3_LOWER], "lower")
    chain("P3U2", TRI_ORIGINAL, [eof_by_entropy(3), PURE3_SINGLES], "upper")
    chain("P3L2", TRI_ORIGINAL, [PURE3_SINGLES, PURE3_PAIRS, entropy_dominates_eof(3)], "lower")
    # tri-party, modified definition
    chain("B3U", TRI_MODIFIED, [eof_by_entropy(3), PURE3_SINGLES], "upper")
    chain("B3L", TRI_MODIFIED, [PURE3_SINGLES, PURE3_PAIRS, entropy_dominates_eof(3)], "lower")

    # four-party upper chain
    f = chain("P4U1", FOUR, [tri_upper_summed(4), eof_by_entropy(4)], "upper")
    f = chain("P4U2", f, [F3_UPPER], "upper")
    chain("P4U3", f, [F1_UPPER], "upper")

    # four-party lower chain
    f = chain("P4L1", FOUR, [FS_LOWER], "lower", keep={E2})
    f = chain("P4L2", f, [PURE4_TRIPLES, F1_LOWER], "lower")
    chain("P4L3", f, [entropy_dominates_eof(4)], "lower")

    entropy_part = _restrict(substitute(FOUR, PURE4_TRIPLES, "lower"), {S1, S2})
    notes = (
        "P4L1 entropy term: the expected 1/6 * sum S(pairs) does not follow. The entropy part "
        f"is {fmt_form(entropy_part)}, and reaching 1/6 * sum S(pairs) needs "
        "sum S(singles) >= 2/3 * sum S(pairs), the reverse of F1. "
        "Bell(AB) x Bell(CD) violates that intermediate form.",
    )
    return CoefficientReport(tuple(steps), notes)


ORDER = (G3, S3, E2, S2, S1)


def fmt_form(form: Form) -> str:
    parts = [f"{form[k]} * {NAMES[k]}" for k in ORDER if k in form]
    return " + ".join(parts) if parts else "0"


def fmt_coefficients(form: Form) -> str:
    return " ".join(str(form[k]) for k in ORDER if k in form)
