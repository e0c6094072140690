"""Registry of the entropy and GEF inequalities, evaluated on concrete states.

Every entry is normalized to ``lhs <= rhs`` and reports ``slack = rhs - lhs``.
Roof values are upper estimates of the true convex roof, which makes the
verdict asymmetric:

* estimate on the lhs (an upper bound is being checked): a small enough
  estimate proves the inequality, a large one proves nothing
  (``inconclusive``);
* estimate on the rhs (a lower bound is being checked): the true value is
  at most the estimate, so an estimate below the bound is a genuine
  violation, while clearing the bound is only a necessary condition.

Exact quantities compare plainly.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass
from itertools import combinations
from typing import Callable

import numpy as np

from .gef import (INNER_ROOF, MODIFIED, ORIGINAL, PAIRS4, TRIPLES4, aggregate_gamma2,
                  diagnostics, gamma2_parts, gef_mixed_four, gef_mixed_tri, gef_pure_four,
                  gef_pure_tri, pair_eof)
from .measures import _entropy
from .qmat import DensityMatrix, PureState, _ptrace, _reduce_pure, label
from .roof import RoofConfig

HOLDS, VIOLATED, INCONCLUSIVE, SKIPPED = "holds", "violated", "inconclusive", "skipped"

EXACT_TOL = 1e-8
ESTIMATE_TOL = 1e-3


class Skip(Exception):
    """Raised by an evaluator when the entry cannot be evaluated on a state."""


def verdict(slack: float, lhs_estimate: bool, rhs_estimate: bool, tol: float) -> str:
    if slack >= -tol:
        return HOLDS
    if lhs_estimate:
        return INCONCLUSIVE
    return VIOLATED


@dataclass(frozen=True)
class InequalityRecord:
    id: str
    lhs: float
    rhs: float
    slack: float
    verdict: str
    lhs_estimate: bool
    rhs_estimate: bool
    tol: float
    digest: str
    detail: str = ""


def state_digest(state) -> str:
    data = state.amplitudes if isinstance(state, PureState) else state.matrix
    h = hashlib.sha256(repr(tuple(state.dims)).encode())
    h.update(np.ascontiguousarray(data).tobytes())
    return h.hexdigest()[:16]


# ----------------------------------------------------------------------------
# lazily evaluated quantities of one state


class StateContext:
    """Caches subsystem entropies, EoFs and roofs for one state."""

    def __init__(self, state, cfg: RoofConfig | None = None, inner: RoofConfig | None = None):
        self.state = state
        self.pure = isinstance(state, PureState)
        self.dims = state.dims
        self.n = len(state.dims)
        self.cfg = cfg or RoofConfig()
        self.inner = inner or INNER_ROOF
        self._cache = {}

    def _memo(self, key, fn):
        if key not in self._cache:
            self._cache[key] = fn()
        return self._cache[key]

    def reduced(self, sub) -> np.ndarray:
        sub = tuple(sub)
        if self.pure:
            return _reduce_pure(self.state.amplitudes, self.dims, sub)
        if len(sub) == self.n:
            return self.state.matrix
        return _ptrace(self.state.matrix, self.dims, sub)

    def reduced_state(self, sub) -> DensityMatrix:
        return DensityMatrix(self.reduced(sub), tuple(self.dims[k] for k in sub))

    def S(self, sub) -> float:
        sub = tuple(sub)
        if self.pure and len(sub) == self.n:
            return 0.0
        return self._memo(("S", sub), lambda: float(_entropy(self.reduced(sub))))

    def sum_S(self, size: int, parties=None) -> float:
        parties = parties or tuple(range(self.n))
        return sum(self.S(s) for s in combinations(parties, size))

    def eof(self, pair) -> tuple[float, bool]:
        pair = tuple(pair)
        idx = list(combinations(range(self.n), 2)).index(pair)

        def compute():
            value, est, _ = pair_eof(self.reduced_state(pair), self.cfg.child(100 + idx))
            return value, est
        return self._memo(("E", pair), compute)

    def sum_eof(self, parties=None) -> tuple[float, bool]:
        parties = parties or tuple(range(self.n))
        vals = [self.eof(p) for p in combinations(parties, 2)]
        return sum(v for v, _ in vals), any(e for _, e in vals)

    # tri-party

    def gef3_pure(self, definition: str = ORIGINAL):
        return self._memo(("gef3", definition), lambda: gef_pure_tri(self.state, self.cfg, definition))

    def roof3(self):
        return self._memo("roof3", lambda: gef_mixed_tri(self.state, self.cfg))

    def gef3(self) -> tuple[float, bool]:
        if self.pure:
            b = self.gef3_pure()
            return b.total, b.is_estimate
        return self.roof3().value, True

    def gamma2_tri(self) -> float | None:
        d = diagnostics(self.state, self.roof3().decomposition)
        return d.gamma2

    # four-party

    def gef4_pure(self):
        return self._memo("gef4", lambda: gef_pure_four(self.state, self.inner))

    def triple_roofs(self) -> dict:
        if self.pure:
            return self.gef4_pure().roofs

        def compute():
            return {t: gef_mixed_tri(self.reduced_state(t), self.inner.child(i))
                    for i, t in enumerate(TRIPLES4)}
        return self._memo("triples", compute)

    def sum_triple_gef(self) -> float:
        return sum(self.triple_roofs()[t].value for t in TRIPLES4)

    def gamma2_four(self) -> float | None:
        def compute():
            roofs = self.triple_roofs()
            parts = {t: gamma2_parts(self.reduced(t), roofs[t].decomposition) for t in TRIPLES4}
            return aggregate_gamma2(parts, self.sum_eof()[0])
        return self._memo("gamma2_4", compute)

    def roof4(self):
        return self._memo("roof4", lambda: gef_mixed_four(self.state, self.cfg, self.inner))

    def gef4(self) -> float:
        return self.gef4_pure().total if self.pure else self.roof4().value

    def diag4(self):
        def compute():
            d = self.roof4().decomposition
            members = [gef_pure_four(m, self.inner) for m in d.members]
            return diagnostics(self.state, d, self.inner, triple_roofs=self.triple_roofs(),
                               member_breakdowns=members)
        return self._memo("diag4", compute)


# ----------------------------------------------------------------------------
# registry


@dataclass(frozen=True)
class Evaluation:
    lhs: float
    rhs: float
    lhs_estimate: bool = False
    rhs_estimate: bool = False
    detail: str = ""


@dataclass(frozen=True)
class Entry:
    id: str
    arities: tuple[int, ...]
    state_class: str  # "any" | "pure" | "mixed"
    statement: str
    evaluate: Callable[[StateContext], Evaluation]

    def applies(self, n_parties: int, pure: bool) -> bool:
        if n_parties not in self.arities:
            return False
        return self.state_class == "any" or (self.state_class == "pure") == pure


def _worst(cands) -> Evaluation:
    return min(cands, key=lambda e: e.rhs - e.lhs)


def _triples(ctx):
    return list(combinations(range(ctx.n), 3))


def _t1(ctx):
    cands = []
    for t in _triples(ctx):
        for z in t:
            x, y = (p for p in t if p != z)
            cands.append(Evaluation(ctx.S((x,)) + ctx.S((y,)),
                                    ctx.S(tuple(sorted((x, z)))) + ctx.S(tuple(sorted((y, z)))),
                                    detail=f"X={label((x,))} Y={label((y,))} Z={label((z,))}"))
    return _worst(cands)


def _t2(ctx):
    cands = []
    for t in _triples(ctx):
        for y in t:
            x, z = (p for p in t if p != y)
            cands.append(Evaluation(ctx.S(t) + ctx.S((y,)),
                                    ctx.S(tuple(sorted((x, y)))) + ctx.S(tuple(sorted((y, z)))),
                                    detail=f"X={label((x,))} Y={label((y,))} Z={label((z,))}"))
    return _worst(cands)


def _t3(ctx):
    return _worst([Evaluation(ctx.sum_S(1, t), ctx.sum_S(2, t), detail=label(t)) for t in _triples(ctx)])


def _t4(ctx):
    return _worst([Evaluation(3 * ctx.S(t) + ctx.sum_S(1, t), 2 * ctx.sum_S(2, t), detail=label(t))
                   for t in _triples(ctx)])


def _f1(ctx):
    return Evaluation(ctx.sum_S(1), 2 / 3 * ctx.sum_S(2))


def _f2(ctx):
    return Evaluation(ctx.sum_S(1), ctx.sum_S(3))


def _f3(ctx):
    return Evaluation(ctx.sum_S(3) + ctx.sum_S(1), 4 / 3 * ctx.sum_S(2))


def _e1(ctx):
    cands = []
    for pair in combinations(range(ctx.n), 2):
        value, est = ctx.eof(pair)
        for side in pair:
            cands.append(Evaluation(value, ctx.S((side,)), lhs_estimate=est,
                                    detail=f"pair={label(pair)} side={label((side,))}"))
    return _worst(cands)


def _tri_upper_rhs(ctx):
    return ctx.sum_S(2) / 6 + ctx.sum_S(1) / 3


def _p3u(ctx):
    g, est = ctx.gef3()
    return Evaluation(g, _tri_upper_rhs(ctx), lhs_estimate=est)


def _p3l(ctx):
    g, est = ctx.gef3()
    e2, e_est = ctx.sum_eof()
    return Evaluation(e2 / 6 + ctx.sum_S(1) / 3, g, e_est, est)


def _p3u2(ctx):
    g, est = ctx.gef3()
    return Evaluation(g, ctx.sum_S(2) / 2, lhs_estimate=est)


def _p3l2(ctx):
    g, est = ctx.gef3()
    e2, e_est = ctx.sum_eof()
    return Evaluation(e2 / 2, g, e_est, est)


def _b3u(ctx):
    b = ctx.gef3_pure(MODIFIED)
    return Evaluation(b.total, 2 / 3 * ctx.sum_S(2), lhs_estimate=b.is_estimate)


def _b3l(ctx):
    b = ctx.gef3_pure(MODIFIED)
    e2, e_est = ctx.sum_eof()
    return Evaluation(2 / 3 * e2, b.total, e_est, b.is_estimate)


def _m3u(ctx):
    g, est = ctx.gef3()
    return Evaluation(g, _tri_upper_rhs(ctx), lhs_estimate=est)


def _m3l(with_gamma: bool):
    def evaluate(ctx):
        e2, e_est = ctx.sum_eof()
        g = 0.0
        if with_gamma:
            g = ctx.gamma2_tri()
            if g is None:
                raise Skip("gamma2 undefined: pair EoF sum of the state vanishes")
        return Evaluation((1 + g) / 3 * e2, ctx.roof3().value, e_est, True,
                          detail=f"gamma2={g!r}" if with_gamma else "")
    return evaluate


def _fs_u(ctx):
    return Evaluation(ctx.sum_triple_gef(), ctx.sum_S(2) / 3 + ctx.sum_S(1), lhs_estimate=True)


def _fs_u2(ctx):
    return Evaluation(ctx.sum_S(2) / 3 + ctx.sum_S(1), ctx.sum_S(2))


def _gamma2_four(ctx) -> float:
    g = ctx.gamma2_four()
    if g is None:
        raise Skip("gamma2 undefined: pair EoF sum of the state vanishes")
    return g


def _fs_l(with_gamma: bool):
    def evaluate(ctx):
        e2, e_est = ctx.sum_eof()
        g = _gamma2_four(ctx) if with_gamma else 0.0
        return Evaluation(2 * (1 + g) / 3 * e2, ctx.sum_triple_gef(), e_est, True,
                          detail=f"gamma2={g!r}" if with_gamma else "")
    return evaluate


def _fp_u(ctx):
    e2, e_est = ctx.sum_eof()
    return Evaluation(e2, 1.5 * ctx.sum_S(1), lhs_estimate=e_est)


def _fp_u2(ctx):
    return Evaluation(1.5 * ctx.sum_S(1), ctx.sum_S(2))


def _p4u(which: int):
    def evaluate(ctx):
        s3, s2, s1 = ctx.sum_S(3), ctx.sum_S(2), ctx.sum_S(1)
        rhs = {1: s3 / 14 + 2 * s2 / 21 + s1 / 4,
               2: 4 * s2 / 21 + 5 * s1 / 28,
               3: 13 * s2 / 42}[which]
        return Evaluation(ctx.gef4(), rhs, lhs_estimate=True)
    return evaluate


def _p4l(which: int, with_gamma: bool):
    def evaluate(ctx):
        e2, e_est = ctx.sum_eof()
        g = _gamma2_four(ctx) if with_gamma else 0.0
        if which == 1:
            lhs = (5 + 2 * g) / 42 * e2 + ctx.sum_S(2) / 6
        elif which == 2:
            lhs = (5 + 2 * g) / 42 * e2 + ctx.sum_S(1) / 4
        else:
            lhs = (2 / 7 + g / 21) * e2
        return Evaluation(lhs, ctx.gef4(), e_est, True,
                          detail=f"gamma2={g!r}" if with_gamma else "")
    return evaluate


def _m4u(ctx):
    return Evaluation(ctx.gef4(), 13 / 42 * ctx.sum_S(2), lhs_estimate=True)


def _m4l(with_gammas: bool):
    def evaluate(ctx):
        e2, e_est = ctx.sum_eof()
        coef = 1 / 6
        detail = ""
        if with_gammas:
            d = ctx.diag4()
            if d.gamma2 is None or d.gamma3 is None or d.delta2 is None:
                raise Skip("gamma2, gamma3 or delta2 undefined (vanishing denominator)")
            coef = (1 + d.gamma3 * (1 + d.gamma2) + d.delta2) / 6
            detail = f"gamma2={d.gamma2!r} gamma3={d.gamma3!r} delta2={d.delta2!r}"
        return Evaluation(coef * e2, ctx.gef4(), e_est, True, detail=detail)
    return evaluate


REGISTRY: tuple[Entry, ...] = (
    Entry("T1", (3, 4), "any", "S(X)+S(Y) <= S(XZ)+S(YZ), every role assignment", _t1),
    Entry("T2", (3, 4), "any", "S(XYZ)+S(Y) <= S(XY)+S(YZ), every role assignment", _t2),
    Entry("T3", (3, 4), "any", "sum S(singles) <= sum S(pairs), per triple", _t3),
    Entry("T4", (3, 4), "any", "3 S(XYZ) + sum S(singles) <= 2 sum S(pairs), per triple", _t4),
    Entry("F1", (4,), "any", "sum S(singles) <= 2/3 sum S(pairs)", _f1),
    Entry("F2", (4,), "any", "sum S(singles) <= sum S(triples)", _f2),
    Entry("F3", (4,), "any", "sum S(triples) + sum S(singles) <= 4/3 sum S(pairs)", _f3),
    Entry("E1", (2, 3, 4), "any", "E_F(XY) <= min(S(X), S(Y)), every pair", _e1),
    Entry("P3U", (3,), "pure", "E_GF <= 1/6 sum S(pairs) + 1/3 sum S(singles)", _p3u),
    Entry("P3L", (3,), "pure", "E_GF >= 1/6 sum E_F(pairs) + 1/3 sum S(singles)", _p3l),
    Entry("P3U2", (3,), "pure", "E_GF <= 1/2 sum S(pairs)", _p3u2),
    Entry("P3L2", (3,), "pure", "E_GF >= 1/2 sum E_F(pairs)", _p3l2),
    Entry("B3U", (3,), "pure", "modified E_GF <= 2/3 sum S(pairs)", _b3u),
    Entry("B3L", (3,), "pure", "modified E_GF >= 2/3 sum E_F(pairs)", _b3l),
    Entry("M3U", (3,), "any", "E_GF <= 1/6 sum S(pairs) + 1/3 sum S(singles)", _m3u),
    Entry("M3L", (3,), "mixed", "E_GF >= (1+g2)/3 sum E_F(pairs)", _m3l(True)),
    Entry("M3L0", (3,), "mixed", "E_GF >= 1/3 sum E_F(pairs)", _m3l(False)),
    Entry("FS-U", (4,), "any", "sum E_GF(triples) <= 1/3 sum S(pairs) + sum S(singles)", _fs_u),
    Entry("FS-U2", (4,), "any", "1/3 sum S(pairs) + sum S(singles) <= sum S(pairs)", _fs_u2),
    Entry("FS-L", (4,), "any", "sum E_GF(triples) >= 2(1+g2)/3 sum E_F(pairs)", _fs_l(True)),
    Entry("FS-L0", (4,), "any", "sum E_GF(triples) >= 2/3 sum E_F(pairs)", _fs_l(False)),
    Entry("FP-U", (4,), "any", "sum E_F(pairs) <= 3/2 sum S(singles)", _fp_u),
    Entry("FP-U2", (4,), "any", "3/2 sum S(singles) <= sum S(pairs)", _fp_u2),
    Entry("P4U1", (4,), "pure", "E_GF <= 1/14 sum S(triples) + 2/21 sum S(pairs) + 1/4 sum S(singles)", _p4u(1)),
    Entry("P4U2", (4,), "pure", "E_GF <= 4/21 sum S(pairs) + 5/28 sum S(singles)", _p4u(2)),
    Entry("P4U3", (4,), "pure", "E_GF <= 13/42 sum S(pairs)", _p4u(3)),
    Entry("P4L1", (4,), "pure", "E_GF >= (5+2g2)/42 sum E_F(pairs) + 1/6 sum S(pairs)", _p4l(1, True)),
    Entry("P4L1-0", (4,), "pure", "E_GF >= 5/42 sum E_F(pairs) + 1/6 sum S(pairs)", _p4l(1, False)),
    Entry("P4L2", (4,), "pure", "E_GF >= (5+2g2)/42 sum E_F(pairs) + 1/4 sum S(singles)", _p4l(2, True)),
    Entry("P4L2-0", (4,), "pure", "E_GF >= 5/42 sum E_F(pairs) + 1/4 sum S(singles)", _p4l(2, False)),
    Entry("P4L3", (4,), "pure", "E_GF >= (2/7 + g2/21) sum E_F(pairs)", _p4l(3, True)),
    Entry("P4L3-0", (4,), "pure", "E_GF >= 2/7 sum E_F(pairs)", _p4l(3, False)),
    Entry("M4U", (4,), "mixed", "E_GF <= 13/42 sum S(pairs)", _m4u),
    Entry("M4L", (4,), "mixed", "E_GF >= (1 + g3(1+g2) + d2)/6 sum E_F(pairs)", _m4l(True)),
    Entry("M4L0", (4,), "mixed", "E_GF >= 1/6 sum E_F(pairs)", _m4l(False)),
)

BY_ID = {e.id: e for e in REGISTRY}

# entries built only from entropies and exact two-qubit EoFs
EXACT_IDS = ("T1", "T2", "T3", "T4", "F1", "F2", "F3", "E1",
             "P3U", "P3L", "P3U2", "P3L2", "B3U", "B3L")


def _record(entry: Entry, ctx: StateContext, tol: float | None, digest: str) -> InequalityRecord:
    try:
        ev = entry.evaluate(ctx)
    except Skip as exc:
        return InequalityRecord(entry.id, math.nan, math.nan, math.nan, SKIPPED, False, False,
                                tol if tol is not None else EXACT_TOL, digest, str(exc))
    estimated = ev.lhs_estimate or ev.rhs_estimate
    t = tol if tol is not None else (ESTIMATE_TOL if estimated else EXACT_TOL)
    slack = ev.rhs - ev.lhs
    return InequalityRecord(entry.id, ev.lhs, ev.rhs, slack,
                            verdict(slack, ev.lhs_estimate, ev.rhs_estimate, t),
                            ev.lhs_estimate, ev.rhs_estimate, t, digest, ev.detail)


def evaluate_inequality(id: str, state, cfg: RoofConfig | None = None, tol: float | None = None,
                        ctx: StateContext | None = None) -> InequalityRecord:
    entry = BY_ID[id]
    ctx = ctx or StateContext(state, cfg)
    if not entry.applies(ctx.n, ctx.pure):
        kind = "pure" if ctx.pure else "mixed"
        raise ValueError(f"{id} does not apply to a {ctx.n}-party {kind} state")
    return _record(entry, ctx, tol, state_digest(ctx.state))


# entries carrying the gamma_3 / delta_2 terms; left out unless asked for,
# since those terms may be omitted for four-party mixed lower bounds
GAMMA_TERM_IDS = ("M4L",)


def applicable(n_parties: int, pure: bool, ids=None, gamma_terms: bool = False) -> list[Entry]:
    if ids is None:
        chosen = [e for e in REGISTRY if gamma_terms or e.id not in GAMMA_TERM_IDS]
    else:
        chosen = [BY_ID[i] for i in ids]
    order = {e.id: k for k, e in enumerate(REGISTRY)}
    return sorted((e for e in chosen if e.applies(n_parties, pure)), key=lambda e: order[e.id])


def run_registry(state, cfg: RoofConfig | None = None, tol: float | None = None, ids=None,
                 inner: RoofConfig | None = None, gamma_terms: bool = False) -> list[InequalityRecord]:
    """Evaluate every applicable entry (optionally restricted to ``ids``) in registry order.

    An explicit ``ids`` list is honoured as given; otherwise entries in
    ``GAMMA_TERM_IDS`` run only with ``gamma_terms=True``.
    """
    ctx = StateContext(state, cfg, inner)
    digest = state_digest(state)
    out = []
    for entry in applicable(ctx.n, ctx.pure, ids, gamma_terms):
        try:
            out.append(_record(entry, ctx, tol, digest))
        except (ArithmeticError, ValueError) as exc:
            out.append(InequalityRecord(entry.id, math.nan, math.nan, math.nan, SKIPPED,
                                        False, False, tol or EXACT_TOL, digest, f"error: {exc}"))
    return out
