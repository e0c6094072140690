"""Generalized entanglement of formation (GEF) for three and four parties.

Pure tri-party states use a fixed-weight average over the three pair
EoFs, the three pair entropies and the three single-party entropies::

    original:  1/6 * [sum E_F(pairs) + sum S(pairs) + sum S(singles)]
    modified:  1/3 * sum E_F(pairs) + 1/6 * [sum S(pairs) + sum S(singles)]

The four-party pure-state value gives weight 1/14 to each of the 24
subsystem terms: four triple GEFs, six pair EoFs, and the entropies of the
four triples, six pairs and four singles. Triple marginals of a four-party
pure state are mixed, so their GEFs are convex roofs and carry the
``is_estimate`` flag. Mixed states of either size use the convex roof of
the pure-state value.

Weights are exact ``Fraction`` objects; only term values are floats.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations

import numpy as np

from .measures import _concurrence_rank2, _concurrence, _entropy, _eof_from_concurrence, _pure_eof_batch
from .qmat import DensityMatrix, PureState, StateError, _ptrace, _reduce_pure, label
from .roof import Decomposition, RoofConfig, RoofResult, minimize_convex_roof

ORIGINAL = "original"
MODIFIED = "modified"

ENTROPY, EOF, SUB_GEF = "entropy", "eof", "sub-gef"

TRI_WEIGHTS = {
    ORIGINAL: {EOF: Fraction(1, 6), ENTROPY: Fraction(1, 6)},
    MODIFIED: {EOF: Fraction(1, 3), ENTROPY: Fraction(1, 6)},
}
FOUR_WEIGHT = Fraction(1, 14)

UNDEFINED_BELOW = 1e-9

# nested roofs inside four-party values use a smaller budget by default
INNER_ROOF = RoofConfig(restarts=3, max_evals=400)


@dataclass(frozen=True)
class Term:
    subsystem: tuple[int, ...]
    kind: str
    weight: Fraction
    value: float
    is_estimate: bool = False

    @property
    def label(self) -> str:
        return label(self.subsystem)


@dataclass(frozen=True)
class GefBreakdown:
    total: float
    terms: tuple[Term, ...]
    definition: str
    roofs: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def is_estimate(self) -> bool:
        return any(t.is_estimate for t in self.terms)

    def values(self, kind: str, size: int | None = None) -> dict[tuple[int, ...], float]:
        return {t.subsystem: t.value for t in self.terms
                if t.kind == kind and (size is None or len(t.subsystem) == size)}


def _breakdown(terms: list[Term], definition: str, roofs=None) -> GefBreakdown:
    total = float(sum(float(t.weight) * t.value for t in terms))
    return GefBreakdown(total, tuple(terms), definition, roofs or {})


def _qubit_pairs(dims) -> bool:
    return all(d == 2 for d in dims)


# ----------------------------------------------------------------------------
# bipartite pieces


def pair_eof(rho: DensityMatrix, cfg: RoofConfig | None = None) -> tuple[float, bool, RoofResult | None]:
    """E_F of a two-party state: exact for two qubits, a roof estimate otherwise."""
    if rho.n_parties != 2:
        raise StateError(f"expected a two-party state, got dims {rho.dims}")
    if rho.dims == (2, 2):
        return float(_eof_from_concurrence(_concurrence(rho.matrix))), False, None
    res = minimize_convex_roof(rho, _pure_eof_batch, cfg, batched=True)
    return res.value, True, res


def gef_bipartite(rho: DensityMatrix, cfg: RoofConfig | None = None) -> float:
    """GEF of a bipartite (sub)system, identified with its E_F."""
    return pair_eof(rho, cfg)[0]


# ----------------------------------------------------------------------------
# tri-party


def _check_parties(state, n: int):
    if state.n_parties != n:
        raise StateError(f"expected a {n}-party state, got dims {state.dims}")


PAIRS3 = tuple(combinations(range(3), 2))
SINGLES3 = ((0,), (1,), (2,))


def _tri_pieces(amps: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Per-member sums (EoF of pairs, S of pairs, S of singles) for 3-qubit rows.

    Pair marginals of a pure three-qubit state have rank <= 2 and share
    their spectrum with the complementary single qubit, so no eigensolver
    is needed.
    """
    psi = amps.reshape(amps.shape[:-1] + (2, 2, 2))
    lead = psi.ndim - 3
    perms = ((0, 1, 2), (0, 2, 1), (1, 2, 0))  # pair axes first, complement last
    mats = np.stack([np.transpose(psi, tuple(range(lead)) + tuple(lead + k for k in p))
                     .reshape(amps.shape[:-1] + (4, 2)) for p in perms], axis=-3)
    eof = _eof_from_concurrence(_concurrence_rank2(mats)).sum(axis=-1)
    # singles: C, B, A as complements of the three pairs
    singles = np.swapaxes(mats, -1, -2) @ mats.conj()
    s1 = _entropy(singles).sum(axis=-1)
    return eof, s1, s1


def _tri_functional(definition: str):
    w = TRI_WEIGHTS[definition]
    we, ws = float(w[EOF]), float(w[ENTROPY])

    def values(amps, dims):
        eof, s2, s1 = _tri_pieces(amps)
        return we * eof + ws * (s2 + s1)

    return values


def gef_pure_tri(psi: PureState, cfg: RoofConfig | None = None,
                 definition: str = ORIGINAL) -> GefBreakdown:
    _check_parties(psi, 3)
    w = TRI_WEIGHTS[definition]
    terms, roofs = [], {}
    for i, pair in enumerate(PAIRS3):
        red = DensityMatrix(_reduce_pure(psi.amplitudes, psi.dims, pair),
                            tuple(psi.dims[k] for k in pair))
        value, est, res = pair_eof(red, (cfg or RoofConfig()).child(i))
        if res is not None:
            roofs[pair] = res
        terms.append(Term(pair, EOF, w[EOF], value, est))
    for sub in PAIRS3 + SINGLES3:
        s = float(_entropy(_reduce_pure(psi.amplitudes, psi.dims, sub)))
        terms.append(Term(sub, ENTROPY, w[ENTROPY], s))
    return _breakdown(terms, definition, roofs)


def gef_pure_tri_modified(psi: PureState, cfg: RoofConfig | None = None) -> GefBreakdown:
    return gef_pure_tri(psi, cfg, MODIFIED)


def tri_functional(dims, definition: str = ORIGINAL, cfg: RoofConfig | None = None):
    """Pure-state GEF as a roof functional; returns (f, batched)."""
    if _qubit_pairs(dims):
        return _tri_functional(definition), True
    return (lambda psi: gef_pure_tri(psi, cfg, definition).total), False


def gef_mixed_tri(rho: DensityMatrix, cfg: RoofConfig | None = None,
                  definition: str = ORIGINAL) -> RoofResult:
    _check_parties(rho, 3)
    f, batched = tri_functional(rho.dims, definition, cfg)
    return minimize_convex_roof(rho, f, cfg, batched=batched)


# ----------------------------------------------------------------------------
# four-party

PAIRS4 = tuple(combinations(range(4), 2))
TRIPLES4 = tuple(combinations(range(4), 3))
SINGLES4 = ((0,), (1,), (2,), (3,))


def gef_pure_four(psi: PureState, cfg: RoofConfig | None = None) -> GefBreakdown:
    """Four-party pure-state GEF; each triple term is a roof on ``cfg.child(i)``."""
    _check_parties(psi, 4)
    cfg = cfg or INNER_ROOF
    amps, dims = psi.amplitudes, psi.dims
    terms, roofs = [], {}
    for i, triple in enumerate(TRIPLES4):
        red = DensityMatrix(_reduce_pure(amps, dims, triple), tuple(dims[k] for k in triple))
        res = gef_mixed_tri(red, cfg.child(i))
        roofs[triple] = res
        terms.append(Term(triple, SUB_GEF, FOUR_WEIGHT, res.value, True))
    for j, pair in enumerate(PAIRS4):
        red = DensityMatrix(_reduce_pure(amps, dims, pair), tuple(dims[k] for k in pair))
        value, est, res = pair_eof(red, cfg.child(len(TRIPLES4) + j))
        if res is not None:
            roofs[pair] = res
        terms.append(Term(pair, EOF, FOUR_WEIGHT, value, est))
    for sub in TRIPLES4 + PAIRS4 + SINGLES4:
        s = float(_entropy(_reduce_pure(amps, dims, sub)))
        terms.append(Term(sub, ENTROPY, FOUR_WEIGHT, s))
    return _breakdown(terms, ORIGINAL, roofs)


def gef_mixed_four(rho: DensityMatrix, cfg: RoofConfig | None = None,
                   inner: RoofConfig | None = None) -> RoofResult:
    """Convex roof of :func:`gef_pure_four`; members are scored with ``inner``.

    On a pure input this equals ``gef_pure_four(psi, inner).total``.
    """
    _check_parties(rho, 4)
    inner = inner or INNER_ROOF
    return minimize_convex_roof(rho, lambda psi: gef_pure_four(psi, inner).total, cfg)


# ----------------------------------------------------------------------------
# diagnostic ratios


@dataclass(frozen=True)
class RoofDiagnostics:
    gamma2_triples: dict
    gamma2: float | None
    gamma3: float | None = None
    delta2: float | None = None
    denominators: dict = field(default_factory=dict)


def _ratio(num: float, den: float) -> float | None:
    return None if den < UNDEFINED_BELOW else num / den


def _pair_eof_sum(mat: np.ndarray, dims, pairs) -> float:
    return sum(pair_eof(DensityMatrix(_ptrace(mat, dims, p), tuple(dims[k] for k in p)))[0]
               for p in pairs)


def _member_pair_eof_sum(d: Decomposition, pairs) -> float:
    """sum_i p_i sum_pairs E_F(pair marginal of member i)."""
    dims = d.dims
    total = np.zeros(len(d))
    for p in pairs:
        pd = tuple(dims[k] for k in p)
        reds = _reduce_pure(d.amplitudes, dims, p)
        if pd == (2, 2):
            total += _eof_from_concurrence(_concurrence(reds))
        else:
            total += [pair_eof(DensityMatrix(r, pd))[0] for r in reds]
    return float(np.dot(d.probabilities, total))


def gamma2_parts(rho_matrix: np.ndarray, d: Decomposition) -> tuple[float, float]:
    """(numerator, denominator) of the tri-party gamma_2 ratio.

    gamma_2 = (1/2) * numerator / denominator, with the numerator the
    decomposition-averaged pair EoF sum and the denominator the pair EoF
    sum of the mixed state itself.
    """
    return _member_pair_eof_sum(d, PAIRS3), _pair_eof_sum(rho_matrix, d.dims, PAIRS3)


def _check_decomposition(rho: DensityMatrix, d: Decomposition):
    if tuple(d.dims) != tuple(rho.dims):
        raise StateError(f"decomposition dims {d.dims} do not match state dims {rho.dims}")
    dev = np.max(np.abs(d.mixture() - rho.matrix))
    if dev > 1e-8:
        raise StateError(f"decomposition does not reproduce the state (deviation {dev:.3g})")


def aggregate_gamma2(triple_parts: dict, pair_eof_total: float) -> float | None:
    """Four-party gamma_2 from per-triple (numerator, denominator) parts.

    Defined through 2 g2 * sum_pairs E = sum_XYZ g2_XYZ * den_XYZ, and
    g2_XYZ * den_XYZ = num_XYZ / 2 holds even when den_XYZ vanishes, so
    only the overall pair sum has to be nonzero.
    """
    return _ratio(sum(0.5 * num for num, _ in triple_parts.values()), 2.0 * pair_eof_total)


def diagnostics(rho: DensityMatrix, d: Decomposition, cfg: RoofConfig | None = None, *,
                triple_roofs: dict | None = None,
                member_breakdowns: list | None = None) -> RoofDiagnostics:
    """gamma_2 (per triple and aggregate), gamma_3 and delta_2.

    For three parties only gamma_2 applies, computed from ``d``. For four
    parties ``d`` is a decomposition of the full state (it feeds gamma_3
    and delta_2), while gamma_2 comes from roofs of the triple marginals;
    missing roofs and member breakdowns are computed with ``cfg``.
    """
    _check_decomposition(rho, d)
    if rho.n_parties == 3:
        num, den = gamma2_parts(rho.matrix, d)
        g = _ratio(0.5 * num, den)
        return RoofDiagnostics({(0, 1, 2): g}, g, denominators={"gamma2": den})
    _check_parties(rho, 4)
    cfg = cfg or INNER_ROOF
    dims = rho.dims
    if triple_roofs is None:
        triple_roofs = {}
        for i, t in enumerate(TRIPLES4):
            red = DensityMatrix(_ptrace(rho.matrix, dims, t), tuple(dims[k] for k in t))
            triple_roofs[t] = gef_mixed_tri(red, cfg.child(i))
    parts, per_triple = {}, {}
    for t in TRIPLES4:
        num, den = gamma2_parts(_ptrace(rho.matrix, dims, t), triple_roofs[t].decomposition)
        parts[t] = (num, den)
        per_triple[t] = _ratio(0.5 * num, den)
    pair_total = _pair_eof_sum(rho.matrix, dims, PAIRS4)
    triple_total = sum(r.value for r in triple_roofs.values())
    if member_breakdowns is None:
        member_breakdowns = [gef_pure_four(m, cfg) for m in d.members]
    p = d.probabilities
    member_pairs = sum(pi * sum(b.values(EOF, 2).values()) for pi, b in zip(p, member_breakdowns))
    member_triples = sum(pi * sum(b.values(SUB_GEF, 3).values()) for pi, b in zip(p, member_breakdowns))
    # (1/14) sum_i p_i sum E(pairs_i) = (delta2/6) sum E(pairs)
    delta2 = _ratio(6.0 / 14.0 * member_pairs, pair_total)
    # (1/14) sum_i p_i sum E(triples_i) = (3 gamma3/12) sum E(triples)
    gamma3 = _ratio(12.0 / (3.0 * 14.0) * member_triples, triple_total)
    return RoofDiagnostics(per_triple, aggregate_gamma2(parts, pair_total), gamma3, delta2,
                           {"gamma2": pair_total, "gamma3": triple_total, "delta2": pair_total})
