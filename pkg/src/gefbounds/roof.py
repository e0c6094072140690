"""Convex-roof minimization over pure-state decompositions.

Every decomposition of rho = sum_i lam_i |e_i><e_i| into k pure states is
obtained from a k x r isometry V (r = rank) as

    psi~_j = sum_i conj(V[j, i]) sqrt(lam_i) |e_i>,   p_j = ||psi~_j||^2.

V is taken as the first r columns of exp(A) with A anti-Hermitian, which
turns the roof into an unconstrained problem over k*k real parameters.
The search is derivative-free (Nelder-Mead with random restarts), so a
returned value is only ever an upper estimate of the true roof.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy.optimize import minimize

from .qmat import DensityMatrix, PureState, StateError, hermitian_eig, make_rng

RANK_CUTOFF = 1e-12
MIN_PROBABILITY = 1e-14


@dataclass(frozen=True)
class Decomposition:
    probabilities: np.ndarray
    amplitudes: np.ndarray  # (members, D), rows normalized
    dims: tuple[int, ...]

    def __post_init__(self):
        p = np.asarray(self.probabilities, dtype=float)
        a = np.atleast_2d(np.asarray(self.amplitudes, dtype=np.complex128))
        if p.ndim != 1 or a.shape[0] != p.size:
            raise StateError("one probability per member is required")
        if np.any(p < 0) or abs(p.sum() - 1.0) > 1e-10:
            raise StateError(f"probabilities must be nonnegative and sum to 1 (sum {p.sum()!r})")
        p.setflags(write=False)
        a.setflags(write=False)
        object.__setattr__(self, "probabilities", p)
        object.__setattr__(self, "amplitudes", a)
        object.__setattr__(self, "dims", tuple(self.dims))

    @property
    def members(self) -> list[PureState]:
        return [PureState(a, self.dims, tol=1e-9) for a in self.amplitudes]

    def __len__(self):
        return self.probabilities.size

    def mixture(self) -> np.ndarray:
        a = self.amplitudes
        return (a.T * self.probabilities) @ a.conj()


@dataclass(frozen=True)
class RoofConfig:
    """Search budget. ``cardinality=None`` means rank + ``extra_members`` members.

    The restart loop stops early once ``agreement`` restarts have reached
    the incumbent value within ``agree_tol``; ``agreement=0`` disables this.
    """

    cardinality: int | None = None
    restarts: int = 8
    max_evals: int = 2000
    tol: float = 1e-7
    seed: int = 0
    stream: tuple[int, ...] = ()
    step: float = 0.6
    agreement: int = 2
    agree_tol: float = 1e-6
    extra_members: int = 2

    def __post_init__(self):
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")
        if self.max_evals < 1:
            raise ValueError("max_evals must be >= 1")
        if self.extra_members < 0:
            raise ValueError("extra_members must be >= 0")

    def child(self, *keys: int) -> "RoofConfig":
        """Same budget on an independent random stream."""
        return replace(self, stream=self.stream + tuple(keys))


@dataclass(frozen=True)
class RoofResult:
    value: float
    decomposition: Decomposition
    converged: bool
    restarts_used: int
    evaluations: int = 0
    history: tuple[tuple[float, ...], ...] = field(default=(), repr=False)
    is_estimate: bool = True


def _eigen(rho: DensityMatrix):
    w, v = hermitian_eig(rho.matrix)
    keep = w > RANK_CUTOFF
    return w[keep][::-1], v[:, keep][:, ::-1]


def _members(lam, vecs, iso):
    scaled = vecs * np.sqrt(lam)  # columns sqrt(lam_i) e_i
    tilde = iso.conj() @ scaled.T  # rows psi~_j
    p = np.sum(np.abs(tilde) ** 2, axis=1)
    keep = p > MIN_PROBABILITY
    p, tilde = p[keep], tilde[keep]
    return p / p.sum(), tilde / np.sqrt(p)[:, None]


def eigendecomposition(rho: DensityMatrix) -> Decomposition:
    lam, vecs = _eigen(rho)
    return Decomposition(lam / lam.sum(), vecs.T.copy(), rho.dims)


def decomposition_from_isometry(rho: DensityMatrix, v) -> Decomposition:
    lam, vecs = _eigen(rho)
    v = np.asarray(v, dtype=np.complex128)
    if v.ndim != 2 or v.shape[1] != lam.size:
        raise StateError(f"isometry must have {lam.size} columns, got shape {v.shape}")
    gram = v.conj().T @ v
    if np.max(np.abs(gram - np.eye(lam.size))) > 1e-8:
        raise StateError("isometry columns are not orthonormal")
    p, a = _members(lam, vecs, v)
    return Decomposition(p, a, rho.dims)


@lru_cache(maxsize=None)
def _packing(k: int):
    iu = np.triu_indices(k, 1)
    return np.diag_indices(k), iu, (iu[1], iu[0]), iu[0].size


def _unitary(x: np.ndarray, k: int) -> np.ndarray:
    """exp(iH) for the Hermitian H packed into k*k reals."""
    diag, upper, lower, m = _packing(k)
    h = np.empty((k, k), dtype=np.complex128)
    h[diag] = x[:k]
    off = x[k:k + m] + 1j * x[k + m:]
    h[upper] = off
    h[lower] = off.conj()
    w, u = np.linalg.eigh(h)
    return (u * np.exp(1j * w)) @ u.conj().T


def _batched(f: Callable, batched: bool, dims):
    if batched:
        return f
    return lambda amps, _dims: np.array([f(PureState(a, dims, tol=1e-9)) for a in amps])


def roof_average(d: Decomposition, f: Callable, batched: bool = False) -> float:
    vals = _batched(f, batched, d.dims)(d.amplitudes, d.dims)
    return float(np.dot(d.probabilities, vals))


def minimize_convex_roof(rho: DensityMatrix, f: Callable, cfg: RoofConfig | None = None,
                         batched: bool = False) -> RoofResult:
    """Lowest average of ``f`` found over pure-state decompositions of ``rho``.

    ``f`` maps a PureState to a float, or, with ``batched=True``, an
    ``(m, D)`` array of normalized amplitudes plus ``dims`` to an ``(m,)``
    array. Restart 0 starts from the eigendecomposition, so the result
    never exceeds the eigendecomposition average.
    """
    cfg = cfg or RoofConfig()
    fb = _batched(f, batched, rho.dims)
    lam, vecs = _eigen(rho)
    r = lam.size
    if r == 1:
        d = Decomposition(np.ones(1), vecs.T.copy(), rho.dims)
        return RoofResult(float(fb(d.amplitudes, d.dims)[0]), d, True, 0, 1)
    k = cfg.cardinality or r + cfg.extra_members
    if k < r:
        raise ValueError(f"cardinality {k} is below the rank {r}")
    n = k * k

    def objective(x):
        p, a = _members(lam, vecs, _unitary(x, k)[:, :r])
        return float(np.dot(p, fb(a, rho.dims)))

    best = None
    history = []
    finals = []
    total_evals = 0
    for restart in range(cfg.restarts):
        rng = make_rng(cfg.seed, *cfg.stream, restart)
        x = np.zeros(n) if restart == 0 else rng.uniform(-math.pi, math.pi, n)
        x, val, converged, evals, trace = _nelder_mead(objective, x, cfg, rng)
        total_evals += evals
        history.append(tuple(trace))
        finals.append(val)
        if best is None or val < best[1]:
            best = (x, val, converged, restart)
        if cfg.agreement and sum(v <= best[1] + cfg.agree_tol for v in finals) >= cfg.agreement:
            break
    x, val, converged, _ = best
    p, a = _members(lam, vecs, _unitary(x, k)[:, :r])
    d = Decomposition(p, a, rho.dims)
    return RoofResult(val, d, converged, len(finals), total_evals, tuple(history))


def _nelder_mead(objective, x0, cfg: RoofConfig, rng):
    """Nelder-Mead with re-seeded simplices around the incumbent.

    Each stage runs until the simplex collapses below ``cfg.tol``; the next
    stage rebuilds a smaller simplex at the best point. Stops when a stage
    no longer improves or the evaluation budget is spent.
    """
    n = x0.size
    x, val = x0, objective(x0)
    evals = 1
    trace = [val]
    step = cfg.step
    converged = False
    while cfg.max_evals - evals > n + 1:
        directions = np.linalg.qr(rng.standard_normal((n, n)))[0]
        simplex = np.vstack([x, x + step * directions.T])

        def record(intermediate_result):
            trace.append(min(trace[-1], float(intermediate_result.fun)))

        res = minimize(objective, x, method="Nelder-Mead", callback=record,
                       options=dict(maxfev=cfg.max_evals - evals, xatol=np.inf,
                                    fatol=cfg.tol, initial_simplex=simplex, adaptive=True))
        evals += res.nfev
        improved = res.fun < val - cfg.tol
        if res.fun < val:
            x, val = res.x, float(res.fun)
            trace.append(val)
        if not improved and res.status == 0:
            converged = True
            break
        step = max(step * 0.5, 1e-3)
    return x, val, converged, evals, trace
