"""Dense quantum-state primitives.

States are small (at most four qubits, 16 dimensions), so everything is
kept as dense numpy arrays. ``PureState`` and ``DensityMatrix`` carry the
per-party dimensions alongside the numbers; party ``i`` of ``dims`` is the
``i``-th tensor factor, so ``dims=(2, 2, 2)`` labels parties A, B, C.

The ``_``-prefixed array helpers are the hot path used by the roof
optimizer and accept a leading batch axis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

NORM_TOL = 1e-12
HERMITIAN_TOL = 1e-10
TRACE_TOL = 1e-10
NEGATIVITY_TOL = 1e-9

PARTY_LABELS = "ABCDEFGH"


class StateError(ValueError):
    """Raised when an array does not describe a valid quantum state."""


class EigenError(ArithmeticError):
    """Raised when the eigensolver fails to converge."""


def _as_dims(dims: Iterable[int]) -> tuple[int, ...]:
    dims = tuple(int(d) for d in dims)
    if not dims:
        raise StateError("dims must contain at least one party")
    if any(d < 1 for d in dims):
        raise StateError(f"party dimensions must be positive, got {dims}")
    return dims


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=np.complex128, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class PureState:
    amplitudes: np.ndarray
    dims: tuple[int, ...]
    tol: float = field(default=NORM_TOL, repr=False, compare=False)

    def __post_init__(self):
        dims = _as_dims(self.dims)
        amps = _frozen(np.ravel(self.amplitudes))
        if amps.size != math.prod(dims):
            raise StateError(f"{amps.size} amplitudes do not match dims {dims}")
        if not np.all(np.isfinite(amps)):
            raise StateError("amplitudes must be finite")
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > self.tol:
            raise StateError(f"state is not normalized (norm {norm!r})")
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def normalized(cls, amplitudes, dims) -> "PureState":
        amps = np.asarray(amplitudes, dtype=np.complex128).ravel()
        norm = np.linalg.norm(amps)
        if norm == 0:
            raise StateError("cannot normalize the zero vector")
        return cls(amps / norm, dims)

    @property
    def n_parties(self) -> int:
        return len(self.dims)

    @property
    def dim(self) -> int:
        return self.amplitudes.size


@dataclass(frozen=True)
class DensityMatrix:
    """Hermitian unit-trace matrix with party labels.

    Construction checks shape, finiteness, Hermiticity and trace. The
    eigenvalue check is more expensive and lives in :func:`validate_density`
    (or :meth:`checked`).
    """

    matrix: np.ndarray
    dims: tuple[int, ...]

    def __post_init__(self):
        dims = _as_dims(self.dims)
        m = np.asarray(self.matrix, dtype=np.complex128)
        d = math.prod(dims)
        if m.shape != (d, d):
            raise StateError(f"matrix shape {m.shape} does not match dims {dims}")
        if not np.all(np.isfinite(m)):
            raise StateError("matrix entries must be finite")
        herm = np.max(np.abs(m - m.conj().T))
        if herm > HERMITIAN_TOL:
            raise StateError(f"matrix is not Hermitian (defect {herm:.3g})")
        tr = np.trace(m).real
        if abs(tr - 1.0) > TRACE_TOL:
            raise StateError(f"trace is {tr!r}, expected 1")
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "matrix", _frozen(0.5 * (m + m.conj().T)))

    @classmethod
    def checked(cls, matrix, dims) -> "DensityMatrix":
        rho = cls(matrix, dims)
        lo = np.linalg.eigvalsh(rho.matrix)[0]
        if lo < -NEGATIVITY_TOL:
            raise StateError(f"matrix is not positive semidefinite (min eigenvalue {lo:.3g})")
        return rho

    @property
    def n_parties(self) -> int:
        return len(self.dims)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


def subset(keep: Iterable[int], n_parties: int) -> tuple[int, ...]:
    """Validate a subsystem selector: strictly increasing party indices."""
    keep = tuple(int(k) for k in keep)
    if not keep:
        raise StateError("at least one party must be kept")
    if any(b <= a for a, b in zip(keep, keep[1:])):
        raise StateError(f"party indices must be strictly increasing, got {keep}")
    if keep[0] < 0 or keep[-1] >= n_parties:
        raise StateError(f"party index out of range for {n_parties} parties: {keep}")
    return keep


def label(keep: Sequence[int]) -> str:
    return "".join(PARTY_LABELS[k] for k in keep)


# ----------------------------------------------------------------------------
# array-level helpers (batched over a leading axis where noted)


def _ptrace(mat: np.ndarray, dims: Sequence[int], keep: Sequence[int]) -> np.ndarray:
    """Partial trace of a (..., d, d) array onto the parties in ``keep``."""
    n = len(dims)
    batch = mat.shape[:-2]
    t = mat.reshape(batch + tuple(dims) + tuple(dims))
    nb = len(batch)
    row = list(range(nb, nb + n))
    col = [nb + n + i if i in keep else nb + i for i in range(n)]
    lead = list(range(nb))
    out = lead + [nb + i for i in keep] + [nb + n + i for i in keep]
    t = np.einsum(t, lead + row + col, out)
    dk = math.prod(dims[i] for i in keep)
    return t.reshape(batch + (dk, dk))


def _reduce_pure(amps: np.ndarray, dims: Sequence[int], keep: Sequence[int]) -> np.ndarray:
    """Reduced density matrix of (..., D) pure amplitudes on ``keep``."""
    n = len(dims)
    batch = amps.shape[:-1]
    nb = len(batch)
    dk = math.prod(dims[i] for i in keep)
    if tuple(keep) == tuple(range(len(keep))):
        m = amps.reshape(batch + (dk, -1))
    else:
        rest = [i for i in range(n) if i not in keep]
        t = amps.reshape(batch + tuple(dims))
        t = np.transpose(t, list(range(nb)) + [nb + i for i in keep] + [nb + i for i in rest])
        m = t.reshape(batch + (dk, -1))
    return m @ np.swapaxes(m.conj(), -1, -2)


# ----------------------------------------------------------------------------
# public operations


def kron(a, b) -> np.ndarray:
    return np.kron(np.asarray(a, dtype=np.complex128), np.asarray(b, dtype=np.complex128))


def hermitian_eig(m) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (ascending) and orthonormal eigenvector columns.

    The input is symmetrized as (M + M^H)/2 first. LAPACK ``heevd`` does the
    work; :func:`jacobi_eigh` is the self-contained fallback used to
    cross-check it.
    """
    m = np.asarray(m, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise StateError(f"expected a square matrix, got shape {m.shape}")
    try:
        w, v = np.linalg.eigh(0.5 * (m + m.conj().T))
    except np.linalg.LinAlgError as exc:
        raise EigenError(str(exc)) from exc
    return w, v


def jacobi_eigh(m, max_sweeps: int = 100, tol: float = 1e-12) -> tuple[np.ndarray, np.ndarray]:
    """Cyclic complex Jacobi eigensolver for Hermitian matrices.

    Each rotation first removes the phase of the pivot element and then
    applies a real Givens rotation that annihilates it.
    """
    a = np.array(m, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise StateError(f"expected a square matrix, got shape {a.shape}")
    a = 0.5 * (a + a.conj().T)
    n = a.shape[0]
    v = np.eye(n, dtype=np.complex128)
    scale = max(1.0, float(np.max(np.abs(a))) if n else 1.0)
    for _ in range(max_sweeps):
        off = np.sqrt(np.sum(np.abs(a) ** 2) - np.sum(np.abs(np.diag(a)) ** 2))
        if off <= tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                b = abs(a[p, q])
                if b <= 1e-300:
                    continue
                phase = a[p, q] / b
                theta = 0.5 * math.atan2(2.0 * b, (a[p, p] - a[q, q]).real)
                c, s = math.cos(theta), math.sin(theta)
                g = np.array([[c, -s], [s * phase.conjugate(), c * phase.conjugate()]])
                idx = [p, q]
                a[:, idx] = a[:, idx] @ g
                a[idx, :] = g.conj().T @ a[idx, :]
                a[q, p] = 0.0
                a[p, q] = 0.0
                v[:, idx] = v[:, idx] @ g
    else:
        raise EigenError(f"Jacobi iteration did not converge in {max_sweeps} sweeps")
    w = np.diag(a).real
    order = np.argsort(w, kind="stable")
    return w[order], v[:, order]


def partial_trace(rho: DensityMatrix, keep: Iterable[int]) -> DensityMatrix:
    keep = subset(keep, rho.n_parties)
    if len(keep) == rho.n_parties:
        return rho
    red = _ptrace(rho.matrix, rho.dims, keep)
    return DensityMatrix(red, tuple(rho.dims[i] for i in keep))


def reduce_pure(psi: PureState, keep: Iterable[int]) -> DensityMatrix:
    """Reduced state of a pure state, without forming the full projector."""
    keep = subset(keep, psi.n_parties)
    return DensityMatrix(_reduce_pure(psi.amplitudes, psi.dims, keep),
                         tuple(psi.dims[i] for i in keep))


def pure_to_density(psi: PureState) -> DensityMatrix:
    a = psi.amplitudes
    return DensityMatrix(np.outer(a, a.conj()), psi.dims)


def purify(rho: DensityMatrix, cutoff: float = 1e-12) -> PureState:
    """Purification on system (x) ancilla, ancilla dimension = numerical rank."""
    w, v = hermitian_eig(rho.matrix)
    keep = w > cutoff
    w, v = w[keep], v[:, keep]
    amps = (v * np.sqrt(w)).reshape(-1)  # amps[i*r + j] = sqrt(w_j) v[i, j]
    return PureState.normalized(amps, rho.dims + (len(w),))


def make_rng(seed: int, *stream: int) -> np.random.Generator:
    """Counter-based generator for the stream ``(seed, *stream)``.

    Streams for different keys are statistically independent, so per-trial
    or per-restart generators can be derived in any order.
    """
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(s) for s in stream))
    return np.random.Generator(np.random.Philox(ss))


def _ginibre(rng: np.random.Generator, shape) -> np.ndarray:
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def random_haar_pure(dims: Iterable[int], rng: np.random.Generator) -> PureState:
    dims = _as_dims(dims)
    return PureState.normalized(_ginibre(rng, math.prod(dims)), dims)


def random_density(dims: Iterable[int], rank: int, rng: np.random.Generator) -> DensityMatrix:
    dims = _as_dims(dims)
    d = math.prod(dims)
    if not 1 <= rank <= d:
        raise StateError(f"rank must be in [1, {d}], got {rank}")
    g = _ginibre(rng, (d, rank))
    m = g @ g.conj().T
    return DensityMatrix(m / np.trace(m).real, dims)


def random_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    if d < 1:
        raise StateError("dimension must be at least 1")
    q, r = np.linalg.qr(_ginibre(rng, (d, d)) / math.sqrt(2.0))
    diag = np.diag(r)
    return q * (diag / np.abs(diag))


@dataclass(frozen=True)
class ValidationReport:
    hermiticity_defect: float
    trace_defect: float
    min_eigenvalue: float
    tol: float

    @property
    def hermitian(self) -> bool:
        return self.hermiticity_defect <= self.tol

    @property
    def unit_trace(self) -> bool:
        return self.trace_defect <= self.tol

    @property
    def positive(self) -> bool:
        return self.min_eigenvalue >= -max(self.tol, NEGATIVITY_TOL)

    @property
    def ok(self) -> bool:
        return self.hermitian and self.unit_trace and self.positive


def validate_density(matrix, tol: float = 1e-10) -> ValidationReport:
    """Report invariant defects of a candidate density matrix (never raises)."""
    m = np.asarray(getattr(matrix, "matrix", matrix), dtype=np.complex128)
    herm = float(np.max(np.abs(m - m.conj().T)))
    tr = float(abs(np.trace(m) - 1.0))
    lo = float(np.linalg.eigvalsh(0.5 * (m + m.conj().T))[0])
    return ValidationReport(herm, tr, lo, tol)


def local_unitary(us: Sequence[np.ndarray]) -> np.ndarray:
    out = np.ones((1, 1), dtype=np.complex128)
    for u in us:
        out = np.kron(out, u)
    return out
