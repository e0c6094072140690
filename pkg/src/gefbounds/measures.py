"""Entropies and two-qubit entanglement of formation, in bits."""

from __future__ import annotations

import math

import numpy as np

from .qmat import NEGATIVITY_TOL, DensityMatrix, PureState, StateError, _reduce_pure, subset

SIGMA_YY = np.array([[0, 0, 0, -1],
                     [0, 0, 1, 0],
                     [0, 1, 0, 0],
                     [-1, 0, 0, 0]], dtype=np.complex128)


def _clip_spectrum(w: np.ndarray) -> np.ndarray:
    if w.size and w.min() < -NEGATIVITY_TOL:
        raise StateError(f"negative eigenvalue {w.min():.3g} below tolerance")
    return np.maximum(w, 0.0)


def entropy_of_spectrum(w) -> np.ndarray:
    """-sum p log2 p along the last axis, with 0 log 0 = 0."""
    w = _clip_spectrum(np.asarray(w, dtype=float))
    h = -np.sum(w * np.log2(w + (w == 0)), axis=-1)
    return np.maximum(h, 0.0)


def _eigvalsh(mats: np.ndarray) -> np.ndarray:
    if mats.shape[-1] != 2:
        return np.linalg.eigvalsh(mats)
    # closed form for 2x2 Hermitian blocks
    a, d = mats[..., 0, 0].real, mats[..., 1, 1].real
    half = np.sqrt(0.25 * (a - d) ** 2 + np.abs(mats[..., 0, 1]) ** 2)
    mid = 0.5 * (a + d)
    return np.stack([mid - half, mid + half], axis=-1)


def _entropy(mats: np.ndarray) -> np.ndarray:
    return entropy_of_spectrum(_eigvalsh(mats))


def von_neumann_entropy(rho) -> float:
    m = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=np.complex128)
    return float(_entropy(m))


def binary_entropy(x: float) -> float:
    if not -1e-12 <= x <= 1 + 1e-12:
        raise ValueError(f"binary entropy argument {x} outside [0, 1]")
    x = min(max(x, 0.0), 1.0)
    if x in (0.0, 1.0):
        return 0.0
    return -x * math.log2(x) - (1 - x) * math.log2(1 - x)


def _concurrence(mats: np.ndarray) -> np.ndarray:
    """Wootters concurrence of (..., 4, 4) two-qubit density matrices.

    Writing rho = V V^dagger, the square roots of the eigenvalues of
    rho rho~ are the singular values of tau = V^T (sigma_y x sigma_y) V.
    Taking singular values directly keeps rank-deficient inputs accurate,
    where square roots of tiny eigenvalues would not.
    """
    w, v = np.linalg.eigh(mats)
    root = v * np.sqrt(np.clip(w, 0.0, None))[..., None, :]
    tau = np.swapaxes(root, -1, -2) @ SIGMA_YY @ root
    lam = np.linalg.svd(tau, compute_uv=False)  # descending
    c = lam[..., 0] - lam[..., 1] - lam[..., 2] - lam[..., 3]
    return np.clip(c, 0.0, 1.0)


def _concurrence_rank2(m: np.ndarray) -> np.ndarray:
    """Concurrence of two-qubit states rho = M M^dagger with M of shape (..., 4, 2).

    With T = M^T (sigma_y x sigma_y) M the concurrence is s1 - s2 over the
    singular values of T, and s1 - s2 = sqrt(|T|_F^2 - 2 |det T|).
    """
    # rows of (sigma_y x sigma_y) M, written out for the anti-diagonal matrix
    fm = np.stack([-m[..., 3, :], m[..., 2, :], m[..., 1, :], -m[..., 0, :]], axis=-2)
    t = np.swapaxes(m, -1, -2) @ fm
    det = t[..., 0, 0] * t[..., 1, 1] - t[..., 0, 1] * t[..., 1, 0]
    frob = np.sum(np.abs(t) ** 2, axis=(-2, -1))
    return np.clip(np.sqrt(np.clip(frob - 2 * np.abs(det), 0.0, None)), 0.0, 1.0)


def _eof_from_concurrence(c: np.ndarray) -> np.ndarray:
    c = np.clip(np.asarray(c, dtype=float), 0.0, 1.0)
    x = 0.5 * (1.0 + np.sqrt(1.0 - c * c))
    return entropy_of_spectrum(np.stack([x, 1.0 - x], axis=-1))


def _check_two_qubit(rho: DensityMatrix):
    if rho.dims != (2, 2):
        raise StateError(f"expected a two-qubit state, got dims {rho.dims}")


def concurrence_two_qubit(rho: DensityMatrix) -> float:
    _check_two_qubit(rho)
    return float(_concurrence(rho.matrix))


def eof_from_concurrence(c: float) -> float:
    if not -1e-12 <= c <= 1 + 1e-12:
        raise ValueError(f"concurrence {c} outside [0, 1]")
    return float(_eof_from_concurrence(c))


def eof_two_qubit_mixed(rho: DensityMatrix) -> float:
    _check_two_qubit(rho)
    return float(_eof_from_concurrence(_concurrence(rho.matrix)))


def eof_pure_bipartite(psi: PureState, cut) -> float:
    """Entanglement of a pure state across ``cut`` versus the rest."""
    cut = subset(cut, psi.n_parties)
    if len(cut) == psi.n_parties:
        raise StateError("cut must leave at least one party on the other side")
    return float(_entropy(_reduce_pure(psi.amplitudes, psi.dims, cut)))


def _pure_eof_batch(amps: np.ndarray, dims) -> np.ndarray:
    """Marginal entropy of party 0 for a batch of two-party pure states."""
    return _entropy(_reduce_pure(amps, dims, (0,)))
