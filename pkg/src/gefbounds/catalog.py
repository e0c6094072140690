"""Named special states and the JSON state-file format.

A state file looks like::

    {"dims": [2, 2, 2], "kind": "pure", "data": [[0.7071067811865476, 0.0], ...]}

with ``data`` holding amplitudes (pure) or the row-major matrix entries
(mixed), each complex number as ``[re, im]``.
"""

from __future__ import annotations

import json
import math

import numpy as np

from .qmat import HERMITIAN_TOL, TRACE_TOL, DensityMatrix, PureState, StateError, validate_density

LOAD_TOL = 1e-8

S = 1 / math.sqrt(2)
BELL = {
    "phi+": np.array([S, 0, 0, S]),
    "phi-": np.array([S, 0, 0, -S]),
    "psi+": np.array([0, S, S, 0]),
    "psi-": np.array([0, S, -S, 0]),
}


def spectator(theta: float = 0.0, phi: float = 0.0) -> np.ndarray:
    """cos(theta)|0> + exp(i phi) sin(theta)|1>."""
    return np.array([math.cos(theta), np.exp(1j * phi) * math.sin(theta)])


def _sign(sign: str) -> int:
    if sign not in ("+", "-"):
        raise StateError(f"sign must be '+' or '-', got {sign!r}")
    return 1 if sign == "+" else -1


def ghz(n: int = 3) -> PureState:
    if n < 2:
        raise StateError("GHZ needs at least two parties")
    a = np.zeros(2 ** n)
    a[0] = a[-1] = S
    return PureState(a, (2,) * n)


def w3() -> PureState:
    a = np.zeros(8)
    a[[1, 2, 4]] = 1 / math.sqrt(3)
    return PureState(a, (2, 2, 2))


def bell(which: str = "phi+") -> PureState:
    return PureState(BELL[which], (2, 2))


def product(dims=(2, 2, 2)) -> PureState:
    dims = tuple(dims)
    a = np.zeros(math.prod(dims))
    a[0] = 1.0
    return PureState(a, dims)


def werner(p: float) -> DensityMatrix:
    """p |Phi+><Phi+| + (1 - p) I/4."""
    if not 0.0 <= p <= 1.0:
        raise StateError(f"Werner weight must lie in [0, 1], got {p}")
    phi = BELL["phi+"]
    return DensityMatrix(p * np.outer(phi, phi) + (1 - p) * np.eye(4) / 4, (2, 2))


def eb_ab(theta=0.0, phi=0.0, which="phi+") -> PureState:
    return PureState(np.kron(BELL[which], spectator(theta, phi)), (2, 2, 2))


def eb_bc(theta=0.0, phi=0.0, which="phi+") -> PureState:
    return PureState(np.kron(spectator(theta, phi), BELL[which]), (2, 2, 2))


def _eb_ac(theta, phi, sign, flip: bool) -> PureState:
    chi = spectator(theta, phi)
    zero, one = np.array([1.0, 0.0]), np.array([0.0, 1.0])
    c0, c1 = (one, zero) if flip else (zero, one)
    a = np.kron(np.kron(zero, chi), c0) + _sign(sign) * np.kron(np.kron(one, chi), c1)
    return PureState(a * S, (2, 2, 2))


def eb_ac1(theta=0.0, phi=0.0, sign="+") -> PureState:
    """(|0>|chi>|0> +- |1>|chi>|1>)/sqrt2 on A, B, C."""
    return _eb_ac(theta, phi, sign, flip=False)


def eb_ac2(theta=0.0, phi=0.0, sign="+") -> PureState:
    """(|0>|chi>|1> +- |1>|chi>|0>)/sqrt2 on A, B, C."""
    return _eb_ac(theta, phi, sign, flip=True)


def dephased_ghz(n: int = 3) -> DensityMatrix:
    """(|0...0><0...0| + |1...1><1...1|)/2."""
    d = 2 ** n
    m = np.zeros((d, d))
    m[0, 0] = m[-1, -1] = 0.5
    return DensityMatrix(m, (2,) * n)


def bell_with_noise() -> DensityMatrix:
    """|Phi+><Phi+|_AB (x) I/2 on C."""
    phi = BELL["phi+"]
    return DensityMatrix(np.kron(np.outer(phi, phi), np.eye(2) / 2), (2, 2, 2))


def bell_bell() -> PureState:
    return PureState(np.kron(BELL["phi+"], BELL["phi+"]), (2, 2, 2, 2))


NAMES = ("ghz", "w3", "bell", "product", "werner", "eb_ab", "eb_ac1", "eb_ac2", "eb_bc",
         "dephased_ghz", "bell_noise", "bell_bell")


def named_state(name: str, *, n: int = 3, dims=(2, 2, 2), p: float = 1.0,
                theta: float = 0.0, phi: float = 0.0, sign: str = "+", which: str = "phi+"):
    if which not in BELL:
        raise StateError(f"unknown Bell state {which!r}")
    builders = {
        "ghz": lambda: ghz(n),
        "w3": w3,
        "bell": lambda: bell(which),
        "product": lambda: product(dims),
        "werner": lambda: werner(p),
        "eb_ab": lambda: eb_ab(theta, phi, which),
        "eb_ac1": lambda: eb_ac1(theta, phi, sign),
        "eb_ac2": lambda: eb_ac2(theta, phi, sign),
        "eb_bc": lambda: eb_bc(theta, phi, which),
        "dephased_ghz": lambda: dephased_ghz(n),
        "bell_noise": bell_with_noise,
        "bell_bell": bell_bell,
    }
    if name not in builders:
        raise StateError(f"unknown state {name!r}; known: {', '.join(NAMES)}")
    return builders[name]()


# ----------------------------------------------------------------------------
# state files


def _pairs(values) -> list:
    # float() keeps repr's shortest round-trip form, so load(dump(x)) == x bit for bit
    return [[float(v.real), float(v.imag)] for v in np.ravel(values)]


def state_to_dict(state) -> dict:
    if isinstance(state, PureState):
        return {"dims": list(state.dims), "kind": "pure", "data": _pairs(state.amplitudes)}
    return {"dims": list(state.dims), "kind": "mixed", "data": _pairs(state.matrix)}


def dumps_state(state) -> str:
    return json.dumps(state_to_dict(state))


def state_from_dict(obj: dict):
    try:
        dims = tuple(int(d) for d in obj["dims"])
        kind = obj["kind"]
        data = np.array([complex(re, im) for re, im in obj["data"]], dtype=np.complex128)
    except (KeyError, TypeError, ValueError) as exc:
        raise StateError(f"malformed state file: {exc}") from exc
    if any(d < 2 for d in dims):
        raise StateError(f"party dimensions must be at least 2, got {dims}")
    d = math.prod(dims)
    if kind == "pure":
        if data.size != d:
            raise StateError(f"expected {d} amplitudes, got {data.size}")
        norm = np.linalg.norm(data)
        if abs(norm - 1) > LOAD_TOL:
            raise StateError(f"state is not normalized (norm {norm!r})")
        return PureState(data, dims, tol=LOAD_TOL)
    if kind == "mixed":
        if data.size != d * d:
            raise StateError(f"expected {d * d} matrix entries, got {data.size}")
        m = data.reshape(d, d)
        report = validate_density(m, LOAD_TOL)
        if not report.ok:
            raise StateError(f"invalid density matrix: {report}")
        # defects the constructor would reject but the file tolerance allows
        if report.trace_defect > TRACE_TOL or report.hermiticity_defect > HERMITIAN_TOL:
            m = 0.5 * (m + m.conj().T)
            m = m / np.trace(m).real
        return DensityMatrix(m, dims)
    raise StateError(f"kind must be 'pure' or 'mixed', got {kind!r}")


def loads_state(text: str):
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise StateError(f"state file is not valid JSON: {exc}") from exc
    return state_from_dict(obj)


def load_state(path):
    with open(path, encoding="utf-8") as fh:
        return loads_state(fh.read())


def save_state(state, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps_state(state) + "\n")
