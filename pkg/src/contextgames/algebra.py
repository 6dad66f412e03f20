"""Qubit and two-qubit operator arithmetic.

Single-qubit observables and states are kept in Bloch form, so that every
single-qubit trace reduces to a dot product; 2x2 and 4x4 matrices are built
only when a two-party quantity is needed.

Basis ordering is |00>, |01>, |10>, |11> with sigma_z|0> = |0>.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence, Union

import numpy as np

from .errors import DimensionMismatch, NonUnitBloch, NotHermitian, UnknownKind

IDENTITY2 = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (SIGMA_X, SIGMA_Y, SIGMA_Z)

UNIT_TOL = 1e-12
RENORM_TOL = 1e-9


@dataclass(frozen=True)
class BlochVector:
    x: float
    y: float
    z: float

    def __post_init__(self):
        if not all(math.isfinite(c) for c in (self.x, self.y, self.z)):
            raise ValueError(f"non-finite Bloch components {tuple(self)}")

    @classmethod
    def of(cls, v: Iterable[float]) -> "BlochVector":
        x, y, z = (float(c) for c in v)
        return cls(x, y, z)

    def __iter__(self):
        return iter((self.x, self.y, self.z))

    def __add__(self, other: "BlochVector") -> "BlochVector":
        return BlochVector(self.x + other.x, self.y + other.y, self.z + other.z)

    def __sub__(self, other: "BlochVector") -> "BlochVector":
        return BlochVector(self.x - other.x, self.y - other.y, self.z - other.z)

    def __neg__(self) -> "BlochVector":
        return BlochVector(-self.x, -self.y, -self.z)

    def __mul__(self, k: float) -> "BlochVector":
        return BlochVector(k * self.x, k * self.y, k * self.z)

    __rmul__ = __mul__

    def dot(self, other: "BlochVector") -> float:
        return self.x * other.x + self.y * other.y + self.z * other.z

    def norm(self) -> float:
        return math.sqrt(self.dot(self))

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])

    def sigma(self) -> np.ndarray:
        """Return x*sigma_x + y*sigma_y + z*sigma_z."""
        return self.x * SIGMA_X + self.y * SIGMA_Y + self.z * SIGMA_Z


ZERO_BLOCH = BlochVector(0.0, 0.0, 0.0)


@dataclass(frozen=True)
class QubitObservable:
    """Dichotomic observable n.sigma with eigenvalues +1 and -1."""

    bloch: BlochVector

    def __post_init__(self):
        if abs(self.bloch.norm() - 1.0) > UNIT_TOL:
            raise NonUnitBloch(f"observable Bloch norm {self.bloch.norm()!r} is not 1")

    @property
    def matrix(self) -> np.ndarray:
        return self.bloch.sigma()

    def __neg__(self) -> "QubitObservable":
        return QubitObservable(-self.bloch)


@dataclass(frozen=True)
class QubitDensity:
    """rho = (I + r.sigma)/2.

    Rank-one projectors and pure states share this representation; ``role``
    only records which one is meant ("state" or "projector").
    """

    bloch: BlochVector
    role: str = "state"

    def __post_init__(self):
        if self.bloch.norm() > 1.0 + UNIT_TOL:
            raise NonUnitBloch(f"density Bloch norm {self.bloch.norm()!r} exceeds 1")
        if self.role not in ("state", "projector"):
            raise ValueError(f"unknown role {self.role!r}")

    @property
    def matrix(self) -> np.ndarray:
        return 0.5 * (IDENTITY2 + self.bloch.sigma())

    @property
    def is_pure(self) -> bool:
        return abs(self.bloch.norm() - 1.0) <= UNIT_TOL

    def eigenvalues(self) -> tuple[float, float]:
        r = self.bloch.norm()
        return ((1 - r) / 2, (1 + r) / 2)


MAXIMALLY_MIXED = QubitDensity(ZERO_BLOCH)


def _as_bloch(v) -> BlochVector:
    return v if isinstance(v, BlochVector) else BlochVector.of(v)


def observable_from_bloch(v, renormalize: bool = True) -> QubitObservable:
    """Build n.sigma from a (nearly) unit Bloch vector.

    Deviations up to 1e-9 in the norm are renormalized away unless
    ``renormalize`` is False.
    """
    v = _as_bloch(v)
    dev = abs(v.norm() - 1.0)
    if dev <= UNIT_TOL:
        return QubitObservable(v)
    if dev <= RENORM_TOL and renormalize:
        return QubitObservable(v * (1.0 / v.norm()))
    raise NonUnitBloch(f"Bloch norm {v.norm()!r} deviates from 1 by {dev:.3g}")


def projector_of(obs: QubitObservable, sign: int) -> QubitDensity:
    """(I + sign*A)/2 for a dichotomic observable A."""
    if sign not in (1, -1):
        raise ValueError(f"sign must be +1 or -1, got {sign!r}")
    return QubitDensity(obs.bloch * sign, role="projector")


@dataclass(frozen=True, eq=False)
class TwoQubitOperator:
    matrix: np.ndarray
    hermitian: bool = False

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.shape != (4, 4):
            raise DimensionMismatch(f"expected a 4x4 operator, got shape {m.shape}")
        if self.hermitian and np.max(np.abs(m - m.conj().T)) > UNIT_TOL:
            raise NotHermitian("operator flagged Hermitian is not")
        object.__setattr__(self, "matrix", m)

    def __add__(self, other: "TwoQubitOperator") -> "TwoQubitOperator":
        return TwoQubitOperator(self.matrix + other.matrix,
                                self.hermitian and other.hermitian)

    def __mul__(self, k: float) -> "TwoQubitOperator":
        return TwoQubitOperator(k * self.matrix, self.hermitian and np.isreal(k))

    __rmul__ = __mul__


@dataclass(frozen=True, eq=False)
class TwoQubitState:
    matrix: np.ndarray
    label: str | None = None

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.shape != (4, 4):
            raise DimensionMismatch(f"expected a 4x4 density matrix, got shape {m.shape}")
        if np.max(np.abs(m - m.conj().T)) > UNIT_TOL:
            raise NotHermitian("density matrix is not Hermitian")
        if abs(np.trace(m) - 1) > UNIT_TOL:
            raise ValueError(f"density matrix has trace {np.trace(m).real!r}")
        if hermitian_eigh(m)[0][0] < -1e-10:
            raise ValueError("density matrix has a negative eigenvalue")
        object.__setattr__(self, "matrix", m)

    @classmethod
    def from_vector(cls, psi, label: str | None = None) -> "TwoQubitState":
        psi = np.asarray(psi, dtype=complex).reshape(4)
        psi = psi / np.linalg.norm(psi)
        return cls(np.outer(psi, psi.conj()), label)


Single = Union[QubitObservable, QubitDensity]


def _single_matrix(x) -> np.ndarray:
    if isinstance(x, (QubitObservable, QubitDensity)):
        return x.matrix
    m = np.asarray(x, dtype=complex)
    if m.shape != (2, 2):
        raise DimensionMismatch(f"expected a 2x2 operator, got shape {m.shape}")
    return m


def tensor_product(a, b) -> TwoQubitOperator:
    ma, mb = _single_matrix(a), _single_matrix(b)
    herm = (np.allclose(ma, ma.conj().T, atol=UNIT_TOL)
            and np.allclose(mb, mb.conj().T, atol=UNIT_TOL))
    return TwoQubitOperator(np.kron(ma, mb), hermitian=herm)


def expectation(state, obs) -> float:
    """Tr[state . obs] for matching one- or two-qubit arguments."""
    if isinstance(state, QubitDensity):
        if isinstance(obs, QubitObservable):
            return state.bloch.dot(obs.bloch)
        if isinstance(obs, QubitDensity):
            return 0.5 * (1.0 + state.bloch.dot(obs.bloch))
        raise DimensionMismatch("single-qubit state paired with a two-qubit operator")
    if isinstance(state, (TwoQubitState, TwoQubitOperator)):
        if isinstance(obs, (QubitObservable, QubitDensity)):
            raise DimensionMismatch("two-qubit state paired with a single-qubit operator")
        om = obs.matrix if isinstance(obs, TwoQubitOperator) else np.asarray(obs)
        if om.shape != (4, 4):
            raise DimensionMismatch(f"operator shape {om.shape} does not match state")
        value = np.trace(state.matrix @ om)
        if abs(value.imag) > 1e-10:
            raise NotHermitian(f"expectation has imaginary part {value.imag!r}")
        return float(value.real)
    raise DimensionMismatch(f"unsupported state type {type(state).__name__}")


def bell_operator(expr, alice: Sequence[QubitObservable],
                  bob: Sequence[QubitObservable]) -> TwoQubitOperator:
    """Sum over (x, y) of M[x][y] A_x (x) B_y."""
    coeffs = np.asarray(getattr(expr, "coefficients", expr), dtype=float)
    if coeffs.shape != (len(alice), len(bob)):
        raise DimensionMismatch(
            f"coefficients {coeffs.shape} vs settings ({len(alice)}, {len(bob)})")
    total = np.zeros((4, 4), dtype=complex)
    for x, a in enumerate(alice):
        # contract Bob's side first: A_x (x) (sum_y M_xy B_y)
        bsum = sum((coeffs[x, y] * b.matrix for y, b in enumerate(bob)),
                   np.zeros((2, 2), dtype=complex))
        total += np.kron(a.matrix, bsum)
    return TwoQubitOperator(total, hermitian=True)


# -- Hermitian eigenproblem -------------------------------------------------

def hermitian_eigh(h, tol: float = 1e-14, max_sweeps: int = 100):
    """Eigen-decomposition of a small complex Hermitian matrix by cyclic Jacobi.

    Returns ``(values, vectors)`` with values ascending and eigenvectors in the
    columns of ``vectors``.
    """
    a = np.array(getattr(h, "matrix", h), dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {a.shape}")
    if np.max(np.abs(a - a.conj().T), initial=0.0) > 1e-10:
        raise NotHermitian("matrix is not Hermitian within 1e-10")
    n = a.shape[0]
    # plain lists of Python complex numbers: for n <= 8 this beats numpy's per-call overhead
    a = (0.5 * (a + a.conj().T)).tolist()
    v = [[complex(i == j) for j in range(n)] for i in range(n)]
    scale = max([1.0] + [abs(x) for row in a for x in row])
    for _ in range(max_sweeps):
        off = sum(abs(a[i][j]) ** 2 for i in range(n) for j in range(n) if i != j)
        if math.sqrt(off) <= tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p][q]
                mag = abs(apq)
                if mag == 0.0:
                    continue
                phase = apq / mag
                theta = (a[q][q].real - a[p][p].real) / (2.0 * mag)
                t = 1.0 / (abs(theta) + math.sqrt(theta * theta + 1.0))
                if theta < 0:
                    t = -t
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                # unitary G = [[c, s], [-s conj(phase), c conj(phase)]] on columns p, q:
                # a phase rotation making a[p][q] real, then a real Givens rotation
                sp = s * phase.conjugate()
                cp = c * phase.conjugate()
                for row in a:
                    x, y = row[p], row[q]
                    row[p] = c * x - sp * y
                    row[q] = s * x + cp * y
                for row in v:
                    x, y = row[p], row[q]
                    row[p] = c * x - sp * y
                    row[q] = s * x + cp * y
                rp, rq = a[p], a[q]
                for k in range(n):
                    x, y = rp[k], rq[k]
                    rp[k] = c * x - sp.conjugate() * y
                    rq[k] = s * x + cp.conjugate() * y
                a[p][q] = a[q][p] = 0j
    values = np.array([a[i][i].real for i in range(n)])
    v = np.array(v, dtype=complex)
    order = np.argsort(values, kind="stable")
    return values[order], v[:, order]


def max_eigenvalue_hermitian(h) -> tuple[float, np.ndarray]:
    """Largest eigenvalue and a normalized eigenvector."""
    values, vectors = hermitian_eigh(h)
    vec = vectors[:, -1]
    return float(values[-1]), vec / np.linalg.norm(vec)


# -- partial traces and Bell states ----------------------------------------

def _four(m) -> np.ndarray:
    m = np.asarray(getattr(m, "matrix", m), dtype=complex)
    if m.shape != (4, 4):
        raise DimensionMismatch(f"expected a 4x4 operator, got shape {m.shape}")
    return m


def partial_trace_b(m) -> np.ndarray:
    """Trace out the second qubit: out[i, j] = sum_k M[2i+k, 2j+k]."""
    return np.einsum("ikjk->ij", _four(m).reshape(2, 2, 2, 2))


def partial_trace_a(m) -> np.ndarray:
    """Trace out the first qubit: out[i, j] = sum_k M[2k+i, 2k+j]."""
    return np.einsum("kikj->ij", _four(m).reshape(2, 2, 2, 2))


_S = 1 / math.sqrt(2)
BELL_VECTORS = {
    "phi_plus": np.array([_S, 0, 0, _S], dtype=complex),
    "phi_minus": np.array([_S, 0, 0, -_S], dtype=complex),
    "psi_plus": np.array([0, _S, _S, 0], dtype=complex),
    "psi_minus": np.array([0, _S, -_S, 0], dtype=complex),
}

# <a.sigma (x) b.sigma> = a^T T b for each Bell state
BELL_CORRELATIONS = {
    "phi_plus": np.diag([1.0, -1.0, 1.0]),
    "phi_minus": np.diag([-1.0, 1.0, 1.0]),
    "psi_plus": np.diag([1.0, 1.0, -1.0]),
    "psi_minus": np.diag([-1.0, -1.0, -1.0]),
}


def maximally_entangled_state(kind: str = "phi_plus") -> TwoQubitState:
    try:
        psi = BELL_VECTORS[kind]
    except KeyError:
        raise UnknownKind(f"unknown Bell state {kind!r}; "
                          f"expected one of {sorted(BELL_VECTORS)}") from None
    return TwoQubitState.from_vector(psi, label=kind)


def anticorrelated_partner(obs: QubitObservable, kind: str = "phi_plus") -> QubitObservable:
    """Observable B with <A (x) B> = -1 on the given Bell state."""
    try:
        t = BELL_CORRELATIONS[kind]
    except KeyError:
        raise UnknownKind(f"unknown Bell state {kind!r}") from None
    return QubitObservable(BlochVector.of(-(t @ obs.bloch.as_array())))


def correlated_partner(obs: QubitObservable, kind: str = "phi_plus") -> QubitObservable:
    """Observable B with <A (x) B> = +1 on the given Bell state."""
    return -anticorrelated_partner(obs, kind)


# -- seeded random objects --------------------------------------------------

def random_unit_bloch(rng: np.random.Generator) -> BlochVector:
    """Uniform direction on the sphere from a normalized Gaussian triple."""
    while True:
        g = rng.normal(size=3)
        n = np.linalg.norm(g)
        if n > 1e-8:
            return BlochVector.of(g / n)


def random_observable(rng: np.random.Generator) -> QubitObservable:
    return observable_from_bloch(random_unit_bloch(rng))


def random_pure_state(rng: np.random.Generator) -> TwoQubitState:
    """Pure two-qubit state from a normalized complex Gaussian 4-vector."""
    psi = rng.normal(size=4) + 1j * rng.normal(size=4)
    return TwoQubitState.from_vector(psi)


def bloch_of(m) -> BlochVector:
    """(Tr[m sx], Tr[m sy], Tr[m sz]) with no factor 1/2, so a state gives its Bloch vector."""
    m = _single_matrix(m)
    return BlochVector.of(float(np.trace(m @ p).real) for p in PAULIS)
