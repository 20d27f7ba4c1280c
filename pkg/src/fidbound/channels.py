"""Quantum channel representations and conversions.

A channel is stored canonically as its Liouville (transfer) matrix in a
Hermitian, trace-orthonormal operator basis ``B_0 = I/sqrt(d), B_1, ...``.
Because the basis is Hermitian and channels preserve Hermiticity, that
matrix is real. Kraus, chi and Choi views are derived on demand.

Vectorization is row-major throughout (``vec(X)[i*d + j] = X[i, j]``), so
``vec(A X B) = (A kron B^T) vec(X)``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property, lru_cache, reduce
from itertools import product
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "ChannelError",
    "OperatorBasis",
    "Channel",
    "CPTPReport",
    "make_basis",
    "from_kraus",
    "from_chi",
    "from_choi",
    "to_chi",
    "to_kraus",
    "to_choi",
    "compose",
    "compose_seq",
    "unital_block",
    "nonunital_vector",
    "from_blocks",
    "validate_cptp",
    "channel_to_json",
    "channel_from_json",
    "kraus_from_json",
    "save_channel",
    "load_channel",
]

CPTP_TOL = 1e-9
ROUNDTRIP_TOL = 1e-10
KRAUS_CUTOFF = 1e-10
MAX_DIM = 16

_PAULIS = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


class ChannelError(ValueError):
    """Raised for invalid channel data (dimension, TP or CP violations)."""


@dataclass(frozen=True, eq=False)
class OperatorBasis:
    """Hermitian trace-orthonormal basis of d x d matrices, identity first."""

    dim: int
    elements: np.ndarray = field(repr=False)  # shape (d**2, d, d)
    kind: str = "pauli"

    @cached_property
    def vec_matrix(self) -> np.ndarray:
        """Unitary d^2 x d^2 matrix whose k-th column is vec(B_k)."""
        d2 = self.dim ** 2
        return self.elements.reshape(d2, d2).T.copy()

    def gram(self) -> np.ndarray:
        return np.einsum("aij,bij->ab", self.elements.conj(), self.elements)

    def expand(self, op: np.ndarray) -> np.ndarray:
        """Coefficients <B_k, op> of a d x d operator."""
        return self.vec_matrix.conj().T @ np.asarray(op, dtype=complex).reshape(-1)

    def __len__(self) -> int:
        return self.dim ** 2


def _is_power_of_two(d: int) -> bool:
    return d >= 1 and (d & (d - 1)) == 0


def _pauli_elements(d: int) -> np.ndarray:
    n = d.bit_length() - 1
    mats = []
    for labels in product("IXYZ", repeat=n):
        mats.append(reduce(np.kron, [_PAULIS[c] for c in labels], np.eye(1, dtype=complex)))
    return np.array(mats) / np.sqrt(d)


def _gell_mann_elements(d: int) -> np.ndarray:
    mats = [np.eye(d, dtype=complex) / np.sqrt(d)]
    pairs = [(j, k) for j in range(d) for k in range(j + 1, d)]
    for j, k in pairs:
        m = np.zeros((d, d), dtype=complex)
        m[j, k] = m[k, j] = 1 / np.sqrt(2)
        mats.append(m)
    for j, k in pairs:
        m = np.zeros((d, d), dtype=complex)
        m[j, k] = -1j / np.sqrt(2)
        m[k, j] = 1j / np.sqrt(2)
        mats.append(m)
    for l in range(1, d):
        diag = np.zeros(d)
        diag[:l] = 1.0
        diag[l] = -l
        mats.append(np.diag(diag / np.sqrt(l * (l + 1))).astype(complex))
    return np.array(mats)


@lru_cache(maxsize=None)
def make_basis(d: int, kind: str | None = None) -> OperatorBasis:
    """Build the operator basis used for chi and Liouville representations.

    ``kind`` defaults to ``"pauli"`` when ``d`` is a power of two and
    ``"gell-mann"`` otherwise. Pauli elements are ordered lexicographically
    over ``I, X, Y, Z`` tensor strings; Gell-Mann elements are ordered as
    identity, symmetric, antisymmetric, then diagonal generators.
    """
    if not isinstance(d, (int, np.integer)) or d < 2:
        raise ChannelError(f"basis dimension must be an integer >= 2, got {d!r}")
    if d > MAX_DIM:
        raise ChannelError(f"dimensions above {MAX_DIM} are not supported")
    if kind is None:
        kind = "pauli" if _is_power_of_two(d) else "gell-mann"
    if kind == "pauli":
        if not _is_power_of_two(d):
            raise ChannelError(f"Pauli basis requires d a power of 2, got {d}")
        elements = _pauli_elements(d)
    elif kind == "gell-mann":
        elements = _gell_mann_elements(d)
    else:
        raise ChannelError(f"unknown basis kind {kind!r}")
    elements.setflags(write=False)
    return OperatorBasis(dim=int(d), elements=elements, kind=kind)


def _reshuffle(mat: np.ndarray, d: int) -> np.ndarray:
    # Row-major superoperator <-> Choi matrix; the map is an involution.
    return mat.reshape(d, d, d, d).transpose(0, 2, 1, 3).reshape(d * d, d * d)


@dataclass(frozen=True, eq=False)
class Channel:
    """A quantum channel held as its real Liouville matrix.

    The first row must be ``(1, 0, ..., 0)`` (trace preservation). Complete
    positivity is not enforced here so that non-CP maps can still be
    inspected with :func:`validate_cptp`; the public constructors in this
    package do enforce it.
    """

    liouville: np.ndarray = field(repr=False)
    basis_kind: str | None = None
    tol: float = CPTP_TOL

    def __post_init__(self):
        mat = np.array(self.liouville, dtype=float)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise ChannelError(f"Liouville matrix must be square, got shape {mat.shape}")
        d = int(round(np.sqrt(mat.shape[0])))
        if d * d != mat.shape[0] or d < 2:
            raise ChannelError(f"Liouville size {mat.shape[0]} is not d^2 for d >= 2")
        row_dev = np.max(np.abs(mat[0] - np.eye(1, d * d)[0]))
        if row_dev > self.tol:
            raise ChannelError(f"map is not trace preserving (first-row deviation {row_dev:.3g})")
        mat.setflags(write=False)
        object.__setattr__(self, "liouville", mat)
        object.__setattr__(self, "basis_kind", make_basis(d, self.basis_kind).kind)

    @property
    def dim(self) -> int:
        return self.basis.dim

    @property
    def basis(self) -> OperatorBasis:
        return make_basis(int(round(np.sqrt(self.liouville.shape[0]))), self.basis_kind)

    @cached_property
    def superop(self) -> np.ndarray:
        """Complex row-major superoperator S with vec(E(X)) = S vec(X)."""
        t = self.basis.vec_matrix
        return t @ self.liouville @ t.conj().T

    @cached_property
    def choi(self) -> np.ndarray:
        """Choi matrix sum_j vec(A_j) vec(A_j)^dagger (trace d)."""
        c = _reshuffle(self.superop, self.dim)
        return (c + c.conj().T) / 2

    @cached_property
    def chi(self) -> np.ndarray:
        t = self.basis.vec_matrix
        chi = t.conj().T @ self.choi @ t / self.dim
        return (chi + chi.conj().T) / 2

    @cached_property
    def kraus(self) -> list[np.ndarray]:
        return to_kraus(self)

    def apply(self, rho: np.ndarray) -> np.ndarray:
        """Apply the channel to a d x d operator."""
        rho = np.asarray(rho, dtype=complex)
        return (self.superop @ rho.reshape(-1)).reshape(self.dim, self.dim)

    def __matmul__(self, other: "Channel") -> "Channel":
        return compose(self, other)

    def allclose(self, other: "Channel", atol: float = 1e-9) -> bool:
        return self.liouville.shape == other.liouville.shape and np.allclose(
            self.liouville, other.liouville, rtol=0, atol=atol
        )


@dataclass(frozen=True)
class CPTPReport:
    is_tp: bool
    tp_deviation: float
    is_cp: bool
    min_choi_eigenvalue: float
    tol: float

    @property
    def ok(self) -> bool:
        return self.is_tp and self.is_cp


def _as_kraus_array(kraus: Iterable[np.ndarray]) -> np.ndarray:
    ops = [np.asarray(a, dtype=complex) for a in kraus]
    if not ops:
        raise ChannelError("Kraus list is empty")
    shapes = {a.shape for a in ops}
    if len(shapes) != 1:
        raise ChannelError(f"Kraus operators have mismatched shapes {sorted(shapes)}")
    (shape,) = shapes
    if len(shape) != 2 or shape[0] != shape[1]:
        raise ChannelError(f"Kraus operators must be square, got {shape}")
    return np.array(ops)


def from_kraus(kraus: Sequence[np.ndarray], basis: OperatorBasis | str | None = None,
               tol: float = CPTP_TOL) -> Channel:
    """Channel with E(rho) = sum_j A_j rho A_j^dagger.

    Raises :class:`ChannelError` when ``sum_j A_j^dagger A_j`` differs from
    the identity by more than ``tol``.
    """
    ops = _as_kraus_array(kraus)
    d = ops.shape[1]
    basis = _resolve_basis(d, basis)
    tp_dev = np.max(np.abs(np.einsum("kji,kjl->il", ops.conj(), ops) - np.eye(d)))
    if tp_dev > tol:
        raise ChannelError(f"Kraus operators are not trace preserving (deviation {tp_dev:.3g})")
    superop = np.einsum("kij,kab->iajb", ops, ops.conj()).reshape(d * d, d * d)
    t = basis.vec_matrix
    liou = t.conj().T @ superop @ t
    liou = liou.real
    liou[0] = np.eye(1, d * d)[0]
    return Channel(liou, basis.kind)


def _resolve_basis(d: int, basis) -> OperatorBasis:
    if isinstance(basis, OperatorBasis):
        if basis.dim != d:
            raise ChannelError(f"basis dimension {basis.dim} does not match operator dimension {d}")
        return basis
    return make_basis(d, basis)


def from_choi(choi: np.ndarray, basis: OperatorBasis | str | None = None,
              tol: float = CPTP_TOL) -> Channel:
    choi = np.asarray(choi, dtype=complex)
    d = int(round(np.sqrt(choi.shape[0])))
    basis = _resolve_basis(d, basis)
    superop = _reshuffle(choi, d)
    t = basis.vec_matrix
    liou = t.conj().T @ superop @ t
    if np.max(np.abs(liou.imag)) > tol:
        raise ChannelError("Choi matrix does not describe a Hermiticity-preserving map")
    return Channel(liou.real, basis.kind, tol=tol)


def from_chi(chi: np.ndarray, basis: OperatorBasis | str | None = None,
             tol: float = CPTP_TOL) -> Channel:
    """Channel with E(rho) = d * sum_kl chi_kl B_k rho B_l^dagger.

    ``chi`` must be Hermitian, positive semidefinite, of unit trace, and
    describe a trace-preserving map.
    """
    chi = np.asarray(chi, dtype=complex)
    d = int(round(np.sqrt(chi.shape[0])))
    if chi.shape != (d * d, d * d):
        raise ChannelError(f"chi matrix must be d^2 x d^2, got {chi.shape}")
    basis = _resolve_basis(d, basis)
    if np.max(np.abs(chi - chi.conj().T)) > tol:
        raise ChannelError("chi matrix is not Hermitian")
    if abs(np.trace(chi) - 1) > tol:
        raise ChannelError(f"chi matrix trace {np.trace(chi).real:.6g} != 1")
    min_eig = np.linalg.eigvalsh((chi + chi.conj().T) / 2)[0]
    if min_eig < -tol:
        raise ChannelError(f"chi matrix is not positive semidefinite (min eigenvalue {min_eig:.3g})")
    t = basis.vec_matrix
    return from_choi(d * t @ chi @ t.conj().T, basis, tol=tol)


def to_chi(ch: Channel) -> np.ndarray:
    return ch.chi.copy()


def to_choi(ch: Channel) -> np.ndarray:
    return ch.choi.copy()


def to_kraus(ch: Channel, tol: float = CPTP_TOL) -> list[np.ndarray]:
    """Kraus operators from the Choi eigendecomposition.

    Eigenvalues below ``KRAUS_CUTOFF`` are dropped and each operator is
    rephased so that ``tr(A_j)`` is real and nonnegative.
    """
    d = ch.dim
    evals, evecs = np.linalg.eigh(ch.choi)
    if evals[0] < -tol:
        raise ChannelError(f"map is not completely positive (min Choi eigenvalue {evals[0]:.3g})")
    ops = []
    for lam, vec in sorted(zip(evals, evecs.T), key=lambda t: -t[0]):
        if lam < KRAUS_CUTOFF:
            continue
        a = np.sqrt(lam) * vec.reshape(d, d)
        tr = np.trace(a)
        if abs(tr) > 1e-14:
            a = a * (abs(tr) / tr)
        ops.append(a)
    return ops


def compose(a: Channel, b: Channel) -> Channel:
    """The channel ``a o b`` (apply ``b`` first)."""
    if a.liouville.shape != b.liouville.shape:
        raise ChannelError(f"cannot compose channels of dimensions {a.dim} and {b.dim}")
    if a.basis_kind != b.basis_kind:
        raise ChannelError("cannot compose channels expressed in different bases")
    return Channel(a.liouville @ b.liouville, a.basis_kind)


def compose_seq(channels: Sequence[Channel]) -> Channel:
    """``E_1 E_2 ... E_m``: the last channel in the list acts first."""
    if not channels:
        raise ChannelError("empty channel sequence")
    return reduce(compose, channels)


def unital_block(ch: Channel) -> np.ndarray:
    return ch.liouville[1:, 1:].copy()


def nonunital_vector(ch: Channel) -> np.ndarray:
    return ch.liouville[1:, 0].copy()


def from_blocks(nonunital: np.ndarray, unital: np.ndarray, basis_kind: str | None = None) -> Channel:
    unital = np.asarray(unital, dtype=float)
    n = unital.shape[0] + 1
    liou = np.zeros((n, n))
    liou[0, 0] = 1.0
    liou[1:, 0] = nonunital
    liou[1:, 1:] = unital
    return Channel(liou, basis_kind)


def validate_cptp(ch: Channel, tol: float = CPTP_TOL) -> CPTPReport:
    d2 = ch.liouville.shape[0]
    tp_dev = float(np.max(np.abs(ch.liouville[0] - np.eye(1, d2)[0])))
    min_eig = float(np.linalg.eigvalsh(ch.choi)[0])
    return CPTPReport(
        is_tp=tp_dev <= tol,
        tp_deviation=tp_dev,
        is_cp=min_eig >= -tol,
        min_choi_eigenvalue=min_eig,
        tol=tol,
    )


# -- serialization ---------------------------------------------------------

def channel_to_json(ch: Channel) -> dict:
    return {
        "dim": ch.dim,
        "basis": ch.basis_kind,
        "liouville": [[float(x) for x in row] for row in ch.liouville],
    }


def kraus_from_json(obj: dict) -> list[np.ndarray]:
    ops = []
    for op in obj["kraus"]:
        arr = np.asarray(op, dtype=float)
        if arr.ndim != 3 or arr.shape[-1] != 2:
            raise ChannelError("Kraus entries must be nested [re, im] pairs")
        ops.append(arr[..., 0] + 1j * arr[..., 1])
    return ops


def channel_from_json(obj: dict) -> Channel:
    """Read either the Liouville form or the ``{"kraus": ...}`` import form."""
    if "kraus" in obj:
        return from_kraus(kraus_from_json(obj), obj.get("basis"))
    if "liouville" not in obj:
        raise ChannelError("channel JSON needs a 'liouville' or 'kraus' field")
    ch = Channel(np.asarray(obj["liouville"], dtype=float), obj.get("basis"))
    if "dim" in obj and int(obj["dim"]) != ch.dim:
        raise ChannelError(f"declared dim {obj['dim']} does not match Liouville size")
    return ch


def save_channel(ch: Channel, path) -> None:
    with open(path, "w") as fh:
        json.dump(channel_to_json(ch), fh, indent=1)
        fh.write("\n")


def load_channel(path) -> Channel:
    with open(path) as fh:
        return channel_from_json(json.load(fh))
