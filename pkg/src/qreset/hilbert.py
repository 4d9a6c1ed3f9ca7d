"""Dense operators and density matrices on small composite Hilbert spaces.

Subsystem ordering used throughout the package is
``[main system, auxiliary qubit (if any), cavity (if any)]``.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from typing import Sequence

import numpy as np

TRACE_TOL = 1e-9
HERMITIAN_TOL = 1e-10
POSITIVITY_TOL = 1e-9


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=np.complex128, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Operator:
    """Square complex matrix tagged with its subsystem dimensions."""

    data: np.ndarray
    dims: tuple[int, ...]

    def __init__(self, data, dims: Sequence[int] | None = None):
        data = np.asarray(data, dtype=np.complex128)
        if data.ndim != 2 or data.shape[0] != data.shape[1] or data.shape[0] < 1:
            raise ValueError(f"operator must be a non-empty square matrix, got shape {data.shape}")
        if dims is None:
            dims = (data.shape[0],)
        dims = tuple(int(d) for d in dims)
        if any(d < 1 for d in dims) or int(np.prod(dims)) != data.shape[0]:
            raise ValueError(f"dims {dims} do not multiply to matrix dimension {data.shape[0]}")
        if not np.all(np.isfinite(data)):
            raise ValueError("operator entries must be finite")
        object.__setattr__(self, "data", _freeze(data))
        object.__setattr__(self, "dims", dims)

    @property
    def dim(self) -> int:
        return self.data.shape[0]

    @property
    def H(self) -> "Operator":
        return Operator(self.data.conj().T, self.dims)

    def _coerce(self, other) -> np.ndarray:
        if isinstance(other, Operator):
            if other.dims != self.dims:
                raise ValueError(f"dimension mismatch: {self.dims} vs {other.dims}")
            return other.data
        raise TypeError(f"unsupported operand {type(other).__name__}")

    def __matmul__(self, other: "Operator") -> "Operator":
        return Operator(self.data @ self._coerce(other), self.dims)

    def __add__(self, other: "Operator") -> "Operator":
        return Operator(self.data + self._coerce(other), self.dims)

    def __sub__(self, other: "Operator") -> "Operator":
        return Operator(self.data - self._coerce(other), self.dims)

    def __mul__(self, scalar) -> "Operator":
        if isinstance(scalar, Operator):
            raise TypeError("use @ for operator products")
        return Operator(self.data * complex(scalar), self.dims)

    __rmul__ = __mul__

    def __neg__(self) -> "Operator":
        return Operator(-self.data, self.dims)

    def is_hermitian(self, tol: float = 1e-12) -> bool:
        return bool(np.max(np.abs(self.data - self.data.conj().T), initial=0.0) <= tol)

    def commutator(self, other: "Operator") -> "Operator":
        b = self._coerce(other)
        return Operator(self.data @ b - b @ self.data, self.dims)

    def __repr__(self) -> str:
        return f"Operator(dims={list(self.dims)})"


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Unit-trace, Hermitian, positive semidefinite density matrix.

    The invariants are checked at construction; pass ``validate=False`` only for
    intermediate integrator states that are known to be close to physical.
    """

    data: np.ndarray
    dims: tuple[int, ...]

    def __init__(self, data, dims: Sequence[int] | None = None, *, validate: bool = True):
        op = Operator(data, dims)
        if validate:
            _check_density(op.data)
        object.__setattr__(self, "data", op.data)
        object.__setattr__(self, "dims", op.dims)

    @property
    def dim(self) -> int:
        return self.data.shape[0]

    @classmethod
    def from_ket(cls, ket, dims: Sequence[int] | None = None) -> "DensityMatrix":
        ket = np.asarray(ket, dtype=np.complex128).ravel()
        ket = ket / np.linalg.norm(ket)
        return cls(np.outer(ket, ket.conj()), dims)

    def expect(self, op: Operator) -> float:
        if op.dims != self.dims:
            raise ValueError(f"dimension mismatch: {op.dims} vs {self.dims}")
        return float(np.real(np.trace(op.data @ self.data)))

    def __repr__(self) -> str:
        return f"DensityMatrix(dims={list(self.dims)})"


def _check_density(data: np.ndarray) -> None:
    tr = np.trace(data)
    if abs(tr - 1.0) > TRACE_TOL:
        raise ValueError(f"density matrix trace {tr.real:.3g} differs from 1")
    if np.max(np.abs(data - data.conj().T)) > HERMITIAN_TOL:
        raise ValueError("density matrix is not Hermitian")
    min_eig = np.linalg.eigvalsh(0.5 * (data + data.conj().T))[0]
    if min_eig < -POSITIVITY_TOL:
        raise ValueError(f"density matrix has negative eigenvalue {min_eig:.3g}")


def identity(dim: int) -> Operator:
    return Operator(np.eye(dim), [dim])


def annihilation(n_max: int) -> Operator:
    """Bosonic lowering operator truncated at ``n_max`` photons."""
    if int(n_max) != n_max or n_max < 1:
        raise ValueError(f"n_max must be an integer >= 1, got {n_max}")
    n_max = int(n_max)
    return Operator(np.diag(np.sqrt(np.arange(1, n_max + 1, dtype=float)), k=1), [n_max + 1])


def transition(dim: int, i: int, j: int) -> Operator:
    """The operator |i><j| on a ``dim``-level system."""
    if not (0 <= i < dim and 0 <= j < dim):
        raise IndexError(f"levels ({i}, {j}) out of range for dimension {dim}")
    m = np.zeros((dim, dim), dtype=np.complex128)
    m[i, j] = 1.0
    return Operator(m, [dim])


def tensor(ops: Sequence[Operator]) -> Operator:
    """Kronecker product in list order."""
    ops = list(ops)
    if not ops:
        raise ValueError("tensor of an empty list")
    data = reduce(np.kron, (op.data for op in ops))
    dims = [d for op in ops for d in op.dims]
    return Operator(data, dims)


def embed(op: Operator, index: int, dims: Sequence[int]) -> Operator:
    """Place a single-subsystem operator at ``index`` of the composite ``dims``."""
    dims = list(dims)
    if op.dim != dims[index]:
        raise ValueError(f"operator of dimension {op.dim} does not fit subsystem {index} ({dims[index]})")
    parts = [identity(d) for d in dims]
    parts[index] = op
    return tensor(parts)


def partial_trace(rho: DensityMatrix, keep: int) -> DensityMatrix:
    """Reduced density matrix of subsystem ``keep``."""
    dims = list(rho.dims)
    if not 0 <= keep < len(dims):
        raise IndexError(f"subsystem index {keep} out of range for dims {dims}")
    n = len(dims)
    t = rho.data.reshape(dims + dims)
    # bring kept row/column axes to the front, then trace all others pairwise
    others = [k for k in range(n) if k != keep]
    t = np.transpose(t, [keep] + others + [n + keep] + [n + k for k in others])
    dk = dims[keep]
    rest = int(np.prod([dims[k] for k in others])) if others else 1
    t = t.reshape(dk, rest, dk, rest)
    reduced = np.einsum("iaja->ij", t)
    return DensityMatrix(reduced, [dk], validate=False)
