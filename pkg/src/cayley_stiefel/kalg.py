"""Dense matrix arithmetic over R, C and the quaternions H.

Scalars are stored as small vectors of real double-precision components
(1 for R, 2 for C, 4 for H) and multiplication is driven by the
structure-constant tensor of the ring.  This keeps every formula in the
rest of the library written once, and keeps quaternion noncommutativity
explicit: products never silently commute.
"""

from __future__ import annotations

import enum
from typing import Iterable

import numpy as np

DEFAULT_TOL = 1e-12


class Singular(Exception):
    """Raised when a matrix has no inverse under the working tolerance."""


class Field(enum.Enum):
    """Base ring selector: real numbers, complex numbers or quaternions."""

    REAL = "real"
    COMPLEX = "complex"
    QUATERNION = "quaternion"

    @property
    def ncomp(self) -> int:
        return _NCOMP[self]

    @classmethod
    def parse(cls, name: str) -> "Field":
        try:
            return cls(name.lower())
        except ValueError:
            raise ValueError(f"unknown field {name!r}; expected real, complex or quaternion")


_NCOMP = {Field.REAL: 1, Field.COMPLEX: 2, Field.QUATERNION: 4}


def _quaternion_structure() -> np.ndarray:
    # basis order (1, i, j, k); S[a, b, c] is the e_c coefficient of e_a * e_b
    S = np.zeros((4, 4, 4))
    table = {
        (0, 0): (0, 1), (0, 1): (1, 1), (0, 2): (2, 1), (0, 3): (3, 1),
        (1, 0): (1, 1), (1, 1): (0, -1), (1, 2): (3, 1), (1, 3): (2, -1),
        (2, 0): (2, 1), (2, 1): (3, -1), (2, 2): (0, -1), (2, 3): (1, 1),
        (3, 0): (3, 1), (3, 1): (2, 1), (3, 2): (1, -1), (3, 3): (0, -1),
    }
    for (a, b), (c, sign) in table.items():
        S[a, b, c] = sign
    return S


_STRUCTURE = {
    Field.REAL: np.ones((1, 1, 1)),
    Field.COMPLEX: _quaternion_structure()[:2, :2, :2].copy(),
    Field.QUATERNION: _quaternion_structure(),
}


class Mat:
    """Dense rows x cols matrix over one of the three base rings.

    Entries are stored row-major in a float64 array of shape
    (rows, cols, ncomp).  Instances are immutable after construction and
    every operation returns a fresh matrix, so values are safe to share
    across threads.
    """

    __slots__ = ("field", "data")

    def __init__(self, field: Field, data: np.ndarray):
        data = np.asarray(data, dtype=np.float64)
        if data.ndim != 3 or data.shape[2] != field.ncomp:
            raise ValueError(f"expected (rows, cols, {field.ncomp}) array, got {data.shape}")
        if data.size and not np.all(np.isfinite(data)):
            raise ValueError("matrix entries must be finite")
        data = data.copy()
        data.flags.writeable = False
        object.__setattr__(self, "field", field)
        object.__setattr__(self, "data", data)

    def __setattr__(self, name, value):
        raise AttributeError("Mat is immutable")

    @property
    def rows(self) -> int:
        return self.data.shape[0]

    @property
    def cols(self) -> int:
        return self.data.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.data.shape[:2]

    @property
    def H(self) -> "Mat":
        """Conjugate transpose."""
        return conj_transpose(self)

    def block(self, r0: int, r1: int, c0: int, c1: int) -> "Mat":
        """Contiguous submatrix with rows [r0, r1) and columns [c0, c1)."""
        return Mat(self.field, self.data[r0:r1, c0:c1])

    def _check_same_field(self, other: "Mat"):
        if self.field is not other.field:
            raise ValueError(f"mixed base rings: {self.field.value} vs {other.field.value}")

    def __add__(self, other: "Mat") -> "Mat":
        self._check_same_field(other)
        if self.shape != other.shape:
            raise ValueError(f"shape mismatch {self.shape} + {other.shape}")
        return Mat(self.field, self.data + other.data)

    def __sub__(self, other: "Mat") -> "Mat":
        self._check_same_field(other)
        if self.shape != other.shape:
            raise ValueError(f"shape mismatch {self.shape} - {other.shape}")
        return Mat(self.field, self.data - other.data)

    def __neg__(self) -> "Mat":
        return Mat(self.field, -self.data)

    def __mul__(self, scalar: float) -> "Mat":
        return Mat(self.field, self.data * float(scalar))

    __rmul__ = __mul__

    def __matmul__(self, other: "Mat") -> "Mat":
        self._check_same_field(other)
        if self.cols != other.rows:
            raise ValueError(f"shape mismatch {self.shape} @ {other.shape}")
        S = _STRUCTURE[self.field]
        out = np.einsum("ila,ljb,abc->ijc", self.data, other.data, S)
        return Mat(self.field, out)

    def __repr__(self) -> str:
        return f"Mat({self.field.value}, {self.rows}x{self.cols})"


def zeros(rows: int, cols: int, field: Field) -> Mat:
    return Mat(field, np.zeros((rows, cols, field.ncomp)))


def identity(n: int, field: Field) -> Mat:
    data = np.zeros((n, n, field.ncomp))
    for i in range(n):
        data[i, i, 0] = 1.0
    return Mat(field, data)


def scalar(value: Iterable[float], field: Field) -> Mat:
    """1x1 matrix from raw scalar components."""
    return Mat(field, np.asarray(value, dtype=np.float64).reshape(1, 1, field.ncomp))


def conj_transpose(m: Mat) -> Mat:
    out = np.swapaxes(m.data, 0, 1).copy()
    out[:, :, 1:] *= -1.0
    return Mat(m.field, out)


def frobenius_norm(m: Mat) -> float:
    return float(np.linalg.norm(m.data))


def skew_hermitian_part(m: Mat) -> Mat:
    if m.rows != m.cols:
        raise ValueError("skew_hermitian_part needs a square matrix")
    return 0.5 * (m - m.H)


def hermitian_part(m: Mat) -> Mat:
    if m.rows != m.cols:
        raise ValueError("hermitian_part needs a square matrix")
    return 0.5 * (m + m.H)


def hstack(*mats: Mat) -> Mat:
    field = mats[0].field
    return Mat(field, np.concatenate([m.data for m in mats], axis=1))


def vstack(*mats: Mat) -> Mat:
    field = mats[0].field
    return Mat(field, np.concatenate([m.data for m in mats], axis=0))


def _scalar_inverse(s: np.ndarray) -> np.ndarray:
    # q^{-1} = conj(q) / |q|^2, valid in all three rings
    n2 = float(np.dot(s, s))
    out = -s / n2
    out[0] = s[0] / n2
    return out


def mat_inverse(m: Mat, tol: float = DEFAULT_TOL) -> Mat:
    """Invert a square matrix by Gauss-Jordan elimination with partial pivoting.

    Pivots are chosen by largest scalar norm and all row operations multiply
    on the left, which makes the elimination valid over the noncommutative
    quaternions.  Raises Singular when the best pivot norm falls below
    tol times the largest entry norm of the input.
    """
    if m.rows != m.cols:
        raise ValueError("mat_inverse needs a square matrix")
    n = m.rows
    if n == 0:
        return m
    S = _STRUCTURE[m.field]
    aug = np.concatenate([m.data, identity(n, m.field).data], axis=1).copy()
    scale = float(np.linalg.norm(m.data, axis=2).max())
    if scale == 0.0:
        raise Singular("zero matrix")
    thresh = tol * scale
    for col in range(n):
        norms = np.linalg.norm(aug[col:, col, :], axis=1)
        p = int(np.argmax(norms))
        if norms[p] <= thresh:
            raise Singular(f"pivot norm {norms[p]:.3e} below threshold {thresh:.3e} in column {col}")
        if p:
            aug[[col, col + p]] = aug[[col + p, col]]
        pinv = _scalar_inverse(aug[col, col].copy())
        aug[col] = np.einsum("a,jb,abc->jc", pinv, aug[col], S)
        factors = aug[:, col].copy()
        factors[col] = 0.0
        aug -= np.einsum("ra,jb,abc->rjc", factors, aug[col], S)
    return Mat(m.field, aug[:, n:])


def is_invertible(m: Mat, tol: float = DEFAULT_TOL) -> bool:
    try:
        mat_inverse(m, tol)
    except Singular:
        return False
    return True


def random_gaussian(rows: int, cols: int, field: Field, seed: int) -> Mat:
    """Matrix with every real component drawn i.i.d. standard normal."""
    rng = np.random.default_rng(seed)
    return Mat(field, rng.standard_normal((rows, cols, field.ncomp)))


def unit_matrix_basis(rows: int, cols: int, field: Field) -> list[Mat]:
    """Real orthonormal basis of the full rows x cols matrix space."""
    basis = []
    for i in range(rows):
        for j in range(cols):
            for c in range(field.ncomp):
                data = np.zeros((rows, cols, field.ncomp))
                data[i, j, c] = 1.0
                basis.append(Mat(field, data))
    return basis


def skew_hermitian_basis(k: int, field: Field) -> list[Mat]:
    """Real orthonormal (Frobenius) basis of the skew-Hermitian k x k matrices."""
    basis = []
    inv_sqrt2 = 1.0 / np.sqrt(2.0)
    for i in range(k):
        # diagonal entries are purely imaginary
        for c in range(1, field.ncomp):
            data = np.zeros((k, k, field.ncomp))
            data[i, i, c] = 1.0
            basis.append(Mat(field, data))
        for j in range(i + 1, k):
            for c in range(field.ncomp):
                data = np.zeros((k, k, field.ncomp))
                data[i, j, c] = inv_sqrt2
                data[j, i, c] = inv_sqrt2 if c else -inv_sqrt2
                basis.append(Mat(field, data))
    return basis


def mat_to_json(m: Mat) -> dict:
    """Serialize per the shared schema: one component list per entry, row-major."""
    return {
        "field": m.field.value,
        "rows": m.rows,
        "cols": m.cols,
        "data": m.data.reshape(m.rows * m.cols, m.field.ncomp).tolist(),
    }


def mat_from_json(obj: dict) -> Mat:
    field = Field.parse(obj["field"])
    rows, cols = int(obj["rows"]), int(obj["cols"])
    data = np.asarray(obj["data"], dtype=np.float64).reshape(rows, cols, field.ncomp)
    return Mat(field, data)
