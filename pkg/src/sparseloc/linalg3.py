"""Fixed-size 3/4-dimensional linear algebra, self-contained on purpose.

Everything here is pure Python so every arithmetic step can be read and
checked by hand: a cyclic Jacobi eigensolver for symmetric 3x3 matrices,
a closed-form characteristic-polynomial root finder used as its
independent cross-check, a thin right-factor SVD for 3xn data matrices,
and the 4x4 homogeneous-transform plumbing the projection chain needs.

Conventions: column vectors, row-major Mat4 storage, right-handed frames.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

from .errors import InsufficientDataError, InvalidInputError

__all__ = [
    "Vec3",
    "Mat4",
    "SymMatrix3",
    "EigenTriple",
    "SingularTriple",
    "sym_eigen3",
    "char_poly_roots3",
    "svd_right3",
    "mat4_mul",
    "mat4_inverse",
    "mat4_det",
    "transform_point",
]

# Off-diagonal convergence target and sweep cap for the Jacobi iteration.
_JACOBI_OFF_TOL = 1e-12
_JACOBI_MAX_SWEEPS = 64


class Vec3(NamedTuple):
    """3D vector; meters in world space, unitless in NDC."""

    x: float
    y: float
    z: float

    def dot(self, other: "Vec3") -> float:
        return self.x * other.x + self.y * other.y + self.z * other.z

    def cross(self, other: "Vec3") -> "Vec3":
        return Vec3(
            self.y * other.z - self.z * other.y,
            self.z * other.x - self.x * other.z,
            self.x * other.y - self.y * other.x,
        )

    def norm(self) -> float:
        return math.sqrt(self.x * self.x + self.y * self.y + self.z * self.z)

    def normalized(self) -> "Vec3":
        n = self.norm()
        if n <= 0.0 or not math.isfinite(n):
            raise InvalidInputError("cannot normalize a zero or non-finite vector")
        return Vec3(self.x / n, self.y / n, self.z / n)

    def scaled(self, s: float) -> "Vec3":
        return Vec3(self.x * s, self.y * s, self.z * s)

    def add(self, other: "Vec3") -> "Vec3":
        return Vec3(self.x + other.x, self.y + other.y, self.z + other.z)

    def sub(self, other: "Vec3") -> "Vec3":
        return Vec3(self.x - other.x, self.y - other.y, self.z - other.z)

    def neg(self) -> "Vec3":
        return Vec3(-self.x, -self.y, -self.z)

    def is_finite(self) -> bool:
        return (
            math.isfinite(self.x) and math.isfinite(self.y) and math.isfinite(self.z)
        )


@dataclass(frozen=True)
class Mat4:
    """4x4 homogeneous transform, row-major storage (a file-format contract)."""

    m: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.m) != 16:
            raise InvalidInputError("Mat4 needs exactly 16 entries")
        if not all(math.isfinite(v) for v in self.m):
            raise InvalidInputError("Mat4 entries must be finite")

    @classmethod
    def identity(cls) -> "Mat4":
        return cls((1.0, 0.0, 0.0, 0.0,
                    0.0, 1.0, 0.0, 0.0,
                    0.0, 0.0, 1.0, 0.0,
                    0.0, 0.0, 0.0, 1.0))

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[float]]) -> "Mat4":
        if len(rows) != 4 or any(len(r) != 4 for r in rows):
            raise InvalidInputError("Mat4.from_rows needs a 4x4 layout")
        return cls(tuple(float(v) for row in rows for v in row))

    @classmethod
    def translation(cls, t: Vec3) -> "Mat4":
        return cls((1.0, 0.0, 0.0, t.x,
                    0.0, 1.0, 0.0, t.y,
                    0.0, 0.0, 1.0, t.z,
                    0.0, 0.0, 0.0, 1.0))

    def rows(self) -> tuple[tuple[float, ...], ...]:
        m = self.m
        return (m[0:4], m[4:8], m[8:12], m[12:16])

    def __getitem__(self, rc: tuple[int, int]) -> float:
        r, c = rc
        return self.m[4 * r + c]


@dataclass(frozen=True)
class SymMatrix3:
    """Symmetric 3x3 matrix stored as its upper triangle."""

    a11: float
    a12: float
    a13: float
    a22: float
    a23: float
    a33: float

    def __post_init__(self) -> None:
        for v in (self.a11, self.a12, self.a13, self.a22, self.a23, self.a33):
            if not math.isfinite(v):
                raise InvalidInputError("SymMatrix3 entries must be finite")

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[float]]) -> "SymMatrix3":
        return cls(
            float(rows[0][0]), float(rows[0][1]), float(rows[0][2]),
            float(rows[1][1]), float(rows[1][2]), float(rows[2][2]),
        )

    @classmethod
    def diagonal(cls, d1: float, d2: float, d3: float) -> "SymMatrix3":
        return cls(d1, 0.0, 0.0, d2, 0.0, d3)

    def to_rows(self) -> list[list[float]]:
        return [
            [self.a11, self.a12, self.a13],
            [self.a12, self.a22, self.a23],
            [self.a13, self.a23, self.a33],
        ]

    def apply(self, v: Vec3) -> Vec3:
        return Vec3(
            self.a11 * v.x + self.a12 * v.y + self.a13 * v.z,
            self.a12 * v.x + self.a22 * v.y + self.a23 * v.z,
            self.a13 * v.x + self.a23 * v.y + self.a33 * v.z,
        )

    def trace(self) -> float:
        return self.a11 + self.a22 + self.a33

    def det(self) -> float:
        return (
            self.a11 * (self.a22 * self.a33 - self.a23 * self.a23)
            - self.a12 * (self.a12 * self.a33 - self.a23 * self.a13)
            + self.a13 * (self.a12 * self.a23 - self.a22 * self.a13)
        )

    def frobenius(self) -> float:
        return math.sqrt(
            self.a11 * self.a11 + self.a22 * self.a22 + self.a33 * self.a33
            + 2.0 * (self.a12 * self.a12 + self.a13 * self.a13 + self.a23 * self.a23)
        )


class EigenTriple(NamedTuple):
    """Eigenvalues sorted descending with matching orthonormal eigenvectors."""

    values: tuple[float, float, float]
    vectors: tuple[Vec3, Vec3, Vec3]


class SingularTriple(NamedTuple):
    """Singular values sorted descending with the 3D singular directions."""

    sigma: tuple[float, float, float]
    vectors: tuple[Vec3, Vec3, Vec3]


def sym_eigen3(s: SymMatrix3) -> EigenTriple:
    """Eigendecompose a symmetric 3x3 matrix with cyclic Jacobi rotations.

    Rotations over the pairs (0,1), (0,2), (1,2) are repeated until the
    off-diagonal norm drops below 1e-12 times the Frobenius norm (at most
    64 sweeps; 3x3 inputs converge in a handful).  Unconditionally stable
    for symmetric input, and the accumulated rotation keeps the returned
    vectors orthonormal by construction.  For repeated eigenvalues the
    basis of the eigenspace is arbitrary but still orthonormal.
    """
    a = s.to_rows()
    v = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]
    fro = s.frobenius()
    if fro > 0.0:
        tol = _JACOBI_OFF_TOL * fro
        for _ in range(_JACOBI_MAX_SWEEPS):
            off = math.sqrt(
                2.0 * (a[0][1] * a[0][1] + a[0][2] * a[0][2] + a[1][2] * a[1][2])
            )
            if off <= tol:
                break
            for p, q in ((0, 1), (0, 2), (1, 2)):
                apq = a[p][q]
                if apq == 0.0:
                    continue
                theta = (a[q][q] - a[p][p]) / (2.0 * apq)
                t = 1.0 / (abs(theta) + math.sqrt(theta * theta + 1.0))
                if theta < 0.0:
                    t = -t
                c = 1.0 / math.sqrt(t * t + 1.0)
                sn = t * c
                r = 3 - p - q  # the index not being rotated
                app, aqq = a[p][p], a[q][q]
                arp, arq = a[r][p], a[r][q]
                a[p][p] = app - t * apq
                a[q][q] = aqq + t * apq
                a[p][q] = a[q][p] = 0.0
                a[r][p] = a[p][r] = c * arp - sn * arq
                a[r][q] = a[q][r] = sn * arp + c * arq
                for i in range(3):
                    vip, viq = v[i][p], v[i][q]
                    v[i][p] = c * vip - sn * viq
                    v[i][q] = sn * vip + c * viq

    order = sorted(range(3), key=lambda i: a[i][i], reverse=True)
    values = (a[order[0]][order[0]], a[order[1]][order[1]], a[order[2]][order[2]])
    vectors = tuple(Vec3(v[0][i], v[1][i], v[2][i]) for i in order)
    return EigenTriple(values, vectors)  # type: ignore[arg-type]


def char_poly_roots3(s: SymMatrix3) -> tuple[float, float, float]:
    """Roots of det(S - lambda*I) = 0 in closed form, sorted descending.

    Expands the determinant of the shifted matrix to a cubic and solves it
    trigonometrically (all roots of a symmetric matrix are real).  Kept as
    an independent oracle for sym_eigen3; less stable near repeated roots,
    which is why it is not the production solver.
    """
    p1 = s.a12 * s.a12 + s.a13 * s.a13 + s.a23 * s.a23
    if p1 == 0.0:
        d = sorted((s.a11, s.a22, s.a33), reverse=True)
        return (d[0], d[1], d[2])

    q = s.trace() / 3.0
    p2 = (
        (s.a11 - q) ** 2 + (s.a22 - q) ** 2 + (s.a33 - q) ** 2 + 2.0 * p1
    )
    p = math.sqrt(p2 / 6.0)
    b = SymMatrix3(
        (s.a11 - q) / p, s.a12 / p, s.a13 / p,
        (s.a22 - q) / p, s.a23 / p, (s.a33 - q) / p,
    )
    r = b.det() / 2.0
    r = max(-1.0, min(1.0, r))
    phi = math.acos(r) / 3.0
    lam1 = q + 2.0 * p * math.cos(phi)
    lam3 = q + 2.0 * p * math.cos(phi + 2.0 * math.pi / 3.0)
    lam2 = 3.0 * q - lam1 - lam3
    return (lam1, lam2, lam3)


def _matrix_rows(x) -> tuple[Sequence[float], Sequence[float], Sequence[float]]:
    """Accept a 3-row matrix as any sequence-of-rows (DataMatrix.rows, ndarray)."""
    rows = getattr(x, "rows", x)
    if len(rows) != 3:
        raise InvalidInputError("expected a matrix with exactly 3 rows")
    n = len(rows[0])
    if len(rows[1]) != n or len(rows[2]) != n:
        raise InvalidInputError("matrix rows must have equal length")
    return rows[0], rows[1], rows[2]


def svd_right3(x) -> SingularTriple:
    """Singular values and 3D singular directions of a 3xn data matrix.

    Computed through the eigendecomposition of X*X^T rather than a general
    bidiagonalization: only the 3D factor and the singular values are ever
    consumed, and n is small.  The returned vectors are the eigenvectors
    of X*X^T (sign arbitrary); sigma_i^2/(n-1) equals the i-th eigenvalue
    of the covariance of X.
    """
    r0, r1, r2 = _matrix_rows(x)
    n = len(r0)
    if n < 2:
        raise InsufficientDataError(f"svd_right3 needs n >= 2 columns, got {n}")
    g11 = g12 = g13 = g22 = g23 = g33 = 0.0
    for a, b, c in zip(r0, r1, r2):
        g11 += a * a
        g12 += a * b
        g13 += a * c
        g22 += b * b
        g23 += b * c
        g33 += c * c
    gram = SymMatrix3(g11, g12, g13, g22, g23, g33)
    eig = sym_eigen3(gram)
    sigma = tuple(math.sqrt(v) if v > 0.0 else 0.0 for v in eig.values)
    return SingularTriple(sigma, eig.vectors)  # type: ignore[arg-type]


def mat4_mul(a: Mat4, b: Mat4) -> Mat4:
    """Standard homogeneous 4x4 product a*b."""
    am, bm = a.m, b.m
    out = [0.0] * 16
    for i in range(4):
        ai = 4 * i
        for j in range(4):
            out[ai + j] = (
                am[ai] * bm[j]
                + am[ai + 1] * bm[4 + j]
                + am[ai + 2] * bm[8 + j]
                + am[ai + 3] * bm[12 + j]
            )
    return Mat4(tuple(out))


def transform_point(m: Mat4, p: Vec3) -> tuple[Vec3, float]:
    """Apply m to (p, 1); returns the xyz part and homogeneous w separately.

    The perspective divide is the caller's decision.
    """
    mm = m.m
    x = mm[0] * p.x + mm[1] * p.y + mm[2] * p.z + mm[3]
    y = mm[4] * p.x + mm[5] * p.y + mm[6] * p.z + mm[7]
    z = mm[8] * p.x + mm[9] * p.y + mm[10] * p.z + mm[11]
    w = mm[12] * p.x + mm[13] * p.y + mm[14] * p.z + mm[15]
    return Vec3(x, y, z), w


def mat4_det(m: Mat4) -> float:
    """Determinant via cofactor expansion along the first row."""
    a = m.rows()

    def det3(r, c):
        rs = [i for i in range(4) if i != r]
        cs = [j for j in range(4) if j != c]
        return (
            a[rs[0]][cs[0]] * (a[rs[1]][cs[1]] * a[rs[2]][cs[2]] - a[rs[1]][cs[2]] * a[rs[2]][cs[1]])
            - a[rs[0]][cs[1]] * (a[rs[1]][cs[0]] * a[rs[2]][cs[2]] - a[rs[1]][cs[2]] * a[rs[2]][cs[0]])
            + a[rs[0]][cs[2]] * (a[rs[1]][cs[0]] * a[rs[2]][cs[1]] - a[rs[1]][cs[1]] * a[rs[2]][cs[0]])
        )

    return (
        a[0][0] * det3(0, 0)
        - a[0][1] * det3(0, 1)
        + a[0][2] * det3(0, 2)
        - a[0][3] * det3(0, 3)
    )


def mat4_inverse(m: Mat4) -> Mat4:
    """Invert via Gauss-Jordan with partial pivoting.

    Raises InvalidInputError when a pivot falls below 1e-12 times the
    matrix scale (singular for our purposes).
    """
    a = [list(row) for row in m.rows()]
    inv = [[1.0 if i == j else 0.0 for j in range(4)] for i in range(4)]
    scale = max(abs(v) for v in m.m)
    if scale == 0.0:
        raise InvalidInputError("cannot invert the zero matrix")
    pivot_tol = 1e-12 * scale

    for col in range(4):
        pivot_row = max(range(col, 4), key=lambda r: abs(a[r][col]))
        if abs(a[pivot_row][col]) <= pivot_tol:
            raise InvalidInputError("matrix is singular to working precision")
        if pivot_row != col:
            a[col], a[pivot_row] = a[pivot_row], a[col]
            inv[col], inv[pivot_row] = inv[pivot_row], inv[col]
        piv = a[col][col]
        a[col] = [v / piv for v in a[col]]
        inv[col] = [v / piv for v in inv[col]]
        for r in range(4):
            if r == col:
                continue
            f = a[r][col]
            if f != 0.0:
                a[r] = [av - f * cv for av, cv in zip(a[r], a[col])]
                inv[r] = [iv - f * cv for iv, cv in zip(inv[r], inv[col])]

    return Mat4(tuple(v for row in inv for v in row))
