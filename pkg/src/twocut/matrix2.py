"""Small dense 2x2 complex matrices used by the Lax pair and parametrices."""

from __future__ import annotations

from dataclasses import dataclass

from mpmath import mpf, mpc

from .precision import ensure_finite


@dataclass(frozen=True)
class Matrix2C:
    """2x2 matrix over mpmath numbers (entries row-major)."""

    a11: object
    a12: object
    a21: object
    a22: object

    def __post_init__(self):
        for name in ("a11", "a12", "a21", "a22"):
            ensure_finite(getattr(self, name), name)

    @staticmethod
    def identity() -> "Matrix2C":
        return Matrix2C(mpf(1), mpf(0), mpf(0), mpf(1))

    @staticmethod
    def diag(d1, d2) -> "Matrix2C":
        return Matrix2C(d1, mpf(0), mpf(0), d2)

    def __matmul__(self, other: "Matrix2C") -> "Matrix2C":
        return Matrix2C(
            self.a11 * other.a11 + self.a12 * other.a21,
            self.a11 * other.a12 + self.a12 * other.a22,
            self.a21 * other.a11 + self.a22 * other.a21,
            self.a21 * other.a12 + self.a22 * other.a22,
        )

    def __add__(self, other: "Matrix2C") -> "Matrix2C":
        return Matrix2C(self.a11 + other.a11, self.a12 + other.a12,
                        self.a21 + other.a21, self.a22 + other.a22)

    def __sub__(self, other: "Matrix2C") -> "Matrix2C":
        return Matrix2C(self.a11 - other.a11, self.a12 - other.a12,
                        self.a21 - other.a21, self.a22 - other.a22)

    def scale(self, s) -> "Matrix2C":
        return Matrix2C(s * self.a11, s * self.a12, s * self.a21, s * self.a22)

    def det(self):
        return self.a11 * self.a22 - self.a12 * self.a21

    def trace(self):
        return self.a11 + self.a22

    def inv(self) -> "Matrix2C":
        d = self.det()
        return Matrix2C(self.a22 / d, -self.a12 / d, -self.a21 / d, self.a11 / d)

    def apply(self, v1, v2):
        """Matrix-vector product, returned as a pair."""
        return (self.a11 * v1 + self.a12 * v2, self.a21 * v1 + self.a22 * v2)

    def norm(self):
        """Entrywise sup norm."""
        return max(abs(self.a11), abs(self.a12), abs(self.a21), abs(self.a22))

    def conj(self) -> "Matrix2C":
        def c(x):
            return x.conjugate() if isinstance(x, mpc) else x
        return Matrix2C(c(self.a11), c(self.a12), c(self.a21), c(self.a22))


SIGMA3 = Matrix2C(mpf(1), mpf(0), mpf(0), mpf(-1))


def sigma3_conj(m: Matrix2C) -> Matrix2C:
    """sigma3 @ m @ sigma3 (flips the off-diagonal signs)."""
    return Matrix2C(m.a11, -m.a12, -m.a21, m.a22)
