"""Poincare disk primitives: points, isometries, distances, regular polygons.

Isometries are stored as real 2x2 matrices acting on the upper half-plane and
transported to the unit disk by the Cayley map ``z -> (z - i) / (z + i)``.
Orientation-reversing maps act as ``z -> (a*conj(z) + b) / (c*conj(z) + d)``,
so composition is always the plain matrix product and the determinant sign
carries the orientation.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import (
    DomainError,
    InvalidIsometryError,
    NotHyperbolicError,
    WrongIsometryClassError,
)

DET_TOL = 1e-12
# |trace| within this of 2 counts as elliptic/parabolic (identity included).
TRACE_TOL = 1e-9


@dataclass(frozen=True)
class DiskPoint:
    x: float
    y: float

    @property
    def z(self) -> complex:
        return complex(self.x, self.y)

    @classmethod
    def from_complex(cls, z: complex) -> "DiskPoint":
        return cls(float(z.real), float(z.imag))

    @classmethod
    def polar(cls, distance: float, angle: float) -> "DiskPoint":
        """Point at hyperbolic ``distance`` from the origin in direction ``angle``."""
        r = math.tanh(distance / 2.0)
        return cls(r * math.cos(angle), r * math.sin(angle))

    def norm(self) -> float:
        return math.hypot(self.x, self.y)

    def angle(self) -> float:
        return math.atan2(self.y, self.x) % (2 * math.pi)


ORIGIN = DiskPoint(0.0, 0.0)


@dataclass(frozen=True)
class Isometry:
    """Isometry of the hyperbolic plane, normalized so that ``|ad - bc| = 1``."""

    a: float
    b: float
    c: float
    d: float
    reversing: bool = False

    def __post_init__(self):
        entries = (self.a, self.b, self.c, self.d)
        if not all(math.isfinite(v) for v in entries):
            raise InvalidIsometryError(f"non-finite matrix entries {entries}")
        det = self.a * self.d - self.b * self.c
        if sum(v * v for v in entries) > 1e6:
            # ad - bc is ill conditioned here; trust the caller's orientation
            object.__setattr__(self, "reversing", bool(self.reversing))
            return
        if det == 0.0 or not math.isfinite(det):
            raise InvalidIsometryError("singular matrix")
        if (det < 0) != bool(self.reversing):
            raise InvalidIsometryError(
                f"orientation flag reversing={self.reversing} disagrees with det={det:.3g}"
            )
        s = 1.0 / math.sqrt(abs(det))
        if abs(abs(det) - 1.0) > DET_TOL:
            for name, v in zip("abcd", entries):
                object.__setattr__(self, name, v * s)
        object.__setattr__(self, "reversing", bool(self.reversing))

    @classmethod
    def from_matrix(cls, mat, reversing: bool | None = None) -> "Isometry":
        m = np.asarray(mat, dtype=float)
        if reversing is None:
            reversing = bool(m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0] < 0)
        return cls(m[0, 0], m[0, 1], m[1, 0], m[1, 1], reversing)

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.c, self.d]])

    @property
    def trace(self) -> float:
        return self.a + self.d

    def __matmul__(self, other: "Isometry") -> "Isometry":
        """Composition ``self o other`` (apply ``other`` first)."""
        if not isinstance(other, Isometry):
            return NotImplemented
        return Isometry.from_matrix(self.matrix @ other.matrix, self.reversing != other.reversing)

    def inverse(self) -> "Isometry":
        det = -1.0 if self.reversing else 1.0
        return Isometry(self.d / det, -self.b / det, -self.c / det, self.a / det, self.reversing)

    def __call__(self, p: DiskPoint) -> DiskPoint:
        return apply(self, p)

    def distance_to(self, other: "Isometry") -> float:
        """Max-entry distance between matrices, modulo the sign ambiguity of PSL(2,R)."""
        if self.reversing != other.reversing:
            return math.inf
        diff = self.matrix - other.matrix
        summ = self.matrix + other.matrix
        return float(min(np.abs(diff).max(), np.abs(summ).max()))

    def is_identity(self, tol: float = 1e-9) -> bool:
        return self.distance_to(IDENTITY) <= tol


IDENTITY = Isometry(1.0, 0.0, 0.0, 1.0)


def _to_uhp(p: complex) -> complex:
    return 1j * (1 + p) / (1 - p)


def _to_disk(z: complex) -> complex:
    return (z - 1j) / (z + 1j)


def _check_interior(p: DiskPoint) -> None:
    if not (math.isfinite(p.x) and math.isfinite(p.y)) or p.x * p.x + p.y * p.y >= 1.0:
        raise DomainError(f"point {p} is not inside the unit disk")


def apply(iso: Isometry, p: DiskPoint) -> DiskPoint:
    """Image of ``p`` under ``iso``."""
    _check_interior(p)
    z = _to_uhp(p.z)
    if iso.reversing:
        z = z.conjugate()
    w = (iso.a * z + iso.b) / (iso.c * z + iso.d)
    return DiskPoint.from_complex(_to_disk(w))


def dist(p: DiskPoint, q: DiskPoint) -> float:
    """Hyperbolic distance in the Poincare disk (curvature -1)."""
    _check_interior(p)
    _check_interior(q)
    pz, qz = p.z, q.z
    r = abs(pz - qz) / abs(1 - pz.conjugate() * qz)
    return 2.0 * math.atanh(min(r, 1.0))


def dist_arccosh(p: DiskPoint, q: DiskPoint) -> float:
    """Same distance through the arccosh form; kept as an independent cross-check."""
    _check_interior(p)
    _check_interior(q)
    num = 2.0 * abs(p.z - q.z) ** 2
    den = (1 - abs(p.z) ** 2) * (1 - abs(q.z) ** 2)
    return math.acosh(1.0 + num / den)


def translation_length(iso: Isometry) -> float:
    """Translation length ``2 arccosh(|tr|/2)``; 0 for elliptic or parabolic maps."""
    if iso.reversing:
        raise WrongIsometryClassError("translation length needs an orientation-preserving isometry")
    t = abs(iso.trace)
    if t <= 2.0 + TRACE_TOL:
        return 0.0
    return 2.0 * math.acosh(t / 2.0)


# -- elementary isometries ----------------------------------------------------

def rotation(angle: float) -> Isometry:
    """Rotation of the disk about the origin: ``p -> exp(i angle) p``."""
    c, s = math.cos(angle / 2), math.sin(angle / 2)
    return Isometry(c, s, -s, c)


def translation_x(length: float) -> Isometry:
    """Hyperbolic translation along the real diameter, moving 0 to ``tanh(length/2)``."""
    e = math.exp(length / 2)
    return Isometry(e, 0.0, 0.0, 1.0 / e)


def translation(length: float, angle: float) -> Isometry:
    """Translation by ``length`` along the diameter in direction ``angle``."""
    return rotation(angle) @ translation_x(length) @ rotation(-angle)


def diameter_reflection(angle: float) -> Isometry:
    """Reflection across the diameter at ``angle``: ``p -> exp(2 i angle) conj(p)``."""
    return rotation(angle) @ Isometry(-1.0, 0.0, 0.0, 1.0, True) @ rotation(-angle)


def line_reflection(foot_distance: float, direction: float) -> Isometry:
    """Reflection in the geodesic perpendicular to ``direction`` at ``foot_distance`` from 0."""
    t = translation(foot_distance, direction)
    return t @ diameter_reflection(direction + math.pi / 2) @ t.inverse()


def point_mover(p: DiskPoint) -> Isometry:
    """Orientation-preserving isometry taking the origin to ``p`` along a diameter."""
    r = p.norm()
    if r == 0.0:
        return IDENTITY
    _check_interior(p)
    return translation(2.0 * math.atanh(r), math.atan2(p.y, p.x))


# -- regular polygon Delta_{n,m} ----------------------------------------------

@dataclass(frozen=True)
class PolygonSpec:
    n: int
    m: int
    inradius: float
    circumradius: float
    area: float
    side_angles: tuple[float, ...]

    @property
    def diameter(self) -> float:
        return 2.0 * self.circumradius


def check_hyperbolic(n: int, m: int) -> None:
    if int(n) != n or int(m) != m:
        raise NotHyperbolicError(f"n and m must be integers, got ({n}, {m})")
    if n < 3 or m < 3:
        raise NotHyperbolicError(f"need n >= 3 and m >= 3, got ({n}, {m})")
    if m * (n - 2) <= 2 * n:
        kind = "Euclidean" if m * (n - 2) == 2 * n else "spherical"
        raise NotHyperbolicError(
            f"({n}, {m}) is {kind}: hyperbolicity needs m(n-2) > 2n, got {m * (n - 2)} <= {2 * n}"
        )


def is_hyperbolic(n: int, m: int) -> bool:
    return n >= 3 and m >= 3 and m * (n - 2) > 2 * n


def inradius_cosh(n: int, m: int) -> float:
    return math.cos(math.pi / m) / math.sin(math.pi / n)


def polygon_spec(n: int, m: int) -> PolygonSpec:
    """Metric data of the regular n-gon with interior angles ``2 pi / m``, centered at 0."""
    check_hyperbolic(n, m)
    inradius = math.acosh(inradius_cosh(n, m))
    circumradius = math.acosh(1.0 / (math.tan(math.pi / m) * math.tan(math.pi / n)))
    area = (n - 2) * math.pi - n * (2 * math.pi / m)
    angles = tuple(2 * math.pi * i / n for i in range(n))
    return PolygonSpec(int(n), int(m), inradius, circumradius, area, angles)


def side_reflections(spec: PolygonSpec) -> list[Isometry]:
    """Reflections in the sides of the polygon; entry i is labeled ``r_{i+1}``."""
    return [line_reflection(spec.inradius, a) for a in spec.side_angles]


# -- vectorized helpers (batches of matrices) ---------------------------------

def normalize_batch(mats: np.ndarray) -> np.ndarray:
    """Rescale to ``|det| = 1`` where the determinant is well conditioned.

    For large entries ``ad - bc`` cancels catastrophically; products of
    normalized factors are left as they are there, since their scale only
    drifts by rounding in the factors.
    """
    det = mats[..., 0, 0] * mats[..., 1, 1] - mats[..., 0, 1] * mats[..., 1, 0]
    frob = np.sum(mats * mats, axis=(-2, -1))
    with np.errstate(divide="ignore"):
        scale = np.where(frob < 1e6, 1.0 / np.sqrt(np.abs(det)), 1.0)
    return mats * scale[..., None, None]


def origin_images(mats: np.ndarray) -> np.ndarray:
    """Disk images of the origin under a batch of matrices (either orientation)."""
    a, b = mats[..., 0, 0], mats[..., 0, 1]
    c, d = mats[..., 1, 0], mats[..., 1, 1]
    det = a * d - b * c
    # reversing maps send i to the same point as [[-a, b], [-c, d]]
    sgn = np.where(det < 0, -1.0, 1.0)
    a = a * sgn
    c = c * sgn
    den = c * c + d * d
    z = ((a * c + b * d) + 1j * np.abs(det)) / den
    return (z - 1j) / (z + 1j)


def origin_distances(mats: np.ndarray) -> np.ndarray:
    """``d(0, g.0)`` for a batch of normalized matrices, accurate at any scale."""
    frob = np.sum(mats * mats, axis=(-2, -1)) / 2.0
    out = np.arccosh(np.maximum(frob, 1.0))
    small = frob < 1e3
    if np.any(small):
        p = origin_images(mats[small])
        out[small] = 2.0 * np.arctanh(np.minimum(np.abs(p), 1.0))
    return out


def stack(isos: Sequence[Isometry]) -> np.ndarray:
    return np.stack([g.matrix for g in isos])
