"""Reflection groups Gamma_{n,m} and Fuchsian groups F_{n,m} as matrix groups.

Group elements are identified through the orbit of a base point with trivial
stabilizer, so ``g -> g.x0`` is injective and a quantized orbit point is an
exact element key at moderate radii.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from . import hypgeom as hg
from .errors import BudgetError, ConstructionError, PrecisionError, UnknownLabelError
from .hypgeom import DiskPoint, Isometry, PolygonSpec

Word = tuple[str, ...]

ORBIT_QUANTUM = 1e-7
CENSUS_RADIUS_CAP = 12.0


class Family(str, enum.Enum):
    REFLECTION = "reflection"
    FUCHSIAN = "fuchsian"


class Generator(NamedTuple):
    label: str
    iso: Isometry
    inverse_label: str


@dataclass(frozen=True)
class GroupModel:
    family: Family
    spec: PolygonSpec
    generators: tuple[Generator, ...]
    base_point: DiskPoint

    @property
    def n(self) -> int:
        return self.spec.n

    @property
    def m(self) -> int:
        return self.spec.m

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(g.label for g in self.generators)

    def index(self, label: str) -> int:
        for i, g in enumerate(self.generators):
            if g.label == label:
                return i
        raise UnknownLabelError(f"{label!r} is not a generator of {self.name}")

    def generator(self, label: str) -> Generator:
        return self.generators[self.index(label)]

    def inverse_index(self) -> list[int]:
        return [self.index(g.inverse_label) for g in self.generators]

    @property
    def name(self) -> str:
        sym = "Gamma" if self.family is Family.REFLECTION else "F"
        return f"{sym}_{{{self.n},{self.m}}}"

    @property
    def base_mover(self) -> Isometry:
        return hg.point_mover(self.base_point)

    def generator_matrices(self, frame: str = "disk") -> np.ndarray:
        """Stacked generator matrices; ``frame="base"`` conjugates so the base point sits at 0."""
        mats = hg.stack([g.iso for g in self.generators])
        if frame == "base":
            b = self.base_mover.matrix
            mats = np.linalg.inv(b) @ mats @ b
        return mats

    def step_lengths(self) -> np.ndarray:
        """``d(x0, s.x0)`` for every generator s."""
        return hg.origin_distances(self.generator_matrices("base"))


def _label(prefix: str, i: int) -> str:
    return f"{prefix}{i + 1}"


def build_group(family, n: int, m: int, base_point: DiskPoint | None = None,
                label_shift: int = 0) -> GroupModel:
    """Construct Gamma_{n,m} (reflections) or F_{n,m} (side-pairing translations).

    ``label_shift`` rotates the labeling: the generator attached to side i gets
    the label of side ``i + label_shift``.
    """
    family = Family(family)
    if family is Family.REFLECTION and m % 2:
        raise ConstructionError(f"reflection group needs even m, got m={m}")
    if family is Family.FUCHSIAN and (n % 2 or n < 4):
        raise ConstructionError(f"Fuchsian group needs even n >= 4, got n={n}")
    spec = hg.polygon_spec(n, m)
    if family is Family.REFLECTION:
        isos = hg.side_reflections(spec)
        inv = list(range(n))
        prefix = "r"
    else:
        isos = [hg.translation(2 * spec.inradius, a) for a in spec.side_angles]
        inv = [(i + n // 2) % n for i in range(n)]
        prefix = "t"
    gens = tuple(
        Generator(_label(prefix, (i + label_shift) % n), isos[i],
                  _label(prefix, (inv[i] + label_shift) % n))
        for i in range(n)
    )
    gens = tuple(sorted(gens, key=lambda g: int(g.label[1:])))
    if base_point is None:
        base_point = default_base_point(family, spec)
    model = GroupModel(family, spec, gens, base_point)
    check_base_point(model)
    return model


def default_base_point(family: Family, spec: PolygonSpec) -> DiskPoint:
    """Polygon center for Gamma; an off-axis interior point for F.

    The center is fixed by rotations lying in F_{n,m} for many pairs, e.g.
    t1 t3 t5 t1 in F_{6,4}, so F gets a point off every symmetry axis.
    """
    if family is Family.REFLECTION:
        return hg.ORIGIN
    return DiskPoint.polar(spec.inradius / 3.0, 0.618 * math.pi / spec.n)


def check_base_point(model: GroupModel, tol: float = 1e-9) -> None:
    """No non-identity element of word length <= 4 may fix the base point.

    Any such word is a product u v with |u|, |v| <= 2, and it fixes x0 exactly
    when u^-1 and v are distinct elements with the same orbit point, so it is
    enough to look for orbit collisions in the ball of word radius 2.
    """
    mats = model.generator_matrices("base")
    elems = [np.eye(2)] + list(mats) + [a @ b for a in mats for b in mats]
    elems = hg.normalize_batch(np.stack(elems))
    pts = hg.origin_images(elems)
    keys: dict[tuple[int, int], list[int]] = {}
    for idx, p in enumerate(pts):
        keys.setdefault((round(p.real / 1e-6), round(p.imag / 1e-6)), []).append(idx)
    for members in keys.values():
        for i in members:
            for j in members:
                if j <= i or abs(pts[i] - pts[j]) > tol:
                    continue
                same = (np.sign(np.linalg.det(elems[i])) == np.sign(np.linalg.det(elems[j]))
                        and min(np.abs(elems[i] - elems[j]).max(),
                                np.abs(elems[i] + elems[j]).max()) < 1e-6)
                if not same:
                    raise ConstructionError(
                        f"base point {model.base_point} has a nontrivial stabilizer in {model.name}"
                    )


# -- words --------------------------------------------------------------------

def parse_word(text: str | Sequence[str]) -> Word:
    if isinstance(text, str):
        return tuple(s.strip() for s in text.split(",") if s.strip())
    return tuple(text)


def check_word(model: GroupModel, w: Iterable[str]) -> list[int]:
    return [model.index(s) for s in w]


def evaluate(model: GroupModel, w: Iterable[str]) -> Isometry:
    """Product ``s1 s2 ... sk`` (so ``g.x = s1(s2(...sk(x)))``); empty word is the identity."""
    idx = check_word(model, w)
    mat = np.eye(2)
    gens = model.generator_matrices()
    reversing = False
    for i in idx:
        mat = hg.normalize_batch(mat @ gens[i])
        reversing ^= model.generators[i].iso.reversing
    return Isometry.from_matrix(mat, reversing)


def geo_distance(model: GroupModel, w: Iterable[str]) -> float:
    """``d(x0, g.x0)`` for the element spelled by ``w``."""
    g = evaluate(model, w)
    b = model.base_mover
    conj = (b.inverse() @ g @ b).matrix
    return float(hg.origin_distances(conj[None])[0])


def word_power(w: Sequence[str], k: int) -> Word:
    return tuple(w) * k


def canonical_word(model: GroupModel) -> Word:
    """The translation used by the singularity criterion for this family/parity."""
    n = model.n
    if model.family is Family.FUCHSIAN:
        return ("t1",)
    if n == 3:
        raise ConstructionError("no canonical hyperbolic word for n = 3: every pair of sides is adjacent")
    if n % 2 == 0:
        return ("r1", f"r{n // 2 + 1}")
    return ("r1", f"r{(n + 1) // 2}")


# -- ball census ----------------------------------------------------------------

@dataclass(frozen=True)
class BallCensus:
    radius_grid: tuple[float, ...]
    counts: tuple[int, ...]
    slope_estimate: float

    def rows(self):
        for r, c in zip(self.radius_grid, self.counts):
            yield r, c, math.log(c)


class _OrbitIndex:
    """Quantized orbit-point lookup that tolerates keys straddling a cell edge."""

    def __init__(self, quantum: float):
        self.q = quantum
        self.cells: dict[tuple[int, int], int] = {}
        self.points: list[complex] = []

    def find(self, p: complex, tol: float) -> int | None:
        fx, fy = p.real / self.q, p.imag / self.q
        kx, ky = round(fx), round(fy)
        hit = self.cells.get((kx, ky))
        if hit is not None and abs(self.points[hit] - p) <= tol:
            return hit
        near_x = abs(abs(fx - kx) - 0.5) < 0.05
        near_y = abs(abs(fy - ky) - 0.5) < 0.05
        if near_x or near_y:
            for dx in (-1, 0, 1):
                for dy in (-1, 0, 1):
                    j = self.cells.get((kx + dx, ky + dy))
                    if j is not None and abs(self.points[j] - p) <= tol:
                        return j
        return hit

    def add(self, p: complex) -> int:
        idx = len(self.points)
        self.points.append(p)
        self.cells[(round(p.real / self.q), round(p.imag / self.q))] = idx
        return idx


def census_margin(model: GroupModel) -> float:
    """Extra search radius so every element of the ball is reached through the ball."""
    offset = hg.dist(hg.ORIGIN, model.base_point)
    margin = model.spec.diameter + 2 * offset
    if model.family is Family.FUCHSIAN:
        # tile stabilizers are spelled by words that leave the tile
        margin += 4 * model.spec.inradius
    return margin


def ball_census(model: GroupModel, R_max: float, step: float = 0.5,
                cap: float = CENSUS_RADIUS_CAP, margin: float | None = None) -> BallCensus:
    """Count elements with ``d(x0, g.x0) <= R`` on a grid of radii up to ``R_max``."""
    if R_max > cap:
        raise BudgetError(f"R_max={R_max} exceeds the census cap {cap}")
    if step <= 0:
        raise ValueError("step must be positive")
    if margin is None:
        margin = census_margin(model)
    limit = R_max + margin
    gens = model.generator_matrices("base")
    inv = model.inverse_index()

    index = _OrbitIndex(ORBIT_QUANTUM)
    mats = [np.eye(2)]
    dists = [0.0]
    index.add(0j)
    # frontier: element ids plus the generator that produced them (skip backtracking)
    frontier = np.array([0])
    came_by = np.array([-1])
    all_mats = np.eye(2)[None]
    tol = ORBIT_QUANTUM / 10
    while frontier.size:
        new_ids, new_by = [], []
        base = all_mats[frontier]
        for s in range(len(gens)):
            keep = came_by != inv[s]
            if not np.any(keep):
                continue
            cand = hg.normalize_batch(base[keep] @ gens[s])
            d = hg.origin_distances(cand)
            ok = d <= limit
            cand, d = cand[ok], d[ok]
            pts = hg.origin_images(cand).tolist()
            hits = np.full(len(cand), -1)
            for j, p in enumerate(pts):
                hit = index.find(p, tol)
                if hit is None:
                    idx = index.add(p)
                    mats.append(cand[j])
                    dists.append(float(d[j]))
                    new_ids.append(idx)
                    new_by.append(s)
                else:
                    hits[j] = hit
            dup = hits >= 0
            if np.any(dup):
                _check_same_elements(cand[dup], np.stack([mats[h] for h in hits[dup]]), d[dup])
        if not new_ids:
            break
        all_mats = np.stack(mats)
        frontier = np.array(new_ids)
        came_by = np.array(new_by)

    dists_arr = np.sort(np.array(dists))
    grid = np.arange(0.0, R_max + step / 2, step)
    grid = grid[grid <= R_max + 1e-12]
    counts = np.searchsorted(dists_arr, grid + 1e-9, side="right")
    return BallCensus(tuple(float(r) for r in grid), tuple(int(c) for c in counts),
                      _slope(grid, counts))


def _check_same_elements(a: np.ndarray, b: np.ndarray, d: np.ndarray) -> None:
    det_a = a[:, 0, 0] * a[:, 1, 1] - a[:, 0, 1] * a[:, 1, 0]
    det_b = b[:, 0, 0] * b[:, 1, 1] - b[:, 0, 1] * b[:, 1, 0]
    gap = np.minimum(np.abs(a - b).max(axis=(1, 2)), np.abs(a + b).max(axis=(1, 2)))
    bad = (np.sign(det_a) != np.sign(det_b)) | (gap > 1e-5)
    if np.any(bad):
        j = int(np.argmax(bad))
        raise PrecisionError(
            f"orbit-point collision between distinct elements at distance {d[j]:.3f}"
        )


def _slope(grid: np.ndarray, counts: np.ndarray) -> float:
    half = len(grid) // 2
    x, y = grid[half:], np.log(counts[half:])
    if len(x) < 2:
        return float("nan")
    return float(np.polyfit(x, y, 1)[0])


def sinh_sandwich(spec: PolygonSpec, R: float) -> tuple[float, float]:
    """Area bounds ``4 pi sinh^2((R -+ A)/2) / Area`` on the ball count, A the diameter."""
    A = spec.diameter
    lower = 4 * math.pi * math.sinh(max(R - A, 0.0) / 2) ** 2 / spec.area
    upper = 4 * math.pi * math.sinh((R + A) / 2) ** 2 / spec.area
    return lower, upper
