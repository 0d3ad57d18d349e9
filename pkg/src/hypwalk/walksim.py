"""Monte Carlo for nearest-neighbour walks on Gamma_{n,m} and F_{n,m}.

Walks run in the frame where the base point sits at the origin, so the
displacement of ``X_k`` is read off the matrix itself and stays accurate far
beyond the radius where disk coordinates lose resolution.  Step draws come
from :mod:`hypwalk.rng`, keyed on (seed, trial, step).
"""
from __future__ import annotations

import math
import warnings
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Sequence

import mpmath
import numpy as np
from scipy import stats

from . import hypgeom as hg
from . import rng
from .criterion import StepMeasure
from .errors import ConfigurationError, DegenerateDistributionWarning, MeasureError
from .groups import Family, GroupModel, Word, evaluate, geo_distance, word_power

MATCH_TOL = 1e-7
# Beyond this excursion (on top of the target's own distance) a float walk can
# no longer resolve a return to the target; such trials are retired as misses.
RETIRE_EXCURSION = 15.0
DEFAULT_STOP_RADIUS = 1 - 1e-4
DEFAULT_STEP_CAP = 100_000


@dataclass(frozen=True)
class WalkConfig:
    model: GroupModel
    mu: StepMeasure
    steps: int = 50
    trials: int = 1000
    seed: int = 0
    stop_radius: float = DEFAULT_STOP_RADIUS
    step_cap: int = DEFAULT_STEP_CAP
    bins: int | None = None
    workers: int = 1
    # test-only escape hatch for degenerate (non-generating) measures
    require_generating: bool = True

    def __post_init__(self):
        if self.steps < 0:
            raise ConfigurationError(f"steps must be >= 0, got {self.steps}")
        if self.trials < 1:
            raise ConfigurationError(f"trials must be >= 1, got {self.trials}")
        if not (0.9 <= self.stop_radius < 1.0):
            raise ConfigurationError(f"stop_radius must lie in [0.9, 1), got {self.stop_radius}")
        if self.workers < 1:
            raise ConfigurationError("workers must be >= 1")
        if self.require_generating:
            self.mu.check_generating(self.model)
            if self.model.family is Family.FUCHSIAN:
                self.mu.check_symmetric(self.model)
        else:
            extra = self.mu.support - set(self.model.labels)
            if extra:
                raise MeasureError(f"labels {sorted(extra)} are not generators of {self.model.name}")

    @property
    def cdf(self) -> np.ndarray:
        cdf = np.cumsum(self.mu.vector(self.model))
        cdf[-1] = 1.0
        return cdf


class Estimate(NamedTuple):
    value: float
    stderr: float


@dataclass(frozen=True)
class WalkStats:
    drift_hat: float
    drift_stderr: float
    entropy_hat: float
    entropy_stderr: float
    volume_hat: float
    fi_gap: float
    fi_stderr: float
    samples_used: int
    distinct_endpoints: int
    steps: int
    entropy_biased: bool = True

    def to_dict(self) -> dict:
        return {
            "drift_hat": self.drift_hat,
            "drift_stderr": self.drift_stderr,
            "entropy_hat": self.entropy_hat,
            "entropy_stderr": self.entropy_stderr,
            "volume_hat": self.volume_hat,
            "fi_gap": self.fi_gap,
            "fi_stderr": self.fi_stderr,
            "samples_used": self.samples_used,
            "distinct_endpoints": self.distinct_endpoints,
            "steps": self.steps,
            "entropy_biased": self.entropy_biased,
        }


# -- engine ----------------------------------------------------------------------

def _chunks(trials: int, workers: int) -> list[np.ndarray]:
    ids = np.arange(trials, dtype=np.uint64)
    return [c for c in np.array_split(ids, workers) if c.size]


def _map_trials(fn: Callable[[np.ndarray], object], trials: int, workers: int) -> list:
    """Run ``fn`` on contiguous trial chunks; results come back in trial order."""
    parts = _chunks(trials, workers)
    if len(parts) == 1:
        return [fn(parts[0])]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, parts))


def _draw(config: WalkConfig, trial_ids: np.ndarray, step: int, cdf: np.ndarray) -> np.ndarray:
    return rng.choose(cdf, rng.uniforms(config.seed, trial_ids, step))


def _endpoints(config: WalkConfig, trial_ids: np.ndarray, steps: int,
               keep_letters: bool = False):
    gens = config.model.generator_matrices("base")
    cdf = config.cdf
    mats = np.broadcast_to(np.eye(2), (len(trial_ids), 2, 2)).copy()
    letters = np.empty((len(trial_ids), steps), dtype=np.int16) if keep_letters else None
    for k in range(1, steps + 1):
        idx = _draw(config, trial_ids, k, cdf)
        mats = hg.normalize_batch(mats @ gens[idx])
        if keep_letters:
            letters[:, k - 1] = idx
    return mats, letters


def walk_points(model: GroupModel, letters: Sequence[str]) -> list[tuple[hg.DiskPoint, int]]:
    """Orbit points of the partial products of a given letter sequence."""
    out = [(model.base_point, 0)]
    for k in range(1, len(letters) + 1):
        g = evaluate(model, letters[:k])
        out.append((hg.apply(g, model.base_point), k))
    return out


def sample_path(config: WalkConfig, trial: int = 0) -> list[tuple[hg.DiskPoint, int]]:
    """One sample path ``X_0 = e, X_k = xi_1 ... xi_k`` as (orbit point, word length)."""
    cdf = config.cdf
    ids = np.array([trial], dtype=np.uint64)
    letters = [config.model.labels[int(_draw(config, ids, k, cdf)[0])]
               for k in range(1, config.steps + 1)]
    return walk_points(config.model, letters)


# -- drift and entropy ----------------------------------------------------------------

def _mean_stderr(x: np.ndarray) -> Estimate:
    n = len(x)
    mean = math.fsum(x.tolist()) / n
    if n < 2:
        return Estimate(mean, float("nan"))
    var = math.fsum(((x - mean) ** 2).tolist()) / (n - 1)
    return Estimate(mean, math.sqrt(var / n))


def _require_steps(config: WalkConfig) -> None:
    if config.steps < 1:
        raise ConfigurationError("this estimator needs steps >= 1")


def _displacements(config: WalkConfig) -> np.ndarray:
    parts = _map_trials(lambda ids: hg.origin_distances(_endpoints(config, ids, config.steps)[0]),
                        config.trials, config.workers)
    return np.concatenate(parts)


def estimate_drift(config: WalkConfig) -> Estimate:
    """Mean of ``d(x0, X_n.x0) / n`` over trials, with its standard error."""
    _require_steps(config)
    if config.steps < 50:
        warnings.warn(f"drift at steps={config.steps} < 50 carries a large finite-n bias", stacklevel=2)
    return _drift_from(_displacements(config), config.steps)


def _drift_from(disp: np.ndarray, steps: int) -> Estimate:
    est = _mean_stderr(disp / steps)
    return Estimate(est.value, est.stderr)


def _fixed_point_generators(model: GroupModel, bits: int) -> list[np.ndarray]:
    """Base-frame generator matrices as integers scaled by ``2**bits``."""
    with mpmath.workdps(int(bits * 0.302) + 20):
        n, m = model.n, model.m
        pi = mpmath.pi

        def rot(a):
            c, s = mpmath.cos(a / 2), mpmath.sin(a / 2)
            return mpmath.matrix([[c, s], [-s, c]])

        def tx(L):
            e = mpmath.exp(L / 2)
            return mpmath.matrix([[e, 0], [0, 1 / e]])

        flip = mpmath.matrix([[0, 1], [1, 0]])
        h = mpmath.acosh(mpmath.cos(pi / m) / mpmath.sin(pi / n))
        mats = []
        for i in range(n):
            th = 2 * pi * i / n
            if model.family is Family.REFLECTION:
                g = rot(th) * tx(h) * flip * tx(-h) * rot(-th)
            else:
                g = rot(th) * tx(2 * h) * rot(-th)
            mats.append(g)
        bx, by = mpmath.mpf(model.base_point.x), mpmath.mpf(model.base_point.y)
        r = mpmath.sqrt(bx * bx + by * by)
        if r == 0:
            b = mpmath.eye(2)
        else:
            phi = mpmath.atan2(by, bx)
            b = rot(phi) * tx(2 * mpmath.atanh(r)) * rot(-phi)
        binv = b ** -1
        scale = mpmath.mpf(2) ** bits
        out = []
        # relabeled models keep side order in the labels; map label -> side index
        for gen in model.generators:
            side = _side_of(model, gen.iso)
            g = binv * mats[side] * b
            arr = np.empty((2, 2), dtype=object)
            for a in range(2):
                for c in range(2):
                    arr[a, c] = int(mpmath.nint(g[a, c] * scale))
            out.append(arr)
    return out


def _side_of(model: GroupModel, iso: hg.Isometry) -> int:
    """Index of the polygon side a generator is attached to."""
    spec = model.spec
    ref = ([hg.line_reflection(spec.inradius, a) for a in spec.side_angles]
           if model.family is Family.REFLECTION
           else [hg.translation(2 * spec.inradius, a) for a in spec.side_angles])
    return min(range(spec.n), key=lambda i: iso.distance_to(ref[i]))


def exact_keys(config: WalkConfig, letters: np.ndarray) -> list[tuple]:
    """Hashable element keys for the words in ``letters`` (one row per trial).

    Products are carried in fixed point with enough bits that distinct
    elements at the reachable distance land on distinct keys, while one
    element reached through different words rounds to the same key.
    """
    steps = letters.shape[1]
    max_step = float(np.max(config.model.step_lengths())) if steps else 0.0
    e_bits = int(math.ceil(steps * max_step / 2 / math.log(2))) + 2
    bits = 2 * e_bits + 96
    shift = bits - e_bits - 24
    gens = _fixed_point_generators(config.model, bits)
    one = 1 << bits
    mats = np.empty((letters.shape[0], 2, 2), dtype=object)
    mats[:, 0, 0] = one
    mats[:, 1, 1] = one
    mats[:, 0, 1] = 0
    mats[:, 1, 0] = 0
    for k in range(steps):
        col = letters[:, k]
        for s, g in enumerate(gens):
            sel = np.nonzero(col == s)[0]
            if sel.size:
                mats[sel] = (mats[sel] @ g) >> bits
    quarter = 1 << (bits - 2)
    # round to nearest: exact entries such as 0 and 1 sit on cell edges under flooring
    half = 1 << (shift - 1)
    keys = []
    for mat in mats.reshape(-1, 4):
        a, b, c, d = (int(v) for v in mat)
        pivot = next(v for v in (a, b, c, d) if abs(v) > quarter)
        sgn = -1 if pivot < 0 else 1
        orient = 1 if a * d - b * c > 0 else -1
        keys.append((orient,) + tuple((sgn * v + half) >> shift for v in (a, b, c, d)))
    return keys


def _entropy_from(keys: list[tuple], steps: int) -> tuple[Estimate, int]:
    trials = len(keys)
    if trials < 2:
        raise ConfigurationError("entropy needs at least 2 trials for a standard error")
    counts = Counter(keys)
    if len(counts) < 2:
        warnings.warn("all trials ended at the same element; entropy estimate is degenerate",
                      DegenerateDistributionWarning, stacklevel=3)
    logp = np.array([math.log(counts[k] / trials) for k in keys])
    est = _mean_stderr(-logp)
    return Estimate(est.value / steps, est.stderr / steps), len(counts)


def estimate_entropy(config: WalkConfig) -> Estimate:
    """Plug-in entropy rate of the endpoint distribution.

    Biased low at fixed ``steps``: once the endpoints are mostly distinct the
    estimate saturates near ``log(trials) / steps``.
    """
    _require_steps(config)
    letters = np.concatenate(_map_trials(
        lambda ids: _endpoints(config, ids, config.steps, keep_letters=True)[1],
        config.trials, config.workers))
    return _entropy_from(exact_keys(config, letters), config.steps)[0]


def simulate(config: WalkConfig, volume_hat: float = 1.0) -> WalkStats:
    """Drift, entropy and the fundamental-inequality gap from one batch of walks.

    ``volume_hat`` defaults to 1, the exponential growth rate of orbit balls for
    any cocompact action on the hyperbolic plane; pass a census slope to use
    an empirical value instead.
    """
    _require_steps(config)
    parts = _map_trials(lambda ids: _endpoints(config, ids, config.steps, keep_letters=True),
                        config.trials, config.workers)
    mats = np.concatenate([p[0] for p in parts])
    letters = np.concatenate([p[1] for p in parts])
    drift = _drift_from(hg.origin_distances(mats), config.steps)
    entropy, distinct = _entropy_from(exact_keys(config, letters), config.steps)
    gap = drift.value * volume_hat - entropy.value
    gap_se = math.hypot(drift.stderr * volume_hat, entropy.stderr)
    return WalkStats(drift.value, drift.stderr, entropy.value, entropy.stderr, volume_hat,
                     gap, gap_se, config.trials, distinct, config.steps)


# -- first passage and the Green metric -------------------------------------------------

class FirstPassage(NamedTuple):
    f_hat: float
    stderr: float
    green_upper: float
    zero_hits: bool
    horizon: int
    trials: int


def _target_point(model: GroupModel, target: Sequence[str]) -> tuple[complex, float]:
    g = evaluate(model, target)
    b = model.base_mover
    conj = (b.inverse() @ g @ b).matrix[None]
    return complex(hg.origin_images(conj)[0]), float(hg.origin_distances(conj)[0])


def first_passage(config: WalkConfig, target: Sequence[str], horizon: int) -> FirstPassage:
    """Fraction of trials whose path visits ``target`` at some time ``<= horizon``.

    This under-counts the first-entrance probability (finite horizon, retired
    excursions), so ``-log f_hat`` is an upper bound on the Green distance.
    """
    target = tuple(target)
    if horizon < 0:
        raise ConfigurationError("horizon must be >= 0")
    p_target, d_target = _target_point(config.model, target)
    retire = d_target + RETIRE_EXCURSION
    gens = config.model.generator_matrices("base")
    cdf = config.cdf

    def run(ids: np.ndarray) -> int:
        mats = np.broadcast_to(np.eye(2), (len(ids), 2, 2)).copy()
        hit = np.abs(hg.origin_images(mats) - p_target) < MATCH_TOL
        live = ~hit
        for k in range(1, horizon + 1):
            if not np.any(live):
                break
            act = np.nonzero(live)[0]
            idx = _draw(config, ids[act], k, cdf)
            cur = hg.normalize_batch(mats[act] @ gens[idx])
            mats[act] = cur
            found = np.abs(hg.origin_images(cur) - p_target) < MATCH_TOL
            hit[act[found]] = True
            gone = found | (hg.origin_distances(cur) > retire)
            live[act[gone]] = False
        return int(hit.sum())

    hits = sum(_map_trials(run, config.trials, config.workers))
    f = hits / config.trials
    se = math.sqrt(f * (1 - f) / config.trials)
    green = -math.log(f) if hits else math.inf
    return FirstPassage(f, se, green, hits == 0, horizon, config.trials)


class ProbeRow(NamedTuple):
    k: int
    geo_distance: float
    green_upper: float
    lower_bound_gap: float
    geo_minus_cost: float
    f_hat: float
    zero_hits: bool


def weight_cost(mu: StepMeasure, w: Sequence[str]) -> float:
    return math.fsum(-math.log(mu[s]) for s in w)


def divergence_probe(config: WalkConfig, g: Sequence[str], k_max: int) -> list[ProbeRow]:
    """Geometric vs. Green distances along the powers ``g^k``, k = 0..k_max.

    ``lower_bound_gap`` is ``k (L - cost)``, the guaranteed lower bound on
    ``d_H(e, g^k) - d_mu(e, g^k)`` when the base point lies on the axis of g.
    """
    g = tuple(g)
    if k_max > 5:
        raise ConfigurationError("k_max above 5 needs exponentially many trials")
    iso = evaluate(config.model, g)
    L = hg.translation_length(iso)
    if L <= hg.TRACE_TOL:
        raise ConfigurationError(f"{g} is not hyperbolic")
    cost = weight_cost(config.mu, g)
    rows = []
    for k in range(k_max + 1):
        w = word_power(g, k)
        geo = geo_distance(config.model, w)
        fp = first_passage(config, w, max(config.steps, len(w)))
        rows.append(ProbeRow(k, geo, fp.green_upper, k * (L - cost), geo - k * cost,
                             fp.f_hat, fp.zero_hits))
    return rows


# -- boundary hitting ---------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class BoundarySample:
    angles: np.ndarray
    trials: int
    histogram: np.ndarray
    bin_edges: np.ndarray
    non_converged: int = 0

    @property
    def bin_centers(self) -> np.ndarray:
        return (self.bin_edges[:-1] + self.bin_edges[1:]) / 2

    def to_dict(self) -> dict:
        return {
            "trials": self.trials,
            "converged": int(self.histogram.sum()),
            "non_converged": self.non_converged,
            "bins": len(self.histogram),
            "histogram": self.histogram.tolist(),
        }


def sample_boundary(config: WalkConfig) -> BoundarySample:
    """Exit angles of the orbit point through the circle of Euclidean radius ``stop_radius``."""
    model = config.model
    gens = model.generator_matrices("base")
    mover = model.base_mover.matrix
    cdf = config.cdf

    def run(ids: np.ndarray) -> np.ndarray:
        mats = np.broadcast_to(np.eye(2), (len(ids), 2, 2)).copy()
        angles = np.full(len(ids), np.nan)
        live = np.arange(len(ids))
        for k in range(1, config.step_cap + 1):
            if not live.size:
                break
            idx = _draw(config, ids[live], k, cdf)
            cur = hg.normalize_batch(mats[live] @ gens[idx])
            mats[live] = cur
            p = hg.origin_images(mover @ cur)
            out = np.abs(p) > config.stop_radius
            angles[live[out]] = np.mod(np.angle(p[out]), 2 * np.pi)
            live = live[~out]
        return angles

    angles = np.concatenate(_map_trials(run, config.trials, config.workers))
    done = ~np.isnan(angles)
    missing = int((~done).sum())
    if missing > config.trials / 2:
        raise ConfigurationError(
            f"{missing} of {config.trials} trials never reached radius {config.stop_radius}"
        )
    bins = config.bins or 16 * model.n
    hist, edges = np.histogram(angles[done], bins=bins, range=(0.0, 2 * np.pi))
    return BoundarySample(angles[done], config.trials, hist, edges, missing)


class SymmetryCheck(NamedTuple):
    chi2: float
    dof: int
    p_value: float
    max_abs_z: float
    passes: bool


def rotation_symmetry(sample: BoundarySample, order: int, z_limit: float = 4.0,
                      p_floor: float = 1e-3) -> SymmetryCheck:
    """Test that the histogram is invariant under rotation by ``2 pi / order``.

    Each bin is compared with the mean of its ``order`` rotated copies.
    """
    hist = sample.histogram.astype(float)
    bins = len(hist)
    if bins % order:
        raise ValueError(f"{bins} bins cannot be rotated by 2pi/{order}")
    orbits = hist.reshape(order, bins // order)
    mean = orbits.mean(axis=0)
    if np.any(mean == 0):
        raise ValueError("empty orbit of bins; use fewer bins or more trials")
    resid = (orbits - mean) / np.sqrt(mean)
    chi2 = float(np.sum(resid ** 2))
    dof = (order - 1) * (bins // order)
    p = float(stats.chi2.sf(chi2, dof))
    zmax = float(np.abs(resid).max())
    return SymmetryCheck(chi2, dof, p, zmax, p > p_floor and zmax < z_limit)
