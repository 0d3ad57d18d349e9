import itertools
import math

import numpy as np
import pytest

from hypwalk import hypgeom as hg
from hypwalk.errors import BudgetError, ConstructionError, NotHyperbolicError, UnknownLabelError
from hypwalk.groups import (
    Family,
    ball_census,
    build_group,
    canonical_word,
    census_margin,
    check_base_point,
    evaluate,
    geo_distance,
    parse_word,
    sinh_sandwich,
    word_power,
)
from hypwalk.hypgeom import DiskPoint


def _valid_pairs(n_max=14, m_max=12):
    return [(n, m) for n in range(3, n_max + 1) for m in range(4, m_max + 1, 2) if hg.is_hyperbolic(n, m)]


def test_reflection_46():
    model = build_group(Family.REFLECTION, 4, 6)
    assert model.labels == ("r1", "r2", "r3", "r4")
    for g in model.generators:
        assert g.iso.reversing and g.inverse_label == g.label
    for i in range(1, 5):
        j = i % 4 + 1
        assert evaluate(model, (f"r{i}", f"r{j}") * 3).is_identity(1e-9)
        # the corner relation has exact order m/2
        assert not evaluate(model, (f"r{i}", f"r{j}") * 2).is_identity(1e-6)


def test_fuchsian_45_inverse_pair():
    model = build_group(Family.FUCHSIAN, 4, 5)
    assert evaluate(model, ("t1", "t3")).is_identity(1e-9)
    assert model.generator("t2").inverse_label == "t4"
    for g in model.generators:
        assert not g.iso.reversing
        assert hg.translation_length(g.iso) == pytest.approx(2 * model.spec.inradius, abs=1e-12)


def test_fuchsian_generator_axis_through_side_midpoint():
    model = build_group("fuchsian", 6, 4)
    spec = model.spec
    t1 = model.generator("t1").iso
    # t1 maps the opposite side midpoint to the side-1 midpoint
    src = DiskPoint.polar(spec.inradius, math.pi)
    dst = DiskPoint.polar(spec.inradius, 0.0)
    assert hg.dist(hg.apply(t1, src), dst) < 1e-12


@pytest.mark.parametrize("family,n,m,what", [
    ("fuchsian", 5, 4, "even n"),
    ("reflection", 5, 5, "even m"),
    ("fuchsian", 2, 8, "even n"),
])
def test_build_group_parity_errors(family, n, m, what):
    with pytest.raises(ConstructionError, match=what):
        build_group(family, n, m)


def test_build_group_not_hyperbolic():
    with pytest.raises(NotHyperbolicError):
        build_group("reflection", 4, 4)


def test_build_group_bad_family():
    with pytest.raises(ValueError):
        build_group("euclidean", 4, 8)


def test_base_point_with_stabilizer_rejected():
    # the center is fixed by rotations inside F_{6,4}
    with pytest.raises(ConstructionError, match="stabilizer"):
        build_group("fuchsian", 6, 4, base_point=hg.ORIGIN)
    # a point on a mirror line is fixed by that reflection
    with pytest.raises(ConstructionError, match="stabilizer"):
        build_group("reflection", 4, 8, base_point=DiskPoint.polar(build_group("reflection", 4, 8).spec.inradius, 0.0))


def test_fuchsian_default_base_point_checks():
    for n, m in [(4, 5), (4, 6), (6, 4), (8, 3), (10, 3), (12, 3), (8, 4), (4, 8)]:
        model = build_group("fuchsian", n, m)
        check_base_point(model)
        assert model.base_point != hg.ORIGIN


def test_evaluate_examples():
    model = build_group("reflection", 6, 4)
    assert evaluate(model, ()).is_identity(0.0)
    assert evaluate(model, ("r1", "r1")).is_identity(1e-9)
    g = evaluate(model, ("r1", "r4"))
    assert not g.reversing
    assert hg.translation_length(g) == pytest.approx(4 * model.spec.inradius, abs=1e-9)


def test_evaluate_orientation_parity():
    model = build_group("reflection", 5, 4)
    assert evaluate(model, ("r1", "r2", "r3")).reversing
    assert not evaluate(model, ("r1", "r2", "r3", "r5")).reversing


def test_evaluate_unknown_label():
    model = build_group("reflection", 4, 8)
    with pytest.raises(UnknownLabelError):
        evaluate(model, ("r5",))
    with pytest.raises(UnknownLabelError):
        evaluate(model, ("t1",))


def test_evaluate_action_order():
    model = build_group("reflection", 4, 8)
    r1, r2 = model.generator("r1").iso, model.generator("r2").iso
    p = DiskPoint(0.1, 0.05)
    direct = hg.apply(r1, hg.apply(r2, p))
    assert hg.dist(hg.apply(evaluate(model, ("r1", "r2")), p), direct) < 1e-12


def test_parse_word():
    assert parse_word("r1, r3") == ("r1", "r3")
    assert parse_word("") == ()
    assert parse_word(["t1"]) == ("t1",)


def test_geo_distance_examples():
    model = build_group("reflection", 4, 8)
    h = model.spec.inradius
    assert geo_distance(model, ()) == 0.0
    assert geo_distance(model, ("r1",)) == pytest.approx(2 * h, abs=1e-12)
    g = ("r1", "r3")
    for k in range(1, 5):
        assert geo_distance(model, word_power(g, k)) == pytest.approx(4 * h * k, abs=1e-9)


def test_geo_distance_triangle_bound():
    rng = np.random.default_rng(5)
    for family, n, m in [("reflection", 5, 4), ("fuchsian", 4, 8)]:
        model = build_group(family, n, m)
        step_max = max(geo_distance(model, (s,)) for s in model.labels)
        for _ in range(100):
            w = tuple(model.labels[i] for i in rng.integers(0, n, rng.integers(0, 12)))
            assert geo_distance(model, w) <= len(w) * step_max + 1e-9


def test_canonical_word():
    assert canonical_word(build_group("reflection", 6, 4)) == ("r1", "r4")
    assert canonical_word(build_group("reflection", 7, 4)) == ("r1", "r4")
    assert canonical_word(build_group("fuchsian", 4, 8)) == ("t1",)
    with pytest.raises(ConstructionError):
        canonical_word(build_group("reflection", 3, 8))


# -- relators --------------------------------------------------------------------------

@pytest.mark.parametrize("n,m", _valid_pairs())
def test_reflection_relators(n, m):
    model = build_group("reflection", n, m)
    for i in range(1, n + 1):
        j = i % n + 1
        assert evaluate(model, (f"r{i}", f"r{i}")).is_identity(1e-9)
        assert evaluate(model, (f"r{i}", f"r{j}") * (m // 2)).is_identity(1e-9)


@pytest.mark.parametrize("n,m", [(n, m) for n in range(4, 15, 2) for m in range(3, 13) if hg.is_hyperbolic(n, m)])
def test_fuchsian_inverses(n, m):
    model = build_group("fuchsian", n, m)
    for g in model.generators:
        assert evaluate(model, (g.label, g.inverse_label)).is_identity(1e-9)


# -- census ----------------------------------------------------------------------------

def test_census_small_radius_is_identity_only():
    model = build_group("reflection", 4, 8)
    h = model.spec.inradius
    census = ball_census(model, 2 * h - 0.01, 0.1)
    assert set(census.counts) == {1}


def test_census_first_shell():
    model = build_group("reflection", 4, 8)
    h = model.spec.inradius
    census = ball_census(model, 2 * h + 1e-6, 2 * h + 1e-6)
    assert census.counts == (1, 5)
    # brute force: no reduced word of length <= 3 besides the generators lands within 2h + eps
    close = set()
    for k in range(1, 4):
        for w in itertools.product(model.labels, repeat=k):
            if any(a == b for a, b in zip(w, w[1:])):
                continue
            if geo_distance(model, w) <= 2 * h + 1e-6:
                p = hg.apply(evaluate(model, w), model.base_point)
                close.add((round(p.x, 9), round(p.y, 9)))
    assert len(close) == 4


def test_census_monotone_and_sandwich():
    model = build_group("reflection", 5, 4)
    census = ball_census(model, 7.0, 0.5)
    assert census.counts[0] == 1
    assert all(b >= a for a, b in zip(census.counts, census.counts[1:]))
    A = model.spec.diameter
    for R, c in zip(census.radius_grid, census.counts):
        lo, hi = sinh_sandwich(model.spec, R)
        assert c <= hi
        if R >= 2 * A:
            assert c >= lo


def test_census_relabel_invariance():
    a = build_group("reflection", 6, 4)
    b = build_group("reflection", 6, 4, label_shift=1)
    assert b.generator("r2").iso.distance_to(a.generator("r1").iso) < 1e-12
    assert ball_census(a, 6.0).counts == ball_census(b, 6.0).counts


def test_census_fuchsian_matches_larger_margin():
    model = build_group("fuchsian", 6, 4)
    base = ball_census(model, 3.0)
    wide = ball_census(model, 3.0, margin=census_margin(model) + 1.5)
    assert base.counts == wide.counts


def test_census_reflection_matches_larger_margin():
    model = build_group("reflection", 4, 8)
    base = ball_census(model, 6.0)
    wide = ball_census(model, 6.0, margin=census_margin(model) + 3.0)
    assert base.counts == wide.counts


def test_census_cap():
    model = build_group("reflection", 4, 8)
    with pytest.raises(BudgetError):
        ball_census(model, 12.5)


def test_census_rows():
    census = ball_census(build_group("reflection", 4, 8), 3.0, 1.0)
    rows = list(census.rows())
    assert rows[0] == (0.0, 1, 0.0)
    assert len(rows) == 4


def test_fuchsian_generator_two_reflection_factorization():
    model = build_group("fuchsian", 6, 4)
    spec = model.spec
    for g, a in zip(model.generators, spec.side_angles):
        side = hg.line_reflection(spec.inradius, a)
        center = hg.diameter_reflection(a + math.pi / 2)
        assert (side @ center).distance_to(g.iso) < 1e-12
