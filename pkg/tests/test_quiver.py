"""Decomposition of zigzag and cyclic representations.

Fixed examples are worked out by hand (kernel chases on two- and
three-dimensional spaces); randomized cases plant a known direct sum behind
random base changes and rely on uniqueness of the summand multiset.
"""

import random

import pytest

from tamebars.canonical import Cell, jordan_block
from tamebars.field import GF2, QQ, PrimeField
from tamebars.matrix import Mat
from tamebars.quiver import (
    Bar,
    Certificate,
    CircleRep,
    DecompositionError,
    RepresentationError,
    ZigzagRep,
    bar_from_support,
    cell_module,
    circle_rep_from_lists,
    decompose,
    decompose_circle,
    decompose_zigzag,
    direct_sum,
    hom_dim,
    interval_module,
    interval_module_circle,
    jordan_module,
    summand_module,
    verify_certificate,
    zero_circle,
    zero_zigzag,
)

from rep_fixtures import (
    GF5,
    conjugated,
    planted_circle,
    planted_zigzag,
    rand_invertible,
    random_cell,
)


def _q(*ints):
    from fractions import Fraction

    return [Fraction(v) for v in ints]


# -- bars and canonical modules -------------------------------------------------


def test_bar_support_round_trip():
    for a in range(-3, 8):
        for b in range(a, a + 9):
            bar = bar_from_support(a, b)
            assert bar.support() == (a, b)


def test_bar_support_round_trip_cyclic():
    m = 2
    for a in range(1, 2 * m + 1):
        for b in range(a, a + 4 * m + 1):
            bar = bar_from_support(a, b, m)
            assert 1 <= bar.i <= m and 1 <= bar.j <= m and bar.wraps >= 0
            aa, bb = bar.support(m)
            # support is recovered up to a whole number of turns
            assert (bb - aa) == (b - a) and (aa - a) % (2 * m) == 0


def test_bar_validity_labels():
    assert Bar(1, 2, True, True).label() == "[1, 2]"
    assert Bar(1, 2, False, True).label() == "(1, 2]"
    assert Bar(1, 1, True, True, wraps=1).label() == "[1, 1+1m]"


def test_interval_module_z_shapes():
    # open-open bar on positions 3..3 inside window 2..4
    rep = interval_module(QQ, Bar(1, 2, False, False), 2, 4)
    assert rep.dims == {2: 0, 3: 1, 4: 0}
    assert rep.maps[(3, +1)].nrows == 0 and rep.maps[(3, +1)].ncols == 1


def test_interval_module_circle_spiral_example():
    # one full wrap starting and ending at the first even vertex, m = 1:
    # the even space is two-dimensional, alpha hits the newer crossing and
    # beta the older one
    bar = Bar(1, 1, True, True, wraps=1)
    rep = interval_module_circle(QQ, bar, 1)
    assert rep.dims == {1: 1, 2: 2}
    assert rep.alpha(1) == Mat.from_int_rows(QQ, [[1], [0]])
    assert rep.beta(1) == Mat.from_int_rows(QQ, [[0], [1]])


def test_jordan_module_matches_equation():
    for lam in (1, 2, -1):
        for k in (1, 2, 3):
            for m in (1, 2):
                rep = jordan_module(QQ, QQ.from_int(lam), k, m)
                assert rep.alpha(1) == jordan_block(QQ, QQ.from_int(lam), k)
                for i in range(2, m + 1):
                    assert rep.alpha(i) == Mat.identity(QQ, k)
                for i in range(1, m + 1):
                    assert rep.beta(i) == Mat.identity(QQ, k)


# -- fixed decompositions --------------------------------------------------------


def test_decompose_two_surjections():
    # kappa <- kappa^2 -> kappa with both maps (1 1): one long closed bar
    # plus one open singleton in the middle
    rep = ZigzagRep(
        QQ,
        2,
        4,
        {2: 1, 3: 2, 4: 1},
        {
            (3, +1): Mat.from_int_rows(QQ, [[1, 1]]),
            (3, -1): Mat.from_int_rows(QQ, [[1, 1]]),
        },
    )
    bars, cert = decompose_zigzag(rep)
    assert sorted(b.label() for b in bars) == ["(1, 2)", "[1, 2]"]
    assert verify_certificate(rep, bars, cert)


def test_decompose_single_closed_bar_needs_dual_phase():
    rep = interval_module(QQ, Bar(1, 2, True, True), 1, 5)
    bars, cert = decompose_zigzag(rep)
    assert bars == [Bar(1, 2, True, True)]
    assert verify_certificate(rep, bars, cert)


def test_decompose_circle_one_wrap():
    rep = interval_module_circle(QQ, Bar(1, 1, True, True, wraps=1), 1)
    bars, cells, cert = decompose_circle(rep)
    assert bars == [Bar(1, 1, True, True, wraps=1)]
    assert cells == []


def test_decompose_jordan_modules():
    for lam in (1, 2, -1):
        for k in (1, 2, 3):
            rep = jordan_module(QQ, QQ.from_int(lam), k, m=2)
            bars, cells, cert = decompose_circle(rep)
            assert bars == []
            assert cells == [Cell(poly=(QQ.from_int(-lam), QQ.from_int(1)), size=k)]


def test_nilpotent_alpha_is_a_winding_bar():
    # lambda = 0 is not a monodromy eigenvalue: the module with
    # alpha = T(0, 2), beta = id is the bar winding twice, open on the right
    rep = jordan_module(QQ, QQ.from_int(0), 2, m=1)
    bars, cells, cert = decompose_circle(rep)
    assert cells == []
    assert bars == [Bar(1, 1, True, False, wraps=2)]


def test_decompose_zero_rep():
    bars, cert = decompose_zigzag(zero_zigzag(QQ, 1, 5))
    assert bars == []
    bars, cells, cert = decompose_circle(zero_circle(QQ, 2))
    assert bars == [] and cells == []


def test_monodromy_conjugation_invariance():
    rng = random.Random(5)
    rep = jordan_module(GF5, GF5.from_int(3), 2, m=2)
    twisted = conjugated(rep, rng)
    bars, cells, cert = decompose_circle(twisted)
    assert bars == []
    assert cells == [Cell(poly=(GF5.from_int(-3), 1), size=2)]


def test_companion_cell_round_trip():
    # irreducible quadratic monodromy factor over Q
    cell = Cell(poly=(QQ.from_int(1), QQ.from_int(0), QQ.from_int(1)), size=1)
    rep = cell_module(QQ, cell, 2)
    bars, cells, cert = decompose_circle(rep)
    assert bars == [] and cells == [cell]


# -- certificates ----------------------------------------------------------------


def test_certificate_accepts_rescaled_bases():
    rep = interval_module(QQ, Bar(1, 2, True, True), 1, 5)
    bars, cert = decompose_zigzag(rep)
    scaled = Certificate(
        base_changes={x: P.scale(QQ.from_int(2)) for x, P in cert.base_changes.items()}
    )
    assert verify_certificate(rep, bars, scaled)


def test_certificate_rejects_wrong_summands():
    rep = interval_module(QQ, Bar(1, 2, True, True), 1, 5)
    bars, cert = decompose_zigzag(rep)
    wrong = [Bar(1, 2, False, True)]
    assert not verify_certificate(rep, wrong, cert)


def test_certificate_rejects_singular_base_change():
    rep = interval_module(QQ, Bar(1, 2, True, True), 1, 5)
    bars, cert = decompose_zigzag(rep)
    bad = {x: P.copy() for x, P in cert.base_changes.items()}
    bad[2] = Mat.zeros(QQ, 1, 1)
    assert not verify_certificate(rep, bars, Certificate(base_changes=bad))


# -- hom spaces -------------------------------------------------------------------


def test_hom_dims_between_intervals():
    shell = zero_zigzag(QQ, 1, 5)
    long = summand_module(QQ, Bar(1, 2, True, True), shell)
    short = summand_module(QQ, Bar(1, 2, False, False), shell)
    assert hom_dim(long, long) == 1
    assert hom_dim(short, short) == 1
    # the long bar surjects onto the middle open one, not conversely
    assert hom_dim(long, short) == 1
    assert hom_dim(short, long) == 0


def test_hom_dims_between_jordan_cells():
    a = jordan_module(QQ, QQ.from_int(2), 2)
    b = jordan_module(QQ, QQ.from_int(2), 3)
    c = jordan_module(QQ, QQ.from_int(1), 2)
    assert hom_dim(a, a) == 2
    assert hom_dim(a, b) == 2
    assert hom_dim(b, a) == 2
    assert hom_dim(a, c) == 0


def test_rep_validation_errors():
    with pytest.raises(RepresentationError):
        ZigzagRep(QQ, 2, 4, {2: 1, 3: 1, 4: 1}, {})
    with pytest.raises(RepresentationError):
        CircleRep(QQ, 1, {1: 1, 2: 1}, {(1, +1): Mat.zeros(QQ, 2, 1), (1, -1): Mat.zeros(QQ, 1, 1)})


# -- randomized planted sums ------------------------------------------------------


@pytest.mark.parametrize("field", [QQ, GF2, GF5])
def test_planted_zigzag_sums(field):
    rng = random.Random(101)
    for _ in range(12):
        lo = rng.choice([1, 2])
        hi = lo + rng.randrange(2, 6)
        planted, rep = planted_zigzag(field, lo, hi, rng.randrange(1, 5), rng)
        bars, cert = decompose_zigzag(rep)
        assert sorted(b.sort_key() for b in bars) == sorted(b.sort_key() for b in planted)
        assert verify_certificate(rep, bars, cert)


@pytest.mark.parametrize("field", [QQ, GF2, GF5])
def test_planted_circle_sums(field):
    rng = random.Random(202)
    for _ in range(10):
        m = rng.choice([1, 1, 2, 3])
        n_bars = rng.randrange(0, 4)
        n_cells = rng.randrange(0 if n_bars else 1, 3)
        planted, rep = planted_circle(field, m, n_bars, n_cells, rng)
        bars, cells, cert = decompose_circle(rep)
        got = sorted(
            [("b",) + b.sort_key() for b in bars] + [("c", c.poly, c.size) for c in cells]
        )
        want = sorted(
            ("b",) + s.sort_key() if isinstance(s, Bar) else ("c", s.poly, s.size)
            for s in planted
        )
        assert got == want
        assert verify_certificate(rep, bars + cells, cert)


def test_decompose_is_deterministic():
    rng = random.Random(77)
    planted, rep = planted_circle(QQ, 2, 2, 1, rng)
    out1 = decompose_circle(rep)
    out2 = decompose_circle(rep)
    assert out1[0] == out2[0] and out1[1] == out2[1]
    assert all(out1[2].base_changes[x] == out2[2].base_changes[x] for x in rep.dims)


def test_hom_additivity_against_decomposition():
    rng = random.Random(303)
    planted, rep = planted_circle(QQ, 2, 2, 1, rng)
    shell = zero_circle(QQ, 2)
    mods = [summand_module(QQ, s, shell) for s in planted]
    total = sum(hom_dim(a, b) for a in mods for b in mods)
    assert hom_dim(rep, rep) == total
