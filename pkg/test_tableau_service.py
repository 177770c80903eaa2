"""
Pruebas de la combinatoria de tableaux de dos filas: enumeracion, estandaridad,
patrones, remocion con desplazamiento e identidades de conteo.
"""
from math import comb

import pytest

from app.core.errors import PatternFitError, UsageError
from app.services.tableau_service import (
    FilledPattern,
    Pattern,
    TwoRowTableau,
    count_identity_check,
    dominance_leq,
    enumerate_T_lambda_p,
    enumerate_patterns,
    enumerate_row_standard,
    is_standard,
    patterns_fitting,
    remove_and_shift,
    removal_order_check,
    validate_shape,
)


def test_enumeration_is_lexicographic():
    tableaux = enumerate_row_standard(4, 2)
    assert [t.row2 for t in tableaux] == [(1, 2), (1, 3), (1, 4), (2, 3), (2, 4), (3, 4)]
    assert tableaux == sorted(tableaux)
    assert [t.row2 for t in tableaux if is_standard(t)] == [(2, 4), (3, 4)]


def test_row1_and_free_size():
    t = TwoRowTableau(4, 2, (2, 4))
    assert t.row1 == (1, 3)
    assert t.free_size == 3
    assert TwoRowTableau.t_lambda(4, 2).row2 == (3, 4)
    assert TwoRowTableau.t_lambda(4, 2).free_size == 4


@pytest.mark.parametrize("n,m", [(4, 3), (1, 1), (-1, 0), (3, -1)])
def test_invalid_shapes(n, m):
    with pytest.raises(UsageError):
        validate_shape(n, m)
    with pytest.raises(UsageError):
        enumerate_row_standard(n, m)


def test_invalid_second_row():
    with pytest.raises(UsageError):
        TwoRowTableau(4, 2, (3, 2))
    with pytest.raises(UsageError):
        TwoRowTableau(4, 2, (3, 5))


@pytest.mark.parametrize("n", range(1, 11))
def test_count_identity(n):
    for m in range(n // 2 + 1):
        assert count_identity_check(n, m)
        if m:
            nonstandard = [t for t in enumerate_row_standard(n, m) if not t.is_standard()]
            assert len(nonstandard) == comb(n, m - 1)


def test_dominance():
    low = TwoRowTableau(4, 2, (1, 3))
    high = TwoRowTableau(4, 2, (2, 4))
    assert dominance_leq(low, high)
    assert not dominance_leq(high, low)
    assert not dominance_leq(TwoRowTableau(4, 2, (1, 4)), TwoRowTableau(4, 2, (2, 3)))


def test_pattern_validation():
    with pytest.raises(UsageError):
        Pattern(((5, 2), (5, 3)))
    with pytest.raises(UsageError):
        Pattern(((5, 2), (7, 2)))
    with pytest.raises(UsageError):
        Pattern(((2, 5),))
    with pytest.raises(UsageError):
        FilledPattern(Pattern(((5, 2),)), (0,))
    assert Pattern(((8, 6), (5, 2))).positions == ((5, 2), (8, 6))


def test_remove_and_shift():
    t = TwoRowTableau(8, 4, (3, 5, 7, 8))
    p = Pattern(((5, 2), (8, 6)))
    assert p.fits(t)
    shifted = remove_and_shift(t, p)
    assert shifted.alphabet == (1, 3, 4, 7)
    assert shifted.row2 == (3, 7)
    assert shifted.row1 == (1, 4)
    assert shifted.p_similar() == TwoRowTableau(4, 2, (2, 4))
    assert shifted.is_standard()


def test_remove_and_shift_requires_fit():
    t = TwoRowTableau(4, 2, (2, 4))
    with pytest.raises(PatternFitError):
        remove_and_shift(t, Pattern(((3, 1),)))


def test_patterns_fitting():
    t = TwoRowTableau(4, 2, (2, 4))
    fitting = patterns_fitting(t)
    # vacio, tres posiciones sueltas y el par {(2,1),(4,3)}
    assert len(fitting) == 5
    assert Pattern(((2, 1), (4, 3))) in fitting
    assert all(p.fits(t) for p in fitting)


def test_enumerate_patterns_is_disjoint():
    for p in enumerate_patterns(5, 2):
        assert not (p.rows & p.cols)
    assert Pattern() == next(enumerate_patterns(5, 2))


def test_enumerate_T_lambda_p():
    shifted = enumerate_T_lambda_p(4, 2, Pattern(((4, 1),)))
    assert [s.row2 for s in shifted] == [(2,)]
    assert all(not s.is_standard() for s in shifted)
    with pytest.raises(UsageError):
        enumerate_T_lambda_p(4, 1, Pattern(((4, 1), (3, 2))))


@pytest.mark.parametrize("n", range(2, 7))
def test_removal_preserves_order(n):
    assert removal_order_check(n)
