"""
Pruebas de la aritmetica exacta: campos finitos GF(q), escalares ciclotomicos
y polinomios gaussianos.
"""
from fractions import Fraction

import pytest
from hypothesis import assume, given, settings as hypothesis_settings
from hypothesis import strategies as st

from app.core.errors import DivisionByZeroError, FieldError
from app.services.field_service import (
    SUPPORTED_ORDERS,
    CycScalar,
    cyc_arith,
    gaussian_binomial,
    get_field,
    gf_rank,
    gf_rref,
    gf_solve_left,
    q_integer,
    theta,
)

orders = st.sampled_from(SUPPORTED_ORDERS)
primes = st.sampled_from((2, 3, 5, 7))


@given(st.data())
@hypothesis_settings(max_examples=200)
def test_field_axioms(data):
    q = data.draw(orders)
    field = get_field(q)
    a, b, c = (data.draw(st.integers(0, q - 1)) for _ in range(3))
    assert field.add(a, field.add(b, c)) == field.add(field.add(a, b), c)
    assert field.mul(a, field.mul(b, c)) == field.mul(field.mul(a, b), c)
    assert field.mul(a, field.add(b, c)) == field.add(field.mul(a, b), field.mul(a, c))
    assert field.add(a, field.neg(a)) == 0
    assert field.sub(field.add(a, b), b) == a
    if a:
        assert field.mul(a, field.inv(a)) == 1
        assert field.div(field.mul(a, b), a) == b


@given(st.data())
def test_theta_is_an_additive_character(data):
    q = data.draw(orders)
    field = get_field(q)
    a, b = data.draw(st.integers(0, q - 1)), data.draw(st.integers(0, q - 1))
    assert theta(field.add(a, b), field) == theta(a, field) * theta(b, field)


@pytest.mark.parametrize("q", SUPPORTED_ORDERS)
def test_theta_is_nontrivial(q):
    field = get_field(q)
    total = CycScalar.zero(field.p)
    for a in field.elements:
        total = total + theta(a, field)
    assert total.is_zero()
    assert any(theta(a, field) != CycScalar.one(field.p) for a in field.elements)


@pytest.mark.parametrize("q", [6, 10, 12, 17, 1])
def test_unsupported_orders_are_rejected(q):
    with pytest.raises(FieldError):
        get_field(q)


def test_zero_has_no_inverse():
    with pytest.raises(DivisionByZeroError):
        get_field(4).inv(0)


def test_frobenius_fixes_prime_subfield():
    field = get_field(9)
    assert [field.frobenius(a) for a in range(3)] == [0, 1, 2]
    assert all(field.trace(a) in range(3) for a in field.elements)


def test_extension_fields_follow_their_conway_modulus():
    # x = 2 en GF(2^k), x = 3 en GF(9)
    gf4, gf8, gf9, gf16 = (get_field(q) for q in (4, 8, 9, 16))
    assert gf4.mul(2, 2) == 3 and gf4.mul(2, 3) == 1
    assert gf8.mul(2, gf8.mul(2, 2)) == 3
    assert gf9.mul(3, 3) == 4
    assert gf16.mul(2, 8) == 3
    assert [gf4.trace(a) for a in gf4.elements] == [0, 0, 1, 1]
    assert gf9.descriptor() == {"q": 9, "p": 3, "k": 2, "modulus": [2, 2, 1]}


@given(st.data())
@hypothesis_settings(max_examples=100, deadline=None)
def test_row_reduction_matches_galois(data):
    field = get_field(data.draw(orders))
    height, width = data.draw(st.integers(1, 3)), data.draw(st.integers(1, 5))
    row = st.lists(st.integers(0, field.q - 1), min_size=width, max_size=width)
    rows = data.draw(st.lists(row, min_size=height, max_size=height))
    reduced, pivots = gf_rref(rows, field)
    expected = [r for r in field.array(rows).row_reduce().tolist() if any(r)]
    assert reduced == expected
    assert gf_rank(rows, field) == len(pivots)
    assert pivots == [next(c for c, x in enumerate(r) if x) for r in reduced]


def _scalar(data, p):
    vector = data.draw(st.lists(st.integers(-5, 5), min_size=p, max_size=p))
    den = data.draw(st.integers(1, 6))
    return CycScalar.from_vector(p, vector, den)


@given(st.data())
def test_cyclotomic_field_laws(data):
    p = data.draw(primes)
    x, y, z = _scalar(data, p), _scalar(data, p), _scalar(data, p)
    assert (x + y) - y == x
    assert x * (y + z) == x * y + x * z
    assert x * y == y * x
    assert cyc_arith(x, y, "add") == x + y
    assume(y)
    assert (x / y) * y == x
    assert cyc_arith(x, y, "div") == x / y


@given(st.data())
def test_cyclotomic_inverse(data):
    p = data.draw(primes)
    x = _scalar(data, p)
    assume(x)
    assert x * x.inverse() == CycScalar.one(p)


def test_cyclotomic_normal_form():
    # 1 + ζ + ζ² = 0 en Q(ζ_3)
    assert CycScalar.from_vector(3, [1, 1, 1]).is_zero()
    assert CycScalar.from_vector(3, [2, 0, 0], 4) == CycScalar.rational(3, Fraction(1, 2))
    assert CycScalar.zeta_power(2, 1) == CycScalar.rational(2, -1)
    with pytest.raises(DivisionByZeroError):
        CycScalar.zero(5).inverse()
    with pytest.raises(DivisionByZeroError):
        cyc_arith(CycScalar.one(3), CycScalar.zero(3), "div")


def test_integrality_diagnostic_on_scalars():
    assert CycScalar.rational(3, Fraction(1, 9)).is_integral()
    assert not CycScalar.rational(3, Fraction(1, 2)).is_integral()
    assert CycScalar.rational(2, Fraction(-5, 8)).is_integral()


@pytest.mark.parametrize(
    "n,m,q,expected",
    [(4, 2, 2, 35), (4, 1, 2, 15), (4, 2, 3, 130), (5, 2, 2, 155), (6, 3, 2, 1395), (3, 0, 7, 1), (2, 3, 2, 0)],
)
def test_gaussian_binomial(n, m, q, expected):
    assert gaussian_binomial(n, m, q) == expected


def test_q_integer():
    assert q_integer(3, 2) == 7
    assert q_integer(1, 5) == 1
    assert q_integer(0, 5) == 0


def test_row_reduction_helpers():
    field = get_field(3)
    rows = [[1, 2, 0], [2, 1, 0]]
    assert gf_rank(rows, field) == 1
    assert gf_solve_left([2, 1, 0], [[1, 2, 0]], field) == [2]
    assert gf_solve_left([0, 0, 1], [[1, 2, 0]], field) is None
    assert gf_solve_left([0, 0], [], field) == []
