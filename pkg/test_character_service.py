"""
Pruebas de caracteres del grupo diamante y del cambio de base entre
matrices [M] e idempotentes e_L.
"""
import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from app.core.errors import BatchMismatchError, UsageError
from app.services.character_service import (
    IDEMPOTENT_BASIS,
    MATRIX_BASIS,
    ModuleVector,
    character_orthogonality_check,
    chi,
    diamond_convolution,
    from_idempotent_basis,
    from_idempotent_basis_direct,
    idempotent_vector,
    to_idempotent_basis,
    to_idempotent_basis_direct,
)
from app.services.field_service import CycScalar, get_field
from app.services.flag_service import NormalMatrix, batch_of, diamond_add, matrix_from_key
from app.services.tableau_service import TwoRowTableau, enumerate_row_standard

T24 = TwoRowTableau(4, 2, (2, 4))


def _random_vector(n: int, m: int, q: int, seed: int, size: int = 6) -> ModuleVector:
    rng = random.Random(seed)
    p = get_field(q).p
    terms = []
    for _ in range(size):
        t = rng.choice(enumerate_row_standard(n, m))
        label = matrix_from_key(t, rng.randrange(batch_of(t, q).size), q)
        terms.append((label, CycScalar.rational(p, rng.randint(-4, 4))))
    return ModuleVector.from_terms(MATRIX_BASIS, q, terms)


@pytest.mark.parametrize("q", [2, 3, 4])
def test_orthogonality(q):
    assert character_orthogonality_check(T24, q)


@given(st.data())
def test_characters_are_multiplicative(data):
    q = data.draw(st.sampled_from((2, 3, 4, 5)))
    size = batch_of(T24, q).size
    L, M, N = (matrix_from_key(T24, data.draw(st.integers(0, size - 1)), q) for _ in range(3))
    assert chi(L, diamond_add(M, N)) == chi(L, M) * chi(L, N)
    assert chi(L, M) == chi(M, L)


def test_chi_requires_same_batch():
    L = NormalMatrix.zero(T24, 2)
    with pytest.raises(BatchMismatchError):
        chi(L, NormalMatrix.zero(TwoRowTableau(4, 2, (3, 4)), 2))


@pytest.mark.parametrize("q,seed", [(2, 0), (2, 1), (3, 2), (4, 3)])
def test_fast_transform_matches_direct_sums(q, seed):
    v = _random_vector(4, 2, q, seed)
    assert to_idempotent_basis(v) == to_idempotent_basis_direct(v)
    w = to_idempotent_basis(v)
    assert from_idempotent_basis(w) == from_idempotent_basis_direct(w)


@pytest.mark.parametrize("q,seed", [(2, 5), (3, 6), (5, 7)])
def test_change_of_basis_roundtrip(q, seed):
    v = _random_vector(4, 2, q, seed)
    assert from_idempotent_basis(to_idempotent_basis(v)) == v


def test_idempotent_vector_and_basis_change_agree():
    for L in batch_of(T24, 3).members():
        e_L = ModuleVector.basis_vector(L, IDEMPOTENT_BASIS)
        assert from_idempotent_basis(e_L) == idempotent_vector(L)


def test_idempotents_are_orthogonal_idempotents():
    labels = list(batch_of(T24, 2).members())
    e0, e1 = idempotent_vector(labels[0]), idempotent_vector(labels[5])
    assert diamond_convolution(e0, e0) == e0
    assert diamond_convolution(e0, e1).is_zero()


def test_matrix_basis_vector_is_sum_of_idempotents():
    M = matrix_from_key(T24, 3, 2)
    image = to_idempotent_basis(ModuleVector.basis_vector(M))
    assert len(image.terms) == batch_of(T24, 2).size
    assert all(c == chi(K, M) for K, c in image.terms.items())


def test_vectors_check_compatibility():
    u = ModuleVector.zero(MATRIX_BASIS, 2)
    v = ModuleVector.zero(IDEMPOTENT_BASIS, 2)
    with pytest.raises(UsageError):
        u + v
    with pytest.raises(UsageError):
        ModuleVector("otra", 2)
    with pytest.raises(UsageError):
        diamond_convolution(v, v)
