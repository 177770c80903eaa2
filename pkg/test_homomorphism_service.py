"""
Pruebas de los homomorfismos Φ_m y φ_{1,i}, sus matrices dispersas y el
nucleo exacto sobre Q.
"""
import pytest

from app.core.config import settings
from app.core.errors import BudgetExceededError, UsageError
from app.services.character_service import ModuleVector
from app.services.field_service import CycScalar, gaussian_binomial
from app.services.flag_service import NormalMatrix, enumerate_xi
from app.services.homomorphism_service import (
    composition_law_check,
    kernel_basis,
    kernel_intersection_check,
    phi_1_i,
    phi_1_i_matrix,
    phi_m,
    phi_m_d,
    phi_matrix,
    phi_rank,
    subspaces_of,
)
from app.services.tableau_service import TwoRowTableau

BUDGET = settings.DEFAULT_BUDGET


def test_phi_m_d_terms():
    M = NormalMatrix.from_entries(4, (2, 4), {(2, 1): 1, (4, 3): 1}, 2)
    image = phi_m_d(M, 1)
    # se borra la fila 2; la fila 4 recibe α·(fila 2) con α en GF(2)
    assert set(image.terms) == {
        NormalMatrix.from_entries(4, (4,), {(4, 3): 1}, 2),
        NormalMatrix.from_entries(4, (4,), {(4, 1): 1, (4, 2): 1, (4, 3): 1}, 2),
    }
    last = phi_m_d(M, 2)
    assert set(last.terms) == {NormalMatrix.from_entries(4, (2,), {(2, 1): 1}, 2)}
    with pytest.raises(UsageError):
        phi_m_d(M, 3)


def test_phi_m_counts_subspaces():
    # Φ_m([X]) suma los hiperplanos de X: [m 1]_q de ellos
    for M in enumerate_xi(2, 4, 3, BUDGET)[:20]:
        image = phi_m(ModuleVector.basis_vector(M))
        total = sum((c.as_fraction() for c in image.terms.values()), 0)
        assert total == 4


def test_phi_1_i_extremes():
    X = NormalMatrix.from_entries(5, (3, 5), {(3, 1): 1, (5, 4): 2}, 3)
    v = ModuleVector.basis_vector(X)
    assert phi_1_i(v, 2) == v
    augmentation = phi_1_i(v, 0)
    assert list(augmentation.terms.values()) == [CycScalar.one(3)]
    assert len(subspaces_of(X, 1)) == 4
    assert len(set(subspaces_of(X, 1))) == 4


def test_phi_matrix_shape_and_triplets():
    matrix = phi_matrix(4, 2, 2, BUDGET)
    assert (len(matrix.rows), len(matrix.cols)) == (15, 35)
    text = matrix.to_triplet_text()
    assert text.splitlines()[0] == "# source=(2,2) target=(3,1) q=2 shape=15x35"
    assert len(text.splitlines()) == 1 + len(matrix.triplets())
    # cada columna tiene [2 1]_2 = 3 entradas iguales a 1
    assert len(matrix.triplets()) == 35 * 3
    with pytest.raises(UsageError):
        phi_matrix(4, 0, 2, BUDGET)


def test_phi_matrix_budget():
    with pytest.raises(BudgetExceededError):
        phi_matrix(4, 2, 2, 20)


@pytest.mark.parametrize("n,m,q", [(4, 2, 2), (4, 1, 3), (5, 2, 2), (4, 0, 2), (2, 1, 3)])
def test_kernel_dimension(n, m, q):
    basis = kernel_basis(n, m, q, BUDGET)
    assert len(basis) == gaussian_binomial(n, m, q) - gaussian_binomial(n, m - 1, q)
    if m:
        for v in basis:
            assert phi_m(v).is_zero()


@pytest.mark.slow
def test_kernel_dimension_q3():
    assert len(kernel_basis(4, 2, 3, BUDGET)) == 90


def test_phi_is_surjective():
    assert phi_rank(4, 2, 2, BUDGET) == gaussian_binomial(4, 1, 2)
    assert phi_rank(5, 2, 2, BUDGET) == gaussian_binomial(5, 1, 2)


@pytest.mark.parametrize("n,m,q", [(4, 2, 2), (3, 1, 3), (5, 2, 2)])
def test_kernel_intersection(n, m, q):
    assert kernel_intersection_check(n, m, q, BUDGET)


@pytest.mark.parametrize("n,m,q", [(4, 2, 2), (4, 2, 3), pytest.param(6, 3, 2, marks=pytest.mark.slow)])
def test_composition_law(n, m, q):
    assert composition_law_check(n, m, q, BUDGET)


def test_phi_1_i_matrix_target_shape():
    matrix = phi_1_i_matrix(4, 2, 0, 2, BUDGET)
    assert (len(matrix.rows), len(matrix.cols)) == (1, 35)
    assert matrix.triplets() == [(0, c, 1) for c in range(35)]
    assert phi_1_i_matrix(4, 2, 1, 2, BUDGET).target_shape == (3, 1)


def test_phi_operates_on_matrix_basis_only():
    L = NormalMatrix.zero(TwoRowTableau(4, 2, (3, 4)), 2)
    with pytest.raises(UsageError):
        phi_m(ModuleVector.basis_vector(L, "idempotent"))
