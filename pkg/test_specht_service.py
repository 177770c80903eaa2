"""
Pruebas del modulo de Specht: Φ_m sobre idempotentes, remocion de patrones,
elegibilidad y la base estandar por componentes.
"""
from collections import Counter
from fractions import Fraction

import pytest

from app.core.config import settings
from app.core.errors import EligibilityError, UsageError
from app.services.character_service import IDEMPOTENT_BASIS, ModuleVector, from_idempotent_basis, to_idempotent_basis
from app.services.field_service import CycScalar, gaussian_binomial
from app.services.flag_service import NormalMatrix, batch_of, enumerate_xi
from app.services.homomorphism_service import phi_m
from app.services.rank_census_service import eligibility_equivalence_check, is_good_filling, rank_polynomial
from app.services.specht_service import (
    certificate_check,
    component_surjectivity_check,
    components_of_shape,
    construct_standard_vector,
    integrality_diagnostic,
    last_standard_random_check,
    leading_term_eligible,
    pattern_preservation_check,
    phi_m_idempotent,
    phi_on_idempotent,
    removal_compatibility_check,
    removal_factor,
    remove_pattern,
    standard_basis,
    standard_dependency,
)
from app.services.tableau_service import Pattern, TwoRowTableau, enumerate_row_standard

BUDGET = settings.DEFAULT_BUDGET
T24 = TwoRowTableau(4, 2, (2, 4))
T34 = TwoRowTableau(4, 2, (3, 4))


def _phi_through_matrix_basis(L: NormalMatrix) -> ModuleVector:
    e_L = ModuleVector.basis_vector(L, IDEMPOTENT_BASIS)
    return to_idempotent_basis(phi_m(from_idempotent_basis(e_L)))


@pytest.mark.parametrize("n,m,q", [(4, 2, 2), (3, 1, 3), (5, 2, 2)])
def test_phi_on_idempotents_closed_form(n, m, q):
    for L in enumerate_xi(m, n, q, BUDGET):
        assert phi_on_idempotent(L) == _phi_through_matrix_basis(L)


def test_phi_on_idempotents_closed_form_q3():
    for L in list(batch_of(T24, 3).members()) + list(batch_of(T34, 3).members())[:20]:
        assert phi_on_idempotent(L) == _phi_through_matrix_basis(L)


def test_phi_on_idempotent_requires_boxes():
    with pytest.raises(UsageError):
        phi_on_idempotent(NormalMatrix.zero(TwoRowTableau(3, 0, ()), 2))


def test_remove_pattern():
    L = NormalMatrix.from_entries(8, (3, 5, 7, 8), {(5, 2): 1, (8, 6): 1}, 2)
    reduced = remove_pattern(L, Pattern(((5, 2), (8, 6))))
    assert reduced.tableau == TwoRowTableau(4, 2, (2, 4))
    assert reduced.to_rows() == [[0, 1, 0, 0], [0, 0, 0, 1]]

    L = NormalMatrix.from_entries(8, (3, 5, 7, 8), {(5, 2): 1, (8, 6): 1, (7, 4): 1}, 2)
    reduced = remove_pattern(L, Pattern(((5, 2), (8, 6))))
    assert reduced.to_rows() == [[0, 1, 0, 0], [0, 0, 1, 1]]
    assert remove_pattern(L, Pattern(((4, 1),))) is None


def test_removal_factor():
    L = NormalMatrix.from_entries(4, (3, 4), {(4, 1): 1}, 2)
    p = Pattern(((4, 1),))
    assert removal_factor(L, p) == Fraction(1, 4)
    moved = NormalMatrix.from_entries(4, (3, 4), {(4, 1): 1, (3, 1): 1}, 2)
    assert removal_factor(moved, p) == 0
    assert removal_compatibility_check([], p)


def test_eligibility():
    assert leading_term_eligible(NormalMatrix.zero(T34, 2))
    assert leading_term_eligible(NormalMatrix.zero(T24, 2))
    assert not leading_term_eligible(NormalMatrix.zero(TwoRowTableau(4, 2, (1, 2)), 2))
    # en t = (2,4) el patron (4,1) deja el tableau desplazado (2) sobre {2,3}
    assert not leading_term_eligible(NormalMatrix.from_entries(4, (2, 4), {(4, 1): 1}, 2))


def test_non_eligible_label_is_rejected():
    with pytest.raises(EligibilityError):
        construct_standard_vector(NormalMatrix.zero(TwoRowTableau(4, 2, (2, 3)), 2))


def test_standard_basis_small():
    basis = standard_basis(4, 2, 2, BUDGET)
    assert len(basis) == 20
    leading = [v.leading for v in basis]
    assert len(set(leading)) == 20
    assert sum(1 for v in basis if v.last == T34) == 16
    assert sum(1 for v in basis if v.last == T24) == 4
    for v in basis:
        assert certificate_check(v)
        assert integrality_diagnostic(v)
        assert removal_compatibility_check(standard_dependency(v), v.filled_pattern.pattern)
        assert phi_m(from_idempotent_basis(v.vector)).is_zero()
        assert phi_m_idempotent(v.vector).is_zero()
    assert [(v.leading.tableau, v.leading.key()) for v in basis] == sorted(
        (v.leading.tableau, v.leading.key()) for v in basis
    )


def test_construct_standard_vector_matches_basis():
    basis = {v.leading: v for v in standard_basis(4, 2, 2, BUDGET)}
    for L in batch_of(T24, 2).members():
        if leading_term_eligible(L):
            assert construct_standard_vector(L) == basis[L]


def test_specht_vector_serialization():
    v = construct_standard_vector(NormalMatrix.zero(T24, 2))
    payload = v.to_json()
    assert payload["kind"] == "specht_vector"
    assert payload["last"] == T24.to_json()
    assert payload["pattern"] == ""
    assert v.top.coefficient(v.leading) == CycScalar.one(2)


def test_trivial_shape():
    basis = standard_basis(5, 0, 3, BUDGET)
    assert len(basis) == 1
    assert certificate_check(basis[0])


@pytest.mark.parametrize("n,m,q", [(4, 2, 2), (3, 1, 3), (5, 2, 2)])
def test_component_properties(n, m, q):
    assert pattern_preservation_check(n, m, q)
    assert component_surjectivity_check(n, m, q)


def test_components_partition_the_labels():
    components = components_of_shape(4, 2, 2)
    labels = [L for c in components for o in c.orbits for L in o.members]
    assert len(labels) == len(set(labels)) == gaussian_binomial(4, 2, 2)


@pytest.mark.parametrize("seed", [0, 1])
def test_random_kernel_vectors_end_in_standard_batches(seed):
    assert last_standard_random_check(4, 2, 2, BUDGET, seed=seed, trials=4)


@pytest.mark.slow
@pytest.mark.parametrize("n,m,q,dimension", [(4, 2, 3, 90), (5, 2, 2, 124), (6, 3, 2, 744)])
def test_standard_basis_dimensions(n, m, q, dimension):
    basis = standard_basis(n, m, q, BUDGET)
    assert len(basis) == dimension
    assert len({v.leading for v in basis}) == dimension
    assert all(certificate_check(v) for v in basis)
    assert all(integrality_diagnostic(v) for v in basis)
    assert all(is_good_filling(v.leading) and leading_term_eligible(v.leading) for v in basis)

    per_batch = Counter(v.last for v in basis)
    for t in enumerate_row_standard(n, m):
        assert per_batch[t] == rank_polynomial(t, q, BUDGET)
        assert eligibility_equivalence_check(t, q)


@pytest.mark.slow
def test_standard_basis_is_worker_independent():
    assert standard_basis(4, 2, 2, BUDGET, workers=2) == standard_basis(4, 2, 2, BUDGET, workers=1)
