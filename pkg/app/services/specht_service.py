"""
Servicio del modulo de Specht S^(n-m,m) = ker Φ_m.

Φ_m en forma cerrada sobre idempotentes, la remocion R_p, elegibilidad de
terminos principales y la base estandar por componentes de patron lleno.
"""
import logging
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Dict, List, Optional, Sequence, Tuple

from app.core.errors import EligibilityError, InternalInconsistencyError, UsageError
from app.services.character_service import IDEMPOTENT_BASIS, MATRIX_BASIS, ModuleVector
from app.services.field_service import CycScalar, gaussian_binomial, get_field, gf_rref, gf_solve_left, theta
from app.services.flag_service import NormalMatrix, check_budget, free_positions, last_and_top
from app.services.homomorphism_service import kernel_basis
from app.services.orbit_service import (
    OrbitModule,
    batch_orbit_census,
    canonical_pattern_matrix,
    filled_pattern_of,
    orbit_of,
    pattern_matrix_of,
)
from app.services.tableau_service import (
    FilledPattern,
    Pattern,
    TwoRowTableau,
    enumerate_row_standard,
    patterns_fitting,
    remove_and_shift,
    validate_shape,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SpechtVector:
    """Vector de ker Φ_m con su certificado de termino principal."""

    vector: ModuleVector
    leading: NormalMatrix
    filled_pattern: FilledPattern
    last: TwoRowTableau

    @property
    def top(self) -> ModuleVector:
        return self.vector.restrict_to_batch(self.last)

    def to_json(self) -> Dict[str, object]:
        return {
            "kind": "specht_vector",
            "leading": self.leading.to_json(),
            "last": self.last.to_json(),
            "pattern": self.filled_pattern.pattern.label(),
            "filling": list(self.filled_pattern.values),
            "vector": self.vector.to_json(),
        }


@dataclass(frozen=True)
class ComponentCollection:
    """Orbitas de una forma que comparten el patron lleno."""

    filled_pattern: FilledPattern
    orbits: Tuple[OrbitModule, ...]

    @property
    def pattern(self) -> Pattern:
        return self.filled_pattern.pattern

    def _shifted_standard(self, orbit: OrbitModule) -> bool:
        return remove_and_shift(orbit.tableau, self.pattern).is_standard()

    def candidates(self) -> List[NormalMatrix]:
        """Miembros de orbitas cuyo tableau desplazado no es estandar."""
        return _ordered(L for orbit in self.orbits if not self._shifted_standard(orbit) for L in orbit.members)

    def eligible(self) -> List[NormalMatrix]:
        return _ordered(L for orbit in self.orbits if self._shifted_standard(orbit) for L in orbit.members)


def _ordered(labels) -> List[NormalMatrix]:
    return sorted(labels, key=lambda K: (K.tableau, K.key()))


# -- Φ_m sobre idempotentes -------------------------------------------------------------

def _column_space(columns: Sequence[Sequence[int]], height: int, field) -> Tuple[List[Tuple[int, ...]], int]:
    """Todos los vectores del espacio generado por `columns` en GF(q)^height, y su dimension."""
    basis, _ = gf_rref(columns, field) if columns else ([], [])
    vectors = []
    for coefs in product(range(field.q), repeat=len(basis)):
        vector = [0] * height
        for c, row in zip(coefs, basis):
            if c:
                vector = [field.add(x, field.mul(c, y)) for x, y in zip(vector, row)]
        vectors.append(tuple(vector))
    return vectors, len(basis)


def _phi_d_on_idempotent(L: NormalMatrix, d: int) -> List[Tuple[NormalMatrix, CycScalar]]:
    """
    Φ_m^d(e_L) = Σ_{k ∈ col(B)} q^{m-d-r} θ(<k, α₀>) e_K, donde B son las filas
    b_t (t > d) de L restringidas a las columnas libres j < b_d, α₀ resuelve
    α₀·B = fila b_d y r = rango(B). Cero si la fila b_d no esta en el espacio fila de B.
    """
    t = L.tableau
    field = get_field(L.q)
    b_d = t.row2[d - 1]
    below = t.row2[d:]
    columns = [j for j in t.row1 if j < b_d]
    B = [[L.entry(b, j) for j in columns] for b in below]
    target_row = [L.entry(b_d, j) for j in columns]
    alpha = gf_solve_left(target_row, B, field)
    if alpha is None:
        return []
    B_columns = [[row[c] for row in B] for c in range(len(columns))] if below else []
    span, rank = _column_space([col for col in B_columns if any(col)], len(below), field)
    weight = Fraction(L.q ** (len(below) - rank))
    target = TwoRowTableau(t.n, t.m - 1, tuple(b for b in t.row2 if b != b_d))
    terms = []
    for k_col in span:
        new_column = dict(zip(below, k_col))
        values = tuple(new_column[b] if j == b_d else L.entry(b, j) for b, j in free_positions(target))
        pairing = 0
        for k, a in zip(k_col, alpha):
            if k and a:
                pairing = field.add(pairing, field.mul(k, a))
        terms.append((NormalMatrix(target, values, L.q), theta(pairing, field) * weight))
    return terms


def phi_on_idempotent(L: NormalMatrix) -> ModuleVector:
    """
    Φ_m(e_L) en la base de idempotentes de M^μ, sin pasar por la base [M].

    Raises:
        UsageError: si m = 0
    """
    if L.m == 0:
        raise UsageError("Φ_0 no esta definido")
    terms = []
    for d in range(1, L.m + 1):
        terms.extend(_phi_d_on_idempotent(L, d))
    return ModuleVector.from_terms(IDEMPOTENT_BASIS, L.q, terms)


def phi_m_idempotent(v: ModuleVector) -> ModuleVector:
    """Φ_m extendido linealmente a vectores en la base de idempotentes."""
    if v.basis != IDEMPOTENT_BASIS:
        raise UsageError("phi_m_idempotent opera en la base de idempotentes")
    terms = []
    for L, c in v.terms.items():
        terms.extend((K, a * c) for K, a in phi_on_idempotent(L).terms.items())
    return ModuleVector.from_terms(IDEMPOTENT_BASIS, v.q, terms)


# -- remocion de patrones y elegibilidad -----------------------------------------------

def remove_pattern(L: NormalMatrix, p: Pattern) -> Optional[NormalMatrix]:
    """
    R_p(L): borra las filas p_I y las columnas p_I ∪ p_J y renumera.

    Returns:
        matriz en Ξ_{m-s, n-2s}, o None si p no encaja en tab(L)
    """
    if not p.fits(L.tableau):
        return None
    shifted = remove_and_shift(L.tableau, p)
    rank = {x: i for i, x in enumerate(shifted.alphabet, start=1)}
    entries = {
        (rank[b], rank[j]): v
        for (b, j), v in L.entries.items()
        if b in rank and j in rank
    }
    return NormalMatrix.from_entries(len(shifted.alphabet), [rank[b] for b in shifted.row2], entries, L.q)


def orbit_filled_pattern(L: NormalMatrix) -> FilledPattern:
    """Patron lleno de la orbita de e_L (via la matriz patron canonica)."""
    return filled_pattern_of(canonical_pattern_matrix(L))


def leading_term_eligible(L: NormalMatrix) -> bool:
    """tab(L) sin p_I ∪ p_J es un tableau desplazado estandar."""
    pattern = orbit_filled_pattern(L).pattern
    return remove_and_shift(L.tableau, pattern).is_standard()


# -- componentes ----------------------------------------------------------------------------

def component_of(filled: FilledPattern, n: int, m: int, q: int) -> ComponentCollection:
    """Una orbita por tableau fila-estandar en el que encaja el patron."""
    orbits = tuple(
        orbit_of(pattern_matrix_of(t, filled, q))
        for t in enumerate_row_standard(n, m)
        if filled.pattern.fits(t)
    )
    return ComponentCollection(filled, orbits)


def filled_patterns_of_shape(n: int, m: int, q: int) -> List[FilledPattern]:
    found = set()
    for t in enumerate_row_standard(n, m):
        for pattern in patterns_fitting(t):
            for values in product(range(1, q), repeat=pattern.size):
                found.add(FilledPattern(pattern, values))
    return sorted(found, key=lambda f: (f.pattern.size, f.pattern.positions, f.values))


def components_of_shape(n: int, m: int, q: int) -> List[ComponentCollection]:
    validate_shape(n, m)
    return [component_of(filled, n, m, q) for filled in filled_patterns_of_shape(n, m, q)]


def _eliminate(columns: List[ModuleVector], rhs: List[ModuleVector], p: int):
    """
    Gauss-Jordan exacto sobre Q(ζ_p) con varias columnas independientes.
    Pivote: menor denominador, desempate por indice de fila.

    Returns:
        (filas reducidas, columnas pivote)
    """
    labels = _ordered({K for v in columns + rhs for K in v.terms})
    zero = CycScalar.zero(p)
    rows = [[v.terms.get(K, zero) for v in columns] + [v.terms.get(K, zero) for v in rhs] for K in labels]
    pivots: List[int] = []
    r = 0
    for col in range(len(columns)):
        choices = [i for i in range(r, len(rows)) if rows[i][col]]
        if not choices:
            continue
        pick = min(choices, key=lambda i: (rows[i][col].den, i))
        rows[r], rows[pick] = rows[pick], rows[r]
        inv = rows[r][col].inverse()
        rows[r] = [x * inv if x else x for x in rows[r]]
        for i in range(len(rows)):
            factor = rows[i][col]
            if i != r and factor:
                rows[i] = [x - factor * y if y else x for x, y in zip(rows[i], rows[r])]
        pivots.append(col)
        r += 1
    return rows, pivots


def component_rank(vectors: List[ModuleVector], p: int) -> int:
    return len(_eliminate(vectors, [], p)[1])


def _component_vectors(component: ComponentCollection) -> List[SpechtVector]:
    """
    Resuelve Φ_m(e_L) = Σ_R a_R Φ_m(e_R) para todas las L elegibles del componente
    a la vez; R recorre los candidatos (tableau desplazado no estandar).

    Raises:
        InternalInconsistencyError: si el sistema no tiene solucion unica
    """
    eligible = component.eligible()
    if not eligible:
        return []
    sample = eligible[0]
    q, p = sample.q, get_field(sample.q).p
    filled = component.filled_pattern
    if sample.m == 0:
        return [SpechtVector(ModuleVector.basis_vector(L, IDEMPOTENT_BASIS), L, filled, L.tableau) for L in eligible]

    candidates = component.candidates()
    columns = [phi_on_idempotent(R) for R in candidates]
    rhs = [phi_on_idempotent(L) for L in eligible]
    rows, pivots = _eliminate(columns, rhs, p)
    width = len(columns)
    if len(pivots) < width:
        raise InternalInconsistencyError(
            f"Candidatos dependientes en el componente {filled.pattern.label()} [{filled.filling_label()}]",
            {"pattern": filled.pattern.label(), "filling": list(filled.values), "rank": len(pivots), "candidates": width},
        )

    vectors = []
    for k, L in enumerate(eligible):
        if any(rows[i][width + k] for i in range(len(pivots), len(rows))):
            raise InternalInconsistencyError(
                f"Sistema sin solucion para e_L = {L.to_json()}",
                {"label": L.to_json(), "q": q, "pattern": filled.pattern.label()},
            )
        terms = [(L, CycScalar.one(p))]
        for i, col in enumerate(pivots):
            a = rows[i][width + k]
            if not a:
                continue
            R = candidates[col]
            if R.tableau >= L.tableau:
                raise InternalInconsistencyError(
                    f"Correccion con tab(R)={R.tableau.label()} >= tab(L)={L.tableau.label()}",
                    {"label": L.to_json(), "correction": R.to_json()},
                )
            terms.append((R, -a))
        vector = ModuleVector.from_terms(IDEMPOTENT_BASIS, q, terms)
        vectors.append(SpechtVector(vector, L, filled, L.tableau))
    return vectors


def construct_standard_vector(L: NormalMatrix) -> SpechtVector:
    """
    v_L = e_L - Σ a_R e_R con Φ_m(v_L) = 0 y top(v_L) = e_L.

    Raises:
        EligibilityError: si L no es elegible
        InternalInconsistencyError: si el sistema del componente es inconsistente
    """
    if not leading_term_eligible(L):
        raise EligibilityError(f"{L.to_json()} no es elegible como termino principal", {"label": L.to_json()})
    component = component_of(orbit_filled_pattern(L), L.n, L.m, L.q)
    for vector in _component_vectors(component):
        if vector.leading == L:
            return vector
    raise InternalInconsistencyError(f"{L.to_json()} no aparece entre los elegibles de su componente")


def standard_basis(n: int, m: int, q: int, budget: int, workers: int = 1) -> List[SpechtVector]:
    """
    Union de las bases de cada componente, ordenada por (tab(L), clave de L).
    Con workers > 1 los componentes se resuelven en paralelo.

    Raises:
        BudgetExceededError: si [n m]_q + [n m-1]_q supera el presupuesto
    """
    validate_shape(n, m)
    check_budget(gaussian_binomial(n, m, q) + gaussian_binomial(n, m - 1, q), budget, f"Base estandar ({n},{m}) q={q}")
    components = components_of_shape(n, m, q)
    logger.info(f"Resolviendo {len(components)} componentes de patron lleno para ({n - m},{m}) q={q}")
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as executor:
            results = list(executor.map(_component_vectors, components))
    else:
        results = [_component_vectors(component) for component in components]
    basis = [vector for vectors in results for vector in vectors]
    basis.sort(key=lambda v: (v.leading.tableau, v.leading.key()))
    logger.info(f"✓ Base estandar con {len(basis)} vectores")
    return basis


def certificate_check(v: SpechtVector) -> bool:
    """Φ_m(v) = 0, last(v) = tab(L) estandar y el coeficiente de e_L en top(v) es 1."""
    if v.leading.m and not phi_m_idempotent(v.vector).is_zero():
        return False
    last, top = last_and_top(v.vector)
    return last == v.leading.tableau and last.is_standard() and top.coefficient(v.leading) == CycScalar.one(v.vector.p)


def integrality_diagnostic(v: SpechtVector) -> bool:
    """Todos los coeficientes viven en Z[ζ_p][1/p]."""
    return all(c.is_integral() for c in v.vector.terms.values())


# -- propiedades verificables ------------------------------------------------------------

def pattern_preservation_check(n: int, m: int, q: int) -> bool:
    """El soporte de Φ_m(e_L) cae en orbitas con el mismo patron lleno que e_L."""
    validate_shape(n, m)
    if m == 0:
        return True
    for t in enumerate_row_standard(n, m):
        for orbit in batch_orbit_census(t, q):
            for L in orbit.members:
                for K in phi_on_idempotent(L).terms:
                    if orbit_filled_pattern(K) != orbit.filled_pattern:
                        logger.error(f"✗ Φ_m no preserva el patron: L={L.to_json()} K={K.to_json()}")
                        return False
    return True


def _mu_component_sizes(n: int, m: int, q: int) -> Dict[FilledPattern, int]:
    sizes: Dict[FilledPattern, int] = {}
    for t in enumerate_row_standard(n, m - 1):
        for orbit in batch_orbit_census(t, q):
            sizes[orbit.filled_pattern] = sizes.get(orbit.filled_pattern, 0) + orbit.size
    return sizes


def component_surjectivity_check(n: int, m: int, q: int) -> bool:
    """rango{Φ_m(e_R) : R candidato} = dim C^μ_{p_f} = numero de candidatos."""
    validate_shape(n, m)
    if m == 0:
        return True
    p = get_field(q).p
    mu_sizes = _mu_component_sizes(n, m, q)
    for component in components_of_shape(n, m, q):
        candidates = component.candidates()
        rank = component_rank([phi_on_idempotent(R) for R in candidates], p)
        expected = mu_sizes.get(component.filled_pattern, 0)
        if not rank == expected == len(candidates):
            logger.error(
                f"✗ Componente {component.pattern.label()}: rango={rank}, dim C^μ={expected}, candidatos={len(candidates)}"
            )
            return False
    return True


def removal_factor(L: NormalMatrix, p: Pattern) -> Fraction:
    """
    q^{|J_t~| - |J_t|} · Π q·[l_{b v} = 0] sobre (b, v) ∈ J_t con b ∉ p_I y v ∈ p_J.
    """
    q = L.q
    reduced = remove_pattern(L, p)
    factor = Fraction(q) ** (reduced.tableau.free_size - L.tableau.free_size)
    for b, v in free_positions(L.tableau):
        if b not in p.rows and v in p.cols:
            if L.entry(b, v):
                return Fraction(0)
            factor *= q
    return factor


def removal_compatibility_check(dependency: Sequence[Tuple[NormalMatrix, CycScalar]], p: Pattern) -> bool:
    """
    Si Σ γ_r Φ_m(e_r) = 0 dentro de un componente de patron p, entonces
    Σ δ_r Φ_{m-s}(e_{R_p(r)}) = 0 con δ_r = γ_r · removal_factor(r, p).
    """
    if not dependency:
        return True
    sample = dependency[0][0]
    if sample.m - p.size == 0:
        return True
    terms = []
    for L, gamma in dependency:
        reduced = remove_pattern(L, p)
        if reduced is None:
            raise UsageError(f"El patron {p.label()} no encaja en {L.tableau.label()}")
        delta = removal_factor(L, p)
        if delta:
            terms.append((reduced, gamma * delta))
    removed = ModuleVector.from_terms(IDEMPOTENT_BASIS, sample.q, terms)
    return phi_m_idempotent(removed).is_zero()


def standard_dependency(v: SpechtVector) -> List[Tuple[NormalMatrix, CycScalar]]:
    """γ_L = 1 y γ_R = -a_R: la dependencia Σ γ_r Φ_m(e_r) = 0 de un vector estandar."""
    return sorted(v.vector.terms.items(), key=lambda item: (item[0].tableau, item[0].key()))


def last_standard_random_check(n: int, m: int, q: int, budget: int, seed: int = 0, trials: int = 8) -> bool:
    """Combinaciones aleatorias no nulas del nucleo tienen last(v) estandar."""
    basis = kernel_basis(n, m, q, budget)
    rng = random.Random(seed)
    for _ in range(trials):
        v = ModuleVector.zero(MATRIX_BASIS, q)
        for vector in basis:
            v = v + vector.scale(rng.randint(-2, 2))
        if v.is_zero():
            continue
        last, _ = last_and_top(v)
        if not last.is_standard():
            logger.error(f"✗ last(v) = {last.label()} no es estandar")
            return False
    return True
