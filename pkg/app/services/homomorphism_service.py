"""
Servicio de homomorfismos entre modulos de permutacion.
Φ_m (quitar una caja), φ_{1,i} (suma de subespacios de dimension i),
matrices dispersas exactas y nucleos sobre Q con sympy.
"""
import logging
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations, product
from typing import Dict, List, Tuple

from sympy import QQ
from sympy.polys.matrices import DomainMatrix

from app.core.errors import UsageError
from app.services.character_service import MATRIX_BASIS, ModuleVector
from app.services.field_service import CycScalar, gaussian_binomial, get_field, q_integer
from app.services.flag_service import (
    NormalMatrix,
    batch_of,
    check_budget,
    enumerate_xi,
    free_positions,
    normal_form,
)
from app.services.tableau_service import TwoRowTableau, validate_shape

logger = logging.getLogger(__name__)


@dataclass
class HomMatrix:
    """Matriz dispersa de un homomorfismo en las bases [M] (filas: destino, columnas: origen)."""

    source_shape: Tuple[int, int]
    target_shape: Tuple[int, int]
    q: int
    rows: List[NormalMatrix]
    cols: List[NormalMatrix]
    entries: Dict[Tuple[int, int], int]

    def to_domain_matrix(self) -> DomainMatrix:
        dod: Dict[int, Dict[int, object]] = {}
        for (r, c), value in self.entries.items():
            if value:
                dod.setdefault(r, {})[c] = QQ(value)
        return DomainMatrix(dod, (len(self.rows), len(self.cols)), QQ)

    def triplets(self) -> List[Tuple[int, int, int]]:
        return sorted((r, c, v) for (r, c), v in self.entries.items() if v)

    def to_triplet_text(self) -> str:
        header = (
            f"# source=({self.source_shape[0]},{self.source_shape[1]}) "
            f"target=({self.target_shape[0]},{self.target_shape[1]}) q={self.q} "
            f"shape={len(self.rows)}x{len(self.cols)}\n"
        )
        return header + "".join(f"{r} {c} {v}\n" for r, c, v in self.triplets())


def _index(labels: List[NormalMatrix]) -> Dict[NormalMatrix, int]:
    return {label: k for k, label in enumerate(labels)}


def phi_m_d(M: NormalMatrix, d: int) -> ModuleVector:
    """
    Φ_m^d([M]) = Σ_{N ∈ R_d(M)} [N]: se suma α_t·(fila b_d) a cada fila b_t con
    t > d y luego se borra la fila b_d. Todas las N caen en el lote u_d.
    """
    t = M.tableau
    m = t.m
    if not 1 <= d <= m:
        raise UsageError(f"d={d} fuera de 1..{m}")
    field = get_field(M.q)
    b_d = t.row2[d - 1]
    target = TwoRowTableau(t.n, m - 1, tuple(b for b in t.row2 if b != b_d))
    below = t.row2[d:]
    terms = []
    for alphas in product(range(M.q), repeat=len(below)):
        coefficient = dict(zip(below, alphas))
        values = []
        for b, j in free_positions(target):
            if b < b_d:
                values.append(M.entry(b, j))
            elif j == b_d:
                values.append(coefficient[b])
            else:
                values.append(field.add(M.entry(b, j), field.mul(coefficient[b], M.entry(b_d, j))))
        terms.append((NormalMatrix(target, tuple(values), M.q), CycScalar.one(field.p)))
    return ModuleVector.from_terms(MATRIX_BASIS, M.q, terms)


def phi_m(v: ModuleVector) -> ModuleVector:
    """Φ_m = Σ_d Φ_m^d, extendido linealmente (base de matrices)."""
    if v.basis != MATRIX_BASIS:
        raise UsageError("phi_m opera en la base de matrices; usar phi_on_idempotent")
    result = ModuleVector.zero(MATRIX_BASIS, v.q)
    for M, c in v.terms.items():
        for d in range(1, M.m + 1):
            result = result + phi_m_d(M, d).scale(c)
    return result


def _subspace_coordinates(dim: int, ambient: int, q: int) -> List[NormalMatrix]:
    """Todos los subespacios de dimension `dim` de GF(q)^ambient (sin restriccion de forma)."""
    result = []
    for row2 in combinations(range(1, ambient + 1), dim):
        result.extend(batch_of(TwoRowTableau(ambient, dim, row2), q).members())
    return result


def subspaces_of(X: NormalMatrix, i: int) -> List[NormalMatrix]:
    """Subespacios de dimension i del espacio fila de X."""
    field = get_field(X.q)
    if i == 0:
        return [NormalMatrix.zero(TwoRowTableau(X.n, 0, ()), X.q)]
    rows = X.to_rows()
    result = []
    for C in _subspace_coordinates(i, X.m, X.q):
        combined = [
            [
                _combine(coefs, [row[col] for row in rows], field)
                for col in range(X.n)
            ]
            for coefs in C.to_rows()
        ]
        result.append(normal_form(combined, X.q))
    return result


def _combine(coefs, column, field) -> int:
    total = 0
    for a, b in zip(coefs, column):
        if a and b:
            total = field.add(total, field.mul(a, b))
    return total


def phi_1_i(v: ModuleVector, i: int) -> ModuleVector:
    """
    φ_{1,i}: cada [X] se envia a la suma de sus subespacios de dimension i.
    i = m es la identidad; i = 0 es la augmentacion.
    """
    if v.basis != MATRIX_BASIS:
        raise UsageError("phi_1_i opera en la base de matrices")
    terms = []
    for X, c in v.terms.items():
        if not 0 <= i <= X.m:
            raise UsageError(f"i={i} fuera de 0..{X.m}")
        terms.extend((Y, c) for Y in subspaces_of(X, i))
    return ModuleVector.from_terms(MATRIX_BASIS, v.q, terms)


def _hom_matrix(n: int, m: int, target_m: int, q: int, budget: int, image) -> HomMatrix:
    check_budget(gaussian_binomial(n, m, q) + gaussian_binomial(n, target_m, q), budget, f"Hom ({n},{m})->({n},{target_m})")
    cols = enumerate_xi(m, n, q, budget)
    rows = _xi_any(target_m, n, q)
    row_index = _index(rows)
    entries: Dict[Tuple[int, int], int] = {}
    for c, M in enumerate(cols):
        for N, coeff in image(M).terms.items():
            key = (row_index[N], c)
            entries[key] = entries.get(key, 0) + int(coeff.as_fraction())
    return HomMatrix((n - m, m), (n - target_m, target_m), q, rows, cols, entries)


def _xi_any(m: int, n: int, q: int) -> List[NormalMatrix]:
    """Ξ_{m,n} en orden de lotes y claves, sin exigir m <= n/2."""
    return _subspace_coordinates(m, n, q)


def phi_matrix(n: int, m: int, q: int, budget: int) -> HomMatrix:
    """Matriz de Φ_m: M^(n-m,m) -> M^(n-m+1,m-1)."""
    validate_shape(n, m)
    if m == 0:
        raise UsageError("Φ_0 no esta definido")
    return _hom_matrix(n, m, m - 1, q, budget, lambda M: phi_m(ModuleVector.basis_vector(M)))


def phi_1_i_matrix(n: int, m: int, i: int, q: int, budget: int) -> HomMatrix:
    """Matriz de φ_{1,i}: M^(n-m,m) -> M^(n-i,i)."""
    validate_shape(n, m)
    return _hom_matrix(n, m, i, q, budget, lambda M: phi_1_i(ModuleVector.basis_vector(M), i))


def _qq_to_fraction(value) -> Fraction:
    return Fraction(int(value.numerator), int(value.denominator))


def kernel_basis(n: int, m: int, q: int, budget: int) -> List[ModuleVector]:
    """
    Base exacta de ker Φ_m sobre Q en la base [M].
    Su dimension es [n m]_q - [n m-1]_q.

    Raises:
        BudgetExceededError: si la enumeracion supera el presupuesto
    """
    validate_shape(n, m)
    p = get_field(q).p
    if m == 0:
        return [ModuleVector.basis_vector(M) for M in enumerate_xi(0, n, q, budget)]
    matrix = phi_matrix(n, m, q, budget)
    logger.info(f"Calculando nucleo de Φ_{m} ({len(matrix.rows)}x{len(matrix.cols)}) sobre Q")
    null = matrix.to_domain_matrix().nullspace()
    basis = []
    for _, row in sorted(null.to_sparse().rep.items()):
        terms = [(matrix.cols[c], CycScalar.rational(p, _qq_to_fraction(value))) for c, value in sorted(row.items())]
        basis.append(ModuleVector.from_terms(MATRIX_BASIS, q, terms))
    return basis


def _stack(matrices: List[HomMatrix]) -> DomainMatrix:
    dod: Dict[int, Dict[int, object]] = {}
    offset = 0
    cols = len(matrices[0].cols)
    for matrix in matrices:
        for (r, c), value in matrix.entries.items():
            if value:
                dod.setdefault(offset + r, {})[c] = QQ(value)
        offset += len(matrix.rows)
    return DomainMatrix(dod, (offset, cols), QQ)


def kernel_intersection_check(n: int, m: int, q: int, budget: int) -> bool:
    """
    True si ∩_{i=0}^{m-1} ker φ_{1,i} = ker Φ_m como subespacios:
    rango(A) = rango(B) = rango([A; B]).
    """
    validate_shape(n, m)
    if m == 0:
        return True
    phis = [phi_1_i_matrix(n, m, i, q, budget) for i in range(m)]
    big_phi = phi_matrix(n, m, q, budget)
    rank_a = _stack(phis).rank()
    rank_b = _stack([big_phi]).rank()
    rank_ab = _stack(phis + [big_phi]).rank()
    logger.info(f"Rangos: ∩φ={rank_a}, Φ={rank_b}, conjunto={rank_ab}")
    return rank_a == rank_b == rank_ab


def phi_rank(n: int, m: int, q: int, budget: int) -> int:
    """Rango de Φ_m; igual a dim M^μ cuando Φ_m es sobreyectiva."""
    return phi_matrix(n, m, q, budget).to_domain_matrix().rank()


def composition_law_check(n: int, m: int, q: int, budget: int) -> bool:
    """φ_{1,i} ∘ Φ_m = [m-i]_q · φ_{1,i} sobre M^λ, para 0 <= i <= m-2."""
    validate_shape(n, m)
    for M in enumerate_xi(m, n, q, budget):
        basis = ModuleVector.basis_vector(M)
        image = phi_m(basis)
        for i in range(0, m - 1):
            if phi_1_i(image, i) != phi_1_i(basis, i).scale(q_integer(m - i, q)):
                logger.error(f"✗ Ley de composicion falla en i={i} para {M.to_json()}")
                return False
    return True
