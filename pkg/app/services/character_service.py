"""
Servicio de caracteres del grupo diamante.
Caracteres χ_L, base de idempotentes E_t de cada lote y cambio de base exacto
entre la base [M] y la base de idempotentes.
"""
import logging
from dataclasses import dataclass, field
from math import lcm
from typing import Dict, Iterable, List, Optional, Tuple

import numpy as np

from app.core.errors import BatchMismatchError, UsageError
from app.services.field_service import CycScalar, FiniteField, get_field, theta
from app.services.flag_service import NormalMatrix, batch_of, diamond_add
from app.services.tableau_service import TwoRowTableau

logger = logging.getLogger(__name__)

MATRIX_BASIS = "matrix"
IDEMPOTENT_BASIS = "idempotent"


@dataclass(frozen=True)
class ModuleVector:
    """
    Vector de soporte finito sobre Ξ_{m,n} con coeficientes en Q(ζ_p).
    `basis` indica si las etiquetas son matrices [M] o idempotentes e_L.
    Nunca guarda coeficientes nulos.
    """

    basis: str
    q: int
    terms: Dict[NormalMatrix, CycScalar] = field(default_factory=dict)

    def __post_init__(self):
        if self.basis not in (MATRIX_BASIS, IDEMPOTENT_BASIS):
            raise UsageError(f"Base desconocida: {self.basis}")

    @classmethod
    def from_terms(cls, basis: str, q: int, pairs: Iterable[Tuple[NormalMatrix, CycScalar]]) -> "ModuleVector":
        totals: Dict[NormalMatrix, CycScalar] = {}
        for label, coeff in pairs:
            totals[label] = totals[label] + coeff if label in totals else coeff
        return cls(basis, q, {label: c for label, c in totals.items() if c})

    @classmethod
    def basis_vector(cls, label: NormalMatrix, basis: str = MATRIX_BASIS) -> "ModuleVector":
        return cls(basis, label.q, {label: CycScalar.one(get_field(label.q).p)})

    @classmethod
    def zero(cls, basis: str, q: int) -> "ModuleVector":
        return cls(basis, q, {})

    @property
    def p(self) -> int:
        return get_field(self.q).p

    def is_zero(self) -> bool:
        return not self.terms

    def batches(self) -> List[TwoRowTableau]:
        return sorted({label.tableau for label in self.terms})

    def restrict_to_batch(self, t: TwoRowTableau) -> "ModuleVector":
        return ModuleVector(self.basis, self.q, {k: c for k, c in self.terms.items() if k.tableau == t})

    def coefficient(self, label: NormalMatrix) -> CycScalar:
        return self.terms.get(label, CycScalar.zero(self.p))

    def _check_compatible(self, other: "ModuleVector") -> None:
        if other.basis != self.basis or other.q != self.q:
            raise UsageError(f"Vectores incompatibles: base {self.basis}/{other.basis}, q {self.q}/{other.q}")

    def __add__(self, other: "ModuleVector") -> "ModuleVector":
        self._check_compatible(other)
        return ModuleVector.from_terms(self.basis, self.q, list(self.terms.items()) + list(other.terms.items()))

    def __neg__(self) -> "ModuleVector":
        return ModuleVector(self.basis, self.q, {k: -c for k, c in self.terms.items()})

    def __sub__(self, other: "ModuleVector") -> "ModuleVector":
        return self + (-other)

    def scale(self, c) -> "ModuleVector":
        return ModuleVector.from_terms(self.basis, self.q, ((k, v * c) for k, v in self.terms.items()))

    def sorted_terms(self) -> List[Tuple[NormalMatrix, CycScalar]]:
        return sorted(self.terms.items(), key=lambda item: (item[0].tableau, item[0].key()))

    def to_json(self) -> Dict[str, object]:
        return {
            "basis": self.basis,
            "terms": [{"matrix": label.to_json(), "coeff": c.to_json()} for label, c in self.sorted_terms()],
        }


def _pairing(L: NormalMatrix, M: NormalMatrix, field: FiniteField) -> int:
    total = 0
    for a, b in zip(L.values, M.values):
        if a and b:
            total = field.add(total, field.mul(a, b))
    return total


def chi(L: NormalMatrix, M: NormalMatrix) -> CycScalar:
    """
    χ_L(M) = Π_{(b_i,j) ∈ J_t} θ(l_{b_i j} m_{b_i j}).

    Raises:
        BatchMismatchError: si tab(L) != tab(M)
    """
    if L.tableau != M.tableau or L.q != M.q:
        raise BatchMismatchError(f"χ entre lotes distintos: {L.tableau.label()} y {M.tableau.label()}")
    field = get_field(L.q)
    return theta(_pairing(L, M, field), field)


def idempotent_vector(L: NormalMatrix) -> ModuleVector:
    """e_L = q^{-|J_t|} Σ_{M ∈ X_t} χ_L(-M) [M], en la base de matrices."""
    field = get_field(L.q)
    size = batch_of(L.tableau, L.q).size
    terms = []
    for M in batch_of(L.tableau, L.q).members():
        exponent = -field.trace(_pairing(L, M, field))
        terms.append((M, CycScalar.zeta_power(field.p, exponent) / size))
    return ModuleVector.from_terms(MATRIX_BASIS, L.q, terms)


# -- transformada rapida radix-q ------------------------------------------------------

def _exponent_table(field: FiniteField, sign: int) -> List[List[int]]:
    return [[(sign * field.trace(field.mul(k, x))) % field.p for x in range(field.q)] for k in range(field.q)]


def fast_character_transform(array: np.ndarray, field: FiniteField, sign: int) -> np.ndarray:
    """
    Calcula out[K] = Σ_M in[M]·θ(sign·<K,M>) para todas las K del lote a la vez.
    `array` tiene forma (q,)*|J_t| + (p,): la ultima dimension son los coeficientes
    de ζ^0..ζ^{p-1}. Se transforma un eje por coordenada.
    """
    table = _exponent_table(field, sign)
    q = field.q
    for axis in range(array.ndim - 1):
        slices = [np.take(array, x, axis=axis) for x in range(q)]
        outputs = []
        for k in range(q):
            acc = np.roll(slices[0], table[k][0], axis=-1)
            for x in range(1, q):
                acc = acc + np.roll(slices[x], table[k][x], axis=-1)
            outputs.append(acc)
        array = np.stack(outputs, axis=axis)
    return array


def _batch_array(terms: Dict[NormalMatrix, CycScalar], t: TwoRowTableau, field: FiniteField) -> Tuple[np.ndarray, int]:
    """Coeficientes del lote en un arreglo denso con denominador comun."""
    den = 1
    for c in terms.values():
        den = lcm(den, c.den)
    shape = (field.q,) * t.free_size + (field.p,)
    array = np.zeros(shape, dtype=object)
    for label, c in terms.items():
        scale = den // c.den
        array[label.values] = np.array([x * scale for x in c.vector()], dtype=object)
    return array, den


def _array_to_terms(array: np.ndarray, t: TwoRowTableau, field: FiniteField, den: int) -> List[Tuple[NormalMatrix, CycScalar]]:
    terms = []
    for label in batch_of(t, field.q).members():
        vector = [int(x) for x in array[label.values]]
        if any(vector):
            coeff = CycScalar.from_vector(field.p, vector, den)
            if coeff:
                terms.append((label, coeff))
    return terms


def to_idempotent_basis(v: ModuleVector) -> ModuleVector:
    """[M] = Σ_K χ_K(M) e_K, lote por lote."""
    if v.basis == IDEMPOTENT_BASIS:
        return v
    field = get_field(v.q)
    terms = []
    for t in v.batches():
        array, den = _batch_array(v.restrict_to_batch(t).terms, t, field)
        terms.extend(_array_to_terms(fast_character_transform(array, field, 1), t, field, den))
    return ModuleVector.from_terms(IDEMPOTENT_BASIS, v.q, terms)


def from_idempotent_basis(v: ModuleVector) -> ModuleVector:
    """e_L = q^{-|J_t|} Σ_M χ_L(-M) [M], lote por lote."""
    if v.basis == MATRIX_BASIS:
        return v
    field = get_field(v.q)
    terms = []
    for t in v.batches():
        array, den = _batch_array(v.restrict_to_batch(t).terms, t, field)
        size = batch_of(t, v.q).size
        terms.extend(_array_to_terms(fast_character_transform(array, field, -1), t, field, den * size))
    return ModuleVector.from_terms(MATRIX_BASIS, v.q, terms)


def to_idempotent_basis_direct(v: ModuleVector) -> ModuleVector:
    """Version de referencia por sumas de caracteres directas, O(|X_t|·|soporte|)."""
    if v.basis == IDEMPOTENT_BASIS:
        return v
    terms = []
    for M, c in v.terms.items():
        for K in batch_of(M.tableau, v.q).members():
            terms.append((K, chi(K, M) * c))
    return ModuleVector.from_terms(IDEMPOTENT_BASIS, v.q, terms)


def from_idempotent_basis_direct(v: ModuleVector) -> ModuleVector:
    if v.basis == MATRIX_BASIS:
        return v
    result = ModuleVector.zero(MATRIX_BASIS, v.q)
    for L, c in v.terms.items():
        result = result + idempotent_vector(L).scale(c)
    return result


def diamond_convolution(u: ModuleVector, v: ModuleVector) -> ModuleVector:
    """Producto en el algebra de grupo del grupo diamante: [M]·[N] = [M ⋄ N]."""
    if u.basis != MATRIX_BASIS or v.basis != MATRIX_BASIS:
        raise UsageError("La convolucion diamante opera en la base de matrices")
    terms = []
    for M, a in u.terms.items():
        for N, b in v.terms.items():
            if M.tableau == N.tableau:
                terms.append((diamond_add(M, N), a * b))
    return ModuleVector.from_terms(MATRIX_BASIS, u.q, terms)


def character_orthogonality_check(t: TwoRowTableau, q: int, limit: Optional[int] = None) -> bool:
    """Σ_M χ_L(-M) χ_K(M) = q^{|J_t|} δ_{L,K} para todas las L, K del lote."""
    field = get_field(q)
    members = list(batch_of(t, q).members())
    size = len(members)
    if limit is not None and size > limit:
        return True
    for L in members:
        for K in members:
            total = [0] * field.p
            for M in members:
                exponent = field.trace(field.sub(_pairing(K, M, field), _pairing(L, M, field)))
                total[exponent] += 1
            value = CycScalar.from_vector(field.p, total)
            expected = CycScalar.rational(field.p, size if L == K else 0)
            if value != expected:
                logger.error(f"✗ Ortogonalidad falla en {t.label()}: L={L.values} K={K.values}")
                return False
    return True
