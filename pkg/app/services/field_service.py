"""
Servicio de aritmetica exacta.
Campos finitos GF(q) con q <= 16 y escalares ciclotomicos sobre Z[ζ_p],
donde viven los valores de caracter θ(α) y los coeficientes de los modulos.
"""
import logging
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import gcd
from typing import Dict, List, Sequence, Tuple, Union

import galois
import numpy as np

from app.core.errors import DivisionByZeroError, FieldError

logger = logging.getLogger(__name__)

# Polinomios de reduccion (coeficientes de menor a mayor grado, monicos)
CONWAY_POLYNOMIALS: Dict[int, Tuple[int, ...]] = {
    4: (1, 1, 1),
    8: (1, 1, 0, 1),
    9: (2, 2, 1),
    16: (1, 1, 0, 0, 1),
}

SUPPORTED_ORDERS: Tuple[int, ...] = (2, 3, 4, 5, 7, 8, 9, 11, 13, 16)

_PRIME_POWERS: Dict[int, Tuple[int, int]] = {
    2: (2, 1), 3: (3, 1), 4: (2, 2), 5: (5, 1), 7: (7, 1),
    8: (2, 3), 9: (3, 2), 11: (11, 1), 13: (13, 1), 16: (2, 4),
}


class FiniteField:
    """
    GF(q) con elementos codificados como enteros 0..q-1: los digitos en base p
    son los coeficientes del polinomio representante (la representacion
    entera de galois). Las tablas se construyen una sola vez por q (ver get_field).
    """

    def __init__(self, q: int):
        if q not in _PRIME_POWERS:
            raise FieldError(
                f"q={q} no soportado; valores validos: {list(SUPPORTED_ORDERS)}",
                {"q": q},
            )
        self.q = q
        self.p, self.k = _PRIME_POWERS[q]
        self.modulus = CONWAY_POLYNOMIALS.get(q, (0, 1))
        self.elements = tuple(range(q))
        self.galois_field = self._build_galois_field()

        x = self.galois_field.elements
        self._add = _plain(x[:, None] + x[None, :])
        self._mul = _plain(x[:, None] * x[None, :])
        self._neg = _plain(-x)
        self._inv = [0] + _plain(x[1:] ** -1)
        self._frobenius = _plain(x ** self.p)
        self._trace = _plain(x.field_trace())

    def _build_galois_field(self):
        if self.k == 1:
            return galois.GF(self.q)
        # galois espera los coeficientes de mayor a menor grado
        modulus = galois.Poly(list(reversed(self.modulus)), field=galois.GF(self.p))
        return galois.GF(self.q, irreducible_poly=modulus)

    # -- aritmetica -------------------------------------------------------------

    def add(self, a: int, b: int) -> int:
        return self._add[a][b]

    def sub(self, a: int, b: int) -> int:
        return self._add[a][self._neg[b]]

    def neg(self, a: int) -> int:
        return self._neg[a]

    def mul(self, a: int, b: int) -> int:
        return self._mul[a][b]

    def inv(self, a: int) -> int:
        if a == 0:
            raise DivisionByZeroError(f"0 no es invertible en GF({self.q})")
        return self._inv[a]

    def div(self, a: int, b: int) -> int:
        return self._mul[a][self.inv(b)]

    def frobenius(self, a: int) -> int:
        return self._frobenius[a]

    def trace(self, a: int) -> int:
        """Traza absoluta GF(q) -> GF(p), como entero 0..p-1."""
        return self._trace[a]

    def array(self, rows: Sequence[Sequence[int]]):
        """Matriz de enteros como arreglo de galois sobre este campo."""
        return self.galois_field(np.asarray(rows, dtype=np.int64))

    def descriptor(self) -> Dict[str, object]:
        """Descriptor del campo, se escribe una vez por archivo."""
        return {"q": self.q, "p": self.p, "k": self.k, "modulus": list(self.modulus)}

    def __repr__(self) -> str:
        return f"FiniteField(q={self.q})"


def _plain(values) -> list:
    """Arreglo de galois a listas de int de Python (indexado rapido en los bucles)."""
    return np.asarray(values).view(np.ndarray).astype(np.int64).tolist()


@lru_cache(maxsize=None)
def get_field(q: int) -> FiniteField:
    """Retorna el campo GF(q) (cacheado)."""
    return FiniteField(q)


# -- escalares ciclotomicos ----------------------------------------------------------

Number = Union[int, Fraction]


def _normalize(p: int, vector: Sequence[int], den: int) -> Tuple[Tuple[int, ...], int]:
    """
    Reduce un vector de longitud p (coeficientes de ζ^0..ζ^{p-1}) usando
    1 + ζ + ... + ζ^{p-1} = 0 y el mcd con el denominador.
    """
    if den == 0:
        raise DivisionByZeroError("Denominador cero en escalar ciclotomico")
    if p == 2:
        # ζ_2 = -1
        num = [vector[0] - (vector[1] if len(vector) > 1 else 0)]
    else:
        last = vector[p - 1] if len(vector) == p else 0
        num = [vector[i] - last for i in range(p - 1)]
    if den < 0:
        num = [-x for x in num]
        den = -den
    if not any(num):
        return tuple([0] * (p - 1)), 1
    divisor = den
    for x in num:
        divisor = gcd(divisor, x)
    if divisor > 1:
        num = [x // divisor for x in num]
        den //= divisor
    return tuple(num), den


@dataclass(frozen=True)
class CycScalar:
    """
    Elemento exacto de Q(ζ_p): numerador entero en la base 1, ζ, ..., ζ^{p-2}
    y denominador positivo compartido. Siempre en forma canonica.
    """

    p: int
    num: Tuple[int, ...]
    den: int = 1

    @classmethod
    def from_vector(cls, p: int, vector: Sequence[int], den: int = 1) -> "CycScalar":
        num, den = _normalize(p, list(vector), den)
        return cls(p, num, den)

    @classmethod
    def rational(cls, p: int, value: Number) -> "CycScalar":
        value = Fraction(value)
        return cls.from_vector(p, [value.numerator] + [0] * (p - 1), value.denominator)

    @classmethod
    def zero(cls, p: int) -> "CycScalar":
        return cls(p, tuple([0] * (p - 1)), 1)

    @classmethod
    def one(cls, p: int) -> "CycScalar":
        return cls.rational(p, 1)

    @classmethod
    def zeta_power(cls, p: int, exponent: int) -> "CycScalar":
        vector = [0] * p
        vector[exponent % p] = 1
        return cls.from_vector(p, vector)

    @classmethod
    def from_json(cls, p: int, payload: Dict[str, object]) -> "CycScalar":
        return cls.from_vector(p, list(payload["num"]) + [0], int(payload["den"]))

    # -- representacion ---------------------------------------------------------

    def vector(self) -> List[int]:
        """Numerador extendido a longitud p (coeficiente de ζ^{p-1} = 0)."""
        return list(self.num) + [0]

    def is_zero(self) -> bool:
        return not any(self.num)

    def __bool__(self) -> bool:
        return not self.is_zero()

    def is_rational(self) -> bool:
        return not any(self.num[1:])

    def as_fraction(self) -> Fraction:
        if not self.is_rational():
            raise ValueError(f"{self} no es racional")
        return Fraction(self.num[0], self.den)

    def is_integral(self) -> bool:
        """True si el denominador es potencia de p (vive en Z[ζ_p][1/p])."""
        den = self.den
        while den % self.p == 0:
            den //= self.p
        return den == 1

    def to_json(self) -> Dict[str, object]:
        return {"den": self.den, "num": list(self.num)}

    def __str__(self) -> str:
        if self.is_rational():
            return str(Fraction(self.num[0], self.den))
        terms = [f"{c}*z^{i}" for i, c in enumerate(self.num) if c]
        return f"({' + '.join(terms)})/{self.den}"

    # -- aritmetica -------------------------------------------------------------

    def _coerce(self, other) -> "CycScalar":
        if isinstance(other, CycScalar):
            if other.p != self.p:
                raise FieldError(f"Escalares de Q(ζ_{self.p}) y Q(ζ_{other.p}) no combinan")
            return other
        if isinstance(other, (int, Fraction)):
            return CycScalar.rational(self.p, other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        den = self.den * other.den
        vector = [a * other.den + b * self.den for a, b in zip(self.vector(), other.vector())]
        return CycScalar.from_vector(self.p, vector, den)

    __radd__ = __add__

    def __neg__(self) -> "CycScalar":
        return CycScalar(self.p, tuple(-x for x in self.num), self.den)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        p = self.p
        product = [0] * p
        for i, a in enumerate(self.num):
            if a:
                for j, b in enumerate(other.num):
                    if b:
                        product[(i + j) % p] += a * b
        return CycScalar.from_vector(p, product, self.den * other.den)

    __rmul__ = __mul__

    def conjugate(self, k: int) -> "CycScalar":
        """Automorfismo de Galois ζ -> ζ^k (k coprimo con p)."""
        vector = [0] * self.p
        for i, c in enumerate(self.num):
            vector[(i * k) % self.p] += c
        return CycScalar.from_vector(self.p, vector, self.den)

    def norm(self) -> Fraction:
        """Norma racional: producto de todos los conjugados."""
        result = CycScalar.one(self.p)
        for k in range(1, self.p):
            result = result * self.conjugate(k)
        return result.as_fraction()

    def inverse(self) -> "CycScalar":
        if self.is_zero():
            raise DivisionByZeroError("Division por el escalar cero")
        cofactor = CycScalar.one(self.p)
        for k in range(2, self.p):
            cofactor = cofactor * self.conjugate(k)
        norm = (self * cofactor).as_fraction()
        return cofactor * (1 / norm)

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self * other.inverse()

    def __rtruediv__(self, other):
        return self.inverse() * other


def theta(alpha: int, field: FiniteField) -> CycScalar:
    """
    Caracter lineal no trivial de (GF(q), +): θ(α) = ζ_p^{Tr(α)}.
    """
    return CycScalar.zeta_power(field.p, field.trace(alpha))


def cyc_arith(a: CycScalar, b: CycScalar, op: str) -> CycScalar:
    """
    Aritmetica exacta sobre escalares ciclotomicos.

    Args:
        a, b: operandos en el mismo Q(ζ_p)
        op: 'add', 'sub', 'mul' o 'div'

    Raises:
        DivisionByZeroError: si op='div' y b == 0
    """
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "div":
        return a / b
    raise ValueError(f"Operacion desconocida: {op}")


def gaussian_binomial(n: int, m: int, q: int) -> int:
    """
    Polinomio gaussiano [n m]_q evaluado en q.
    Cuenta los subespacios de dimension m de GF(q)^n; 0 si n < m.
    """
    if m < 0 or n < m:
        return 0
    numerator, denominator = 1, 1
    for i in range(m):
        numerator *= q ** (n - i) - 1
        denominator *= q ** (i + 1) - 1
    return numerator // denominator


def q_integer(k: int, q: int) -> int:
    """[k]_q = 1 + q + ... + q^{k-1}."""
    return sum(q ** i for i in range(k))


# -- algebra lineal sobre GF(q) ------------------------------------------------------

def gf_rref(rows: Sequence[Sequence[int]], field: FiniteField) -> Tuple[List[List[int]], List[int]]:
    """
    Forma escalonada reducida por filas sobre GF(q), pivotes de izquierda a derecha.
    Eliminacion sobre las tablas del campo: se llama una vez por forma normal,
    sobre matrices de m filas.

    Returns:
        (filas no nulas de la RREF, columnas pivote)
    """
    matrix = [list(row) for row in rows]
    if not matrix:
        return [], []
    width = len(matrix[0])
    pivots: List[int] = []
    r = 0
    for col in range(width):
        pivot_row = next((i for i in range(r, len(matrix)) if matrix[i][col]), None)
        if pivot_row is None:
            continue
        matrix[r], matrix[pivot_row] = matrix[pivot_row], matrix[r]
        inv = field.inv(matrix[r][col])
        matrix[r] = [field.mul(inv, x) for x in matrix[r]]
        for i in range(len(matrix)):
            if i != r and matrix[i][col]:
                factor = matrix[i][col]
                matrix[i] = [field.sub(x, field.mul(factor, y)) for x, y in zip(matrix[i], matrix[r])]
        pivots.append(col)
        r += 1
        if r == len(matrix):
            break
    return matrix[:r], pivots


def gf_rank(rows: Sequence[Sequence[int]], field: FiniteField) -> int:
    """Rango de una matriz sobre GF(q)."""
    if not rows or not rows[0]:
        return 0
    return int(np.linalg.matrix_rank(field.array(rows)))


def gf_solve_left(target: Sequence[int], rows: Sequence[Sequence[int]], field: FiniteField):
    """
    Busca α con Σ_i α_i·rows[i] = target.

    Returns:
        lista α, o None si target no esta en el espacio fila
    """
    h = len(rows)
    if h == 0:
        return [] if not any(target) else None
    width = len(target)
    # sistema aumentado sobre las columnas: rows^T α = target
    augmented = [[rows[i][c] for i in range(h)] + [target[c]] for c in range(width)]
    reduced, pivots = gf_rref(augmented, field)
    if h in pivots:
        return None
    alpha = [0] * h
    for row, col in zip(reduced, pivots):
        alpha[col] = row[h]
    return alpha
