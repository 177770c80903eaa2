"""
Servicio de caminos reticulares, polinomios de rango y censo de orbitas.

Caja (i, c) del arreglo m x (n-m) <-> posicion (b_i, a_c) de J_t, donde
a_1 < ... < a_{n-m} es la primera fila del tableau.
"""
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from sympy import Poly, Symbol, interpolate

from app.core.config import settings
from app.core.errors import UsageError
from app.services.field_service import get_field, gf_rank
from app.services.flag_service import NormalMatrix, batch_of, check_budget
from app.services.orbit_service import batch_orbit_census, monomial_action, orbit_dimension_exponent, upsilon
from app.services.specht_service import leading_term_eligible, orbit_filled_pattern
from app.services.tableau_service import TwoRowTableau, enumerate_row_standard, remove_and_shift, validate_shape

logger = logging.getLogger(__name__)

EAST = "E"
SOUTH = "S"

T = Symbol("t")


@dataclass(frozen=True)
class LatticePath:
    """Camino de pasos E/S desde (1,1) hasta (a+1, b+1)."""

    a: int
    b: int
    moves: str

    def __post_init__(self):
        if self.moves.count(SOUTH) != self.a or self.moves.count(EAST) != self.b:
            raise UsageError(f"Camino {self.moves} no tiene {self.a} pasos S y {self.b} pasos E")

    @property
    def points(self) -> List[Tuple[int, int]]:
        x, y = 1, 1
        points = [(x, y)]
        for move in self.moves:
            if move == SOUTH:
                x += 1
            else:
                y += 1
            points.append((x, y))
        return points

    @property
    def corners(self) -> List[Tuple[int, int]]:
        """Esquinas esenciales: puntos (i,j) con (i-1,j) y (i,j+1) en el camino."""
        points = self.points
        return [
            points[k]
            for k in range(1, len(self.moves))
            if self.moves[k - 1] == SOUTH and self.moves[k] == EAST
        ]

    @property
    def widths(self) -> List[int]:
        """Cajas bajo el camino en cada fila del arreglo."""
        widths, east = [], 0
        for move in self.moves:
            if move == EAST:
                east += 1
            else:
                widths.append(east)
        return widths

    @property
    def box_count(self) -> int:
        return sum(self.widths)


def path_of(t: TwoRowTableau) -> LatticePath:
    """Se leen 1..n: un numero de la segunda fila es un paso S, los demas E."""
    second = set(t.row2)
    return LatticePath(t.m, t.n - t.m, "".join(SOUTH if k in second else EAST for k in range(1, t.n + 1)))


def tableau_of_path(path: LatticePath) -> TwoRowTableau:
    n = path.a + path.b
    return TwoRowTableau(n, path.a, tuple(k for k, move in enumerate(path.moves, start=1) if move == SOUTH))


def is_good_filling(L: NormalMatrix) -> bool:
    """
    Para cada esquina esencial (i,j): el rectangulo de filas i..a y columnas
    1..j-1 del arreglo tiene rango <= j - i.
    """
    t = L.tableau
    path = path_of(t)
    first = t.row1
    field_ = get_field(L.q)
    for i, j in path.corners:
        bound = j - i
        if bound < 0:
            return False
        block = [[L.entry(t.row2[r - 1], first[c - 1]) for c in range(1, j)] for r in range(i, t.m + 1)]
        if gf_rank(block, field_) > bound:
            return False
    return True


def rank_polynomial(t: TwoRowTableau, q: int, budget: Optional[int] = None) -> int:
    """r_t(q): numero de rellenos buenos del camino de t."""
    check_budget(q ** t.free_size, budget or settings.DEFAULT_BUDGET, f"Rellenos del lote {t.label()}")
    if any(i > j for i, j in path_of(t).corners):
        return 0
    return sum(1 for L in batch_of(t, q).members() if is_good_filling(L))


def eligibility_equivalence_check(t: TwoRowTableau, q: int) -> bool:
    """Rellenos buenos = etiquetas elegibles como termino principal, como conjuntos."""
    for L in batch_of(t, q).members():
        if is_good_filling(L) != leading_term_eligible(L):
            logger.error(f"✗ Relleno bueno y elegibilidad difieren en {L.to_json()}")
            return False
    return True


def good_filling_invariance_check(t: TwoRowTableau, q: int) -> bool:
    """Las operaciones truncadas de fila y columna preservan ser relleno bueno."""
    movers = upsilon(t).movers
    for L in batch_of(t, q).members():
        good = is_good_filling(L)
        for root in movers:
            for alpha in range(1, q):
                image, _ = monomial_action(L, root, alpha)
                if is_good_filling(image) != good:
                    logger.error(f"✗ x_{root}({alpha}) cambia la bondad de {L.to_json()}")
                    return False
    return True


# -- censo -------------------------------------------------------------------------------

def census_counts(n: int, m: int, q: int) -> Dict[int, int]:
    """Numero de orbitas elegibles por exponente de dimension c."""
    validate_shape(n, m)
    counts: Dict[int, int] = {}
    for t in enumerate_row_standard(n, m):
        for orbit in batch_orbit_census(t, q):
            if remove_and_shift(t, orbit.filled_pattern.pattern).is_standard():
                counts[orbit.exponent] = counts.get(orbit.exponent, 0) + 1
    return counts


@dataclass
class CensusPolynomial:
    c: int
    coeffs_t: List[int]
    coeffs_t_minus_1: List[int]
    validated_q: int
    validated: bool
    nonnegative: bool
    samples: Dict[int, int] = field(default_factory=dict)

    def to_json(self) -> Dict[str, object]:
        return {
            "c": self.c,
            "coeffs_t": self.coeffs_t,
            "coeffs_t_minus_1": self.coeffs_t_minus_1,
            "validated_q": self.validated_q,
            "validated": self.validated,
            "nonnegative": self.nonnegative,
        }


def _integer_coefficients(poly: Poly) -> List[int]:
    """Coeficientes ascendentes; UsageError si alguno no es entero."""
    coeffs = list(reversed(poly.all_coeffs()))
    if any(not c.is_integer for c in coeffs):
        raise UsageError(f"El polinomio interpolado {poly.as_expr()} no tiene coeficientes enteros")
    return [int(c) for c in coeffs]


def _fit(samples: Dict[int, int], degree: int) -> Poly:
    if len(samples) < degree + 1:
        raise UsageError(f"Se requieren al menos {degree + 1} valores de q para grado <= {degree}")
    points = sorted(samples.items())
    if len(points) == 1:
        return Poly(points[0][1], T)
    return Poly(interpolate(points, T), T)


def _shifted(poly: Poly) -> List[int]:
    """Coeficientes de poly en potencias de (t - 1)."""
    return _integer_coefficients(Poly(poly.as_expr().subs(T, T + 1), T))


def census_polynomial(n: int, m: int, c: int, q_list: Sequence[int], heldout_q: int) -> CensusPolynomial:
    """
    f_c(t) de grado <= m interpolado en q_list y validado en heldout_q.
    Un polinomio que falla la validacion se reporta con validated=False.
    """
    for q in list(q_list) + [heldout_q]:
        get_field(q)
    samples = {q: census_counts(n, m, q).get(c, 0) for q in q_list}
    poly = _fit(samples, m)
    coeffs = _integer_coefficients(poly)
    expected = census_counts(n, m, heldout_q).get(c, 0)
    validated = poly.eval(heldout_q) == expected
    expansion = _shifted(poly)
    nonnegative = all(x >= 0 for x in expansion)
    if not validated:
        logger.error(f"✗ f_{c} predice {poly.eval(heldout_q)} en q={heldout_q}, censo = {expected}")
    if not nonnegative:
        logger.warning(f"f_{c} tiene coeficientes negativos en potencias de (t-1): {expansion}")
    return CensusPolynomial(c, coeffs, expansion, heldout_q, bool(validated), nonnegative, samples)


@dataclass
class RankPolynomial:
    tableau: TwoRowTableau
    coeffs_t: List[int]
    value_at_one: int
    validated_q: int
    validated: bool

    def to_json(self) -> Dict[str, object]:
        return {
            "tableau": self.tableau.to_json(),
            "coeffs_t": self.coeffs_t,
            "value_at_one": self.value_at_one,
            "validated_q": self.validated_q,
            "validated": self.validated,
        }


def good_fillings_by_exponent(t: TwoRowTableau, q: int) -> Dict[int, int]:
    """Rellenos buenos agrupados por exponente de su orbita, divididos por q^c (numero de orbitas)."""
    counts: Dict[int, int] = {}
    for L in batch_of(t, q).members():
        if is_good_filling(L):
            c = orbit_dimension_exponent(orbit_filled_pattern(L).pattern)
            counts[c] = counts.get(c, 0) + 1
    return {c: count // q ** c for c, count in counts.items()}


def rank_polynomial_interpolated(t: TwoRowTableau, q_list: Sequence[int], heldout_q: int) -> RankPolynomial:
    """
    r_t(t) = Σ_c t^c g_c(t), donde g_c cuenta orbitas buenas de exponente c
    (grado <= m). Se valida en heldout_q y se evalua en t = 1.
    """
    per_q = {q: good_fillings_by_exponent(t, q) for q in q_list}
    exponents = sorted({c for counts in per_q.values() for c in counts})
    total = Poly(0, T)
    for c in exponents:
        g_c = _fit({q: counts.get(c, 0) for q, counts in per_q.items()}, t.m)
        total = total + Poly(T ** c, T) * g_c
    coeffs = _integer_coefficients(total)
    validated = total.eval(heldout_q) == rank_polynomial(t, heldout_q)
    if not validated:
        logger.error(f"✗ r_t interpolado no coincide en q={heldout_q} para {t.label()}")
    return RankPolynomial(t, coeffs, int(total.eval(1)), heldout_q, bool(validated))


def rank_table(n: int, m: int, q: int) -> List[Tuple[TwoRowTableau, int]]:
    """(t, r_t(q)) para todo tableau fila-estandar, en orden lexicografico."""
    return [(t, rank_polynomial(t, q)) for t in enumerate_row_standard(n, m)]
