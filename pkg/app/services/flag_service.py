"""
Servicio del espacio de banderas Ξ_{m,n}.
Forma normal de subespacios, accion circulo de GL_n(q), particion en lotes
y estructura de grupo abeliano (diamante) de cada lote.
"""
import logging
from collections import deque
from dataclasses import dataclass
from functools import lru_cache
from itertools import product
from typing import TYPE_CHECKING, Dict, Iterator, List, Sequence, Tuple

from app.core.errors import (
    BatchMismatchError,
    BudgetExceededError,
    RankDeficiencyError,
    UsageError,
    ZeroVectorError,
)
from app.services.field_service import FiniteField, gaussian_binomial, get_field, gf_rref
from app.services.tableau_service import Position, TwoRowTableau, enumerate_row_standard

if TYPE_CHECKING:
    from app.services.character_service import ModuleVector

logger = logging.getLogger(__name__)


@lru_cache(maxsize=None)
def free_positions(t: TwoRowTableau) -> Tuple[Position, ...]:
    """J_t ordenado por fila b_i y luego por columna j."""
    first = t.row1
    return tuple((b, j) for b in t.row2 for j in first if j < b)


@lru_cache(maxsize=None)
def position_index(t: TwoRowTableau) -> Dict[Position, int]:
    return {pos: k for k, pos in enumerate(free_positions(t))}


@dataclass(frozen=True, order=True)
class NormalMatrix:
    """
    Representante canonico de un subespacio de dimension m de GF(q)^n.
    `values` sigue el orden de free_positions(tableau); el "ultimo 1"
    de cada fila esta implicito en (b_i, b_i).
    """

    tableau: TwoRowTableau
    values: Tuple[int, ...]
    q: int

    def __post_init__(self):
        if len(self.values) != len(free_positions(self.tableau)):
            raise UsageError(
                f"Se esperaban {len(free_positions(self.tableau))} entradas libres para "
                f"{self.tableau.label()}, llegaron {len(self.values)}"
            )

    @classmethod
    def from_entries(cls, n: int, row_labels: Sequence[int], entries: Dict[Position, int], q: int) -> "NormalMatrix":
        t = TwoRowTableau.from_row2(n, row_labels)
        index = position_index(t)
        for pos in entries:
            if pos not in index:
                raise UsageError(f"La posicion {pos} no es libre en el lote {t.label()}")
        return cls(t, tuple(entries.get(pos, 0) for pos in free_positions(t)), q)

    @classmethod
    def zero(cls, t: TwoRowTableau, q: int) -> "NormalMatrix":
        return cls(t, tuple([0] * t.free_size), q)

    @property
    def n(self) -> int:
        return self.tableau.n

    @property
    def m(self) -> int:
        return self.tableau.m

    @property
    def row_labels(self) -> Tuple[int, ...]:
        return self.tableau.row2

    @property
    def entries(self) -> Dict[Position, int]:
        """Entradas libres no nulas."""
        return {pos: v for pos, v in zip(free_positions(self.tableau), self.values) if v}

    def entry(self, i: int, j: int) -> int:
        if i == j and i in self.tableau.row2:
            return 1
        k = position_index(self.tableau).get((i, j))
        return 0 if k is None else self.values[k]

    def key(self) -> int:
        """Clave radix-q de las entradas libres (primera posicion mas significativa)."""
        value = 0
        for v in self.values:
            value = value * self.q + v
        return value

    def to_rows(self) -> List[List[int]]:
        rows = []
        for b in self.tableau.row2:
            row = [0] * self.n
            row[b - 1] = 1
            rows.append(row)
        label_row = {b: r for r, b in enumerate(self.tableau.row2)}
        for (b, j), v in zip(free_positions(self.tableau), self.values):
            rows[label_row[b]][j - 1] = v
        return rows

    def to_json(self) -> Dict[str, object]:
        return {
            "row_labels": list(self.tableau.row2),
            "entries": {f"({i},{j})": v for (i, j), v in self.entries.items()},
        }


def matrix_from_key(t: TwoRowTableau, key: int, q: int) -> NormalMatrix:
    size = t.free_size
    values = [0] * size
    for k in range(size - 1, -1, -1):
        key, values[k] = divmod(key, q)
    return NormalMatrix(t, tuple(values), q)


@dataclass(frozen=True)
class GroupElement:
    """Matriz invertible n x n sobre GF(q)."""

    rows: Tuple[Tuple[int, ...], ...]
    q: int

    @property
    def n(self) -> int:
        return len(self.rows)

    @classmethod
    def identity(cls, n: int, q: int) -> "GroupElement":
        return cls(tuple(tuple(1 if i == j else 0 for j in range(n)) for i in range(n)), q)

    @classmethod
    def root(cls, n: int, i: int, j: int, alpha: int, q: int) -> "GroupElement":
        """x_ij(α) = E_n + α·ε_ij (indices 1-based, i != j)."""
        if i == j or not (1 <= i <= n and 1 <= j <= n):
            raise UsageError(f"Raiz invalida ({i},{j}) para n={n}")
        rows = [list(r) for r in cls.identity(n, q).rows]
        rows[i - 1][j - 1] = alpha
        return cls(tuple(tuple(r) for r in rows), q)

    def __matmul__(self, other: "GroupElement") -> "GroupElement":
        field = get_field(self.q)
        return GroupElement(tuple(tuple(_dot(row, col, field) for col in zip(*other.rows)) for row in self.rows), self.q)


def _dot(u: Sequence[int], v: Sequence[int], field: FiniteField) -> int:
    total = 0
    for a, b in zip(u, v):
        if a and b:
            total = field.add(total, field.mul(a, b))
    return total


def normal_form(rows: Sequence[Sequence[int]], q: int) -> NormalMatrix:
    """
    Representante en Ξ_{m,n} del espacio fila de una matriz m x n de rango m.
    Eliminacion con pivotes de derecha a izquierda.

    Raises:
        RankDeficiencyError: si el rango es menor que m
    """
    field = get_field(q)
    m = len(rows)
    n = len(rows[0]) if rows else 0
    reversed_rows = [list(reversed(r)) for r in rows]
    reduced, pivots = gf_rref(reversed_rows, field)
    if len(pivots) < m:
        raise RankDeficiencyError(f"Rango {len(pivots)} < {m}", {"rows": [list(r) for r in rows]})
    labelled = sorted(((n - c, list(reversed(r))) for r, c in zip(reduced, pivots)), key=lambda x: x[0])
    t = TwoRowTableau(n, m, tuple(label for label, _ in labelled))
    row_of = {label: r for label, r in labelled}
    return NormalMatrix(t, tuple(row_of[b][j - 1] for b, j in free_positions(t)), q)


def circle_action(L: NormalMatrix, g: GroupElement) -> NormalMatrix:
    """L ∘ g = normal_form(L·g)."""
    if L.m == 0:
        return L
    field = get_field(L.q)
    columns = list(zip(*g.rows))
    return normal_form([[_dot(row, col, field) for col in columns] for row in L.to_rows()], L.q)


def root_action(L: NormalMatrix, i: int, j: int, alpha: int) -> NormalMatrix:
    """L ∘ x_ij(α): suma α·(columna i) a la columna j y renormaliza."""
    if alpha == 0 or L.m == 0:
        return L
    field = get_field(L.q)
    rows = L.to_rows()
    for row in rows:
        if row[i - 1]:
            row[j - 1] = field.add(row[j - 1], field.mul(alpha, row[i - 1]))
    return normal_form(rows, L.q)


def diamond_add(M: NormalMatrix, N: NormalMatrix) -> NormalMatrix:
    """
    Suma entrada a entrada sobre J_t; los ultimos 1 no cambian.

    Raises:
        BatchMismatchError: si tab(M) != tab(N)
    """
    if M.tableau != N.tableau or M.q != N.q:
        raise BatchMismatchError(f"Lotes distintos: {M.tableau.label()} y {N.tableau.label()}")
    field = get_field(M.q)
    return NormalMatrix(M.tableau, tuple(field.add(a, b) for a, b in zip(M.values, N.values)), M.q)


@dataclass(frozen=True)
class Batch:
    """Lote X_t: todas las matrices de Ξ con tableau t, indexadas por clave radix-q."""

    tableau: TwoRowTableau
    q: int

    @property
    def positions(self) -> Tuple[Position, ...]:
        return free_positions(self.tableau)

    @property
    def size(self) -> int:
        return self.q ** self.tableau.free_size

    def members(self) -> Iterator[NormalMatrix]:
        for values in product(range(self.q), repeat=self.tableau.free_size):
            yield NormalMatrix(self.tableau, values, self.q)

    def matrix(self, key: int) -> NormalMatrix:
        return matrix_from_key(self.tableau, key, self.q)

    def zero(self) -> NormalMatrix:
        return NormalMatrix.zero(self.tableau, self.q)


def batch_of(t: TwoRowTableau, q: int) -> Batch:
    return Batch(t, q)


def check_budget(count: int, budget: int, what: str) -> None:
    if count > budget:
        raise BudgetExceededError(
            f"{what}: {count} elementos superan el presupuesto de {budget}",
            {"count": count, "budget": budget},
        )


def enumerate_xi(m: int, n: int, q: int, budget: int) -> List[NormalMatrix]:
    """
    Todos los elementos de Ξ_{m,n}, agrupados por lote (orden lexicografico de
    tableaux) y ordenados por clave dentro de cada lote.

    Raises:
        BudgetExceededError: si [n m]_q supera el presupuesto
    """
    get_field(q)
    check_budget(gaussian_binomial(n, m, q), budget, f"Ξ_{{{m},{n}}} con q={q}")
    result: List[NormalMatrix] = []
    for t in enumerate_row_standard(n, m):
        result.extend(batch_of(t, q).members())
    logger.debug(f"Ξ_{{{m},{n}}} (q={q}): {len(result)} matrices")
    return result


def row_space_dedup_count(m: int, n: int, q: int, budget: int) -> int:
    """Oraculo: numero de espacios fila distintos entre todas las matrices m x n de rango m."""
    check_budget(q ** (m * n), budget, f"matrices {m}x{n} sobre GF({q})")
    seen = set()
    for flat in product(range(q), repeat=m * n):
        rows = [list(flat[r * n:(r + 1) * n]) for r in range(m)]
        try:
            seen.add(normal_form(rows, q))
        except RankDeficiencyError:
            continue
    return len(seen)


def transitivity_check(t: TwoRowTableau, q: int) -> bool:
    """BFS desde la matriz con entradas libres nulas bajo todos los x_ij(α), i > j."""
    start = NormalMatrix.zero(t, q)
    seen = {start}
    frontier = deque([start])
    roots = [(i, j) for i in range(1, t.n + 1) for j in range(1, i)]
    while frontier:
        current = frontier.popleft()
        for i, j in roots:
            for alpha in range(1, q):
                image = root_action(current, i, j, alpha)
                if image.tableau != t:
                    logger.error(f"✗ U cambio el lote {t.label()} -> {image.tableau.label()}")
                    return False
                if image not in seen:
                    seen.add(image)
                    frontier.append(image)
    return len(seen) == batch_of(t, q).size


def last_and_top(v: "ModuleVector") -> Tuple[TwoRowTableau, "ModuleVector"]:
    """
    last(v): mayor tableau (lexicografico) con componente no nula;
    top(v): la componente de v en ese lote.

    Raises:
        ZeroVectorError: si v = 0
    """
    if not v.terms:
        raise ZeroVectorError("last/top de un vector nulo")
    last = max(label.tableau for label in v.terms)
    return last, v.restrict_to_batch(last)
