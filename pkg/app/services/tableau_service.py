"""
Servicio combinatorio de tableaux de dos filas.
Tableaux, ordenes, patrones, tableaux desplazados y las identidades de conteo
que indexan el resto del motor.
"""
import logging
from dataclasses import dataclass, field
from itertools import combinations
from math import comb
from typing import Dict, FrozenSet, Iterator, List, Sequence, Tuple

from app.core.errors import PatternFitError, UsageError

logger = logging.getLogger(__name__)

Position = Tuple[int, int]


def validate_shape(n: int, m: int) -> None:
    """0 <= m <= n/2, si no UsageError."""
    if n < 0 or m < 0 or 2 * m > n:
        raise UsageError(f"Forma invalida (n={n}, m={m}): se requiere 0 <= m <= n/2", {"n": n, "m": m})


@dataclass(frozen=True, order=True)
class TwoRowTableau:
    """
    Tableau de forma (n-m, m) determinado por su segunda fila b_1 < ... < b_m.
    El orden natural es lexicografico en la segunda fila.
    """

    n: int
    m: int
    row2: Tuple[int, ...]

    def __post_init__(self):
        if len(self.row2) != self.m or list(self.row2) != sorted(set(self.row2)):
            raise UsageError(f"Segunda fila invalida {self.row2} para m={self.m}")
        if self.row2 and (self.row2[0] < 1 or self.row2[-1] > self.n):
            raise UsageError(f"Segunda fila {self.row2} fuera de 1..{self.n}")

    @classmethod
    def from_row2(cls, n: int, row2: Sequence[int]) -> "TwoRowTableau":
        return cls(n, len(row2), tuple(row2))

    @classmethod
    def t_lambda(cls, n: int, m: int) -> "TwoRowTableau":
        """Tableau llenado por filas: segunda fila n-m+1..n."""
        return cls(n, m, tuple(range(n - m + 1, n + 1)))

    @property
    def row1(self) -> Tuple[int, ...]:
        second = set(self.row2)
        return tuple(x for x in range(1, self.n + 1) if x not in second)

    @property
    def free_size(self) -> int:
        """|J_t| = Σ (b_i - i)."""
        return sum(b - i for i, b in enumerate(self.row2, start=1))

    def is_standard(self) -> bool:
        return all(b > a for a, b in zip(self.row1, self.row2))

    def to_json(self) -> Dict[str, object]:
        return {"n": self.n, "m": self.m, "row2": list(self.row2)}

    def label(self) -> str:
        return " ".join(str(b) for b in self.row2)


@dataclass(frozen=True)
class ShiftedTableau:
    """Tableau sobre un alfabeto perforado (etiquetas sobrevivientes)."""

    alphabet: Tuple[int, ...]
    row2: Tuple[int, ...]

    @property
    def row1(self) -> Tuple[int, ...]:
        second = set(self.row2)
        return tuple(x for x in self.alphabet if x not in second)

    def p_similar(self) -> TwoRowTableau:
        """Renumeracion que preserva el orden del alfabeto a 1..|alfabeto|."""
        rank = {x: i for i, x in enumerate(self.alphabet, start=1)}
        return TwoRowTableau(len(self.alphabet), len(self.row2), tuple(rank[b] for b in self.row2))

    def is_standard(self) -> bool:
        return all(b > a for a, b in zip(self.row1, self.row2))

    def to_json(self) -> Dict[str, object]:
        return {
            "n": len(self.alphabet),
            "m": len(self.row2),
            "row2": list(self.row2),
            "alphabet": list(self.alphabet),
        }


@dataclass(frozen=True)
class Pattern:
    """
    Posiciones (b_i, a_i) con a lo sumo una por fila y por columna, a_i < b_i.
    Se guardan ordenadas por fila.
    """

    positions: Tuple[Position, ...] = ()

    def __post_init__(self):
        ordered = tuple(sorted(self.positions))
        object.__setattr__(self, "positions", ordered)
        rows = [b for b, _ in ordered]
        cols = [a for _, a in ordered]
        if len(set(rows)) != len(rows) or len(set(cols)) != len(cols):
            raise UsageError(f"Patron invalido {ordered}: fila o columna repetida")
        if any(a >= b or a < 1 for b, a in ordered):
            raise UsageError(f"Patron invalido {ordered}: se requiere 1 <= a < b")

    @property
    def size(self) -> int:
        return len(self.positions)

    @property
    def rows(self) -> FrozenSet[int]:
        return frozenset(b for b, _ in self.positions)

    @property
    def cols(self) -> FrozenSet[int]:
        return frozenset(a for _, a in self.positions)

    def fits(self, t: TwoRowTableau) -> bool:
        second = set(t.row2)
        return self.rows <= second and not (self.cols & second)

    def label(self) -> str:
        return ";".join(f"({b},{a})" for b, a in self.positions)


@dataclass(frozen=True)
class FilledPattern:
    """Patron con un valor no nulo de GF(q) en cada posicion."""

    pattern: Pattern
    values: Tuple[int, ...] = field(default=())

    def __post_init__(self):
        if len(self.values) != self.pattern.size or any(v == 0 for v in self.values):
            raise UsageError(f"Relleno invalido {self.values} para {self.pattern.label()}")

    @property
    def entries(self) -> Dict[Position, int]:
        return dict(zip(self.pattern.positions, self.values))

    def filling_label(self) -> str:
        return ";".join(str(v) for v in self.values)


def enumerate_row_standard(n: int, m: int) -> List[TwoRowTableau]:
    """
    Todos los tableaux fila-estandar de forma (n-m, m), en orden lexicografico
    de la segunda fila.

    Raises:
        UsageError: si m > n - m
    """
    validate_shape(n, m)
    return [TwoRowTableau(n, m, row2) for row2 in combinations(range(1, n + 1), m)]


def is_standard(t: TwoRowTableau) -> bool:
    """Las columnas crecen hacia abajo: b_i > a_i para todo i."""
    return t.is_standard()


def dominance_leq(t1: TwoRowTableau, t2: TwoRowTableau) -> bool:
    """t1 ⊴ t2 si b_i <= b'_i para todo i."""
    if (t1.n, t1.m) != (t2.n, t2.m):
        raise UsageError("Comparacion de dominancia entre formas distintas")
    return all(b <= c for b, c in zip(t1.row2, t2.row2))


def remove_and_shift(t: TwoRowTableau, p: Pattern) -> ShiftedTableau:
    """
    Borra p_I de la segunda fila y p_J de la primera, sin renumerar.

    Raises:
        PatternFitError: si p no encaja en t
    """
    if not p.fits(t):
        raise PatternFitError(
            f"El patron {p.label()} no encaja en el tableau {t.label()}",
            {"tableau": t.to_json(), "pattern": p.label()},
        )
    removed = p.rows | p.cols
    alphabet = tuple(x for x in range(1, t.n + 1) if x not in removed)
    return ShiftedTableau(alphabet, tuple(b for b in t.row2 if b not in removed))


def enumerate_T_lambda_p(n: int, m: int, p: Pattern) -> List[ShiftedTableau]:
    """
    Tableaux desplazados fila-estandar pero no estandar de forma
    (n-m-s, m-s) sobre el alfabeto {1..n} sin p_I ∪ p_J.
    """
    validate_shape(n, m)
    if p.size > m:
        raise UsageError(f"|p|={p.size} excede m={m}")
    removed = p.rows | p.cols
    alphabet = tuple(x for x in range(1, n + 1) if x not in removed)
    result = []
    for row2 in combinations(alphabet, m - p.size):
        shifted = ShiftedTableau(alphabet, row2)
        if not shifted.is_standard():
            result.append(shifted)
    return result


def enumerate_patterns(n: int, max_size: int) -> Iterator[Pattern]:
    """
    Patrones con filas y columnas disjuntas en {1..n} (los unicos que pueden
    encajar en algun tableau), por tamano creciente.
    """
    positions = [(b, a) for b in range(1, n + 1) for a in range(1, b)]
    for size in range(max_size + 1):
        for chosen in combinations(positions, size):
            rows = [b for b, _ in chosen]
            cols = [a for _, a in chosen]
            if len(set(rows)) < size or len(set(cols)) < size or set(rows) & set(cols):
                continue
            yield Pattern(chosen)


def patterns_fitting(t: TwoRowTableau) -> List[Pattern]:
    """Todos los patrones que encajan en t (posiciones dentro de J_t)."""
    cells = [(b, a) for b in t.row2 for a in t.row1 if a < b]
    result = []
    for size in range(t.m + 1):
        for chosen in combinations(cells, size):
            rows = {b for b, _ in chosen}
            cols = {a for _, a in chosen}
            if len(rows) == size and len(cols) == size:
                result.append(Pattern(chosen))
    return result


def count_identity_check(n: int, m: int) -> bool:
    """|RStd(λ) sin Std(λ)| = |RStd(μ)| = C(n, m-1)."""
    tableaux = enumerate_row_standard(n, m)
    nonstandard = sum(1 for t in tableaux if not t.is_standard())
    return nonstandard == comb(n, m - 1) if m >= 1 else nonstandard == 0


def removal_order_check(n: int) -> bool:
    """
    Para pares de tableaux en los que encaja el mismo patron, t_R < t_L
    implica el mismo orden estricto entre los tableaux desplazados.
    """
    for m in range(n // 2 + 1):
        tableaux = enumerate_row_standard(n, m)
        for p in enumerate_patterns(n, m):
            fitting = [t for t in tableaux if p.fits(t)]
            shifted = {t: remove_and_shift(t, p).row2 for t in fitting}
            for t_r, t_l in combinations(fitting, 2):
                # combinations respeta el orden lexicografico de la lista
                if not shifted[t_r] < shifted[t_l]:
                    logger.error(f"✗ Orden no preservado: {t_r.label()} / {t_l.label()} con {p.label()}")
                    return False
    return True
