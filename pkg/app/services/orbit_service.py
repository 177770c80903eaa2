"""
Servicio de orbitas del subgrupo U^w ∩ U.
Accion monomial en forma cerrada sobre la base de idempotentes, BFS de orbitas,
matriz patron canonica, ganchos, estabilizadores y formula de dimension.
"""
import logging
import random
from collections import deque
from contextlib import contextmanager
from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple

import numpy as np

from app.core.errors import (
    InternalInconsistencyError,
    NotAPatternMatrixError,
    RootOutsideUpsilonError,
)
from app.services.character_service import (
    IDEMPOTENT_BASIS,
    ModuleVector,
    fast_character_transform,
    idempotent_vector,
    to_idempotent_basis,
)
from app.services.field_service import CycScalar, FiniteField, get_field, theta
from app.services.flag_service import NormalMatrix, batch_of, free_positions, position_index, root_action
from app.services.tableau_service import FilledPattern, Pattern, Position, TwoRowTableau

logger = logging.getLogger(__name__)

Root = Tuple[int, int]

# Signo del caracter en la accion de Υ₁ (solo se invierte para inyectar fallas)
_SCALAR_SIGN = 1


@contextmanager
def theta_sign_fault():
    """Invierte el signo de θ en la forma cerrada mientras dure el bloque."""
    global _SCALAR_SIGN
    _SCALAR_SIGN = -1
    try:
        yield
    finally:
        _SCALAR_SIGN = 1


@dataclass(frozen=True)
class RootTriple:
    """Υ₁, Υ₂, Υ₃ de un tableau; su union genera U^w ∩ U."""

    upsilon1: Tuple[Root, ...]
    upsilon2: Tuple[Root, ...]
    upsilon3: Tuple[Root, ...]

    @property
    def all(self) -> Tuple[Root, ...]:
        return self.upsilon1 + self.upsilon2 + self.upsilon3

    @property
    def movers(self) -> Tuple[Root, ...]:
        return self.upsilon2 + self.upsilon3


@dataclass(frozen=True)
class Hook:
    corner: Position
    leg: Tuple[Position, ...]
    arm: Tuple[Position, ...]

    @property
    def residue(self) -> int:
        return len(self.leg) + len(self.arm) + 1


@dataclass(frozen=True)
class OrbitModule:
    """Orbita de un idempotente: conjunto de miembros y su matriz patron unica."""

    tableau: TwoRowTableau
    q: int
    members: FrozenSet[NormalMatrix]
    pattern_matrix: NormalMatrix
    filled_pattern: FilledPattern
    exponent: int

    @property
    def size(self) -> int:
        return len(self.members)


@lru_cache(maxsize=None)
def upsilon(t: TwoRowTableau) -> RootTriple:
    """Conjuntos de raices Υ₁, Υ₂, Υ₃ de t."""
    second = set(t.row2)
    roots = [(i, j) for i in range(1, t.n + 1) for j in range(1, i)]
    return RootTriple(
        tuple(r for r in roots if r[0] in second and r[1] not in second),
        tuple(r for r in roots if r[0] not in second and r[1] not in second),
        tuple(r for r in roots if r[0] in second and r[1] in second),
    )


@lru_cache(maxsize=None)
def _root_kind(t: TwoRowTableau, root: Root) -> int:
    i, j = root
    if i <= j:
        raise RootOutsideUpsilonError(f"({i},{j}) no es raiz positiva")
    second = set(t.row2)
    if i in second and j not in second:
        return 1
    if i not in second and j not in second:
        return 2
    if i in second and j in second:
        return 3
    raise RootOutsideUpsilonError(
        f"La raiz ({i},{j}) no esta en Υ para el lote {t.label()}",
        {"tableau": t.to_json(), "root": [i, j]},
    )


@lru_cache(maxsize=None)
def _truncated_pairs(t: TwoRowTableau, root: Root) -> Tuple[Tuple[int, int], ...]:
    """
    Pares (destino, fuente) de indices en J_t para las operaciones truncadas.
    Υ₂ (columna): k_{b,i} = l_{b,i} - α l_{b,j}, filas b > i.
    Υ₃ (fila):    k_{j,v} = l_{j,v} + α l_{i,v}, columnas v < j libres.
    """
    i, j = root
    index = position_index(t)
    if _root_kind(t, root) == 2:
        return tuple((index[(b, i)], index[(b, j)]) for b in t.row2 if b > i)
    return tuple((index[(j, v)], index[(i, v)]) for v in t.row1 if v < j)


def monomial_action(label: NormalMatrix, root: Root, alpha: int) -> Tuple[NormalMatrix, CycScalar]:
    """
    e_L ∘ x_ij(α) = c·e_K en forma cerrada.

    Returns:
        (K, c)

    Raises:
        RootOutsideUpsilonError: si (i,j) no esta en Υ₁ ∪ Υ₂ ∪ Υ₃
    """
    t = label.tableau
    field = get_field(label.q)
    kind = _root_kind(t, root)
    if alpha == 0:
        return label, CycScalar.one(field.p)
    if kind == 1:
        value = label.entry(*root)
        scalar = theta(field.mul(value, alpha), field)
        if _SCALAR_SIGN < 0:
            scalar = theta(field.neg(field.mul(value, alpha)), field)
        return label, scalar
    values = list(label.values)
    for target, source in _truncated_pairs(t, root):
        if values[source]:
            shift = field.mul(alpha, values[source])
            values[target] = field.sub(values[target], shift) if kind == 2 else field.add(values[target], shift)
    return NormalMatrix(t, tuple(values), label.q), CycScalar.one(field.p)


def brute_force_action(label: NormalMatrix, root: Root, alpha: int) -> ModuleVector:
    """Oraculo: e_L en base [M], cada [M] ↦ [M ∘ x_ij(α)], de vuelta a idempotentes."""
    expansion = idempotent_vector(label)
    moved = ModuleVector.from_terms(
        expansion.basis, label.q, ((root_action(M, root[0], root[1], alpha), c) for M, c in expansion.terms.items())
    )
    return to_idempotent_basis(moved)


def oracle_check(t: TwoRowTableau, q: int) -> Tuple[bool, Optional[Dict[str, object]]]:
    """
    Compara la forma cerrada con el oraculo en la base [M] para cada generador
    de Υ, cada α y cada etiqueta del lote.

    Returns:
        (ok, caso fallido serializado o None)
    """
    field = get_field(q)
    tables = _field_tables(field)
    size = batch_of(t, q).size
    for root in upsilon(t).all:
        for alpha in range(1, q):
            perm = _action_permutation(t, q, root, alpha)
            for L in batch_of(t, q).members():
                K, c = monomial_action(L, root, alpha)
                image = _dense_idempotent_image(L, perm, tables)
                observed = {
                    key: CycScalar.from_vector(field.p, [int(x) for x in row], size)
                    for key, row in enumerate(image)
                    if np.any(row != row[0])
                }
                if observed != {K.key(): c}:
                    case = {"tableau": t.to_json(), "q": q, "root": list(root), "alpha": alpha, "label": L.to_json()}
                    logger.error(f"✗ Accion monomial no coincide con el oraculo: {case}")
                    return False, case
    return True, None


# -- patrones y orbitas ---------------------------------------------------------------

def is_pattern_matrix(L: NormalMatrix) -> bool:
    """Entradas libres no nulas con a lo sumo una por fila y por columna."""
    positions = list(L.entries)
    rows = [b for b, _ in positions]
    cols = [a for _, a in positions]
    return len(set(rows)) == len(rows) and len(set(cols)) == len(cols)


def filled_pattern_of(L: NormalMatrix) -> FilledPattern:
    if not is_pattern_matrix(L):
        raise NotAPatternMatrixError(f"{L.to_json()} no es una matriz patron")
    entries = sorted(L.entries.items())
    return FilledPattern(Pattern(tuple(pos for pos, _ in entries)), tuple(v for _, v in entries))


def pattern_matrix_of(t: TwoRowTableau, filled: FilledPattern, q: int) -> NormalMatrix:
    return NormalMatrix.from_entries(t.n, t.row2, filled.entries, q)


def canonical_pattern_matrix(K: NormalMatrix) -> NormalMatrix:
    """
    Matriz patron de la orbita de e_K por barrido: columna libre mas a la
    izquierda, entrada no nula mas baja, limpieza de su pierna (operaciones de
    fila) y de su brazo (operaciones de columna), y repetir.
    """
    t = K.tableau
    field = get_field(K.q)
    current = K
    for j in t.row1:
        column = [(b, current.entry(b, j)) for b in t.row2 if b > j]
        nonzero = [(b, v) for b, v in column if v]
        if not nonzero:
            continue
        b, c = nonzero[-1]
        inv_c = field.inv(c)
        for u, value in nonzero[:-1]:
            # fila u de la pierna: raiz (b,u) de Υ₃ con α = -l_uj / c
            current, _ = monomial_action(current, (b, u), field.neg(field.mul(value, inv_c)))
        for v in t.row1:
            if j < v < b:
                value = current.entry(b, v)
                if value:
                    # columna v del brazo: raiz (v,j) de Υ₂ con α = l_bv / c
                    current, _ = monomial_action(current, (v, j), field.mul(value, inv_c))
    if not is_pattern_matrix(current):
        raise InternalInconsistencyError(f"El barrido no produjo una matriz patron: {current.to_json()}")
    return current


def orbit_dimension_exponent(p: Pattern) -> int:
    """
    k - s con k = Σ_i ((b_i - v_i) - |Z_i|),
    Z_i = {j : b_j > b_i > v_j > v_i}.
    """
    positions = p.positions
    k = 0
    for b_i, v_i in positions:
        z = sum(1 for b_j, v_j in positions if b_j > b_i > v_j > v_i)
        k += (b_i - v_i) - z
    return k - p.size


def orbit_of(L0: NormalMatrix) -> OrbitModule:
    """
    Cierre BFS de {L0} bajo los generadores de Υ₂ ∪ Υ₃ y todo α ≠ 0.
    Υ₁ actua por escalares y no mueve etiquetas.

    Raises:
        InternalInconsistencyError: si la orbita no tiene exactamente una matriz patron
    """
    t = L0.tableau
    movers = upsilon(t).movers
    seen = {L0}
    frontier = deque([L0])
    while frontier:
        current = frontier.popleft()
        for root in movers:
            for alpha in range(1, L0.q):
                image, _ = monomial_action(current, root, alpha)
                if image not in seen:
                    seen.add(image)
                    frontier.append(image)
    patterns = [M for M in seen if is_pattern_matrix(M)]
    if len(patterns) != 1:
        raise InternalInconsistencyError(
            f"La orbita de {L0.to_json()} tiene {len(patterns)} matrices patron",
            {"label": L0.to_json(), "q": L0.q},
        )
    filled = filled_pattern_of(patterns[0])
    return OrbitModule(t, L0.q, frozenset(seen), patterns[0], filled, orbit_dimension_exponent(filled.pattern))


def batch_orbit_census(t: TwoRowTableau, q: int) -> List[OrbitModule]:
    """Una orbita por registro, en orden de la clave de su primer miembro."""
    visited = set()
    orbits = []
    for L in batch_of(t, q).members():
        if L in visited:
            continue
        orbit = orbit_of(L)
        visited |= orbit.members
        orbits.append(orbit)
    return orbits


def hooks_of(p: Pattern, t: TwoRowTableau) -> List[Hook]:
    """Gancho de cada posicion del patron dentro de J_t."""
    positions = set(free_positions(t))
    hooks = []
    for b, j in p.positions:
        leg = tuple((u, j) for u in t.row2 if u < b and (u, j) in positions)
        arm = tuple((b, v) for v in t.row1 if v > j and (b, v) in positions)
        hooks.append(Hook((b, j), leg, arm))
    return hooks


def outer_rim(p: Pattern, t: TwoRowTableau) -> Tuple[Position, ...]:
    """
    Posiciones (b,j) de J_t tales que toda otra posicion (c,k) del patron con
    k <= j cumple c < b. Todas las matrices de la orbita coinciden ahi con la
    matriz patron.
    """
    rim = []
    for b, j in free_positions(t):
        if all(c < b for c, k in p.positions if k <= j and (c, k) != (b, j)):
            rim.append((b, j))
    return tuple(rim)


def stabilizer_generators(L: NormalMatrix) -> Dict[str, object]:
    """
    Estabilizador de una matriz patron dentro de U^w ∩ U.

    Returns:
        dict con 'upsilon1' (estabilizador proyectivo), 'stab_column', 'stab_row',
        'moving_column', 'moving_row', 'pairs' y 'exponent'

    Raises:
        NotAPatternMatrixError: si L no es matriz patron
    """
    pattern = filled_pattern_of(L).pattern
    roots = upsilon(L.tableau)
    positions = pattern.positions
    moving_column = tuple((i, j) for i, j in roots.upsilon2 if any(b > i for b, c in positions if c == j))
    moving_row = tuple((s, t) for s, t in roots.upsilon3 if any(v < t for b, v in positions if b == s))
    pairs = []
    for t_row, j in positions:
        for s, i in positions:
            if j < i < t_row < s:
                relation = f"α·l[{t_row},{j}] = β·l[{s},{i}]"
                pairs.append({"column_root": (i, j), "row_root": (s, t_row), "relation": relation})
    return {
        "upsilon1": roots.upsilon1,
        "stab_column": tuple(r for r in roots.upsilon2 if r not in moving_column),
        "stab_row": tuple(r for r in roots.upsilon3 if r not in moving_row),
        "moving_column": moving_column,
        "moving_row": moving_row,
        "pairs": pairs,
        "exponent": len(moving_column) + len(moving_row) - len(pairs),
    }


# -- invariancia bajo U y generacion ciclica ------------------------------------------------

@lru_cache(maxsize=None)
def _value_grid(t: TwoRowTableau, q: int) -> np.ndarray:
    """Valores libres de todo el lote, filas en orden de clave."""
    size = t.free_size
    if size == 0:
        return np.zeros((1, 0), dtype=np.int64)
    grids = np.indices((q,) * size).reshape(size, -1).T
    return grids.astype(np.int64)


def _field_tables(field: FiniteField) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    q = field.q
    add = np.array([[field.add(a, b) for b in range(q)] for a in range(q)], dtype=np.int64)
    mul = np.array([[field.mul(a, b) for b in range(q)] for a in range(q)], dtype=np.int64)
    trace = np.array([field.trace(a) for a in range(q)], dtype=np.int64)
    return add, mul, trace


def _action_permutation(t: TwoRowTableau, q: int, root: Root, alpha: int) -> np.ndarray:
    """perm[key(M)] = key(M ∘ x_ij(α)) sobre todo el lote."""
    perm = np.empty(batch_of(t, q).size, dtype=np.int64)
    for M in batch_of(t, q).members():
        perm[M.key()] = root_action(M, root[0], root[1], alpha).key()
    return perm


def _dense_idempotent_image(K: NormalMatrix, perm: np.ndarray, tables) -> np.ndarray:
    """
    Coeficientes (sin el factor q^{-|J_t|}) de e_K ∘ g en la base de idempotentes,
    como arreglo (|X_t|, p) de enteros sobre ζ^0..ζ^{p-1}.
    """
    field = get_field(K.q)
    add, mul, trace = tables
    grid = _value_grid(K.tableau, K.q)
    pairing = np.zeros(grid.shape[0], dtype=np.int64)
    for pos, k in enumerate(K.values):
        if k:
            pairing = add[pairing, mul[k, grid[:, pos]]]
    exponents = (-trace[pairing]) % field.p
    dense = np.zeros((grid.shape[0], field.p), dtype=np.int64)
    moved = np.zeros_like(dense)
    dense[np.arange(grid.shape[0]), exponents] = 1
    moved[perm] = dense
    shape = (K.q,) * K.tableau.free_size + (field.p,)
    image = fast_character_transform(moved.reshape(shape), field, 1)
    return image.reshape(grid.shape[0], field.p)


def check_U_invariance(orbit: OrbitModule) -> bool:
    """
    Para todo generador x_ij(α) de U (incluidas las raices mixtas fuera de Υ)
    y todo miembro e_K, la imagen esta soportada en la orbita.
    """
    t, q = orbit.tableau, orbit.q
    second = set(t.row2)
    member_keys = {K.key() for K in orbit.members}
    outside = np.ones(batch_of(t, q).size, dtype=bool)
    outside[list(member_keys)] = False
    tables = _field_tables(get_field(q))
    for i in range(1, t.n + 1):
        for j in range(1, i):
            mixed = i not in second and j in second
            for alpha in range(1, q):
                if not mixed:
                    for K in orbit.members:
                        image, _ = monomial_action(K, (i, j), alpha)
                        if image not in orbit.members:
                            logger.error(f"✗ e_K ∘ x_{i}{j}({alpha}) sale de la orbita: {K.to_json()}")
                            return False
                    continue
                perm = _action_permutation(t, q, (i, j), alpha)
                for K in orbit.members:
                    image = _dense_idempotent_image(K, perm, tables)
                    # un vector es cero en Q(ζ_p) si sus p coeficientes son iguales
                    nonzero = np.any(image != image[:, :1], axis=1)
                    if np.any(nonzero & outside):
                        logger.error(f"✗ Raiz mixta ({i},{j}) con α={alpha} rompe la orbita de {orbit.pattern_matrix.to_json()}")
                        return False
    return True


def omega_positions(orbit: OrbitModule) -> Tuple[Position, ...]:
    """Union de piernas y brazos de los ganchos del patron."""
    omega = []
    for hook in hooks_of(orbit.filled_pattern.pattern, orbit.tableau):
        omega.extend(hook.leg)
        omega.extend(hook.arm)
    return tuple(sorted(set(omega)))


def apply_averaging_element(x: ModuleVector, omega: Sequence[Position]) -> ModuleVector:
    """x ∘ a con a = Π_{(b,v) ∈ Ω} Σ_α x_bv(α), aplicando cada factor por forma cerrada."""
    current = x
    for position in omega:
        terms = []
        for label, coeff in current.terms.items():
            for alpha in range(current.q):
                image, scalar = monomial_action(label, position, alpha)
                terms.append((image, coeff * scalar))
        current = ModuleVector.from_terms(IDEMPOTENT_BASIS, current.q, terms)
    return current


def check_cyclic_generation(orbit: OrbitModule, seed: int = 0, trials: int = 4) -> bool:
    """
    El elemento promediador a envia e_L a q^{|Ω|} e_L, anula los demas e_K
    de la orbita, y envia vectores aleatorios con coeficiente 1 en e_L a q^{|Ω|} e_L.
    """
    omega = omega_positions(orbit)
    q = orbit.q
    p = get_field(q).p
    L = orbit.pattern_matrix
    expected = ModuleVector(IDEMPOTENT_BASIS, q, {L: CycScalar.rational(p, q ** len(omega))})
    for K in orbit.members:
        image = apply_averaging_element(ModuleVector.basis_vector(K, IDEMPOTENT_BASIS), omega)
        if K == L and image != expected:
            logger.error(f"✗ e_L ∘ a != q^|Ω| e_L para {L.to_json()}")
            return False
        if K != L and not image.is_zero():
            logger.error(f"✗ e_K ∘ a != 0 para K={K.to_json()}")
            return False
    rng = random.Random(seed)
    ordered = sorted(orbit.members, key=lambda M: M.key())
    for _ in range(trials):
        terms = [(K, CycScalar.rational(p, rng.randint(-3, 3))) for K in ordered if K != L]
        terms.append((L, CycScalar.one(p)))
        x = ModuleVector.from_terms(IDEMPOTENT_BASIS, q, terms)
        if apply_averaging_element(x, omega) != expected:
            logger.error(f"✗ Vector aleatorio no genera e_L en la orbita de {L.to_json()}")
            return False
    return True


def outer_rim_check(orbit: OrbitModule) -> bool:
    rim = outer_rim(orbit.filled_pattern.pattern, orbit.tableau)
    L = orbit.pattern_matrix
    return all(K.entry(*pos) == L.entry(*pos) for K in orbit.members for pos in rim)
