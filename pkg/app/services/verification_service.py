"""
Servicio de verificacion.
Ejecuta la suite completa de invariantes a la escala configurada y deja,
para cada chequeo fallido, el caso serializado para reproducirlo.
"""
import logging
from contextlib import nullcontext
from dataclasses import dataclass, field
from datetime import datetime
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from app.core.config import settings
from app.core.errors import SpechtEngineError, UsageError
from app.services.character_service import character_orthogonality_check
from app.services.field_service import gaussian_binomial, get_field
from app.services.flag_service import enumerate_xi, row_space_dedup_count, transitivity_check
from app.services.homomorphism_service import (
    composition_law_check,
    kernel_basis,
    kernel_intersection_check,
    phi_rank,
)
from app.services.orbit_service import (
    batch_orbit_census,
    check_cyclic_generation,
    check_U_invariance,
    oracle_check,
    outer_rim_check,
    stabilizer_generators,
    theta_sign_fault,
)
from app.services.rank_census_service import (
    census_counts,
    eligibility_equivalence_check,
    good_filling_invariance_check,
    path_of,
    rank_polynomial,
    tableau_of_path,
)
from app.services.specht_service import (
    certificate_check,
    component_surjectivity_check,
    integrality_diagnostic,
    last_standard_random_check,
    pattern_preservation_check,
    removal_compatibility_check,
    standard_basis,
    standard_dependency,
)
from app.services.tableau_service import count_identity_check, enumerate_row_standard, removal_order_check

logger = logging.getLogger(__name__)

FAULTS = {"theta-sign": theta_sign_fault}

Outcome = Tuple[bool, Optional[Dict[str, object]]]


@dataclass
class CheckResult:
    name: str
    anchor: str
    scope: Dict[str, object]
    passed: bool
    skipped: bool = False
    replay: Optional[Dict[str, object]] = None

    def to_json(self) -> Dict[str, object]:
        payload = {
            "check": self.name,
            "anchor": self.anchor,
            "scope": self.scope,
            "status": "skipped" if self.skipped else ("pass" if self.passed else "fail"),
        }
        if self.replay is not None:
            payload["replay"] = self.replay
        return payload


@dataclass
class VerificationService:
    """
    Suite de invariantes sobre todas las formas (n-m, m) con n <= max_n
    (o una sola forma si se fija) y los q configurados.
    """

    q_values: Sequence[int]
    max_n: int = settings.VERIFY_MAX_N
    shape: Optional[Tuple[int, int]] = None
    seed: int = settings.DEFAULT_SEED
    trials: int = settings.RANDOM_TRIALS
    budget: int = settings.DEFAULT_BUDGET
    fault: Optional[str] = None
    results: List[CheckResult] = field(default_factory=list)

    def __post_init__(self):
        if self.fault is not None and self.fault not in FAULTS:
            raise UsageError(f"Falla desconocida: {self.fault}; validas: {sorted(FAULTS)}")
        for q in self.q_values:
            get_field(q)

    def shapes(self) -> List[Tuple[int, int]]:
        if self.shape is not None:
            return [self.shape]
        return [(n, m) for n in range(1, self.max_n + 1) for m in range(n // 2 + 1)]

    # -- ejecucion ------------------------------------------------------------------------

    def _record(self, name: str, anchor: str, scope: Dict[str, object], check: Callable[[], object]) -> None:
        try:
            outcome = check()
            passed, replay = outcome if isinstance(outcome, tuple) else (bool(outcome), None)
        except SpechtEngineError as e:
            logger.error(f"✗ {name} {scope}: {e}")
            passed, replay = False, {"error": str(e), **e.context}
        if not passed and replay is None:
            replay = dict(scope)
        result = CheckResult(name, anchor, scope, passed, replay=None if passed else {**scope, **replay})
        self.results.append(result)
        if not passed:
            logger.error(f"✗ Chequeo fallido: {name} {scope}")

    def _skip(self, name: str, anchor: str, scope: Dict[str, object]) -> None:
        self.results.append(CheckResult(name, anchor, scope, True, skipped=True))

    def execute_verification(self) -> Dict[str, object]:
        """
        Ejecuta la suite completa.

        Returns:
            dict con 'success', 'checks', 'failed', 'total' y 'skipped'
        """
        logger.info("=" * 100)
        logger.info("INICIANDO SUITE DE VERIFICACION")
        logger.info(f"Formas: {self.shapes()} | q: {list(self.q_values)} | semilla: {self.seed}")
        if self.fault:
            logger.warning(f"Inyeccion de falla activa: {self.fault}")
        logger.info("=" * 100)

        started = datetime.now()
        fault_context = FAULTS[self.fault]() if self.fault else nullcontext()
        with fault_context:
            for n in sorted({n for n, _ in self.shapes()}):
                self._verify_alphabet(n)
            for n, m in self.shapes():
                for q in self.q_values:
                    logger.info(f"PASO: forma ({n - m},{m}) con q={q}")
                    self._verify_shape(n, m, q)

        failed = [r.to_json() for r in self.results if not r.passed]
        results = {
            "success": not failed,
            "checks": [r.to_json() for r in self.results],
            "failed": failed,
            "total": len(self.results),
            "skipped": sum(1 for r in self.results if r.skipped),
        }
        elapsed = (datetime.now() - started).total_seconds()
        logger.info("=" * 100)
        if failed:
            logger.error(f"✗ {len(failed)} de {len(self.results)} chequeos fallaron")
        else:
            logger.info(f"✓ {len(self.results)} chequeos pasaron ({results['skipped']} omitidos) en {elapsed:.1f}s")
        logger.info("=" * 100)
        return results

    def _verify_alphabet(self, n: int) -> None:
        scope = {"n": n}
        self._record("removal_order", "orden lexicografico preservado por la remocion de patrones", scope,
                     lambda: removal_order_check(n))

    def _verify_shape(self, n: int, m: int, q: int) -> None:
        scope = {"n": n, "m": m, "q": q}
        self._record("tableau_count_identity", "|RStd(λ) \\ Std(λ)| = C(n, m-1)", scope,
                     lambda: count_identity_check(n, m))
        self._record("gaussian_count", "|Ξ_{m,n}| = [n m]_q", scope,
                     lambda: len(enumerate_xi(m, n, q, self.budget)) == gaussian_binomial(n, m, q))
        if q ** (m * n) <= settings.DEFAULT_BUDGET // 100:
            self._record("row_space_oracle", "espacios fila distintos = [n m]_q", scope,
                         lambda: row_space_dedup_count(m, n, q, self.budget) == gaussian_binomial(n, m, q))
        for t in enumerate_row_standard(n, m):
            self._verify_batch(t, q)
        self._verify_kernel(n, m, q)

    def _verify_batch(self, t, q: int) -> None:
        scope = {"n": t.n, "m": t.m, "q": q, "tableau": list(t.row2)}
        small = t.free_size <= settings.ORACLE_MAX_FREE
        self._record("path_roundtrip", "camino reticular <-> tableau", scope,
                     lambda: tableau_of_path(path_of(t)) == t and path_of(t).box_count == t.free_size)
        self._record("batch_transitivity", "U actua transitivamente en cada lote", scope,
                     lambda: transitivity_check(t, q))
        if small:
            self._record("character_orthogonality", "ortogonalidad de caracteres del grupo diamante", scope,
                         lambda: character_orthogonality_check(t, q))
            self._record("monomial_action_oracle", "accion monomial por operaciones truncadas de fila y columna", scope,
                         lambda: oracle_check(t, q))
        else:
            self._skip("character_orthogonality", "ortogonalidad de caracteres del grupo diamante", scope)
            self._skip("monomial_action_oracle", "accion monomial por operaciones truncadas de fila y columna", scope)

        orbits = batch_orbit_census(t, q)
        self._record("orbit_dimension", "|orbita| = q^(k-s) y exponente del estabilizador", scope,
                     lambda: all(
                         o.size == q ** o.exponent and stabilizer_generators(o.pattern_matrix)["exponent"] == o.exponent
                         for o in orbits
                     ))
        self._record("orbit_census", "suma de orbitas = |X_t| y (q-1)^s orbitas por patron", scope,
                     lambda: self._census_multiplicity(t, q, orbits))
        self._record("outer_rim", "borde exterior constante en la orbita", scope,
                     lambda: all(outer_rim_check(o) for o in orbits))
        self._record("cyclic_generation", "e_L genera su orbita por el elemento promediador", scope,
                     lambda: all(check_cyclic_generation(o, seed=self.seed) for o in orbits))
        self._record("u_invariance", "cada orbita es un U-modulo", scope,
                     lambda: all(check_U_invariance(o) for o in orbits))

        self._record("good_filling_eligibility", "rellenos buenos = terminos principales elegibles", scope,
                     lambda: eligibility_equivalence_check(t, q))
        self._record("good_filling_invariance", "operaciones truncadas preservan rellenos buenos", scope,
                     lambda: good_filling_invariance_check(t, q))
        self._record("rank_nonstandard_zero", "r_t = 0 para t no estandar", scope,
                     lambda: t.is_standard() or rank_polynomial(t, q, self.budget) == 0)

    @staticmethod
    def _census_multiplicity(t, q: int, orbits) -> bool:
        if sum(o.size for o in orbits) != q ** t.free_size:
            return False
        per_pattern: Dict[object, int] = {}
        for orbit in orbits:
            pattern = orbit.filled_pattern.pattern
            per_pattern[pattern] = per_pattern.get(pattern, 0) + 1
        return all(count == (q - 1) ** pattern.size for pattern, count in per_pattern.items())

    def _verify_kernel(self, n: int, m: int, q: int) -> None:
        scope = {"n": n, "m": m, "q": q}
        dimension = gaussian_binomial(n, m, q) - gaussian_binomial(n, m - 1, q)
        heavy_names = (
            "specht_dimension", "phi_surjective", "kernel_intersection", "composition_law",
            "pattern_preservation", "component_surjectivity", "standard_basis", "kernel_last_standard", "census_dimension",
        )
        if gaussian_binomial(n, m, q) > settings.VERIFY_HEAVY_LIMIT:
            for name in heavy_names:
                self._skip(name, "limite de escala", scope)
            return

        self._record("specht_dimension", "dim ker Φ_m = [n m]_q - [n m-1]_q", scope,
                     lambda: len(kernel_basis(n, m, q, self.budget)) == dimension)
        if m == 0:
            self._record("standard_basis", "base estandar con certificados", scope,
                         lambda: len(standard_basis(n, m, q, self.budget)) == 1)
            return
        self._record("phi_surjective", "Φ_m es un epimorfismo", scope,
                     lambda: phi_rank(n, m, q, self.budget) == gaussian_binomial(n, m - 1, q))
        self._record("kernel_intersection", "∩ ker φ_{1,i} = ker Φ_m", scope,
                     lambda: kernel_intersection_check(n, m, q, self.budget))
        self._record("composition_law", "φ_{1,i} ∘ Φ_m = [m-i]_q φ_{1,i}", scope,
                     lambda: composition_law_check(n, m, q, self.budget))
        self._record("pattern_preservation", "Φ_m preserva patrones llenos", scope,
                     lambda: pattern_preservation_check(n, m, q))
        self._record("component_surjectivity", "Φ_m sobre cada componente de patron lleno", scope,
                     lambda: component_surjectivity_check(n, m, q))
        self._record("kernel_last_standard", "last(v) estandar para v en el nucleo", scope,
                     lambda: last_standard_random_check(n, m, q, self.budget, seed=self.seed, trials=self.trials))
        self._record("standard_basis", "base estandar entera con terminos principales distintos", scope,
                     lambda: self._standard_basis_outcome(n, m, q, dimension))
        self._record("census_dimension", "Σ_c f_c(q) q^c = dim S^λ", scope,
                     lambda: sum(count * q ** c for c, count in census_counts(n, m, q).items()) == dimension)

    def _standard_basis_outcome(self, n: int, m: int, q: int, dimension: int) -> Outcome:
        basis = standard_basis(n, m, q, self.budget)
        leading = [v.leading for v in basis]
        if len(basis) != dimension or len(set(leading)) != len(leading):
            return False, {"basis_size": len(basis), "distinct_leading": len(set(leading)), "dimension": dimension}
        per_batch: Dict[object, int] = {}
        for v in basis:
            per_batch[v.last] = per_batch.get(v.last, 0) + 1
            if not certificate_check(v):
                return False, {"stage": "certificate", "leading": v.leading.to_json()}
            if not integrality_diagnostic(v):
                return False, {"stage": "integrality", "leading": v.leading.to_json()}
            if not removal_compatibility_check(standard_dependency(v), v.filled_pattern.pattern):
                return False, {"stage": "removal_compatibility", "leading": v.leading.to_json()}
        for t in enumerate_row_standard(n, m):
            if per_batch.get(t, 0) != rank_polynomial(t, q, self.budget):
                return False, {"stage": "rank_polynomial", "tableau": list(t.row2), "count": per_batch.get(t, 0)}
        return True, None
