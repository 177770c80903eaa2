"""
Aplicacion principal - Motor de Modulos de Specht Unipotentes.
Punto de entrada de linea de comandos.

Uso:
    python main.py enumerate --n 4 --m 2 --q 2
    python main.py basis --n 4 --m 2 --q 3 --workers 4
    python main.py verify --q 2 --q 3 --inject-fault theta-sign
"""
import argparse
import logging
import logging.handlers
import sys
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Dict, List, Literal, Optional, Sequence

import pandas as pd
from pydantic import BaseModel, Field, ValidationError, field_validator, model_validator

from app.core.config import settings
from app.core.errors import InvariantFailure, SpechtEngineError, UsageError
from app.core.file_lock import acquire_process_lock
from app.services import ReportService, VerificationService
from app.services.field_service import SUPPORTED_ORDERS, gaussian_binomial
from app.services.flag_service import batch_of, enumerate_xi
from app.services.homomorphism_service import phi_matrix
from app.services.orbit_service import batch_orbit_census
from app.services.rank_census_service import census_counts, census_polynomial, rank_polynomial_interpolated, rank_table
from app.services.specht_service import integrality_diagnostic, standard_basis
from app.services.tableau_service import enumerate_row_standard

logger = logging.getLogger(__name__)

COMMANDS = ("enumerate", "orbits", "census", "rankpoly", "basis", "verify")


def _configure_logging() -> None:
    """Configuracion de logging: consola y archivo rotativo."""
    logging.basicConfig(
        level=logging.INFO if not settings.DEBUG else logging.DEBUG,
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        handlers=[
            logging.StreamHandler(sys.stdout),
            logging.handlers.RotatingFileHandler(
                settings.LOG_FILE,
                maxBytes=10_000_000,   # 10 MB por archivo
                backupCount=3,         # Maximo 3 archivos rotados (30 MB total)
                encoding="utf-8",
            ),
        ],
    )


class JobConfig(BaseModel):
    """Parametros validados de una corrida."""

    command: Literal["enumerate", "orbits", "census", "rankpoly", "basis", "verify"]
    n: Optional[int] = None
    m: Optional[int] = None
    q: List[int] = Field(default_factory=list)
    budget: int = Field(default=settings.DEFAULT_BUDGET, gt=0)
    seed: int = settings.DEFAULT_SEED
    workers: int = Field(default=settings.DEFAULT_WORKERS, ge=1)
    format: Literal["csv", "json"] = "csv"
    out: str = settings.OUTPUT_DIR
    inject_fault: Optional[Literal["theta-sign"]] = None
    heldout_q: int = settings.CENSUS_HELDOUT_Q

    @field_validator("q")
    @classmethod
    def _check_field_orders(cls, values: List[int]) -> List[int]:
        for q in values:
            if q not in SUPPORTED_ORDERS or q > settings.MAX_FIELD_ORDER:
                raise ValueError(f"q={q} no es una potencia de primo soportada <= {settings.MAX_FIELD_ORDER}")
        if len(set(values)) != len(values):
            raise ValueError("Valores de q repetidos")
        return values

    @model_validator(mode="after")
    def _check_shape(self) -> "JobConfig":
        if self.command != "verify" and (self.n is None or self.m is None):
            raise ValueError(f"'{self.command}' requiere --n y --m")
        if (self.n is None) != (self.m is None):
            raise ValueError("--n y --m se indican juntos")
        if self.n is not None and not (0 <= self.m and 2 * self.m <= self.n):
            raise ValueError(f"Forma invalida: se requiere 0 <= m <= n/2 (n={self.n}, m={self.m})")
        return self

    @property
    def q_values(self) -> List[int]:
        if self.q:
            return list(self.q)
        if self.command == "verify":
            return settings.verify_q_values
        if self.command in ("census", "rankpoly"):
            return settings.census_q_values
        return [2]

    @property
    def field_orders(self) -> List[int]:
        """Campos que aparecen en los archivos de la corrida (incluye el q reservado)."""
        orders = list(self.q_values)
        if self.command in ("census", "rankpoly") and self.heldout_q not in orders:
            orders.append(self.heldout_q)
        return orders

    def descriptor(self) -> Dict[str, object]:
        return {
            "command": self.command,
            "n": self.n,
            "m": self.m,
            "q": self.q_values,
            "budget": self.budget,
            "seed": self.seed,
            "workers": self.workers,
            "format": self.format,
            "inject_fault": self.inject_fault,
            "heldout_q": self.heldout_q,
        }


def _map(fn: Callable, items: Sequence, workers: int) -> List:
    """map en orden fijo, en paralelo si workers > 1."""
    if workers > 1 and len(items) > 1:
        with ProcessPoolExecutor(max_workers=workers) as executor:
            return list(executor.map(fn, items))
    return [fn(item) for item in items]


# -- comandos ---------------------------------------------------------------------------

def cmd_enumerate(cfg: JobConfig, reports: ReportService) -> int:
    n, m = cfg.n, cfg.m
    rows, files = [], {}
    for q in cfg.q_values:
        matrices = enumerate_xi(m, n, q, cfg.budget)
        files[q] = [{"kind": "matrix", "tableau": list(M.tableau.row2), "key": M.key(), **M.to_json()} for M in matrices]
        for t in enumerate_row_standard(n, m):
            rows.append({
                "n": n, "m": m, "q": q,
                "tableau_row2": " ".join(map(str, t.row2)),
                "free_size": t.free_size,
                "batch_size": batch_of(t, q).size,
                "standard": t.is_standard(),
            })
        logger.info(f"✓ Ξ_{{{m},{n}}} con q={q}: {len(matrices)} matrices = [n m]_q = {gaussian_binomial(n, m, q)}")

    for q, records in files.items():
        reports.write_jsonl(records, f"xi_n{n}_m{m}_q{q}")
    reports.write_table(pd.DataFrame(rows), f"batches_n{n}_m{m}", cfg.format)
    consistency = [
        {"q": q, "count": len(records), "gaussian_binomial": gaussian_binomial(n, m, q),
         "consistent": len(records) == gaussian_binomial(n, m, q)}
        for q, records in files.items()
    ]
    reports.write_table(pd.DataFrame(consistency), f"gaussian_n{n}_m{m}", cfg.format)
    return 0


def _orbit_rows(job) -> List[Dict[str, object]]:
    n, m, q = job
    rows = []
    for t in enumerate_row_standard(n, m):
        for orbit in batch_orbit_census(t, q):
            pattern = orbit.filled_pattern.pattern
            rows.append({
                "n": n, "m": m, "q": q,
                "batch_row2": " ".join(map(str, t.row2)),
                "pattern": pattern.label(),
                "filling": orbit.filled_pattern.filling_label(),
                "dim_exponent": orbit.exponent,
                "orbit_size": orbit.size,
            })
    return rows


def cmd_orbits(cfg: JobConfig, reports: ReportService) -> int:
    jobs = [(cfg.n, cfg.m, q) for q in cfg.q_values]
    rows = [row for chunk in _map(_orbit_rows, jobs, cfg.workers) for row in chunk]
    reports.write_table(pd.DataFrame(rows), f"orbits_n{cfg.n}_m{cfg.m}", cfg.format)
    return 0


def _census_job(job) -> Dict[int, int]:
    return census_counts(*job)


def cmd_census(cfg: JobConfig, reports: ReportService) -> int:
    n, m = cfg.n, cfg.m
    if len(cfg.q_values) < m + 1:
        raise UsageError(f"El censo de ({n - m},{m}) requiere al menos {m + 1} valores de q")
    all_q = cfg.q_values + [cfg.heldout_q]
    counts = dict(zip(all_q, _map(_census_job, [(n, m, q) for q in all_q], cfg.workers)))
    exponents = range(0, m * (n - m) + 1)
    polynomials = [census_polynomial(n, m, c, cfg.q_values, cfg.heldout_q) for c in exponents]
    rows = [{"n": n, "m": m, "q": q, "c": c, "count": counts[q].get(c, 0)} for q in all_q for c in exponents]
    reports.write_table(pd.DataFrame(rows), f"census_counts_n{n}_m{m}", cfg.format)
    reports.write_json({"polynomials": [p.to_json() for p in polynomials]}, f"census_n{n}_m{m}")
    failed = [p.c for p in polynomials if not p.validated]
    if failed:
        logger.error(f"✗ Polinomios de censo no validados en q={cfg.heldout_q}: c={failed}")
        return 4
    return 0


def _rank_job(job):
    n, m, q = job
    return [(t, count) for t, count in rank_table(n, m, q)]


def cmd_rankpoly(cfg: JobConfig, reports: ReportService) -> int:
    n, m = cfg.n, cfg.m
    tables = _map(_rank_job, [(n, m, q) for q in cfg.q_values], cfg.workers)
    rows = [
        {"n": n, "m": m, "q": q, "tableau_row2": " ".join(map(str, t.row2)), "rank_count": count}
        for q, table in zip(cfg.q_values, tables)
        for t, count in table
    ]
    polynomials = [
        rank_polynomial_interpolated(t, cfg.q_values, cfg.heldout_q)
        for t in enumerate_row_standard(n, m)
        if t.is_standard()
    ]
    reports.write_table(pd.DataFrame(rows), f"rank_n{n}_m{m}", cfg.format)
    reports.write_json({"rank_polynomials": [p.to_json() for p in polynomials]}, f"rankpoly_n{n}_m{m}")
    if not all(p.validated and p.value_at_one == 1 for p in polynomials):
        logger.error("✗ Algun polinomio de rango no valida o r_t(1) != 1")
        return 4
    return 0


def cmd_basis(cfg: JobConfig, reports: ReportService) -> int:
    n, m = cfg.n, cfg.m
    outputs = []
    for q in cfg.q_values:
        basis = standard_basis(n, m, q, cfg.budget, workers=cfg.workers)
        dimension = gaussian_binomial(n, m, q) - gaussian_binomial(n, m - 1, q)
        if len(basis) != dimension:
            raise InvariantFailure(f"Base con {len(basis)} vectores, dimension esperada {dimension}")
        records = []
        for v in basis:
            record = v.to_json()
            record["integral"] = integrality_diagnostic(v)
            records.append(record)
        triplets = phi_matrix(n, m, q, cfg.budget).to_triplet_text() if m else None
        outputs.append((q, records, triplets))
        logger.info(f"✓ q={q}: {len(basis)} vectores = dim S^({n - m},{m})")
    for q, records, triplets in outputs:
        reports.write_jsonl(records, f"basis_n{n}_m{m}_q{q}")
        if triplets is not None:
            reports.write_triplets(triplets, f"phi_n{n}_m{m}_q{q}")
    return 0


def cmd_verify(cfg: JobConfig, reports: ReportService) -> int:
    service = VerificationService(
        q_values=cfg.q_values,
        shape=(cfg.n, cfg.m) if cfg.n is not None else None,
        seed=cfg.seed,
        budget=cfg.budget,
        fault=cfg.inject_fault,
    )
    results = service.execute_verification()
    reports.write_json(results, "verification")
    return 0 if results["success"] else 4


HANDLERS: Dict[str, Callable[[JobConfig, ReportService], int]] = {
    "enumerate": cmd_enumerate,
    "orbits": cmd_orbits,
    "census": cmd_census,
    "rankpoly": cmd_rankpoly,
    "basis": cmd_basis,
    "verify": cmd_verify,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="main.py", description=settings.APP_NAME)
    subparsers = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub = subparsers.add_parser(name)
        sub.add_argument("--n", type=int, default=None)
        sub.add_argument("--m", type=int, default=None)
        sub.add_argument("--q", type=int, action="append", default=None, help="Orden del campo (repetible)")
        sub.add_argument("--budget", type=int, default=settings.DEFAULT_BUDGET)
        sub.add_argument("--seed", type=int, default=settings.DEFAULT_SEED)
        sub.add_argument("--workers", type=int, default=settings.DEFAULT_WORKERS)
        sub.add_argument("--format", choices=("csv", "json"), default="csv")
        sub.add_argument("--out", default=settings.OUTPUT_DIR)
        if name in ("census", "rankpoly"):
            sub.add_argument("--heldout-q", type=int, default=settings.CENSUS_HELDOUT_Q)
        if name == "verify":
            sub.add_argument("--inject-fault", choices=("theta-sign",), default=None)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    Ejecuta un comando y devuelve el codigo de salida:
    0 exito, 1 lock ocupado o error inesperado, 2 uso, 3 presupuesto,
    4 invariante, 5 inconsistencia interna.
    """
    _configure_logging()
    args = build_parser().parse_args(argv)
    try:
        cfg = JobConfig(
            command=args.command,
            n=args.n,
            m=args.m,
            q=args.q or [],
            budget=args.budget,
            seed=args.seed,
            workers=args.workers,
            format=args.format,
            out=args.out,
            inject_fault=getattr(args, "inject_fault", None),
            heldout_q=getattr(args, "heldout_q", settings.CENSUS_HELDOUT_Q),
        )
    except ValidationError as e:
        logger.error(f"✗ Configuracion invalida: {e}")
        return UsageError.exit_code

    logger.info("=" * 100)
    logger.info("Iniciando %s v%s: %s", settings.APP_NAME, settings.APP_VERSION, cfg.command)
    logger.info("=" * 100)

    try:
        with acquire_process_lock(cfg.out):
            reports = ReportService(cfg.out, cfg.descriptor(), cfg.seed, field_orders=cfg.field_orders)
            code = HANDLERS[cfg.command](cfg, reports)
    except SpechtEngineError as e:
        logger.error(f"✗ {type(e).__name__}: {e} {e.context if e.context else ''}")
        return e.exit_code
    except Exception as e:
        logger.error(f"✗ Error inesperado: {e}", exc_info=True)
        return 1

    logger.info("=" * 100)
    logger.info("✓ Comando %s terminado con codigo %s", cfg.command, code)
    logger.info("=" * 100)
    return code


if __name__ == "__main__":
    sys.exit(main())
