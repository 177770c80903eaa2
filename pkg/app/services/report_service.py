"""
Servicio de generacion de reportes.
Crea archivos CSV, JSON, JSON-lines y tripletas dispersas con los resultados
del motor. Cada archivo lleva la configuracion y la version que lo produjo.
"""
import json
import logging
import os
from typing import Dict, Iterable, List, Optional, Sequence

import pandas as pd

from app.core.config import settings
from app.services.field_service import get_field

logger = logging.getLogger(__name__)

FORMATS = ("csv", "json")


class ReportService:
    """
    Servicio para escribir artefactos reproducibles: mismo config y misma
    semilla producen archivos identicos byte a byte.
    """

    def __init__(
        self,
        output_dir: Optional[str] = None,
        config: Optional[Dict[str, object]] = None,
        seed: Optional[int] = None,
        field_orders: Sequence[int] = (),
    ):
        """Inicializa el servicio y verifica el directorio de reportes"""
        self.reports_dir = output_dir or settings.OUTPUT_DIR
        self.config = dict(config or {})
        self.seed = settings.DEFAULT_SEED if seed is None else seed
        # Los elementos de GF(q) se escriben como enteros 0..q-1; el descriptor
        # (p, k, modulo) fija como decodificarlos
        self.fields = [get_field(q).descriptor() for q in field_orders]
        self._ensure_reports_directory()

    def _ensure_reports_directory(self):
        """Crea el directorio de reportes si no existe"""
        if not os.path.exists(self.reports_dir):
            os.makedirs(self.reports_dir)
            logger.info(f"✓ Directorio de reportes creado: {self.reports_dir}")

    def header(self, kind: str) -> Dict[str, object]:
        """Registro de procedencia que encabeza cada archivo."""
        return {
            "kind": "header",
            "artifact": kind,
            "tool": settings.APP_NAME,
            "version": settings.APP_VERSION,
            "seed": self.seed,
            "config": self.config,
            "fields": self.fields,
        }

    @staticmethod
    def _dumps(payload) -> str:
        return json.dumps(payload, ensure_ascii=False, sort_keys=True, separators=(",", ":"))

    def _atomic_write(self, filename: str, text: str) -> str:
        """Escribe en un temporal y renombra: nunca quedan archivos parciales."""
        path = os.path.join(self.reports_dir, filename)
        tmp_path = f"{path}.tmp"
        try:
            with open(tmp_path, "w", encoding="utf-8", newline="\n") as f:
                f.write(text)
            os.replace(tmp_path, path)
        except Exception as e:
            logger.error(f"✗ Error al escribir {path}: {e}")
            if os.path.exists(tmp_path):
                os.remove(tmp_path)
            raise
        logger.info(f"✓ Archivo generado: {path}")
        return path

    def write_table(self, df: pd.DataFrame, name: str, fmt: str = "csv") -> str:
        """
        Escribe un DataFrame como CSV (encabezado en una linea de comentario)
        o como JSON {"header": ..., "rows": [...]}.

        Args:
            df: tabla a exportar
            name: nombre base sin extension
            fmt: 'csv' o 'json'

        Returns:
            Ruta del archivo generado
        """
        if fmt == "csv":
            text = "# " + self._dumps(self.header(name)) + "\n" + df.to_csv(index=False, lineterminator="\n")
            return self._atomic_write(f"{name}.csv", text)
        if fmt == "json":
            payload = {"header": self.header(name), "rows": json.loads(df.to_json(orient="records"))}
            return self._atomic_write(f"{name}.json", self._dumps(payload) + "\n")
        raise ValueError(f"Formato desconocido: {fmt}")

    def write_json(self, payload: Dict[str, object], name: str) -> str:
        return self._atomic_write(f"{name}.json", self._dumps({"header": self.header(name), **payload}) + "\n")

    def write_jsonl(self, records: Iterable[Dict[str, object]], name: str) -> str:
        """Un registro por linea; la primera linea es el encabezado de procedencia."""
        lines: List[str] = [self._dumps(self.header(name))]
        lines.extend(self._dumps(record) for record in records)
        return self._atomic_write(f"{name}.jsonl", "\n".join(lines) + "\n")

    def write_triplets(self, text: str, name: str) -> str:
        """Matriz dispersa 'fila columna valor' precedida del encabezado."""
        return self._atomic_write(f"{name}.txt", "# " + self._dumps(self.header(name)) + "\n" + text)
