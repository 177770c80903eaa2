"""
Lock por directorio de salida: dos corridas nunca escriben a la vez en el
mismo --out. Corridas con directorios distintos no se bloquean entre si.
"""
import logging
import os
from contextlib import contextmanager
from typing import Iterator, Optional

from filelock import FileLock, Timeout

from app.core.config import settings
from app.core.errors import SpechtEngineError

logger = logging.getLogger(__name__)


class ProcessLockError(SpechtEngineError):
    """Otra corrida tiene tomado el directorio de salida."""

    exit_code = 1


def lock_path_for(output_dir: Optional[str]) -> str:
    """Ruta del archivo de lock dentro del directorio de salida (lo crea si falta)."""
    directory = os.path.abspath(output_dir or settings.OUTPUT_DIR)
    os.makedirs(directory, exist_ok=True)
    return os.path.join(directory, settings.LOCK_FILE)


@contextmanager
def acquire_process_lock(output_dir: Optional[str] = None, timeout: float = 1.0) -> Iterator[FileLock]:
    """
    Toma el directorio de salida durante toda la corrida.

    Args:
        output_dir: Directorio de artefactos; por defecto settings.OUTPUT_DIR
        timeout: Segundos de espera antes de rendirse

    Raises:
        ProcessLockError: Si el lock sigue ocupado al vencer el timeout
    """
    path = lock_path_for(output_dir)
    lock = FileLock(path, timeout=timeout)
    try:
        lock.acquire()
    except Timeout:
        logger.error(f"✗ Directorio de salida ocupado por otra corrida: {os.path.dirname(path)}")
        raise ProcessLockError(
            "Otra corrida esta escribiendo en este directorio; usa otro --out",
            {"lock_file": path},
        )

    logger.info(f"✓ Lock tomado: {path}")
    try:
        yield lock
    finally:
        lock.release()
        try:
            os.remove(path)
        except FileNotFoundError:
            pass
        except OSError as e:
            logger.warning(f"No se pudo eliminar {path}: {e}")
        logger.info("✓ Lock liberado")
