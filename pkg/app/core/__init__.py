"""Core module - Configuración, errores y utilidades centrales"""
from app.core.config import settings
from app.core.errors import SpechtEngineError, UsageError
from app.core.file_lock import acquire_process_lock, ProcessLockError

__all__ = ["settings", "SpechtEngineError", "UsageError", "acquire_process_lock", "ProcessLockError"]
