"""
Jerarquia de errores del motor.
Cada familia lleva el codigo de salida que la CLI devuelve al usuario.
"""
from typing import Any, Dict, Optional


class SpechtEngineError(Exception):
    """Error base del motor. `context` guarda el caso para reproducirlo."""

    exit_code: int = 1

    def __init__(self, message: str, context: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.context = dict(context or {})


class UsageError(SpechtEngineError):
    """Entrada invalida (forma, campo, argumentos)."""

    exit_code = 2


class FieldError(UsageError):
    """Orden de campo no soportado o elemento fuera de rango."""


class BatchMismatchError(UsageError):
    """Operacion entre matrices de lotes distintos."""


class PatternFitError(UsageError):
    """El patron no encaja en el tableau."""


class RootOutsideUpsilonError(UsageError):
    """La raiz no pertenece a Υ₁ ∪ Υ₂ ∪ Υ₃ del lote."""


class RankDeficiencyError(UsageError):
    """La matriz de entrada no tiene rango completo por filas."""


class NotAPatternMatrixError(UsageError):
    """Se esperaba una matriz patron."""


class EligibilityError(UsageError):
    """La etiqueta no es elegible como termino principal."""


class ZeroVectorError(UsageError):
    """El vector es cero y no tiene termino principal."""


class DivisionByZeroError(SpechtEngineError, ZeroDivisionError):
    """Division exacta por cero (campo o escalar ciclotomico)."""

    exit_code = 5


class BudgetExceededError(SpechtEngineError):
    """La enumeracion supera el presupuesto configurado."""

    exit_code = 3


class InvariantFailure(SpechtEngineError):
    """Una propiedad verificada no se cumple."""

    exit_code = 4


class InternalInconsistencyError(SpechtEngineError):
    """Estado imposible segun la teoria (p.ej. sistema de componente sin solucion)."""

    exit_code = 5
