"""
Configuracion centralizada del motor.
Gestiona limites de enumeracion, rutas de salida y parametros de verificacion.
"""
from typing import List, Tuple

from pydantic import field_validator, model_validator
from pydantic_settings import BaseSettings
from sympy import factorint


def _is_field_order(value: int, limit: int) -> bool:
    return 2 <= value <= limit and len(factorint(value)) == 1


class Settings(BaseSettings):
    """
    Configuracion del motor usando Pydantic.
    Los valores solo se sobrescriben por argumentos explicitos (CLI),
    nunca desde variables de entorno.
    """
    # Configuracion de la aplicacion
    APP_NAME: str = "Motor de Modulos de Specht Unipotentes"
    APP_VERSION: str = "1.0.0"
    DEBUG: bool = False

    # Limites de enumeracion
    DEFAULT_BUDGET: int = 5_000_000  # matrices por corrida
    MAX_FIELD_ORDER: int = 16

    # Salidas
    OUTPUT_DIR: str = "reports"
    LOG_FILE: str = "specht_engine.log"
    LOCK_FILE: str = "specht_engine.lock"

    # Reproducibilidad y paralelismo
    DEFAULT_SEED: int = 0
    DEFAULT_WORKERS: int = 1

    # Suite de verificacion
    VERIFY_MAX_N: int = 5
    VERIFY_Q_VALUES: str = "2,3"
    # Oraculo de fuerza bruta solo para lotes con |J_t| <= ORACLE_MAX_FREE
    ORACLE_MAX_FREE: int = 4
    RANDOM_TRIALS: int = 8
    # Chequeos de nucleo y base estandar solo si [n m]_q <= VERIFY_HEAVY_LIMIT
    VERIFY_HEAVY_LIMIT: int = 400

    # Polinomios de censo: valores de ajuste y q reservado para validar
    CENSUS_Q_VALUES: str = "2,3,4"
    CENSUS_HELDOUT_Q: int = 5

    class Config:
        case_sensitive = True

    @classmethod
    def settings_customise_sources(
        cls,
        settings_cls,
        init_settings,
        env_settings,
        dotenv_settings,
        file_secret_settings,
    ) -> Tuple:
        # Solo argumentos explicitos: el entorno no se consulta
        return (init_settings,)

    @field_validator("VERIFY_Q_VALUES", "CENSUS_Q_VALUES")
    @classmethod
    def _check_q_list(cls, value: str) -> str:
        """
        Cada entrada de la lista CSV debe ser un entero. La comprobacion de
        orden de campo se hace en _check_field_orders, que conoce el limite.
        """
        for raw_item in str(value).split(","):
            if raw_item.strip() and not raw_item.strip().isdigit():
                raise ValueError(f"'{raw_item.strip()}' no es un orden de campo")
        return value

    @model_validator(mode="after")
    def _check_field_orders(self) -> "Settings":
        orders = self.verify_q_values + self.census_q_values + [self.CENSUS_HELDOUT_Q]
        invalid = [q for q in orders if not _is_field_order(q, self.MAX_FIELD_ORDER)]
        if invalid:
            raise ValueError(f"Ordenes de campo invalidos (potencia de primo <= {self.MAX_FIELD_ORDER}): {invalid}")
        if self.CENSUS_HELDOUT_Q in self.census_q_values:
            raise ValueError(f"CENSUS_HELDOUT_Q={self.CENSUS_HELDOUT_Q} no puede ser tambien punto de ajuste")
        return self

    @staticmethod
    def _parse_int_list(raw_value: str) -> List[int]:
        """Convierte una cadena CSV de enteros en lista unica, en orden de aparicion."""
        values: List[int] = []
        for raw_item in str(raw_value or "").split(","):
            if raw_item.strip() and int(raw_item) not in values:
                values.append(int(raw_item))
        return values

    @property
    def verify_q_values(self) -> List[int]:
        """Valores de q usados por la suite de verificacion."""
        return self._parse_int_list(self.VERIFY_Q_VALUES)

    @property
    def census_q_values(self) -> List[int]:
        """Valores de q usados para interpolar polinomios de censo."""
        return self._parse_int_list(self.CENSUS_Q_VALUES)


# Instancia global de configuracion (Singleton)
settings = Settings()
