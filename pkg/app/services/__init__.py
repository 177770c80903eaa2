"""Services module - Servicios del motor (lazy imports)."""

from importlib import import_module

__all__ = ["ReportService", "VerificationService", "standard_basis", "phi_matrix", "census_polynomial"]


def __getattr__(name: str):
    mapping = {
        "ReportService": ("app.services.report_service", "ReportService"),
        "VerificationService": ("app.services.verification_service", "VerificationService"),
        "standard_basis": ("app.services.specht_service", "standard_basis"),
        "phi_matrix": ("app.services.homomorphism_service", "phi_matrix"),
        "census_polynomial": ("app.services.rank_census_service", "census_polynomial"),
    }
    if name not in mapping:
        raise AttributeError(f"module 'app.services' has no attribute '{name}'")
    module_name, attr_name = mapping[name]
    module = import_module(module_name)
    return getattr(module, attr_name)
