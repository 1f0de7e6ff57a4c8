"""Python bindings for the fracorder C++ library."""

from ._core import (
    FitResult,
    Soe,
    add_noise,
    asymptote,
    build_soe,
    gamma_recip,
    mlf,
    preset_names,
    preset_text,
    recover_order,
    run,
    simulate_preset,
)

__all__ = [
    "FitResult",
    "Soe",
    "add_noise",
    "asymptote",
    "build_soe",
    "gamma_recip",
    "mlf",
    "preset_names",
    "preset_text",
    "recover_order",
    "run",
    "simulate_preset",
]
