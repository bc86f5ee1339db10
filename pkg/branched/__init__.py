import logging

__version__ = "0.1.0"
__author__ = "Rich Iannone"
__email__ = "riannone@me.com"

logging.getLogger(__name__).addHandler(logging.NullHandler())

# Only import what's available to avoid import errors during installation
__all__ = ["__version__", "__author__", "__email__"]

try:
    from .core.eigensolver import Grid, Spectrum, solve_branches, solve_levels  # noqa: F401
    from .core.model import Branch, ModelParams  # noqa: F401
    from .core.perturbation import corrected_energies  # noqa: F401
    from .core.polyalgebra import Polynomial, chiellini_check  # noqa: F401
    from .core.quantize import quantize_pcf  # noqa: F401

    __all__.extend(
        [
            "Branch",
            "Grid",
            "ModelParams",
            "Polynomial",
            "Spectrum",
            "chiellini_check",
            "corrected_energies",
            "quantize_pcf",
            "solve_branches",
            "solve_levels",
        ]
    )
except ImportError:
    # Dependencies not yet installed
    pass
