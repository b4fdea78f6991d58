"""Floyd metrics, transitional trees and dimension estimates on free products."""

__version__ = "0.1.0"

from .errors import (ConstructionError, FloydLabError, InputError, PreconditionError,
                     ResourceError, UnsupportedOperation)
from .group import IDENTITY, Coset, Cyclic, FreeAbelian, GroupSpec, builtin, load_group

__all__ = ["__version__", "IDENTITY", "Coset", "Cyclic", "FreeAbelian", "GroupSpec", "builtin",
           "load_group", "ConstructionError", "FloydLabError", "InputError", "PreconditionError",
           "ResourceError", "UnsupportedOperation"]
