"""Product-Matrix regenerating codes with information-theoretically secure variants."""

from .gf import GF, FieldElement, FixedSource, SeededSource, SystemSource, uniform_sample
from .kernels import BACKEND
from .linalg import MatrixFq
from .params import CodeParams, Mode, SecrecyParams, mbr_params, msr_params, secure_counts
from .secure import SecureCode, build_code

__all__ = [
    "BACKEND",
    "CodeParams",
    "FieldElement",
    "FixedSource",
    "GF",
    "MatrixFq",
    "Mode",
    "SecrecyParams",
    "SecureCode",
    "SeededSource",
    "SystemSource",
    "build_code",
    "mbr_params",
    "msr_params",
    "secure_counts",
    "uniform_sample",
]

__version__ = "0.1.0"
