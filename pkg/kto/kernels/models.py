"""Kernel specifications and Gram matrix bundles."""

from dataclasses import dataclass
from enum import StrEnum

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from kto.tensordata.models import FloatArray


class KernelKind(StrEnum):
    GAUSSIAN = "gaussian"
    POLYNOMIAL = "polynomial"


class KernelSpec(BaseModel):
    """A positive-definite kernel on flattened snapshots.

    Gaussian: ``k(x, x') = exp(-||x - x'||^2 / (2 sigma^2))``.
    Polynomial: ``k(x, x') = (<x, x'> + offset)^degree``.

    Parameters not used by ``kind`` are validated but ignored.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: KernelKind = KernelKind.GAUSSIAN
    sigma: float = Field(default=1.0, gt=0.0, allow_inf_nan=False)
    degree: int = Field(default=2, ge=1)
    offset: float = Field(default=1.0, ge=0.0, allow_inf_nan=False)

    @classmethod
    def gaussian(cls, sigma: float) -> "KernelSpec":
        return cls(kind=KernelKind.GAUSSIAN, sigma=sigma)

    @classmethod
    def polynomial(cls, degree: int, offset: float = 1.0) -> "KernelSpec":
        return cls(kind=KernelKind.POLYNOMIAL, degree=degree, offset=offset)

    def describe(self) -> dict[str, object]:
        """Return only the parameters that ``kind`` uses, for logs and exports."""
        if self.kind is KernelKind.GAUSSIAN:
            return {"kind": self.kind.value, "sigma": self.sigma}
        return {"kind": self.kind.value, "degree": self.degree, "offset": self.offset}


@dataclass(frozen=True, slots=True, eq=False)
class GramPack:
    """``G_XX``, ``G_XY`` and ``G_YX`` for one paired dataset.

    ``g_yx`` is ``g_xy`` transposed, never recomputed.
    """

    g_xx: FloatArray
    g_xy: FloatArray
    g_yx: FloatArray

    @property
    def n(self) -> int:
        return int(self.g_xx.shape[0])

    def symmetry_error(self) -> float:
        return float(np.max(np.abs(self.g_xx - self.g_xx.T)))
