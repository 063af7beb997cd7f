"""
Shared numeric primitives
"""

import numpy as np
from numpy.typing import ArrayLike, NDArray
from pydantic import BaseModel, ConfigDict, Field

DEFAULT_HUBER_PHI = 1.35


class HuberParams(BaseModel):
    """Shape parameter of the Huber norm"""

    model_config = ConfigDict(frozen=True)

    phi: float = Field(DEFAULT_HUBER_PHI, gt=0)


def huber(z: float, params: HuberParams | None = None) -> float:
    """
    Huber norm of a residual.

    z**2 inside [-phi, phi], 2*phi*|z| - phi**2 outside. Both branches and
    their first derivatives agree at |z| = phi.
    """
    phi = (params or HuberParams()).phi
    a = abs(z)
    if a <= phi:
        return z * z
    return 2.0 * phi * a - phi * phi


def huber_array(z: ArrayLike, phi: float = DEFAULT_HUBER_PHI) -> NDArray[np.float64]:
    """Vectorised huber() over an array of residuals"""
    arr = np.asarray(z, dtype=np.float64)
    a = np.abs(arr)
    return np.where(a <= phi, arr * arr, 2.0 * phi * a - phi * phi)
