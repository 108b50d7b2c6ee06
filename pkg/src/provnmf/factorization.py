"""The ``Factorization`` record shared by every solver."""

from dataclasses import dataclass

import numpy as np

from .linalg import as_matrix

#: entries of an output factor above ``-CLAMP_TOL`` are clamped to zero
CLAMP_TOL = 1e-12


@dataclass(frozen=True)
class Factorization:
    """Nonnegative pair ``(a, w)`` with residual metadata for ``m ~ a @ w``."""

    a: np.ndarray
    w: np.ndarray
    residual_fro: float
    residual_row_l1_max: float

    @property
    def inner_dim(self):
        return self.a.shape[1]

    @classmethod
    def from_factors(cls, m, a, w, clamp=True):
        """Build a record, recomputing both residuals against ``m``.

        With ``clamp`` entries in ``[-CLAMP_TOL, 0)`` are set to zero; larger
        negative entries are kept so verification can see them.
        """
        m = as_matrix(m)
        a = np.array(a, dtype=float)
        w = np.array(w, dtype=float)
        if clamp:
            a[(a < 0) & (a >= -CLAMP_TOL)] = 0.0
            w[(w < 0) & (w >= -CLAMP_TOL)] = 0.0
        resid = m - a @ w
        row_l1 = np.abs(resid).sum(axis=1)
        return cls(a=a, w=w,
                   residual_fro=float(np.linalg.norm(resid)),
                   residual_row_l1_max=float(row_l1.max()) if row_l1.size else 0.0)

    def product(self):
        return self.a @ self.w
