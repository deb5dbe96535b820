"""Numerical tolerances shared by the matrix layers."""

from __future__ import annotations

from dataclasses import dataclass, replace


@dataclass(frozen=True)
class Tolerances:
    herm: float = 1e-10   # Hermiticity of input blocks
    psd: float = 1e-9     # eigenvalue slack for effects and positivity checks
    idem: float = 1e-9    # p*p = p for projections
    sharp: float = 1e-7   # eigenvalue threshold for supports and the 1-cluster
    cluster: float = 1e-8 # merge eigenvalues closer than this
    law: float = 1e-8     # default pass threshold for law residuals
    choi: float = 1e-9    # map equality via Choi matrices

    def with_law(self, tol: float | None) -> "Tolerances":
        if tol is None:
            return self
        if tol <= 0:
            raise ValueError("tolerance must be positive")
        return replace(self, law=tol)


DEFAULT = Tolerances()
