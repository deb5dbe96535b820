"""Dense eigen-solver and matrix exponential used by the Jordan layer."""

from __future__ import annotations

import math

import numpy as np

JACOBI_MAX_SWEEPS = 100
JACOBI_OFF_TARGET = 1e-13
MAX_JACOBI_DIM = 64


class EigenNonconvergence(ArithmeticError):
    pass


class ExponentialOverflow(ArithmeticError):
    pass


def jacobi_eigh(a: np.ndarray, tol: float = JACOBI_OFF_TARGET,
                max_sweeps: int = JACOBI_MAX_SWEEPS) -> tuple[np.ndarray, np.ndarray]:
    """Eigen-decomposition of a Hermitian matrix by cyclic Jacobi rotations.

    Returns ``(values, vectors)`` with values in descending order and
    ``a @ vectors[:, k] == values[k] * vectors[:, k]``. Each eigenvector is
    phase-normalised so its first non-negligible component is real positive.

    Raises:
        EigenNonconvergence: the off-diagonal norm did not fall below
            ``tol`` (relative to the Frobenius norm) within ``max_sweeps``.
    """
    a = np.asarray(a)
    real_input = not np.iscomplexobj(a)
    n = a.shape[0]
    if a.ndim != 2 or a.shape[1] != n:
        raise ValueError("expected a square matrix")
    if n > MAX_JACOBI_DIM:
        raise ValueError(f"dimension {n} exceeds the Jacobi limit {MAX_JACOBI_DIM}")
    w = np.array(a, dtype=complex)
    w = 0.5 * (w + w.conj().T)
    v = np.eye(n, dtype=complex)
    scale = np.linalg.norm(w)
    if n <= 1 or scale == 0.0:
        return _finish(np.real(np.diag(w)).copy(), v, real_input)
    target = tol * scale
    for _ in range(max_sweeps):
        off = float(np.linalg.norm(w - np.diag(np.diag(w))))
        if off <= target:
            return _finish(np.real(np.diag(w)).copy(), v, real_input)
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = w[p, q]
                r = abs(apq)
                if r <= 1e-300:
                    continue
                phase = apq / r
                tau = (w[q, q].real - w[p, p].real) / (2.0 * r)
                if tau == 0.0:
                    t = 1.0
                elif abs(tau) > 1e150:
                    t = 0.5 / tau
                else:
                    t = math.copysign(1.0, tau) / (abs(tau) + math.sqrt(1.0 + tau * tau))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                g = np.array([[c, s], [-s * phase.conjugate(), c * phase.conjugate()]])
                idx = [p, q]
                w[:, idx] = w[:, idx] @ g
                w[idx, :] = g.conj().T @ w[idx, :]
                v[:, idx] = v[:, idx] @ g
                w[p, q] = w[q, p] = 0.0
                w[p, p] = w[p, p].real
                w[q, q] = w[q, q].real
    off = float(np.linalg.norm(w - np.diag(np.diag(w))))
    if off <= target:
        return _finish(np.real(np.diag(w)).copy(), v, real_input)
    raise EigenNonconvergence(f"Jacobi did not converge in {max_sweeps} sweeps (off={off:.3e})")


def _finish(vals: np.ndarray, vecs: np.ndarray, real_input: bool) -> tuple[np.ndarray, np.ndarray]:
    order = np.argsort(-vals, kind="stable")
    vals = vals[order]
    vecs = vecs[:, order]
    for k in range(vecs.shape[1]):
        col = vecs[:, k]
        nz = np.flatnonzero(np.abs(col) > 1e-12)
        if nz.size:
            ph = col[nz[0]] / abs(col[nz[0]])
            vecs[:, k] = col / ph
    if real_input:
        vecs = np.real(vecs)
    return vals, vecs


# Pade [6/6] coefficients: c_k = (2q-k)! q! / ((2q)! k! (q-k)!), q = 6
_PADE6 = [math.factorial(12 - k) * math.factorial(6)
          / (math.factorial(12) * math.factorial(k) * math.factorial(6 - k)) for k in range(7)]


def expm_pade(m: np.ndarray) -> np.ndarray:
    """exp(m) by scaling and squaring with a degree-6 Pade approximant."""
    m = np.asarray(m, dtype=float)
    n = m.shape[0]
    norm1 = float(np.max(np.sum(np.abs(m), axis=0))) if n else 0.0
    squarings = max(0, int(math.ceil(math.log2(norm1 / 0.5)))) if norm1 > 0.5 else 0
    x = m / (2.0 ** squarings)
    eye = np.eye(n)
    power = eye
    num = _PADE6[0] * eye
    den = _PADE6[0] * eye
    for k in range(1, 7):
        power = power @ x
        num = num + _PADE6[k] * power
        den = den + ((-1) ** k) * _PADE6[k] * power
    out = np.linalg.solve(den, num)
    for _ in range(squarings):
        out = out @ out
    return out


def expm_symmetric(m: np.ndarray) -> np.ndarray:
    """exp(m) for a real symmetric m through its Jacobi eigenbasis."""
    vals, vecs = jacobi_eigh(m)
    return (vecs * np.exp(vals)) @ vecs.T


def expm(m: np.ndarray, budget: float = 200.0) -> np.ndarray:
    """exp(m): eigenbasis route for symmetric input, Pade otherwise.

    Raises:
        ExponentialOverflow: the 2-norm of ``m`` exceeds ``budget``.
    """
    m = np.asarray(m, dtype=float)
    if m.size and float(np.linalg.norm(m, 2)) > budget:
        raise ExponentialOverflow(f"norm {np.linalg.norm(m, 2):.3g} exceeds budget {budget}")
    scale = float(np.max(np.abs(m))) if m.size else 0.0
    if m.size and float(np.max(np.abs(m - m.T))) <= 1e-12 * max(scale, 1.0):
        return expm_symmetric(0.5 * (m + m.T))
    return expm_pade(m)
