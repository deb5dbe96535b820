"""Jordan-algebraic layer over direct sums of Hermitian matrix blocks.

Elements are tuples of complex Hermitian blocks. Effects are elements with
spectrum in [0, 1]; projections are idempotent effects. Spectral data comes
from the Jacobi solver in :mod:`effectus_lab.linalg`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Callable, Iterable, Sequence

import numpy as np

from .linalg import ExponentialOverflow, expm_pade, jacobi_eigh
from .reports import LawReport, Residual, law_rng
from .tolerances import DEFAULT, Tolerances

SELF_ADJOINT_SCHEMA = "effectus-lab/self-adjoint/1"
EXP_BUDGET = 200.0


class SignatureMismatch(ValueError):
    pass


class NotHermitian(ValueError):
    pass


class NotAnEffect(ValueError):
    pass


class NotSharp(ValueError):
    pass


@dataclass(frozen=True)
class BlockSignature:
    dims: tuple[int, ...]

    def __post_init__(self) -> None:
        dims = tuple(int(d) for d in self.dims)
        if any(d <= 0 for d in dims):
            raise ValueError(f"block dimensions must be positive: {dims}")
        object.__setattr__(self, "dims", dims)

    @classmethod
    def of(cls, dims: "BlockSignature | Iterable[int]") -> "BlockSignature":
        return dims if isinstance(dims, BlockSignature) else cls(tuple(dims))

    @property
    def real_dim(self) -> int:
        return sum(d * d for d in self.dims)

    @property
    def is_zero(self) -> bool:
        return not self.dims

    def __len__(self) -> int:
        return len(self.dims)

    def __str__(self) -> str:
        return "[" + ",".join(map(str, self.dims)) + "]"


class SelfAdjoint:
    """A tuple of Hermitian blocks."""

    def __init__(self, blocks: Iterable[Any], tol: float = DEFAULT.herm):
        arrs = []
        for b in blocks:
            m = np.array(b, dtype=complex)
            if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] == 0:
                raise ValueError(f"blocks must be non-empty square matrices, got {m.shape}")
            dev = float(np.max(np.abs(m - m.conj().T)))
            if dev > tol * max(1.0, float(np.max(np.abs(m)))):
                raise NotHermitian(f"block deviates from Hermitian by {dev:.3e}")
            arrs.append(0.5 * (m + m.conj().T))
        self._set(tuple(arrs))

    def _set(self, blocks: tuple[np.ndarray, ...]) -> None:
        for b in blocks:
            b.setflags(write=False)
        self.blocks = blocks
        self.signature = BlockSignature(tuple(b.shape[0] for b in blocks))
        self._eig: tuple[tuple[np.ndarray, np.ndarray], ...] | None = None

    @classmethod
    def _trusted(cls, blocks: Iterable[np.ndarray]) -> "SelfAdjoint":
        obj = SelfAdjoint.__new__(SelfAdjoint)
        obj._set(tuple(np.array(0.5 * (b + b.conj().T), dtype=complex) for b in blocks))
        return obj

    # arithmetic -------------------------------------------------------

    def _check(self, other: "SelfAdjoint") -> None:
        if self.signature != other.signature:
            raise SignatureMismatch(f"{self.signature} vs {other.signature}")

    def __add__(self, other: "SelfAdjoint") -> "SelfAdjoint":
        self._check(other)
        return SelfAdjoint._trusted(a + b for a, b in zip(self.blocks, other.blocks))

    def __sub__(self, other: "SelfAdjoint") -> "SelfAdjoint":
        self._check(other)
        return SelfAdjoint._trusted(a - b for a, b in zip(self.blocks, other.blocks))

    def __neg__(self) -> "SelfAdjoint":
        return SelfAdjoint._trusted(-a for a in self.blocks)

    def __mul__(self, s: float) -> "SelfAdjoint":
        return SelfAdjoint._trusted(float(s) * a for a in self.blocks)

    __rmul__ = __mul__

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.signature}, {[b.tolist() for b in self.blocks]})"

    # comparisons and spectra -----------------------------------------

    def dist(self, other: "SelfAdjoint") -> float:
        """Largest absolute entry of the difference."""
        self._check(other)
        if not self.blocks:
            return 0.0
        return max(float(np.max(np.abs(a - b))) for a, b in zip(self.blocks, other.blocks))

    def eig(self) -> tuple[tuple[np.ndarray, np.ndarray], ...]:
        if self._eig is None:
            self._eig = tuple(jacobi_eigh(b) for b in self.blocks)
        return self._eig

    def eigvals(self) -> np.ndarray:
        if not self.blocks:
            return np.zeros(0)
        return np.concatenate([v for v, _ in self.eig()])

    def min_eig(self) -> float:
        vals = self.eigvals()
        return float(vals.min()) if vals.size else 0.0

    def max_eig(self) -> float:
        vals = self.eigvals()
        return float(vals.max()) if vals.size else 0.0

    def norm(self) -> float:
        vals = self.eigvals()
        return float(np.max(np.abs(vals))) if vals.size else 0.0

    def trace(self) -> float:
        return float(sum(np.trace(b).real for b in self.blocks))

    # serialisation ----------------------------------------------------

    def to_json(self) -> dict[str, Any]:
        return {
            "schema": SELF_ADJOINT_SCHEMA,
            "dims": list(self.signature.dims),
            "blocks": [[[[float(z.real), float(z.imag)] for z in row] for row in b]
                       for b in self.blocks],
        }

    @classmethod
    def from_json(cls, data: dict[str, Any]) -> "SelfAdjoint":
        dims = list(data["dims"])
        blocks = [np.array([[complex(re, im) for re, im in row] for row in b]) for b in data["blocks"]]
        if [b.shape[0] for b in blocks] != dims:
            raise ValueError("dims do not match blocks")
        return cls(blocks)


class MatrixEffect(SelfAdjoint):
    """Self-adjoint element with spectrum in [0, 1]; small excursions are clipped."""

    def __init__(self, blocks: Iterable[Any], tol: Tolerances = DEFAULT):
        super().__init__(blocks, tol.herm)
        self._clamp(tol.psd)

    def _clamp(self, slack: float) -> None:
        eig = self.eig()
        fixed = []
        changed = False
        for b, (vals, vecs) in zip(self.blocks, eig):
            if vals.size and (vals.min() < -slack or vals.max() > 1 + slack):
                raise NotAnEffect(f"spectrum [{vals.min():.3e}, {vals.max():.3e}] outside [0,1]")
            if vals.size and (vals.min() < 0 or vals.max() > 1):
                clipped = np.clip(vals, 0.0, 1.0)
                fixed.append(((vecs * clipped) @ vecs.conj().T, (clipped, vecs)))
                changed = True
            else:
                fixed.append((b, (vals, vecs)))
        if changed:
            blocks = tuple(np.array(0.5 * (m + m.conj().T)) for m, _ in fixed)
            SelfAdjoint._set(self, blocks)
            self._eig = tuple(e for _, e in fixed)

    @classmethod
    def of(cls, a: SelfAdjoint, tol: Tolerances = DEFAULT) -> "MatrixEffect":
        if isinstance(a, cls):
            return a
        obj = cls.__new__(cls)
        SelfAdjoint._set(obj, tuple(np.array(b) for b in a.blocks))
        obj._eig = a._eig
        obj._clamp(tol.psd)
        return obj

    @property
    def perp(self) -> "MatrixEffect":
        return MatrixEffect.of(identity(self.signature) - self)


class Projection(MatrixEffect):
    """Idempotent effect."""

    def __init__(self, blocks: Iterable[Any], tol: Tolerances = DEFAULT):
        super().__init__(blocks, tol)
        self._check_idem(tol.idem)

    def _check_idem(self, tol: float) -> None:
        for b in self.blocks:
            dev = float(np.max(np.abs(b @ b - b)))
            if dev > tol:
                raise NotSharp(f"p*p differs from p by {dev:.3e}")

    @classmethod
    def of(cls, a: SelfAdjoint, tol: Tolerances = DEFAULT) -> "Projection":
        if isinstance(a, Projection):
            return a
        eff = MatrixEffect.of(a, tol)
        obj = cls.__new__(cls)
        SelfAdjoint._set(obj, tuple(np.array(b) for b in eff.blocks))
        obj._eig = eff._eig
        obj._check_idem(tol.idem)
        return obj

    @classmethod
    def _from_isometries(cls, sig: BlockSignature, isos: Sequence[np.ndarray]) -> "Projection":
        obj = cls.__new__(cls)
        SelfAdjoint._set(obj, tuple(v @ v.conj().T if v.shape[1] else np.zeros((d, d), complex)
                                    for d, v in zip(sig.dims, isos)))
        return obj

    @property
    def perp(self) -> "Projection":
        return Projection.of(identity(self.signature) - self)


def is_sharp(p: SelfAdjoint, tol: Tolerances = DEFAULT) -> bool:
    return all(float(np.max(np.abs(b @ b - b))) <= tol.idem for b in p.blocks)


# -- constructors --------------------------------------------------------------

def identity(sig: BlockSignature | Iterable[int]) -> Projection:
    sig = BlockSignature.of(sig)
    return Projection._from_isometries(sig, [np.eye(d, dtype=complex) for d in sig.dims])


def zeros(sig: BlockSignature | Iterable[int]) -> Projection:
    sig = BlockSignature.of(sig)
    return Projection._from_isometries(sig, [np.zeros((d, 0), complex) for d in sig.dims])


def diag(*values: float) -> SelfAdjoint:
    """Single-block diagonal element."""
    return SelfAdjoint([np.diag(np.asarray(values, dtype=complex))])


def scalar_multiple(sig: BlockSignature, s: float) -> SelfAdjoint:
    return float(s) * identity(sig)


def _mm(x: Sequence[np.ndarray], y: Sequence[np.ndarray]) -> tuple[np.ndarray, ...]:
    return tuple(a @ b for a, b in zip(x, y))


def matmul_blocks(*elems: SelfAdjoint) -> tuple[np.ndarray, ...]:
    """Associative block product of several elements (generally not Hermitian)."""
    out: tuple[np.ndarray, ...] = elems[0].blocks
    for e in elems[1:]:
        elems[0]._check(e)
        out = _mm(out, e.blocks)
    return out


def hermitian_part(blocks: Sequence[np.ndarray]) -> SelfAdjoint:
    return SelfAdjoint._trusted(blocks)


# -- spectral calculus ----------------------------------------------------------

def _clusters(a: SelfAdjoint, tol: Tolerances) -> list[tuple[float, list[list[np.ndarray]]]]:
    """Eigen-clusters across blocks, descending; each holds per-block eigenvectors."""
    entries = [(float(val), k, vecs[:, j])
               for k, (vals, vecs) in enumerate(a.eig()) for j, val in enumerate(vals)]
    entries.sort(key=lambda e: -e[0])
    groups: list[list[tuple[float, int, np.ndarray]]] = []
    for e in entries:
        if groups and groups[-1][-1][0] - e[0] <= tol.cluster:
            groups[-1].append(e)
        else:
            groups.append([e])
    out = []
    for g in groups:
        per_block: list[list[np.ndarray]] = [[] for _ in a.blocks]
        for _, k, v in g:
            per_block[k].append(v)
        out.append((float(np.mean([e[0] for e in g])), per_block))
    return out


def _isometries(a: SelfAdjoint, keep: Callable[[float], bool], tol: Tolerances) -> list[np.ndarray]:
    cols: list[list[np.ndarray]] = [[] for _ in a.blocks]
    for val, per_block in _clusters(a, tol):
        if keep(val):
            for k, vs in enumerate(per_block):
                cols[k].extend(vs)
    return [np.array(c).T if c else np.zeros((d, 0), complex)
            for c, d in zip(cols, a.signature.dims)]


def spectral(a: SelfAdjoint, tol: Tolerances = DEFAULT) -> list[tuple[float, Projection]]:
    """Eigenvalues (clustered, descending) with their eigenprojections."""
    out = []
    for val, per_block in _clusters(a, tol):
        isos = [np.array(vs).T if vs else np.zeros((d, 0), complex)
                for vs, d in zip(per_block, a.signature.dims)]
        out.append((val, Projection._from_isometries(a.signature, isos)))
    return out


def apply_function(a: SelfAdjoint, fn: Callable[[np.ndarray], np.ndarray]) -> SelfAdjoint:
    return SelfAdjoint._trusted((vecs * fn(vals)) @ vecs.conj().T for vals, vecs in a.eig())


# Eigenvalues below this are rounding noise of an exact zero; the square root
# would amplify them to ~1e-8, so they are snapped to 0 first.
SQRT_SNAP = 1e-13


def _sqrt_unit(v: np.ndarray) -> np.ndarray:
    v = np.clip(v, 0.0, 1.0)
    return np.sqrt(np.where(v <= SQRT_SNAP, 0.0, v))


def sqrt_effect(p: MatrixEffect) -> MatrixEffect:
    return MatrixEffect.of(apply_function(p, _sqrt_unit))


def support_isometries(p: SelfAdjoint, tol: Tolerances = DEFAULT) -> list[np.ndarray]:
    """Per block, orthonormal columns spanning eigenvalues above ``tol.sharp``."""
    return _isometries(p, lambda v: v > tol.sharp, tol)


def unit_isometries(p: SelfAdjoint, tol: Tolerances = DEFAULT) -> list[np.ndarray]:
    """Per block, orthonormal columns spanning the eigenvalue-1 cluster."""
    return _isometries(p, lambda v: v >= 1.0 - tol.sharp, tol)


def ceil(p: SelfAdjoint, tol: Tolerances = DEFAULT) -> Projection:
    return Projection._from_isometries(p.signature, support_isometries(p, tol))


def floor(p: SelfAdjoint, tol: Tolerances = DEFAULT) -> Projection:
    return Projection._from_isometries(p.signature, unit_isometries(p, tol))


def leq_residual(a: SelfAdjoint, b: SelfAdjoint) -> float:
    """How far a <= b fails: max(0, -min eig(b - a))."""
    return max(0.0, -(b - a).min_eig())


# -- products ---------------------------------------------------------------------

def jordan_product(a: SelfAdjoint, b: SelfAdjoint) -> SelfAdjoint:
    a._check(b)
    return SelfAdjoint._trusted(0.5 * (x @ y + y @ x) for x, y in zip(a.blocks, b.blocks))


def quadratic(a: SelfAdjoint, b: SelfAdjoint) -> SelfAdjoint:
    """Q_a b = 2 a*(a*b) - (a*a)*b."""
    return 2.0 * jordan_product(a, jordan_product(a, b)) - jordan_product(jordan_product(a, a), b)


def triple(a: SelfAdjoint, b: SelfAdjoint, c: SelfAdjoint) -> SelfAdjoint:
    """Q_{a,b} c = (a*c)*b + (b*c)*a - (a*b)*c.

    This is the polarisation of Q_a: symmetric in (a, b), Q_{a,a} = Q_a, and
    equal to (acb + bca)/2 in an associative realisation. The variant
    (a*b)*c + (c*b)*a - (a*c)*b expands to (abc + cba)/2 instead and is not
    symmetric in (a, b).
    """
    j = jordan_product
    return j(j(a, c), b) + j(j(b, c), a) - j(j(a, b), c)


def seq_product(p: MatrixEffect, q: MatrixEffect) -> MatrixEffect:
    """p & q = Q_{sqrt p} q."""
    p._check(q)
    return MatrixEffect.of(quadratic(sqrt_effect(p), q))


def seq_product_pqp(p: MatrixEffect, q: MatrixEffect) -> MatrixEffect:
    """Deliberately wrong sequential product p q p, kept as a mutant for the law suites."""
    p._check(q)
    return MatrixEffect.of(quadratic(p, q))


SeqProduct = Callable[[MatrixEffect, MatrixEffect], MatrixEffect]


# -- superoperators -------------------------------------------------------------------

def vectorize(a: SelfAdjoint) -> np.ndarray:
    """Coordinates in the orthonormal Hilbert-Schmidt basis of :func:`hermitian_basis`."""
    parts = []
    for b in a.blocks:
        d = b.shape[0]
        iu = np.triu_indices(d, 1)
        off = b[iu]
        parts.append(np.real(np.diag(b)))
        parts.append(np.sqrt(2.0) * np.column_stack([off.real, off.imag]).ravel())
    return np.concatenate(parts) if parts else np.zeros(0)


def devectorize(v: np.ndarray, sig: BlockSignature) -> SelfAdjoint:
    blocks = []
    pos = 0
    for d in sig.dims:
        m = np.zeros((d, d), complex)
        m[np.diag_indices(d)] = v[pos:pos + d]
        pos += d
        iu = np.triu_indices(d, 1)
        k = len(iu[0])
        pairs = v[pos:pos + 2 * k].reshape(k, 2) / np.sqrt(2.0)
        pos += 2 * k
        m[iu] = pairs[:, 0] + 1j * pairs[:, 1]
        m[(iu[1], iu[0])] = pairs[:, 0] - 1j * pairs[:, 1]
        blocks.append(m)
    obj = SelfAdjoint.__new__(SelfAdjoint)
    obj._set(tuple(blocks))
    return obj


def hermitian_basis(sig: BlockSignature) -> list[SelfAdjoint]:
    eye = np.eye(sig.real_dim)
    return [devectorize(eye[:, j], sig) for j in range(sig.real_dim)]


class SuperOperator:
    """Real-linear map between self-adjoint spaces, stored as a dense matrix."""

    def __init__(self, sig_in: BlockSignature, sig_out: BlockSignature, matrix: np.ndarray):
        matrix = np.asarray(matrix, dtype=float)
        if matrix.shape != (sig_out.real_dim, sig_in.real_dim):
            raise SignatureMismatch(f"matrix shape {matrix.shape} does not fit {sig_in} -> {sig_out}")
        self.sig_in = sig_in
        self.sig_out = sig_out
        self.matrix = matrix
        self._sym_eig: tuple[np.ndarray, np.ndarray] | None = None

    @classmethod
    def from_function(cls, fn: Callable[[SelfAdjoint], SelfAdjoint], sig_in: BlockSignature,
                      sig_out: BlockSignature | None = None) -> "SuperOperator":
        sig_out = sig_in if sig_out is None else sig_out
        cols = [vectorize(fn(b)) for b in hermitian_basis(sig_in)]
        mat = np.column_stack(cols) if cols else np.zeros((sig_out.real_dim, 0))
        return cls(sig_in, sig_out, mat)

    @classmethod
    def identity(cls, sig: BlockSignature) -> "SuperOperator":
        return cls(sig, sig, np.eye(sig.real_dim))

    def __call__(self, a: SelfAdjoint) -> SelfAdjoint:
        if a.signature != self.sig_in:
            raise SignatureMismatch(f"{a.signature} vs {self.sig_in}")
        return devectorize(self.matrix @ vectorize(a), self.sig_out)

    def __matmul__(self, other: "SuperOperator") -> "SuperOperator":
        if other.sig_out != self.sig_in:
            raise SignatureMismatch("superoperators not composable")
        return SuperOperator(other.sig_in, self.sig_out, self.matrix @ other.matrix)

    def _like(self, other: "SuperOperator") -> None:
        if (self.sig_in, self.sig_out) != (other.sig_in, other.sig_out):
            raise SignatureMismatch("superoperator signatures differ")

    def __add__(self, other: "SuperOperator") -> "SuperOperator":
        self._like(other)
        return SuperOperator(self.sig_in, self.sig_out, self.matrix + other.matrix)

    def __sub__(self, other: "SuperOperator") -> "SuperOperator":
        self._like(other)
        return SuperOperator(self.sig_in, self.sig_out, self.matrix - other.matrix)

    def __mul__(self, s: float) -> "SuperOperator":
        return SuperOperator(self.sig_in, self.sig_out, float(s) * self.matrix)

    __rmul__ = __mul__

    def dist(self, other: "SuperOperator") -> float:
        self._like(other)
        return float(np.max(np.abs(self.matrix - other.matrix))) if self.matrix.size else 0.0

    def is_symmetric(self, tol: float = 1e-12) -> bool:
        m = self.matrix
        if m.shape[0] != m.shape[1]:
            return False
        return float(np.max(np.abs(m - m.T), initial=0.0)) <= tol * max(1.0, float(np.max(np.abs(m), initial=0.0)))

    def expm(self, t: float = 1.0, budget: float = EXP_BUDGET) -> "SuperOperator":
        """exp(t * self); symmetric operators reuse one Jacobi eigenbasis."""
        if self.sig_in != self.sig_out:
            raise SignatureMismatch("exponential needs a square superoperator")
        m = self.matrix
        norm = float(np.linalg.norm(m, 2)) if m.size else 0.0
        if abs(t) * norm > budget:
            raise ExponentialOverflow(f"|t|*||d|| = {abs(t) * norm:.3g} exceeds budget {budget}")
        if self.is_symmetric():
            if self._sym_eig is None:
                self._sym_eig = jacobi_eigh(0.5 * (m + m.T))
            vals, vecs = self._sym_eig
            return SuperOperator(self.sig_in, self.sig_out, (vecs * np.exp(t * vals)) @ vecs.T)
        return SuperOperator(self.sig_in, self.sig_out, expm_pade(t * m))


def quadratic_superop(a: SelfAdjoint) -> SuperOperator:
    return SuperOperator.from_function(lambda x: quadratic(a, x), a.signature)


def jordan_superop(a: SelfAdjoint) -> SuperOperator:
    """The multiplication operator T_a = a * (-)."""
    return SuperOperator.from_function(lambda x: jordan_product(a, x), a.signature)


def _require_sharp(p: SelfAdjoint, tol: Tolerances) -> Projection:
    try:
        return Projection.of(p, tol)
    except (NotSharp, NotAnEffect) as exc:
        raise NotSharp(str(exc)) from None


def make_D(p: SelfAdjoint, tol: Tolerances = DEFAULT) -> SuperOperator:
    """D_p = Q_p - Q_{p'} for a projection p."""
    p = _require_sharp(p, tol)
    return quadratic_superop(p) - quadratic_superop(p.perp)


def make_T(p: SelfAdjoint, tol: Tolerances = DEFAULT) -> SuperOperator:
    """T_p = (id + D_p) / 2."""
    d = make_D(p, tol)
    return 0.5 * (SuperOperator.identity(d.sig_in) + d)


def check_order_derivation(d: SuperOperator, t_samples: Sequence[float], trials: int,
                           seed: int, tol: float | None = None,
                           law: str = "orderderiv.positive") -> LawReport:
    """Sample exp(t d) on PSD inputs and report the most negative output eigenvalue."""
    tol = DEFAULT.psd if tol is None else tol
    if d.sig_in != d.sig_out:
        raise SignatureMismatch("order derivations are endomorphisms")
    rng = np.random.default_rng(seed)
    res = Residual(tol)
    for t in t_samples:
        e = d.expm(t)
        for k in range(trials):
            rho = random_psd(rng, d.sig_in)
            out = e(rho)
            res.add(max(0.0, -out.min_eig()), lambda: {"t": float(t), "trial": k})
    return res.report(law, f"{d.sig_in} t={list(map(float, t_samples))} trials={trials}")


# -- sampling ---------------------------------------------------------------------------

def _gauss(rng: np.random.Generator, d: int) -> np.ndarray:
    return rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))


def random_hermitian(rng: np.random.Generator, sig: BlockSignature) -> SelfAdjoint:
    return SelfAdjoint._trusted(_gauss(rng, d) for d in sig.dims)


def random_effect(rng: np.random.Generator, sig: BlockSignature) -> MatrixEffect:
    """Random Hermitian with its spectrum mapped affinely onto a random [lo, hi]."""
    h = random_hermitian(rng, sig)
    lo = 0.0 if rng.random() < 0.25 else rng.uniform(0.0, 0.4)
    hi = 1.0 if rng.random() < 0.25 else rng.uniform(0.6, 1.0)
    m, big = h.min_eig(), h.max_eig()
    span = big - m
    if span < 1e-12:
        return MatrixEffect.of(lo * identity(sig))
    return MatrixEffect.of(lo * identity(sig) + ((hi - lo) / span) * (h - m * identity(sig)))


def random_projection(rng: np.random.Generator, sig: BlockSignature) -> Projection:
    """Spectral projection of a random Hermitian above its median eigenvalue.

    The median eigenvalue itself is included with probability 1/2 so that
    odd total dimensions see both neighbouring ranks.
    """
    h = random_hermitian(rng, sig)
    vals = h.eigvals()
    med = float(np.median(vals))
    inclusive = rng.random() < 0.5
    isos = []
    for bvals, bvecs in h.eig():
        keep = bvals >= med if inclusive else bvals > med
        isos.append(bvecs[:, keep])
    return Projection._from_isometries(sig, isos)


def random_subprojection(rng: np.random.Generator, r: Projection) -> Projection:
    """Random projection below r (onto a random subspace of its range)."""
    isos = []
    for v in support_isometries(r):
        k = v.shape[1]
        if k == 0:
            isos.append(v)
            continue
        vals, vecs = jacobi_eigh(0.5 * (_gauss(rng, k) + _gauss(rng, k).conj().T))
        keep = rng.random(k) < 0.5
        isos.append(v @ vecs[:, keep])
    return Projection._from_isometries(r.signature, isos)


def random_symmetry(rng: np.random.Generator, sig: BlockSignature) -> SelfAdjoint:
    return 2.0 * random_projection(rng, sig) - identity(sig)


def random_psd(rng: np.random.Generator, sig: BlockSignature) -> SelfAdjoint:
    """Random positive element of unit trace."""
    blocks = [g @ g.conj().T for g in (_gauss(rng, d) for d in sig.dims)]
    total = sum(float(np.trace(b).real) for b in blocks)
    return SelfAdjoint._trusted(b / total for b in blocks)


def random_unitary(rng: np.random.Generator, d: int) -> np.ndarray:
    q, r = np.linalg.qr(_gauss(rng, d))
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_commuting_effects(rng: np.random.Generator, sig: BlockSignature,
                             count: int = 2) -> list[MatrixEffect]:
    """Effects diagonal in one shared random basis."""
    us = [random_unitary(rng, d) for d in sig.dims]
    out = []
    for _ in range(count):
        blocks = [(u * rng.random(d)) @ u.conj().T for u, d in zip(us, sig.dims)]
        out.append(MatrixEffect.of(SelfAdjoint._trusted(blocks)))
    return out


def compress(p: SelfAdjoint, x: SelfAdjoint) -> SelfAdjoint:
    """p x p by associative multiplication."""
    return hermitian_part(matmul_blocks(p, x, p))


def random_summable_pair(rng: np.random.Generator, sig: BlockSignature) -> tuple[MatrixEffect, MatrixEffect]:
    e = random_effect(rng, sig)
    q = MatrixEffect.of(compress(sqrt_effect(e), random_effect(rng, sig)))
    return q, MatrixEffect.of(e - q)


# -- law suite -------------------------------------------------------------------------

LawFn = Callable[[np.random.Generator, BlockSignature, int, float, SeqProduct], LawReport]


def _commutes(seq: SeqProduct, a: MatrixEffect, b: MatrixEffect) -> float:
    return seq(a, b).dist(seq(b, a))


def _law_sea_a(rng, sig, trials, tol, seq):
    res = Residual(tol)
    for k in range(trials):
        p = random_effect(rng, sig)
        q, r = random_summable_pair(rng, sig)
        lhs = seq(p, MatrixEffect.of(q + r))
        res.add(lhs.dist(seq(p, q) + seq(p, r)), lambda: {"trial": k, "p": p.to_json()})
    return res


def _law_sea_b(rng, sig, trials, tol, seq):
    res = Residual(tol)
    one = identity(sig)
    for k in range(trials):
        p = random_effect(rng, sig)
        res.add(seq(one, p).dist(p), lambda: {"trial": k, "p": p.to_json()})
    return res


def _law_sea_c(rng, sig, trials, tol, seq):
    res = Residual(tol)
    hits = 0
    for k in range(trials):
        r = random_projection(rng, sig)
        a = MatrixEffect.of(compress(r, random_effect(rng, sig)))
        b = MatrixEffect.of(compress(r.perp, random_effect(rng, sig)))
        if k % 4 == 3:
            a, b = random_effect(rng, sig), random_effect(rng, sig)
        if seq(a, b).norm() <= tol:
            hits += 1
            res.add(seq(b, a).norm(), lambda: {"trial": k, "a": a.to_json(), "b": b.to_json()})
    res.hits = hits  # type: ignore[attr-defined]
    return res


def _law_sea_d(rng, sig, trials, tol, seq):
    res = Residual(tol)
    hits = 0
    for k in range(trials):
        a, b = random_commuting_effects(rng, sig)
        pairs = [(a, b), (a, a), (a, a.perp)]
        c = random_effect(rng, sig)
        for x, y in pairs:
            if _commutes(seq, x, y) > tol:
                continue
            hits += 1
            res.add(_commutes(seq, x, y.perp),
                    lambda: {"clause": "commutes with complement", "trial": k,
                             "a": x.to_json(), "b": y.to_json()})
            res.add(seq(x, seq(y, c)).dist(seq(seq(x, y), c)),
                    lambda: {"clause": "associativity", "trial": k, "a": x.to_json(),
                             "b": y.to_json(), "c": c.to_json()})
    res.hits = hits  # type: ignore[attr-defined]
    return res


def _law_sea_e(rng, sig, trials, tol, seq):
    res = Residual(tol)
    hits = 0
    for k in range(trials):
        r = random_projection(rng, sig)
        lam = rng.random(2)
        c = MatrixEffect.of(lam[0] * r + lam[1] * r.perp)

        def block_diag() -> MatrixEffect:
            x = compress(r, random_effect(rng, sig)) + compress(r.perp, random_effect(rng, sig))
            return MatrixEffect.of(0.5 * x)

        a, b = block_diag(), block_diag()
        if _commutes(seq, c, a) > tol or _commutes(seq, c, b) > tol:
            continue
        hits += 1
        res.add(_commutes(seq, c, seq(a, b)),
                lambda: {"clause": "product", "trial": k, "c": c.to_json(),
                         "a": a.to_json(), "b": b.to_json()})
        res.add(_commutes(seq, c, MatrixEffect.of(a + b)),
                lambda: {"clause": "sum", "trial": k, "c": c.to_json(),
                         "a": a.to_json(), "b": b.to_json()})
    res.hits = hits  # type: ignore[attr-defined]
    return res


def _law_sea_f(rng, sig, trials, tol, seq):
    res = Residual(tol)
    for k in range(trials):
        a, p = random_commuting_effects(rng, sig)
        if k % 2:
            a = random_effect(rng, sig)
        target = seq(a, p)
        prev = None
        for n in range(1, 9):
            cur = seq(a, MatrixEffect.of((1.0 - 1.0 / n) * p))
            if prev is not None:
                res.add(leq_residual(prev, cur), lambda: {"clause": "monotone", "trial": k, "n": n})
            prev = cur
        far = seq(a, MatrixEffect.of((1.0 - 2.0 ** -50) * p))
        res.add(far.dist(target), lambda: {"clause": "limit", "trial": k})
        if k % 2 == 0:
            res.add(_commutes(seq, a, p), lambda: {"clause": "commutation", "trial": k})
    return res


def _law_jordan_identity(rng, sig, trials, tol, seq):
    res = Residual(tol)
    j = jordan_product
    for k in range(trials):
        a, b = random_hermitian(rng, sig), random_hermitian(rng, sig)
        aa = j(a, a)
        scale = max(1.0, a.norm() ** 3 * b.norm())
        res.add(j(j(a, b), aa).dist(j(a, j(b, aa))) / scale, lambda: {"trial": k})
    return res


def _law_square_positive(rng, sig, trials, tol, seq):
    res = Residual(tol)
    for k in range(trials):
        a = 2.0 * random_effect(rng, sig) - identity(sig)
        sq = jordan_product(a, a)
        res.add(max(0.0, -sq.min_eig(), sq.max_eig() - 1.0), lambda: {"trial": k, "a": a.to_json()})
    return res


def _law_quadratic_assoc(rng, sig, trials, tol, seq):
    res = Residual(tol)
    for k in range(trials):
        a, b = random_hermitian(rng, sig), random_hermitian(rng, sig)
        scale = max(1.0, a.norm() ** 2 * b.norm())
        res.add(quadratic(a, b).dist(compress(a, b)) / scale, lambda: {"trial": k})
    return res


def _law_triple_assoc(rng, sig, trials, tol, seq):
    res = Residual(tol)
    for k in range(trials):
        a, b, c = (random_hermitian(rng, sig) for _ in range(3))
        scale = max(1.0, a.norm() * b.norm() * c.norm())
        oracle = hermitian_part([0.5 * (x @ z @ y + y @ z @ x)
                                 for x, y, z in zip(a.blocks, b.blocks, c.blocks)])
        res.add(triple(a, b, c).dist(oracle) / scale, lambda: {"clause": "associative", "trial": k})
        res.add(triple(a, a, c).dist(quadratic(a, c)) / scale, lambda: {"clause": "diagonal", "trial": k})
        res.add(triple(a, b, c).dist(triple(b, a, c)) / scale, lambda: {"clause": "symmetric", "trial": k})
    return res


def _law_ceil_least(rng, sig, trials, tol, seq):
    res = Residual(tol)
    for k in range(trials):
        r = random_projection(rng, sig)
        p = MatrixEffect.of(compress(r, random_effect(rng, sig)))
        res.add(leq_residual(ceil(p), r), lambda: {"clause": "ceil below r", "trial": k})
        up = MatrixEffect.of(r + 0.9 * compress(r.perp, random_effect(rng, sig)))
        res.add(leq_residual(r, floor(up)), lambda: {"clause": "floor above r", "trial": k})
    return res


def _law_ceil_absorb(rng, sig, trials, tol, seq):
    res = Residual(tol)
    hits = 0
    for k in range(trials):
        r = random_projection(rng, sig)
        b = MatrixEffect.of(r + 0.9 * compress(r.perp, random_effect(rng, sig)))
        a = MatrixEffect.of(compress(r, random_effect(rng, sig)))
        if seq(b, a).dist(a) > tol:
            continue
        hits += 1
        res.add(leq_residual(ceil(a), b), lambda: {"trial": k, "a": a.to_json(), "b": b.to_json()})
    res.hits = hits  # type: ignore[attr-defined]
    return res


def _law_floor_de_morgan(rng, sig, trials, tol, seq):
    res = Residual(tol)
    for k in range(trials):
        p = random_effect(rng, sig)
        res.add(floor(p).perp.dist(ceil(p.perp)), lambda: {"trial": k, "p": p.to_json()})
        res.add(leq_residual(floor(p), p), lambda: {"clause": "floor <= p", "trial": k})
        res.add(leq_residual(p, ceil(p)), lambda: {"clause": "p <= ceil", "trial": k})
    return res


def _law_compressible(rng, sig, trials, tol, seq):
    res = Residual(tol)
    for k in range(trials):
        p = random_projection(rng, sig)
        if p.trace() < 0.5:
            p = p.perp
        rho = compress(p, random_psd(rng, sig))
        a = random_effect(rng, sig)

        def omega(x: SelfAdjoint) -> float:
            return sum(float(np.trace(r @ y).real) for r, y in zip(rho.blocks, x.blocks)) / rho.trace()

        res.add(abs(omega(p) - 1.0), lambda: {"clause": "state certain on p", "trial": k})
        res.add(abs(omega(seq(p, a)) - omega(a)), lambda: {"trial": k, "a": a.to_json()})
    return res


def _law_quadratic_sharp(rng, sig, trials, tol, seq):
    res = Residual(tol)
    for k in range(trials):
        p, q = random_projection(rng, sig), random_projection(rng, sig)
        qp = seq(q, p)
        res.add(seq(q, seq(p, q)).dist(seq(qp, qp)),
                lambda: {"clause": "q&(p&q) = (q&p)^2", "trial": k, "p": p.to_json(), "q": q.to_json()})
        pq = seq(p, q)
        res.add(seq(pq, pq).dist(seq(p, seq(q, p))),
                lambda: {"clause": "(p&q)^2 = p&(q&p)", "trial": k, "p": p.to_json(), "q": q.to_json()})
    return res


def _law_seq_oracle(rng, sig, trials, tol, seq):
    res = Residual(tol)
    for k in range(trials):
        p, q = random_effect(rng, sig), random_effect(rng, sig)
        pq = seq(p, q)
        res.add(pq.dist(compress(sqrt_effect(p), q)), lambda: {"clause": "sqrt(p) q sqrt(p)", "trial": k})
        res.add(leq_residual(pq, ceil(p)), lambda: {"clause": "p&q <= ceil p", "trial": k})
    return res


def _law_T_jordan(rng, sig, trials, tol, seq):
    res = Residual(tol)
    for k in range(max(1, trials // 10)):
        p = random_projection(rng, sig)
        t = make_T(p)
        for _ in range(10):
            q = random_hermitian(rng, sig)
            res.add(t(q).dist(jordan_product(p, q)) / max(1.0, q.norm()), lambda: {"trial": k})
    return res


def _law_order_derivation(rng, sig, trials, tol, seq):
    res = Residual(tol)
    ts = (-10.0, -5.0, -1.0, -0.5, 0.5, 1.0, 5.0, 10.0)
    for k in range(max(1, trials // 10)):
        p = random_projection(rng, sig)
        d = make_D(p)
        for t in ts:
            e = d.expm(t)
            for _ in range(5):
                out = e(random_psd(rng, sig))
                res.add(max(0.0, -out.min_eig()), lambda: {"trial": k, "t": t, "p": p.to_json()})
    return res


@dataclass(frozen=True)
class Law:
    law_id: str
    statement: str
    fn: LawFn


JORDAN_LAWS: tuple[Law, ...] = (
    Law("sea.a", "p&(q+r) = p&q + p&r whenever q+r <= 1", _law_sea_a),
    Law("sea.b", "1&p = p", _law_sea_b),
    Law("sea.c", "p&q = 0 implies q&p = 0", _law_sea_c),
    Law("sea.d", "if p&q = q&p then p commutes with q' and p&(q&r) = (p&q)&r", _law_sea_d),
    Law("sea.e", "if r commutes with p and q then r commutes with p&q and with p+q", _law_sea_e),
    Law("sea.f", "p_n = (1-1/n)p increasing to p gives a&p_n increasing to a&p", _law_sea_f),
    Law("jordan.identity", "(a*b)*(a*a) = a*(b*(a*a))", _law_jordan_identity),
    Law("jordan.square_positive", "-1 <= a <= 1 implies 0 <= a*a <= 1", _law_square_positive),
    Law("jordan.quadratic_assoc", "2a*(a*b) - (a*a)*b = a b a", _law_quadratic_assoc),
    Law("jordan.triple_assoc", "(a*c)*b + (b*c)*a - (a*b)*c = (acb + bca)/2, symmetric in a, b",
        _law_triple_assoc),
    Law("ceil.least", "ceil p <= r for projections r >= p; r <= floor p for projections r <= p",
        _law_ceil_least),
    Law("ceil.absorb", "b&a = a implies ceil a <= b", _law_ceil_absorb),
    Law("floor.de_morgan", "(floor p)' = ceil(p') and floor p <= p <= ceil p", _law_floor_de_morgan),
    Law("seq.compressible", "for a projection p and a state w with w(p) = 1: w(p&a) = w(a)",
        _law_compressible),
    Law("seq.quadratic", "for projections p, q: q&(p&q) = (q&p)^2 and (p&q)^2 = p&(q&p)",
        _law_quadratic_sharp),
    Law("seq.oracle", "p&q = sqrt(p) q sqrt(p) and p&q <= ceil p", _law_seq_oracle),
    Law("orderderiv.jordan_T", "(id + D_p)/2 acts as q -> p*q for a projection p", _law_T_jordan),
    Law("orderderiv.positive", "exp(t D_p) maps positive elements to positive elements",
        _law_order_derivation),
)


def run_jordan_laws(sig: BlockSignature | Iterable[int], trials: int, seed: int,
                    tol: float | None = None, seq: SeqProduct = seq_product,
                    laws: Iterable[str] | None = None) -> list[LawReport]:
    """Run the Jordan and sequential-product law catalog on one signature."""
    if trials < 1:
        raise ValueError("trials must be at least 1")
    sig = BlockSignature.of(sig)
    tol = DEFAULT.law if tol is None else tol
    wanted = None if laws is None else set(laws)
    out = []
    for law in JORDAN_LAWS:
        if wanted is not None and law.law_id not in wanted:
            continue
        rng = law_rng(seed, law.law_id)
        res = law.fn(rng, sig, trials, tol, seq)
        hits = getattr(res, "hits", None)
        out.append(res.report(law.law_id, f"{sig} trials={trials} seed={seed}",
                              statement=law.statement, nonvacuous=hits))
    return out
