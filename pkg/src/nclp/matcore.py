"""Dense complex block-matrix kernel.

Block-diagonal matrices over a fixed block profile are the universal carrier
for algebra elements, L^p elements, densities and projections.  This module
supplies the spectral calculus everything else is built on: Hermitian
eigendecomposition (cyclic Jacobi), fractional powers with the support
convention 0^t = 0, Schatten norms and polar decomposition.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    NotHermitian,
    NotPSD,
    ProfileMismatch,
    SingularNegativePower,
)
from .exponents import coerce as coerce_exponent

_JACOBI_FRO_FACTOR = 1e-13
_JACOBI_MAX_SWEEPS = 60
_SUPPORT_CUTOFF = 1e-12
_PSD_TOL = 1e-10


@dataclass(frozen=True)
class BlockProfile:
    """Block sizes n_1..n_k of a direct sum of full matrix algebras."""

    dims: tuple

    def __init__(self, dims):
        dims = tuple(int(d) for d in dims)
        if not dims:
            raise ValueError("profile needs at least one block")
        if any(d < 1 for d in dims):
            raise ValueError(f"block sizes must be >= 1, got {dims}")
        object.__setattr__(self, "dims", dims)

    @property
    def block_count(self) -> int:
        return len(self.dims)

    @property
    def total_dim(self) -> int:
        return sum(self.dims)

    @property
    def coord_dim(self) -> int:
        """Dimension of the block-diagonal carrier, sum of n_i^2."""
        return sum(d * d for d in self.dims)

    def __iter__(self):
        return iter(self.dims)


class BlockMatrix:
    """Immutable block-diagonal complex matrix over a BlockProfile."""

    __slots__ = ("profile", "blocks")

    def __init__(self, profile: BlockProfile, blocks, copy: bool = True):
        if len(blocks) != profile.block_count:
            raise ProfileMismatch(
                f"expected {profile.block_count} blocks, got {len(blocks)}"
            )
        prepared = []
        for dim, blk in zip(profile.dims, blocks):
            arr = np.array(blk, dtype=complex, copy=copy)
            if arr.shape != (dim, dim):
                raise ProfileMismatch(
                    f"block of shape {arr.shape} does not match size {dim}"
                )
            arr.setflags(write=False)
            prepared.append(arr)
        object.__setattr__(self, "profile", profile)
        object.__setattr__(self, "blocks", tuple(prepared))

    def __setattr__(self, name, value):
        raise AttributeError("BlockMatrix is immutable")

    # -- constructors -------------------------------------------------

    @classmethod
    def zeros(cls, profile: BlockProfile) -> "BlockMatrix":
        return cls(profile, [np.zeros((d, d), dtype=complex) for d in profile], copy=False)

    @classmethod
    def identity(cls, profile: BlockProfile) -> "BlockMatrix":
        return cls(profile, [np.eye(d, dtype=complex) for d in profile], copy=False)

    @classmethod
    def diagonal(cls, profile: BlockProfile, values) -> "BlockMatrix":
        """Diagonal matrix from a flat list of total_dim entries."""
        values = np.asarray(values, dtype=complex)
        if values.shape != (profile.total_dim,):
            raise ProfileMismatch(
                f"need {profile.total_dim} diagonal entries, got {values.shape}"
            )
        blocks, at = [], 0
        for d in profile:
            blocks.append(np.diag(values[at : at + d]))
            at += d
        return cls(profile, blocks, copy=False)

    @classmethod
    def matrix_unit(cls, profile: BlockProfile, block: int, row: int, col: int) -> "BlockMatrix":
        blocks = [np.zeros((d, d), dtype=complex) for d in profile]
        blocks[block][row, col] = 1.0
        return cls(profile, blocks, copy=False)

    @classmethod
    def unflat(cls, profile: BlockProfile, vec) -> "BlockMatrix":
        """Inverse of flat(): rebuild blocks from concatenated C-order entries."""
        vec = np.asarray(vec, dtype=complex).ravel()
        if vec.size != profile.coord_dim:
            raise ProfileMismatch(
                f"need {profile.coord_dim} coordinates, got {vec.size}"
            )
        blocks, at = [], 0
        for d in profile:
            blocks.append(vec[at : at + d * d].reshape(d, d))
            at += d * d
        return cls(profile, blocks, copy=False)

    # -- arithmetic ----------------------------------------------------

    def _check_same(self, other):
        if self.profile != other.profile:
            raise ProfileMismatch("profiles differ")

    def __add__(self, other):
        self._check_same(other)
        return BlockMatrix(
            self.profile, [a + b for a, b in zip(self.blocks, other.blocks)], copy=False
        )

    def __sub__(self, other):
        self._check_same(other)
        return BlockMatrix(
            self.profile, [a - b for a, b in zip(self.blocks, other.blocks)], copy=False
        )

    def __neg__(self):
        return BlockMatrix(self.profile, [-a for a in self.blocks], copy=False)

    def __mul__(self, scalar):
        return BlockMatrix(self.profile, [scalar * a for a in self.blocks], copy=False)

    __rmul__ = __mul__

    def __matmul__(self, other):
        self._check_same(other)
        return BlockMatrix(
            self.profile, [a @ b for a, b in zip(self.blocks, other.blocks)], copy=False
        )

    def adjoint(self) -> "BlockMatrix":
        return BlockMatrix(self.profile, [a.conj().T for a in self.blocks], copy=False)

    def transpose(self) -> "BlockMatrix":
        return BlockMatrix(self.profile, [a.T for a in self.blocks], copy=False)

    def hermitized(self) -> "BlockMatrix":
        return BlockMatrix(
            self.profile, [(a + a.conj().T) / 2 for a in self.blocks], copy=False
        )

    # -- scalars -------------------------------------------------------

    def block(self, i) -> np.ndarray:
        return self.blocks[i]

    def trace(self) -> complex:
        return complex(sum(np.trace(a) for a in self.blocks))

    def hs_inner(self, other) -> complex:
        """Hilbert-Schmidt inner product <self, other> = sum tr(self_i* other_i)."""
        self._check_same(other)
        return complex(
            sum(np.vdot(a, b) for a, b in zip(self.blocks, other.blocks))
        )

    def fro_norm(self) -> float:
        return float(np.sqrt(sum(np.linalg.norm(a) ** 2 for a in self.blocks)))

    def max_abs(self) -> float:
        return float(max(np.max(np.abs(a)) if a.size else 0.0 for a in self.blocks))

    def flat(self) -> np.ndarray:
        return np.concatenate([a.ravel() for a in self.blocks])

    def allclose(self, other, tol: float = 1e-10) -> bool:
        return (self - other).fro_norm() <= tol

    def is_hermitian(self, tol: float = 1e-8) -> bool:
        return (self - self.adjoint()).fro_norm() <= tol

    def __repr__(self):
        return f"BlockMatrix(profile={self.profile.dims})"


# ---------------------------------------------------------------------------
# Hermitian eigendecomposition: cyclic Jacobi with exact 2x2 subproblems.
# ---------------------------------------------------------------------------


def _two_by_two_eig(app: float, aqq: float, apq: complex):
    """Exact eigensystem of [[app, apq], [conj(apq), aqq]] (app, aqq real).

    Returns (lam1, lam2, U) with U unitary, U* B U = diag(lam1, lam2).
    """
    mid = 0.5 * (app + aqq)
    delta = 0.5 * (app - aqq)
    r = np.hypot(delta, abs(apq))
    lam1 = mid + r
    lam2 = mid - r
    # Eigenvector for lam1, picking the representation that avoids cancellation.
    if delta >= 0:
        v = np.array([r + delta, np.conj(apq)], dtype=complex)
    else:
        v = np.array([apq, r - delta], dtype=complex)
    nrm = np.linalg.norm(v)
    if nrm == 0.0:
        return app, aqq, np.eye(2, dtype=complex)
    v /= nrm
    u = np.empty((2, 2), dtype=complex)
    u[:, 0] = v
    u[0, 1] = -np.conj(v[1])
    u[1, 1] = np.conj(v[0])
    return lam1, lam2, u


def jacobi_eigh(h: np.ndarray, fro_factor: float = _JACOBI_FRO_FACTOR,
                max_sweeps: int = _JACOBI_MAX_SWEEPS):
    """Eigendecomposition of a single dense Hermitian matrix by cyclic Jacobi.

    Sweeps all (p, q) pairs, each time diagonalising the 2x2 principal
    submatrix exactly, until the off-diagonal Frobenius mass falls below
    fro_factor * ||h||_F.  Returns (ascending real eigenvalues, unitary V)
    with h = V diag(lam) V*.
    """
    n = h.shape[0]
    if n == 1:
        return np.array([h[0, 0].real]), np.eye(1, dtype=complex)
    if n == 2:
        # one exact rotation; lam1 >= lam2 by construction, so reorder ascending
        lam1, lam2, u = _two_by_two_eig(h[0, 0].real, h[1, 1].real,
                                        0.5 * (h[0, 1] + np.conj(h[1, 0])))
        return np.array([lam2, lam1]), u[:, ::-1].copy()
    a = np.array(h, dtype=complex)
    v = np.eye(n, dtype=complex)
    fro = np.linalg.norm(a)
    if fro == 0.0:
        return np.zeros(n), v
    thresh = fro_factor * fro
    skip = thresh / (2.0 * n)
    for _ in range(max_sweeps):
        off = np.linalg.norm(a - np.diag(np.diagonal(a)))
        if off <= thresh:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= skip:
                    continue
                lam1, lam2, u = _two_by_two_eig(a[p, p].real, a[q, q].real, apq)
                rows = a[[p, q], :]
                a[[p, q], :] = u.conj().T @ rows
                cols = a[:, [p, q]]
                a[:, [p, q]] = cols @ u
                a[p, p] = lam1
                a[q, q] = lam2
                a[p, q] = 0.0
                a[q, p] = 0.0
                v[:, [p, q]] = v[:, [p, q]] @ u
    lam = np.real(np.diagonal(a)).copy()
    order = np.argsort(lam, kind="stable")
    return lam[order], v[:, order]


def hermitian_eig(H: BlockMatrix, tol: float = 1e-8):
    """Per-block eigensystem of a Hermitian block matrix.

    The Hermiticity test allows `tol` absolute plus 1e-10 relative defect
    (embeddings compound rounding); the input is symmetrised before the
    Jacobi sweeps.  Returns (list of ascending eigenvalue arrays, unitary V).
    """
    defect = (H - H.adjoint()).fro_norm()
    if defect > tol + 1e-10 * H.fro_norm():
        raise NotHermitian(f"Hermiticity defect {defect:.3e} exceeds tolerance")
    eigenvalues = []
    vectors = []
    for blk in H.hermitized().blocks:
        lam, v = jacobi_eigh(blk)
        eigenvalues.append(lam)
        vectors.append(v)
    return eigenvalues, BlockMatrix(H.profile, vectors, copy=False)


def _power_from_spectrum(lam: np.ndarray, t: float, cutoff: float):
    """Eigenvalue power with the support convention 0^t = 0."""
    out = np.zeros_like(lam)
    on = lam > cutoff
    if t == 0:
        out[on] = 1.0
    else:
        out[on] = lam[on] ** t
    return out


def frac_power(P: BlockMatrix, t) -> BlockMatrix:
    """Spectral power P^t of a positive semidefinite block matrix.

    t >= 0 uses the support convention (zero eigenvalues map to zero, so
    P^0 is the support projection); t < 0 requires P positive definite.
    """
    t = float(t)
    lams, V = hermitian_eig(P)
    top = max(float(l[-1]) for l in lams)
    floor = -_PSD_TOL * max(1.0, top)
    if any(float(l[0]) < floor for l in lams):
        worst = min(float(l[0]) for l in lams)
        raise NotPSD(f"minimum eigenvalue {worst:.3e} below PSD tolerance")
    cutoff = _SUPPORT_CUTOFF * max(top, 0.0)
    if t < 0 and any(np.any(l <= cutoff) for l in lams):
        raise SingularNegativePower("negative power of a singular positive matrix")
    blocks = []
    for lam, v in zip(lams, V.blocks):
        powered = _power_from_spectrum(np.maximum(lam, 0.0), t, cutoff)
        blk = (v * powered) @ v.conj().T
        blocks.append((blk + blk.conj().T) / 2)
    return BlockMatrix(P.profile, blocks, copy=False)


def singular_values(x: BlockMatrix):
    """Per-block ascending singular values, via the spectrum of x* x."""
    out = []
    for blk in x.blocks:
        gram = blk.conj().T @ blk
        lam, _ = jacobi_eigh((gram + gram.conj().T) / 2)
        out.append(np.sqrt(np.maximum(lam, 0.0)))
    return out


def schatten_norm(x: BlockMatrix, p) -> float:
    """Schatten p-norm: the l^p norm of all singular values across blocks."""
    p = coerce_exponent(p)
    svals = np.concatenate(singular_values(x))
    if p.is_inf:
        return float(np.max(svals)) if svals.size else 0.0
    top = float(np.max(svals)) if svals.size else 0.0
    if top == 0.0:
        return 0.0
    pf = float(p)
    # factor out the largest value so large p cannot overflow
    return float(top * np.sum((svals / top) ** pf) ** (1.0 / pf))


def polar(x: BlockMatrix):
    """Polar decomposition x = u |x| with u a partial isometry, u*u = supp|x|."""
    u_blocks = []
    abs_blocks = []
    for blk in x.blocks:
        gram = blk.conj().T @ blk
        lam, v = jacobi_eigh((gram + gram.conj().T) / 2)
        s = np.sqrt(np.maximum(lam, 0.0))
        top = float(s[-1]) if s.size else 0.0
        cutoff = _SUPPORT_CUTOFF * top
        inv = np.zeros_like(s)
        on = s > cutoff
        inv[on] = 1.0 / s[on]
        absx = (v * s) @ v.conj().T
        u_blocks.append(blk @ ((v * inv) @ v.conj().T))
        abs_blocks.append((absx + absx.conj().T) / 2)
    return (
        BlockMatrix(x.profile, u_blocks, copy=False),
        BlockMatrix(x.profile, abs_blocks, copy=False),
    )


def support_of(P: BlockMatrix) -> BlockMatrix:
    """Support projection of a positive semidefinite block matrix."""
    return frac_power(P, 0)


def commutator_norm(a: BlockMatrix, b: BlockMatrix) -> float:
    """Frobenius norm of ab - ba."""
    return (a @ b - b @ a).fro_norm()
