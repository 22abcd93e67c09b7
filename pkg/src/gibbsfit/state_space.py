"""States and observables on a finite-dimensional Hilbert space.

Quantum systems are represented by Hermitian matrices; classical systems
ride along as the diagonal special case with plain probability vectors,
so that small classical problems never pay matrix costs.  Every operation
below has a vector fast path that evaluates the same formula as the
general matrix path.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ValidationError

logger = logging.getLogger("gibbsfit.state_space")

# Smallest eigenvalue kept in a density operator.  Anything below is
# clamped up and the state renormalized, so logarithms stay finite.
EIG_FLOOR = 1e-12

# Eigenvalue gaps below this (in log space) switch the canonical-correlation
# weight to its continuous limit.
KMB_DEGENERATE_TOL = 1e-9

__all__ = [
    "EIG_FLOOR",
    "HermitianOperator",
    "DensityOperator",
    "Spectrum",
    "eig_hermitian",
    "matrix_fn",
    "expectation",
    "von_neumann_entropy",
    "relative_entropy",
    "kmb_inner",
    "hs_inner",
    "pauli_x",
    "pauli_y",
    "pauli_z",
    "uniform_state",
    "classical_state",
    "bloch_state",
]


def _freeze(a: np.ndarray) -> np.ndarray:
    out = np.array(a, copy=True)
    out.setflags(write=False)
    return out


def _as_complex(a) -> np.ndarray:
    return np.asarray(a, dtype=complex)


@dataclass(frozen=True, eq=False)
class HermitianOperator:
    """A validated Hermitian matrix, optionally tagged as diagonal.

    ``diagonal`` holds the real diagonal vector whenever all off-diagonal
    entries are exactly zero; it is what the classical fast paths consume.
    """

    matrix: np.ndarray
    diagonal: np.ndarray | None = None

    @classmethod
    def from_matrix(cls, matrix, *, atol: float = 1e-12) -> "HermitianOperator":
        m = _as_complex(matrix)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValidationError(f"observable must be a square matrix, got shape {m.shape}")
        scale = max(1.0, float(np.max(np.abs(m))) if m.size else 1.0)
        if float(np.max(np.abs(m - m.conj().T))) > atol * scale:
            raise ValidationError("observable is not Hermitian within tolerance")
        m = 0.5 * (m + m.conj().T)
        diag = None
        off = m - np.diag(np.diag(m))
        if not np.any(off):
            diag = np.real(np.diag(m)).copy()
        obj = cls(matrix=_freeze(m), diagonal=None if diag is None else _freeze(diag))
        return obj

    @classmethod
    def from_diagonal(cls, values) -> "HermitianOperator":
        v = np.asarray(values, dtype=float)
        if v.ndim != 1 or v.size == 0:
            raise ValidationError("diagonal observable needs a nonempty 1-d array")
        return cls(matrix=_freeze(np.diag(v).astype(complex)), diagonal=_freeze(v))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def __repr__(self) -> str:  # keep reprs short in error messages
        tag = "diag" if self.diagonal is not None else "dense"
        return f"HermitianOperator(dim={self.dim}, {tag})"


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Eigendecomposition with a deterministic ordering.

    Eigenvalues descend; each eigenvector's first nonzero component is made
    real and positive, so repeated runs produce identical output.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray  # columns

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T


def _fix_phases(vecs: np.ndarray) -> np.ndarray:
    v = np.array(vecs, copy=True)
    for k in range(v.shape[1]):
        col = v[:, k]
        mags = np.abs(col)
        nz = np.flatnonzero(mags > 1e-12 * mags.max())
        lead = col[nz[0]] if nz.size else 1.0
        phase = lead / abs(lead) if abs(lead) > 0 else 1.0
        v[:, k] = col * np.conj(phase)
    return v


def eig_hermitian(op: HermitianOperator) -> Spectrum:
    """Eigendecomposition of a Hermitian operator, descending eigenvalues."""
    w, v = np.linalg.eigh(op.matrix)
    w = w[::-1].copy()
    v = _fix_phases(v[:, ::-1])
    return Spectrum(eigenvalues=_freeze(w), eigenvectors=_freeze(v))


def matrix_fn(op: HermitianOperator, fn, *, positive_domain: bool = False) -> HermitianOperator:
    """Apply a scalar function to the spectrum: f(A) = V f(w) V^dag.

    ``positive_domain`` rejects non-positive eigenvalues up front, which is
    how the matrix logarithm guards against singular input.
    """
    if op.diagonal is not None:
        w = op.diagonal
        if positive_domain and np.any(w <= 0):
            raise DomainError("matrix function requires strictly positive spectrum")
        return HermitianOperator.from_diagonal(fn(w))
    spec = eig_hermitian(op)
    w = spec.eigenvalues
    if positive_domain and np.any(w <= 0):
        raise DomainError("matrix function requires strictly positive spectrum")
    fw = np.asarray(fn(w), dtype=float)
    m = (spec.eigenvectors * fw) @ spec.eigenvectors.conj().T
    return HermitianOperator.from_matrix(0.5 * (m + m.conj().T), atol=1e-10)


@dataclass(frozen=True, eq=False)
class DensityOperator:
    """A state: unit-trace positive operator, eagerly eigendecomposed.

    ``kind`` is either ``"quantum"`` or ``"classical-diagonal"``; the latter
    additionally stores the probability vector in outcome order.  All
    eigenvalues are clamped to at least ``EIG_FLOOR`` at construction and
    the state renormalized; ``clamped`` records whether that fired.
    """

    matrix: np.ndarray
    kind: str
    probs: np.ndarray | None
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    clamped: bool = False

    # -- constructors -------------------------------------------------

    @classmethod
    def quantum(cls, matrix, *, atol: float = 1e-9) -> "DensityOperator":
        m = _as_complex(matrix)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValidationError(f"density matrix must be square, got shape {m.shape}")
        if float(np.max(np.abs(m - m.conj().T))) > atol:
            raise ValidationError("density matrix is not Hermitian within tolerance")
        m = 0.5 * (m + m.conj().T)
        tr = float(np.real(np.trace(m)))
        if abs(tr - 1.0) > atol:
            raise ValidationError(f"density matrix trace {tr!r} is not 1")
        m = m / tr
        w, v = np.linalg.eigh(m)
        if w.min() < -1e-10:
            raise ValidationError(f"density matrix has negative eigenvalue {w.min():.3e}")
        w, clamped = _clamp_spectrum(w)
        v = _fix_phases(v[:, ::-1])
        w = w[::-1].copy()
        mat = (v * w) @ v.conj().T
        return cls(matrix=_freeze(mat), kind="quantum", probs=None,
                   eigenvalues=_freeze(w), eigenvectors=_freeze(v), clamped=clamped)

    @classmethod
    def classical(cls, probs, *, atol: float = 1e-9) -> "DensityOperator":
        p = np.asarray(probs, dtype=float)
        if p.ndim != 1 or p.size < 2:
            raise ValidationError("classical state needs at least two outcomes")
        if p.min() < -1e-10:
            raise ValidationError(f"negative probability {p.min():.3e}")
        total = float(p.sum())
        if abs(total - 1.0) > atol:
            raise ValidationError(f"probabilities sum to {total!r}, not 1")
        p = p / total
        p, clamped = _clamp_spectrum(p)
        order = np.argsort(p)[::-1]
        vecs = np.eye(p.size, dtype=complex)[:, order]
        return cls(matrix=_freeze(np.diag(p).astype(complex)), kind="classical-diagonal",
                   probs=_freeze(p), eigenvalues=_freeze(p[order]),
                   eigenvectors=_freeze(vecs), clamped=clamped)

    @classmethod
    def _from_spectrum(cls, eigenvalues, eigenvectors, *, probs=None) -> "DensityOperator":
        """Internal: assemble from a known clean eigensystem (already clamped)."""
        w = np.asarray(eigenvalues, dtype=float)
        v = _as_complex(eigenvectors)
        if probs is not None:
            p = np.asarray(probs, dtype=float)
            return cls(matrix=_freeze(np.diag(p).astype(complex)), kind="classical-diagonal",
                       probs=_freeze(p), eigenvalues=_freeze(w), eigenvectors=_freeze(v),
                       clamped=False)
        mat = (v * w) @ v.conj().T
        return cls(matrix=_freeze(mat), kind="quantum", probs=None,
                   eigenvalues=_freeze(w), eigenvectors=_freeze(v), clamped=False)

    # -- basic queries ------------------------------------------------

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def is_classical(self) -> bool:
        return self.probs is not None

    def same_state(self, other: "DensityOperator") -> bool:
        return self is other or (self.dim == other.dim
                                 and np.array_equal(self.matrix, other.matrix))

    def __repr__(self) -> str:
        return f"DensityOperator(dim={self.dim}, kind={self.kind!r})"


def _clamp_spectrum(w: np.ndarray) -> tuple[np.ndarray, bool]:
    clipped = np.maximum(w, EIG_FLOOR)
    clamped = bool(np.any(w < EIG_FLOOR))
    if clamped:
        logger.warning("eigenvalues below %.0e clamped and state renormalized", EIG_FLOOR)
    return clipped / clipped.sum(), clamped


# -- scalar functionals ----------------------------------------------


def _check_dims(a, b) -> None:
    if a.dim != b.dim:
        raise ValidationError(f"dimension mismatch: {a.dim} vs {b.dim}")


def expectation(rho: DensityOperator, obs: HermitianOperator) -> float:
    """tr(rho X).  Real by construction; the residual imaginary part
    (roundoff, < 1e-10) is discarded."""
    _check_dims(rho, obs)
    if rho.is_classical and obs.diagonal is not None:
        return float(rho.probs @ obs.diagonal)
    return float(np.real(np.trace(rho.matrix @ obs.matrix)))


def von_neumann_entropy(rho: DensityOperator) -> float:
    """-tr(rho ln rho) with the 0 ln 0 = 0 convention."""
    p = rho.probs if rho.is_classical else rho.eigenvalues
    p = p[p > 0]
    return float(-(p @ np.log(p)))


def relative_entropy(rho: DensityOperator, sigma: DensityOperator) -> float:
    """S(rho || sigma) = tr(rho ln rho - rho ln sigma).

    Both states carry strictly positive spectra (construction-time
    clamping), so the result is always finite.
    """
    _check_dims(rho, sigma)
    if rho.is_classical and sigma.is_classical:
        p, q = rho.probs, sigma.probs
        return float(p @ (np.log(p) - np.log(q)))
    s_rho = -von_neumann_entropy(rho)
    ln_sigma = (sigma.eigenvectors * np.log(sigma.eigenvalues)) @ sigma.eigenvectors.conj().T
    cross = float(np.real(np.trace(rho.matrix @ ln_sigma)))
    return s_rho - cross


def hs_inner(x: HermitianOperator, y: HermitianOperator) -> float:
    """Hilbert-Schmidt inner product tr(X Y), real for Hermitian arguments."""
    _check_dims(x, y)
    if x.diagonal is not None and y.diagonal is not None:
        return float(x.diagonal @ y.diagonal)
    # tr(X Y) = sum_ij X_ij Y_ji = sum_ij X_ij conj(Y_ij) for Hermitian Y
    return float(np.real(np.sum(x.matrix * np.conj(y.matrix))))


def _kmb_weights(p: np.ndarray) -> np.ndarray:
    """Logarithmic-mean weight matrix for the canonical correlation kernel.

    w_ij = (p_i - p_j) / (ln p_i - ln p_j), with the symmetric limit
    (p_i + p_j)/2 once the log gap drops below KMB_DEGENERATE_TOL.  The
    averaged limit agrees with the log mean to second order and keeps the
    weight matrix exactly symmetric.
    """
    lp = np.log(p)
    dlog = lp[:, None] - lp[None, :]
    near = np.abs(dlog) < KMB_DEGENERATE_TOL
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = (p[:, None] - p[None, :]) / dlog
    return np.where(near, 0.5 * (p[:, None] + p[None, :]), ratio)


def kmb_inner(sigma: DensityOperator, x: HermitianOperator, y: HermitianOperator) -> float:
    """Kubo-Mori (canonical correlation) inner product at the state sigma.

    Evaluates int_0^1 tr(sigma^nu X sigma^(1-nu) Y) dnu in sigma's
    eigenbasis, where the nu integral reduces to the logarithmic mean of
    eigenvalue pairs.  Symmetric, bilinear and positive definite as long
    as sigma has full rank, which clamping guarantees.
    """
    _check_dims(sigma, x)
    _check_dims(sigma, y)
    if sigma.is_classical and x.diagonal is not None and y.diagonal is not None:
        return float(np.sum(sigma.probs * x.diagonal * y.diagonal))
    v = sigma.eigenvectors
    xp = v.conj().T @ x.matrix @ v
    yp = v.conj().T @ y.matrix @ v
    w = _kmb_weights(sigma.eigenvalues)
    return float(np.real(np.sum(w * xp * np.conj(yp))))


# -- convenience constructors ----------------------------------------


def pauli_x() -> HermitianOperator:
    return HermitianOperator.from_matrix(np.array([[0, 1], [1, 0]], dtype=complex))


def pauli_y() -> HermitianOperator:
    return HermitianOperator.from_matrix(np.array([[0, -1j], [1j, 0]], dtype=complex))


def pauli_z() -> HermitianOperator:
    return HermitianOperator.from_diagonal([1.0, -1.0])


def uniform_state(dim: int) -> DensityOperator:
    """Maximally mixed quantum state 1/d."""
    return DensityOperator.quantum(np.eye(dim, dtype=complex) / dim)


def classical_state(probs) -> DensityOperator:
    return DensityOperator.classical(probs)


def bloch_state(r: float, theta: float, phi: float) -> DensityOperator:
    """Qubit state with Bloch vector (r, theta, phi); pure states refused."""
    if not 0.0 <= r < 1.0 - 1e-9:
        raise ValidationError(f"Bloch radius {r} outside [0, 1 - 1e-9)")
    n = np.array([np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta)])
    sx, sy, sz = pauli_x().matrix, pauli_y().matrix, pauli_z().matrix
    m = 0.5 * (np.eye(2, dtype=complex) + r * (n[0] * sx + n[1] * sy + n[2] * sz))
    return DensityOperator.quantum(m)
