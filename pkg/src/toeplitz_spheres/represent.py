"""Truncated matrix representations of algebra elements.

The window is ``W = ({0..N} | {inf})^n`` in lexicographic order with ``inf``
last.  A shift ``(z, x)`` moves the finite coordinates of a basis unit ``v``
to ``v + x`` and multiplies by the coefficient at ``v``; on infinite
coordinates it contributes the phase ``exp(i x_j phi_j)``, and the global
circle coordinate contributes ``exp(i z theta)``.  Transitions that leave the
window are dropped, so only columns far enough from the cutoff are exact.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from .algebra import AlgebraElement
from .coeffs import INF

HERMITIAN_TOL = 1e-10
JACOBI_TOL = 1e-12
POWER_ITERS = 200
POWER_TOL = 1e-12

TWO_PI = 2 * math.pi


class NotHermitian(ValueError):
    pass


@dataclass(frozen=True)
class ReprConfig:
    n: int
    N: int
    q: float = 0.5
    theta: float = 0.0
    phi: tuple = field(default=())

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if self.N < 1:
            raise ValueError("window cutoff N must be >= 1")
        if not 0 < self.q < 1:
            raise ValueError("q must lie in (0, 1)")
        phi = tuple(float(v) for v in self.phi) if self.phi else (0.0,) * self.n
        if len(phi) != self.n:
            raise ValueError(f"need {self.n} phase angles, got {len(phi)}")
        for a in (self.theta,) + phi:
            if not 0 <= a < TWO_PI:
                raise ValueError(f"angle {a} outside [0, 2pi)")
        object.__setattr__(self, "phi", phi)
        object.__setattr__(self, "theta", float(self.theta))

    @property
    def dim(self) -> int:
        return (self.N + 2) ** self.n

    def units(self) -> np.ndarray:
        """Window units, one per row, in index order (``inf`` as ``np.inf``)."""
        values = [float(v) for v in range(self.N + 1)] + [INF]
        return np.array(list(itertools.product(values, repeat=self.n)), dtype=float).reshape(-1, self.n)

    def index(self, w: Sequence) -> int:
        idx = 0
        for v in w:
            d = self.N + 1 if v == INF else int(v)
            if not 0 <= d <= self.N + 1:
                raise IndexError(f"unit {tuple(w)} outside the window")
            idx = idx * (self.N + 2) + d
        return idx


@dataclass(frozen=True)
class TruncatedMatrix:
    matrix: sp.csr_matrix
    cfg: ReprConfig

    def toarray(self) -> np.ndarray:
        return self.matrix.toarray()

    @property
    def shape(self):
        return self.matrix.shape

    def _other(self, other):
        if isinstance(other, TruncatedMatrix):
            if other.cfg.dim != self.cfg.dim:
                raise ValueError("matrices come from different windows")
            return other.matrix
        return other

    def __matmul__(self, other):
        return TruncatedMatrix((self.matrix @ self._other(other)).tocsr(), self.cfg)

    def __add__(self, other):
        return TruncatedMatrix((self.matrix + self._other(other)).tocsr(), self.cfg)

    def __sub__(self, other):
        return TruncatedMatrix((self.matrix - self._other(other)).tocsr(), self.cfg)

    def __mul__(self, c):
        return TruncatedMatrix((self.matrix * c).tocsr(), self.cfg)

    __rmul__ = __mul__

    @property
    def H(self) -> "TruncatedMatrix":
        return TruncatedMatrix(self.matrix.conj().T.tocsr(), self.cfg)

    def columns(self, cols) -> np.ndarray:
        return self.matrix[:, cols].toarray()


def identity(cfg: ReprConfig) -> TruncatedMatrix:
    return TruncatedMatrix(sp.identity(cfg.dim, dtype=complex, format="csr"), cfg)


def to_matrix(f: AlgebraElement, cfg: ReprConfig) -> TruncatedMatrix:
    """Matrix of ``f`` on the window; entry ``(range, source)``."""
    if f.n != cfg.n:
        raise ValueError(f"element has n={f.n}, config has n={cfg.n}")
    W = cfg.units()
    inf_mask = np.isinf(W)
    base = cfg.N + 2
    src = np.arange(W.shape[0])
    on_face = np.ones(W.shape[0], dtype=bool)
    for j in f.face:
        on_face &= inf_mask[:, j - 1]
    rows, cols, vals = [], [], []
    for (z, x), p in f.terms.items():
        coeff = p.eval_grid(W, cfg.q) * np.exp(1j * z * cfg.theta)
        keep = on_face & (coeff != 0)
        tgt = np.zeros(W.shape[0], dtype=np.int64)
        for j in range(cfg.n):
            col = W[:, j]
            fin = ~inf_mask[:, j]
            d = np.where(fin, np.where(fin, col, 0) + x[j], cfg.N + 1)
            keep &= (d >= 0) & (d <= cfg.N + 1) & ~(fin & (d > cfg.N))
            coeff = coeff * np.where(fin, 1.0, np.exp(1j * x[j] * cfg.phi[j]))
            tgt = tgt * base + np.clip(d, 0, cfg.N + 1).astype(np.int64)
        rows.append(tgt[keep])
        cols.append(src[keep])
        vals.append(coeff[keep])
    if rows:
        r, c, v = np.concatenate(rows), np.concatenate(cols), np.concatenate(vals)
    else:
        r = c = np.zeros(0, dtype=np.int64)
        v = np.zeros(0, dtype=complex)
    m = sp.coo_matrix((v, (r, c)), shape=(cfg.dim, cfg.dim), dtype=complex).tocsr()
    m.sum_duplicates()
    m.eliminate_zeros()
    return TruncatedMatrix(m, cfg)


def interior_mask(cfg: ReprConfig, B: int) -> np.ndarray:
    """Indices of units whose finite coordinates lie in ``[B, N - B]``."""
    if B < 0:
        raise ValueError("bandwidth must be >= 0")
    if 2 * B > cfg.N:
        raise ValueError(f"bandwidth {B} exceeds N/2 = {cfg.N / 2}")
    W = cfg.units()
    ok = np.isinf(W) | ((W >= B) & (W <= cfg.N - B))
    return np.flatnonzero(ok.all(axis=1))


def finite_mask(cfg: ReprConfig) -> np.ndarray:
    """Indices of units with no infinite coordinate."""
    return np.flatnonzero(~np.isinf(cfg.units()).any(axis=1))


def column_residual(a, b, cols) -> float:
    """Largest entry of ``a - b`` over the given columns."""
    am = a.matrix if isinstance(a, TruncatedMatrix) else sp.csr_matrix(a)
    bm = b.matrix if isinstance(b, TruncatedMatrix) else sp.csr_matrix(b)
    d = (am - bm)[:, cols]
    return float(abs(d).max()) if d.nnz else 0.0


# ---------------------------------------------------------------------------
# dense linear algebra


def _dense(M) -> np.ndarray:
    if isinstance(M, TruncatedMatrix):
        return M.toarray()
    if sp.issparse(M):
        return M.toarray()
    return np.asarray(M, dtype=complex)


def hermitian_spectrum(M, tol: float = JACOBI_TOL, max_sweeps: int = 100) -> np.ndarray:
    """Sorted eigenvalues of a Hermitian matrix by cyclic Jacobi rotations.

    Sweeps run until the off-diagonal Frobenius norm drops below ``tol``.
    """
    A = _dense(M).astype(complex, copy=True)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("expected a square matrix")
    if A.size and np.max(np.abs(A - A.conj().T)) > HERMITIAN_TOL:
        raise NotHermitian("matrix is not Hermitian")
    A = (A + A.conj().T) / 2
    m = A.shape[0]
    for _ in range(max_sweeps):
        off = np.sqrt(max(np.sum(np.abs(A) ** 2) - np.sum(np.abs(np.diag(A)) ** 2), 0.0))
        if off < tol:
            break
        for p in range(m - 1):
            for r in range(p + 1, m):
                apr = A[p, r]
                mag = abs(apr)
                if mag < 1e-300:
                    continue
                phase = apr / mag
                tau = (A[r, r].real - A[p, p].real) / (2 * mag)
                t = (1.0 if tau >= 0 else -1.0) / (abs(tau) + math.sqrt(1 + tau * tau))
                c = 1 / math.sqrt(1 + t * t)
                s = t * c
                # U acts on columns (p, r): first make A[p, r] real, then rotate
                U = np.array([[c, s], [-s * phase.conjugate(), c * phase.conjugate()]], dtype=complex)
                idx = [p, r]
                A[:, idx] = A[:, idx] @ U
                A[idx, :] = U.conj().T @ A[idx, :]
                A[p, r] = A[r, p] = 0
    else:
        raise RuntimeError("Jacobi iteration did not converge")
    return np.sort(np.diag(A).real)


def op_norm_estimate(M, iters: int = POWER_ITERS, tol: float = POWER_TOL) -> float:
    """Operator norm by power iteration on ``M^H M``."""
    A = M.matrix if isinstance(M, TruncatedMatrix) else (M if sp.issparse(M) else np.asarray(M))
    dim = A.shape[1]
    if dim == 0:
        return 0.0
    v = np.ones(dim, dtype=complex) + 0.1 * np.arange(dim) / dim
    v /= np.linalg.norm(v)
    lam = 0.0
    for _ in range(iters):
        u = A.conj().T @ (A @ v)
        nu = np.linalg.norm(u)
        if nu == 0:
            return 0.0
        new = float(np.real(np.vdot(v, u)))
        v = u / nu
        if lam and abs(new - lam) <= tol * abs(new):
            lam = new
            break
        lam = new
    return math.sqrt(max(lam, 0.0))


def gram_singular_values(matrices: Sequence, mask=None) -> np.ndarray:
    """Singular values of the stacked, flattened (column-masked) matrices.

    Their squares are the eigenvalues of the trace-inner-product Gram matrix.
    """
    if not matrices:
        raise ValueError("need at least one matrix")
    vecs = []
    for M in matrices:
        A = M.matrix if isinstance(M, TruncatedMatrix) else sp.csr_matrix(np.asarray(M))
        if mask is not None:
            A = A[:, mask]
        vecs.append(np.asarray(A.toarray()).ravel())
    return np.linalg.svd(np.array(vecs), compute_uv=False)


def gram_rank(matrices: Sequence, mask=None, tol: float = 1e-9) -> int:
    """Numerical rank of the trace-inner-product Gram matrix of masked matrices.

    ``mask`` selects columns.  The Gram matrix is ``V V^*`` for the stacked,
    flattened matrices ``V``, so its rank is read off the singular values of
    ``V`` (those above ``tol`` times the largest).  Working with ``V`` avoids
    squaring both the tolerance and the round-off.
    """
    s = gram_singular_values(matrices, mask)
    if s.size == 0 or s[0] == 0:
        return 0
    return int(np.sum(s > tol * s[0]))


# ---------------------------------------------------------------------------
# export


def _num(v: float) -> str:
    v = float(v)
    if v == 0:
        v = 0.0  # drop negative zero
    return format(v, ".17g")


def export_matrix(M: TruncatedMatrix) -> str:
    """Text export: a header line then ``row col re im`` per nonzero, rows sorted."""
    cfg = M.cfg
    head = (
        f"%%GroupoidMatrix n={cfg.n} N={cfg.N} theta={_num(cfg.theta)} "
        f"phi={','.join(_num(p) for p in cfg.phi)}"
    )
    coo = M.matrix.tocoo()
    order = np.lexsort((coo.col, coo.row))
    lines = [head]
    for k in order:
        v = coo.data[k]
        lines.append(f"{coo.row[k]} {coo.col[k]} {_num(v.real)} {_num(v.imag)}")
    return "\n".join(lines) + "\n"
