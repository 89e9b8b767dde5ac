"""Dense (block) operators on a truncated monomial basis.

The matrix of an operator lives on C^(p*N) with block-major layout: row
index = p * position(l) + component.  Multilevel Toeplitz operators are
built directly from symbol coefficients (block (l, k) = coeff(l - k)), and
their matvec has a fast path through an n-dimensional circulant embedding.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .lattice import Box, MultiIndex, index_array, position, positions_of, strides
from .symbols import TorusSymbol, _next_pow2


@dataclass(eq=False)
class TruncatedOperator:
    """Finite section of an operator on the truncated (block) monomial basis.

    tag records provenance: "toeplitz" (with the defining symbol attached),
    "shift" (with its direction), "projector", or "general".  Algebra results
    always degrade to "general".
    """

    box: Box
    p: int
    matrix: np.ndarray
    tag: str = "general"
    symbol: TorusSymbol | None = None
    direction: int | None = None
    _spectrum: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        want = self.p * self.box.dim
        if self.matrix.shape != (want, want):
            raise ValueError(
                f"matrix shape {self.matrix.shape} does not match p*N = {want} "
                f"for box {self.box.caps} with p = {self.p}"
            )

    @property
    def n(self) -> int:
        return self.box.n

    @property
    def dim(self) -> int:
        return self.p * self.box.dim

    def block(self, l: MultiIndex, k: MultiIndex) -> np.ndarray:
        """The (p, p) block at basis rows l, columns k."""
        i, j = position(self.box, l), position(self.box, k)
        return self.matrix[i * self.p : (i + 1) * self.p, j * self.p : (j + 1) * self.p]

    def adjoint(self) -> "TruncatedOperator":
        return TruncatedOperator(self.box, self.p, self.matrix.conj().T.copy())

    @property
    def H(self) -> "TruncatedOperator":
        return self.adjoint()

    def restrict(self, subbox: Box) -> "TruncatedOperator":
        """Principal sub-block indexed by a sub-box of the same dimension."""
        if subbox.n != self.box.n or any(
            s > c for s, c in zip(subbox.caps, self.box.caps)
        ):
            raise ValueError(f"{subbox.caps} is not a sub-box of {self.box.caps}")
        pos = positions_of(self.box, index_array(subbox))
        rows = block_rows(pos, self.p)
        return TruncatedOperator(subbox, self.p, self.matrix[np.ix_(rows, rows)])

    def norm(self, method: str = "dense-svd", **kw) -> float:
        return operator_norm(self, method=method, **kw)

    def __add__(self, other):
        self._check_compatible(other)
        return TruncatedOperator(self.box, self.p, self.matrix + other.matrix)

    def __sub__(self, other):
        self._check_compatible(other)
        return TruncatedOperator(self.box, self.p, self.matrix - other.matrix)

    def __mul__(self, scalar):
        return TruncatedOperator(self.box, self.p, self.matrix * scalar)

    __rmul__ = __mul__

    def __matmul__(self, other):
        self._check_compatible(other)
        return TruncatedOperator(self.box, self.p, self.matrix @ other.matrix)

    def _check_compatible(self, other):
        if not isinstance(other, TruncatedOperator):
            raise TypeError(f"expected TruncatedOperator, got {type(other).__name__}")
        if other.box != self.box or other.p != self.p:
            raise ValueError("operators live on different truncations")


def block_rows(positions: np.ndarray, p: int) -> np.ndarray:
    """Expand monomial positions to matrix row indices in block-major layout."""
    positions = np.asarray(positions, dtype=np.int64)
    if p == 1:
        return positions
    return (positions[:, None] * p + np.arange(p)[None, :]).reshape(-1)


def toeplitz(sym: TorusSymbol, box: Box) -> TruncatedOperator:
    """Finite section of the Toeplitz operator with the given symbol.

    Block entry at (row l, column k) is coeff(l - k); frequencies outside
    the difference range [-d, d] never enter the section and are dropped.
    """
    if sym.n != box.n:
        raise ValueError(f"symbol dimension {sym.n} != box dimension {box.n}")
    n, p, N = box.n, sym.p, box.dim
    caps = np.asarray(box.caps, dtype=np.int64)
    diff_shape = tuple(2 * c + 1 for c in box.caps)
    table = np.zeros(diff_shape + (p, p), dtype=complex)
    for f, blk in sym.coefficients.items():
        fa = np.asarray(f, dtype=np.int64)
        if np.all(np.abs(fa) <= caps):
            table[tuple(fa + caps)] += blk
    flat = table.reshape(-1, p, p)
    dstr = np.ones(n, dtype=np.int64)
    for i in range(n - 2, -1, -1):
        dstr[i] = dstr[i + 1] * diff_shape[i + 1]
    idx = index_array(box)
    matrix = np.empty((p * N, p * N), dtype=complex)
    col_lin = (idx * dstr).sum(axis=1)
    row_lin = ((idx + caps) * dstr).sum(axis=1)
    for i in range(N):
        blocks = flat[row_lin[i] - col_lin]  # (N, p, p): diffs idx[i] - idx[:]
        matrix[i * p : (i + 1) * p, :] = blocks.transpose(1, 0, 2).reshape(p, N * p)
    return TruncatedOperator(box, p, matrix, tag="toeplitz", symbol=sym)


def shift(box: Box, direction: int, p: int = 1) -> TruncatedOperator:
    """Truncated coordinate shift: e_k -> e_(k + e_direction), top layer killed."""
    if direction < 0 or direction >= box.n:
        raise ValueError(f"direction {direction} out of range for dimension {box.n}")
    N = box.dim
    idx = index_array(box)
    keep = idx[:, direction] < box.caps[direction]
    src = np.nonzero(keep)[0]
    dst = src + strides(box)[direction]
    mat = np.zeros((N, N))
    mat[dst, src] = 1.0
    if p > 1:
        mat = np.kron(mat, np.eye(p))
    return TruncatedOperator(box, p, mat.astype(complex), tag="shift", direction=direction)


def layer_projector(box: Box, m: int, p: int = 1) -> TruncatedOperator:
    """Orthogonal projector onto monomials with every exponent below m.

    Rank is p * m^n while m - 1 stays within every cap; idempotent and
    self-adjoint exactly (diagonal 0/1 matrix).
    """
    if m < 0 or m > min(box.caps) + 1:
        raise ValueError(f"m = {m} outside [0, {min(box.caps) + 1}] for box {box.caps}")
    idx = index_array(box)
    diag = (idx < m).all(axis=1).astype(float)
    if p > 1:
        diag = np.repeat(diag, p)
    return TruncatedOperator(box, p, np.diag(diag).astype(complex), tag="projector")


def identity(box: Box, p: int = 1) -> TruncatedOperator:
    return TruncatedOperator(box, p, np.eye(p * box.dim, dtype=complex), tag="projector")


def _fast_spectrum(op: TruncatedOperator) -> tuple[np.ndarray, tuple[int, ...]]:
    """FFT of the multilevel circulant embedding of the operator's symbol."""
    caps = op.box.caps
    embed = tuple(_next_pow2(2 * c + 1) for c in caps)
    grid = np.zeros(embed + (op.p, op.p), dtype=complex)
    caps_arr = np.asarray(caps, dtype=np.int64)
    for f, blk in op.symbol.coefficients.items():
        fa = np.asarray(f, dtype=np.int64)
        if np.all(np.abs(fa) <= caps_arr):
            grid[tuple(fa % np.asarray(embed))] += blk
    return np.fft.fftn(grid, axes=tuple(range(op.box.n))), embed


def apply_fast(op: TruncatedOperator, v: np.ndarray) -> np.ndarray:
    """Toeplitz matvec through the circulant embedding, O(p^2 N log N).

    Embedding sizes are powers of two >= 2*d_i + 1, so no wraparound touches
    the box region and the result equals the dense matvec up to FFT roundoff.
    """
    if op.tag != "toeplitz" or op.symbol is None:
        raise ValueError("fast matvec requires a toeplitz-tagged operator with its symbol")
    v = np.asarray(v, dtype=complex)
    if v.shape != (op.dim,):
        raise ValueError(f"vector has shape {v.shape}, expected ({op.dim},)")
    if op._spectrum is None:
        # idempotent cache write; concurrent recomputation is safe
        op._spectrum = _fast_spectrum(op)
    spec, embed = op._spectrum
    n, p = op.box.n, op.p
    shape = tuple(c + 1 for c in op.box.caps)
    buf = np.zeros(embed + (p,), dtype=complex)
    region = tuple(slice(0, s) for s in shape)
    buf[region] = v.reshape(shape + (p,))
    vf = np.fft.fftn(buf, axes=tuple(range(n)))
    wf = np.einsum("...ab,...b->...a", spec, vf)
    w = np.fft.ifftn(wf, axes=tuple(range(n)))
    return w[region].reshape(-1)


def apply_dense(op: TruncatedOperator, v: np.ndarray) -> np.ndarray:
    """Reference matvec through the stored dense matrix."""
    return op.matrix @ np.asarray(v, dtype=complex)


def power_iteration_norm(
    matrix: np.ndarray,
    tol: float = 1e-8,
    max_iterations: int = 1000,
    seed: int | None = 0,
) -> tuple[float, float, int]:
    """Largest singular value by power iteration on A*A.

    Returns (estimate, last relative change, iterations used).
    """
    rng = np.random.default_rng(seed)
    m, k = matrix.shape
    if m == 0 or k == 0:
        return 0.0, 0.0, 0
    v = rng.standard_normal(k) + 1j * rng.standard_normal(k)
    v /= np.linalg.norm(v)
    sigma = 0.0
    res = np.inf
    it = 0
    for it in range(1, max_iterations + 1):
        w = matrix @ v
        new_sigma = float(np.linalg.norm(w))
        u = matrix.conj().T @ w
        nu = np.linalg.norm(u)
        if nu == 0:
            return new_sigma, 0.0, it
        res = abs(new_sigma - sigma) / max(new_sigma, 1e-300)
        sigma = new_sigma
        v = u / nu
        if res <= tol:
            break
    return sigma, res, it


def operator_norm(op, method: str = "dense-svd", tol: float = 1e-8, seed: int | None = 0) -> float:
    """Largest singular value of an operator or raw matrix."""
    matrix = op.matrix if isinstance(op, TruncatedOperator) else np.asarray(op)
    if matrix.size == 0:
        return 0.0
    if method == "dense-svd":
        return float(np.linalg.svd(matrix, compute_uv=False)[0])
    if method == "power-iteration":
        sigma, _, _ = power_iteration_norm(matrix, tol=tol, seed=seed)
        return sigma
    raise ValueError(f"unknown norm method {method!r}")


def compress(op, basis: np.ndarray, check_tol: float = 1e-10) -> np.ndarray:
    """Compression basis* . op . basis onto the span of orthonormal columns."""
    matrix = op.matrix if isinstance(op, TruncatedOperator) else np.asarray(op)
    basis = np.asarray(basis, dtype=complex)
    if basis.ndim != 2 or basis.shape[0] != matrix.shape[0]:
        raise ValueError(f"basis shape {basis.shape} incompatible with operator {matrix.shape}")
    q = basis.shape[1]
    gram = basis.conj().T @ basis
    if q and np.abs(gram - np.eye(q)).max() > check_tol:
        raise ValueError("basis columns are not orthonormal to the required tolerance")
    return basis.conj().T @ matrix @ basis
