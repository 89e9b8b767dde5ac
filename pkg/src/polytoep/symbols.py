"""Finitely supported Fourier representations of functions on the torus.

A symbol is a finite table of (block) Fourier coefficients together with a
sup-norm bound on whatever was truncated away (zero for exact trigonometric
polynomials).  All downstream certificates widen their tolerances by that
tail bound, so the arithmetic stays finite without silently pretending the
truncation is exact.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .lattice import Box, MultiIndex


def _next_pow2(x: int) -> int:
    return 1 << max(0, int(x) - 1).bit_length() if x > 1 else 1


def _as_block(value, p: int) -> np.ndarray:
    blk = np.asarray(value, dtype=complex)
    if blk.ndim == 0:
        blk = blk.reshape(1, 1)
    if blk.shape != (p, p):
        raise ValueError(f"coefficient block has shape {blk.shape}, expected ({p}, {p})")
    return blk


def _spectral(blk: np.ndarray) -> float:
    if blk.size == 1:
        return float(abs(blk.reshape(-1)[0]))
    return float(np.linalg.norm(blk, 2))


@dataclass(eq=False)
class TorusSymbol:
    """Coefficient table of a (block) function on the n-torus.

    coefficients maps a frequency (tuple of n ints, negatives allowed) to a
    (p, p) complex block; scalars are stored as 1x1 blocks.  tail_bound is a
    sup-norm bound on the discarded remainder.
    """

    n: int
    p: int
    coefficients: dict[MultiIndex, np.ndarray]
    tail_bound: float = 0.0

    def __post_init__(self):
        if self.n < 1 or self.p < 1:
            raise ValueError("need n >= 1 and p >= 1")
        if self.tail_bound < 0:
            raise ValueError("tail_bound must be nonnegative")

    @property
    def support(self) -> list[MultiIndex]:
        return list(self.coefficients.keys())

    def freq_range(self) -> tuple[tuple[int, ...], tuple[int, ...]]:
        """(per-variable min, per-variable max) over the support; zeros if empty."""
        if not self.coefficients:
            z = (0,) * self.n
            return z, z
        arr = np.array(list(self.coefficients.keys()), dtype=int)
        return tuple(arr.min(axis=0)), tuple(arr.max(axis=0))

    def is_analytic(self) -> bool:
        return all(min(k) >= 0 for k in self.coefficients) if self.coefficients else True

    def sup_norm_estimate(self) -> float:
        """Triangle-inequality bound sum ||coeff(k)|| + tail_bound."""
        return sum(_spectral(b) for b in self.coefficients.values()) + self.tail_bound

    def coeff(self, k: MultiIndex) -> np.ndarray:
        """Coefficient block at frequency k (zero block if absent)."""
        blk = self.coefficients.get(tuple(k))
        if blk is None:
            return np.zeros((self.p, self.p), dtype=complex)
        return blk

    def evaluate(self, point) -> np.ndarray:
        """Pointwise value sum_k coeff(k) * exp(i k.theta) as a (p, p) block."""
        theta = np.asarray(point, dtype=float)
        if theta.shape != (self.n,):
            raise ValueError(f"point must have {self.n} angles")
        out = np.zeros((self.p, self.p), dtype=complex)
        for k, blk in self.coefficients.items():
            out += blk * np.exp(1j * float(np.dot(k, theta)))
        return out


def from_coefficients(n: int, p: int, entries) -> TorusSymbol:
    """Build a symbol from (frequency, block) pairs; duplicates are rejected."""
    coeffs: dict[MultiIndex, np.ndarray] = {}
    for k, value in entries:
        key = tuple(int(x) for x in k)
        if len(key) != n:
            raise ValueError(f"frequency {key} has length {len(key)}, expected {n}")
        if key in coeffs:
            raise ValueError(f"duplicate frequency {key}")
        coeffs[key] = _as_block(value, p)
    return TorusSymbol(n=n, p=p, coefficients=coeffs, tail_bound=0.0)


def default_grid(sym: TorusSymbol) -> tuple[int, ...]:
    """Per-variable grid size: next power of two >= twice the span plus one."""
    lo, hi = sym.freq_range()
    return tuple(_next_pow2(2 * (h - l) + 1) for l, h in zip(lo, hi))


def evaluate_grid(sym: TorusSymbol, grid_sizes) -> np.ndarray:
    """Values on the uniform grid theta_t = 2*pi*t/G, shape G1 x ... x Gn x p x p.

    Exact (to machine precision) for trigonometric polynomials: coefficients
    are placed at their aliased bins and inverted with an FFT.
    """
    grid = tuple(int(g) for g in grid_sizes)
    if len(grid) != sym.n or any(g < 1 for g in grid):
        raise ValueError(f"need {sym.n} positive grid sizes, got {grid_sizes}")
    placed = np.zeros(grid + (sym.p, sym.p), dtype=complex)
    for k, blk in sym.coefficients.items():
        bin_idx = tuple(ki % g for ki, g in zip(k, grid))
        placed[bin_idx] += blk
    vals = np.fft.ifftn(placed, axes=tuple(range(sym.n)))
    return vals * np.prod(grid)


def coefficients_from_samples(
    samples: np.ndarray,
    support: Box,
    p: int = 1,
    tail_bound: float = 0.0,
) -> TorusSymbol:
    """Recover coefficients on the symmetric frequency box |k_i| <= support.caps[i].

    samples holds values on the uniform grid (shape G1 x ... x Gn, or with a
    trailing (p, p) for block symbols).  Each grid size must satisfy
    G_i >= 2*caps_i + 1 so the declared frequencies occupy distinct bins.
    """
    n = support.n
    samples = np.asarray(samples, dtype=complex)
    if p == 1 and samples.ndim == n:
        samples = samples[..., None, None]
    if samples.ndim != n + 2 or samples.shape[-2:] != (p, p):
        raise ValueError(f"samples must have shape G1..G{n} (x {p} x {p})")
    grid = samples.shape[:n]
    for g, s in zip(grid, support.caps):
        if g < 2 * s + 1:
            raise ValueError(
                f"aliasing: grid size {g} cannot resolve frequencies |k| <= {s} "
                f"(need at least {2 * s + 1})"
            )
    spec = np.fft.fftn(samples, axes=tuple(range(n))) / np.prod(grid)
    coeffs: dict[MultiIndex, np.ndarray] = {}
    for k in itertools.product(*(range(-s, s + 1) for s in support.caps)):
        bin_idx = tuple(ki % g for ki, g in zip(k, grid))
        coeffs[k] = np.array(spec[bin_idx])
    return TorusSymbol(n=n, p=p, coefficients=coeffs, tail_bound=float(tail_bound))


def multiply(a: TorusSymbol, b: TorusSymbol) -> TorusSymbol:
    """Coefficient convolution; realizes the pointwise product of symbols.

    Supports add (Minkowski sum), blocks compose left-to-right, and the tail
    bound is propagated through the triangle inequality.
    """
    if a.n != b.n:
        raise ValueError(f"dimension mismatch: {a.n} vs {b.n}")
    if a.p != b.p:
        raise ValueError(f"block size mismatch: {a.p} vs {b.p}")
    coeffs: dict[MultiIndex, np.ndarray] = {}
    for ka, blka in a.coefficients.items():
        for kb, blkb in b.coefficients.items():
            key = tuple(x + y for x, y in zip(ka, kb))
            prod = blka @ blkb
            if key in coeffs:
                coeffs[key] = coeffs[key] + prod
            else:
                coeffs[key] = prod
    # ||ab - a_tr b_tr||_inf <= ||a_tr|| tail_b + tail_a ||b_tr|| + tail_a tail_b
    sup_a = sum(_spectral(x) for x in a.coefficients.values())
    sup_b = sum(_spectral(x) for x in b.coefficients.values())
    tail = sup_a * b.tail_bound + a.tail_bound * sup_b + a.tail_bound * b.tail_bound
    return TorusSymbol(n=a.n, p=a.p, coefficients=coeffs, tail_bound=tail)


def add(a: TorusSymbol, b: TorusSymbol) -> TorusSymbol:
    """Coefficientwise sum (tail bounds add)."""
    if a.n != b.n or a.p != b.p:
        raise ValueError("dimension or block size mismatch")
    coeffs = {k: np.array(v) for k, v in a.coefficients.items()}
    for k, v in b.coefficients.items():
        coeffs[k] = coeffs[k] + v if k in coeffs else np.array(v)
    return TorusSymbol(a.n, a.p, coeffs, a.tail_bound + b.tail_bound)


def blaschke_factor(a: complex, degree: int) -> TorusSymbol:
    """Degree-``degree`` truncation of the disc automorphism (z - a)/(1 - conj(a) z).

    Coefficients: -a at z^0 and (1 - |a|^2) conj(a)^(k-1) at z^k, k >= 1.
    The dropped tail has sup norm (1 - |a|^2) |a|^degree / (1 - |a|).
    """
    a = complex(a)
    if abs(a) >= 1:
        raise ValueError(f"Blaschke parameter must satisfy |a| < 1, got |a| = {abs(a)}")
    if degree < 0:
        raise ValueError("truncation degree must be nonnegative")
    entries: list[tuple[MultiIndex, complex]] = []
    if a != 0:
        entries.append(((0,), -a))
    r = 1.0 - abs(a) ** 2
    conj_pow = 1.0 + 0j
    for k in range(1, degree + 1):
        c = r * conj_pow
        if c != 0:
            entries.append(((k,), c))
        conj_pow *= a.conjugate()
    sym = from_coefficients(1, 1, entries)
    if a == 0:
        tail = 1.0 if degree == 0 else 0.0
    else:
        tail = r * abs(a) ** degree / (1.0 - abs(a))
    return TorusSymbol(1, 1, sym.coefficients, tail)


def product_inner(factors: list[TorusSymbol]) -> TorusSymbol:
    """Tensor product of one-variable analytic symbols, factor i in variable i."""
    n = len(factors)
    if n < 1:
        raise ValueError("need at least one factor")
    lifted = []
    for i, f in enumerate(factors):
        if f.n != 1:
            raise ValueError(f"factor {i} is not one-variable (n = {f.n})")
        if not f.is_analytic():
            raise ValueError(f"factor {i} has negative frequencies; inner factors are analytic")
        coeffs = {}
        for (k,), blk in f.coefficients.items():
            key = tuple(k if j == i else 0 for j in range(n))
            coeffs[key] = np.array(blk)
        lifted.append(TorusSymbol(n, f.p, coeffs, f.tail_bound))
    out = lifted[0]
    for f in lifted[1:]:
        out = multiply(out, f)
    return out


@dataclass
class InnerCertificate:
    """Grid check that a symbol is inner (unimodular / isometry-valued).

    tolerance is the effective bound: the requested tolerance plus the tail
    allowance implied by the symbol's truncation; the certificate passes iff
    max_deviation <= tolerance.
    """

    grid_sizes: tuple[int, ...]
    max_deviation: float
    tolerance: float
    requested_tol: float
    tail_allowance: float
    worst_point: tuple[float, ...]

    @property
    def passed(self) -> bool:
        return self.max_deviation <= self.tolerance


def is_inner(sym: TorusSymbol, grid_sizes=None, tol: float = 1e-10) -> InnerCertificate:
    """Certify |theta| = 1 (scalar) or Theta*Theta = I (block) on a torus grid."""
    if not sym.is_analytic():
        raise ValueError("inner symbols are analytic: support must lie in Z_+^n")
    grid = default_grid(sym) if grid_sizes is None else tuple(int(g) for g in grid_sizes)
    vals = evaluate_grid(sym, grid)
    if sym.p == 1:
        dev = np.abs(np.abs(vals[..., 0, 0]) - 1.0)
        allowance = sym.tail_bound
    else:
        prods = np.einsum("...ba,...bc->...ac", vals.conj(), vals)
        prods = prods - np.eye(sym.p)
        dev = np.linalg.norm(prods, ord=2, axis=(-2, -1))
        allowance = sym.tail_bound * (2.0 + sym.tail_bound)
    flat = int(np.argmax(dev))
    worst = np.unravel_index(flat, dev.shape)
    point = tuple(2.0 * np.pi * t / g for t, g in zip(worst, grid))
    return InnerCertificate(
        grid_sizes=grid,
        max_deviation=float(dev.flat[flat]),
        tolerance=tol + allowance,
        requested_tol=tol,
        tail_allowance=allowance,
        worst_point=point,
    )


@dataclass
class InvertibilityReport:
    invertible: bool
    min_abs_det: float
    delta: float
    grid_sizes: tuple[int, ...]


def is_invertible_ae(sym: TorusSymbol, grid_sizes=None, delta: float = 1e-8) -> InvertibilityReport:
    """Dense-grid surrogate for a.e. invertibility: min |det| over the grid vs delta."""
    grid = default_grid(sym) if grid_sizes is None else tuple(int(g) for g in grid_sizes)
    vals = evaluate_grid(sym, grid)
    dets = np.linalg.det(vals)
    min_det = float(np.abs(dets).min())
    return InvertibilityReport(
        invertible=min_det >= delta,
        min_abs_det=min_det,
        delta=delta,
        grid_sizes=grid,
    )


def allclose(a: TorusSymbol, b: TorusSymbol, tol: float = 1e-12) -> bool:
    """Coefficientwise comparison treating absent frequencies as zero."""
    if a.n != b.n or a.p != b.p:
        return False
    for k in set(a.coefficients) | set(b.coefficients):
        if _spectral(a.coeff(k) - b.coeff(k)) > tol:
            return False
    return True


def max_coeff_difference(a: TorusSymbol, b: TorusSymbol) -> float:
    """Largest block-norm discrepancy over the union of supports."""
    out = 0.0
    for k in set(a.coefficients) | set(b.coefficients):
        out = max(out, _spectral(a.coeff(k) - b.coeff(k)))
    return out


def random_symbol(
    n: int,
    span: int,
    p: int = 1,
    rng: np.random.Generator | None = None,
    scale: float = 1.0,
) -> TorusSymbol:
    """Random trig polynomial with full support on |k_i| <= span, iid complex Gaussian blocks."""
    rng = np.random.default_rng() if rng is None else rng
    coeffs = {}
    for k in itertools.product(*([range(-span, span + 1)] * n)):
        blk = scale * (rng.standard_normal((p, p)) + 1j * rng.standard_normal((p, p)))
        coeffs[k] = blk
    return TorusSymbol(n, p, coeffs, 0.0)
