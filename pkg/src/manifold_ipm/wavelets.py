"""Daubechies scaling/wavelet functions and the tensor-product basis on R^p.

The filter is obtained by spectral factorisation of the Daubechies
polynomial; the scaling function is tabulated on the dyadic grid of spacing
``2**-depth`` by solving for its integer values and refining with the
two-scale relation.  Between grid points functions are evaluated by linear
interpolation (piecewise constant for Haar, whose scaling function is a step).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy.integrate import trapezoid
from scipy.special import comb

from .errors import InvalidParameterError

__all__ = [
    "TensorIndex",
    "WaveletFamily",
    "build_family",
    "daubechies_filter",
    "default_order",
    "eval_tensor",
    "active_indices",
    "level_types",
    "filter_residuals",
    "partition_of_unity_error",
    "two_scale_error",
    "gram_errors",
]


class TensorIndex(NamedTuple):
    """Address of one basis function: level ``j``, type ``l``, translation ``w``.

    ``l`` ranges over ``1..2**p``; bit ``i`` of ``l`` (least significant
    first) selects the wavelet (1) or scaling (0) factor on axis ``i``.
    ``l == 2**p`` is the pure scaling block and only exists at ``j == 0``.
    """

    j: int
    l: int
    w: tuple[int, ...]

    @property
    def dim(self) -> int:
        return len(self.w)

    def is_valid(self) -> bool:
        p = len(self.w)
        if p < 1 or self.j < 0 or not 1 <= self.l <= 2**p:
            return False
        return not (self.j >= 1 and self.l == 2**p)


def level_types(j: int, p: int) -> list[int]:
    """Types ``l`` present at level ``j`` in dimension ``p``."""
    top = 2**p if j == 0 else 2**p - 1
    return list(range(1, top + 1))


def type_digits(l: int, p: int) -> tuple[int, ...]:
    # l == 2**p has all low bits clear, i.e. scaling on every axis
    return tuple((l >> i) & 1 for i in range(p))


def daubechies_filter(order: int) -> np.ndarray:
    """Low-pass refinement filter of Daubechies-``order`` (length ``2*order``).

    Roots of the Daubechies polynomial are mapped to ``z`` and the ones inside
    the unit disk retained; the resulting coefficients are reversed so the
    filter matches the usual extremal-phase tables (largest tap first for
    db2).
    """
    if order < 1:
        raise InvalidParameterError(f"wavelet order must be >= 1, got {order}")
    N = order
    poly = np.poly1d([1.0])
    if N > 1:
        # P(y) = sum_k C(N-1+k, k) y^k ; np.roots wants highest power first
        coeffs = [comb(N - 1 + k, k, exact=True) for k in range(N)][::-1]
        yroots = np.roots(np.asarray(coeffs, dtype=float))
        for y in yroots:
            zs = np.roots([1.0, -(2.0 - 4.0 * y), 1.0])
            z = zs[np.argmin(np.abs(zs))]
            poly = poly * np.poly1d([1.0, -z]) / (1.0 - z)
    poly = poly * np.poly1d([0.5, 0.5]) ** N
    h = np.real(poly.coeffs[::-1]) * math.sqrt(2.0)
    h = h[::-1].copy()
    # remove the O(eps) drift of root finding from the DC gain
    return h * (math.sqrt(2.0) / h.sum())


def _integer_values(h: np.ndarray) -> np.ndarray:
    """Scaling function at the integers 0..2N-1, normalised to sum 1."""
    L = len(h)
    support = L - 1
    vals = np.zeros(support + 1)
    if support == 1:
        vals[0] = 1.0
        return vals
    inner = np.arange(1, support)
    A = np.zeros((support - 1, support - 1))
    for r, k in enumerate(inner):
        for c, i in enumerate(inner):
            m = 2 * k - i
            if 0 <= m < L:
                A[r, c] = math.sqrt(2.0) * h[m]
    # (A - I) v = 0 with sum(v) = 1, solved in the least-squares sense
    M = np.vstack([A - np.eye(support - 1), np.ones((1, support - 1))])
    rhs = np.zeros(support)
    rhs[-1] = 1.0
    v, *_ = np.linalg.lstsq(M, rhs, rcond=None)
    vals[1:support] = v
    return vals


def _refine(h: np.ndarray, coarse: np.ndarray, level: int) -> np.ndarray:
    """One dyadic refinement: values on spacing 2**-level from 2**-(level-1)."""
    support = len(h) - 1
    size = support * 2**level + 1
    half = 2 ** (level - 1)
    out = np.zeros(size)
    i = np.arange(size)
    for m, hm in enumerate(h):
        src = i - m * half
        ok = (src >= 0) & (src < len(coarse))
        out[ok] += hm * coarse[src[ok]]
    return math.sqrt(2.0) * out


@dataclass(frozen=True)
class WaveletFamily:
    """Tabulated Daubechies scaling and wavelet functions.

    ``scaling_table[i]`` and ``wavelet_table[i]`` hold the function values at
    ``x = i * 2**-cascade_depth`` for ``x`` in ``[0, 2*order - 1]``.
    """

    order: int
    low_pass: np.ndarray
    cascade_depth: int
    scaling_table: np.ndarray = field(repr=False)
    wavelet_table: np.ndarray = field(repr=False)

    @property
    def support(self) -> int:
        """Length of the support interval ``[0, 2N-1]``."""
        return 2 * self.order - 1

    @property
    def high_pass(self) -> np.ndarray:
        h = self.low_pass
        k = np.arange(len(h))
        return (-1.0) ** k * h[::-1]

    def _lookup(self, table: np.ndarray, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        scale = float(2**self.cascade_depth)
        pos = x * scale
        inside = (x >= 0.0) & (x < self.support)
        pos = np.where(inside, pos, 0.0)
        i = np.floor(pos).astype(np.int64)
        if self.order == 1:
            return np.where(inside, table[i], 0.0)
        i = np.minimum(i, len(table) - 2)
        frac = pos - i
        val = table[i] * (1.0 - frac) + table[i + 1] * frac
        return np.where(inside, val, 0.0)

    def phi(self, x) -> np.ndarray:
        """Scaling function evaluated at ``x`` (array-like)."""
        return self._lookup(self.scaling_table, x)

    def psi(self, x) -> np.ndarray:
        """Mother wavelet evaluated at ``x`` (array-like)."""
        return self._lookup(self.wavelet_table, x)

    def factor(self, digit: int, x) -> np.ndarray:
        return self.psi(x) if digit else self.phi(x)

    def support_box(self, index: TensorIndex) -> tuple[np.ndarray, np.ndarray]:
        w = np.asarray(index.w, dtype=float)
        step = 2.0 ** -index.j
        return w * step, (w + self.support) * step


def default_order(eta_max: float) -> int:
    """Daubechies order used when an experiment does not fix one."""
    return int(math.ceil(eta_max)) + 3


def build_family(order: int, cascade_depth: int = 12) -> WaveletFamily:
    """Build a Daubechies-``order`` family tabulated to depth ``cascade_depth``.

    Raises
    ------
    InvalidParameterError
        If ``order < 1`` or ``cascade_depth < 4``.
    """
    if order < 1:
        raise InvalidParameterError(f"wavelet order must be >= 1, got {order}")
    if cascade_depth < 4:
        raise InvalidParameterError(
            f"cascade depth must be >= 4, got {cascade_depth}"
        )
    h = daubechies_filter(order)
    table = _integer_values(h)
    for level in range(1, cascade_depth + 1):
        table = _refine(h, table, level)
    g = (-1.0) ** np.arange(len(h)) * h[::-1]
    # psi(x) = sqrt2 sum_k g_k phi(2x - k); 2x - k lands on the same grid
    size = len(table)
    i = np.arange(size)
    step = 2**cascade_depth
    wav = np.zeros(size)
    for k, gk in enumerate(g):
        src = 2 * i - k * step
        ok = (src >= 0) & (src < size)
        wav[ok] += gk * table[src[ok]]
    wav *= math.sqrt(2.0)
    table.setflags(write=False)
    wav.setflags(write=False)
    h.setflags(write=False)
    return WaveletFamily(order, h, cascade_depth, table, wav)


def eval_tensor(family: WaveletFamily, index: TensorIndex, x) -> float | np.ndarray:
    """Value of the tensor basis function ``index`` at point(s) ``x``.

    ``x`` is a point of shape ``(p,)`` or a batch of shape ``(k, p)``.
    """
    pts = np.asarray(x, dtype=float)
    single = pts.ndim == 1
    pts = np.atleast_2d(pts)
    p = pts.shape[1]
    digits = type_digits(index.l, p)
    scale = 2.0**index.j
    out = np.full(len(pts), 2.0 ** (index.j * p / 2.0))
    for axis in range(p):
        out = out * family.factor(digits[axis], scale * pts[:, axis] - index.w[axis])
    return float(out[0]) if single else out


def active_indices(
    family: WaveletFamily, j: int, box: tuple[np.ndarray, np.ndarray]
) -> list[TensorIndex]:
    """Indices at level ``j`` whose support meets the axis-aligned ``box``.

    Axes of positive width require an overlap of positive length; a
    zero-width axis ``[a, a]`` selects supports ``[lo, hi)`` containing ``a``.
    Results are in lexicographic ``(l, w)`` order.
    """
    lo = np.atleast_1d(np.asarray(box[0], dtype=float))
    hi = np.atleast_1d(np.asarray(box[1], dtype=float))
    if np.any(lo > hi):
        return []
    p = len(lo)
    scale = 2.0**j
    S = family.support
    ranges = []
    for a, b in zip(lo * scale, hi * scale):
        if a < b:
            # w < b and w + S > a
            first = math.floor(a - S) + 1
            last = math.ceil(b) - 1
        else:
            # w <= a < w + S
            first = math.floor(a - S) + 1
            last = math.floor(a)
        ranges.append(range(first, last + 1))
    out = []
    for l in level_types(j, p):
        for w in itertools.product(*ranges):
            out.append(TensorIndex(j, l, tuple(int(v) for v in w)))
    return out


def filter_residuals(h: np.ndarray) -> dict[str, float]:
    """Deviations of a low-pass filter from its defining identities.

    ``sum`` is ``|sum h - sqrt2|``, ``orthonormality`` the worst
    ``|sum_k h_k h_{k+2m} - delta_m|`` and ``moments`` the worst vanishing
    moment ``|sum_k (-1)^k k^r h_k|`` (scaled by ``len(h)**-r``) for ``r < N``.
    """
    h = np.asarray(h, dtype=float)
    L = len(h)
    orth = 0.0
    for m in range(L // 2):
        dot = math.fsum(h[: L - 2 * m] * h[2 * m:])
        orth = max(orth, abs(dot - (1.0 if m == 0 else 0.0)))
    k = np.arange(L, dtype=float)
    sign = (-1.0) ** np.arange(L)
    moments = 0.0
    for r in range(L // 2):
        moments = max(moments, abs(math.fsum(sign * (k / L) ** r * h)))
    return {
        "sum": abs(math.fsum(h) - math.sqrt(2.0)),
        "orthonormality": orth,
        "moments": moments,
    }


def partition_of_unity_error(family: WaveletFamily, samples: int = 1024) -> float:
    """``max |sum_k phi(x - k) - 1|`` over ``samples`` points of ``[0, 1)``."""
    x = np.arange(samples) / samples
    total = np.zeros(samples)
    for k in range(-family.support, 1):
        total += family.phi(x - k)
    return float(np.max(np.abs(total - 1.0)))


def two_scale_error(family: WaveletFamily) -> float:
    """``max |phi(x) - sqrt2 sum_k h_k phi(2x - k)|`` on the table grid."""
    step = 2.0 ** -family.cascade_depth
    x = np.arange(len(family.scaling_table)) * step
    rhs = np.zeros_like(x)
    for k, hk in enumerate(family.low_pass):
        rhs += hk * family.phi(2.0 * x - k)
    rhs *= math.sqrt(2.0)
    return float(np.max(np.abs(family.phi(x) - rhs)))


def _inner_product_1d(family: WaveletFamily, a: TensorIndex, b: TensorIndex) -> float:
    lo = max(a.w[0] * 2.0 ** -a.j, b.w[0] * 2.0 ** -b.j)
    hi = min((a.w[0] + family.support) * 2.0 ** -a.j, (b.w[0] + family.support) * 2.0 ** -b.j)
    if hi <= lo:
        return 0.0
    step = 2.0 ** -(family.cascade_depth + max(a.j, b.j))
    x = np.arange(math.floor(lo / step), math.ceil(hi / step) + 1) * step
    vals = eval_tensor(family, a, x[:, None]) * eval_tensor(family, b, x[:, None])
    return float(trapezoid(vals, x))


def gram_errors(
    family: WaveletFamily, n_pairs: int = 50, seed: int = 0, max_level: int = 2
) -> np.ndarray:
    """``|<u, v> - delta_uv|`` for random pairs of one-dimensional basis functions.

    Half of the pairs are a function with itself, the rest are distinct
    functions with overlapping supports, so every check is informative.
    """
    rng = np.random.default_rng(seed)
    S = family.support

    def draw(j=None):
        j = int(rng.integers(0, max_level + 1)) if j is None else j
        l = int(rng.integers(1, 3)) if j == 0 else 1
        return TensorIndex(j, l, (int(rng.integers(-S, S)),))

    errs = []
    for i in range(n_pairs):
        a = draw()
        if i % 2 == 0:
            b = a
        else:
            while True:
                b = draw()
                lo_a, hi_a = family.support_box(a)
                lo_b, hi_b = family.support_box(b)
                if b != a and max(lo_a[0], lo_b[0]) < min(hi_a[0], hi_b[0]):
                    break
        target = 1.0 if a == b else 0.0
        errs.append(abs(_inner_product_1d(family, a, b) - target))
    return np.asarray(errs)
