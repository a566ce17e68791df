"""Sparse wavelet coefficient fields of measures, Besov norms and the dual
(negative-smoothness) norms used as computable IPM surrogates."""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterator, Mapping

import numpy as np

from .errors import IncompatibleFieldsError, InvalidParameterError
from .measures import DiscreteMeasure
from .wavelets import TensorIndex, WaveletFamily, level_types, type_digits

__all__ = [
    "BesovParams",
    "CoefficientField",
    "analyze_measure",
    "shift_smoothness",
    "besov_norm",
    "ipm_dual",
    "ipm_log_weighted",
    "potential_pairing",
    "PRUNE_THRESHOLD",
]

PRUNE_THRESHOLD = 1e-15


@dataclass(frozen=True)
class BesovParams:
    """Smoothness ``s``, log exponent ``b`` and integrabilities ``q1, q2``."""

    s: float
    b: float = 0.0
    q1: float = 1.0
    q2: float = 1.0

    def __post_init__(self):
        if self.q1 < 1 or self.q2 < 1:
            raise InvalidParameterError("q1 and q2 must be >= 1")
        if self.b < 0:
            raise InvalidParameterError("log exponent b must be >= 0")


def _lexsort_rows(keys: np.ndarray) -> np.ndarray:
    return np.lexsort(keys.T[::-1])


@dataclass(frozen=True, eq=False)
class CoefficientField:
    """Wavelet coefficients ``<f, psi_jlw>`` stored level by level.

    ``levels[j]`` is a pair ``(keys, raw)`` where ``keys`` is an integer array
    of rows ``(l, w_1, ..., w_p)`` in lexicographic order and ``raw`` holds the
    coefficients.  A pending smoothness shift ``(gamma_shift, log_shift)``
    multiplies level ``j`` by ``2**(j*gamma_shift) * (1+j)**log_shift`` on
    read, so repeated shifts compose without intermediate rounding.
    """

    dim: int
    max_level: int
    levels: Mapping[int, tuple[np.ndarray, np.ndarray]]
    bounding_box: tuple[np.ndarray, np.ndarray] | None = None
    gamma_shift: float = 0.0
    log_shift: float = 0.0

    def level_factor(self, j: int) -> float:
        if self.gamma_shift == 0.0 and self.log_shift == 0.0:
            return 1.0
        return 2.0 ** (j * self.gamma_shift) * (1.0 + j) ** self.log_shift

    def level(self, j: int) -> tuple[np.ndarray, np.ndarray]:
        """Keys and (shifted) values stored at level ``j``."""
        if j not in self.levels:
            return np.zeros((0, self.dim + 1), dtype=np.int64), np.zeros(0)
        keys, raw = self.levels[j]
        fac = self.level_factor(j)
        return keys, raw if fac == 1.0 else raw * fac

    def __len__(self) -> int:
        return sum(len(v) for _, v in self.levels.values())

    def items(self) -> Iterator[tuple[TensorIndex, float]]:
        """Entries in ``(j, l, w)`` order."""
        for j in sorted(self.levels):
            keys, vals = self.level(j)
            for row, v in zip(keys, vals):
                yield TensorIndex(j, int(row[0]), tuple(int(x) for x in row[1:])), float(v)

    def to_dict(self) -> dict[TensorIndex, float]:
        return dict(self.items())

    def __getitem__(self, index: TensorIndex) -> float:
        keys, vals = self.level(index.j)
        target = np.array([index.l, *index.w], dtype=np.int64)
        hit = np.flatnonzero(np.all(keys == target, axis=1))
        return float(vals[hit[0]]) if len(hit) else 0.0

    def materialize(self) -> CoefficientField:
        """Copy with the pending shift applied to the stored values."""
        if self.gamma_shift == 0.0 and self.log_shift == 0.0:
            return self
        levels = {}
        for j in self.levels:
            keys, vals = self.level(j)
            levels[j] = _canonical(keys, vals)
        levels = {j: kv for j, kv in levels.items() if len(kv[1])}
        return CoefficientField(self.dim, self.max_level, levels, self.bounding_box)

    def truncated(self, max_level: int) -> CoefficientField:
        levels = {j: kv for j, kv in self.levels.items() if j <= max_level}
        return CoefficientField(
            self.dim, max_level, levels, self.bounding_box,
            self.gamma_shift, self.log_shift,
        )

    def __sub__(self, other: CoefficientField) -> CoefficientField:
        _check_compatible(self, other)
        levels = {}
        for j in sorted(set(self.levels) | set(other.levels)):
            ka, va = self.level(j)
            kb, vb = other.level(j)
            keys = np.concatenate([ka, kb])
            vals = np.concatenate([va, -vb])
            order = _lexsort_rows(keys)
            keys, vals = keys[order], vals[order]
            new = np.ones(len(keys), dtype=bool)
            new[1:] = np.any(keys[1:] != keys[:-1], axis=1)
            group = np.cumsum(new) - 1
            summed = np.zeros(group[-1] + 1 if len(group) else 0)
            # each key occurs at most twice, so this is one exact-order add
            np.add.at(summed, group, vals)
            keys, summed = _canonical(keys[new], summed)
            if len(summed):
                levels[j] = (keys, summed)
        return CoefficientField(self.dim, self.max_level, levels, self.bounding_box)

    @classmethod
    def from_entries(
        cls, dim: int, max_level: int, entries: Mapping[TensorIndex, float]
    ) -> CoefficientField:
        """Build a field from an explicit ``{TensorIndex: value}`` mapping."""
        per_level: dict[int, list] = {}
        for idx, v in entries.items():
            if len(idx.w) != dim or not idx.is_valid() or idx.j > max_level:
                raise InvalidParameterError(f"invalid index {idx} for this field")
            per_level.setdefault(idx.j, []).append(([idx.l, *idx.w], float(v)))
        levels = {}
        for j, rows in per_level.items():
            keys = np.array([r[0] for r in rows], dtype=np.int64).reshape(-1, dim + 1)
            vals = np.array([r[1] for r in rows], dtype=float)
            order = _lexsort_rows(keys)
            keys, vals = _canonical(keys[order], vals[order])
            if len(vals):
                levels[j] = (keys, vals)
        return cls(dim, max_level, levels)

    def to_csv(self) -> str:
        """CSV text ``j,l,w1,...,wp,value`` sorted by ``(j, l, w)``."""
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["j", "l"] + [f"w{i + 1}" for i in range(self.dim)] + ["value"])
        for j in sorted(self.levels):
            keys, vals = self.level(j)
            for row, v in zip(keys, vals):
                writer.writerow([j, *(int(x) for x in row), repr(float(v))])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, max_level: int | None = None) -> CoefficientField:
        rows = list(csv.reader(io.StringIO(text)))
        dim = len(rows[0]) - 3
        entries = {}
        for r in rows[1:]:
            j, l = int(r[0]), int(r[1])
            w = tuple(int(x) for x in r[2:2 + dim])
            entries[TensorIndex(j, l, w)] = float(r[-1])
        top = max((i.j for i in entries), default=0)
        return cls.from_entries(dim, top if max_level is None else max_level, entries)


def _canonical(keys: np.ndarray, vals: np.ndarray):
    keep = np.abs(vals) >= PRUNE_THRESHOLD
    return keys[keep], vals[keep]


def _check_compatible(a: CoefficientField, b: CoefficientField) -> None:
    if a.dim != b.dim or a.max_level != b.max_level:
        raise IncompatibleFieldsError(
            f"fields differ: dim {a.dim} vs {b.dim}, level {a.max_level} vs {b.max_level}"
        )


def _grouped_compensated_sum(group: np.ndarray, vals: np.ndarray, n_groups: int) -> np.ndarray:
    """Neumaier-compensated sums of ``vals`` per ``group``.

    Within each group the values are accumulated in their order of
    appearance, so the result depends only on the input order.
    """
    order = np.argsort(group, kind="stable")
    g = group[order]
    v = vals[order]
    starts = np.searchsorted(g, np.arange(n_groups))
    rank = np.arange(len(g)) - starts[g]
    by_rank = np.argsort(rank, kind="stable")
    g, v, rank = g[by_rank], v[by_rank], rank[by_rank]
    bounds = np.searchsorted(rank, np.arange(rank[-1] + 2)) if len(rank) else [0]
    s = np.zeros(n_groups)
    comp = np.zeros(n_groups)
    for lo, hi in zip(bounds[:-1], bounds[1:]):
        gi, x = g[lo:hi], v[lo:hi]
        cur = s[gi]
        t = cur + x
        big = np.abs(cur) >= np.abs(x)
        comp[gi] += np.where(big, (cur - t) + x, (x - t) + cur)
        s[gi] = t
    return s + comp


def _level_coefficients(
    family: WaveletFamily, atoms: np.ndarray, weights: np.ndarray, j: int
) -> tuple[np.ndarray, np.ndarray]:
    n, p = atoms.shape
    S = family.support
    scaled = atoms * 2.0**j
    base = np.floor(scaled).astype(np.int64)
    offs = np.arange(S)
    u = (scaled - base)[:, :, None] + offs  # (n, p, S); w = base - offs
    tables = (family.phi(u), family.psi(u))
    types = level_types(j, p)
    amp = 2.0 ** (j * p / 2.0)

    # all offset combinations, axis 0 slowest
    combos = np.array(np.meshgrid(*([offs] * p), indexing="ij")).reshape(p, -1).T
    n_comb = len(combos)
    contrib = np.empty((n, len(types), n_comb))
    for ti, l in enumerate(types):
        digits = type_digits(l, p)
        val = np.full((n, n_comb), amp)
        for axis in range(p):
            val *= tables[digits[axis]][:, axis, :][:, combos[:, axis]]
        contrib[:, ti, :] = val * weights[:, None]

    w = base[:, None, :] - combos[None, :, :]  # (n, n_comb, p)
    wmin = w.reshape(-1, p).min(axis=0)
    span = w.reshape(-1, p).max(axis=0) - wmin + 1
    code_w = np.zeros((n, n_comb), dtype=np.int64)
    for axis in range(p):
        code_w = code_w * span[axis] + (w[:, :, axis] - wmin[axis])
    n_w = int(np.prod(span))
    code = (np.arange(len(types), dtype=np.int64)[None, :, None] * n_w + code_w[:, None, :])
    code = code.reshape(-1)
    vals = contrib.reshape(-1)

    uniq, group = np.unique(code, return_inverse=True)
    sums = _grouped_compensated_sum(group.reshape(-1), vals, len(uniq))

    type_idx, rest = np.divmod(uniq, n_w)
    keys = np.empty((len(uniq), p + 1), dtype=np.int64)
    keys[:, 0] = np.asarray(types, dtype=np.int64)[type_idx]
    for axis in range(p - 1, -1, -1):
        rest, digit = np.divmod(rest, span[axis])
        keys[:, 1 + axis] = digit + wmin[axis]
    return _canonical(keys, sums)


def analyze_measure(
    m: DiscreteMeasure,
    family: WaveletFamily,
    J: int,
    workers: int | None = None,
) -> CoefficientField:
    """Coefficients ``sum_i w_i psi_jlw(x_i)`` for every level ``0..J``.

    Each coefficient is a compensated sum over atoms in ascending atom order,
    so the result is bit-identical for any ``workers`` (levels are the unit
    of parallel work).
    """
    if J < 0:
        raise InvalidParameterError(f"J must be >= 0, got {J}")
    if len(m) == 0:
        raise InvalidParameterError("cannot analyse an empty measure")
    atoms, weights = m.atoms, m.weights

    def one(j):
        return j, _level_coefficients(family, atoms, weights, j)

    if workers is None or workers <= 1:
        results = [one(j) for j in range(J + 1)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(one, range(J + 1)))
    levels = {j: kv for j, kv in results if len(kv[1])}
    return CoefficientField(m.dim, J, levels, m.bounding_box())


def shift_smoothness(f: CoefficientField, gamma: float, c: float) -> CoefficientField:
    """Rescale level ``j`` by ``2**(j*gamma) * (1+j)**c``."""
    return CoefficientField(
        f.dim, f.max_level, f.levels, f.bounding_box,
        f.gamma_shift + gamma, f.log_shift + c,
    )


def _scaling_mask(keys: np.ndarray, p: int) -> np.ndarray:
    return keys[:, 0] == 2**p


def _lq(x: np.ndarray, q: float) -> float:
    if len(x) == 0:
        return 0.0
    a = np.abs(x)
    if math.isinf(q):
        return float(a.max())
    if q == 1:
        return math.fsum(a)
    return math.fsum(a**q) ** (1.0 / q)


def _weighted_terms(f: CoefficientField, s: float, b: float, q1: float):
    """Scaling-block norm and ``(weight, l_q1 norm)`` per (level, type)."""
    p = f.dim
    inv_q1 = 0.0 if math.isinf(q1) else 1.0 / q1
    scal = 0.0
    terms = []
    for j in sorted(f.levels):
        keys, vals = f.level(j)
        if j == 0:
            mask = _scaling_mask(keys, p)
            scal = _lq(vals[mask], q1)
            keys, vals = keys[~mask], vals[~mask]
        weight = 2.0 ** (j * (s + p / 2.0 - p * inv_q1)) * (1.0 + j) ** b
        for l in np.unique(keys[:, 0]):
            terms.append((weight, _lq(vals[keys[:, 0] == l], q1)))
    return scal, terms


def besov_norm(f: CoefficientField, params: BesovParams) -> float:
    """Truncated Besov norm of the field (levels up to ``f.max_level``)."""
    return _besov_norm(f, params.s, params.b, params.q1, params.q2)


def _besov_norm(f: CoefficientField, s: float, b: float, q1: float, q2: float) -> float:
    if q1 == 1 and q2 == 1:
        return _dual_sum(f, s, b)
    scal, terms = _weighted_terms(f, s, b, q1)
    if math.isinf(q2):
        return max([scal] + [w * t for w, t in terms])
    total = math.fsum([scal**q2] + [(w * t) ** q2 for w, t in terms])
    return total ** (1.0 / q2)


def _dual_sum(f: CoefficientField, s: float, b: float) -> float:
    # q1 = q2 = 1: one fsum per level, then across levels
    p = f.dim
    parts = []
    for j in sorted(f.levels):
        _, vals = f.level(j)
        weight = 2.0 ** (j * (s - p / 2.0)) * (1.0 + j) ** b
        if j == 0:
            keys = f.levels[0][0]
            mask = _scaling_mask(keys, p)
            parts.append(math.fsum(np.abs(vals[mask])))
            vals = vals[~mask]
        parts.append(weight * math.fsum(np.abs(vals)))
    return math.fsum(parts)


def ipm_dual(a: CoefficientField, b: CoefficientField, gamma: float) -> float:
    """Dual-norm surrogate ``||a - b||`` in ``B^{-gamma}_{1,1}``."""
    _check_compatible(a, b)
    return _dual_sum(a - b, -gamma, 0.0)


def ipm_log_weighted(
    a: CoefficientField, b: CoefficientField, gamma: float, c: float, J_cut: int
) -> float:
    """Dual surrogate with levels above ``J_cut`` dropped and level ``j``
    further weighted by ``(1+j)**-c``."""
    _check_compatible(a, b)
    if J_cut > a.max_level:
        raise IncompatibleFieldsError(
            f"J_cut={J_cut} exceeds the analysed level {a.max_level}"
        )
    return _dual_sum((a - b).truncated(J_cut), -gamma, -c)


def potential_pairing(
    m1: DiscreteMeasure, m2: DiscreteMeasure, h: Callable[[np.ndarray], np.ndarray]
) -> float:
    """``int h dm1 - int h dm2`` for a vectorised potential ``h``."""
    v1 = np.asarray(h(m1.atoms), dtype=float) * m1.weights
    v2 = np.asarray(h(m2.atoms), dtype=float) * m2.weights
    return math.fsum(np.concatenate([v1, -v2]))
