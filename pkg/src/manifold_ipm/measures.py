"""Weighted-atom measures, the oscillating/dilated circle families and
elementary distances between them."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Literal

import numpy as np
from scipy.spatial import cKDTree

from .errors import (
    InvalidParameterError,
    MassMismatchError,
    ResolutionError,
    SingularProjectionError,
)

__all__ = [
    "DiscreteMeasure",
    "ParametricCurve",
    "make_curve",
    "quadrature_measure",
    "sample_iid",
    "project_to_circle",
    "displacement_cost",
    "circular_w1",
    "hausdorff_distance",
    "SAMPLING_TABLE_SIZE",
]

SAMPLING_TABLE_SIZE = 2**14
_ORIGIN_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class DiscreteMeasure:
    """Finite measure ``sum_i weights[i] * delta(atoms[i])`` on R^p."""

    atoms: np.ndarray
    weights: np.ndarray
    kind: Literal["quadrature", "empirical"] = "quadrature"

    def __post_init__(self):
        atoms = np.atleast_2d(np.asarray(self.atoms, dtype=float))
        weights = np.asarray(self.weights, dtype=float).reshape(-1)
        if len(atoms) != len(weights):
            raise InvalidParameterError(
                f"{len(atoms)} atoms but {len(weights)} weights"
            )
        if np.any(weights < 0):
            raise InvalidParameterError("weights must be nonnegative")
        if self.kind not in ("quadrature", "empirical"):
            raise InvalidParameterError(f"unknown measure kind {self.kind!r}")
        atoms.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "weights", weights)

    @property
    def dim(self) -> int:
        return self.atoms.shape[1]

    def __len__(self) -> int:
        return len(self.weights)

    @property
    def total_mass(self) -> float:
        return math.fsum(self.weights)

    def is_probability(self, tol: float = 1e-10) -> bool:
        return abs(self.total_mass - 1.0) <= tol

    def bounding_box(self) -> tuple[np.ndarray, np.ndarray]:
        return self.atoms.min(axis=0), self.atoms.max(axis=0)

    def to_csv(self) -> str:
        """CSV text with header ``x1,...,xp,weight``."""
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow([f"x{i + 1}" for i in range(self.dim)] + ["weight"])
        for x, w in zip(self.atoms, self.weights):
            writer.writerow([repr(float(v)) for v in x] + [repr(float(w))])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, kind: str = "quadrature") -> DiscreteMeasure:
        rows = list(csv.reader(io.StringIO(text)))
        header, body = rows[0], rows[1:]
        if header[-1] != "weight":
            raise InvalidParameterError("last CSV column must be 'weight'")
        data = np.array([[float(v) for v in r] for r in body], dtype=float)
        return cls(data[:, :-1], data[:, -1], kind)


@dataclass(frozen=True)
class ParametricCurve:
    """Closed curve ``[0, 1) -> R^2`` from one of two families.

    ``perturbed_circle``: radius ``1 + (2 pi n)^-(beta+1) sin(2 pi n t)``.
    ``circle_radius``: the circle of radius ``1 + eps``.
    """

    kind: Literal["perturbed_circle", "circle_radius"]
    beta: float = 0.0
    n: int = 1
    eps: float = 0.0

    @property
    def amplitude(self) -> float:
        if self.kind == "perturbed_circle":
            return (2.0 * math.pi * self.n) ** (-(self.beta + 1.0))
        return 0.0

    @property
    def frequency(self) -> int:
        return self.n if self.kind == "perturbed_circle" else 1

    def radius(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        if self.kind == "perturbed_circle":
            return 1.0 + self.amplitude * np.sin(2.0 * math.pi * self.n * t)
        return np.full_like(t, 1.0 + self.eps)

    def radius_derivative(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        if self.kind == "perturbed_circle":
            k = 2.0 * math.pi * self.n
            return self.amplitude * k * np.cos(k * t)
        return np.zeros_like(t)

    def __call__(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        r = self.radius(t)
        ang = 2.0 * math.pi * t
        return np.stack([r * np.cos(ang), r * np.sin(ang)], axis=-1)

    def derivative(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        r, dr = self.radius(t), self.radius_derivative(t)
        ang = 2.0 * math.pi * t
        c, s = np.cos(ang), np.sin(ang)
        tw = 2.0 * math.pi
        return np.stack([dr * c - tw * r * s, dr * s + tw * r * c], axis=-1)

    def speed(self, t) -> np.ndarray:
        return np.linalg.norm(self.derivative(t), axis=-1)


def make_curve(
    kind: str, beta: float = 0.0, n: int = 1, eps: float = 0.0
) -> ParametricCurve:
    """Validated constructor for :class:`ParametricCurve`."""
    if kind == "perturbed_circle":
        if int(n) != n or n < 1:
            raise InvalidParameterError(f"n must be a positive integer, got {n}")
        if beta < 0:
            raise InvalidParameterError(f"beta must be >= 0, got {beta}")
        return ParametricCurve(kind, float(beta), int(n), 0.0)
    if kind == "circle_radius":
        if not eps > -1.0:
            raise InvalidParameterError(f"eps must be > -1, got {eps}")
        return ParametricCurve(kind, float(beta), 1, float(eps))
    raise InvalidParameterError(f"unknown curve kind {kind!r}")


def quadrature_measure(curve: ParametricCurve, m: int) -> DiscreteMeasure:
    """Uniform (arc-length) probability measure on ``curve``, discretised.

    Nodes are equispaced in the parameter; each weight is proportional to
    the speed there, i.e. the periodic trapezoid rule for the volume measure.
    """
    if m < 8 * curve.frequency:
        raise ResolutionError(
            f"need at least {8 * curve.frequency} nodes for frequency "
            f"{curve.frequency}, got {m}"
        )
    t = np.arange(m) / m
    speed = curve.speed(t)
    return DiscreteMeasure(curve(t), speed / math.fsum(speed), "quadrature")


def _arclength_table(curve: ParametricCurve, size: int):
    t = np.linspace(0.0, 1.0, size + 1)
    speed = curve.speed(t)
    seg = 0.5 * (speed[1:] + speed[:-1]) / size
    cdf = np.concatenate([[0.0], np.cumsum(seg)])
    return t, cdf / cdf[-1]


def sample_iid(
    curve: ParametricCurve, n_samples: int, seed: int | np.random.SeedSequence
) -> DiscreteMeasure:
    """Empirical measure of ``n_samples`` draws from the arc-length law."""
    if n_samples < 1:
        raise InvalidParameterError(f"n_samples must be >= 1, got {n_samples}")
    rng = np.random.default_rng(seed)
    t_grid, cdf = _arclength_table(curve, SAMPLING_TABLE_SIZE)
    t = np.interp(rng.random(n_samples), cdf, t_grid)
    return DiscreteMeasure(
        curve(t), np.full(n_samples, 1.0 / n_samples), "empirical"
    )


def _radii(m: DiscreteMeasure) -> np.ndarray:
    r = np.linalg.norm(m.atoms, axis=1)
    if np.any(r <= _ORIGIN_TOL):
        raise SingularProjectionError("atom at the origin has no radial projection")
    return r


def project_to_circle(m: DiscreteMeasure) -> DiscreteMeasure:
    """Pushforward of ``m`` by the radial projection ``x -> x / |x|``."""
    r = _radii(m)
    return DiscreteMeasure(m.atoms / r[:, None], m.weights, m.kind)


def displacement_cost(m: DiscreteMeasure) -> float:
    """Transport cost ``sum_i w_i |x_i - x_i/|x_i||`` of the radial projection."""
    r = _radii(m)
    return math.fsum(m.weights * np.abs(r - 1.0))


def _angles(m: DiscreteMeasure) -> np.ndarray:
    _radii(m)
    frac = np.arctan2(m.atoms[:, 1], m.atoms[:, 0]) / (2.0 * math.pi)
    return np.mod(frac, 1.0)


def circular_w1(a: DiscreteMeasure, b: DiscreteMeasure) -> float:
    """Exact 1-Wasserstein distance on the unit circle (geodesic cost).

    Atoms are identified with their angle.  With ``D = F_a - F_b`` the
    difference of cumulative distributions on ``[0, 1)``, the distance is
    ``2 pi * min_c int |D - c|``, minimised at a weighted median of ``D``.
    """
    ma, mb = a.total_mass, b.total_mass
    if abs(ma - mb) > 1e-8:
        raise MassMismatchError(f"masses differ: {ma} vs {mb}")
    ta, tb = _angles(a), _angles(b)
    pos = np.concatenate([ta, tb])
    mass = np.concatenate([a.weights, -b.weights])
    order = np.argsort(pos, kind="stable")
    pos, mass = pos[order], mass[order]
    D = np.cumsum(mass)
    lengths = np.diff(np.concatenate([pos, [1.0 + pos[0]]]))
    keep = lengths > 0
    D, lengths = D[keep], lengths[keep]
    if len(D) == 0:
        return 0.0
    srt = np.argsort(D, kind="stable")
    cum = np.cumsum(lengths[srt])
    c = D[srt][np.searchsorted(cum, 0.5 * cum[-1])]
    return 2.0 * math.pi * math.fsum(lengths * np.abs(D - c))


def hausdorff_distance(a, b) -> float:
    """Hausdorff distance between two finite point clouds (exact)."""
    a = np.atleast_2d(np.asarray(a, dtype=float))
    b = np.atleast_2d(np.asarray(b, dtype=float))
    if a.size == 0 or b.size == 0:
        raise InvalidParameterError("point lists must be nonempty")
    d_ab, _ = cKDTree(b).query(a)
    d_ba, _ = cKDTree(a).query(b)
    return float(max(d_ab.max(), d_ba.max()))
