"""Scaling experiments comparing IPM surrogates at two smoothness levels.

A family of measure pairs indexed by a frequency ``n`` (oscillating circle
against its radial projection) or an offset ``eps`` (unit circle against the
circle of radius ``1 + eps``) is analysed once per index; the log-log slope of
``d_gamma`` against ``d_eta`` is then compared with the predicted exponent.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .besov import (
    BesovParams,
    CoefficientField,
    analyze_measure,
    besov_norm,
    ipm_dual,
    ipm_log_weighted,
)
from .errors import DegenerateDataError, InvalidParameterError
from .measures import (
    DiscreteMeasure,
    make_curve,
    project_to_circle,
    quadrature_measure,
)
from .wavelets import build_family, default_order

__all__ = [
    "ExperimentSpec",
    "FamilyRow",
    "ExponentFit",
    "predicted_exponent",
    "run_family",
    "fit_exponent",
    "fit_pairs",
    "family_pair",
    "check_coeff_interpolation",
    "InterpolationReport",
    "DensityPairFamily",
    "ClassicalReport",
    "check_classical",
    "MAX_LEVEL",
    "MAX_FREQUENCY",
]

MAX_LEVEL = 12
MAX_FREQUENCY = 64
FAMILIES = ("perturbed_circle", "circle_radius")


def predicted_exponent(beta: float, gamma: float, eta: float) -> float:
    """Exponent ``delta`` with ``d_gamma <~ d_eta ** delta`` (up to logs).

    Piecewise in the regime of the two smoothness levels: ``(beta+gamma) /
    (beta+eta)`` when ``gamma >= 1``, ``(beta*gamma+gamma) / (beta+eta)`` when
    ``gamma <= 1 <= eta`` and ``gamma/eta`` when ``eta <= 1``.
    """
    if not 0 < gamma <= eta:
        raise InvalidParameterError(f"need 0 < gamma <= eta, got {gamma}, {eta}")
    if beta < 0:
        raise InvalidParameterError(f"beta must be >= 0, got {beta}")
    if gamma >= 1:
        return (beta + gamma) / (beta + eta)
    if eta >= 1:
        return (beta * gamma + gamma) / (beta + eta)
    return gamma / eta


@dataclass(frozen=True)
class ExperimentSpec:
    """Configuration of one family run.

    ``J`` defaults to ``ceil(log2(n_max)) + 3`` for the oscillating family and
    to the level cap for the radius family; ``order`` defaults to
    ``ceil(max eta) + 3``.  ``log_weight > 0`` switches integer smoothness
    levels to the log-weighted surrogate with that exponent.
    """

    family: str
    indices: tuple[float, ...]
    pairs: tuple[tuple[float, float], ...]
    beta: float = 0.0
    J: int | None = None
    nodes: int = 512
    order: int | None = None
    cascade_depth: int = 12
    log_weight: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "indices", tuple(self.indices))
        object.__setattr__(self, "pairs", tuple(tuple(p) for p in self.pairs))
        if self.family not in FAMILIES:
            raise InvalidParameterError(f"unknown family {self.family!r}")
        idx = self.indices
        if len(idx) < 3:
            raise InvalidParameterError("need at least 3 family indices")
        if any(b <= a for a, b in zip(idx, idx[1:])):
            raise InvalidParameterError("family indices must be strictly increasing")
        if self.family == "perturbed_circle":
            if any(int(n) != n or n < 1 for n in idx):
                raise InvalidParameterError("frequencies must be positive integers")
            if max(idx) > MAX_FREQUENCY:
                raise InvalidParameterError(f"frequencies are capped at {MAX_FREQUENCY}")
        elif any(not e > -1 for e in idx):
            raise InvalidParameterError("radius offsets must be > -1")
        if not self.pairs:
            raise InvalidParameterError("need at least one (gamma, eta) pair")
        for g, e in self.pairs:
            if not 0 < g <= e:
                raise InvalidParameterError(f"pair ({g}, {e}) violates 0 < gamma <= eta")
        if self.beta < 0:
            raise InvalidParameterError("beta must be >= 0")
        if self.J is not None and not 0 <= self.J <= MAX_LEVEL:
            raise InvalidParameterError(f"J must lie in [0, {MAX_LEVEL}]")

    @property
    def level(self) -> int:
        if self.J is not None:
            return self.J
        if self.family == "perturbed_circle":
            return min(MAX_LEVEL, math.ceil(math.log2(max(self.indices))) + 3)
        return MAX_LEVEL

    @property
    def wavelet_order(self) -> int:
        if self.order is not None:
            return self.order
        return default_order(max(e for _, e in self.pairs))

    def to_dict(self) -> dict:
        d = asdict(self)
        d["indices"] = list(self.indices)
        d["pairs"] = [list(p) for p in self.pairs]
        d["J"] = self.level
        d["order"] = self.wavelet_order
        return d


class FamilyRow(NamedTuple):
    index: float
    gamma: float
    eta: float
    d_gamma: float
    d_eta: float


@dataclass(frozen=True)
class ExponentFit:
    """Least-squares fit of ``log d_gamma = slope * log d_eta + intercept``."""

    slope: float
    intercept: float
    r_squared: float
    rows: tuple = field(repr=False, default=())


def family_pair(
    family: str, index: float, beta: float = 0.0, nodes: int = 512
) -> tuple[DiscreteMeasure, DiscreteMeasure]:
    """The two measures compared at one family index."""
    if family == "perturbed_circle":
        if int(index) != index:
            raise InvalidParameterError(f"frequency must be an integer, got {index}")
        mu = quadrature_measure(make_curve("perturbed_circle", beta, int(index)), nodes)
        return mu, project_to_circle(mu)
    if family != "circle_radius":
        raise InvalidParameterError(f"unknown family {family!r}")
    base = quadrature_measure(make_curve("circle_radius", eps=0.0), nodes)
    other = quadrature_measure(make_curve("circle_radius", eps=float(index)), nodes)
    return other, base


def surrogate_distance(
    a: CoefficientField, b: CoefficientField, s: float, log_weight: float = 0.0
) -> float:
    """Dual surrogate at smoothness ``s``; log-weighted at integer ``s`` if asked."""
    if log_weight > 0 and float(s).is_integer():
        return ipm_log_weighted(a, b, s, log_weight, a.max_level)
    return ipm_dual(a, b, s)


def run_family(spec: ExperimentSpec, workers: int | None = None) -> list[FamilyRow]:
    """Distances ``(d_gamma, d_eta)`` for every index and pair, index ascending."""
    family = build_family(spec.wavelet_order, spec.cascade_depth)
    J = spec.level

    def one(index):
        a, b = family_pair(spec.family, index, spec.beta, spec.nodes)
        A = analyze_measure(a, family, J)
        B = analyze_measure(b, family, J)
        out = []
        for g, e in spec.pairs:
            out.append(FamilyRow(
                index, g, e,
                surrogate_distance(A, B, g, spec.log_weight),
                surrogate_distance(A, B, e, spec.log_weight),
            ))
        return out

    if workers is None or workers <= 1:
        chunks = [one(i) for i in spec.indices]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(one, spec.indices))
    return [row for chunk in chunks for row in chunk]


def fit_exponent(rows: Sequence) -> ExponentFit:
    """Ordinary least squares of ``log d_gamma`` on ``log d_eta``.

    ``rows`` are :class:`FamilyRow` or any sequences ending in
    ``(d_gamma, d_eta)``.

    Raises
    ------
    DegenerateDataError
        Fewer than 3 rows, or any distance that is not strictly positive.
    """
    if len(rows) < 3:
        raise DegenerateDataError(f"need at least 3 rows, got {len(rows)}")
    dg = np.array([r[-2] for r in rows], dtype=float)
    de = np.array([r[-1] for r in rows], dtype=float)
    if np.any(~(dg > 0)) or np.any(~(de > 0)):
        raise DegenerateDataError("all distances must be strictly positive")
    x, y = np.log(de), np.log(dg)
    if np.ptp(x) == 0:
        raise DegenerateDataError("d_eta is constant; slope undefined")
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0 else 1.0 - float(np.sum(resid**2)) / ss_tot
    return ExponentFit(float(slope), float(intercept), min(max(r2, 0.0), 1.0), tuple(rows))


def fit_pairs(rows: Sequence[FamilyRow]) -> dict[tuple[float, float], ExponentFit]:
    """One :func:`fit_exponent` per ``(gamma, eta)`` pair present in ``rows``."""
    groups: dict[tuple[float, float], list] = {}
    for r in rows:
        groups.setdefault((r.gamma, r.eta), []).append(r)
    return {k: fit_exponent(v) for k, v in groups.items()}


class InterpolationReport(NamedTuple):
    lhs: float
    rhs: float
    holds: bool


def check_coeff_interpolation(
    f: CoefficientField, beta: float, gamma: float, alpha: float
) -> InterpolationReport:
    """Evaluate both sides of the coefficient interpolation inequality

    ``|g|_{B^-gamma} <= |g|_{B^{beta,2}} ** ((alpha-gamma)/(beta+alpha))
    * |g|_{B^-alpha} ** ((beta+gamma)/(beta+alpha))``, all norms ``(1,1)``.
    """
    if not 0 < gamma < alpha:
        raise InvalidParameterError(f"need 0 < gamma < alpha, got {gamma}, {alpha}")
    if beta < 0:
        raise InvalidParameterError(f"beta must be >= 0, got {beta}")
    lhs = besov_norm(f, BesovParams(-gamma))
    smooth = besov_norm(f, BesovParams(beta, 2.0))
    rough = besov_norm(f, BesovParams(-alpha))
    theta = (alpha - gamma) / (beta + alpha)
    rhs = smooth**theta * rough ** (1.0 - theta)
    return InterpolationReport(lhs, rhs, bool(lhs <= rhs * (1.0 + 1e-12)))


@dataclass(frozen=True)
class DensityPairFamily:
    """Pairs of densities on ``[0, 1]`` for the full-dimensional check.

    The reference density is ``b(x) = 2 sin(pi x)**2``; its partner at scale
    ``s`` is ``b(x) * (1 + amplitude * s**beta * sin(2 pi x / s))``, i.e. a
    perturbation of frequency ``1/s`` whose ``beta``-smoothness norm stays
    bounded.  ``amplitude = 0`` gives identical densities.
    """

    scales: tuple[float, ...] = (0.2, 0.1, 0.05)
    amplitude: float = 0.5
    nodes: int = 4096

    def densities(self, s: float, beta: float) -> tuple[DiscreteMeasure, DiscreteMeasure]:
        x = (np.arange(self.nodes) + 0.5) / self.nodes
        base = 2.0 * np.sin(np.pi * x) ** 2
        pert = base * (1.0 + self.amplitude * s**beta * np.sin(2.0 * np.pi * x / s))
        if np.any(pert < 0):
            raise InvalidParameterError("perturbed density is negative; lower the amplitude")
        atoms = x[:, None]
        return (
            DiscreteMeasure(atoms, pert / math.fsum(pert)),
            DiscreteMeasure(atoms, base / math.fsum(base)),
        )


class ClassicalReport(NamedTuple):
    rows: list
    fit: ExponentFit | None
    predicted: float


def check_classical(
    pairs: DensityPairFamily,
    beta: float,
    gamma: float,
    alpha: float,
    J: int = 10,
    order: int | None = None,
) -> ClassicalReport:
    """Full-dimensional scaling check on gridded densities in R^1.

    ``fit`` is ``None`` when every distance vanishes (identical densities).
    """
    if len(pairs.scales) < 3:
        raise DegenerateDataError("need at least 3 scales for an exponent fit")
    if not 0 < gamma <= alpha:
        raise InvalidParameterError(f"need 0 < gamma <= alpha, got {gamma}, {alpha}")
    family = build_family(order or default_order(alpha), 12)
    rows = []
    for s in pairs.scales:
        f, g = pairs.densities(s, beta)
        A, B = analyze_measure(f, family, J), analyze_measure(g, family, J)
        rows.append(FamilyRow(s, gamma, alpha, ipm_dual(A, B, gamma), ipm_dual(A, B, alpha)))
    if all(r.d_gamma == 0 and r.d_eta == 0 for r in rows):
        fit = None
    else:
        fit = fit_exponent(rows)
    return ClassicalReport(rows, fit, (beta + gamma) / (beta + alpha))
