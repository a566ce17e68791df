"""Minimum-distance estimation over a finite grid of curves.

Each candidate curve is replaced by its quadrature measure and analysed
once; a sample is scored against every candidate with the dual surrogate at
the loss smoothness and the smallest score wins (lowest grid index on ties).
"""

from __future__ import annotations

import math
import statistics
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .besov import CoefficientField, analyze_measure, ipm_dual
from .errors import InvalidParameterError
from .measures import DiscreteMeasure, ParametricCurve, make_curve, quadrature_measure, sample_iid
from .wavelets import WaveletFamily, build_family

__all__ = [
    "ModelFamily",
    "radius_grid",
    "EstimatorResult",
    "select_candidate",
    "minimum_ipm_estimate",
    "RateRow",
    "RateSummary",
    "rate_experiment",
    "summarize_rates",
    "count_inversions",
]


@dataclass(frozen=True, eq=False)
class ModelFamily:
    """Grid of candidate curves sharing one quadrature resolution.

    Coefficient fields of the candidates are cached per level, so repeated
    estimates at the same ``J`` analyse every candidate only once.
    """

    candidates: tuple[ParametricCurve, ...]
    nodes: int = 512
    gamma_loss: float = 0.5
    order: int = 4
    cascade_depth: int = 12
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "candidates", tuple(self.candidates))
        if not self.candidates:
            raise InvalidParameterError("model family must contain at least one curve")
        if not self.gamma_loss > 0:
            raise InvalidParameterError("gamma_loss must be positive")
        for c in self.candidates:
            if self.nodes < 8 * c.frequency:
                raise InvalidParameterError(
                    f"{self.nodes} nodes cannot resolve frequency {c.frequency}"
                )

    def __len__(self) -> int:
        return len(self.candidates)

    @property
    def wavelets(self) -> WaveletFamily:
        if "wavelets" not in self._cache:
            self._cache["wavelets"] = build_family(self.order, self.cascade_depth)
        return self._cache["wavelets"]

    def measure(self, i: int) -> DiscreteMeasure:
        return quadrature_measure(self.candidates[i], self.nodes)

    def fields(self, J: int) -> tuple[CoefficientField, ...]:
        key = ("fields", J)
        if key not in self._cache:
            wf = self.wavelets
            self._cache[key] = tuple(
                analyze_measure(self.measure(i), wf, J) for i in range(len(self))
            )
        return self._cache[key]

    def describe(self, i: int) -> dict:
        return asdict(self.candidates[i])


def radius_grid(
    offsets: Sequence[float], nodes: int = 512, gamma_loss: float = 0.5, order: int = 4
) -> ModelFamily:
    """Family of circles with radii ``1 + offset``."""
    return ModelFamily(
        tuple(make_curve("circle_radius", eps=float(e)) for e in offsets),
        nodes, gamma_loss, order,
    )


@dataclass(frozen=True)
class EstimatorResult:
    chosen_index: int
    chosen_params: dict
    ipm: float
    scores: tuple[float, ...]


def select_candidate(scores: Sequence[float]) -> int:
    """Index of the smallest score, the first one on ties."""
    if len(scores) == 0:
        raise InvalidParameterError("no scores to choose from")
    return int(np.argmin(np.asarray(scores, dtype=float)))


def minimum_ipm_estimate(
    sample: DiscreteMeasure, family: ModelFamily, J: int
) -> EstimatorResult:
    """Candidate minimising the loss-smoothness surrogate distance to ``sample``."""
    if not isinstance(family, ModelFamily) or len(family) == 0:
        raise InvalidParameterError("model family is empty")
    if len(sample) == 0:
        raise InvalidParameterError("sample is empty")
    target = analyze_measure(sample, family.wavelets, J)
    scores = tuple(ipm_dual(f, target, family.gamma_loss) for f in family.fields(J))
    best = select_candidate(scores)
    return EstimatorResult(best, family.describe(best), scores[best], scores)


class RateRow(NamedTuple):
    n: int
    rep: int
    chosen_index: int
    ipm_loss: float
    ipm_eval: float


class RateSummary(NamedTuple):
    n: int
    mean_error: float
    sd: float


def rate_experiment(
    truth: ParametricCurve,
    family: ModelFamily,
    n_list: Sequence[int],
    reps: int,
    seed: int,
    gamma_eval: float = 1.0,
    J: int = 6,
    workers: int | None = None,
) -> list[RateRow]:
    """Estimate from ``reps`` i.i.d. samples of ``truth`` for every size in ``n_list``.

    The random stream of run ``(n, rep)`` is seeded by ``(seed, n, rep)``, so
    rows do not depend on scheduling.  ``ipm_eval`` compares the chosen
    candidate with the truth's quadrature measure at ``gamma_eval``.
    """
    n_list = [int(n) for n in n_list]
    if not n_list:
        raise InvalidParameterError("n_list is empty")
    if any(n < 1 for n in n_list) or any(b <= a for a, b in zip(n_list, n_list[1:])):
        raise InvalidParameterError("n_list must be positive and strictly increasing")
    if reps < 3:
        raise InvalidParameterError("reps must be >= 3")
    fields = family.fields(J)
    truth_field = analyze_measure(quadrature_measure(truth, family.nodes), family.wavelets, J)
    eval_cache: dict[int, float] = {}

    def one(job):
        n, rep = job
        ss = np.random.SeedSequence([int(seed), n, rep])
        res = minimum_ipm_estimate(sample_iid(truth, n, ss), family, J)
        return n, rep, res

    jobs = [(n, rep) for n in n_list for rep in range(reps)]
    if workers is None or workers <= 1:
        results = [one(j) for j in jobs]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(one, jobs))
    rows = []
    for n, rep, res in results:
        k = res.chosen_index
        if k not in eval_cache:
            eval_cache[k] = ipm_dual(fields[k], truth_field, gamma_eval)
        rows.append(RateRow(n, rep, k, res.ipm, eval_cache[k]))
    return rows


def summarize_rates(rows: Sequence[RateRow]) -> list[RateSummary]:
    """Mean and sample standard deviation of ``ipm_eval`` per sample size."""
    groups: dict[int, list[float]] = {}
    for r in rows:
        groups.setdefault(r.n, []).append(r.ipm_eval)
    out = []
    for n in sorted(groups):
        vals = groups[n]
        sd = statistics.stdev(vals) if len(vals) > 1 else 0.0
        out.append(RateSummary(n, math.fsum(vals) / len(vals), sd))
    return out


def count_inversions(means: Sequence[float]) -> int:
    """Number of consecutive increases in a sequence that should decay."""
    return sum(1 for a, b in zip(means, means[1:]) if b > a)
