"""Pairwise-test estimator: statistic matrix, sup-statistic, minimizer set.

The estimator scores every ordered pair of candidates with the loss's test
family, sums the scores over the sample to get the pairwise statistic
matrix, takes row-wise suprema, and returns every candidate whose supremum
is within epsilon of the best one.

Candidate models are explicit finite lists (countable models are realized by
enumeration, so all suprema become maxima).  Two sample regimes are
supported: i.i.d. candidates (one measure per candidate) and per-coordinate
candidate tuples, where candidate i is a tuple (P_{i,1}, ..., P_{i,n}) and
observation k is scored against coordinate k.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .bounds import (
    birge_histogram_error,
    cj_constant,
    default_vbar,
    fast_bound_tv,
    l2_linear_bound,
    linf_bound,
    lj_histogram_bound,
    monotone_bound,
    monotone_iid_bound,
    optimize_monotone_bound,
    regression_bound,
    thm1_bound,
    thm2_bound,
    vc_bound_tv,
    vc_process_bound,
    wasserstein_dev_bound,
)
from .errors import ConfigError
from .losses import LossSpec
from .measures import HistogramMeasure, Measure, PartitionRef
from .testfam import AtomScore, PiecewiseScore, ScoreFunction, score

__all__ = [
    "Model",
    "EstimateReport",
    "PairwiseEngine",
    "as_model",
    "pairwise_statistic",
    "ell_estimate",
    "histogram_estimator",
    "median_tv_estimator",
    # deviation-bound evaluators (implemented in .bounds)
    "thm1_bound",
    "thm2_bound",
    "default_vbar",
    "wasserstein_dev_bound",
    "l2_linear_bound",
    "vc_bound_tv",
    "fast_bound_tv",
    "cj_constant",
    "lj_histogram_bound",
    "linf_bound",
    "regression_bound",
    "monotone_bound",
    "monotone_iid_bound",
    "birge_histogram_error",
    "optimize_monotone_bound",
    "vc_process_bound",
]


@dataclass
class Model:
    """A finite candidate list plus the metadata its loss may need.

    ``product_form`` is ``"iid"`` when every candidate is a single measure
    applying to all coordinates, or ``"tuples"`` when each candidate is a
    sequence of per-coordinate measures (all of one shared length).
    """

    candidates: list
    product_form: str = "iid"
    vc_dimension: float | None = None
    ratio_R: float | None = None
    kl_a: float | None = None
    partition: PartitionRef | None = None
    candidate_params: list | None = None

    def __post_init__(self) -> None:
        self.candidates = list(self.candidates)
        if not self.candidates:
            raise ConfigError("a model needs at least one candidate")
        if self.product_form not in ("iid", "tuples"):
            raise ConfigError(
                f"product_form must be 'iid' or 'tuples', got {self.product_form!r}"
            )
        if self.product_form == "tuples":
            lengths = {len(tuple(c)) for c in self.candidates}
            if len(lengths) != 1:
                raise ConfigError(
                    f"per-coordinate candidate tuples must share one length, got {sorted(lengths)}"
                )

    def __len__(self) -> int:
        return len(self.candidates)


def as_model(model: Model | Sequence[Measure]) -> Model:
    """Coerce a plain candidate sequence into an i.i.d. Model."""
    if isinstance(model, Model):
        return model
    return Model(candidates=list(model))


@dataclass(frozen=True)
class EstimateReport:
    """Everything the estimator computed, immutable.

    Attributes:
        pairwise: antisymmetric matrix of pair statistics, zero diagonal.
        sup_stat: row-wise maxima (each is >= 0 since the diagonal is 0).
        epsilon: the slack defining the minimizer set.
        minimizer_set: indices with sup_stat <= min sup_stat + epsilon.
        chosen: lowest index attaining the minimum.
        constant_parts: per-pair data-free score terms, for diagnostics.
    """

    pairwise: np.ndarray
    sup_stat: np.ndarray
    epsilon: float
    minimizer_set: tuple[int, ...]
    chosen: int
    constant_parts: np.ndarray

    def to_record(self, matrix_limit: int | None = 64) -> dict:
        """Serializable summary; matrices are elided above ``matrix_limit``."""
        m = len(self.sup_stat)
        rec = {
            "n_candidates": m,
            "epsilon": self.epsilon,
            "sup_stat": [float(v) for v in self.sup_stat],
            "minimizer_set": list(self.minimizer_set),
            "chosen": self.chosen,
        }
        if matrix_limit is None or m <= matrix_limit:
            rec["pairwise"] = [[float(v) for v in row] for row in self.pairwise]
            rec["constant_parts"] = [
                [float(v) for v in row] for row in self.constant_parts
            ]
        else:
            rec["pairwise"] = None
            rec["constant_parts"] = None
        return rec


class PairwiseEngine:
    """Precompiled pair scores for one (loss, model), reusable across samples.

    Construction builds the score of every unordered candidate pair once.
    Evaluation picks the fastest applicable backend: a value-matrix product
    when all scores live on one shared finite space, a sort-and-prefix-sum
    sweep when all scores are piecewise linear, and a per-pair loop
    otherwise.  Entries are computed once per unordered pair, so the matrix
    is exactly antisymmetric.
    """

    def __init__(self, spec: LossSpec, model: Model | Sequence[Measure]):
        self.spec = spec
        self.model = as_model(model)
        m = len(self.model)
        self._pairs = [(i, k) for i in range(m) for k in range(i + 1, m)]
        cands = self.model.candidates
        if self.model.product_form == "tuples":
            self._mode = "tuple"
            self._coord_scores = [
                [score(spec, P[c], Q[c]) for c in range(len(P))]
                for (i, k) in self._pairs
                for (P, Q) in [(cands[i], cands[k])]
            ]
            consts = [
                sum(t.constant_part for t in coord) for coord in self._coord_scores
            ]
        else:
            self._scores: list[ScoreFunction] = [
                score(spec, cands[i], cands[k]) for i, k in self._pairs
            ]
            consts = [t.constant_part for t in self._scores]
            self._mode = self._classify()
        self.constant_parts = self._fill_matrix(np.asarray(consts, dtype=float))

    # -- compilation ---------------------------------------------------------

    def _classify(self) -> str:
        if not self._scores:
            return "generic"
        if all(isinstance(t, AtomScore) for t in self._scores):
            pts = self._scores[0].points
            if all(
                t.points.shape == pts.shape and np.array_equal(t.points, pts)
                for t in self._scores
            ):
                self._atom_points = pts
                self._atom_values = np.stack([t.values for t in self._scores])
                return "atom"
        if all(isinstance(t, PiecewiseScore) for t in self._scores):
            pair_idx: list[int] = []
            flat: list[tuple[float, float, float, float]] = []
            for p, t in enumerate(self._scores):
                for comp in t.components:
                    pair_idx.append(p)
                    flat.append(comp)
            self._pw_bases = np.array([t.base for t in self._scores])
            self._pw_pair = np.asarray(pair_idx, dtype=np.intp)
            arr = np.asarray(flat, dtype=float).reshape(-1, 4)
            self._pw_lo, self._pw_hi = arr[:, 0], arr[:, 1]
            self._pw_const, self._pw_slope = arr[:, 2], arr[:, 3]
            return "piecewise"
        return "generic"

    def _fill_matrix(self, halves: np.ndarray) -> np.ndarray:
        m = len(self.model)
        M = np.zeros((m, m))
        if self._pairs:
            iu = np.triu_indices(m, k=1)
            M[iu] = halves
            M[(iu[1], iu[0])] = -halves
        return M

    # -- evaluation ----------------------------------------------------------

    def statistic_matrix(self, sample: np.ndarray, threads: int = 1) -> np.ndarray:
        """Antisymmetric matrix with entry (i, k) = sum of pair (i, k) scores."""
        x = np.asarray(sample, dtype=float)
        if x.ndim != 1:
            raise ConfigError(f"sample must be one-dimensional, got shape {x.shape}")
        if self._mode == "tuple":
            width = len(self.model.candidates[0])
            if x.size != width:
                raise ConfigError(
                    f"per-coordinate model expects samples of length {width}, got {x.size}"
                )
            halves = np.array(
                [
                    sum(float(coord[c](x[c : c + 1])[0]) for c in range(width))
                    for coord in self._coord_scores
                ]
            )
        elif self._mode == "atom":
            idx = np.clip(
                np.searchsorted(self._atom_points, x), 0, len(self._atom_points) - 1
            )
            if not np.all(self._atom_points[idx] == x):
                bad = x[self._atom_points[idx] != x]
                raise ValueError(
                    f"observation {bad.flat[0]!r} is outside the score's finite space"
                )
            counts = np.bincount(idx, minlength=len(self._atom_points))
            halves = self._atom_values @ counts
        elif self._mode == "piecewise":
            xs = np.sort(x)
            cums = np.concatenate([[0.0], np.cumsum(xs)])
            lo_i = np.searchsorted(xs, self._pw_lo, side="left")
            hi_i = np.searchsorted(xs, self._pw_hi, side="left")
            cnt = hi_i - lo_i
            sums = cums[hi_i] - cums[lo_i]
            contrib = self._pw_const * cnt + self._pw_slope * sums
            halves = x.size * self._pw_bases + np.bincount(
                self._pw_pair, weights=contrib, minlength=len(self._pairs)
            )
        else:
            halves = self._generic_halves(x, threads)
        return self._fill_matrix(np.asarray(halves, dtype=float))

    def _generic_halves(self, x: np.ndarray, threads: int) -> np.ndarray:
        if not self._pairs:
            return np.zeros(0)
        if threads > 1:
            out = np.empty(len(self._pairs))

            def one(p: int) -> None:
                out[p] = float(self._scores[p](x).sum())

            with ThreadPoolExecutor(max_workers=threads) as pool:
                list(pool.map(one, range(len(self._pairs))))
            return out
        return np.array([float(t(x).sum()) for t in self._scores])


def pairwise_statistic(
    sample: np.ndarray,
    model: Model | Sequence[Measure],
    loss: LossSpec,
    threads: int = 1,
) -> np.ndarray:
    """The full pairwise statistic matrix (one-shot engine construction)."""
    return PairwiseEngine(loss, model).statistic_matrix(sample, threads=threads)


def ell_estimate(
    sample: np.ndarray,
    model: Model | Sequence[Measure],
    loss: LossSpec,
    epsilon: float = 1.0,
    engine: PairwiseEngine | None = None,
    threads: int = 1,
) -> EstimateReport:
    """Run the estimator: minimize the sup-statistic over the candidate list.

    ``epsilon`` is the slack admitting near-minimizers (default 1); the
    chosen candidate is the lowest index attaining the exact minimum.  Pass a
    prebuilt ``engine`` to amortize score construction across many samples.
    """
    if not epsilon > 0:
        raise ConfigError(f"epsilon must be positive, got {epsilon}")
    if engine is None:
        engine = PairwiseEngine(loss, model)
    M = engine.statistic_matrix(sample, threads=threads)
    sup = M.max(axis=1)
    lowest = float(sup.min())
    mset = tuple(int(i) for i in np.flatnonzero(sup <= lowest + epsilon))
    return EstimateReport(
        pairwise=M,
        sup_stat=sup,
        epsilon=float(epsilon),
        minimizer_set=mset,
        chosen=int(np.argmin(sup)),
        constant_parts=engine.constant_parts,
    )


def histogram_estimator(sample: np.ndarray, partition: PartitionRef) -> HistogramMeasure:
    """Cellwise-constant density with mass count/n on each partition cell."""
    x = np.asarray(sample, dtype=float)
    if x.size == 0:
        raise ValueError("histogram estimator needs a nonempty sample")
    cells = partition.locate(x)
    if np.any(cells < 0):
        bad = x[cells < 0]
        raise ValueError(f"observation {bad.flat[0]!r} falls outside the partition")
    counts = np.bincount(cells, minlength=partition.cells)
    heights = counts / (x.size * partition.cell_width)
    return HistogramMeasure(partition, heights)


def median_tv_estimator(sample: np.ndarray) -> float:
    """Midpoint of the two central order statistics X_(ceil(n/2)), X_(ceil(n/2)+1).

    Intended for translation models with symmetric unimodal shapes, where
    this point is a TV-estimator at slack 1/2.
    """
    x = np.sort(np.asarray(sample, dtype=float))
    if x.size < 2:
        raise ValueError(f"median estimator needs n >= 2, got n = {x.size}")
    k = math.ceil(x.size / 2)
    return 0.5 * (float(x[k - 1]) + float(x[k]))
