"""Builders for the package's concrete candidate families.

Each builder turns a :class:`ModelBuilderConfig` into an estimator
:class:`~pairfit.estimator.Model` whose candidates are package measures
(samplers and cdfs included, closed-form distances where the families have
them) and whose metadata matches the family: VC dimension for location
grids and monotone nets, the sup-over-norm flatness ratio for histogram and
linear families, the family-wide log-density-ratio bound where every
candidate is positive, and the shared partition when there is one.

All of the idealized "dense" candidate collections become finite nets with
caller-chosen resolution; the grids are kept in ``candidate_params`` so
downstream reports can state the net resolution next to any risk number.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ConfigError
from .estimator import Model
from .measures import (
    CauchyMeasure,
    DiscreteMeasure,
    GaussianMeasure,
    HistogramMeasure,
    Measure,
    PartitionRef,
    PowerMeasure,
    UniformMeasure,
    measure_from_config,
)

__all__ = ["ModelBuilderConfig", "GramData", "build", "l2_inner_products"]

_FAMILIES = (
    "gaussian-location-grid",
    "translation-grid",
    "histogram-net",
    "monotone-net",
    "l2-linear",
    "discrete",
    "regression-tuples",
)

_RELEVANT = {
    "gaussian-location-grid": {"d", "lo", "hi", "step"},
    "translation-grid": {"base", "alpha", "lo", "hi", "step"},
    "histogram-net": {"cells", "value_grid", "j"},
    "monotone-net": {"d", "breakpoint_grid", "level_grid"},
    "l2-linear": {"basis", "cells", "coefficient_net"},
    "discrete": {"space_size", "candidates"},
    "regression-tuples": {"theta_net", "base_q", "n"},
}

_TRANSLATION_BASES = ("cauchy", "uniform", "power")

# Probability-candidate mass must match 1 this closely.
_MASS_TOL = 1e-9


@dataclass(frozen=True)
class ModelBuilderConfig:
    """Declarative description of one candidate family.

    ``family`` selects the builder; the other fields are family-specific and
    must stay None for families that do not use them (mirroring how loss
    configs work).  Grids are given either as (lo, hi, step) ranges or as
    explicit value tuples, depending on the field.
    """

    family: str
    d: int | None = None
    lo: float | None = None
    hi: float | None = None
    step: float | None = None
    base: str | None = None
    alpha: float | None = None
    cells: int | None = None
    value_grid: tuple[float, ...] | None = None
    j: float | None = None
    breakpoint_grid: tuple[float, ...] | None = None
    level_grid: tuple[float, ...] | None = None
    basis: str | None = None
    coefficient_net: tuple[tuple[float, ...], ...] | None = None
    space_size: int | None = None
    candidates: tuple[tuple[float, ...], ...] | None = None
    theta_net: tuple[tuple[float, ...], ...] | None = None
    base_q: dict | None = None
    n: int | None = None

    def __post_init__(self) -> None:
        if self.family not in _FAMILIES:
            raise ConfigError(
                f"unknown model family {self.family!r}; expected one of {_FAMILIES}"
            )
        for name in ("value_grid", "breakpoint_grid", "level_grid"):
            self._freeze(name, _as_float_tuple)
        for name in ("coefficient_net", "candidates", "theta_net"):
            self._freeze(name, _as_vector_tuple)
        relevant = _RELEVANT[self.family]
        for name, value in vars(self).items():
            if name == "family":
                continue
            if value is not None and name not in relevant:
                raise ConfigError(
                    f"model family {self.family!r} does not take parameter {name!r}"
                )
        checker = getattr(self, "_check_" + self.family.replace("-", "_"))
        checker()

    def _freeze(self, name: str, normalize) -> None:
        value = getattr(self, name)
        if value is not None:
            object.__setattr__(self, name, normalize(name, value))

    # -- per-family field validation ------------------------------------------

    def _require(self, *names: str) -> None:
        for name in names:
            if getattr(self, name) is None:
                raise ConfigError(
                    f"model family {self.family!r} requires parameter {name!r}"
                )

    def _check_range(self) -> None:
        self._require("lo", "hi", "step")
        if not self.step > 0:
            raise ConfigError(f"step must be positive, got {self.step!r}")
        if self.hi < self.lo:
            raise ConfigError(f"empty grid: hi = {self.hi!r} < lo = {self.lo!r}")

    def _check_gaussian_location_grid(self) -> None:
        self._require("d")
        if self.d != 1:
            raise ConfigError(
                f"gaussian location grids are one-dimensional here; d = {self.d!r} "
                "is not supported"
            )
        self._check_range()

    def _check_translation_grid(self) -> None:
        self._require("base")
        if self.base not in _TRANSLATION_BASES:
            raise ConfigError(
                f"translation base must be one of {_TRANSLATION_BASES}, got {self.base!r}"
            )
        if self.base == "power":
            self._require("alpha")
            if not 0.0 < self.alpha <= 1.0:
                raise ConfigError(
                    f"power base needs alpha in (0, 1], got {self.alpha!r}"
                )
        elif self.alpha is not None:
            raise ConfigError(f"base {self.base!r} does not take alpha")
        self._check_range()

    def _check_histogram_net(self) -> None:
        self._require("cells", "value_grid")
        if not isinstance(self.cells, int) or self.cells < 1:
            raise ConfigError(f"cells must be a positive integer, got {self.cells!r}")
        if not self.value_grid:
            raise ConfigError("value_grid must be nonempty")
        if any(v < 0 for v in self.value_grid):
            raise ConfigError("value_grid entries must be nonnegative heights")
        if self.j is not None and not self.j > 1:
            raise ConfigError(f"ratio exponent j must exceed 1, got {self.j!r}")

    def _check_monotone_net(self) -> None:
        self._require("d", "breakpoint_grid", "level_grid")
        if not isinstance(self.d, int) or self.d < 1:
            raise ConfigError(f"piece count d must be a positive integer, got {self.d!r}")
        grid = self.breakpoint_grid
        if len(grid) < 2:
            raise ConfigError("breakpoint_grid needs at least two points")
        diffs = np.diff(grid)
        if np.any(diffs <= 0):
            raise ConfigError("breakpoint_grid must be strictly increasing")
        if np.max(diffs) - np.min(diffs) > 1e-9 * np.max(diffs):
            raise ConfigError(
                "breakpoint_grid must be equally spaced (candidates share one partition)"
            )
        if not self.level_grid or any(v <= 0 for v in self.level_grid):
            raise ConfigError("level_grid must be nonempty with positive density levels")

    def _check_l2_linear(self) -> None:
        self._require("basis")
        if self.basis == "user":
            raise ConfigError(
                "user bases carry no concrete densities; pass coefficients and a "
                "Gram matrix to l2_inner_products instead of building a model"
            )
        if self.basis != "indicator":
            raise ConfigError(
                f"basis must be 'indicator' or 'user', got {self.basis!r}"
            )
        self._require("cells", "coefficient_net")
        if not isinstance(self.cells, int) or self.cells < 1:
            raise ConfigError(f"cells must be a positive integer, got {self.cells!r}")
        if not self.coefficient_net:
            raise ConfigError("coefficient_net must be nonempty")
        for row in self.coefficient_net:
            if len(row) != self.cells:
                raise ConfigError(
                    f"coefficient vectors must have length {self.cells}, got {len(row)}"
                )

    def _check_discrete(self) -> None:
        self._require("space_size", "candidates")
        if not isinstance(self.space_size, int) or self.space_size < 1:
            raise ConfigError(
                f"space_size must be a positive integer, got {self.space_size!r}"
            )
        if not self.candidates:
            raise ConfigError("candidate list must be nonempty")
        for idx, row in enumerate(self.candidates):
            if len(row) != self.space_size:
                raise ConfigError(
                    f"candidate {idx} has {len(row)} masses for a "
                    f"{self.space_size}-point space"
                )
            if any(v < 0 for v in row):
                raise ConfigError(f"candidate {idx} has negative masses")
            if abs(sum(row) - 1.0) > _MASS_TOL:
                raise ConfigError(
                    f"candidate {idx} masses sum to {sum(row)!r}, not 1"
                )

    def _check_regression_tuples(self) -> None:
        self._require("theta_net", "base_q", "n")
        if not isinstance(self.n, int) or self.n < 1:
            raise ConfigError(f"n must be a positive integer, got {self.n!r}")
        if not self.theta_net:
            raise ConfigError("theta_net must be nonempty")
        for idx, row in enumerate(self.theta_net):
            if len(row) != self.n:
                raise ConfigError(
                    f"theta vector {idx} has length {len(row)}, expected n = {self.n}"
                )
        if not isinstance(self.base_q, dict) or "family" not in self.base_q:
            raise ConfigError("base_q must be a measure config with a 'family' key")

    # -- config round-trip -----------------------------------------------------

    def to_config(self) -> dict:
        cfg: dict = {"family": self.family}
        for name, value in vars(self).items():
            if name == "family" or value is None:
                continue
            if isinstance(value, tuple):
                value = [list(v) if isinstance(v, tuple) else v for v in value]
            cfg[name] = value
        return cfg

    @classmethod
    def from_config(cls, cfg: dict) -> "ModelBuilderConfig":
        if not isinstance(cfg, dict) or "family" not in cfg:
            raise ConfigError("model config must be a mapping with a 'family' key")
        known = {"family"} | set().union(*_RELEVANT.values())
        extra = set(cfg) - known
        if extra:
            raise ConfigError(f"unknown model config keys {sorted(extra)}")
        return cls(**cfg)


def _as_float_tuple(name: str, value) -> tuple[float, ...]:
    try:
        return tuple(float(v) for v in value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{name} must be a sequence of numbers") from exc


def _as_vector_tuple(name: str, value) -> tuple[tuple[float, ...], ...]:
    try:
        return tuple(tuple(float(v) for v in row) for row in value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{name} must be a sequence of numeric vectors") from exc


# ---------------------------------------------------------------------------
# Builders
# ---------------------------------------------------------------------------


def build(config: ModelBuilderConfig | dict) -> Model:
    """Build the candidate model described by ``config``."""
    if isinstance(config, dict):
        config = ModelBuilderConfig.from_config(config)
    builder = _BUILDERS[config.family]
    return builder(config)


def _location_grid(lo: float, hi: float, step: float) -> list[float]:
    count = int(math.floor((hi - lo) / step + 1e-9)) + 1
    return [lo + k * step for k in range(count)]


def _build_gaussian_grid(config: ModelBuilderConfig) -> Model:
    grid = _location_grid(config.lo, config.hi, config.step)
    candidates = [GaussianMeasure(m, 1.0) for m in grid]
    return Model(
        candidates=candidates,
        vc_dimension=float(config.d + 1),
        kl_a=_log_ratio_bound(candidates),
        candidate_params=grid,
    )


def _build_translation_grid(config: ModelBuilderConfig) -> Model:
    grid = _location_grid(config.lo, config.hi, config.step)
    if config.base == "cauchy":
        candidates: list[Measure] = [CauchyMeasure(t, 1.0) for t in grid]
    elif config.base == "uniform":
        candidates = [UniformMeasure(t, 1.0) for t in grid]
    else:
        candidates = [PowerMeasure(config.alpha, shift=t) for t in grid]
    return Model(
        candidates=candidates,
        kl_a=_log_ratio_bound(candidates) if config.base == "cauchy" else None,
        candidate_params=grid,
    )


def _build_histogram_net(config: ModelBuilderConfig) -> Model:
    cells = config.cells
    part = PartitionRef(cells, (0.0, 1.0))
    j = 2.0 if config.j is None else config.j
    candidates = []
    params = []
    for heights in itertools.product(config.value_grid, repeat=cells):
        if abs(sum(heights) / cells - 1.0) <= _MASS_TOL:
            candidates.append(HistogramMeasure(part, heights))
            params.append(heights)
    if not candidates:
        raise ConfigError(
            "no height combination from value_grid averages to 1; the net is empty"
        )
    return Model(
        candidates=candidates,
        ratio_R=float(cells) ** (1.0 / j),
        kl_a=_log_ratio_bound(candidates),
        partition=part,
        candidate_params=params,
    )


def _build_monotone_net(config: ModelBuilderConfig) -> Model:
    grid = config.breakpoint_grid
    cells = len(grid) - 1
    support_len = grid[-1] - grid[0]
    width = support_len / cells
    part = PartitionRef(cells, (grid[0], grid[-1]))
    levels = sorted(set(config.level_grid), reverse=True)
    seen: dict[tuple[float, ...], HistogramMeasure] = {}
    for start in range(cells):
        for pieces in range(1, config.d + 1):
            for ends in itertools.combinations(range(start + 1, cells + 1), pieces):
                bounds = (start,) + ends
                run_lengths = [bounds[i + 1] - bounds[i] for i in range(pieces)]
                for run_levels in itertools.combinations(levels, pieces):
                    mass = width * sum(
                        lv * rl for lv, rl in zip(run_levels, run_lengths)
                    )
                    if abs(mass - 1.0) > _MASS_TOL:
                        continue
                    heights = np.zeros(cells)
                    pos = start
                    for lv, rl in zip(run_levels, run_lengths):
                        # Levels are Lebesgue densities; reference heights
                        # carry the support-length factor.
                        heights[pos : pos + rl] = lv * support_len
                        pos += rl
                    key = tuple(float(h) for h in heights)
                    if key not in seen:
                        seen[key] = HistogramMeasure(part, heights)
    if not seen:
        raise ConfigError(
            "no non-increasing density from these grids integrates to 1; "
            "the net is empty"
        )
    return Model(
        candidates=list(seen.values()),
        vc_dimension=float(2 * config.d),
        partition=part,
        candidate_params=[list(k) for k in seen],
    )


def _build_l2_linear(config: ModelBuilderConfig) -> Model:
    cells = config.cells
    part = PartitionRef(cells, (0.0, 1.0))
    scale = math.sqrt(float(cells))
    candidates = [
        HistogramMeasure(part, [scale * c for c in row])
        for row in config.coefficient_net
    ]
    return Model(
        candidates=candidates,
        ratio_R=scale,
        partition=part,
        candidate_params=[list(row) for row in config.coefficient_net],
    )


def _build_discrete(config: ModelBuilderConfig) -> Model:
    points = [float(k) for k in range(config.space_size)]
    candidates = [DiscreteMeasure(points, row) for row in config.candidates]
    return Model(
        candidates=candidates,
        kl_a=_log_ratio_bound(candidates),
        candidate_params=[list(row) for row in config.candidates],
    )


def _translate(base: Measure, shift: float) -> Measure:
    if isinstance(base, GaussianMeasure):
        return GaussianMeasure(base.mean + shift, base.sd)
    if isinstance(base, CauchyMeasure):
        return CauchyMeasure(base.loc + shift, base.scale)
    if isinstance(base, UniformMeasure):
        return UniformMeasure(base.low + shift, base.width)
    if isinstance(base, PowerMeasure):
        return PowerMeasure(base.alpha, base.shift + shift)
    raise ConfigError(
        f"base family {base.tag!r} has no translation parameter"
    )


def _build_regression_tuples(config: ModelBuilderConfig) -> Model:
    base = measure_from_config(config.base_q)
    candidates = [
        tuple(_translate(base, theta_i) for theta_i in theta)
        for theta in config.theta_net
    ]
    return Model(
        candidates=candidates,
        product_form="tuples",
        candidate_params=[list(theta) for theta in config.theta_net],
    )


_BUILDERS = {
    "gaussian-location-grid": _build_gaussian_grid,
    "translation-grid": _build_translation_grid,
    "histogram-net": _build_histogram_net,
    "monotone-net": _build_monotone_net,
    "l2-linear": _build_l2_linear,
    "discrete": _build_discrete,
    "regression-tuples": _build_regression_tuples,
}


# ---------------------------------------------------------------------------
# Family-wide log-density-ratio bound (KL metadata)
# ---------------------------------------------------------------------------


def _density_spread(
    candidates: Sequence[Measure], xs: np.ndarray
) -> np.ndarray | None:
    """Per-point log spread ``log max_i p_i - log min_i p_i``, or None.

    None means some candidate vanishes at a point where another is positive,
    so no finite family-wide log-ratio bound exists.  Points where every
    candidate vanishes contribute ``-inf`` (they never host the maximum).
    """
    stacked = np.array([m.pdf(xs) for m in candidates])
    col_max = stacked.max(axis=0)
    col_min = stacked.min(axis=0)
    active = col_max > 0.0
    if np.any(col_min[active] <= 0.0):
        return None
    spread = np.full(xs.shape, -np.inf)
    spread[active] = np.log(col_max[active]) - np.log(col_min[active])
    return spread


def _log_ratio_bound(candidates: Sequence[Measure]) -> float | None:
    """Max over a probe grid of ``|log(p_i / p_k)|`` across all pairs.

    Returns None when some candidate vanishes where another is positive
    (the KL family then has no finite log-ratio bound).  The target equals
    ``max_x [log max_i p_i(x) - log min_i p_i(x)]``, so one column pass per
    probe point covers every pair.  The coarse probe (a global grid plus
    every candidate breakpoint and the midpoints between them) is polished
    by zooming into the best bracket a few times, since windows can span
    thousands of scale units while the ratio peaks near the centers.
    """
    if len(candidates) < 2:
        return None
    if all(isinstance(m, DiscreteMeasure) for m in candidates):
        points = sorted({p for m in candidates for p, _ in m.atoms()})
        stacked = np.array(
            [[dict(m.atoms()).get(p, 0.0) for p in points] for m in candidates]
        )
        col_max = stacked.max(axis=0)
        col_min = stacked.min(axis=0)
        active = col_max > 0.0
        if not np.any(active):
            return None
        if np.any(col_min[active] <= 0.0):
            return None
        return float(np.max(np.log(col_max[active]) - np.log(col_min[active])))
    if any(m.atoms() for m in candidates):
        return None
    lo = min(m.window()[0] for m in candidates)
    hi = max(m.window()[1] for m in candidates)
    brk = sorted(
        {b for m in candidates for b in m.breakpoints() if lo < b < hi} | {lo, hi}
    )
    edges = np.array(brk)
    mids = 0.5 * (edges[:-1] + edges[1:])
    probe = np.unique(np.concatenate([np.linspace(lo, hi, 513), edges, mids]))
    spread = _density_spread(candidates, probe)
    if spread is None:
        return None
    best = int(np.argmax(spread))
    if not np.isfinite(spread[best]):
        return None
    value = spread[best]
    left = probe[max(best - 1, 0)]
    right = probe[min(best + 1, probe.size - 1)]
    for _ in range(3):
        xs = np.linspace(left, right, 129)
        local = _density_spread(candidates, xs)
        if local is None:
            return None
        best = int(np.argmax(local))
        value = max(value, local[best])
        left = xs[max(best - 1, 0)]
        right = xs[min(best + 1, xs.size - 1)]
    return float(value)


# ---------------------------------------------------------------------------
# L2 Gram data
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GramData:
    """Exact L2 geometry of linear-model candidates, from coefficients.

    ``inner_products[i, k]`` is the L2 inner product of candidates i and k;
    with an orthonormal basis it is the plain coefficient dot product.
    """

    gram: np.ndarray
    coefficients: np.ndarray
    inner_products: np.ndarray
    ratio_R: float | None

    def norm_sq(self, i: int) -> float:
        return float(self.inner_products[i, i])

    def distance(self, i: int, k: int) -> float:
        d2 = (
            self.inner_products[i, i]
            - 2.0 * self.inner_products[i, k]
            + self.inner_products[k, k]
        )
        return math.sqrt(max(d2, 0.0))

    def score_constant(self, i: int, k: int) -> float:
        """Data-free part ``(|p|^2 - |q|^2) / (2 |p - q|)`` of the L2 score."""
        dist = self.distance(i, k)
        if dist == 0.0:
            return 0.0
        return (self.norm_sq(i) - self.norm_sq(k)) / (2.0 * dist)


def l2_inner_products(
    model: Model | Sequence[Sequence[float]], gram: np.ndarray | None = None
) -> GramData:
    """Exact norms and inner products of linear-model candidates.

    ``model`` is either a model built by the ``l2-linear`` family (its
    stored coefficients are used, with the identity Gram of the orthonormal
    indicator basis) or a plain coefficient matrix, in which case ``gram``
    may supply the basis Gram matrix (identity when omitted, i.e. the basis
    is taken as orthonormal).
    """
    ratio: float | None = None
    if isinstance(model, Model):
        if model.candidate_params is None:
            raise ConfigError("model carries no coefficient vectors")
        coeffs = np.asarray(model.candidate_params, dtype=float)
        ratio = model.ratio_R
    else:
        coeffs = np.asarray(model, dtype=float)
    if coeffs.ndim != 2:
        raise ConfigError(
            f"coefficients must form a 2-d array, got shape {coeffs.shape}"
        )
    dim = coeffs.shape[1]
    if gram is None:
        gram_arr = np.eye(dim)
    else:
        gram_arr = np.asarray(gram, dtype=float)
        if gram_arr.shape != (dim, dim):
            raise ConfigError(
                f"Gram matrix must be {dim}x{dim}, got shape {gram_arr.shape}"
            )
    if not np.all(np.isfinite(gram_arr)):
        raise ConfigError("Gram matrix entries must be finite")
    if not np.all(np.isfinite(coeffs)):
        raise ConfigError("coefficient entries must be finite")
    inner = coeffs @ gram_arr @ coeffs.T
    return GramData(
        gram=gram_arr,
        coefficients=coeffs,
        inner_products=inner,
        ratio_R=ratio,
    )
