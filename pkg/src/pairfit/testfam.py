"""Per-loss families of pairwise score functions and their exact checkers.

For an ordered pair of candidate measures (P, Q), a score function
``t_{(P,Q)}`` maps one observation to a real number; summing over a sample
gives the pairwise statistic ``T(X, P, Q)``.  Each loss has its own family:

    * TV:      t = 1/2 [1_{q>p} - Q(q>p)] - 1/2 [1_{p>q} - P(p>q)]
    * W_1:     t(x) = ∫_x^1 s(u) du + C,  s = sign(F_Q - F_P),
               C = -∫_0^1 s * (F_P+F_Q)/2
    * L_j:     t = (1/(2 R^{j-1})) [∫ f d(P+Q)/2 - f],
               f = sign(p-q) |p-q|^{j-1} / ||p-q||_j^{j-1}
    * L_inf:   on a D-cell partition, with I* the cell maximizing |P(I)-Q(I)|,
               t = sign(P(I*)-Q(I*)) [(P(I*)+Q(I*))/2 - 1_{I*}]
    * Hellinger: t = (1/(2 sqrt2)) [rho(R,Q) - rho(R,P) + (sqrt q - sqrt p)/sqrt r],
               R = (P+Q)/2, rho the affinity; the ratio term is 0 where r = 0
    * KL:      t = (1/(2a)) log(q/p), valid when e^{-a} <= p/q <= e^{a}
               across the family

All families satisfy, for every measure S the data may follow:

    (i)   t_{(P,Q)} = -t_{(Q,P)}
    (ii)  E_S[t] <= a0 * loss(S, P) - a1 * loss(S, Q)
    (iii) sup t - inf t <= 1

and some additionally control the variance:

    (iv)  Var_S[t] <= a2 * [loss(S, P) + loss(S, Q)]

The checkers at the bottom verify (i)-(iv) exactly on finite spaces.  Each
constructed score records its family constants and its data-free constant
part; strict density comparisons are used everywhere, and points with p = q
contribute only through the constant part.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import ConfigError
from .losses import LossSpec, loss
from .measures import (
    DiscreteMeasure,
    DiscreteRef,
    GaussianMeasure,
    CauchyMeasure,
    HistogramMeasure,
    Measure,
    PartitionRef,
    PowerMeasure,
    UniformMeasure,
    cdf_sign_intervals,
    expectation,
    integrate,
    lj_distance,
    sign_change_points,
    tv_distance,
)

__all__ = [
    "FamilyConstants",
    "ScoreFunction",
    "AtomScore",
    "PiecewiseScore",
    "CallableScore",
    "constants_for",
    "score",
    "variational_score",
    "tv_score",
    "wasserstein_score",
    "lj_score",
    "linf_score",
    "hellinger_score",
    "kl_score",
    "check_assumption1_exact",
    "check_assumption2_exact",
    "check_cond3bis",
    "c1_constant",
]

_UP = np.nextafter  # one-ulp shift, used to encode open/closed interval ends


@dataclass(frozen=True)
class FamilyConstants:
    """Constants (a0, a1, a2, b) attached to a score family.

    ``a2`` is None when the family carries no variance guarantee by itself
    (TV needs the model-dependent regularity check; W/L_j/L_inf have none).
    ``b`` is the oscillation scale of the underlying witness construction and
    is None for the Hellinger and KL families, which are not built that way.
    """

    a0: float
    a1: float
    a2: float | None = None
    b: float | None = None


def constants_for(spec: LossSpec) -> FamilyConstants:
    """Family constants for the score family attached to a loss."""
    if spec.kind == "tv":
        return FamilyConstants(a0=1.5, a1=0.5, a2=None, b=1.0)
    if spec.kind == "wasserstein1":
        return FamilyConstants(a0=1.5, a1=0.5, a2=None, b=1.0)
    if spec.kind == "lj":
        scale = spec.R ** (spec.j - 1.0)
        return FamilyConstants(a0=3.0 / (4.0 * scale), a1=1.0 / (4.0 * scale), a2=None, b=2.0 * scale)
    if spec.kind == "linf":
        return FamilyConstants(a0=3.0 / (2.0 * spec.D), a1=1.0 / (2.0 * spec.D), a2=None, b=float(spec.D))
    if spec.kind == "hellinger2":
        return FamilyConstants(
            a0=(math.sqrt(2.0) + 1.0) / 2.0,
            a1=(math.sqrt(2.0) - 1.0) / 2.0,
            a2=1.5,
            b=None,
        )
    if spec.kind == "kl":
        return FamilyConstants(
            a0=1.0 / (2.0 * spec.a),
            a1=1.0 / (2.0 * spec.a),
            a2=1.0 / (spec.a * min(2.0, spec.a)),
            b=None,
        )
    raise ConfigError(f"no score family for loss kind {spec.kind!r}")


# ---------------------------------------------------------------------------
# Score function backends
# ---------------------------------------------------------------------------


class ScoreFunction:
    """One pair's per-observation score.

    Attributes:
        constants: the family constants (a0, a1, a2, b).
        constant_part: the data-free additive term of the score (cached so
            engines and diagnostics never recompute it).
    """

    constants: FamilyConstants
    constant_part: float

    def __call__(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError


class AtomScore(ScoreFunction):
    """Score on a finite space: a value for each point of the space."""

    def __init__(self, points: np.ndarray, values: np.ndarray, constants: FamilyConstants, constant_part: float):
        self.points = np.asarray(points, dtype=float)
        self.values = np.asarray(values, dtype=float)
        self.constants = constants
        self.constant_part = float(constant_part)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        idx = np.clip(np.searchsorted(self.points, x), 0, len(self.points) - 1)
        if not np.all(self.points[idx] == x):
            bad = x[self.points[idx] != x]
            raise ValueError(f"observation {bad.flat[0]!r} is outside the score's finite space")
        return self.values[idx]


class PiecewiseScore(ScoreFunction):
    """Piecewise-linear score: base + sum of (const + slope*x) on [lo, hi).

    Components may not overlap.  Open/closed interval ends are encoded by
    nudging a bound one ulp, so strict density comparisons survive exactly.
    """

    def __init__(
        self,
        base: float,
        components: Sequence[tuple[float, float, float, float]],
        constants: FamilyConstants,
        constant_part: float,
    ):
        self.base = float(base)
        self.components = tuple(
            (float(lo), float(hi), float(c), float(s)) for (lo, hi, c, s) in components
        )
        self.constants = constants
        self.constant_part = float(constant_part)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = np.full(x.shape, self.base)
        for lo, hi, c, s in self.components:
            mask = (x >= lo) & (x < hi)
            if s == 0.0:
                out = np.where(mask, out + c, out)
            else:
                out = np.where(mask, out + c + s * x, out)
        return out


class CallableScore(ScoreFunction):
    """Generic score evaluated through a vectorized callable."""

    def __init__(self, fn: Callable[[np.ndarray], np.ndarray], constants: FamilyConstants, constant_part: float):
        self.fn = fn
        self.constants = constants
        self.constant_part = float(constant_part)

    def __call__(self, x):
        return np.asarray(self.fn(np.asarray(x, dtype=float)), dtype=float)


def _zero_score(constants: FamilyConstants) -> PiecewiseScore:
    return PiecewiseScore(0.0, (), constants, 0.0)


# ---------------------------------------------------------------------------
# Variational construction
# ---------------------------------------------------------------------------


def variational_score(P: Measure, Q: Measure, f: Callable[[np.ndarray], np.ndarray], b: float) -> CallableScore:
    """Score built from a witness function with oscillation at most ``b``:

        t(x) = (1/b) [ ∫ f d(P+Q)/2 - f(x) ]

    carrying constants a0 = 3/(2b), a1 = 1/(2b).
    """
    if b <= 0:
        raise ConfigError(f"oscillation scale b must be positive, got {b}")
    mean_f = 0.5 * (expectation(P, f) + expectation(Q, f))
    const = mean_f / b
    consts = FamilyConstants(a0=1.5 / b, a1=0.5 / b, a2=None, b=b)
    return CallableScore(lambda x: const - np.asarray(f(x), dtype=float) / b, consts, const)


# ---------------------------------------------------------------------------
# TV score family
# ---------------------------------------------------------------------------


def _tv_regions_generic(P: Measure, Q: Measure) -> list[tuple[float, float, float]]:
    """Maximal intervals with constant sign of p - q, via probing + bisection."""
    lo1, hi1 = P.window()
    lo2, hi2 = Q.window()
    lo, hi = min(lo1, lo2), max(hi1, hi2)
    brk = sorted(set(P.breakpoints()) | set(Q.breakpoints()))
    diff = lambda x: P.pdf(x) - Q.pdf(x)
    cuts = sorted({lo, hi} | {b for b in brk if lo < b < hi} | set(sign_change_points(diff, lo, hi, brk)))
    edges = np.array(cuts)
    mids = 0.5 * (edges[:-1] + edges[1:])
    vals = diff(mids)
    out: list[tuple[float, float, float]] = []
    for a, c, v in zip(edges[:-1], edges[1:], vals):
        s = 0.0 if v == 0.0 else math.copysign(1.0, v)
        if out and out[-1][2] == s:
            out[-1] = (out[-1][0], float(c), s)
        else:
            out.append((float(a), float(c), s))
    return out


def _interval_prob(m: Measure, a: float, b: float) -> float:
    return float(m.cdf(np.array([b]))[0] - m.cdf(np.array([a]))[0])


def tv_score(P: Measure, Q: Measure) -> ScoreFunction:
    """TV family score; strict comparisons, so p = q regions only shift the constant."""
    consts = constants_for(LossSpec.tv())

    if isinstance(P, DiscreteMeasure) and isinstance(Q, DiscreteMeasure):
        pts = sorted({p for p, _ in P.atoms()} | {p for p, _ in Q.atoms()})
        mp = dict(P.atoms())
        mq = dict(Q.atoms())
        vp = np.array([mp.get(p, 0.0) for p in pts])
        vq = np.array([mq.get(p, 0.0) for p in pts])
        p_gt = vp > vq
        q_gt = vq > vp
        const = 0.5 * (vp[p_gt].sum() - vq[q_gt].sum())
        values = 0.5 * (q_gt.astype(float) - p_gt.astype(float)) + const
        return AtomScore(np.asarray(pts), values, consts, const)

    if isinstance(P, HistogramMeasure) and isinstance(Q, HistogramMeasure) and P.partition == Q.partition:
        edges = P.partition.edges
        hp, hq = P.heights, Q.heights
        const = 0.5 * float(
            P.cell_masses[hp > hq].sum() - Q.cell_masses[hq > hp].sum()
        )
        comps = []
        for k in range(P.partition.cells):
            if hq[k] > hp[k]:
                comps.append((edges[k], edges[k + 1], 0.5, 0.0))
            elif hp[k] > hq[k]:
                comps.append((edges[k], edges[k + 1], -0.5, 0.0))
        if comps:
            # Close the right edge of the last cell.
            last = comps[-1]
            if last[1] == edges[-1]:
                comps[-1] = (last[0], _UP(edges[-1], math.inf), last[2], last[3])
        return PiecewiseScore(const, comps, consts, const)

    pair_regions = _analytic_tv_regions(P, Q)
    if pair_regions is None:
        pair_regions = [(a, c, s, a, c) for (a, c, s) in _tv_regions_generic(P, Q)]
    comps = []
    prob_p_gt = 0.0
    prob_q_gt = 0.0
    for a, c, s, ea, ec in pair_regions:
        if s > 0:  # p > q
            comps.append((ea, ec, -0.5, 0.0))
            prob_p_gt += _interval_prob(P, a, c)
        elif s < 0:
            comps.append((ea, ec, 0.5, 0.0))
            prob_q_gt += _interval_prob(Q, a, c)
    if _symmetric_translation_pair(P, Q):
        # P(p > q) = Q(q > p) exactly for equal-shape translation pairs, so
        # the data-free term vanishes; computing the difference would leave
        # half-ulp dust that the epsilon = 1/2 median guarantee cannot absorb.
        const = 0.0
    else:
        const = 0.5 * (prob_p_gt - prob_q_gt)
    return PiecewiseScore(const, comps, consts, const)


def _symmetric_translation_pair(P: Measure, Q: Measure) -> bool:
    return (
        (isinstance(P, GaussianMeasure) and isinstance(Q, GaussianMeasure) and P.sd == Q.sd)
        or (isinstance(P, CauchyMeasure) and isinstance(Q, CauchyMeasure) and P.scale == Q.scale)
        or (isinstance(P, UniformMeasure) and isinstance(Q, UniformMeasure) and P.width == Q.width)
    )


def _analytic_tv_regions(
    P: Measure, Q: Measure
) -> list[tuple[float, float, float, float, float]] | None:
    """Exact sign regions of p - q for matched translation families.

    Each region is ``(lo, hi, sign, eval_lo, eval_hi)``.  Probabilities come
    from the exact ``[lo, hi]`` (boundary points are null for these
    continuous families, and nudged bounds would get amplified by cdfs with
    unbounded slope, e.g. the power family at its shift).  ``[eval_lo,
    eval_hi)`` is the score-evaluation interval, with strict open/closed
    endpoint conventions pushed one ulp where needed.
    """
    if isinstance(P, GaussianMeasure) and isinstance(Q, GaussianMeasure) and P.sd == Q.sd:
        if P.mean == Q.mean:
            return []
        mid = 0.5 * (P.mean + Q.mean)
        lo, hi = min(P.window()[0], Q.window()[0]), max(P.window()[1], Q.window()[1])
        s = 1.0 if P.mean < Q.mean else -1.0
        # p > q strictly on the side nearer P's mean; the densities tie at mid.
        return [(lo, mid, s, lo, mid), (mid, hi, -s, _UP(mid, math.inf), hi)]
    if isinstance(P, CauchyMeasure) and isinstance(Q, CauchyMeasure) and P.scale == Q.scale:
        if P.loc == Q.loc:
            return []
        mid = 0.5 * (P.loc + Q.loc)
        lo, hi = min(P.window()[0], Q.window()[0]), max(P.window()[1], Q.window()[1])
        s = 1.0 if P.loc < Q.loc else -1.0
        return [(lo, mid, s, lo, mid), (mid, hi, -s, _UP(mid, math.inf), hi)]
    if isinstance(P, UniformMeasure) and isinstance(Q, UniformMeasure) and P.width == Q.width:
        if P.low == Q.low:
            return []
        if P.low > Q.low:
            return [(a, c, -s, ea, ec) for (a, c, s, ea, ec) in _analytic_tv_regions(Q, P)]
        w = P.width
        c1 = min(Q.low, P.low + w)  # end of the {p > q} stretch
        c2 = max(P.low + w, Q.low)  # start of the {q > p} stretch
        # Supports are right-open, so both regions are naturally [lo, hi).
        return [
            (P.low, c1, 1.0, P.low, c1),
            (c2, Q.low + w, -1.0, c2, Q.low + w),
        ]
    if isinstance(P, PowerMeasure) and isinstance(Q, PowerMeasure) and P.alpha == Q.alpha and P.alpha != 1.0:
        if P.shift == Q.shift:
            return []
        if P.shift > Q.shift:
            return [(a, c, -s, ea, ec) for (a, c, s, ea, ec) in _analytic_tv_regions(Q, P)]
        th, th2 = P.shift, Q.shift
        if P.alpha < 1.0:
            # p > q on (th, min(th2, th+1)], q > p on (th2, th2+1].
            c1 = min(th2, th + 1.0)
            return [
                (th, c1, 1.0, _UP(th, math.inf), _UP(c1, math.inf)),
                (th2, th2 + 1.0, -1.0, _UP(th2, math.inf), _UP(th2 + 1.0, math.inf)),
            ]
        # alpha > 1: p > q on (th, th+1], q > p on (max(th+1, th2), th2+1].
        c2 = max(th + 1.0, th2)
        return [
            (th, th + 1.0, 1.0, _UP(th, math.inf), _UP(th + 1.0, math.inf)),
            (c2, th2 + 1.0, -1.0, _UP(c2, math.inf), _UP(th2 + 1.0, math.inf)),
        ]
    return None


# ---------------------------------------------------------------------------
# Wasserstein score family
# ---------------------------------------------------------------------------


def wasserstein_score(P: Measure, Q: Measure) -> PiecewiseScore:
    """Wasserstein-1 family score on [0, 1].

    With s = sign(F_Q - F_P) piecewise constant, the score is the piecewise
    linear function t(x) = ∫_x^1 s(u) du + C, C = -∫_0^1 s (F_P + F_Q)/2,
    which has slope -s(x) and t's data-free part C computed by exact cdf
    integrals.
    """
    consts = constants_for(LossSpec.wasserstein1())
    intervals = cdf_sign_intervals(P, Q)
    if all(s == 0.0 for (_, _, s) in intervals):
        return _zero_score(consts)
    C = 0.0
    for lo, hi, s in intervals:
        if s != 0.0:
            C -= s * 0.5 * (P.cdf_integral(lo, hi) + Q.cdf_integral(lo, hi))
    comps = []
    tail = 0.0  # ∫ over intervals to the right of the current one
    for lo, hi, s in reversed(intervals):
        # On [lo, hi): t(x) = C + tail + s*(hi - x).
        hi_bound = _UP(hi, math.inf) if hi >= 1.0 else hi
        comps.append((lo, hi_bound, tail + s * hi, -s))
        tail += s * (hi - lo)
    comps.reverse()
    return PiecewiseScore(C, comps, consts, C)


# ---------------------------------------------------------------------------
# L_j score family
# ---------------------------------------------------------------------------


def _lj_witness_values(dp: np.ndarray, dq: np.ndarray, j: float) -> np.ndarray:
    """f = sign(p-q) |p-q|^{j-1} / ||p-q||_j^{j-1} as values; norm handled by caller."""
    diff = dp - dq
    return np.sign(diff) * np.abs(diff) ** (j - 1.0)


def lj_score(P: Measure, Q: Measure, j: float, R: float) -> ScoreFunction:
    """L_j family score, t = (1/(2 R^{j-1})) [∫ f d(P+Q)/2 - f].

    Requires the model-level norm-ratio bound ``R`` with
    ||p - q||_inf <= R ||p - q||_j; signed densities are allowed.
    """
    if not (1.0 < j < math.inf):
        raise ConfigError(f"lj score needs j in (1, inf), got {j}")
    if R <= 0:
        raise ConfigError(f"lj score needs positive R, got {R}")
    spec = LossSpec.lj(j=j, R=R)
    consts = constants_for(spec)
    scale = 2.0 * R ** (j - 1.0)
    dist = lj_distance(P, Q, j)
    if dist == 0.0:
        return _zero_score(consts)
    norm_factor = dist ** (j - 1.0)

    ref = P.reference
    if isinstance(ref, PartitionRef) and Q.reference == ref:
        f_vals = _lj_witness_values(np.asarray(P.heights), np.asarray(Q.heights), j) / norm_factor
        mean_f = float(np.sum(f_vals * 0.5 * (P.cell_masses + Q.cell_masses)))
        edges = ref.edges
        comps = []
        for k in range(ref.cells):
            hi = _UP(edges[k + 1], math.inf) if k == ref.cells - 1 else edges[k + 1]
            comps.append((edges[k], hi, -f_vals[k] / scale, 0.0))
        return PiecewiseScore(mean_f / scale, comps, consts, mean_f / scale)
    if isinstance(ref, DiscreteRef) and Q.reference == ref:
        pts = ref.points_array
        dp = P.density(pts)
        dq = Q.density(pts)
        f_vals = _lj_witness_values(dp, dq, j) / norm_factor
        w = ref.weights_array
        mean_f = float(np.sum(f_vals * 0.5 * (dp + dq) * w))
        values = (mean_f - f_vals) / scale
        return AtomScore(pts, values, consts, mean_f / scale)
    # Lebesgue-reference continuous pair.
    fn_f = lambda x: _lj_witness_values(P.pdf(x), Q.pdf(x), j) / norm_factor
    brk = sorted(set(P.breakpoints()) | set(Q.breakpoints()))
    mean_f = 0.5 * (expectation(P, fn_f, brk) + expectation(Q, fn_f, brk))
    return CallableScore(
        lambda x: (mean_f - fn_f(x)) / scale, consts, mean_f / scale
    )


# ---------------------------------------------------------------------------
# L_inf score family
# ---------------------------------------------------------------------------


def _cell_masses_on(m: Measure, partition: PartitionRef) -> np.ndarray:
    if isinstance(m, HistogramMeasure) and m.partition == partition:
        return m.cell_masses
    edges = partition.edges
    cdf_vals = np.asarray(m.cdf(edges), dtype=float)
    return np.diff(cdf_vals)


def linf_score(P: Measure, Q: Measure, partition: PartitionRef) -> PiecewiseScore:
    """L_inf family score on a D-cell partition.

    Only the cell I* with the largest |P(I) - Q(I)| matters (lowest index on
    ties): t = sign(P(I*) - Q(I*)) [(P(I*) + Q(I*))/2 - 1_{I*}].
    """
    spec = LossSpec.linf(D=partition.cells)
    consts = constants_for(spec)
    mp = _cell_masses_on(P, partition)
    mq = _cell_masses_on(Q, partition)
    gaps = np.abs(mp - mq)
    star = int(np.argmax(gaps))  # argmax returns the lowest index on ties
    if gaps[star] == 0.0:
        return _zero_score(consts)
    s = math.copysign(1.0, mp[star] - mq[star])
    const = s * 0.5 * (mp[star] + mq[star])
    edges = partition.edges
    hi = _UP(edges[star + 1], math.inf) if star == partition.cells - 1 else edges[star + 1]
    comps = [(edges[star], hi, -s, 0.0)]
    return PiecewiseScore(const, comps, consts, const)


# ---------------------------------------------------------------------------
# Hellinger score family
# ---------------------------------------------------------------------------


def hellinger_score(P: Measure, Q: Measure) -> ScoreFunction:
    """Squared-Hellinger family score.

    With R = (P+Q)/2 and rho the affinity ∫ sqrt(dM dM'), the score is
    t = (1/(2 sqrt2)) [rho(R,Q) - rho(R,P) + (sqrt q - sqrt p)/sqrt r]
    understood w.r.t. any common dominating measure; the ratio term is set to
    0 where p = q = 0.
    """
    consts = constants_for(LossSpec.hellinger2())

    if isinstance(P, DiscreteMeasure) and isinstance(Q, DiscreteMeasure):
        pts = sorted({p for p, _ in P.atoms()} | {p for p, _ in Q.atoms()})
        mp = dict(P.atoms())
        mq = dict(Q.atoms())
        vp = np.clip(np.array([mp.get(p, 0.0) for p in pts]), 0.0, None)
        vq = np.clip(np.array([mq.get(p, 0.0) for p in pts]), 0.0, None)
        vr = 0.5 * (vp + vq)
        rho_q = float(np.sum(np.sqrt(vr * vq)))
        rho_p = float(np.sum(np.sqrt(vr * vp)))
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(vr > 0.0, (np.sqrt(vq) - np.sqrt(vp)) / np.sqrt(np.where(vr > 0, vr, 1.0)), 0.0)
        scale = 1.0 / (2.0 * math.sqrt(2.0))
        const = scale * (rho_q - rho_p)
        values = const + scale * ratio
        return AtomScore(np.asarray(pts), values, consts, const)

    if P.atoms() or Q.atoms():
        raise ConfigError("hellinger scores support finite spaces or continuous pairs, not mixtures")

    brk = sorted(set(P.breakpoints()) | set(Q.breakpoints()))
    lo = min(P.window()[0], Q.window()[0])
    hi = max(P.window()[1], Q.window()[1])

    def sqrt_rq(x):
        p = np.clip(P.pdf(x), 0.0, None)
        q = np.clip(Q.pdf(x), 0.0, None)
        return np.sqrt(0.5 * (p + q) * q)

    def sqrt_rp(x):
        p = np.clip(P.pdf(x), 0.0, None)
        q = np.clip(Q.pdf(x), 0.0, None)
        return np.sqrt(0.5 * (p + q) * p)

    rho_q, _ = integrate(sqrt_rq, lo, hi, brk)
    rho_p, _ = integrate(sqrt_rp, lo, hi, brk)
    scale = 1.0 / (2.0 * math.sqrt(2.0))
    const = scale * (rho_q - rho_p)

    def fn(x):
        p = np.clip(P.pdf(x), 0.0, None)
        q = np.clip(Q.pdf(x), 0.0, None)
        r = 0.5 * (p + q)
        ratio = np.where(r > 0.0, (np.sqrt(q) - np.sqrt(p)) / np.sqrt(np.where(r > 0, r, 1.0)), 0.0)
        return const + scale * ratio

    return CallableScore(fn, consts, const)


# ---------------------------------------------------------------------------
# KL score family
# ---------------------------------------------------------------------------


def kl_score(P: Measure, Q: Measure, a: float) -> ScoreFunction:
    """KL family score t = (1/(2a)) log(q/p), under the family-wide bound
    ``exp(-a) <= p/q <= exp(a)`` (checked on atoms or a probe grid)."""
    if a <= 0:
        raise ConfigError(f"kl score needs a positive log-ratio bound, got {a}")
    consts = constants_for(LossSpec.kl(a=a))
    scale = 1.0 / (2.0 * a)
    tol = 1e-9

    if isinstance(P, DiscreteMeasure) and isinstance(Q, DiscreteMeasure):
        pts = sorted({p for p, _ in P.atoms()} | {p for p, _ in Q.atoms()})
        mp = dict(P.atoms())
        mq = dict(Q.atoms())
        vp = np.array([mp.get(p, 0.0) for p in pts])
        vq = np.array([mq.get(p, 0.0) for p in pts])
        if np.any(vp <= 0.0) or np.any(vq <= 0.0):
            raise ValueError("kl scores need strictly positive densities on the space")
        logs = np.log(vq) - np.log(vp)
        if np.max(np.abs(logs)) > a + tol:
            raise ValueError(
                f"log-ratio bound violated: |log(q/p)| reaches {np.max(np.abs(logs)):.6g} > a = {a:.6g}"
            )
        return AtomScore(np.asarray(pts), scale * logs, consts, 0.0)

    lo = min(P.window()[0], Q.window()[0])
    hi = max(P.window()[1], Q.window()[1])
    grid = np.linspace(lo, hi, 4096)

    def fn(x):
        p = P.pdf(x)
        q = Q.pdf(x)
        good = (p > 0.0) & (q > 0.0)
        out = np.where(good, np.log(np.where(good, q, 1.0)) - np.log(np.where(good, p, 1.0)), 0.0)
        return scale * out

    p_grid = P.pdf(grid)
    q_grid = Q.pdf(grid)
    good = (p_grid > 0.0) & (q_grid > 0.0)
    if np.any(p_grid[~good] > 0.0) or np.any(q_grid[~good] > 0.0):
        raise ValueError("kl scores need a common support across the family")
    logs = np.abs(np.log(q_grid[good]) - np.log(p_grid[good]))
    if logs.size and logs.max() > a + tol:
        raise ValueError(
            f"log-ratio bound violated: |log(q/p)| reaches {logs.max():.6g} > a = {a:.6g}"
        )
    return CallableScore(fn, consts, 0.0)


# ---------------------------------------------------------------------------
# Dispatcher
# ---------------------------------------------------------------------------


def score(spec: LossSpec, P: Measure, Q: Measure) -> ScoreFunction:
    """Score function of the family attached to ``spec`` for the pair (P, Q)."""
    if spec.kind == "tv":
        return tv_score(P, Q)
    if spec.kind == "hellinger2":
        return hellinger_score(P, Q)
    if spec.kind == "kl":
        return kl_score(P, Q, spec.a)
    if spec.kind == "wasserstein1":
        return wasserstein_score(P, Q)
    if spec.kind == "lj":
        return lj_score(P, Q, spec.j, spec.R)
    if spec.kind == "linf":
        partition = P.reference if isinstance(P.reference, PartitionRef) else None
        if partition is None or partition.cells != spec.D:
            raise ValueError(
                f"linf scores need measures on a {spec.D}-cell partition reference"
            )
        return linf_score(P, Q, partition)
    raise ConfigError(f"no score family for loss kind {spec.kind!r}")


# ---------------------------------------------------------------------------
# Exact checkers for the family assumptions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AssumptionReport:
    """Worst-case slacks of the family assumptions over a model.

    Positive slack means violation; the checker lists every (pair, probe)
    combination whose slack exceeds ``tol``.
    """

    family: str
    pairs_checked: int
    worst_antisymmetry: float
    worst_mean_slack: float
    worst_oscillation: float
    worst_variance_slack: float | None
    violations: tuple[str, ...]

    @property
    def passed(self) -> bool:
        return not self.violations


def _probe_points(measures: Sequence[Measure], size: int = 512) -> np.ndarray:
    """Evaluation points: all atoms, or a grid over the union window."""
    atom_pts: set[float] = set()
    all_atomic = True
    for m in measures:
        pts = m.atoms()
        if pts:
            atom_pts |= {p for p, _ in pts}
        else:
            all_atomic = False
    if all_atomic and atom_pts:
        return np.array(sorted(atom_pts))
    lo = min(m.window()[0] for m in measures)
    hi = max(m.window()[1] for m in measures)
    brk = sorted({b for m in measures for b in m.breakpoints()})
    return np.unique(np.concatenate([np.linspace(lo, hi, size), np.asarray(brk or [lo])]))


def _score_moments(t: ScoreFunction, S: Measure) -> tuple[float, float]:
    """(E_S[t], Var_S[t]); exact on atomic S and for flat components, quadrature otherwise."""
    if isinstance(S, DiscreteMeasure):
        pts = np.array([p for p, _ in S.atoms()])
        ms = np.array([m for _, m in S.atoms()])
        vals = t(pts)
        mean = float(np.sum(vals * ms))
        var = float(np.sum(vals * vals * ms) - mean * mean)
        return mean, var
    if isinstance(t, PiecewiseScore) and all(s == 0.0 for (_, _, _, s) in t.components):
        # Piecewise-constant score: moments reduce to exact cdf increments.
        mean = t.base
        second = t.base * t.base
        for lo, hi, c, _ in t.components:
            prob = _interval_prob(S, lo, hi)
            mean += c * prob
            second += ((t.base + c) ** 2 - t.base * t.base) * prob
        return mean, second - mean * mean
    extra = [c[0] for c in t.components] if isinstance(t, PiecewiseScore) else ()
    mean = expectation(S, t, extra)
    second = expectation(S, lambda x: np.asarray(t(x)) ** 2, extra)
    return mean, second - mean * mean


def check_assumption1_exact(
    spec: LossSpec,
    model: Sequence[Measure],
    probes: Sequence[Measure],
    tol: float = 1e-12,
) -> AssumptionReport:
    """Verify antisymmetry, the mean bound, and the oscillation bound.

    For every ordered candidate pair (P, Q), P != Q, and every probe measure
    S, checks:

        (i)   t_{(P,Q)} + t_{(Q,P)} = 0 at every evaluation point,
        (ii)  E_S[t] - [a0 loss(S,P) - a1 loss(S,Q)] <= tol,
        (iii) (sup t - inf t) - 1 <= tol.

    Everything is exact on finite spaces (atom sums, no quadrature).
    """
    candidates = list(model)
    pts = _probe_points(list(candidates) + list(probes))
    worst_anti = 0.0
    worst_mean = -math.inf
    worst_osc = -math.inf
    violations: list[str] = []
    consts = constants_for(spec)
    pair_count = 0
    loss_cache: dict[tuple[int, int], float] = {}

    def cached_loss(si: int, S: Measure, qi: int, Q: Measure) -> float:
        key = (si, qi)
        if key not in loss_cache:
            loss_cache[key] = loss(spec, S, Q)
        return loss_cache[key]

    for i, P in enumerate(candidates):
        for k, Q in enumerate(candidates):
            if i == k:
                continue
            pair_count += 1
            t = score(spec, P, Q)
            t_rev = score(spec, Q, P)
            anti = float(np.max(np.abs(t(pts) + t_rev(pts))))
            worst_anti = max(worst_anti, anti)
            if anti > tol:
                violations.append(f"antisymmetry pair ({i},{k}): {anti:.3e}")
            vals = t(pts)
            osc = float(vals.max() - vals.min()) - 1.0
            worst_osc = max(worst_osc, osc)
            if osc > tol:
                violations.append(f"oscillation pair ({i},{k}): 1 + {osc:.3e}")
            for si, S in enumerate(probes):
                mean, _ = _score_moments(t, S)
                bound = consts.a0 * cached_loss(-si - 1, S, i, P) - consts.a1 * cached_loss(-si - 1, S, k, Q)
                slack = mean - bound
                worst_mean = max(worst_mean, slack)
                if slack > tol:
                    violations.append(f"mean bound pair ({i},{k}) probe {si}: slack {slack:.3e}")
    return AssumptionReport(
        family=spec.kind,
        pairs_checked=pair_count,
        worst_antisymmetry=worst_anti,
        worst_mean_slack=worst_mean if pair_count else 0.0,
        worst_oscillation=worst_osc if pair_count else 0.0,
        worst_variance_slack=None,
        violations=tuple(violations),
    )


def check_assumption2_exact(
    spec: LossSpec,
    model: Sequence[Measure],
    probes: Sequence[Measure],
    a2: float | None = None,
    tol: float = 1e-12,
) -> AssumptionReport:
    """Verify the variance bound Var_S[t] <= a2 [loss(S,P) + loss(S,Q)].

    ``a2`` defaults to the family constant; for TV it must be supplied
    (usually ``1 + a2'`` from ``check_cond3bis``).
    """
    consts = constants_for(spec)
    if a2 is None:
        a2 = consts.a2
    if a2 is None:
        raise ConfigError(
            f"family {spec.kind!r} has no intrinsic variance constant; pass a2 explicitly"
        )
    candidates = list(model)
    worst_var = -math.inf
    violations: list[str] = []
    pair_count = 0
    for i, P in enumerate(candidates):
        for k, Q in enumerate(candidates):
            if i == k:
                continue
            pair_count += 1
            t = score(spec, P, Q)
            for si, S in enumerate(probes):
                _, var = _score_moments(t, S)
                bound = a2 * (loss(spec, S, P) + loss(spec, S, Q))
                slack = var - bound
                worst_var = max(worst_var, slack)
                if slack > tol:
                    violations.append(f"variance pair ({i},{k}) probe {si}: slack {slack:.3e}")
    return AssumptionReport(
        family=spec.kind,
        pairs_checked=pair_count,
        worst_antisymmetry=0.0,
        worst_mean_slack=0.0,
        worst_oscillation=0.0,
        worst_variance_slack=worst_var if pair_count else 0.0,
        violations=tuple(violations),
    )


@dataclass(frozen=True)
class Cond3bisReport:
    """Result of the TV-regularity check over a model."""

    a2_prime: float
    passes: bool

    @property
    def tv_a2(self) -> float:
        """The variance constant 1 + a2' usable by the TV family."""
        return 1.0 + self.a2_prime


def check_cond3bis(model: Sequence[Measure]) -> Cond3bisReport:
    """Smallest a2' with min{P(p<=q), Q(p>q)} <= a2' TV(P,Q) over ordered pairs.

    Ratios with TV(P, Q) = 0 are skipped (the numerator vanishes too).  The
    check passes when the supremum is finite, and then the TV score family
    satisfies the variance bound with a2 = 1 + a2'.
    """
    candidates = list(model)
    worst = 0.0
    for i, P in enumerate(candidates):
        for k, Q in enumerate(candidates):
            if i == k:
                continue
            tv = tv_distance(P, Q)
            if tv == 0.0:
                continue
            if isinstance(P, DiscreteMeasure) and isinstance(Q, DiscreteMeasure):
                pts = sorted({p for p, _ in P.atoms()} | {p for p, _ in Q.atoms()})
                mp = dict(P.atoms())
                mq = dict(Q.atoms())
                vp = np.array([mp.get(p, 0.0) for p in pts])
                vq = np.array([mq.get(p, 0.0) for p in pts])
                p_le = float(vp[vp <= vq].sum())
                q_gt = float(vq[vp > vq].sum())
            elif isinstance(P, HistogramMeasure) and isinstance(Q, HistogramMeasure) and P.partition == Q.partition:
                hp, hq = P.heights, Q.heights
                p_le = float(P.cell_masses[hp <= hq].sum())
                q_gt = float(Q.cell_masses[hp > hq].sum())
            else:
                regions = _analytic_tv_regions(P, Q)
                if regions is None:
                    regions = [(a, c, s, a, c) for (a, c, s) in _tv_regions_generic(P, Q)]
                p_gt = sum(_interval_prob(P, a, c) for a, c, s, _, _ in regions if s > 0)
                q_gt = sum(_interval_prob(Q, a, c) for a, c, s, _, _ in regions if s > 0)
                p_le = 1.0 - p_gt
            worst = max(worst, min(p_le, q_gt) / tv)
    return Cond3bisReport(a2_prime=worst, passes=math.isfinite(worst))


def c1_constant(a1: float, a2: float) -> float:
    """Deviation constant c1(a1, a2); degree-one homogeneous in (a1, a2)."""
    if a1 <= 0 or a2 <= 0:
        raise ConfigError(f"c1 needs positive constants, got a1={a1}, a2={a2}")
    denom = 2.0 * (1.0 + math.log(4.0)) + 4.0 * a1 / a2 + 16.0 * a2 * math.log(2.0) / a1
    return (a1 / 2.0) / denom
