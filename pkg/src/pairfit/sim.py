"""Seeded Monte Carlo experiments over the pairwise estimator and tests.

A :class:`Scenario` bundles a data-generating truth (one shared measure, a
per-coordinate contamination of one, or an explicit vector of measures), a
candidate-family config, a loss, and the run geometry.  Every replication
draws its own counter-based RNG stream from (seed, replication index), so
results are bit-identical no matter how replications are scheduled across
threads.  Attained losses are always measured against the true marginals,
never against the sample.

Per-replication wall times are kept on the in-memory rows for profiling but
never written by the artifact builders, which emit byte-stable CSV, JSON
lines, and summary documents.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .bounds import vc_bound_tv, wasserstein_dev_bound
from .errors import ConfigError
from .estimator import PairwiseEngine, ell_estimate
from .losses import LossSpec, aggregate_loss, loss
from .measures import Measure, MixtureMeasure, measure_from_config
from .models import ModelBuilderConfig, build
from .robust_tests import Decision, bernstein_bound, hoeffding_bound, run_test
from .testfam import constants_for

__all__ = [
    "FORMAT_VERSION",
    "Contamination",
    "Scenario",
    "ReplicationRow",
    "ExperimentRecord",
    "replication_rng",
    "sample_truth",
    "truth_marginals",
    "run_estimation",
    "deviation_frequency",
    "rate_curve",
    "test_error_mc",
    "records_csv_text",
    "records_jsonl_text",
    "summary_json_text",
    "curve_csv_text",
    "write_artifacts",
]

FORMAT_VERSION = "1"


@dataclass(frozen=True)
class Contamination:
    """Coordinate-wise contamination of a base truth.

    Coordinate i draws from the contaminant with probability ``alphas[i]``
    and from the base otherwise, so its marginal is the usual two-component
    mixture.
    """

    base: Measure
    alphas: tuple[float, ...]
    contaminant: Measure

    def __post_init__(self) -> None:
        object.__setattr__(self, "alphas", tuple(float(a) for a in self.alphas))
        if not self.alphas:
            raise ConfigError("contamination needs at least one alpha")
        if any(not 0.0 <= a <= 1.0 for a in self.alphas):
            raise ConfigError("contamination weights must lie in [0, 1]")


@dataclass(frozen=True)
class Scenario:
    """One reproducible experiment: truth, model, loss, and run geometry."""

    truth: Measure | Contamination | tuple[Measure, ...]
    model: ModelBuilderConfig
    loss: LossSpec
    n: int
    epsilon: float = 1.0
    replications: int = 1
    seed: int = 0

    def __post_init__(self) -> None:
        if isinstance(self.truth, list):
            object.__setattr__(self, "truth", tuple(self.truth))
        if not isinstance(self.n, int) or isinstance(self.n, bool) or self.n < 1:
            raise ConfigError(f"n must be a positive integer, got {self.n!r}")
        if (
            not isinstance(self.replications, int)
            or isinstance(self.replications, bool)
            or self.replications < 1
        ):
            raise ConfigError(
                f"replications must be a positive integer, got {self.replications!r}"
            )
        if not self.epsilon > 0:
            raise ConfigError(f"epsilon must be positive, got {self.epsilon!r}")
        if not isinstance(self.seed, int) or isinstance(self.seed, bool):
            raise ConfigError(f"seed must be an integer, got {self.seed!r}")
        if isinstance(self.truth, Contamination) and len(self.truth.alphas) != self.n:
            raise ConfigError(
                f"contamination has {len(self.truth.alphas)} weights for n = {self.n}"
            )
        if isinstance(self.truth, tuple):
            if len(self.truth) != self.n:
                raise ConfigError(
                    f"truth vector has {len(self.truth)} coordinates for n = {self.n}"
                )
            if not all(isinstance(m, Measure) for m in self.truth):
                raise ConfigError("truth vector entries must be measures")
        elif not isinstance(self.truth, (Measure, Contamination)):
            raise ConfigError(
                "truth must be a measure, a contamination, or a vector of measures"
            )

    # -- config round-trip ---------------------------------------------------

    def to_config(self) -> dict:
        if isinstance(self.truth, Contamination):
            truth_cfg = {
                "kind": "contaminated",
                "base": self.truth.base.to_config(),
                "alphas": list(self.truth.alphas),
                "contaminant": self.truth.contaminant.to_config(),
            }
        elif isinstance(self.truth, tuple):
            truth_cfg = {
                "kind": "tuples",
                "components": [m.to_config() for m in self.truth],
            }
        else:
            truth_cfg = {"kind": "iid", "measure": self.truth.to_config()}
        return {
            "truth": truth_cfg,
            "model": self.model.to_config(),
            "loss": self.loss.to_config(),
            "n": self.n,
            "epsilon": self.epsilon,
            "replications": self.replications,
            "seed": self.seed,
        }

    @classmethod
    def from_config(cls, cfg: dict) -> "Scenario":
        if not isinstance(cfg, dict):
            raise ConfigError("scenario config must be a mapping")
        missing = {"truth", "model", "loss", "n"} - set(cfg)
        if missing:
            raise ConfigError(f"scenario config is missing keys {sorted(missing)}")
        truth_cfg = cfg["truth"]
        if not isinstance(truth_cfg, dict) or "kind" not in truth_cfg:
            raise ConfigError("scenario truth must be a mapping with a 'kind' key")
        kind = truth_cfg["kind"]
        if kind == "iid":
            truth: Measure | Contamination | tuple = measure_from_config(
                truth_cfg["measure"]
            )
        elif kind == "contaminated":
            truth = Contamination(
                base=measure_from_config(truth_cfg["base"]),
                alphas=tuple(truth_cfg["alphas"]),
                contaminant=measure_from_config(truth_cfg["contaminant"]),
            )
        elif kind == "tuples":
            truth = tuple(measure_from_config(c) for c in truth_cfg["components"])
        else:
            raise ConfigError(f"unknown truth kind {kind!r}")
        return cls(
            truth=truth,
            model=ModelBuilderConfig.from_config(cfg["model"]),
            loss=LossSpec.from_config(cfg["loss"]),
            n=cfg["n"],
            epsilon=cfg.get("epsilon", 1.0),
            replications=cfg.get("replications", 1),
            seed=cfg.get("seed", 0),
        )

    def digest(self) -> str:
        """Design fingerprint: everything except the seed."""
        cfg = self.to_config()
        del cfg["seed"]
        blob = json.dumps(cfg, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class ReplicationRow:
    """One replication's outcome; runtime stays off the written artifacts."""

    rep: int
    chosen: int
    loss: float
    sup_stat: float
    runtime: float


@dataclass(frozen=True)
class ExperimentRecord:
    digest: str
    scenario: dict
    rows: tuple[ReplicationRow, ...]
    summary: dict

    def __post_init__(self) -> None:
        if len(self.rows) != self.scenario["replications"]:
            raise ConfigError(
                f"{len(self.rows)} rows for {self.scenario['replications']} replications"
            )

    @property
    def seed(self) -> int:
        return self.scenario["seed"]


# ---------------------------------------------------------------------------
# Sampling
# ---------------------------------------------------------------------------


def replication_rng(seed: int, rep: int) -> np.random.Generator:
    """Counter-based stream keyed by (seed, replication index).

    Each replication owns an independent Philox key, so draws cannot be
    reordered by scheduling and adding replications never perturbs earlier
    ones.
    """
    key = np.array([seed % 2**64, rep % 2**64], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def sample_truth(scenario: Scenario, rng: np.random.Generator) -> np.ndarray:
    truth = scenario.truth
    if isinstance(truth, Contamination):
        flips = rng.random(scenario.n)
        base_draw = truth.base.sample(scenario.n, rng)
        cont_draw = truth.contaminant.sample(scenario.n, rng)
        return np.where(flips < np.asarray(truth.alphas), cont_draw, base_draw)
    if isinstance(truth, tuple):
        return np.array([float(m.sample(1, rng)[0]) for m in truth])
    return truth.sample(scenario.n, rng)


def truth_marginals(scenario: Scenario) -> list[Measure] | Measure:
    """The true coordinate marginals that attained losses are measured against."""
    truth = scenario.truth
    if isinstance(truth, Contamination):
        mixtures: dict[float, Measure] = {}
        out = []
        for a in truth.alphas:
            if a not in mixtures:
                if a == 0.0:
                    mixtures[a] = truth.base
                else:
                    mixtures[a] = MixtureMeasure(truth.base, a, truth.contaminant)
            out.append(mixtures[a])
        return out
    if isinstance(truth, tuple):
        return list(truth)
    return truth


class _LossTable:
    """Per-candidate attained loss against the truth, computed lazily.

    Contaminated truths repeat one mixture object across coordinates, so
    losses are computed once per distinct marginal and weighted by its
    multiplicity.  Values are deterministic, so a benign double-compute
    under threads cannot change any recorded number.
    """

    def __init__(self, scenario: Scenario, model) -> None:
        self._spec = scenario.loss
        self._n = scenario.n
        self._marginals = truth_marginals(scenario)
        if isinstance(self._marginals, list):
            groups: dict[int, int] = {}
            members: dict[int, Measure] = {}
            for m in self._marginals:
                groups[id(m)] = groups.get(id(m), 0) + 1
                members[id(m)] = m
            self._grouped = [(members[k], c) for k, c in groups.items()]
        else:
            self._grouped = [(self._marginals, self._n)]
        self._candidates = model.candidates
        self._cache: dict[int, float] = {}

    def __call__(self, index: int) -> float:
        value = self._cache.get(index)
        if value is None:
            cand = self._candidates[index]
            if isinstance(cand, (tuple, list)):
                value = (
                    aggregate_loss(self._spec, self._marginals, list(cand), n=self._n)
                    / self._n
                )
            else:
                value = (
                    sum(c * loss(self._spec, m, cand) for m, c in self._grouped)
                    / self._n
                )
            self._cache[index] = value
        return value

    def minimum(self) -> float:
        return min(self(i) for i in range(len(self._candidates)))


# ---------------------------------------------------------------------------
# Operations
# ---------------------------------------------------------------------------


def _summarize(rows: tuple[ReplicationRow, ...]) -> dict:
    losses = np.array([r.loss for r in rows])
    sups = np.array([r.sup_stat for r in rows])
    q10, q25, q50, q75, q90 = (
        float(v) for v in np.quantile(losses, [0.1, 0.25, 0.5, 0.75, 0.9])
    )
    counts: dict[str, int] = {}
    for r in rows:
        counts[str(r.chosen)] = counts.get(str(r.chosen), 0) + 1
    return {
        "loss": {
            "mean": float(losses.mean()),
            "median": q50,
            "q10": q10,
            "q25": q25,
            "q75": q75,
            "q90": q90,
            "min": float(losses.min()),
            "max": float(losses.max()),
        },
        "sup_stat": {"mean": float(sups.mean()), "median": float(np.median(sups))},
        "chosen_counts": counts,
    }


def run_estimation(scenario: Scenario, threads: int = 1) -> ExperimentRecord:
    """Run every replication of the scenario and record outcomes.

    Deterministic for a given (scenario, seed): thread count only changes
    scheduling, never any recorded value.
    """
    model = build(scenario.model)
    engine = PairwiseEngine(scenario.loss, model)
    table = _LossTable(scenario, model)

    def one(rep: int) -> ReplicationRow:
        rng = replication_rng(scenario.seed, rep)
        x = sample_truth(scenario, rng)
        start = time.perf_counter()
        report = ell_estimate(
            x, model, scenario.loss, epsilon=scenario.epsilon, engine=engine
        )
        elapsed = time.perf_counter() - start
        return ReplicationRow(
            rep=rep,
            chosen=report.chosen,
            loss=table(report.chosen),
            sup_stat=float(report.sup_stat[report.chosen]),
            runtime=elapsed,
        )

    reps = range(scenario.replications)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = tuple(pool.map(one, reps))
    else:
        rows = tuple(one(r) for r in reps)
    return ExperimentRecord(
        digest=scenario.digest(),
        scenario=scenario.to_config(),
        rows=rows,
        summary=_summarize(rows),
    )


def _deviation_bound(scenario: Scenario, model, xi: float, inf_loss: float) -> float:
    kind = scenario.loss.kind
    if kind == "wasserstein1":
        return float(
            wasserstein_dev_bound(
                n=scenario.n, xi=xi, epsilon=scenario.epsilon, approx=inf_loss
            )
        )
    if kind == "tv":
        if model.vc_dimension is None:
            raise ConfigError(
                "TV deviation bound needs a model with a VC dimension"
            )
        return float(
            vc_bound_tv(
                V=model.vc_dimension,
                n=scenario.n,
                xi=xi,
                epsilon=scenario.epsilon,
                approx=inf_loss,
            )
        )
    raise ConfigError(f"no deviation bound wired for loss kind {kind!r}")


def deviation_frequency(
    scenario: Scenario, xis: list, threads: int = 1
) -> dict:
    """Empirical frequency of {attained loss <= bound(xi)} next to its target.

    The guarantee is one-sided: each frequency should be at least
    ``1 - exp(-xi)`` up to Monte Carlo noise, with slack when the bound's
    constants are conservative.
    """
    record = run_estimation(scenario, threads=threads)
    model = build(scenario.model)
    inf_loss = _LossTable(scenario, model).minimum()
    losses = np.array([r.loss for r in record.rows])
    rows = []
    for xi in xis:
        if not xi > 0:
            raise ConfigError(f"xi must be positive, got {xi!r}")
        bound = _deviation_bound(scenario, model, float(xi), inf_loss)
        rows.append(
            {
                "xi": float(xi),
                "bound": bound,
                "frequency": float(np.mean(losses <= bound)),
                "target": 1.0 - math.exp(-float(xi)),
            }
        )
    return {"digest": record.digest, "inf_loss": inf_loss, "rows": rows}


def rate_curve(scenario: Scenario, ns: list, threads: int = 1) -> dict:
    """Median attained loss at each sample size, plus a fitted log-log slope."""
    if not ns:
        raise ConfigError("rate_curve needs at least one sample size")
    rows = []
    for n in ns:
        rec = run_estimation(
            dataclasses.replace(scenario, n=int(n)), threads=threads
        )
        rows.append({"n": int(n), "median_loss": rec.summary["loss"]["median"]})
    medians = np.array([r["median_loss"] for r in rows])
    slope = None
    if len(rows) >= 2 and np.all(medians > 0):
        slope = float(
            np.polyfit(np.log([r["n"] for r in rows]), np.log(medians), 1)[0]
        )
    return {"rows": rows, "slope": slope}


def test_error_mc(
    P_star: Measure,
    P: Measure,
    Q: Measure,
    loss_spec: LossSpec,
    n: int,
    reps: int,
    seed: int,
) -> dict:
    """Monte Carlo error of the two-point test under sampling from P_star.

    P is the candidate the truth is (weakly) closer to, so a wrong decision
    is choosing Q; ties abstain in favor of P and are tallied separately.
    When every replication ties (P and Q indistinguishable) the error
    frequency is reported as None rather than zero.
    """
    if not isinstance(reps, int) or reps < 1:
        raise ConfigError(f"reps must be a positive integer, got {reps!r}")
    if not isinstance(n, int) or n < 1:
        raise ConfigError(f"n must be a positive integer, got {n!r}")
    tallies = {Decision.CHOOSE_P: 0, Decision.CHOOSE_Q: 0, Decision.TIE: 0}
    for rep in range(reps):
        rng = replication_rng(seed, rep)
        x = P_star.sample(n, rng)
        tallies[run_test(x, P, Q, loss_spec).decision] += 1
    consts = constants_for(loss_spec)
    loss_P = loss(loss_spec, P_star, P)
    loss_Q = loss(loss_spec, P_star, Q)
    agg_Q = n * loss_Q
    if loss_Q > 0:
        gamma = (consts.a0 * loss_P) / (consts.a1 * loss_Q)
        bound_h = hoeffding_bound(consts.a1, gamma, agg_Q, n)
        bound_b = (
            bernstein_bound(consts.a0, consts.a1, consts.a2, gamma, agg_Q)
            if consts.a2 is not None
            else None
        )
    else:
        gamma = None
        bound_h = 1.0
        bound_b = 1.0 if consts.a2 is not None else None
    decided = tallies[Decision.CHOOSE_P] + tallies[Decision.CHOOSE_Q]
    if decided == 0:
        empirical = None
        three_sigma = None
        note = "all replications tied; error frequency undefined"
    else:
        empirical = tallies[Decision.CHOOSE_Q] / reps
        three_sigma = 3.0 * math.sqrt(max(empirical * (1.0 - empirical), 0.0) / reps)
        note = f"empirical error {empirical} within {three_sigma} (3-sigma binomial)"
    return {
        "empirical_error": empirical,
        "choose_p": tallies[Decision.CHOOSE_P],
        "choose_q": tallies[Decision.CHOOSE_Q],
        "ties": tallies[Decision.TIE],
        "replications": reps,
        "gamma": gamma,
        "bound_hoeffding": bound_h,
        "bound_bernstein": bound_b,
        "three_sigma": three_sigma,
        "note": note,
    }


# ---------------------------------------------------------------------------
# Artifact builders (all byte-deterministic)
# ---------------------------------------------------------------------------


def records_csv_text(record: ExperimentRecord) -> str:
    lines = ["rep,chosen,loss,sup_stat"]
    for r in record.rows:
        lines.append(f"{r.rep},{r.chosen},{r.loss!r},{r.sup_stat!r}")
    return "\n".join(lines) + "\n"


def records_jsonl_text(record: ExperimentRecord) -> str:
    out = []
    for r in record.rows:
        out.append(
            json.dumps(
                {
                    "rep": r.rep,
                    "chosen": r.chosen,
                    "loss": r.loss,
                    "sup_stat": r.sup_stat,
                },
                sort_keys=True,
            )
        )
    return "\n".join(out) + "\n"


def summary_json_text(record: ExperimentRecord, extra: dict | None = None) -> str:
    doc = {
        "format_version": FORMAT_VERSION,
        "digest": record.digest,
        "scenario": record.scenario,
        "summary": record.summary,
    }
    if extra:
        doc.update(extra)
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def curve_csv_text(table: dict) -> str:
    lines = ["n,median_loss"]
    for row in table["rows"]:
        lines.append(f"{row['n']},{row['median_loss']!r}")
    return "\n".join(lines) + "\n"


def write_artifacts(
    record: ExperimentRecord,
    out_dir: str | Path,
    curve: dict | None = None,
    basename: str | None = None,
) -> list[Path]:
    """Write the record's artifacts under ``out_dir``; returns the paths.

    Files are named by the scenario digest and seed unless a basename is
    given, so distinct designs never collide in a shared directory.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    stem = basename or f"{record.digest[:16]}-s{record.seed}"
    paths = []
    targets = [
        (f"{stem}-records.csv", records_csv_text(record)),
        (f"{stem}-records.jsonl", records_jsonl_text(record)),
        (f"{stem}-summary.json", summary_json_text(record)),
    ]
    if curve is not None:
        targets.append((f"{stem}-curve.csv", curve_csv_text(curve)))
    for name, text in targets:
        path = out / name
        path.write_text(text)
        paths.append(path)
    return paths
