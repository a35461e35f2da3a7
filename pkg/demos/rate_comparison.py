"""Fast versus root-n estimation rates, measured from seeded runs.

The TV risk of the pairwise-test estimator decays like 1/n on a uniform
translation grid (the densities have jumps, so one observation near an
endpoint is very informative) but only like 1/sqrt(n) on a Gaussian
location grid.  This script fits log-log slopes of the median loss.

Run:  python3 demos/rate_comparison.py
"""

import pairfit.sim as sim
from pairfit.losses import LossSpec
from pairfit.measures import GaussianMeasure, UniformMeasure
from pairfit.models import ModelBuilderConfig

REPS = 200


def show(title: str, curve: dict) -> None:
    print(title)
    print(f"{'n':>6}  {'median loss':>12}")
    for row in curve["rows"]:
        print(f"{row['n']:>6}  {row['median_loss']:>12.6f}")
    print(f"fitted log-log slope: {curve['slope']:.3f}")
    print()


def main() -> None:
    uniform_scenario = sim.Scenario(
        truth=UniformMeasure(0.025, 1.0),
        model=ModelBuilderConfig(
            family="translation-grid", base="uniform", lo=0.0, hi=0.05, step=0.0002
        ),
        loss=LossSpec.tv(),
        n=100,
        replications=REPS,
        seed=11,
    )
    show(
        f"uniform translation grid, TV loss ({REPS} reps per n)",
        sim.rate_curve(uniform_scenario, [100, 400, 1600], threads=2),
    )

    gaussian_scenario = sim.Scenario(
        truth=GaussianMeasure(0.0, 1.0),
        model=ModelBuilderConfig(
            family="gaussian-location-grid", d=1, lo=-0.6, hi=0.6, step=0.01
        ),
        loss=LossSpec.tv(),
        n=50,
        replications=REPS,
        seed=21,
    )
    show(
        f"Gaussian location grid, TV loss ({REPS} reps per n)",
        sim.rate_curve(gaussian_scenario, [50, 200, 800], threads=2),
    )
    print("slope near -1 is the fast rate; slope near -0.5 is root-n")


if __name__ == "__main__":
    main()
