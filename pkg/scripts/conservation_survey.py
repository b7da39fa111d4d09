"""Conserved quantities of the Painleve models over many random seeds.

Prints, per model, how many seeds were tried, how many indices were checked
and whether every value stayed constant.  Example:

    python3 scripts/conservation_survey.py --seeds 50 --sweeps 24
"""

import argparse
import random
import time
from dataclasses import dataclass, field

from qcluster.arith import exact_str
from qcluster.models import PAINLEVE, conserved_quantities, make_model, random_positive_rationals
from qcluster.seed import run_schedule
from qcluster.verify import check_conservation, check_painleve


@dataclass
class SurveyConfig:
    models: list = field(default_factory=lambda: sorted(PAINLEVE))
    seeds: int = 25
    sweeps: int = 20
    rng_seed: int = 0
    show: int = 1  # print the constants of the first few seeds


def survey(cfg: SurveyConfig):
    rng = random.Random(cfg.rng_seed)
    rows = []
    for name in cfg.models:
        m = make_model(name)
        t0 = time.perf_counter()
        checked, bad = 0, 0
        for i in range(cfg.seeds):
            seed = m.seed(x=random_positive_rationals(rng, m.n), plain=random_positive_rationals(rng, m.n))
            tr = run_schedule(seed, m.schedule, cfg.sweeps)
            for rep in (check_conservation(m, tr), check_painleve(m, tr, parts=("monitors",))):
                checked += rep.checked
                bad += not rep.ok
            if i < cfg.show:
                cq = conserved_quantities(m, tr, 0)
                print(f"  {name} seed {i}: " + ", ".join(f"{k}={exact_str(v)}" for k, v in cq.values.items()))
        rows.append((name, cfg.seeds, checked, bad, time.perf_counter() - t0))
    return rows


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--models", nargs="*", default=sorted(PAINLEVE))
    ap.add_argument("--seeds", type=int, default=25)
    ap.add_argument("--sweeps", type=int, default=20)
    ap.add_argument("--rng-seed", type=int, default=0)
    ap.add_argument("--show", type=int, default=1)
    a = ap.parse_args()
    cfg = SurveyConfig(a.models, a.seeds, a.sweeps, a.rng_seed, a.show)
    rows = survey(cfg)
    print(f"{'model':8} {'seeds':>5} {'checked':>8} {'failed':>6} {'time':>7}")
    for name, seeds, checked, bad, dt in rows:
        print(f"{name:8} {seeds:5d} {checked:8d} {bad:6d} {dt:6.2f}s")
    return 1 if any(r[3] for r in rows) else 0


if __name__ == "__main__":
    raise SystemExit(main())
