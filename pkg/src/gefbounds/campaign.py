"""Seeded verification campaigns over random or fixed states.

Trial ``t`` of a campaign with seed ``s`` draws its state from
``make_rng(s, t)`` and runs every roof on a stream under ``(t,)`` of seed ``s``,
so a trial's records depend only on ``(s, t)`` and the budgets. That makes
the output independent of how trials are spread across worker processes.
"""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace

from .bounds import BY_ID, HOLDS, INCONCLUSIVE, SKIPPED, VIOLATED, run_registry
from .gef import INNER_ROOF
from .qmat import StateError, make_rng, random_density, random_haar_pure
from .roof import RoofConfig

COLUMNS = ("trial", "seed", "id", "lhs", "rhs", "slack", "verdict",
           "lhs_estimate", "rhs_estimate", "tol", "digest", "detail")

# budgets for campaigns over mixed four-party states, where every roof
# member itself needs four nested roofs; decompositions with as many
# members as the rank reach the same values in far fewer evaluations
FOUR_MIXED_ROOF = RoofConfig(restarts=2, max_evals=150, extra_members=0)
FOUR_MIXED_INNER = RoofConfig(restarts=1, max_evals=50, extra_members=0)


@dataclass(frozen=True)
class Campaign:
    seed: int = 0
    trials: int = 1
    dims: tuple[int, ...] = (2, 2, 2)
    kind: str = "pure"
    rank: tuple[int, int] = (2, 2)
    ids: tuple[str, ...] | None = None
    tol: float | None = None
    roof: RoofConfig = field(default_factory=RoofConfig)
    inner: RoofConfig = INNER_ROOF
    gamma_terms: bool = False
    state: object = None  # fixed state evaluated by every trial

    def __post_init__(self):
        if self.trials < 0:
            raise StateError("trials must be nonnegative")
        if self.kind not in ("pure", "mixed"):
            raise StateError(f"kind must be 'pure' or 'mixed', got {self.kind!r}")
        if len(self.dims) < 2 or any(d < 2 for d in self.dims):
            raise StateError(f"need at least two parties of dimension >= 2, got {self.dims}")
        lo, hi = self.rank
        if self.kind == "mixed" and not 1 <= lo <= hi <= math.prod(self.dims):
            raise StateError(f"rank range {lo}-{hi} does not fit dims {self.dims}")
        for i in self.ids or ():
            if i not in BY_ID:
                raise StateError(f"unknown inequality {i!r}")


def trial_state(c: Campaign, trial: int):
    if c.state is not None:
        return c.state
    rng = make_rng(c.seed, trial)
    if c.kind == "pure":
        return random_haar_pure(c.dims, rng)
    lo, hi = c.rank
    rank = int(rng.integers(lo, hi + 1))
    return random_density(c.dims, rank, rng)


def run_trial(c: Campaign, trial: int) -> list[dict]:
    state = trial_state(c, trial)
    cfg = replace(c.roof, seed=c.seed, stream=(trial,))
    inner = replace(c.inner, seed=c.seed, stream=(trial, 200))
    records = run_registry(state, cfg, c.tol, c.ids, inner, c.gamma_terms)
    return [{"trial": trial, "seed": c.seed, **asdict(r)} for r in records]


def _run_packed(args):
    return run_trial(*args)


def run_campaign(c: Campaign, workers: int = 1) -> list[dict]:
    """All records of all trials, in trial order then registry order."""
    jobs = [(c, t) for t in range(c.trials)]
    if workers <= 1 or c.trials <= 1:
        rows = [run_trial(*j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_run_packed, jobs))
    return [r for trial in rows for r in trial]


def summarize(rows: list[dict]) -> dict:
    out = {v: 0 for v in (HOLDS, VIOLATED, INCONCLUSIVE, SKIPPED)}
    for r in rows:
        out[r["verdict"]] += 1
    out["records"] = len(rows)
    return out


def _cell(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return v


def to_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COLUMNS)
    for r in rows:
        w.writerow([_cell(r[k]) for k in COLUMNS])
    return buf.getvalue()


def _json_safe(v):
    return None if isinstance(v, float) and not math.isfinite(v) else v


def to_json(rows: list[dict]) -> str:
    body = {"summary": summarize(rows),
            "records": [{k: _json_safe(r[k]) for k in COLUMNS} for r in rows]}
    return json.dumps(body, indent=1) + "\n"
