"""Acceptance suite. Each test prints one ``[acceptance] N ... PASS|FAIL`` line.

Run alone with ``pytest tests/test_acceptance.py -v``; the lines appear even
without ``-s``.
"""
import json
import math
import time
from fractions import Fraction as F

import numpy as np
import pytest

from gefbounds import catalog as cat
from gefbounds.bounds import EXACT_IDS, HOLDS, INCONCLUSIVE, VIOLATED, evaluate_inequality
from gefbounds.campaign import FOUR_MIXED_INNER, FOUR_MIXED_ROOF, Campaign, run_campaign
from gefbounds.cli import main
from gefbounds.coefficients import E2, S1, S2, S3, Affine, derive_coefficients
from gefbounds.gef import gef_pure_four, gef_pure_tri, gef_pure_tri_modified
from gefbounds.measures import _pure_eof_batch, eof_two_qubit_mixed
from gefbounds.qmat import make_rng, random_density
from gefbounds.roof import RoofConfig, minimize_convex_roof

SEED = 20240611
EXTENDED_BELL = {
    "eb_ab": lambda t, f: [cat.eb_ab(t, f, w) for w in cat.BELL],
    "eb_bc": lambda t, f: [cat.eb_bc(t, f, w) for w in cat.BELL],
    "eb_ac1": lambda t, f: [cat.eb_ac1(t, f, s) for s in "+-"],
    "eb_ac2": lambda t, f: [cat.eb_ac2(t, f, s) for s in "+-"],
}


@pytest.fixture
def announce(capsys):
    def emit(number, title, ok, detail=""):
        with capsys.disabled():
            print(f"\n[acceptance] {number} {title}: {'PASS' if ok else 'FAIL'}  {detail}")
    return emit


def extended_bell_states():
    rng = make_rng(SEED, 3)
    angles = rng.uniform(0, 2 * math.pi, (16, 2))
    for name, build in EXTENDED_BELL.items():
        for theta, phi in [(0.0, 0.0), *angles]:
            for psi in build(theta, phi):
                yield name, psi


def test_1_coefficient_chain(announce, capsys):
    start = time.perf_counter()
    report = derive_coefficients()
    code = main(["coeffs", "--format", "json"])
    elapsed = time.perf_counter() - start
    body = json.loads(capsys.readouterr().out)
    s = {step.name: step.derived for step in report.steps}
    checks = [
        report.ok, code == 0, body["ok"] is True,
        s["P3U"] == {S2: Affine(F(1, 6)), S1: Affine(F(1, 3))},
        s["P4U1"] == {S3: Affine(F(1, 14)), S2: Affine(F(2, 21)), S1: Affine(F(1, 4))},
        s["P4U2"] == {S2: Affine(F(4, 21)), S1: Affine(F(5, 28))},
        s["P4U3"] == {S2: Affine(F(13, 42))},
        s["P4L1"][E2] == Affine(F(5, 42), F(2, 42)),
        s["P4L3"] == {E2: Affine(F(2, 7), F(1, 21))},
        elapsed < 1.0,
    ]
    ok = all(checks)
    announce(1, "coefficient chain", ok, f"{sum(checks)}/{len(checks)} checks, {elapsed:.3f} s")
    assert ok


def test_2_exact_inequality_fuzz(announce):
    start = time.perf_counter()
    runs = [
        Campaign(seed=SEED, trials=10_000, dims=(2, 2, 2), kind="pure", ids=EXACT_IDS),
        Campaign(seed=SEED + 1, trials=1_000, dims=(2, 2, 2, 2), kind="pure", ids=EXACT_IDS),
        Campaign(seed=SEED + 2, trials=1_000, dims=(2, 2, 2), kind="mixed", rank=(2, 8),
                 ids=EXACT_IDS),
    ]
    records = [r for c in runs for r in run_campaign(c)]
    bad = [r for r in records if r["verdict"] != HOLDS]
    elapsed = time.perf_counter() - start
    ok = not bad and {r["id"] for r in records} == set(EXACT_IDS)
    announce(2, "exact-inequality fuzz", ok,
             f"{len(records)} records, {len(bad)} not holding, "
             f"min slack {min(r['slack'] for r in records):.2e}, {elapsed:.1f} s")
    assert ok, bad[:5]


def test_3_catalog_fixed_points(announce):
    errors = {}
    ghz = cat.ghz(3)
    errors["ghz3"] = max(abs(gef_pure_tri(ghz).total - 1), abs(gef_pure_tri_modified(ghz).total - 1))
    spread = {}
    eb_err = 0.0
    for name, psi in extended_bell_states():
        o, m = gef_pure_tri(psi).total, gef_pure_tri_modified(psi).total
        eb_err = max(eb_err, abs(o - 5 / 6), abs(m - 1))
        spread.setdefault(name, []).append((o, m))
    chi = max(float(np.ptp(np.array(v), axis=0).max()) for v in spread.values())
    errors["extended bell"] = eb_err
    errors["w3"] = abs(gef_pure_tri(cat.w3()).total - 1.193324)
    errors["ghz4"] = abs(gef_pure_four(cat.ghz(4)).total - 1)
    errors["bell_bell"] = abs(gef_pure_four(cat.bell_bell()).total - F(32, 21))
    limits = {"ghz3": 1e-9, "extended bell": 1e-9, "w3": 1e-5, "ghz4": 1e-3, "bell_bell": 5e-3}
    ok = all(errors[k] <= limits[k] for k in limits) and chi <= 1e-8
    detail = ", ".join(f"{k} {v:.1e}" for k, v in errors.items()) + f", spectator spread {chi:.1e}"
    announce(3, "catalog fixed points", ok, detail)
    assert ok


def test_4_roof_matches_wootters(announce):
    cfg = RoofConfig(restarts=1, max_evals=4000, seed=SEED)
    start = time.perf_counter()
    worst_gap, worst_below = 0.0, 0.0
    for i in range(200):
        rho = random_density((2, 2), 2 + i % 3, make_rng(SEED, 4, i))
        roof = minimize_convex_roof(rho, _pure_eof_batch, cfg.child(i), batched=True).value
        exact = eof_two_qubit_mixed(rho)
        worst_gap = max(worst_gap, abs(roof - exact))
        worst_below = max(worst_below, exact - roof)
    elapsed = time.perf_counter() - start
    ok = worst_gap <= 5e-3 and worst_below <= 1e-9 and elapsed < 120
    announce(4, "roof vs closed form", ok,
             f"max |diff| {worst_gap:.1e}, max undershoot {worst_below:.1e}, {elapsed:.1f} s")
    assert ok


def test_5_equality_witnesses(announce):
    slacks = [evaluate_inequality("P3L", cat.ghz(3)).slack]
    slacks += [evaluate_inequality("P3L", psi).slack for _, psi in extended_bell_states()]
    tri = max(abs(s) for s in slacks)
    four = abs(evaluate_inequality("P4L1-0", cat.ghz(4)).slack)
    ok = tri <= 1e-9 and four <= 1e-3
    announce(5, "equality witnesses", ok, f"P3L max |slack| {tri:.1e}, P4L1-0 |slack| {four:.1e}")
    assert ok


def test_6_mixed_tri_party_bounds(announce):
    c = Campaign(seed=SEED, trials=100, dims=(2, 2, 2), kind="mixed", rank=(2, 2),
                 ids=("M3U", "M3L", "M3L0"))
    records = run_campaign(c)
    by = {i: [r["verdict"] for r in records if r["id"] == i] for i in c.ids}
    m3u_holds = by["M3U"].count(HOLDS) / len(by["M3U"])
    m3u_rest = set(by["M3U"]) <= {HOLDS, INCONCLUSIVE}
    lower_ok = VIOLATED not in by["M3L"] + by["M3L0"]
    ok = m3u_holds >= 0.95 and m3u_rest and lower_ok
    counts = {i: {v: vs.count(v) for v in sorted(set(vs))} for i, vs in by.items()}
    announce(6, "mixed tri-party bounds", ok, f"M3U holds {m3u_holds:.0%}, {counts}")
    assert ok


def test_7_four_party_mixed(announce):
    c = Campaign(seed=SEED, trials=20, dims=(2, 2, 2, 2), kind="mixed", rank=(2, 2),
                 ids=("M4U", "M4L0"), roof=FOUR_MIXED_ROOF, inner=FOUR_MIXED_INNER)
    start = time.perf_counter()
    records = run_campaign(c)
    elapsed = time.perf_counter() - start
    violated = [r for r in records if r["verdict"] == VIOLATED]
    ok = not violated and len(records) == 40 and elapsed < 1800
    announce(7, "four-party mixed sanity", ok,
             f"{len(records)} records, {len(violated)} violated, {elapsed:.0f} s")
    assert ok


def test_8_worker_count_determinism(announce, tmp_path, capsys):
    runs = [
        ["verify", "--seed", "42"],
        ["verify", "--seed", "42", "--trials", "16", "--kind", "mixed", "--rank", "2-8",
         "--roof-restarts", "2", "--roof-iters", "300"],
    ]
    same = []
    for k, argv in enumerate(runs):
        outputs = []
        for workers in (1, 8):
            path = tmp_path / f"{k}-{workers}.csv"
            main(argv + ["--workers", str(workers), "--out", str(path)])
            outputs.append(path.read_bytes())
        capsys.readouterr()
        same.append(outputs[0] == outputs[1] and len(outputs[0]) > 0)
    ok = all(same)
    announce(8, "worker-count determinism", ok, f"{sum(same)}/{len(same)} reports byte-identical")
    assert ok
