"""End-to-end acceptance criteria, one test per criterion.

Each test records a PASS/FAIL line (shown in the pytest terminal summary)
before asserting at the stated tolerance.
"""

import itertools
import time

import numpy as np
import pytest

from atvis.adapt import AdaptState, phi, update_threshold
from atvis.diffops import BoundaryCondition, div, grad, left_inverse
from atvis.forward import (
    BlurOperator,
    FourierOperator,
    add_noise,
    blur_apply,
    fourier_undersample,
    make_gaussian_kernel,
    make_motion_kernel,
    synth_coils,
)
from atvis.masks import phase_encode_mask, radial_mask, variable_density_mask
from atvis.metrics import sos_combine
from atvis.phantoms import geometric_phantom, shepp_logan
from atvis.recon import ReconConfig, run_atvis, run_restore, run_tvis
from atvis.shrinkage import soft_threshold

pytestmark = pytest.mark.slow

RESTORE_SIZE = 128
RESTORE_SIGMAS = (1e-3, 5e-3, 1e-2)
RESTORE_SEEDS = range(10)
CS_SIZE = 256
CS_SIGMAS = (0.0, 5e-3)


def _rc(rng, shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


# -- shared end-to-end runs -----------------------------------------------------


@pytest.fixture(scope="module")
def restore_runs():
    u = shepp_logan(RESTORE_SIZE).real
    kernels = {"gaussian": make_gaussian_kernel(4, 2.0), "motion": make_motion_kernel(9, 30.0)}
    runs = {}
    start = time.perf_counter()
    for (kname, kernel), sigma in itertools.product(kernels.items(), RESTORE_SIGMAS):
        for seed in RESTORE_SEEDS:
            blurred = add_noise(blur_apply(u, kernel), sigma, seed)
            for algo in ("tvis", "atvis"):
                runs[kname, sigma, seed, algo] = run_restore(blurred, kernel, ReconConfig(algo=algo), u)
    return runs, time.perf_counter() - start


@pytest.fixture(scope="module")
def cs_runs():
    u = geometric_phantom(CS_SIZE, seed=1)
    mask = variable_density_mask(CS_SIZE, CS_SIZE, 0.30, 0.0155, seed=7)
    full = np.ones_like(mask)
    runs = {}
    start = time.perf_counter()
    for sigma in CS_SIGMAS:
        k = add_noise(fourier_undersample(u, full), sigma, 1) * mask
        runs[sigma, "tvis"] = run_tvis(k, mask, ReconConfig(), u)
        runs[sigma, "atvis"] = run_atvis(k, mask, ReconConfig(), u)
    return runs, time.perf_counter() - start


def _first_reach(report, target):
    r = report.column("rlne")
    hit = np.flatnonzero(r <= target)
    return None if hit.size == 0 else int(hit[0])


# -- 1. operator identities ------------------------------------------------------


def test_criterion_1_operator_identities(criterion_log):
    start = time.perf_counter()
    worst = 0.0
    for bc in BoundaryCondition:
        rng = np.random.default_rng([1, list(BoundaryCondition).index(bc)])
        for _ in range(50):
            u = _rc(rng, (16, 12))
            d = _rc(rng, (2, 16, 12))
            adj = abs(np.vdot(d, grad(u, bc)) + np.vdot(div(d, bc), u)) / (np.linalg.norm(u) * np.linalg.norm(d))
            inv = np.linalg.norm(left_inverse(grad(u, bc), bc) - (u - u.mean())) / np.linalg.norm(u - u.mean())
            worst = max(worst, adj, inv)
    rng = np.random.default_rng(2)
    mask = rng.random((16, 12)) < 0.4
    fop = FourierOperator(mask)
    hop = BlurOperator(make_motion_kernel(5, 30.0), (16, 12))
    for _ in range(50):
        u, v = _rc(rng, (16, 12)), _rc(rng, (16, 12))
        norm = np.linalg.norm(u) * np.linalg.norm(v)
        for op in (fop, hop):
            worst = max(worst, abs(np.vdot(v, op.forward(u)) - np.vdot(op.adjoint(v), u)) / norm)
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-10 and elapsed <= 10
    criterion_log("criterion 1", ok, f"max relative defect {worst:.2e}, {elapsed:.2f}s")
    assert ok


# -- 2. soft threshold ----------------------------------------------------------


def test_criterion_2_soft_threshold_exact(criterion_log):
    re = np.linspace(-3, 3, 100)
    x = (re[:, None] + 1j * re[None, :]).ravel()
    worst = 0.0
    for beta in (0.0, 0.5, 1.0, 2.0, 4.5):
        field = np.stack([x, x[::-1]]).reshape(2, 100, 100)
        out = soft_threshold(field, beta).ravel()
        ref = []
        for z in field.ravel():
            mag = abs(z)
            ref.append(z - beta * z / mag if mag > beta else 0j)
        worst = max(worst, np.abs(out - np.array(ref)).max())
    ok = worst <= 1e-14
    criterion_log("criterion 2", ok, f"max deviation {worst:.1e} over 2x10^4 entries x 5 thresholds")
    assert ok


# -- 3. threshold update algebra ----------------------------------------------------


def test_criterion_3_update_algebra(criterion_log):
    s = update_threshold(AdaptState(0.37), 0.8, 0.8, 0.0)
    fixed_ok = s.beta == 0.37
    rng = np.random.default_rng(3)
    mismatches = 0
    for _ in range(1000):
        beta, e_res, e_n, d1 = rng.uniform(0.01, 2, 4)
        kind = ("identity", "log1p", "one_minus_exp")[rng.integers(3)]
        f = phi(d1, kind, 1.0)
        new = update_threshold(AdaptState(beta, kind, 1.0), e_res, e_n, d1).beta
        if (new < beta) != (e_res < f * beta + e_n):
            mismatches += 1
    ok = fixed_ok and mismatches == 0
    criterion_log("criterion 3", ok, f"fixed point {'held' if fixed_ok else 'broken'}, {mismatches}/1000 mismatches")
    assert ok


# -- 4. restoration ordering ------------------------------------------------------


def test_criterion_4_restoration_ordering(restore_runs, criterion_log):
    runs, elapsed = restore_runs
    cells = []
    all_ordered = True
    for kname, sigma in itertools.product(("gaussian", "motion"), RESTORE_SIGMAS):
        mt = np.mean([runs[kname, sigma, s, "tvis"].trace[-1].rlne for s in RESTORE_SEEDS])
        ma = np.mean([runs[kname, sigma, s, "atvis"].trace[-1].rlne for s in RESTORE_SEEDS])
        all_ordered &= ma < mt
        cells.append(f"{kname[0].upper()}{sigma:g}: tvis {mt:.4f} atvis {ma:.4f}")
        if (kname, sigma) == ("gaussian", 5e-3):
            g5 = ma
    ok = all_ordered and g5 <= 0.06 and elapsed <= 300
    criterion_log("criterion 4", ok, f"{'; '.join(cells)}; {elapsed:.0f}s")
    assert all_ordered, "ATVIS mean RLNE not below TVIS in every cell"
    assert g5 <= 0.06, f"Gaussian 5e-3 ATVIS mean RLNE {g5:.4f} > 0.06"
    assert elapsed <= 300


# -- 5. CS convergence ------------------------------------------------------------


def test_criterion_5_cs_convergence(cs_runs, criterion_log):
    runs, elapsed = cs_runs
    ok_a = ok_b = ok_c = True
    parts = []
    for sigma in CS_SIGMAS:
        t, a = runs[sigma, "tvis"], runs[sigma, "atvis"]
        final_t, final_a = t.trace[-1].rlne, a.trace[-1].rlne
        reach = _first_reach(a, final_t)
        betas = a.column("beta")[2:]
        mono = float((np.diff(betas) <= 0).mean())
        ok_a &= final_a <= final_t
        ok_b &= reach is not None and reach + 1 <= 0.6 * t.iterations
        ok_c &= mono >= 0.95
        parts.append(
            f"sigma={sigma:g}: tvis {final_t:.4f}/{t.iterations} it, atvis {final_a:.4f}/{a.iterations} it, "
            f"reached at it {None if reach is None else reach + 1}, beta non-increasing {mono:.2f}"
        )
    ok = ok_a and ok_b and ok_c and elapsed <= 180
    criterion_log("criterion 5", ok, f"(a) {ok_a} (b) {ok_b} (c) {ok_c}; {'; '.join(parts)}; {elapsed:.0f}s")
    assert ok_a and ok_b, "ATVIS did not match or beat TVIS"
    assert ok_c, "ATVIS threshold increased in more than 5% of post-warmup steps"
    assert elapsed <= 180


# -- 6. discrepancy monitor -------------------------------------------------------


def test_criterion_6_residual_dominates(restore_runs, cs_runs, criterion_log):
    held = total = 0
    reports = [r for key, r in restore_runs[0].items() if key[3] == "atvis"]
    reports += [r for key, r in cs_runs[0].items() if key[1] == "atvis"]
    for rep in reports:
        for rec in rep.trace:
            # each record pairs eps_res of this iteration with eps_n of the previous one
            if rec.iter > 4:
                total += 1
                held += rec.l1_eps_res >= rec.l1_eps_n
    frac = held / total
    ok = frac >= 0.90
    criterion_log("criterion 6", ok, f"||eps_res|| >= ||eps_n|| in {held}/{total} = {frac:.3f} of post-warmup iterations")
    assert ok


# -- 7. multi-channel ------------------------------------------------------------


def test_criterion_7_multichannel(criterion_log):
    start = time.perf_counter()
    u = shepp_logan(CS_SIZE)
    coils = synth_coils(8, CS_SIZE, CS_SIZE, seed=0)
    mask = radial_mask(CS_SIZE, CS_SIZE, 80, "golden")
    channels = coils * u
    k = fourier_undersample(channels, mask)
    ref = sos_combine(channels)
    t = run_tvis(k, mask, ReconConfig(threads=1), ref)
    a = run_atvis(k, mask, ReconConfig(threads=1), ref)
    par = run_atvis(k, mask, ReconConfig(threads=4), ref)
    elapsed = time.perf_counter() - start
    bitwise = np.array_equal(a.image, par.image)
    ok = a.trace[-1].rlne < t.trace[-1].rlne and bitwise and elapsed <= 240
    criterion_log(
        "criterion 7",
        ok,
        f"tvis {t.trace[-1].rlne:.4f}, atvis {a.trace[-1].rlne:.4f}, serial==parallel {bitwise}, {elapsed:.0f}s",
    )
    assert ok


# -- 8. speed surrogate -----------------------------------------------------------


def test_criterion_8_time_to_tvis_quality(cs_runs, criterion_log):
    runs, _ = cs_runs
    ok = True
    parts = []
    for sigma in CS_SIGMAS:
        t, a = runs[sigma, "tvis"], runs[sigma, "atvis"]
        reach = _first_reach(a, t.trace[-1].rlne)
        t_tvis = t.trace[-1].elapsed_ms
        t_atvis = np.inf if reach is None else a.trace[reach].elapsed_ms
        ratio = t_atvis / t_tvis
        ok &= ratio <= 0.8
        parts.append(f"sigma={sigma:g}: {t_atvis:.0f} ms vs {t_tvis:.0f} ms (ratio {ratio:.2f})")
    criterion_log("criterion 8", ok, "; ".join(parts))
    assert ok


# -- 9. mask statistics -----------------------------------------------------------


def test_criterion_9_mask_statistics(criterion_log):
    n = 256
    vd = variable_density_mask(n, n, 0.30, 0.0155, seed=7)
    side = round(np.sqrt(0.0155) * n)
    c0 = n // 2 - side // 2
    core = vd[c0 : c0 + side, c0 : c0 + side]
    vd_ok = vd.sum() == round(0.30 * n * n) and abs(vd.mean() - 0.30) <= 0.001 and core.all()
    pe = phase_encode_mask(n, n, 120, 32, seed=0)
    rows = np.flatnonzero(pe.any(axis=1))
    central = np.arange(n // 2 - 16, n // 2 + 16)
    pe_ok = len(rows) == 120 and pe[rows].all() and np.isin(central, rows).all()
    ok = vd_ok and pe_ok
    criterion_log(
        "criterion 9",
        ok,
        f"vd {int(vd.sum())} samples (density {vd.mean():.6f}), core {side}x{side} full={core.all()}; "
        f"phase-encode {len(rows)} rows, central 32 present={np.isin(central, rows).all()}",
    )
    assert ok
