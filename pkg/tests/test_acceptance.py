"""Acceptance gate: the ten criteria, each at its stated tolerance.

Every test records one ``PASS``/``FAIL`` line, printed in the terminal summary.
"""

import functools
import time

import numpy as np
import pytest
from scipy.optimize import minimize_scalar

from conftest import ACCEPTANCE_LINES
from gamma_lab.dilation import (
    adjoint_extension_residual,
    build_sznagy,
    verify_dilation,
    verify_gamma_unitary_structure,
)
from gamma_lab.fundop import IDENTITY_NAMES, fundamental_residual, identity_suite, solve_fundamental
from gamma_lab.gamma import point_in_gamma, symmetrization_roots
from gamma_lab.generators import gamma_contraction_sweep, random_contraction, random_matrix
from gamma_lab.model import build_coisometric_model, dmp_check, pure_gamma_isometry_from_A, recover_fundamental_from_model
from gamma_lab.numlin import adjoint, defect, lambda_max_real_part, numerical_radius, opnorm, spectral_radius

SEED = 20240601


def criterion(number, title):
    def wrap(fn):
        @functools.wraps(fn)
        def run(*args, **kwargs):
            try:
                detail = fn(*args, **kwargs)
            except BaseException as exc:
                ACCEPTANCE_LINES.append(f"FAIL [{number:02d}] {title}: {str(exc).splitlines()[0][:160]}")
                raise
            ACCEPTANCE_LINES.append(f"PASS [{number:02d}] {title}: {detail}")

        return run

    return wrap


@pytest.fixture(scope="module")
def thousand_pairs():
    return gamma_contraction_sweep(1000, 8, seed=SEED)


@pytest.fixture(scope="module")
def solved(thousand_pairs):
    t = time.perf_counter()
    fps = [solve_fundamental(p) for p in thousand_pairs]
    return fps, time.perf_counter() - t


@pytest.fixture(scope="module")
def dilations():
    pairs = gamma_contraction_sweep(200, 6, seed=SEED + 1)
    t = time.perf_counter()
    bundles = [build_sznagy(p, solve_fundamental(p)) for p in pairs]
    return bundles, time.perf_counter() - t


@criterion(1, "fundamental operator existence and uniqueness")
def test_criterion_01_fundamental_operator(thousand_pairs, solved):
    fps, elapsed = solved
    t = time.perf_counter()
    rng = np.random.default_rng(SEED)
    worst_res = worst_omega = 0.0
    min_perturbed = np.inf
    for pair, fp in zip(thousand_pairs, fps):
        scale = 1 + opnorm(pair.S)
        worst_res = max(worst_res, fp.residual_F / scale, fp.residual_Fstar / scale)
        worst_omega = max(worst_omega, fp.omega_F, fp.omega_Fstar)
        r = fp.defect_P.rank
        if r:
            e = rng.normal(size=(r, r)) + 1j * rng.normal(size=(r, r))
            e *= 1e-3 / opnorm(e)
            rhs = pair.S - adjoint(pair.S) @ pair.P
            min_perturbed = min(min_perturbed, fundamental_residual(rhs, fp.F + e, fp.defect_P))
    elapsed += time.perf_counter() - t
    assert worst_res <= 1e-10, f"solver residual {worst_res:.3e}"
    assert worst_omega <= 1 + 1e-8, f"omega {worst_omega}"
    assert min_perturbed > 1e-4, f"perturbed residual only {min_perturbed:.3e}"
    assert elapsed < 30, f"runtime {elapsed:.1f}s"
    return (
        f"residual/(1+|S|) <= {worst_res:.1e}, max omega {worst_omega:.12f}, "
        f"min perturbed residual {min_perturbed:.2e}, {elapsed:.1f}s"
    )


@criterion(2, "identity suite a1-a4, b1-b3, PF")
def test_criterion_02_identity_suite(thousand_pairs, solved):
    fps, _ = solved
    worst = dict.fromkeys(IDENTITY_NAMES, 0.0)
    for pair, fp in zip(thousand_pairs, fps):
        for k, v in identity_suite(pair, fp).residuals.items():
            worst[k] = max(worst[k], v)
    top = max(worst.values())
    assert top <= 1e-9, f"worst residuals {worst}"
    return f"max residual {top:.1e} over {len(fps)} pairs"


@criterion(3, "dilation identity for m, n <= 5")
def test_criterion_03_dilation(dilations):
    bundles, build_time = dilations
    t = time.perf_counter()
    worst = max(verify_dilation(b, max_power=5)["dilation_residual"] for b in bundles)
    elapsed = build_time + time.perf_counter() - t
    assert worst <= 1e-9, f"dilation residual {worst:.3e}"
    assert elapsed < 60, f"runtime {elapsed:.1f}s"
    return f"max residual {worst:.1e} over {len(bundles)} pairs, {elapsed:.1f}s"


@criterion(4, "Gamma-unitary structure of (T0, U0)")
def test_criterion_04_gamma_unitary_structure(dilations):
    bundles, _ = dilations
    worst = {"U0_unitary": 0.0, "commutation": 0.0, "T0_eq_T0starU0": 0.0}
    bounds = {"symbol_F": 0.0, "symbol_Fstar": 0.0, "norm_S": 0.0}
    for b in bundles:
        rep = verify_gamma_unitary_structure(b)
        for k in worst:
            worst[k] = max(worst[k], rep[k])
        for k in bounds:
            bounds[k] = max(bounds[k], rep["spectral_bound"][k])
    assert max(worst.values()) <= 1e-9, f"structural residuals {worst}"
    assert max(bounds.values()) <= 2 + 1e-8, f"symbol bounds {bounds}"
    return f"structural <= {max(worst.values()):.1e}, symbol/norm bound {max(bounds.values()):.10f}"


@criterion(5, "Gamma-isometric dilation and adjoint extension")
def test_criterion_05_isometric_dilation(dilations):
    bundles, _ = dilations
    iso = ext = 0.0
    for b in bundles:
        rep = verify_gamma_unitary_structure(b)
        iso = max(iso, rep["Vflat_isometry"], rep["Tflat_eq_TflatstarVflat"])
        ext = max(ext, adjoint_extension_residual(b))
    assert iso <= 1e-9, f"structural residual {iso:.3e}"
    assert ext <= 1e-12, f"extension residual {ext:.3e}"
    return f"structural <= {iso:.1e}, extension <= {ext:.1e}"


@criterion(6, "symbol round trip A -> (T_phi, T_z) -> A")
def test_criterion_06_round_trip():
    rng = np.random.default_rng(SEED + 6)
    worst = 0.0
    for _ in range(500):
        e = int(rng.integers(1, 5))
        a = random_matrix(e, e, rng)
        a *= rng.uniform(0.05, 1.0) / numerical_radius(a)
        got = recover_fundamental_from_model(pure_gamma_isometry_from_A(a))
        worst = max(worst, opnorm(got - a))
    assert worst <= 1e-9, f"recovery error {worst:.3e}"
    return f"max recovery error {worst:.1e} over 500 symbols"


@criterion(7, "co-isometric model restriction and defect dimensions")
def test_criterion_07_model(dilations):
    bundles, _ = dilations
    worst = 0.0
    mismatched = 0
    for b in bundles:
        rep = build_coisometric_model(b.pair, b.fp).report
        worst = max(worst, rep["restriction_residual"])
        d_p, d_v = rep["defect_dims"]
        mismatched += d_v != d_p or d_p != defect(b.pair.P).rank
    assert worst <= 1e-10, f"restriction residual {worst:.3e}"
    assert mismatched == 0, f"{mismatched} defect dimension mismatches"
    return f"restriction <= {worst:.1e}, defect dims equal on {len(bundles)} pairs"


@criterion(8, "numerical radius half-plane criterion and sandwich")
def test_criterion_08_numerical_radius():
    rng = np.random.default_rng(SEED + 8)
    betas = 2 * np.pi * np.arange(360) / 360
    slack = 1e-8
    disagreements = sandwich = 0
    for _ in range(500):
        n = int(rng.integers(1, 7))
        x = random_matrix(n, n, rng)
        x *= rng.uniform(0.5, 1.5) / numerical_radius(x)
        w = numerical_radius(x)
        sampled = lambda_max_real_part(x, betas).max()
        disagreements += (w <= 1 + slack) != (sampled <= 1 + slack)
        nrm = opnorm(x)
        ok = spectral_radius(x) <= w + slack and w <= nrm + slack and 0.5 * nrm <= w + slack
        sandwich += not ok
    assert disagreements == 0, f"{disagreements} half-plane disagreements"
    assert sandwich == 0, f"{sandwich} sandwich violations"
    return "500 matrices, 360 angles: no disagreements, sandwich holds"


@criterion(9, "Douglas-Muhly-Pearcy completion")
def test_criterion_09_dmp():
    rng = np.random.default_rng(SEED + 9)
    worst_sigma = worst_c = worst_res = 0.0
    for _ in range(500):
        m, k = (int(v) for v in rng.integers(1, 5, 2))
        t1, t2 = random_contraction(m, rng), random_contraction(k, rng)
        c = random_contraction(m, rng, m=k)
        x = defect(adjoint(t1)).defect_op @ c @ defect(t2).defect_op
        out = dmp_check(t1, t2, x, tol=1e-10)
        worst_sigma = max(worst_sigma, out.sigma_max)
        assert out.is_contraction, f"assembled block has sigma_max {out.sigma_max}"
        # an independent contractive upper-triangular block
        blk = np.triu(random_matrix(m + k, m + k, rng))
        blk[m:, :m] = 0
        blk *= rng.uniform(0.5, 1.0) / opnorm(blk)
        for res in (out, dmp_check(blk[:m, :m], blk[m:, m:], blk[:m, m:], tol=1e-8)):
            worst_c = max(worst_c, res.norm_C)
            worst_res = max(worst_res, res.residual)
    assert worst_sigma <= 1 + 1e-10, f"sigma_max {worst_sigma}"
    assert worst_c <= 1 + 1e-8, f"|C| {worst_c}"
    assert worst_res <= 1e-9, f"factorization residual {worst_res:.3e}"
    return f"max sigma {worst_sigma:.12f}, max |C| {worst_c:.10f}, residual <= {worst_res:.1e}"


def scalar_rho_minimum(s, p, grid=2001):
    """min over r in [0, 1] of 2(1 - r^4|p|^2) - 2r|s - r^2 conj(s) p|."""

    def g(r):
        return 2 * (1 - r**4 * abs(p) ** 2) - 2 * r * abs(s - r * r * np.conj(s) * p)

    r = np.linspace(0, 1, grid)
    vals = 2 * (1 - r**4 * abs(p) ** 2) - 2 * r * np.abs(s - r * r * np.conj(s) * p)
    i = int(np.argmin(vals))
    lo, hi = r[max(i - 1, 0)], r[min(i + 1, grid - 1)]
    best = minimize_scalar(g, bounds=(lo, hi), method="bounded", options={"xatol": 1e-13})
    return min(vals[i], best.fun, g(1.0))


@criterion(10, "Gamma membership: root moduli vs scalar rho positivity")
def test_criterion_10_membership():
    rng = np.random.default_rng(SEED + 10)
    count = 10_000
    s = 3 * np.sqrt(rng.uniform(size=count)) * np.exp(2j * np.pi * rng.uniform(size=count))
    p = 1.5 * np.sqrt(rng.uniform(size=count)) * np.exp(2j * np.pi * rng.uniform(size=count))
    disagreements = banded = inside = 0
    for si, pi in zip(s, p):
        top = max(abs(r) for r in symmetrization_roots(si, pi))
        if abs(top - 1) <= 1e-6:
            banded += 1
            continue
        by_roots = point_in_gamma(si, pi).in_gamma
        by_rho = scalar_rho_minimum(si, pi) >= 0
        inside += by_roots
        disagreements += by_roots != by_rho
    assert disagreements == 0, f"{disagreements} disagreements"
    return f"{count} points, {inside} inside, {banded} in the boundary band, 0 disagreements"


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q"]))
