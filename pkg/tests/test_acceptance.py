"""Acceptance suite: one PASS/FAIL line per criterion.

Each test prints its verdict with the measured numbers (visible in
``pytest -v`` output) and then asserts it. Tolerances are the stated ones.
"""

import json
import time

import numpy as np
import pytest

from ultrashort import paper_method as pm
from ultrashort.cli import main
from ultrashort.fd_solver import GridConfig, solve_bound_states
from ultrashort.oracles import delta_well, square_well_states
from ultrashort.potentials import square_well
from ultrashort.units import ELECTRON
from ultrashort.validation import (
    convergence_order, default_sweep_spec, delta_limit_spec, sweep, validity_boundary,
)

C = ELECTRON.hbar2_over_2m


@pytest.fixture
def verdict(capsys):
    def report(number: int, title: str, checks: list[tuple[str, bool]]):
        ok = all(passed for _, passed in checks)
        detail = "; ".join(f"{'ok' if passed else 'FAILED'}: {text}" for text, passed in checks)
        with capsys.disabled():
            print(f"\n{'PASS' if ok else 'FAIL'} criterion {number} ({title}): {detail}")
        failed = [text for text, passed in checks if not passed]
        assert not failed, failed
    return report


def cli_json(capsys, argv):
    assert main(argv) == 0
    return json.loads(capsys.readouterr().out)


def test_criterion_1_probability_cap(verdict, capsys):
    p = pm.max_probability()
    assert main(["bounds", "--dx", "5", "--mass", "1"]) == 0
    table = capsys.readouterr().out
    verdict(1, "probability cap", [
        (f"max_probability = {p:.12f} vs 0.174165739 +- 1e-9", abs(p - 0.174165739) <= 1e-9),
        ("CLI table shows 17.4%", "17.4%" in table),
    ])


def test_criterion_2_energy_bound_example(verdict, capsys):
    r = cli_json(capsys, ["bounds", "--dx", "5", "--mass", "1", "--format", "json"])
    paper, recomp = r["E_bound_paper_meV"], r["E_bound_recomp_meV"]
    verdict(2, "energy bounds at dx = 5 nm", [
        (f"printed-constant bound {paper:.7f} meV vs 1.28234 +- 1e-4", abs(paper - 1.28234) <= 1e-4),
        (f"recomputed bound {recomp:.7f} meV vs 0.43543 +- 1e-4", abs(recomp - 0.43543) <= 1e-4),
    ])


def test_criterion_3_constant_discrepancy(verdict, capsys):
    z = pm.physical_branch(pm.P_MAX)
    r = cli_json(capsys, ["bounds", "--dx", "5", "--format", "json"])
    const = r["constant_printed"]
    ratio = r["ratio_paper_to_recomp"]
    verdict(3, "printed vs recomputed constant", [
        (f"physical_branch(p_max)^2 = {z * z:.15f} vs 2/7 within 1e-10", abs(z * z - 2 / 7) <= 1e-10),
        (f"printed constant evaluates to {const:.10f} vs 0.841431 +- 1e-6", abs(const - 0.841431) <= 1e-6),
        (f"ratio in bounds report {ratio:.6f} vs 2.94500 +- 1e-4", abs(ratio - 2.94500) <= 1e-4),
    ])


def test_criterion_4_vieta(verdict):
    start = time.perf_counter()
    worst_product = worst_residual = 0.0
    for P in np.linspace(pm.P_MAX / 1000, pm.P_MAX, 1000):
        sol = pm.quadratic_roots(P)
        worst_product = max(worst_product, abs(sol.z_minus * sol.z_plus / (2 / 7) - 1))
        for z in (sol.z_minus, sol.z_plus):
            worst_residual = max(worst_residual, abs(pm.normalization_residual(P, z)))
    elapsed = time.perf_counter() - start
    verdict(4, "Vieta property over 1000 P", [
        (f"max relative |z- z+ / (2/7) - 1| = {worst_product:.2e} <= 1e-12", worst_product <= 1e-12),
        (f"max |residual| at roots = {worst_residual:.2e} <= 1e-12", worst_residual <= 1e-12),
        (f"runtime {elapsed:.3f} s < 1 s", elapsed < 1.0),
    ])


def test_criterion_5_fd_vs_oracle(verdict):
    start = time.perf_counter()
    depth, dx = C / 25.0, 5.0
    exact = square_well_states(depth, dx)[0]
    p = square_well(depth, dx)

    def fd_error(cells, pad_over_k):
        st = solve_bound_states(p, config=GridConfig(pad=pad_over_k / exact.k, points_per_dx=cells))
        return len(st), abs(st[0].energy / exact.energy - 1)

    count, err200 = fd_error(200, 8.0)
    # the refinement study uses the default 10/k padding so the Dirichlet wall
    # (a ~3e-7 shift at 8/k) does not masquerade as discretization error
    errors = [(dx / cells, fd_error(cells, 10.0)[1]) for cells in (50, 100, 200, 400)]
    order = convergence_order(errors)
    elapsed = time.perf_counter() - start
    verdict(5, "finite difference vs oracle, v0 = 1", [
        (f"{count} bound state(s), expected 1", count == 1),
        (f"relative energy error {err200:.2e} <= 1e-4 at h = dx/200, pad 8/k", err200 <= 1e-4),
        (f"refinement order {order:.4f} in [1.8, 2.2] (pad 10/k)", 1.8 <= order <= 2.2),
        (f"runtime {elapsed:.2f} s < 5 s", elapsed < 5.0),
    ])


DELTA_DXS = (0.16, 0.08, 0.04, 0.02, 0.01, 0.005, 0.0025)


def test_criterion_6_delta_limit(verdict):
    start = time.perf_counter()
    k_target = 1.0
    e_delta_meV = delta_well(2 * C * k_target).energy * 1e3
    records = sweep(delta_limit_spec(k_target, DELTA_DXS))
    regime = [r for r in records if k_target * r.dx_nm <= 0.02 + 1e-12]
    e_err = [(r.dx_nm, abs(r.E_exact_meV / e_delta_meV - 1)) for r in regime]
    p_err = [(r.dx_nm, abs(r.P_exact / (k_target * r.dx_nm) - 1)) for r in regime]
    elapsed = time.perf_counter() - start
    verdict(6, "delta-limit convergence", [
        (f"delta energy {e_delta_meV:.4f} meV vs -38.0998", abs(e_delta_meV + 38.0998) <= 1e-4),
        ("energy within 1% for k dx <= 0.02: "
         + ", ".join(f"dx={w:g}: {e:.3%}" for w, e in e_err), all(e <= 0.01 for _, e in e_err)),
        ("p_inside within 10% of k dx: "
         + ", ".join(f"dx={w:g}: {e:.2%}" for w, e in p_err), all(e <= 0.10 for _, e in p_err)),
        (f"runtime {elapsed:.2f} s < 10 s", elapsed < 10.0),
    ])


def test_criterion_7_regime_mapping(verdict):
    start = time.perf_counter()
    records = sweep(default_sweep_spec())
    shallow = [r for r in records if r.z_exact <= 0.05]
    deepest = next(r for r in records if r.depth_eV == pytest.approx(1.0))
    vb = validity_boundary(records, "recomputed")
    elapsed = time.perf_counter() - start
    verdict(7, "regime mapping on the default sweep", [
        (f"{len(shallow)} record(s) with z <= 0.05, all flags true",
         bool(shallow) and all(r.p_bound_ok and r.e_paper_ok and r.e_recomp_ok for r in shallow)),
        (f"depth 1 eV: |E| = {abs(deepest.E_exact_meV):.1f} meV violates both bounds",
         not deepest.e_paper_ok and not deepest.e_recomp_ok),
        (f"boundary z* = {vb.z_star:.5f}, |z* - 0.53452| = {abs(vb.z_star - 0.53452):.4f} "
         f"<= bracket {vb.bracket:.4f}", vb.found and abs(vb.z_star - 0.53452) <= vb.bracket),
        (f"runtime {elapsed:.2f} s < 30 s", elapsed < 30.0),
    ])


def test_criterion_8_residual_convergence(verdict):
    start = time.perf_counter()
    records = sorted(sweep(delta_limit_spec(1.0, DELTA_DXS)), key=lambda r: r.z_exact)
    pairs = [(r.z_exact, abs(r.residual_eq11)) for r in records]
    monotone = all(a[1] < b[1] for a, b in zip(pairs, pairs[1:]))
    order = convergence_order(pairs)
    elapsed = time.perf_counter() - start
    verdict(8, "normalization residual along the delta limit", [
        ("|residual| increases with z: "
         + ", ".join(f"z={z:.4g}: {e:.3g}" for z, e in pairs), monotone),
        (f"fitted order {order:.3f} is positive (reported, not asserted against a rate)", order > 0),
        (f"runtime {elapsed:.2f} s < 10 s", elapsed < 10.0),
    ])
