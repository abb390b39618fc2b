"""Smoke tests for the python module: each block drives one exported surface
and checks a value the compiled test suite already pins."""

import math
import os
import shutil
import sys
import tempfile

import eqpert


def approx(a, b, tol=1e-9):
    assert abs(a - b) <= tol, f"{a} != {b} (tol {tol})"


def test_profile_and_wave():
    rho0 = eqpert.Profile.named("sin", 0.25)
    approx(rho0.value(0.25), 0.25)
    wave = eqpert.Wave(rho0, -1.0)
    finite, t_star = wave.shock()
    assert finite and t_star > 0
    approx(wave.value(0.0, 0.25), 0.25)


def test_burgers_solver_agreement():
    rho0 = eqpert.Profile.named("sin", 0.25)
    wave = eqpert.Wave(rho0, -1.0)
    cells = 1024
    out = eqpert.burgers_fv(eqpert.planar_field(rho0, [1, 0, 0], 1, cells), 1, cells,
                            [-1.0, 0.0, 0.0], 0.1)
    exact = [wave.value(0.1, (j + 0.5) / cells) for j in range(cells)]
    assert eqpert.l1_error(out, exact) < 1e-3


def test_exclusion_master_equation():
    params = eqpert.GepParams(eqpert.Torus(1, 4), 1, [1.5, 0.5])
    mu0 = [0.0] * eqpert.state_count(params)
    mu0[eqpert.state_index(params, [1, 1, 0, 0])] = 1.0
    mu = eqpert.master_equation(params, mu0, 0.5, 1.0)
    approx(sum(mu), 1.0, 1e-12)

    pmf = [0.0] * len(mu0)
    reps = 2000
    for r in range(reps):
        rng = eqpert.RngStream(7, r)
        st = eqpert.GepState()
        st.params = params
        st.eta = [1, 1, 0, 0]
        st.rebuild_rates()
        eqpert.simulate_to(st, 0.5, 1.0, rng)
        pmf[eqpert.state_index(params, st.eta)] += 1.0 / reps
    assert eqpert.total_variation(pmf, mu) < 0.05

    nu = eqpert.product_binomial_pmf(params, [0.5] * 4)
    assert eqpert.generator_residual(params, nu) < 1e-12


def test_chain_integration_conserves():
    pot = eqpert.Potential.named("fpu-quartic")
    th = eqpert.Thermodynamics(pot, 1.0)
    tab = th.build_table(0.3)
    rng = eqpert.RngStream(11, 0)
    state = eqpert.sample_gibbs(th, tab, 0.1, 32, rng)
    sp, sr = sum(state.p), sum(state.r)
    eqpert.integrate(state, pot, 1.0, 2.0, 1.5, rng)
    approx(sum(state.p), sp, 1e-8)
    approx(sum(state.r), sr, 1e-8)
    approx(state.clock, 1.5, 1e-12)


def test_two_family_macro():
    tau, d1, d2 = eqpert.Thermodynamics(eqpert.Potential.named("fpu-quartic"),
                                        1.0).tension_full(0.5)
    assert d1 > 0 and d2 > 0
    mac = eqpert.make_chain_macro(0.0, 0.5, d1, d2,
                                  eqpert.Profile.named("sin", 0.5),
                                  eqpert.Profile.named("cos", 0.4))
    b = eqpert.chain_bracket(mac, 0.02, 0.3, 0.7)
    assert abs(b[0]) < 1e-8 and abs(b[1]) < 1e-8


def test_flow_and_entropy():
    f = eqpert.construct_flow(8, 2)
    assert f.nonnegative()
    approx(f.divergence_residual(), 0.0, 0.0)
    assert f.sum_sq() / eqpert.flow_cost_rate(8, 2) < 4.0

    h = eqpert.relative_entropy_exact([0.5, 0.5], [0.25, 0.75])
    approx(h, 0.5 * math.log(0.5 / 0.25) + 0.5 * math.log(0.5 / 0.75), 1e-12)


def test_concentration():
    grid = eqpert.default_theta_grid()
    order = eqpert.subgaussian_order_pmf([-1.0, 1.0], [0.5, 0.5], grid)
    assert order <= 4.0
    value, within = eqpert.check_square_exponential_pmf([-1.0, 1.0], [0.5, 0.5],
                                                        1.0 / (4.0 * order))
    assert within and value <= 3.0
    rpt = eqpert.check_chain_observable_subgaussian(
        eqpert.Potential.named("harmonic"), 1.0, 0.0, lambda r: r, 1.0)
    approx(rpt["moment_value"], math.sqrt(8.0 / 7.0))
    approx(rpt["moment_bound"], math.sqrt(2.0))


def test_config_and_runner():
    catalog = dict(eqpert.experiment_catalog())
    assert "flow-audit" in catalog and len(catalog) == 7

    report = eqpert.validate_config("experiment = gep-perturbation\n"
                                    "output = unused\n"
                                    "alpha = 0.2\n"
                                    "kappa = 0.3\n"
                                    "n = 64\n"
                                    "t = 0.1\n"
                                    "bins = 16\n")
    assert any("kappa" in e for e in report["errors"])

    out = tempfile.mkdtemp(prefix="eqpert_smoke_")
    try:
        run = eqpert.run_config("experiment = flow-audit\n"
                                f"output = {out}\n"
                                "seed = 3\n"
                                "dimension = 1 2\n"
                                "ell = 2 4 8\n")
        assert run["ok"]
        assert "flow.csv" in run["artifacts"]
        assert os.path.exists(os.path.join(out, "manifest.json"))
    finally:
        shutil.rmtree(out, ignore_errors=True)


def main():
    tests = [v for k, v in sorted(globals().items()) if k.startswith("test_")]
    for t in tests:
        t()
        print(f"{t.__name__}: ok")
    print(f"{len(tests)} smoke tests passed")


if __name__ == "__main__":
    sys.exit(main())
