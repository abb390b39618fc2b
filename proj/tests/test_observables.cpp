#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "eqpert/observables.hpp"
#include "eqpert/potential.hpp"
#include "eqpert/profiles.hpp"
#include "eqpert/thermo.hpp"

using namespace eqpert;

namespace {

std::function<double(const std::array<double, 3>&)> axis_phi(
    const std::function<double(double)>& f) {
  return [f](const std::array<double, 3>& u) { return f(u[0]); };
}

}  // namespace

TEST_CASE("pairing: exclusion field against named test functions") {
  GepParams params(Torus(1, 8), 2, {1.5, 0.5});
  RngStream rng(7, 0);
  GepState state = sample_initial(params, std::vector<double>(8, 1.0), rng);

  SUBCASE("constant occupation at the center pairs to zero") {
    state.eta.assign(8, 1);
    for (const char* name : {"one", "cos", "sin"}) {
      double v = gep_pairing(state, 1.0, 0.25, {0.0, 0.0, 0.0},
                             axis_phi(test_function_1d(name)));
      CHECK(v == 0.0);
    }
  }

  SUBCASE("flat test function reads the particle surplus") {
    state.eta = {2, 1, 0, 1, 2, 0, 0, 1};
    double total = 7.0;
    double expect = std::pow(8.0, 0.25 - 1.0) * (total - 8.0 * 0.5);
    double v = gep_pairing(state, 0.5, 0.25, {0.31, 0.0, 0.0},
                           axis_phi(test_function_1d("one")));
    CHECK(v == doctest::Approx(expect).epsilon(1e-14));
  }

  SUBCASE("linearity in the test function") {
    state.eta = {2, 1, 0, 1, 2, 0, 0, 1};
    auto f1 = test_function_1d("cos");
    auto f2 = test_function_1d("sin");
    auto combo = [&](const std::array<double, 3>& u) { return 2.0 * f1(u[0]) - 0.7 * f2(u[0]); };
    double lhs = gep_pairing(state, 0.5, 0.25, {0.11, 0.0, 0.0}, combo);
    double rhs = 2.0 * gep_pairing(state, 0.5, 0.25, {0.11, 0.0, 0.0}, axis_phi(f1)) -
                 0.7 * gep_pairing(state, 0.5, 0.25, {0.11, 0.0, 0.0}, axis_phi(f2));
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-13));
  }

  SUBCASE("integer shifts wrap away exactly") {
    state.eta = {2, 1, 0, 1, 2, 0, 0, 1};
    auto phi = axis_phi(test_function_1d("cos"));
    CHECK(gep_pairing(state, 0.5, 0.25, {0.0, 0.0, 0.0}, phi) ==
          gep_pairing(state, 0.5, 0.25, {1.0, 0.0, 0.0}, phi));
  }

  SUBCASE("adding a constant to phi is invisible at exact zero surplus") {
    state.eta = {1, 0, 1, 0, 1, 1, 0, 0};  // 4 particles = 8 * 0.5
    auto phi = axis_phi(test_function_1d("sin"));
    auto phi_plus = [&](const std::array<double, 3>& u) { return phi(u) + 5.0; };
    double a = gep_pairing(state, 0.5, 0.25, {0.2, 0.0, 0.0}, phi);
    double b = gep_pairing(state, 0.5, 0.25, {0.2, 0.0, 0.0}, phi_plus);
    CHECK(a == doctest::Approx(b).epsilon(1e-12));
  }

  SUBCASE("two-dimensional wrap agrees with a direct sum") {
    GepParams p2(Torus(2, 4), 1, {1.0, 0.8, 0.3, 0.2});
    RngStream r2(9, 1);
    GepState s2 = sample_initial(p2, std::vector<double>(16, 0.5), r2);
    std::array<double, 3> shift{0.23, -0.41, 0.0};
    auto phi = [](const std::array<double, 3>& u) {
      return std::cos(2.0 * M_PI * u[0]) * std::sin(2.0 * M_PI * u[1]);
    };
    long double direct = 0.0L;
    for (int y = 0; y < 4; ++y)
      for (int x = 0; x < 4; ++x) {
        std::array<double, 3> u{wrap_unit(x / 4.0 - shift[0]), wrap_unit(y / 4.0 - shift[1]),
                                0.0};
        direct += (s2.eta[static_cast<std::size_t>(4 * y + x)] - 0.5) * phi(u);
      }
    double expect = static_cast<double>(direct) * std::pow(4.0, 0.3 - 2.0);
    CHECK(gep_pairing(s2, 0.5, 0.3, shift, phi) == doctest::Approx(expect).epsilon(1e-14));
  }
}

TEST_CASE("pairing: frame shift and conservation along a trajectory") {
  GepParams params(Torus(1, 16), 1, {1.0, 0.0});
  auto shift = gep_frame_shift(params, 0.3, 0.2, 0.7);
  CHECK(shift[0] ==
        doctest::Approx(std::pow(16.0, 0.2) * 0.4 * 0.7).epsilon(1e-14));
  CHECK(shift[1] == 0.0);
  // lambda = K - 2 rho_star vanishes at half filling
  auto centered = gep_frame_shift(params, 0.5, 0.2, 0.7);
  CHECK(centered[0] == 0.0);

  RngStream rng(11, 3);
  GepState state = sample_initial(params, std::vector<double>(16, 0.5), rng);
  auto phi = axis_phi(test_function_1d("one"));
  double before = gep_pairing(state, 0.5, 0.25, {0.0, 0.0, 0.0}, phi);
  simulate_to(state, 0.05, std::pow(16.0, 1.2), rng);
  double after = gep_pairing(state, 0.5, 0.25, {0.37, 0.0, 0.0}, phi);
  CHECK(before == doctest::Approx(after).epsilon(1e-13));
}

TEST_CASE("pairing: chain projections recover planted wave amplitudes") {
  const int n = 64;
  const double tau_prime = 1.69, root = 1.3, alpha = 0.3;
  const double a_minus = 0.8, a_plus = 0.55;
  ChainState s;
  s.p.resize(n);
  s.r.resize(n);
  double scale = std::pow(static_cast<double>(n), -alpha);
  for (int x = 0; x < n; ++x) {
    double u = static_cast<double>(x) / n;
    double sm = a_minus * std::sin(2.0 * M_PI * u);
    double sp = a_plus * std::cos(2.0 * M_PI * u);
    s.p[x] = 0.2 + scale * root * (sp - sm);
    s.r[x] = -0.1 + scale * (sm + sp);
  }

  SUBCASE("at time zero the pairings are discrete inner products") {
    auto v_sin = chain_pairing(s, 0.2, -0.1, tau_prime, alpha, 0.1, 0.0,
                               test_function_1d("sin"));
    CHECK(v_sin[0] == doctest::Approx(a_minus / 2.0).epsilon(1e-12));
    CHECK(std::abs(v_sin[1]) < 1e-14);
    auto v_cos = chain_pairing(s, 0.2, -0.1, tau_prime, alpha, 0.1, 0.0,
                               test_function_1d("cos"));
    CHECK(std::abs(v_cos[0]) < 1e-14);
    CHECK(v_cos[1] == doctest::Approx(a_plus / 2.0).epsilon(1e-12));
  }

  SUBCASE("the co-moving frame rotates the inner product by the shift") {
    double kappa = 0.15, t = 0.4;
    double delta = std::pow(static_cast<double>(n), kappa) * root * t;
    auto v = chain_pairing(s, 0.2, -0.1, tau_prime, alpha, kappa, t,
                           test_function_1d("sin"));
    // sum sin(2 pi u) sin(2 pi (u - delta)) / n = cos(2 pi delta) / 2
    CHECK(v[0] == doctest::Approx(0.5 * a_minus * std::cos(2.0 * M_PI * delta))
                      .epsilon(1e-11));
    // sum cos(2 pi u) sin(2 pi (u + delta)) / n = sin(2 pi delta) / 2
    CHECK(v[1] == doctest::Approx(0.5 * a_plus * std::sin(2.0 * M_PI * delta))
                      .epsilon(1e-11));
  }

  SUBCASE("equilibrium constants pair to zero") {
    ChainState flat;
    flat.p.assign(32, 0.2);
    flat.r.assign(32, -0.1);
    auto v = chain_pairing(flat, 0.2, -0.1, tau_prime, alpha, 0.1, 0.3,
                           test_function_1d("cos"));
    CHECK(v[0] == 0.0);
    CHECK(v[1] == 0.0);
  }

  CHECK_THROWS_AS(test_function_1d("box"), std::invalid_argument);
}

TEST_CASE("relative entropy: exact values, support, convexity") {
  SUBCASE("identical distributions give exactly zero") {
    std::vector<double> mu{0.25, 0.5, 0.25};
    CHECK(relative_entropy_exact(mu, mu) == 0.0);
  }

  SUBCASE("two-point hand value") {
    CHECK(relative_entropy_exact({1.0, 0.0}, {0.5, 0.5}) ==
          doctest::Approx(std::log(2.0)).epsilon(1e-15));
  }

  SUBCASE("support violation throws") {
    CHECK_THROWS_AS(relative_entropy_exact({0.5, 0.5}, {1.0, 0.0}), std::domain_error);
  }

  SUBCASE("nonnegativity and joint convexity on random pairs") {
    RngStream rng(5, 2);
    for (int trial = 0; trial < 20; ++trial) {
      auto draw = [&](int k) {
        std::vector<double> v(static_cast<std::size_t>(k));
        double tot = 0.0;
        for (auto& x : v) {
          x = -std::log(rng.uniform());
          tot += x;
        }
        for (auto& x : v) x /= tot;
        return v;
      };
      auto mu1 = draw(6), nu1 = draw(6), mu2 = draw(6), nu2 = draw(6);
      double h11 = relative_entropy_exact(mu1, nu1);
      double h22 = relative_entropy_exact(mu2, nu2);
      CHECK(h11 >= 0.0);
      double lam = 0.3;
      std::vector<double> mu(6), nu(6);
      for (int i = 0; i < 6; ++i) {
        mu[i] = lam * mu1[i] + (1 - lam) * mu2[i];
        nu[i] = lam * nu1[i] + (1 - lam) * nu2[i];
      }
      CHECK(relative_entropy_exact(mu, nu) <= lam * h11 + (1 - lam) * h22 + 1e-12);
    }
  }

  SUBCASE("entropy against the stationary profile decreases along the flow") {
    GepParams params(Torus(1, 4), 1, {1.5, 0.5});
    std::vector<double> mu0(static_cast<std::size_t>(state_count(params)), 0.0);
    mu0[static_cast<std::size_t>(state_index(params, {1, 1, 0, 0}))] = 1.0;
    std::vector<double> nu = product_binomial_pmf(params, std::vector<double>(4, 0.5));
    double prev = relative_entropy_exact(mu0, nu);
    CHECK(prev > 0.0);
    for (double t : {0.05, 0.1, 0.2, 0.4, 0.8, 1.6}) {
      auto mu = master_equation(params, mu0, t, 1.0);
      double h = relative_entropy_exact(mu, nu);
      CHECK(h >= 0.0);
      CHECK(h <= prev + 1e-12);
      prev = h;
    }
  }
}

TEST_CASE("subgaussian order: exact modes hit closed forms") {
  auto grid = default_theta_grid();

  SUBCASE("degenerate point mass has order zero") {
    CHECK(subgaussian_order_pmf({0.0}, {1.0}, grid) == 0.0);
  }

  SUBCASE("centered coin sits between its true and Hoeffding orders") {
    double est = subgaussian_order_pmf({-0.5, 0.5}, {0.5, 0.5}, grid);
    CHECK(est <= 0.25 + 1e-12);
    CHECK(est >= 0.25 - 1e-6);
    CHECK(est <= 1.0);  // (b - a)^2
  }

  SUBCASE("standard normal density recovers order one") {
    auto dens = [](double x) {
      return std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI);
    };
    double est = subgaussian_order_density(dens, -40.0, 40.0, grid);
    CHECK(est == doctest::Approx(1.0).epsilon(1e-9));
  }

  SUBCASE("non-centered input is rejected") {
    CHECK_THROWS_AS(subgaussian_order_pmf({0.0, 1.0}, {0.5, 0.5}, grid),
                    std::invalid_argument);
  }

  SUBCASE("sampler mode brackets the coin with a bootstrap bound") {
    RngStream rng(17, 0);
    std::vector<double> draws(100000);
    for (auto& d : draws) d = rng.bernoulli(0.5) ? 0.5 : -0.5;
    RngStream boot_rng(17, 1);
    auto est = subgaussian_order_sampler(draws, grid, boot_rng);
    CHECK(est.estimate > 0.2);
    CHECK(est.estimate < 0.35);
    CHECK(est.ci_upper >= est.estimate);
    CHECK(est.ci_upper < 1.0);
  }
}

TEST_CASE("square exponential moment: the 1/(4 sigma^2) bound") {
  SUBCASE("standard normal at gamma = 1/4 integrates to sqrt(2)") {
    auto dens = [](double x) {
      return std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI);
    };
    auto rep = check_square_exponential_density(dens, 0.25);
    CHECK(rep.value == doctest::Approx(std::sqrt(2.0)).epsilon(1e-9));
    CHECK(rep.within_bound);
    auto loose = check_square_exponential_density(dens, 0.3);
    CHECK(loose.value == doctest::Approx(1.0 / std::sqrt(0.4)).epsilon(1e-9));
    CHECK(loose.within_bound);
    auto hot = check_square_exponential_density(dens, 0.45);
    CHECK(hot.value == doctest::Approx(1.0 / std::sqrt(0.1)).epsilon(1e-9));
    CHECK_FALSE(hot.within_bound);
    CHECK_THROWS_AS(check_square_exponential_density(dens, 0.6), std::domain_error);
  }

  SUBCASE("point mass and coin") {
    auto flat = check_square_exponential_pmf({0.0}, {1.0}, 7.0);
    CHECK(flat.value == 1.0);
    CHECK(flat.within_bound);
    // order estimate 1/4 gives gamma = 1
    auto coin = check_square_exponential_pmf({-0.5, 0.5}, {0.5, 0.5}, 1.0);
    CHECK(coin.value == doctest::Approx(std::exp(0.25)).epsilon(1e-14));
    CHECK(coin.within_bound);
  }
}

TEST_CASE("chain observables: pinched potentials give explicit bounds") {
  SUBCASE("harmonic stretch observable is exactly Gaussian") {
    Potential pot = Potential::named("harmonic");
    auto rep = check_chain_observable_subgaussian(pot, 1.0, 0.0,
                                                  [](double r) { return r; }, 1.0);
    CHECK(rep.order == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(rep.two_sided);
    CHECK(rep.c_minus == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(rep.c_plus == doctest::Approx(1.0).epsilon(1e-6));
    // E[exp((r - tau)^2 / 16)] for a unit Gaussian = sqrt(8/7)
    CHECK(rep.moment_value == doctest::Approx(std::sqrt(8.0 / 7.0)).epsilon(1e-8));
    CHECK(rep.moment_bound == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
    CHECK(rep.moment_value <= rep.moment_bound);
  }

  SUBCASE("nonzero tension shifts the bound, not the moment") {
    Potential pot = Potential::named("harmonic");
    auto rep = check_chain_observable_subgaussian(pot, 1.0, 0.7,
                                                  [](double r) { return r; }, 1.0);
    CHECK(rep.order == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(rep.moment_value == doctest::Approx(std::sqrt(8.0 / 7.0)).epsilon(1e-8));
    CHECK(rep.moment_bound ==
          doctest::Approx(std::sqrt(2.0) * std::exp(0.245)).epsilon(1e-12));
    CHECK(rep.moment_value <= rep.moment_bound);
  }

  SUBCASE("silent observable has order zero") {
    Potential pot = Potential::named("harmonic");
    auto rep = check_chain_observable_subgaussian(pot, 2.0, 0.1,
                                                  [](double) { return 0.0; }, 1.0);
    CHECK(rep.order == 0.0);
    CHECK(rep.moment_value == doctest::Approx(1.0).epsilon(1e-12));
  }

  SUBCASE("quartic force fluctuation: finite order, one-sided pinch") {
    Potential pot = Potential::named("fpu-quartic");
    Thermodynamics th(pot, 1.0);
    double tp = th.tension_full(0.0).d1;
    double cap = 2.0;
    auto F = [&, tp](double r) {
      double q = std::clamp(r, -cap, cap);
      return pot.dV(q) - tp * q;
    };
    double c = (1.0 + cap * cap - tp) + 0.1;
    auto rep = check_chain_observable_subgaussian(pot, 1.0, 0.0, F, c);
    CHECK(rep.order > 0.0);
    CHECK(std::isfinite(rep.order));
    CHECK_FALSE(rep.two_sided);
    CHECK(rep.c_minus == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(rep.moment_value >= 1.0);
    CHECK(std::isfinite(rep.moment_value));
  }

  SUBCASE("violated growth bound and unpinched potential are rejected") {
    Potential pot = Potential::named("harmonic");
    CHECK_THROWS_AS(check_chain_observable_subgaussian(
                        pot, 1.0, 0.0, [](double) { return 1.0; }, 1.0),
                    std::invalid_argument);
    CHECK_THROWS_AS(check_chain_observable_subgaussian(
                        Potential::named("linear"), 1.0, 0.0,
                        [](double r) { return r; }, 1.0),
                    std::domain_error);
  }
}
