#include <array>
#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "eqpert/burgers.hpp"
#include "eqpert/potential.hpp"
#include "eqpert/profiles.hpp"
#include "eqpert/psystem.hpp"
#include "eqpert/thermo.hpp"

using namespace eqpert;

namespace {

std::array<double, 2> apply2(const std::array<std::array<double, 2>, 2>& m,
                             const std::array<double, 2>& v) {
  return {m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]};
}

ChainMacro quartic_like_macro() {
  Profile sm = Profile::named("sin", 0.5);
  Profile sp = Profile::named("cos", 0.35);
  return make_chain_macro(0.1, 0.4, 1.3, 0.85, sm, sp);
}

}  // namespace

TEST_CASE("psystem: linearization eigenstructure and coefficients") {
  for (auto [tp, ts] : std::vector<std::pair<double, double>>{
           {1.0, 0.0}, {2.5, 1.7}, {0.3, -0.9}, {1.3, 0.85}}) {
    TwoSystem sys = linearize_psystem(tp, ts);
    double root = std::sqrt(tp);
    CHECK(sys.lambda[0] == doctest::Approx(root).epsilon(1e-15));
    CHECK(sys.lambda[1] == doctest::Approx(-root).epsilon(1e-15));
    for (int j = 0; j < 2; ++j) {
      auto av = apply2(sys.a, sys.right[j]);
      CHECK(std::abs(av[0] - sys.lambda[j] * sys.right[j][0]) < 1e-12);
      CHECK(std::abs(av[1] - sys.lambda[j] * sys.right[j][1]) < 1e-12);
      for (int k = 0; k < 2; ++k)
        CHECK(std::abs(dot2(sys.left[j], sys.right[k]) - (j == k ? 1.0 : 0.0)) < 1e-12);
    }
    CHECK(sys.burgers[0] == doctest::Approx(ts / (4.0 * root)).epsilon(1e-14));
    CHECK(sys.burgers[1] == doctest::Approx(-ts / (4.0 * root)).epsilon(1e-14));
    CHECK(sys.cross[0] == doctest::Approx(-ts / (4.0 * tp)).epsilon(1e-14));
    CHECK(sys.cross[1] == doctest::Approx(-ts / (4.0 * tp)).epsilon(1e-14));
  }
  CHECK_THROWS_AS(linearize_psystem(0.0, 1.0), std::domain_error);
  CHECK_THROWS_AS(linearize_psystem(-0.5, 0.0), std::domain_error);
}

TEST_CASE("psystem: harmonic thermodynamics linearizes to unit speeds") {
  Thermodynamics th(Potential::named("harmonic"), 1.0);
  TensionDerivs f = th.tension_full(0.4);
  TwoSystem sys = linearize_psystem(f.d1, f.d2);
  CHECK(sys.lambda[0] == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(sys.lambda[1] == doctest::Approx(-1.0).epsilon(1e-8));
  CHECK(std::abs(sys.burgers[0]) < 1e-8);
  CHECK(std::abs(sys.burgers[1]) < 1e-8);
}

TEST_CASE("psystem: pair corrections satisfy the transport identity") {
  TwoSystem sys = linearize_psystem(1.44, 0.9);

  SUBCASE("frozen initial profiles, random shapes") {
    std::mt19937 gen(2026);
    std::uniform_real_distribution<double> amp(0.2, 0.8);
    const char* names[3] = {"sin", "cos", "bump"};
    for (int trial = 0; trial < 6; ++trial) {
      Profile f1 = Profile::named(names[trial % 3], amp(gen), 0.4, 0.5, true);
      Profile f2 = Profile::named(names[(trial + 1) % 3], amp(gen), 0.6, 0.4, true);
      double res = correction_identity_residual(sys, field_from_profile(f1),
                                                field_from_profile(f2), 8);
      CHECK(res < 1e-8);
    }
  }

  SUBCASE("evolved waves at positive rescaled time") {
    Wave w1(Profile::named("sin", 0.5), sys.burgers[0]);
    Wave w2(Profile::named("cos", 0.3), sys.burgers[1]);
    double res = correction_identity_residual(sys, field_from_wave(w1, 0.05),
                                              field_from_wave(w2, 0.05), 8);
    CHECK(res < 1e-8);
  }

  SUBCASE("no quadratic coupling: corrections vanish") {
    TwoSystem flat = linearize_psystem(1.44, 0.0);
    ScalarField f1 = field_from_profile(Profile::named("sin", 0.6));
    ScalarField f2 = field_from_profile(Profile::named("cos", 0.4));
    for (double u : {0.1, 0.37, 0.81})
      for (double up : {0.22, 0.64}) {
        CHECK(pair_correction(flat, f1, f2, 1, 1, 2, u, up) == 0.0);
        CHECK(pair_correction(flat, f1, f2, 1, 2, 1, u, up) == 0.0);
        CHECK(pair_correction(flat, f1, f2, 2, 1, 2, u, up) == 0.0);
        CHECK(pair_correction(flat, f1, f2, 2, 2, 1, u, up) == 0.0);
        CHECK(correction_total(flat, f1, f2, 1, u, up) == 0.0);
        CHECK(correction_total(flat, f1, f2, 2, u, up) == 0.0);
      }
  }

  SUBCASE("one family silent: its product corrections vanish") {
    ScalarField f1 = field_from_profile(Profile::named("sin", 0.6));
    ScalarField f2 = field_from_profile(Profile());
    for (double u : {0.1, 0.37, 0.81})
      for (double up : {0.22, 0.64}) {
        CHECK(pair_correction(sys, f1, f2, 1, 1, 2, u, up) == 0.0);
        CHECK(pair_correction(sys, f1, f2, 2, 2, 1, u, up) == 0.0);
      }
  }

  SUBCASE("index validation") {
    ScalarField f = field_from_profile(Profile::named("sin", 0.5));
    CHECK_THROWS_AS(pair_correction(sys, f, f, 1, 1, 1, 0.2, 0.3), std::invalid_argument);
    CHECK_THROWS_AS(pair_correction(sys, f, f, 3, 1, 2, 0.2, 0.3), std::invalid_argument);
    CHECK_THROWS_AS(correction_total(sys, f, f, 0, 0.2, 0.3), std::invalid_argument);
  }
}

TEST_CASE("psystem: chain specialization matches the general assembly") {
  ChainMacro mac = quartic_like_macro();

  SUBCASE("at time zero against the initial profiles") {
    ScalarField f1 = field_from_profile(mac.minus.initial());
    ScalarField f2 = field_from_profile(mac.plus.initial());
    for (int i = 0; i < 12; ++i)
      for (int j = 0; j < 12; ++j) {
        double u1 = (i + 0.5) / 12, u2 = (j + 0.5) / 12;
        CHECK(std::abs(chain_correction_point(mac, 0, 0.0, u1, u2).value -
                       correction_total(mac.sys, f1, f2, 1, u1, u2)) < 1e-12);
        CHECK(std::abs(chain_correction_point(mac, 1, 0.0, u1, u2).value -
                       correction_total(mac.sys, f1, f2, 2, u1, u2)) < 1e-12);
      }
  }

  SUBCASE("at positive rescaled time against the evolved waves") {
    double s = 0.04;
    ScalarField f1 = field_from_wave(mac.minus, s);
    ScalarField f2 = field_from_wave(mac.plus, s);
    for (int i = 0; i < 8; ++i)
      for (int j = 0; j < 8; ++j) {
        double u1 = (i + 0.5) / 8, u2 = (j + 0.5) / 8;
        CHECK(std::abs(chain_correction_point(mac, 0, s, u1, u2).value -
                       correction_total(mac.sys, f1, f2, 1, u1, u2)) < 1e-10);
        CHECK(std::abs(chain_correction_point(mac, 1, s, u1, u2).value -
                       correction_total(mac.sys, f1, f2, 2, u1, u2)) < 1e-10);
      }
  }

  CHECK_THROWS_AS(chain_correction_point(mac, 2, 0.0, 0.1, 0.2), std::invalid_argument);
}

TEST_CASE("psystem: correction point derivatives match finite differences") {
  ChainMacro mac = quartic_like_macro();
  double s = 0.03, h = 1e-4;
  for (int family : {0, 1})
    for (double u1 : {0.13, 0.52, 0.88})
      for (double u2 : {0.29, 0.71}) {
        CorrectionPoint c = chain_correction_point(mac, family, s, u1, u2);
        double fd1 = (chain_correction_point(mac, family, s, u1 + h, u2).value -
                      chain_correction_point(mac, family, s, u1 - h, u2).value) /
                     (2 * h);
        double fd2 = (chain_correction_point(mac, family, s, u1, u2 + h).value -
                      chain_correction_point(mac, family, s, u1, u2 - h).value) /
                     (2 * h);
        double fds = (chain_correction_point(mac, family, s + h, u1, u2).value -
                      chain_correction_point(mac, family, s - h, u1, u2).value) /
                     (2 * h);
        CHECK(c.du1 == doctest::Approx(fd1).epsilon(1e-5));
        CHECK(c.du2 == doctest::Approx(fd2).epsilon(1e-5));
        CHECK(c.ds == doctest::Approx(fds).epsilon(1e-5));
      }
}

TEST_CASE("psystem: bracket vanishes for exact wave pairs") {
  SUBCASE("generic coefficients") {
    ChainMacro mac = quartic_like_macro();
    double worst = 0.0;
    for (double s : {0.0, 0.03, 0.08})
      for (int i = 0; i < 16; ++i)
        for (int j = 0; j < 16; ++j) {
          auto b = chain_bracket(mac, s, (i + 0.5) / 16, (j + 0.5) / 16);
          worst = std::max({worst, std::abs(b[0]), std::abs(b[1])});
        }
    CHECK(worst < 1e-8);
  }

  SUBCASE("harmonic coefficients give the zero bracket exactly") {
    ChainMacro mac = make_chain_macro(0.0, 0.2, 1.7, 0.0, Profile::named("sin", 0.8),
                                      Profile::named("cos", 0.6));
    for (double s : {0.0, 0.5, 2.0})
      for (double u1 : {0.11, 0.63})
        for (double u2 : {0.27, 0.94}) {
          auto b = chain_bracket(mac, s, u1, u2);
          CHECK(b[0] == 0.0);
          CHECK(b[1] == 0.0);
        }
  }
}

TEST_CASE("psystem: modified profile equilibrium and projections") {
  SUBCASE("silent perturbations leave the constant state") {
    ChainMacro mac = make_chain_macro(0.3, -0.2, 1.1, 0.7, Profile(), Profile());
    for (double t : {0.0, 0.05, 0.4})
      for (double u : {0.0, 0.33, 0.97}) {
        auto w = chain_profile(mac, 512, 0.3, 0.1, t, u);
        CHECK(w[0] == doctest::Approx(0.3).epsilon(1e-14));
        CHECK(w[1] == doctest::Approx(-0.2).epsilon(1e-14));
        auto dw = chain_profile_dt(mac, 512, 0.3, 0.1, t, u);
        CHECK(std::abs(dw[0]) < 1e-12);
        CHECK(std::abs(dw[1]) < 1e-12);
      }
  }

  SUBCASE("harmonic chain: corrections vanish, waves translate") {
    double tp = 1.7, root = std::sqrt(tp);
    ChainMacro mac = make_chain_macro(0.05, 0.6, tp, 0.0, Profile::named("sin", 0.8),
                                      Profile::named("cos", 0.6));
    double n = 256, alpha = 0.3, kappa = 0.1, t = 0.02;
    double s = std::pow(n, kappa - alpha) * t;
    double delta = std::pow(n, kappa) * root * t;
    double scale = std::pow(n, -alpha);
    for (double u : {0.07, 0.41, 0.86}) {
      double sm = mac.minus.value(s, u - delta);
      double sp = mac.plus.value(s, u + delta);
      auto w = chain_profile(mac, n, alpha, kappa, t, u);
      CHECK(w[0] == doctest::Approx(0.05 + scale * root * (sp - sm)).epsilon(1e-12));
      CHECK(w[1] == doctest::Approx(0.6 + scale * (sm + sp)).epsilon(1e-12));
    }
  }

  SUBCASE("left projections recover each family amplitude") {
    ChainMacro mac = quartic_like_macro();
    double n = 1024, alpha = 0.25, kappa = 0.12, t = 0.01;
    double s = std::pow(n, kappa - alpha) * t;
    double delta = std::pow(n, kappa) * std::sqrt(mac.sys.tau_prime) * t;
    double s1 = std::pow(n, -alpha), s2 = s1 * s1;
    for (double u : {0.2, 0.55, 0.9}) {
      auto w = chain_profile(mac, n, alpha, kappa, t, u);
      std::array<double, 2> dv{w[0] - mac.p_star, w[1] - mac.r_star};
      double am = s1 * mac.minus.value(s, u - delta) +
                  s2 * chain_correction_point(mac, 0, s, u - delta, u + delta).value;
      double ap = s1 * mac.plus.value(s, u + delta) +
                  s2 * chain_correction_point(mac, 1, s, u - delta, u + delta).value;
      CHECK(dot2(mac.sys.left[0], dv) == doctest::Approx(am).epsilon(1e-12));
      CHECK(dot2(mac.sys.left[1], dv) == doctest::Approx(ap).epsilon(1e-12));
    }
  }

  SUBCASE("nonzero-mean perturbations are rejected") {
    Profile bump = Profile::named("bump", 0.5);
    CHECK_THROWS_AS(make_chain_macro(0.0, 0.0, 1.0, 0.5, bump, Profile()),
                    std::invalid_argument);
  }
}

TEST_CASE("psystem: profile time derivative matches finite differences") {
  ChainMacro mac = quartic_like_macro();
  double n = 64, alpha = 0.3, kappa = 0.1, t = 0.01, h = 1e-5;
  for (double u : {0.18, 0.47, 0.92}) {
    auto d = chain_profile_dt(mac, n, alpha, kappa, t, u);
    auto wp = chain_profile(mac, n, alpha, kappa, t + h, u);
    auto wm = chain_profile(mac, n, alpha, kappa, t - h, u);
    CHECK(d[0] == doctest::Approx((wp[0] - wm[0]) / (2 * h)).epsilon(1e-6));
    CHECK(d[1] == doctest::Approx((wp[1] - wm[1]) / (2 * h)).epsilon(1e-6));
  }
}

TEST_CASE("psystem: stretch profile stays mean-zero to correction order") {
  ChainMacro mac = quartic_like_macro();
  double n = 256, alpha = 0.3, kappa = 0.1, t = 0.02;
  double s = std::pow(n, kappa - alpha) * t;
  double delta = std::pow(n, kappa) * std::sqrt(mac.sys.tau_prime) * t;
  double s2 = std::pow(n, -2.0 * alpha);
  const int q = 512;
  double lhs = 0.0, rhs = 0.0, peak = 0.0;
  for (int i = 0; i < q; ++i) {
    double u = (i + 0.5) / q;
    lhs += chain_profile(mac, n, alpha, kappa, t, u)[1] - mac.r_star;
    double corr = chain_correction_point(mac, 0, s, u - delta, u + delta).value +
                  chain_correction_point(mac, 1, s, u - delta, u + delta).value;
    rhs += s2 * corr;
    peak = std::max(peak, std::abs(corr));
  }
  lhs /= q;
  rhs /= q;
  // first-order waves integrate to zero; what is left is the correction mean
  CHECK(std::abs(lhs - rhs) < 1e-10);
  CHECK(std::abs(lhs) <= s2 * peak + 1e-12);
}

TEST_CASE("psystem: lattice defect scales at the predicted rate") {
  SUBCASE("harmonic chain: only the discrete-gradient error remains") {
    ChainMacro mac = make_chain_macro(0.0, 0.0, 1.0, 0.0, Profile::named("sin", 0.5),
                                      Profile::named("cos", 0.5));
    auto ident = [](double r) { return r; };
    double alpha = 0.3, kappa = 0.1, t = 0.01;
    double prev = 0.0;
    std::vector<int> ns{256, 512, 1024};
    std::vector<double> peaks;
    for (int n : ns) {
      auto eps = epsilon_lattice(mac, ident, n, alpha, kappa, t);
      double peak = 0.0;
      for (auto& e : eps) peak = std::max({peak, std::abs(e[0]), std::abs(e[1])});
      peaks.push_back(peak);
    }
    (void)prev;
    for (std::size_t i = 1; i < peaks.size(); ++i) {
      double ratio = peaks[i] / peaks[i - 1];
      CHECK(ratio == doctest::Approx(std::pow(2.0, -1.0 + kappa - alpha)).epsilon(0.1));
    }
  }

  SUBCASE("quadratic tension: slope matches the slower exponent") {
    double tp = 1.3, ts = 0.85, rstar = 0.4;
    ChainMacro mac = quartic_like_macro();
    auto tension = [&](double r) {
      double d = r - rstar;
      return tp * d + 0.5 * ts * d * d;
    };
    double alpha = 0.2, kappa = 0.15, t = 0.005;
    std::vector<double> lx, ly;
    for (int n : {2048, 4096, 8192, 16384}) {
      auto eps = epsilon_lattice(mac, tension, n, alpha, kappa, t);
      double peak = 0.0;
      for (auto& e : eps) peak = std::max({peak, std::abs(e[0]), std::abs(e[1])});
      lx.push_back(std::log(static_cast<double>(n)));
      ly.push_back(std::log(peak));
    }
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) mx += lx[i], my += ly[i];
    mx /= lx.size();
    my /= ly.size();
    double num = 0, den = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
      num += (lx[i] - mx) * (ly[i] - my);
      den += (lx[i] - mx) * (lx[i] - mx);
    }
    double slope = num / den;
    double predicted = std::max(-1.0 + kappa - alpha, kappa - 3.0 * alpha);
    CHECK(std::abs(slope - predicted) < 0.15);
  }
}

TEST_CASE("gep profile: identity, fixed point, slow-time limit, shock guard") {
  Profile rho0 = Profile::named("sin", 0.5);
  GepMacro mac = make_gep_macro(0.3, 1, {1.0, 0.0, 0.0}, {1, 0, 0}, rho0);
  CHECK(mac.lambda == doctest::Approx(0.4).epsilon(1e-15));
  CHECK(mac.wave.coefficient() == doctest::Approx(-1.0).epsilon(1e-15));

  SUBCASE("time zero reproduces the initial perturbation") {
    for (double u : {0.0, 0.21, 0.77})
      CHECK(gep_profile(mac, 128, 0.4, 0.2, 0.0, {u, 0.0, 0.0}) ==
            doctest::Approx(0.3 + std::pow(128.0, -0.4) * rho0.value(u)).epsilon(1e-12));
  }

  SUBCASE("flat perturbation pins the profile at the center") {
    GepMacro flat = make_gep_macro(0.3, 1, {1.0, 0.0, 0.0}, {1, 0, 0}, Profile());
    for (double t : {0.0, 0.5, 3.0})
      for (double u : {0.1, 0.9})
        CHECK(gep_profile(flat, 128, 0.4, 0.2, t, {u, 0.0, 0.0}) == 0.3);
  }

  SUBCASE("kappa below alpha: the co-moving profile freezes as N doubles") {
    double alpha = 0.4, kappa = 0.2, t = 0.05;
    std::vector<double> scaled;
    for (double n : {64.0, 128.0, 256.0, 512.0, 1024.0, 2048.0, 4096.0}) {
      double shift = std::pow(n, kappa) * mac.lambda * t;  // drift is the first axis
      double err = 0.0;
      for (int i = 0; i < 64; ++i) {
        double u = i / 64.0;
        double v = gep_profile(mac, n, alpha, kappa, t, {u + shift, 0.0, 0.0});
        err = std::max(err, std::abs(v - 0.3 - std::pow(n, -alpha) * rho0.value(u)));
      }
      scaled.push_back(err * std::pow(n, alpha));
    }
    for (std::size_t i = 1; i < scaled.size(); ++i) CHECK(scaled[i] < scaled[i - 1]);
    CHECK(scaled.back() < 0.5 * scaled.front());
  }

  SUBCASE("evaluation past the shock is rejected") {
    // sin datum, |c| = 1: caustic at s = 1/(4 pi a); push the rescaled time past it
    double alpha = 0.4, kappa = 0.2;
    double tstar = 1.0 / (4.0 * M_PI * 0.5);
    double t = (tstar * 1.01) / std::pow(128.0, kappa - alpha);
    CHECK_THROWS_AS(gep_profile(mac, 128, alpha, kappa, t, {0.5, 0.0, 0.0}),
                    std::domain_error);
  }

  SUBCASE("center outside the admissible band is rejected") {
    CHECK_THROWS_AS(make_gep_macro(0.0, 1, {1.0, 0.0, 0.0}, {1, 0, 0}, rho0),
                    std::invalid_argument);
    CHECK_THROWS_AS(make_gep_macro(2.0, 2, {1.0, 0.0, 0.0}, {1, 0, 0}, rho0),
                    std::invalid_argument);
  }
}
