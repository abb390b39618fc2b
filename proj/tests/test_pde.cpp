#include <cmath>
#include <functional>
#include <vector>

#include "doctest.h"
#include "eqpert/burgers.hpp"
#include "eqpert/profiles.hpp"

using namespace eqpert;

namespace {
constexpr double kPi = 3.14159265358979323846;

double fd1(const std::function<double(double)>& f, double x, double h = 1e-5) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}
}  // namespace

TEST_CASE("profile values, derivatives, primitives") {
  Profile s = Profile::named("sin", 0.25);
  CHECK(s.value(0.25) == doctest::Approx(0.25));
  CHECK(s.value(0.75) == doctest::Approx(-0.25));
  CHECK(s.primitive(0.5) == doctest::Approx(0.25 / kPi));
  CHECK(s.primitive(1.0) == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(s.min_value() == doctest::Approx(-0.25));
  CHECK(s.max_value() == doctest::Approx(0.25));

  Profile c = Profile::named("cos", 2.0);
  CHECK(c.value(0.0) == doctest::Approx(2.0));
  CHECK(c.primitive(0.25) == doctest::Approx(2.0 / (2.0 * kPi)));

  for (const Profile& p : {s, c}) {
    for (double u : {0.05, 0.3, 0.62, 0.9}) {
      CHECK(p.deriv(u) == doctest::Approx(fd1([&](double x) { return p.value(x); }, u))
                              .epsilon(1e-6));
      CHECK(p.deriv2(u) == doctest::Approx(fd1([&](double x) { return p.deriv(x); }, u))
                               .epsilon(1e-6));
      CHECK(p.value(u) == doctest::Approx(fd1([&](double x) { return p.primitive(x); }, u))
                              .epsilon(1e-6));
    }
  }
}

TEST_CASE("bump profile: support, smoothness, zero-mean variant") {
  Profile b = Profile::named("bump", 1.5, 0.5, 0.4);
  CHECK(b.value(0.5) == doctest::Approx(1.5));
  CHECK(b.value(0.3) == doctest::Approx(0.0));
  CHECK(b.value(0.7) == doctest::Approx(0.0));
  CHECK(b.value(0.05) == doctest::Approx(0.0));  // wraps without touching support
  CHECK(b.deriv(0.5) == doctest::Approx(0.0));
  for (double u : {0.42, 0.5, 0.55, 0.68}) {
    CHECK(b.deriv(u) ==
          doctest::Approx(fd1([&](double x) { return b.value(x); }, u)).epsilon(1e-5));
    CHECK(b.value(u) ==
          doctest::Approx(fd1([&](double x) { return b.primitive(x); }, u)).epsilon(1e-5));
  }
  CHECK(b.mean() > 0.0);
  CHECK(b.primitive(1.0) == doctest::Approx(b.mean()));

  Profile z = Profile::named("bump", 1.5, 0.5, 0.4, true);
  CHECK(z.mean() == 0.0);
  CHECK(z.primitive(1.0) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(z.value(0.5) - z.value(0.05) == doctest::Approx(1.5));  // shift cancels
}

TEST_CASE("characteristics: fixed points and identity") {
  Profile zero = Profile::named("zero", 0.0);
  CHECK(characteristic_value(zero, -1.0, 0.4, 0.3) == doctest::Approx(0.0));
  Profile s = Profile::named("sin", 0.25);
  for (double u : {0.0, 0.2, 0.55, 0.9})
    CHECK(characteristic_value(s, -1.0, 0.0, u) == doctest::Approx(s.value(u)).epsilon(1e-12));
}

TEST_CASE("shock time closed form and scaling") {
  // a sin(2 pi u) with flux c rho^2: first caustic at 1 / (4 pi |a c|)
  Profile s = Profile::named("sin", 0.25);
  ShockTime st = shock_time(s, -1.0);
  REQUIRE(st.finite);
  CHECK(st.t == doctest::Approx(1.0 / kPi).epsilon(1e-6));
  ShockTime st2 = shock_time(s, 1.0);
  CHECK(st2.t == doctest::Approx(1.0 / kPi).epsilon(1e-6));

  Profile half = Profile::named("sin", 0.125);
  CHECK(shock_time(half, -1.0).t == doctest::Approx(2.0 / kPi).epsilon(1e-6));

  Profile zero = Profile::named("zero", 0.0);
  CHECK_FALSE(shock_time(zero, -1.0).finite);

  // the strict pre-shock contract rejects any post-caustic time
  Wave w(s, -1.0);
  CHECK(w.shock().finite);
  CHECK_THROWS(w.value(st.t * 1.05, 0.99));
  CHECK_THROWS(w.point(st.t, 0.5));
  CHECK(w.value(0.9 * st.t, 0.99) == doctest::Approx(characteristic_value(s, -1.0, 0.9 * st.t, 0.99)));
  // the kernel itself detects the fold it lands on
  CHECK_THROWS(characteristic_value(s, -1.0, st.t * 1.05, 0.0));
}

TEST_CASE("characteristic solution satisfies the conservation law") {
  Profile s = Profile::named("sin", 0.25);
  const double c = -1.0, h = 1e-4;
  for (double t : {0.05, 0.15})
    for (double u : {0.1, 0.33, 0.71}) {
      double dt = (characteristic_value(s, c, t + h, u) -
                   characteristic_value(s, c, t - h, u)) / (2.0 * h);
      auto sq = [&](double x) {
        double v = characteristic_value(s, c, t, x);
        return v * v;
      };
      double dx = (sq(u + h) - sq(u - h)) / (2.0 * h);
      CHECK(dt + c * dx == doctest::Approx(0.0).epsilon(1e-5));
    }
}

TEST_CASE("implicit derivatives match finite differences") {
  Profile s = Profile::named("sin", 0.25);
  const double c = -1.0, t = 0.12;
  for (double u : {0.15, 0.4, 0.83}) {
    WavePoint w = characteristic_point(s, c, t, u);
    auto val_u = [&](double x) { return characteristic_value(s, c, t, x); };
    auto val_s = [&](double x) { return characteristic_value(s, c, x, u); };
    CHECK(w.du == doctest::Approx(fd1(val_u, u)).epsilon(1e-6));
    CHECK(w.ds == doctest::Approx(fd1(val_s, t)).epsilon(1e-6));
    auto du_of = [&](double x) { return characteristic_point(s, c, t, x).du; };
    CHECK(w.dudu == doctest::Approx(fd1(du_of, u)).epsilon(1e-5));
    auto du_at_s = [&](double x) { return characteristic_point(s, c, x, u).du; };
    CHECK(w.dsdu == doctest::Approx(fd1(du_at_s, t)).epsilon(1e-5));
  }
}

TEST_CASE("wave primitive: derivative recovery and periodicity") {
  Profile s = Profile::named("sin", 0.25);
  const double c = -1.0, t = 0.1;
  for (double u : {0.2, 0.5, 0.77}) {
    auto prim = [&](double x) { return wave_primitive(s, c, t, x); };
    CHECK(characteristic_value(s, c, t, u) == doctest::Approx(fd1(prim, u)).epsilon(1e-7));
    auto prim_s = [&](double x) { return wave_primitive(s, c, x, u); };
    CHECK(wave_primitive_ds(s, c, t, u) == doctest::Approx(fd1(prim_s, t)).epsilon(1e-6));
  }
  // zero-mean datum keeps a zero-mean solution: primitive over the full circle
  CHECK(wave_primitive(s, c, t, 1.0) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("finite volume: constants, mean, total variation") {
  std::vector<double> constant(64, 0.37);
  auto out = burgers_fv(constant, 1, 64, {-1.0, 0, 0}, 0.5);
  for (double v : out) CHECK(v == doctest::Approx(0.37));

  Profile s = Profile::named("sin", 0.25);
  auto f0 = planar_field(s, {1, 0, 0}, 1, 256);
  double m0 = mean_field(f0), tv0 = total_variation_1d(f0);
  auto f1 = burgers_fv(f0, 1, 256, {-1.0, 0, 0}, 0.4);  // runs past the shock
  CHECK(mean_field(f1) == doctest::Approx(m0).epsilon(1e-13));
  CHECK(total_variation_1d(f1) <= tv0 + 1e-13);

  CHECK_THROWS(burgers_fv(f1, 1, 256, {-1.0, 0, 0}, 0.1, 0.9));  // CFL cap
}

TEST_CASE("finite volume converges to characteristics at first order") {
  Profile s = Profile::named("sin", 0.25);
  const double c = -1.0, t = 0.15;  // pre-shock (caustic at 1/pi)
  std::vector<int> grids = {512, 1024, 2048, 4096};
  std::vector<double> errs;
  for (int n : grids) {
    auto f = burgers_fv(planar_field(s, {1, 0, 0}, 1, n), 1, n, {c, 0, 0}, t);
    std::vector<double> exact(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j)
      exact[static_cast<std::size_t>(j)] =
          characteristic_value(s, c, t, (j + 0.5) / n);
    errs.push_back(l1_error(f, exact));
  }
  CHECK(errs.back() < 1e-3);
  for (std::size_t i = 1; i < errs.size(); ++i) CHECK(errs[i] < errs[i - 1]);
  double order = std::log2(errs.front() / errs.back()) / (grids.size() - 1);
  CHECK(order >= 0.9);
}

TEST_CASE("two-dimensional planar wave agrees with the reduced problem") {
  Profile s = Profile::named("sin", 0.25);
  const std::array<int, 3> n = {1, 1, 0};
  const std::array<double, 3> c = {-1.0, -0.5, 0.0};
  const double t = 0.03;
  const int m = 128;
  auto f = burgers_fv(planar_field(s, n, 2, m), 2, m, c, t);
  std::vector<double> exact(f.size());
  for (int j = 0; j < m * m; ++j) {
    std::array<double, 3> u = {(j % m + 0.5) / m, (j / m + 0.5) / m, 0.0};
    exact[static_cast<std::size_t>(j)] = planar_characteristic(s, n, c, t, u);
  }
  CHECK(l1_error(f, exact) < 1e-2);
}
