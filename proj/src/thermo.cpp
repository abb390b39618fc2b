#include "eqpert/thermo.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <stdexcept>

namespace eqpert {

namespace {

using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
using G15 = boost::math::quadrature::gauss<double, 15>;

constexpr double kTailLog = 80.0;  // dropped tail mass ~ exp(-80) of the peak

double integrate(const std::function<double(double)>& f, double a, double b) {
  return GK::integrate(f, a, b, 12, 1e-12);
}

// root of an increasing function by bracket expansion plus safeguarded Newton
double solve_increasing(const std::function<double(double)>& g,
                        const std::function<double(double)>& dg, double x0,
                        double tol) {
  double lo = x0, hi = x0;
  double glo = g(lo), ghi = glo;
  double span = 1.0;
  for (int i = 0; i < 200 && glo > 0.0; ++i) {
    lo -= span;
    span *= 2.0;
    glo = g(lo);
  }
  span = 1.0;
  for (int i = 0; i < 200 && ghi < 0.0; ++i) {
    hi += span;
    span *= 2.0;
    ghi = g(hi);
  }
  if (glo > 0.0 || ghi < 0.0) throw std::runtime_error("solve_increasing: no bracket");
  double x = std::clamp(x0, lo, hi);
  for (int it = 0; it < 200; ++it) {
    double gx = g(x);
    if (std::abs(gx) < tol) return x;
    if (gx > 0.0)
      hi = x;
    else
      lo = x;
    double d = dg(x);
    double xn = (d > 0.0) ? x - gx / d : x;
    if (!(xn > lo) || !(xn < hi)) xn = 0.5 * (lo + hi);
    x = xn;
  }
  if (std::abs(g(x)) < tol * 1e3) return x;
  throw std::runtime_error("solve_increasing: did not converge");
}

}  // namespace

Thermodynamics::Thermodynamics(const Potential& pot, double beta, double range)
    : pot_(pot), beta_(beta) {
  if (!(beta > 0.0)) throw std::invalid_argument("thermodynamics: beta must be positive");
  if (!(range > 0.0)) throw std::invalid_argument("thermodynamics: range must be positive");
  // two-pass certification: the half-width depends on c_lo, the curvature
  // check must cover every integration interval [m - W, m + W] with |m| <= range
  auto [lo1, hi1] = pot_.curvature_bounds(range);
  double w = std::sqrt(2.0 * kTailLog / (beta_ * lo1));
  auto [lo2, hi2] = pot_.curvature_bounds(range + w);
  if (lo2 < lo1) {
    w = std::sqrt(2.0 * kTailLog / (beta_ * lo2));
    auto [lo3, hi3] = pot_.curvature_bounds(range + w);
    if (lo3 < lo2) throw std::domain_error("thermodynamics: curvature floor unstable on range");
    lo2 = lo3;
    hi2 = hi3;
  }
  c_lo_ = lo2;
  c_hi_ = hi2;
  half_ = std::sqrt(2.0 * kTailLog / (beta_ * c_lo_));
}

double Thermodynamics::mode(double tau) const {
  auto g = [&](double m) { return pot_.dV(m) - tau; };
  auto dg = [&](double m) { return pot_.d2V(m); };
  return solve_increasing(g, dg, tau, 1e-13 * std::max(1.0, std::abs(tau)));
}

double Thermodynamics::weight(double tau, double peak, double r) const {
  return std::exp(-beta_ * (pot_.V(r) - tau * r - peak));
}

double Thermodynamics::partition(double tau) const {
  double m = mode(tau);
  double peak = pot_.V(m) - tau * m;
  double base = integrate([&](double r) { return weight(tau, peak, r); }, m - half_, m + half_);
  return base * std::exp(-beta_ * peak);
}

double Thermodynamics::free_energy(double tau) const {
  double m = mode(tau);
  double peak = pot_.V(m) - tau * m;
  double base = integrate([&](double r) { return weight(tau, peak, r); }, m - half_, m + half_);
  return (std::log(base) - beta_ * peak) / beta_;
}

double Thermodynamics::rbar(double tau) const {
  return expectation(tau, [](double r) { return r; });
}

double Thermodynamics::variance(double tau) const {
  double mean = rbar(tau);
  return expectation(tau, [&](double r) { return (r - mean) * (r - mean); });
}

double Thermodynamics::third_central(double tau) const {
  double mean = rbar(tau);
  return expectation(tau, [&](double r) { return (r - mean) * (r - mean) * (r - mean); });
}

double Thermodynamics::expectation(double tau, const std::function<double(double)>& f) const {
  double m = mode(tau);
  double peak = pot_.V(m) - tau * m;
  double num = integrate([&](double r) { return f(r) * weight(tau, peak, r); }, m - half_, m + half_);
  double den = integrate([&](double r) { return weight(tau, peak, r); }, m - half_, m + half_);
  return num / den;
}

double Thermodynamics::density(double tau, double r) const {
  double m = mode(tau);
  double peak = pot_.V(m) - tau * m;
  double den = integrate([&](double rr) { return weight(tau, peak, rr); }, m - half_, m + half_);
  return weight(tau, peak, r) / den;
}

double Thermodynamics::tension(double r) const {
  auto g = [&](double tau) { return rbar(tau) - r; };
  auto dg = [&](double tau) { return beta_ * variance(tau); };
  // V'(r) is exact for the harmonic marginal and a good seed in general
  return solve_increasing(g, dg, pot_.dV(r), 1e-10 * std::max(1.0, std::abs(r)));
}

TensionDerivs Thermodynamics::tension_full(double r) const {
  TensionDerivs out;
  out.tau = tension(r);
  double g2 = beta_ * variance(out.tau);
  double g3 = beta_ * beta_ * third_central(out.tau);
  out.d1 = 1.0 / g2;
  out.d2 = -g3 / (g2 * g2 * g2);
  return out;
}

GibbsTable Thermodynamics::build_table(double tau, int nodes) const {
  if (nodes < 8) throw std::invalid_argument("build_table: too few nodes");
  GibbsTable tab;
  tab.tau = tau;
  double m = mode(tau);
  tab.peak = pot_.V(m) - tau * m;
  // narrower range than the quadrature interval: cdf increments must stay
  // resolvable in double, so cut where the log weight has dropped by 26
  // (clipped tail mass ~3e-13 per side)
  auto edge = [&](double dir) {
    double lw = 0.0, hw = std::sqrt(2.0 * 26.0 / (beta_ * c_lo_));
    auto excess = [&](double w) {
      double r = m + dir * w;
      return beta_ * (pot_.V(r) - tau * r - tab.peak) - 26.0;
    };
    for (int it = 0; it < 80; ++it) {
      double mid = 0.5 * (lw + hw);
      (excess(mid) < 0.0 ? lw : hw) = mid;
    }
    return m + dir * hw;
  };
  double left = edge(-1.0), right = edge(1.0);
  tab.lo = left;
  tab.step = (right - left) / (nodes - 1);
  tab.cdf.assign(nodes, 0.0);
  tab.density.assign(nodes, 0.0);
  tab.slope.assign(nodes, 0.0);
  for (int i = 0; i < nodes; ++i) tab.density[i] = weight(tau, tab.peak, tab.lo + i * tab.step);
  double cum = 0.0;
  for (int i = 0; i + 1 < nodes; ++i) {
    double a = tab.lo + i * tab.step;
    double b = a + tab.step;
    cum += G15::integrate([&](double r) { return weight(tau, tab.peak, r); }, a, b);
    tab.cdf[i + 1] = cum;
  }
  tab.norm = cum;
  for (int i = 0; i < nodes; ++i) {
    tab.cdf[i] /= cum;
    tab.density[i] /= cum;
    tab.slope[i] = 1.0 / std::max(tab.density[i], 1e-300);
  }
  tab.cdf.front() = 0.0;
  tab.cdf.back() = 1.0;
  // monotone-cubic safeguard: node slopes capped by three times the secant
  // slope of each adjacent interval
  for (int i = 0; i + 1 < nodes; ++i) {
    double dc = tab.cdf[i + 1] - tab.cdf[i];
    if (!(dc > 0.0)) continue;
    double sec = tab.step / dc;
    tab.slope[i] = std::min(tab.slope[i], 3.0 * sec);
    tab.slope[i + 1] = std::min(tab.slope[i + 1], 3.0 * sec);
  }
  return tab;
}

double Thermodynamics::cdf_from_table(const GibbsTable& tab, double r) const {
  int nodes = static_cast<int>(tab.cdf.size());
  if (r <= tab.lo) return 0.0;
  double top = tab.lo + (nodes - 1) * tab.step;
  if (r >= top) return 1.0;
  int i = static_cast<int>((r - tab.lo) / tab.step);
  i = std::clamp(i, 0, nodes - 2);
  double a = tab.lo + i * tab.step;
  double part = G15::integrate([&](double rr) { return weight(tab.tau, tab.peak, rr); }, a, r);
  return std::min(1.0, tab.cdf[i] + part / tab.norm);
}

double Thermodynamics::sample_table(const GibbsTable& tab, RngStream& rng) const {
  double u = rng.uniform_co();
  const auto& c = tab.cdf;
  auto it = std::upper_bound(c.begin(), c.end(), u);
  int i = static_cast<int>(it - c.begin()) - 1;
  i = std::clamp(i, 0, static_cast<int>(c.size()) - 2);
  double h = c[i + 1] - c[i];
  if (!(h > 0.0)) return tab.lo + i * tab.step;
  double t = (u - c[i]) / h;
  double r0 = tab.lo + i * tab.step;
  double r1 = r0 + tab.step;
  double m0 = tab.slope[i] * h;  // slopes rescaled to the unit interval
  double m1 = tab.slope[i + 1] * h;
  double t2 = t * t, t3 = t2 * t;
  return (2 * t3 - 3 * t2 + 1) * r0 + (t3 - 2 * t2 + t) * m0 + (-2 * t3 + 3 * t2) * r1 +
         (t3 - t2) * m1;
}

double Thermodynamics::sample_rejection(double tau, RngStream& rng) const {
  return sample_rejection_at_mode(tau, mode(tau), rng);
}

double Thermodynamics::sample_rejection_at_mode(double tau, double m, RngStream& rng) const {
  // Gaussian envelope: V(r) - tau r - (V(m) - tau m) >= c_lo (r - m)^2 / 2
  // since V'' >= c_lo along the segment and V'(m) = tau
  double peak = pot_.V(m) - tau * m;
  double sd = 1.0 / std::sqrt(beta_ * c_lo_);
  for (int it = 0; it < 100000; ++it) {
    double r = m + sd * rng.gaussian();
    double logacc = -beta_ * (pot_.V(r) - tau * r - peak) + 0.5 * beta_ * c_lo_ * (r - m) * (r - m);
    if (std::log(rng.uniform()) <= logacc) return r;
  }
  throw std::runtime_error("sample_rejection: acceptance loop failed");
}

}  // namespace eqpert
