#include "eqpert/burgers.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace eqpert {

namespace {

// residual g(rho) = rho - rho0(zeta - 2 c s rho); J = g' = 1 + 2 c s rho0'(xi)
double solve_characteristic(const Profile& rho0, double c, double s, double zeta) {
  double lo = rho0.min_value(), hi = rho0.max_value();
  if (lo == hi) return lo;
  auto g = [&](double r) { return r - rho0.value(zeta - 2.0 * c * s * r); };
  double r = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    double gv = g(r);
    if (std::abs(gv) < 1e-12) return r;
    if (gv > 0.0)
      hi = r;
    else
      lo = r;
    double xi = zeta - 2.0 * c * s * r;
    double J = 1.0 + 2.0 * c * s * rho0.deriv(xi);
    double next = J > 1e-14 ? r - gv / J : lo - 1.0;  // force bisection
    r = (next > lo && next < hi) ? next : 0.5 * (lo + hi);
  }
  if (std::abs(g(r)) > 1e-9)
    throw std::runtime_error("characteristic solve did not converge (near shock?)");
  return r;
}

}  // namespace

double characteristic_value(const Profile& rho0, double c, double s, double zeta) {
  double r = solve_characteristic(rho0, c, s, zeta);
  double J = 1.0 + 2.0 * c * s * rho0.deriv(zeta - 2.0 * c * s * r);
  if (J <= 0.0) throw std::domain_error("characteristic map is singular: at or past the shock");
  return r;
}

WavePoint characteristic_point(const Profile& rho0, double c, double s, double zeta) {
  WavePoint w;
  w.value = solve_characteristic(rho0, c, s, zeta);
  w.xi = zeta - 2.0 * c * s * w.value;
  double g = rho0.deriv(w.xi);
  double h = rho0.deriv2(w.xi);
  double J = 1.0 + 2.0 * c * s * g;
  if (J <= 0.0) throw std::domain_error("characteristic map is singular: at or past the shock");
  w.du = g / J;
  w.ds = -2.0 * c * w.value * g / J;
  w.dudu = h / (J * J * J);
  w.dsdu = -2.0 * c * (w.value * h / J + g * g) / (J * J);
  return w;
}

double wave_primitive(const Profile& rho0, double c, double s, double u) {
  double ru = solve_characteristic(rho0, c, s, u);
  double r0 = solve_characteristic(rho0, c, s, 0.0);
  double xiu = u - 2.0 * c * s * ru;
  double xi0 = -2.0 * c * s * r0;
  auto bracket = [&](double xi) {
    double v = rho0.value(xi);
    return rho0.primitive(xi) + c * s * v * v;
  };
  return bracket(xiu) - bracket(xi0);
}

double wave_primitive_ds(const Profile& rho0, double c, double s, double u) {
  double ru = characteristic_value(rho0, c, s, u);
  double r0 = characteristic_value(rho0, c, s, 0.0);
  return -c * (ru * ru - r0 * r0);
}

void Wave::guard(double s) const {
  if (shock_.finite && s >= shock_.t)
    throw std::domain_error("evaluation time is at or past the shock time");
}

ShockTime shock_time(const Profile& rho0, double c) {
  const int n = 4096;
  double best = 0.0, arg = 0.0;
  for (int i = 0; i < n; ++i) {
    double u = static_cast<double>(i) / n;
    double v = 2.0 * c * rho0.deriv(u);
    if (v < best) {
      best = v;
      arg = u;
    }
  }
  ShockTime st;
  if (best >= 0.0) return st;  // no compression anywhere
  // golden-section refinement of the compression minimum around the grid argmin
  double lo = arg - 1.0 / n, hi = arg + 1.0 / n;
  const double gr = 0.6180339887498949;
  double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
  auto f = [&](double u) { return 2.0 * c * rho0.deriv(u); };
  double f1 = f(x1), f2 = f(x2);
  for (int it = 0; it < 80 && hi - lo > 1e-13; ++it) {
    if (f1 < f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - gr * (hi - lo);
      f1 = f(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + gr * (hi - lo);
      f2 = f(x2);
    }
  }
  best = std::min(best, std::min(f1, f2));
  st.finite = true;
  st.t = -1.0 / best;
  return st;
}

namespace {

// Godunov flux for f(r) = c r^2: minimize over [a,b] when a <= b, else
// maximize over [b,a]; candidates are the endpoints and the vertex at 0.
double godunov_flux(double c, double a, double b) {
  double fa = c * a * a, fb = c * b * b;
  if (a <= b) {
    double v = std::min(fa, fb);
    if (a < 0.0 && b > 0.0) v = std::min(v, 0.0);
    return v;
  }
  double v = std::max(fa, fb);
  if (b < 0.0 && a > 0.0) v = std::max(v, 0.0);
  return v;
}

// one conservative sweep along `axis` with time step dt
void sweep(std::vector<double>& f, int dim, int cells, int axis, double c, double dt) {
  if (c == 0.0) return;
  const double lam = dt * cells;  // dt / h
  const std::int64_t stride = [&] {
    std::int64_t s = 1;
    for (int i = 0; i < axis; ++i) s *= cells;
    return s;
  }();
  std::int64_t total = 1;
  for (int i = 0; i < dim; ++i) total *= cells;
  const std::int64_t lines = total / cells;
  std::vector<double> line(static_cast<std::size_t>(cells));
  std::vector<double> flux(static_cast<std::size_t>(cells));
  for (std::int64_t l = 0; l < lines; ++l) {
    // base index of this 1-d line: insert the axis coordinate at `axis`
    std::int64_t rem = l, base = 0, mul = 1;
    for (int i = 0; i < dim; ++i) {
      if (i == axis) {
        mul *= cells;
        continue;
      }
      base += (rem % cells) * mul;
      rem /= cells;
      mul *= cells;
    }
    for (int j = 0; j < cells; ++j)
      line[static_cast<std::size_t>(j)] = f[static_cast<std::size_t>(base + j * stride)];
    for (int j = 0; j < cells; ++j)
      flux[static_cast<std::size_t>(j)] =
          godunov_flux(c, line[static_cast<std::size_t>(j)],
                       line[static_cast<std::size_t>((j + 1) % cells)]);
    for (int j = 0; j < cells; ++j) {
      double in = flux[static_cast<std::size_t>((j + cells - 1) % cells)];
      f[static_cast<std::size_t>(base + j * stride)] -=
          lam * (flux[static_cast<std::size_t>(j)] - in);
    }
  }
}

}  // namespace

std::vector<double> burgers_fv(std::vector<double> field, int dim, int cells,
                               const std::array<double, 3>& c, double t, double cfl) {
  if (dim < 1 || dim > 3) throw std::invalid_argument("fv: dim must be 1, 2 or 3");
  if (cells < 2) throw std::invalid_argument("fv: need at least 2 cells");
  if (cfl <= 0.0 || cfl > 0.5) throw std::invalid_argument("fv: CFL must be in (0, 0.5]");
  std::int64_t total = 1;
  for (int i = 0; i < dim; ++i) total *= cells;
  if (static_cast<std::int64_t>(field.size()) != total)
    throw std::invalid_argument("fv: field size mismatch");
  if (t < 0.0) throw std::invalid_argument("fv: negative time");
  if (t == 0.0) return field;

  // max wave speed 2|c_i| max|rho|; the scheme obeys the maximum principle so
  // the initial range bounds the speed for all time
  double bound = 0.0;
  for (double v : field) bound = std::max(bound, std::abs(v));
  double cmax = 0.0;
  for (int i = 0; i < dim; ++i) cmax = std::max(cmax, std::abs(c[static_cast<std::size_t>(i)]));
  double speed = 2.0 * cmax * bound;
  double h = 1.0 / cells;
  double dt_max = speed > 0.0 ? cfl * h / speed : t;
  int steps = std::max(1, static_cast<int>(std::ceil(t / dt_max)));
  double dt = t / steps;

  for (int s = 0; s < steps; ++s) {
    if (dim == 1) {
      sweep(field, dim, cells, 0, c[0], dt);
    } else if (dim == 2) {
      sweep(field, dim, cells, 0, c[0], 0.5 * dt);
      sweep(field, dim, cells, 1, c[1], dt);
      sweep(field, dim, cells, 0, c[0], 0.5 * dt);
    } else {
      sweep(field, dim, cells, 0, c[0], 0.5 * dt);
      sweep(field, dim, cells, 1, c[1], 0.5 * dt);
      sweep(field, dim, cells, 2, c[2], dt);
      sweep(field, dim, cells, 1, c[1], 0.5 * dt);
      sweep(field, dim, cells, 0, c[0], 0.5 * dt);
    }
  }
  return field;
}

std::vector<double> planar_field(const Profile& rho0, const std::array<int, 3>& normal,
                                 int dim, int cells) {
  std::int64_t total = 1;
  for (int i = 0; i < dim; ++i) total *= cells;
  std::vector<double> f(static_cast<std::size_t>(total));
  for (std::int64_t idx = 0; idx < total; ++idx) {
    std::int64_t r = idx;
    double zeta = 0.0;
    for (int i = 0; i < dim; ++i) {
      double ui = (static_cast<double>(r % cells) + 0.5) / cells;
      zeta += normal[static_cast<std::size_t>(i)] * ui;
      r /= cells;
    }
    f[static_cast<std::size_t>(idx)] = rho0.value(zeta);
  }
  return f;
}

double planar_characteristic(const Profile& rho0, const std::array<int, 3>& normal,
                             const std::array<double, 3>& c, double s,
                             const std::array<double, 3>& u) {
  double ceff = 0.0, zeta = 0.0;
  for (int i = 0; i < 3; ++i) {
    ceff += c[static_cast<std::size_t>(i)] * normal[static_cast<std::size_t>(i)];
    zeta += normal[static_cast<std::size_t>(i)] * u[static_cast<std::size_t>(i)];
  }
  return characteristic_value(rho0, ceff, s, zeta);
}

double mean_field(const std::vector<double>& f) {
  long double acc = 0.0L;
  for (double v : f) acc += v;
  return static_cast<double>(acc / static_cast<long double>(f.size()));
}

double l1_error(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw std::invalid_argument("l1_error: size mismatch");
  long double acc = 0.0L;
  for (std::size_t i = 0; i < a.size(); ++i) acc += std::abs(a[i] - b[i]);
  return static_cast<double>(acc / static_cast<long double>(a.size()));
}

double total_variation_1d(const std::vector<double>& f) {
  double tv = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i)
    tv += std::abs(f[(i + 1) % f.size()] - f[i]);
  return tv;
}

GepMacro make_gep_macro(double rho_star, int k_max, const std::array<double, 3>& drift,
                        const std::array<int, 3>& normal, const Profile& rho0) {
  if (!(rho_star > 0.0) || !(rho_star < static_cast<double>(k_max)))
    throw std::invalid_argument("gep macro: need 0 < rho_* < K");
  GepMacro mac;
  mac.rho_star = rho_star;
  mac.lambda = static_cast<double>(k_max) - 2.0 * rho_star;
  mac.drift = drift;
  mac.normal = normal;
  double ceff = 0.0;
  for (int i = 0; i < 3; ++i)
    ceff -= drift[static_cast<std::size_t>(i)] * normal[static_cast<std::size_t>(i)];
  mac.wave = Wave(rho0, ceff);
  return mac;
}

double gep_profile(const GepMacro& mac, double n_sites, double alpha, double kappa,
                   double t, const std::array<double, 3>& u) {
  if (!(n_sites > 1.0)) throw std::invalid_argument("gep_profile: need N > 1");
  double s = std::pow(n_sites, kappa - alpha) * t;
  double shift = std::pow(n_sites, kappa) * mac.lambda * t;
  double zeta = 0.0;
  for (int i = 0; i < 3; ++i)
    zeta += mac.normal[static_cast<std::size_t>(i)] *
            (u[static_cast<std::size_t>(i)] - shift * mac.drift[static_cast<std::size_t>(i)]);
  return mac.rho_star + std::pow(n_sites, -alpha) * mac.wave.value(s, zeta);
}

}  // namespace eqpert
