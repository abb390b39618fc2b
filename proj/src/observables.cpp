#include "eqpert/observables.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <stdexcept>

#include "eqpert/torus.hpp"

namespace eqpert {

namespace {

double gk(const std::function<double(double)>& f, double a, double b) {
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 12, 1e-12);
}

void require_centered(double mean, double scale) {
  if (std::abs(mean) > 1e-9 * (1.0 + scale))
    throw std::invalid_argument("subgaussian order: input is not centered");
}

double order_from_mgf(const std::vector<double>& thetas,
                      const std::function<double(double)>& mgf) {
  double order = 0.0;
  for (double th : thetas) {
    double m = mgf(th);
    if (!(m > 0.0) || !std::isfinite(m))
      throw std::domain_error("subgaussian order: moment generating function failed");
    order = std::max(order, 2.0 * std::log(m) / (th * th));
  }
  return order;
}

}  // namespace

double gep_pairing(const GepState& state, double rho_star, double alpha,
                   const std::array<double, 3>& shift,
                   const std::function<double(const std::array<double, 3>&)>& phi) {
  const Torus& tor = state.params.torus;
  double n = static_cast<double>(tor.side);
  long double acc = 0.0L;
  for (std::int64_t x = 0; x < tor.sites(); ++x) {
    auto c = tor.coords(x);
    std::array<double, 3> u{0.0, 0.0, 0.0};
    for (int i = 0; i < tor.dim; ++i)
      u[static_cast<std::size_t>(i)] =
          wrap_unit(c[static_cast<std::size_t>(i)] / n - shift[static_cast<std::size_t>(i)]);
    acc += (static_cast<double>(state.eta[static_cast<std::size_t>(x)]) - rho_star) * phi(u);
  }
  return static_cast<double>(acc) * std::pow(n, alpha - tor.dim);
}

std::array<double, 3> gep_frame_shift(const GepParams& params, double rho_star,
                                      double kappa, double t) {
  double lambda = static_cast<double>(params.K) - 2.0 * rho_star;
  double speed = std::pow(static_cast<double>(params.torus.side), kappa) * lambda * t;
  auto m = params.drift_vector();
  return {speed * m[0], speed * m[1], speed * m[2]};
}

std::array<double, 2> chain_pairing(const ChainState& s, double p_star, double r_star,
                                    double tau_prime_star, double alpha, double kappa,
                                    double t, const std::function<double(double)>& phi) {
  if (s.p.size() != s.r.size() || s.p.empty())
    throw std::invalid_argument("chain_pairing: malformed state");
  if (!(tau_prime_star > 0.0))
    throw std::invalid_argument("chain_pairing: need tau' > 0");
  double n = static_cast<double>(s.p.size());
  double root = std::sqrt(tau_prime_star);
  double delta = std::pow(n, kappa) * root * t;
  long double minus = 0.0L, plus = 0.0L;
  for (std::size_t x = 0; x < s.p.size(); ++x) {
    double dr = 0.5 * (s.r[x] - r_star);
    double dp = (s.p[x] - p_star) / (2.0 * root);
    double u = static_cast<double>(x) / n;
    minus += (dr - dp) * phi(wrap_unit(u - delta));
    plus += (dr + dp) * phi(wrap_unit(u + delta));
  }
  double scale = std::pow(n, alpha - 1.0);
  return {static_cast<double>(minus) * scale, static_cast<double>(plus) * scale};
}

std::function<double(double)> test_function_1d(const std::string& name) {
  if (name == "one") return [](double) { return 1.0; };
  if (name == "cos") return [](double u) { return std::cos(2.0 * M_PI * u); };
  if (name == "sin") return [](double u) { return std::sin(2.0 * M_PI * u); };
  throw std::invalid_argument("test_function_1d: unknown name " + name);
}

double relative_entropy_exact(const std::vector<double>& mu, const std::vector<double>& nu) {
  if (mu.size() != nu.size() || mu.empty())
    throw std::invalid_argument("relative_entropy_exact: size mismatch");
  long double acc = 0.0L;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    double m = mu[i];
    if (m <= 0.0) {
      if (m < -1e-12) throw std::invalid_argument("relative_entropy_exact: negative mass");
      continue;  // 0 log 0 = 0
    }
    if (!(nu[i] > 0.0))
      throw std::domain_error("relative_entropy_exact: mu charges a nu-null state");
    acc += static_cast<long double>(m) * std::log(m / nu[i]);
  }
  return static_cast<double>(acc);
}

std::vector<double> default_theta_grid(int points_per_side) {
  if (points_per_side < 2) throw std::invalid_argument("theta grid: too few points");
  std::vector<double> g;
  g.reserve(2 * static_cast<std::size_t>(points_per_side));
  for (int i = 0; i < points_per_side; ++i) {
    double e = -3.0 + 4.0 * i / (points_per_side - 1);  // 1e-3 .. 1e1
    double th = std::pow(10.0, e);
    g.push_back(th);
    g.push_back(-th);
  }
  return g;
}

double subgaussian_order_pmf(const std::vector<double>& values,
                             const std::vector<double>& probs,
                             const std::vector<double>& thetas) {
  if (values.size() != probs.size() || values.empty())
    throw std::invalid_argument("subgaussian order: size mismatch");
  long double tot = 0.0L, mean = 0.0L, var = 0.0L;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (probs[i] < 0.0) throw std::invalid_argument("subgaussian order: negative weight");
    tot += probs[i];
    mean += probs[i] * values[i];
  }
  if (std::abs(static_cast<double>(tot) - 1.0) > 1e-9)
    throw std::invalid_argument("subgaussian order: pmf does not sum to one");
  for (std::size_t i = 0; i < probs.size(); ++i)
    var += probs[i] * (values[i] - mean) * (values[i] - mean);
  require_centered(static_cast<double>(mean), std::sqrt(static_cast<double>(var)));
  return order_from_mgf(thetas, [&](double th) {
    long double m = 0.0L;
    for (std::size_t i = 0; i < probs.size(); ++i) m += probs[i] * std::exp(th * values[i]);
    return static_cast<double>(m);
  });
}

double subgaussian_order_density(const std::function<double(double)>& density, double lo,
                                 double hi, const std::vector<double>& thetas) {
  if (!(lo < hi)) throw std::invalid_argument("subgaussian order: empty support");
  double norm = gk(density, lo, hi);
  if (!(norm > 0.0)) throw std::invalid_argument("subgaussian order: density vanishes");
  double mean = gk([&](double x) { return x * density(x); }, lo, hi) / norm;
  double var = gk([&](double x) { return (x - mean) * (x - mean) * density(x); }, lo, hi) / norm;
  require_centered(mean, std::sqrt(var));
  return order_from_mgf(thetas, [&](double th) {
    return gk([&](double x) { return std::exp(th * x) * density(x); }, lo, hi) / norm;
  });
}

OrderEstimate subgaussian_order_sampler(const std::vector<double>& draws,
                                        const std::vector<double>& thetas, RngStream& rng,
                                        int resamples) {
  const std::size_t n = draws.size();
  if (n < 1000) throw std::invalid_argument("subgaussian order: too few draws");
  long double mean = 0.0L, var = 0.0L;
  for (double d : draws) mean += d;
  mean /= static_cast<long double>(n);
  for (double d : draws) var += (d - mean) * (d - mean);
  var /= static_cast<long double>(n);
  double sd = std::sqrt(static_cast<double>(var));
  if (std::abs(static_cast<double>(mean)) >
      std::max(1e-9, 8.0 * sd / std::sqrt(static_cast<double>(n))))
    throw std::invalid_argument("subgaussian order: input is not centered");

  const std::size_t batches = 50;
  const std::size_t t_count = thetas.size();
  // the scan runs on empirically centered draws: at the smallest thetas even a
  // sampling-noise mean of order sd/sqrt(n) would dominate 2 log MGF / theta^2
  const double shift = static_cast<double>(mean);
  // batch-mean MGF matrix, row-major over (batch, theta)
  std::vector<long double> cell(batches * t_count, 0.0L);
  std::vector<long double> bmean(batches, 0.0L);
  std::vector<std::size_t> batch_size(batches, 0);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t b = i * batches / n;
    batch_size[b] += 1;
    bmean[b] += draws[i] - shift;
    for (std::size_t j = 0; j < t_count; ++j)
      cell[b * t_count + j] += std::exp(thetas[j] * (draws[i] - shift));
  }
  for (std::size_t b = 0; b < batches; ++b) {
    bmean[b] /= static_cast<long double>(batch_size[b]);
    for (std::size_t j = 0; j < t_count; ++j)
      cell[b * t_count + j] /= static_cast<long double>(batch_size[b]);
  }

  // every resample is re-centered at its own mean before the scan: the factor
  // exp(-theta m) applied to the averaged MGF is exact by e^{t(X-m)} = e^{tX} e^{-tm},
  // and without it a resample's mean offset of order sd/sqrt(n) blows up the
  // 2 log MGF / theta^2 ratio at the smallest thetas
  auto order_of = [&](const std::vector<std::size_t>& picks) {
    long double off = 0.0L;
    for (std::size_t b : picks) off += bmean[b];
    off /= static_cast<long double>(picks.size());
    double order = 0.0;
    for (std::size_t j = 0; j < t_count; ++j) {
      long double m = 0.0L;
      for (std::size_t b : picks) m += cell[b * t_count + j];
      m /= static_cast<long double>(picks.size());
      m *= std::exp(-thetas[j] * static_cast<double>(off));
      order = std::max(order, 2.0 * std::log(static_cast<double>(m)) /
                                  (thetas[j] * thetas[j]));
    }
    return order;
  };

  std::vector<std::size_t> all(batches);
  for (std::size_t b = 0; b < batches; ++b) all[b] = b;
  OrderEstimate out;
  out.estimate = order_of(all);

  std::vector<double> boot(static_cast<std::size_t>(resamples));
  std::vector<std::size_t> picks(batches);
  for (int r = 0; r < resamples; ++r) {
    for (std::size_t b = 0; b < batches; ++b)
      picks[b] = static_cast<std::size_t>(rng.uniform_co() * batches);
    boot[static_cast<std::size_t>(r)] = order_of(picks);
  }
  std::sort(boot.begin(), boot.end());
  std::size_t idx = static_cast<std::size_t>(0.975 * (boot.size() - 1));
  out.ci_upper = boot[idx];
  return out;
}

SquareExponential check_square_exponential_pmf(const std::vector<double>& values,
                                               const std::vector<double>& probs,
                                               double gamma) {
  if (values.size() != probs.size() || values.empty())
    throw std::invalid_argument("square exponential: size mismatch");
  long double acc = 0.0L;
  for (std::size_t i = 0; i < probs.size(); ++i)
    acc += probs[i] * std::exp(gamma * values[i] * values[i]);
  SquareExponential out;
  out.value = static_cast<double>(acc);
  out.within_bound = out.value <= 3.0;
  return out;
}

SquareExponential check_square_exponential_density(
    const std::function<double(double)>& density, double gamma) {
  // combine the factors in log space: exp(gamma x^2) alone can overflow where
  // the density has already underflowed to zero, and inf * 0 is a NaN
  auto piece = [&](double a, double b) {
    return gk(
        [&](double x) {
          double d = density(x);
          return d > 0.0 ? std::exp(gamma * x * x + std::log(d)) : 0.0;
        },
        a, b);
  };
  double w = 1.0;
  double total = piece(-w, w);
  double prev_inc = -1.0;
  int growing = 0;
  for (int iter = 0; iter < 40; ++iter) {
    double inc = piece(-2.0 * w, -w) + piece(w, 2.0 * w);
    total += inc;
    if (!std::isfinite(total)) throw std::domain_error("square exponential: divergent");
    if (inc <= 1e-12 * std::max(1.0, total)) {
      SquareExponential out;
      out.value = total;
      out.within_bound = total <= 3.0;
      return out;
    }
    if (prev_inc >= 0.0 && inc > prev_inc) {
      if (++growing >= 3) throw std::domain_error("square exponential: divergent");
    } else {
      growing = 0;
    }
    prev_inc = inc;
    w *= 2.0;
  }
  throw std::domain_error("square exponential: no convergence");
}

ChainObservableReport check_chain_observable_subgaussian(
    const Potential& pot, double beta, double tau,
    const std::function<double(double)>& F, double c) {
  if (!(beta > 0.0) || !(c > 0.0))
    throw std::invalid_argument("chain observable: need beta > 0 and c > 0");
  auto ratio = [&](double r) { return 2.0 * beta * pot.V(r) / (r * r); };

  // pinch constants of 2 beta V against r^2, probed on a doubled window
  auto scan = [&](double lim) {
    double lo = 1e300, hi = -1e300;
    const int grid = 8192;
    for (int i = 0; i <= grid; ++i) {
      double r = -lim + 2.0 * lim * i / grid;
      if (std::abs(r) < 1e-8) continue;
      double q = ratio(r);
      lo = std::min(lo, q);
      hi = std::max(hi, q);
    }
    return std::pair<double, double>{lo, hi};
  };
  auto [lo1, hi1] = scan(8.0);
  auto [lo2, hi2] = scan(16.0);
  ChainObservableReport rep;
  rep.c_minus = std::min(lo1, lo2);
  rep.c_plus = std::max(hi1, hi2);
  rep.two_sided = hi2 <= hi1 * (1.0 + 1e-6);
  if (!(rep.c_minus > 0.0))
    throw std::domain_error("chain observable: potential is not quadratically pinched below");

  // window wide enough for every theta in the scan and the square moment
  double tau_b = beta * tau;
  double drive = std::abs(tau_b) + 10.0 * c;
  double w = (drive + std::sqrt(drive * drive + 2.0 * rep.c_minus * 120.0)) / rep.c_minus;

  auto logw = [&](double r) { return -beta * (pot.V(r) - tau * r); };
  double peak = -1e300;
  for (int i = 0; i <= 4096; ++i) peak = std::max(peak, logw(-w + 2.0 * w * i / 4096));
  auto weigh = [&](const std::function<double(double)>& g) {
    return gk([&](double r) { return std::exp(logw(r) - peak) * g(r); }, -w, w);
  };
  for (int i = 0; i <= 512; ++i) {
    double r = -w + 2.0 * w * i / 512;
    if (std::abs(F(r)) > c * std::abs(r) * (1.0 + 1e-12) + 1e-300)
      throw std::invalid_argument("chain observable: |F(r)| <= c|r| violated");
  }

  double norm = weigh([](double) { return 1.0; });
  double fbar = weigh(F) / norm;
  rep.order = order_from_mgf(default_theta_grid(), [&](double th) {
    return weigh([&](double r) { return std::exp(th * (F(r) - fbar)); }) / norm;
  });

  double gamma = rep.c_minus / (16.0 * c * c);
  rep.moment_value =
      weigh([&](double r) { return std::exp(gamma * (F(r) - fbar) * (F(r) - fbar)); }) / norm;
  if (rep.two_sided)
    rep.moment_bound = std::sqrt(2.0 * rep.c_plus / rep.c_minus) *
                       std::exp(0.5 * tau_b * tau_b * (2.0 / rep.c_minus - 1.0 / rep.c_plus));
  return rep;
}

}  // namespace eqpert
