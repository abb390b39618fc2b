#include "eqpert/gep.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace eqpert {

GepParams::GepParams(Torus t, int k, std::vector<double> rates)
    : torus(t), K(k), p(std::move(rates)) {
  if (K < 1) throw std::invalid_argument("gep: K must be >= 1");
  if (static_cast<int>(p.size()) != 2 * torus.dim)
    throw std::invalid_argument("gep: need 2*d rates");
  for (double r : p)
    if (r < 0.0 || !std::isfinite(r)) throw std::invalid_argument("gep: rates must be >= 0");
  for (int i = 0; i < torus.dim; ++i)
    if (p[i] + p[i + torus.dim] <= 0.0)
      throw std::invalid_argument("gep: ellipticity requires p_i + p_{i+d} > 0");
}

RateTree::RateTree(std::size_t n) : n_(n) {
  base_ = 1;
  while (base_ < std::max<std::size_t>(n, 1)) base_ <<= 1;
  t_.assign(2 * base_, 0.0);
}

void RateTree::assign(const std::vector<double>& rates) {
  if (rates.size() != n_) {
    n_ = rates.size();
    base_ = 1;
    while (base_ < std::max<std::size_t>(n_, 1)) base_ <<= 1;
    t_.assign(2 * base_, 0.0);
  }
  std::fill(t_.begin(), t_.end(), 0.0);
  std::copy(rates.begin(), rates.end(), t_.begin() + static_cast<std::ptrdiff_t>(base_));
  for (std::size_t i = base_ - 1; i >= 1; --i) t_[i] = t_[2 * i] + t_[2 * i + 1];
}

void RateTree::set(std::size_t i, double r) {
  std::size_t k = base_ + i;
  t_[k] = r;
  for (k >>= 1; k >= 1; k >>= 1) t_[k] = t_[2 * k] + t_[2 * k + 1];
}

std::size_t RateTree::find(double u) const {
  std::size_t k = 1;
  while (k < base_) {
    k <<= 1;
    if (u >= t_[k] && t_[k + 1] > 0.0) {
      u -= t_[k];
      ++k;
    }
  }
  std::size_t leaf = k - base_;
  return leaf < n_ ? leaf : n_ - 1;
}

std::int64_t GepState::particles() const {
  std::int64_t n = 0;
  for (auto e : eta) n += e;
  return n;
}

double GepState::bond_rate(std::int64_t x, int dir) const {
  if (params.p[dir] == 0.0) return 0.0;
  std::int64_t y = params.torus.neighbor(x, dir);
  return params.p[dir] * static_cast<double>(eta[x]) *
         static_cast<double>(params.K - eta[y]);
}

void GepState::rebuild_rates() {
  const std::int64_t n = params.torus.sites();
  const int nd = params.torus.directions();
  std::vector<double> r(static_cast<std::size_t>(n) * nd);
  for (std::int64_t x = 0; x < n; ++x)
    for (int dir = 0; dir < nd; ++dir) r[static_cast<std::size_t>(x * nd + dir)] = bond_rate(x, dir);
  rates.assign(r);
}

double GepState::rate_drift() const {
  const std::int64_t n = params.torus.sites();
  const int nd = params.torus.directions();
  double worst = 0.0;
  for (std::int64_t x = 0; x < n; ++x)
    for (int dir = 0; dir < nd; ++dir)
      worst = std::max(worst, std::abs(rates.get(static_cast<std::size_t>(x * nd + dir)) -
                                       bond_rate(x, dir)));
  return worst;
}

GepState sample_initial(const GepParams& params, const std::vector<double>& rho,
                        RngStream& rng) {
  const std::int64_t n = params.torus.sites();
  if (static_cast<std::int64_t>(rho.size()) != n)
    throw std::invalid_argument("sample_initial: profile size mismatch");
  GepState s;
  s.params = params;
  s.eta.resize(static_cast<std::size_t>(n));
  for (std::int64_t x = 0; x < n; ++x) {
    double q = rho[static_cast<std::size_t>(x)] / params.K;
    if (q < 0.0 || q > 1.0) throw std::invalid_argument("sample_initial: rho outside [0, K]");
    s.eta[static_cast<std::size_t>(x)] = static_cast<std::uint8_t>(rng.binomial(params.K, q));
  }
  s.rebuild_rates();
  return s;
}

namespace {

// One SSA loop shared by the one-species and two-class dynamics so that a
// two-class state with no second-class particles consumes randomness
// identically to the plain chain.
template <typename Apply>
void ssa_loop(RateTree& tree, double& clock, std::uint64_t& events, double t_end,
              RngStream& rng, Apply&& apply) {
  while (true) {
    double total = tree.total();
    if (total <= 0.0) {
      clock = t_end;
      return;
    }
    double dt = rng.exponential(total);
    if (clock + dt >= t_end) {
      clock = t_end;
      return;
    }
    clock += dt;
    std::size_t bond = tree.find(rng.uniform_co() * total);
    apply(bond);
    ++events;
  }
}

}  // namespace

void simulate_to(GepState& state, double t_macro, double speed, RngStream& rng,
                 std::uint64_t audit_every) {
  const int nd = state.params.torus.directions();
  const int d = state.params.torus.dim;
  const double t_end = t_macro * speed;
  if (t_end < state.clock) throw std::invalid_argument("simulate_to: time must not decrease");

  auto refresh_site = [&](std::int64_t s) {
    for (int dir = 0; dir < nd; ++dir) {
      state.rates.set(static_cast<std::size_t>(s * nd + dir), state.bond_rate(s, dir));
      std::int64_t w = state.params.torus.neighbor(s, dir);
      int opp = dir < d ? dir + d : dir - d;
      state.rates.set(static_cast<std::size_t>(w * nd + opp), state.bond_rate(w, opp));
    }
  };

  ssa_loop(state.rates, state.clock, state.events, t_end, rng, [&](std::size_t bond) {
    std::int64_t x = static_cast<std::int64_t>(bond) / nd;
    int dir = static_cast<int>(bond % nd);
    std::int64_t y = state.params.torus.neighbor(x, dir);
    state.eta[static_cast<std::size_t>(x)] -= 1;
    state.eta[static_cast<std::size_t>(y)] += 1;
    refresh_site(x);
    refresh_site(y);
    if (audit_every && state.events % audit_every == 0 && state.rate_drift() > 1e-9)
      throw std::runtime_error("simulate_to: rate tree inconsistent");
  });
}

// ---- exact law --------------------------------------------------------------

std::int64_t state_count(const GepParams& params) {
  const std::int64_t cap = std::int64_t{1} << 20;
  std::int64_t count = 1;
  for (std::int64_t x = 0; x < params.torus.sites(); ++x) {
    count *= params.K + 1;
    if (count > cap) throw std::invalid_argument("state space exceeds 2^20 states");
  }
  return count;
}

std::int64_t state_index(const GepParams& params, const std::vector<std::uint8_t>& eta) {
  std::int64_t idx = 0;
  for (std::int64_t x = params.torus.sites() - 1; x >= 0; --x)
    idx = idx * (params.K + 1) + eta[static_cast<std::size_t>(x)];
  return idx;
}

std::vector<std::uint8_t> state_unpack(const GepParams& params, std::int64_t idx) {
  std::vector<std::uint8_t> eta(static_cast<std::size_t>(params.torus.sites()));
  for (std::int64_t x = 0; x < params.torus.sites(); ++x) {
    eta[static_cast<std::size_t>(x)] = static_cast<std::uint8_t>(idx % (params.K + 1));
    idx /= params.K + 1;
  }
  return eta;
}

namespace {

// push mu through one sub-stochastic step: out = mu (I + Q/lambda)
void uniformization_step(const GepParams& params, double lambda,
                         const std::vector<double>& mu, std::vector<double>& out) {
  const std::int64_t S = static_cast<std::int64_t>(mu.size());
  const int nd = params.torus.directions();
  const std::int64_t n = params.torus.sites();
  std::fill(out.begin(), out.end(), 0.0);
  std::vector<std::uint8_t> eta;
  for (std::int64_t s = 0; s < S; ++s) {
    double m = mu[static_cast<std::size_t>(s)];
    if (m == 0.0) continue;
    eta = state_unpack(params, s);
    double exit = 0.0;
    for (std::int64_t x = 0; x < n; ++x) {
      if (eta[static_cast<std::size_t>(x)] == 0) continue;
      for (int dir = 0; dir < nd; ++dir) {
        if (params.p[dir] == 0.0) continue;
        std::int64_t y = params.torus.neighbor(x, dir);
        double r = params.p[dir] * eta[static_cast<std::size_t>(x)] *
                   (params.K - eta[static_cast<std::size_t>(y)]);
        if (r == 0.0) continue;
        exit += r;
        // target index differs by a move x -> y in the mixed radix
        std::int64_t pow_x = 1, pow_y = 1;
        for (std::int64_t b = 0; b < x; ++b) pow_x *= params.K + 1;
        for (std::int64_t b = 0; b < y; ++b) pow_y *= params.K + 1;
        std::int64_t to = s - pow_x + pow_y;
        out[static_cast<std::size_t>(to)] += m * (r / lambda);
      }
    }
    out[static_cast<std::size_t>(s)] += m * (1.0 - exit / lambda);
  }
}

double max_exit_rate(const GepParams& params) {
  const std::int64_t S = state_count(params);
  const int nd = params.torus.directions();
  const std::int64_t n = params.torus.sites();
  double lam = 0.0;
  for (std::int64_t s = 0; s < S; ++s) {
    auto eta = state_unpack(params, s);
    double exit = 0.0;
    for (std::int64_t x = 0; x < n; ++x)
      for (int dir = 0; dir < nd; ++dir) {
        std::int64_t y = params.torus.neighbor(x, dir);
        exit += params.p[dir] * eta[static_cast<std::size_t>(x)] *
                (params.K - eta[static_cast<std::size_t>(y)]);
      }
    lam = std::max(lam, exit);
  }
  return lam;
}

}  // namespace

std::vector<double> master_equation(const GepParams& params, std::vector<double> mu0,
                                    double t_macro, double speed, double tol) {
  const std::int64_t S = state_count(params);
  if (static_cast<std::int64_t>(mu0.size()) != S)
    throw std::invalid_argument("master_equation: mu0 size mismatch");
  double lambda = max_exit_rate(params);
  if (lambda == 0.0) return mu0;
  const double T = lambda * t_macro * speed;
  if (T > 700.0) throw std::invalid_argument("master_equation: horizon too stiff");

  std::vector<double> acc(mu0.size(), 0.0), next(mu0.size(), 0.0);
  double weight = std::exp(-T);  // Poisson(T) pmf at k = 0
  double cum = weight;
  for (std::size_t i = 0; i < mu0.size(); ++i) acc[i] = weight * mu0[i];
  int k = 0;
  while (cum < 1.0 - tol) {
    uniformization_step(params, lambda, mu0, next);
    std::swap(mu0, next);
    ++k;
    weight *= T / k;
    cum += weight;
    for (std::size_t i = 0; i < mu0.size(); ++i) acc[i] += weight * mu0[i];
    if (k > 200000) throw std::runtime_error("master_equation: truncation failed");
  }
  return acc;
}

std::vector<double> product_binomial_pmf(const GepParams& params,
                                         const std::vector<double>& rho) {
  const std::int64_t S = state_count(params);
  const std::int64_t n = params.torus.sites();
  if (static_cast<std::int64_t>(rho.size()) != n)
    throw std::invalid_argument("product_binomial_pmf: rho size mismatch");
  // site pmf tables
  std::vector<double> site((std::size_t)n * (params.K + 1));
  std::vector<double> comb(static_cast<std::size_t>(params.K + 1), 1.0);
  for (int k = 1; k <= params.K; ++k)
    comb[static_cast<std::size_t>(k)] =
        comb[static_cast<std::size_t>(k - 1)] * (params.K - k + 1) / k;
  for (std::int64_t x = 0; x < n; ++x) {
    double q = rho[static_cast<std::size_t>(x)] / params.K;
    for (int k = 0; k <= params.K; ++k)
      site[static_cast<std::size_t>(x * (params.K + 1) + k)] =
          comb[static_cast<std::size_t>(k)] * std::pow(q, k) * std::pow(1.0 - q, params.K - k);
  }
  std::vector<double> pmf(static_cast<std::size_t>(S));
  for (std::int64_t s = 0; s < S; ++s) {
    auto eta = state_unpack(params, s);
    double w = 1.0;
    for (std::int64_t x = 0; x < n; ++x)
      w *= site[static_cast<std::size_t>(x * (params.K + 1) + eta[static_cast<std::size_t>(x)])];
    pmf[static_cast<std::size_t>(s)] = w;
  }
  return pmf;
}

double generator_residual(const GepParams& params, const std::vector<double>& nu) {
  const std::int64_t S = state_count(params);
  const int nd = params.torus.directions();
  const std::int64_t n = params.torus.sites();
  std::vector<double> acc(static_cast<std::size_t>(S), 0.0);
  for (std::int64_t s = 0; s < S; ++s) {
    double m = nu[static_cast<std::size_t>(s)];
    if (m == 0.0) continue;
    auto eta = state_unpack(params, s);
    double exit = 0.0;
    for (std::int64_t x = 0; x < n; ++x) {
      if (eta[static_cast<std::size_t>(x)] == 0) continue;
      for (int dir = 0; dir < nd; ++dir) {
        if (params.p[dir] == 0.0) continue;
        std::int64_t y = params.torus.neighbor(x, dir);
        double r = params.p[dir] * eta[static_cast<std::size_t>(x)] *
                   (params.K - eta[static_cast<std::size_t>(y)]);
        if (r == 0.0) continue;
        exit += r;
        std::int64_t pow_x = 1, pow_y = 1;
        for (std::int64_t b = 0; b < x; ++b) pow_x *= params.K + 1;
        for (std::int64_t b = 0; b < y; ++b) pow_y *= params.K + 1;
        acc[static_cast<std::size_t>(s - pow_x + pow_y)] += m * r;
      }
    }
    acc[static_cast<std::size_t>(s)] -= m * exit;
  }
  double worst = 0.0;
  for (double v : acc) worst = std::max(worst, std::abs(v));
  return worst;
}

double total_variation(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw std::invalid_argument("total_variation: size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  return 0.5 * s;
}

std::vector<double> omega_field(const GepState& state, const std::vector<double>& rho) {
  const std::int64_t n = state.params.torus.sites();
  if (static_cast<std::int64_t>(rho.size()) != n)
    throw std::invalid_argument("omega_field: rho size mismatch");
  std::vector<double> w(static_cast<std::size_t>(n));
  for (std::int64_t x = 0; x < n; ++x) {
    double r = rho[static_cast<std::size_t>(x)];
    if (r <= 0.0 || r >= state.params.K)
      throw std::invalid_argument("omega_field: rho must lie in (0, K)");
    w[static_cast<std::size_t>(x)] =
        (state.eta[static_cast<std::size_t>(x)] - r) / (r * (state.params.K - r));
  }
  return w;
}

// ---- two-class --------------------------------------------------------------

double TwoClassState::bond_rate(std::int64_t x, int dir) const {
  if (params.p[dir] == 0.0) return 0.0;
  std::int64_t y = params.torus.neighbor(x, dir);
  auto sx = static_cast<std::size_t>(x), sy = static_cast<std::size_t>(y);
  double movable = 0.0;
  if (eta1[sx] && !eta1[sy]) movable = 1.0;  // move or swap, both count
  else if (!eta1[sx] && eta2[sx] && !eta1[sy] && !eta2[sy]) movable = 1.0;
  return params.p[dir] * movable;
}

void TwoClassState::rebuild_rates() {
  const std::int64_t n = params.torus.sites();
  const int nd = params.torus.directions();
  std::vector<double> r(static_cast<std::size_t>(n) * nd);
  for (std::int64_t x = 0; x < n; ++x)
    for (int dir = 0; dir < nd; ++dir) r[static_cast<std::size_t>(x * nd + dir)] = bond_rate(x, dir);
  rates.assign(r);
}

TwoClassState make_two_class(const GepParams& params, std::vector<std::uint8_t> eta1,
                             std::vector<std::uint8_t> eta2) {
  if (params.K != 1) throw std::invalid_argument("two_class: requires K = 1");
  const auto n = static_cast<std::size_t>(params.torus.sites());
  if (eta1.size() != n || eta2.size() != n)
    throw std::invalid_argument("two_class: configuration size mismatch");
  for (std::size_t i = 0; i < n; ++i)
    if (eta1[i] > 1 || eta2[i] > 1 || eta1[i] + eta2[i] > 1)
      throw std::invalid_argument("two_class: occupations must be disjoint 0/1");
  TwoClassState s;
  s.params = params;
  s.eta1 = std::move(eta1);
  s.eta2 = std::move(eta2);
  s.rebuild_rates();
  return s;
}

void simulate_two_class(TwoClassState& state, double t_macro, double speed, RngStream& rng) {
  const int nd = state.params.torus.directions();
  const int d = state.params.torus.dim;
  const double t_end = t_macro * speed;
  if (t_end < state.clock) throw std::invalid_argument("simulate_two_class: time must not decrease");

  auto refresh_site = [&](std::int64_t s) {
    for (int dir = 0; dir < nd; ++dir) {
      state.rates.set(static_cast<std::size_t>(s * nd + dir), state.bond_rate(s, dir));
      std::int64_t w = state.params.torus.neighbor(s, dir);
      int opp = dir < d ? dir + d : dir - d;
      state.rates.set(static_cast<std::size_t>(w * nd + opp), state.bond_rate(w, opp));
    }
  };

  ssa_loop(state.rates, state.clock, state.events, t_end, rng, [&](std::size_t bond) {
    std::int64_t x = static_cast<std::int64_t>(bond) / nd;
    int dir = static_cast<int>(bond % nd);
    std::int64_t y = state.params.torus.neighbor(x, dir);
    auto sx = static_cast<std::size_t>(x), sy = static_cast<std::size_t>(y);
    if (state.eta1[sx]) {
      // first class moves; a second class at the target is swapped back
      state.eta1[sx] = 0;
      state.eta1[sy] = 1;
      if (state.eta2[sy]) {
        state.eta2[sy] = 0;
        state.eta2[sx] = 1;
      }
    } else {
      state.eta2[sx] = 0;
      state.eta2[sy] = 1;
    }
    refresh_site(x);
    refresh_site(y);
  });
}

}  // namespace eqpert
