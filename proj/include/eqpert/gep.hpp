#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "eqpert/rng.hpp"
#include "eqpert/torus.hpp"

namespace eqpert {

// Generalized exclusion with occupations in {0..K}. Directed bond (x, dir)
// carries rate p[dir] * eta_x * (K - eta_y), y the neighbor along dir.
// dir in [0,d) is +e_dir, dir in [d,2d) is -e_{dir-d}.
struct GepParams {
  Torus torus;
  int K = 1;
  std::vector<double> p;

  GepParams() = default;
  GepParams(Torus t, int k, std::vector<double> rates);

  double drift(int axis) const { return p[axis] - p[axis + torus.dim]; }
  std::array<double, 3> drift_vector() const {
    std::array<double, 3> m{0, 0, 0};
    for (int i = 0; i < torus.dim; ++i) m[i] = drift(i);
    return m;
  }
};

// binary rate tree for O(log n) total/update/inverse-cdf selection
class RateTree {
 public:
  RateTree() = default;
  explicit RateTree(std::size_t n);
  void assign(const std::vector<double>& rates);
  void set(std::size_t i, double r);
  double get(std::size_t i) const { return t_[base_ + i]; }
  double total() const { return t_.empty() ? 0.0 : t_[1]; }
  std::size_t find(double u) const;  // least leaf with cumulative sum > u
  std::size_t size() const { return n_; }

 private:
  std::size_t n_ = 0, base_ = 1;
  std::vector<double> t_;
};

struct GepState {
  GepParams params;
  std::vector<std::uint8_t> eta;
  double clock = 0.0;       // microscopic time
  std::uint64_t events = 0;
  RateTree rates;

  std::int64_t particles() const;
  double bond_rate(std::int64_t x, int dir) const;
  void rebuild_rates();
  // max |tree leaf - recomputed bond rate|, the consistency audit
  double rate_drift() const;
};

// occupations drawn site-wise from Binomial(K, rho(x)/K); rho in (0, K)
GepState sample_initial(const GepParams& params, const std::vector<double>& rho,
                        RngStream& rng);

// exact event chain up to microscopic time speed * t_macro
void simulate_to(GepState& state, double t_macro, double speed, RngStream& rng,
                 std::uint64_t audit_every = 0);

// ---- exact law at small size: mixed-radix state enumeration ----------------

std::int64_t state_count(const GepParams& params);           // (K+1)^sites, capped
std::int64_t state_index(const GepParams& params, const std::vector<std::uint8_t>& eta);
std::vector<std::uint8_t> state_unpack(const GepParams& params, std::int64_t idx);

// mu0 evolved to macroscopic t by uniformization of the sped-up generator;
// truncation tail below tol
std::vector<double> master_equation(const GepParams& params, std::vector<double> mu0,
                                    double t_macro, double speed, double tol = 1e-12);

// product-binomial law with per-site density rho_x (in particles, 0..K)
std::vector<double> product_binomial_pmf(const GepParams& params,
                                         const std::vector<double>& rho);

// max_eta' | sum_eta nu(eta) Q(eta, eta') | for the (unsped) generator
double generator_residual(const GepParams& params, const std::vector<double>& nu);

double total_variation(const std::vector<double>& a, const std::vector<double>& b);

// ---- perturbation fields ----------------------------------------------------

// omega_x = (eta_x - rho_x) / (rho_x (K - rho_x))
std::vector<double> omega_field(const GepState& state, const std::vector<double>& rho);

// ---- two-class dynamics (K = 1) ---------------------------------------------

// First-class particles have priority: a first at x displaces (swaps with) a
// second at the target; seconds only jump into empty sites. The first-class
// marginal is exactly the one-species exclusion.
struct TwoClassState {
  GepParams params;  // K must be 1
  std::vector<std::uint8_t> eta1, eta2;
  double clock = 0.0;
  std::uint64_t events = 0;
  RateTree rates;

  double bond_rate(std::int64_t x, int dir) const;
  void rebuild_rates();
};

TwoClassState make_two_class(const GepParams& params, std::vector<std::uint8_t> eta1,
                             std::vector<std::uint8_t> eta2);

void simulate_two_class(TwoClassState& state, double t_macro, double speed, RngStream& rng);

}  // namespace eqpert
