#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "eqpert/chain.hpp"
#include "eqpert/gep.hpp"
#include "eqpert/potential.hpp"
#include "eqpert/rng.hpp"

namespace eqpert {

// ---- field pairings ---------------------------------------------------------

// N^{alpha-d} sum_x (eta_x - rho_star) phi(x/N - shift); the argument of phi is
// wrapped into [0,1)^d exactly, the shift being generically irrational
double gep_pairing(const GepState& state, double rho_star, double alpha,
                   const std::array<double, 3>& shift,
                   const std::function<double(const std::array<double, 3>&)>& phi);

// co-moving frame displacement N^kappa lambda t m, lambda = K - 2 rho_star
std::array<double, 3> gep_frame_shift(const GepParams& params, double rho_star,
                                      double kappa, double t);

// The two projections (r_x - r*)/2 -+ (p_x - p*)/(2 sqrt(tau')), each paired
// with phi in its own frame x/N -+ N^kappa sqrt(tau') t, scale N^{alpha-1}.
// Entry 0 is the minus family, entry 1 the plus family.
std::array<double, 2> chain_pairing(const ChainState& s, double p_star, double r_star,
                                    double tau_prime_star, double alpha, double kappa,
                                    double t, const std::function<double(double)>& phi);

// named periodic test functions: "one", "cos", "sin" (frequency 2 pi)
std::function<double(double)> test_function_1d(const std::string& name);

// ---- exact relative entropy -------------------------------------------------

// sum_i mu_i log(mu_i / nu_i) with the 0 log 0 = 0 convention; throws if mu
// charges a nu-null state
double relative_entropy_exact(const std::vector<double>& mu, const std::vector<double>& nu);

// ---- sub-Gaussian toolkit ---------------------------------------------------

// scan points theta in +-[1e-3, 10], log-spaced per side
std::vector<double> default_theta_grid(int points_per_side = 40);

// sup over the grid of 2 log E[e^{theta X}] / theta^2; input must be centered
double subgaussian_order_pmf(const std::vector<double>& values,
                             const std::vector<double>& probs,
                             const std::vector<double>& thetas);

// same for a density on [lo, hi] by adaptive quadrature
double subgaussian_order_density(const std::function<double(double)>& density, double lo,
                                 double hi, const std::vector<double>& thetas);

// Sampler mode: point estimate plus a bootstrap upper confidence bound. The
// scan uses empirically centered draws (a residual mean of order sd/sqrt(n)
// would dominate the smallest scan points); gross miscentering still throws.
struct OrderEstimate {
  double estimate = 0.0;
  double ci_upper = 0.0;
};
OrderEstimate subgaussian_order_sampler(const std::vector<double>& draws,
                                        const std::vector<double>& thetas, RngStream& rng,
                                        int resamples = 200);

// E[e^{gamma X^2}], bounded by 3 whenever gamma <= 1/(4 sigma^2)
struct SquareExponential {
  double value = 1.0;
  bool within_bound = true;  // value <= 3
};
SquareExponential check_square_exponential_pmf(const std::vector<double>& values,
                                               const std::vector<double>& probs,
                                               double gamma);
// adaptive window doubling; throws domain_error when the integral diverges
SquareExponential check_square_exponential_density(
    const std::function<double(double)>& density, double gamma);

// Observable F with |F(r)| <= c|r| under the stretch marginal pi_tau of the
// potential at inverse temperature beta. Estimates the sub-Gaussian order of
// F - E[F] by a quadrature MGF scan; when the rescaled potential is pinched as
// c_- r^2 <= 2 beta V(r) <= c_+ r^2 on every tested window, also evaluates
// E[exp(c_- F_*^2 / (16 c^2))] against sqrt(2 c_+/c_-) exp((tau_b^2/2)(2/c_- - 1/c_+)),
// tau_b = beta tau.
struct ChainObservableReport {
  double order = 0.0;                 // MGF-scan estimate for F - E[F]
  double c_minus = 0.0;               // certified lower pinch of 2 beta V / r^2
  double c_plus = 0.0;                // upper pinch on the window, if stable
  bool two_sided = false;             // c_plus stable under window doubling
  double moment_value = 0.0;          // E[exp(c_- F_*^2 / (16 c^2))]
  double moment_bound = 0.0;          // lemma right-hand side (when two_sided)
};
ChainObservableReport check_chain_observable_subgaussian(
    const Potential& pot, double beta, double tau,
    const std::function<double(double)>& F, double c);

}  // namespace eqpert
