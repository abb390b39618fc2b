#pragma once

#include <vector>

#include "eqpert/potential.hpp"
#include "eqpert/profiles.hpp"
#include "eqpert/rng.hpp"
#include "eqpert/thermo.hpp"

namespace eqpert {

// Momenta p_x and stretches r_x on the periodic ring, microscopic clock.
struct ChainState {
  std::vector<double> p;
  std::vector<double> r;
  double clock = 0.0;
};

double hamiltonian(const ChainState& s, const Potential& pot);
double sum_p(const ChainState& s);
double sum_r(const ChainState& s);

struct IntegrateOptions {
  double dt_micro = 0.0;  // <= 0 selects min(0.1, 0.1 / (beta gamma))
  double guard = 1e6;     // abort threshold on max |p|, |r|
};

// Strang scheme for dp_x = (V'(r_{x+1}) - V'(r_x)) dt,
// dr_x = (p_x - p_{x-1}) dt + (beta gamma / 2)(V'(r_{x+1}) + V'(r_{x-1})
//        - 2 V'(r_x)) dt + sqrt(gamma) (dB^{x-1} - dB^x):
// half-step stretch noise map, full velocity-Verlet step, half-step noise.
// Both sums telescope, so sum p and sum r are conserved up to roundoff.
void integrate(ChainState& s, const Potential& pot, double beta, double gamma,
               double t_micro, RngStream& rng, const IntegrateOptions& opt = {});

double micro_step_policy(double beta, double gamma);
// geometric midpoint of the admissible coupling window, N^{2(kappa + alpha)}
double gamma_window_midpoint(double n_sites, double alpha, double kappa);

// product Gibbs state at constant momentum mean and tension
ChainState sample_gibbs(const Thermodynamics& th, const GibbsTable& tab, double pbar,
                        int sites, RngStream& rng);

// Slowly varying local-Gibbs parameters for initial data
//   (p, r)(x/N) = (p*, r*) + N^{-alpha} [ sigma_-(u) u_- + sigma_+(u) u_+ ],
// with u_-+ = (-+sqrt(tau'(r*)), 1)'. Both perturbations must be zero-mean.
struct PerturbedProfile {
  int sites = 0;
  double p_star = 0.0;
  double r_star = 0.0;
  double alpha = 0.0;
  double scale = 0.0;           // N^{-alpha}
  double tau_prime_star = 0.0;  // dtau/dr at r*
  std::vector<double> pbar;
  std::vector<double> rbar;
  std::vector<double> tau;
  std::vector<double> mode;
};

PerturbedProfile build_perturbed_profile(const Thermodynamics& th, double p_star,
                                         double r_star, double alpha,
                                         const Profile& sigma_minus,
                                         const Profile& sigma_plus, int sites);

ChainState sample_perturbed(const Thermodynamics& th, const PerturbedProfile& prof,
                            RngStream& rng);

}  // namespace eqpert
