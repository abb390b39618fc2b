#pragma once

#include <array>
#include <functional>
#include <vector>

#include "eqpert/burgers.hpp"
#include "eqpert/profiles.hpp"

namespace eqpert {

// Linearization of the momentum/stretch flux (p, r) -> (-tau(r), -p) about a
// uniform state with tau' > 0: A = [[0, -tau'], [-1, 0]], right eigenvectors
// u_1 = (-sqrt(tau'), 1)' with speed +sqrt(tau') (the minus family) and
// u_2 = (+sqrt(tau'), 1)' with speed -sqrt(tau') (the plus family).
struct TwoSystem {
  double tau_prime = 1.0;
  double tau_second = 0.0;
  std::array<std::array<double, 2>, 2> a{};      // flux Jacobian
  std::array<double, 2> lambda{};                // {+sqrt(tau'), -sqrt(tau')}
  std::array<std::array<double, 2>, 2> right{};  // right[j] = u_{j+1}
  std::array<std::array<double, 2>, 2> left{};   // biorthogonal rows
  std::array<double, 2> hvec{};                  // H(u_j, u_k) = (-tau'', 0)'
  std::array<double, 2> burgers{};               // wave flux coefficients
                                                 // {+tau''/(4 sqrt), -tau''/(4 sqrt)}
  std::array<double, 2> cross{};                 // pair-correction constants c_1, c_2
};

TwoSystem linearize_psystem(double tau_prime, double tau_second);

double dot2(const std::array<double, 2>& x, const std::array<double, 2>& y);

// a scalar wave at frozen time: value, u-derivative, primitive from 0
struct ScalarField {
  std::function<double(double)> value;
  std::function<double(double)> du;
  std::function<double(double)> prim;
};

ScalarField field_from_profile(const Profile& f);
ScalarField field_from_wave(const Wave& w, double s);

// explicit pair corrections of the non-resonant n = 2 expansion; k, j, jp are
// 1-based with j != jp, (u, up) the two argument slots
double pair_correction(const TwoSystem& sys, const ScalarField& s1, const ScalarField& s2,
                       int k, int j, int jp, double u, double up);

// full correction of family k at (u1, u2): self term plus both pair terms
double correction_total(const TwoSystem& sys, const ScalarField& s1, const ScalarField& s2,
                        int k, double u1, double u2);

// max over a grid x grid sample of the pair transport identity residual,
// directional derivatives by fourth-order finite differences
double correction_identity_residual(const TwoSystem& sys, const ScalarField& s1,
                                    const ScalarField& s2, int grid = 16);

// Macroscopic description of the perturbed chain: linearized system plus the
// two Burgers waves riding on it.
struct ChainMacro {
  TwoSystem sys;
  Wave minus;  // coefficient +tau''/(4 sqrt(tau'))
  Wave plus;   // coefficient -tau''/(4 sqrt(tau'))
  double p_star = 0.0;
  double r_star = 0.0;
};

// requires zero-mean initial perturbations (primitives must close on the torus)
ChainMacro make_chain_macro(double p_star, double r_star, double tau_prime,
                            double tau_second, const Profile& sigma_minus,
                            const Profile& sigma_plus);

// closed-form second-order correction of one family and its derivatives,
// evaluated from the exact characteristic solutions at rescaled time s
struct CorrectionPoint {
  double value = 0.0;
  double du1 = 0.0;
  double du2 = 0.0;
  double ds = 0.0;
};
CorrectionPoint chain_correction_point(const ChainMacro& mac, int family, double s,
                                       double u1, double u2);

// the order-one bracket of the lattice defect; cancels identically when the
// two waves solve their Burgers equations
std::array<double, 2> chain_bracket(const ChainMacro& mac, double s, double u1, double u2);

// modified local-equilibrium profile (p~, r~)(t, u) at scale N, and its exact
// time derivative assembled by the chain rule through (s, u_-, u_+)
std::array<double, 2> chain_profile(const ChainMacro& mac, double n_sites, double alpha,
                                    double kappa, double t, double u);
std::array<double, 2> chain_profile_dt(const ChainMacro& mac, double n_sites, double alpha,
                                       double kappa, double t, double u);

// lattice defect per site: N^{1+kappa} (tau(r~_{x+1}) - tau(r~_x),
// p~_x - p~_{x-1})' minus d/dt (p~_x, r~_x)'
std::vector<std::array<double, 2>> epsilon_lattice(
    const ChainMacro& mac, const std::function<double(double)>& tension, int n_sites,
    double alpha, double kappa, double t);

}  // namespace eqpert
