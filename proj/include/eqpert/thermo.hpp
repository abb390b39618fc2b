#pragma once

#include <functional>
#include <vector>

#include "eqpert/potential.hpp"
#include "eqpert/rng.hpp"

namespace eqpert {

// tau, dtau/dr, d2tau/dr2 at a fixed stretch value
struct TensionDerivs {
  double tau = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;
};

// Inverse-cdf table for one single-bond marginal exp(-beta(V - tau r))/Z.
// Nodes are uniform in r; cdf is strictly increasing with cdf[0] = 0 and
// cdf[last] = 1; slope[i] = dr/dC at node i, clamped for monotone cubic
// interpolation in the cdf variable.
struct GibbsTable {
  double tau = 0.0;
  double lo = 0.0;
  double step = 0.0;
  double peak = 0.0;  // V(m) - tau m at the mode m
  double norm = 0.0;  // integral of exp(-beta(V - tau r - peak))
  std::vector<double> cdf;
  std::vector<double> slope;
  std::vector<double> density;  // normalized density at nodes
};

// Single-bond thermodynamics of a uniformly convex potential: partition
// function, free energy, tension (inverse of the mean-stretch map) and its
// first two derivatives, plus exact-density samplers. All integrals run on
// [m - W, m + W] around the mode m with W chosen so the dropped Gaussian
// tail mass is below exp(-80) relative to the peak.
class Thermodynamics {
 public:
  // range: curvature bounds are certified on [-range - W, range + W]
  Thermodynamics(const Potential& pot, double beta, double range = 8.0);

  double beta() const { return beta_; }
  const Potential& potential() const { return pot_; }
  double curvature_lo() const { return c_lo_; }
  double curvature_hi() const { return c_hi_; }
  double halfwidth() const { return half_; }

  double mode(double tau) const;           // solves V'(m) = tau
  double partition(double tau) const;      // Z(tau)
  double free_energy(double tau) const;    // G(tau) = log Z(tau) / beta
  double rbar(double tau) const;           // G'(tau)
  double variance(double tau) const;       // Var[r]; G'' = beta Var
  double third_central(double tau) const;  // mu3;    G''' = beta^2 mu3

  double tension(double r) const;              // inverse of rbar
  TensionDerivs tension_full(double r) const;  // with 1/G'' and -G'''/G''^3

  // E[f(r)] under the tau-marginal
  double expectation(double tau, const std::function<double(double)>& f) const;
  double density(double tau, double r) const;

  GibbsTable build_table(double tau, int nodes = 4096) const;
  double cdf_from_table(const GibbsTable& tab, double r) const;
  double sample_table(const GibbsTable& tab, RngStream& rng) const;
  double sample_rejection(double tau, RngStream& rng) const;
  double sample_rejection_at_mode(double tau, double m, RngStream& rng) const;

 private:
  double weight(double tau, double peak, double r) const;  // e^{-beta(V - tau r - peak)}

  Potential pot_;
  double beta_ = 1.0;
  double c_lo_ = 0.0;
  double c_hi_ = 0.0;
  double half_ = 0.0;
};

}  // namespace eqpert
