#pragma once

#include <array>
#include <utility>
#include <vector>

#include "eqpert/profiles.hpp"

namespace eqpert {

// shock time of a scalar conservation law; never serialized as a float inf
struct ShockTime {
  bool finite = false;
  double t = 0.0;
};

// rho(s, zeta) for  d_s rho + c d_zeta(rho^2) = 0,  rho(0,.) = rho0, pre-shock.
// Solves rho = rho0(zeta - 2 c s rho) by Newton inside a maintained bracket
// [min rho0, max rho0], residual tolerance 1e-12.
double characteristic_value(const Profile& rho0, double c, double s, double zeta);

// value plus exact partial derivatives of the implicit solution
struct WavePoint {
  double value = 0, xi = 0;  // xi is the foot of the characteristic
  double du = 0, ds = 0;
  double dudu = 0, dsdu = 0;
};
WavePoint characteristic_point(const Profile& rho0, double c, double s, double zeta);

// int_0^u rho(s,w) dw via the characteristic change of variables:
// [S0(xi) + c s rho0^2(xi)] between xi(0) and xi(u), S0 the initial primitive
double wave_primitive(const Profile& rho0, double c, double s, double u);
// d/ds of the above: -c [rho^2(s,u) - rho^2(s,0)]
double wave_primitive_ds(const Profile& rho0, double c, double s, double u);

// first caustic of the characteristic map: -1 / min_u 2 c rho0'(u) when that
// minimum is negative, otherwise no shock (grid scan plus local refinement)
ShockTime shock_time(const Profile& rho0, double c);

// A datum/coefficient pair with the caustic time computed once; evaluation is
// rejected for s >= shock time (the strict pre-shock contract), while the free
// kernels above only detect the fold they actually hit.
class Wave {
 public:
  Wave() = default;
  Wave(Profile rho0, double c) : rho0_(std::move(rho0)), c_(c), shock_(shock_time(rho0_, c)) {}

  double value(double s, double zeta) const {
    guard(s);
    return characteristic_value(rho0_, c_, s, zeta);
  }
  WavePoint point(double s, double zeta) const {
    guard(s);
    return characteristic_point(rho0_, c_, s, zeta);
  }
  double primitive(double s, double u) const {
    guard(s);
    return wave_primitive(rho0_, c_, s, u);
  }
  double primitive_ds(double s, double u) const {
    guard(s);
    return wave_primitive_ds(rho0_, c_, s, u);
  }
  const ShockTime& shock() const { return shock_; }
  double coefficient() const { return c_; }
  const Profile& initial() const { return rho0_; }

 private:
  void guard(double s) const;
  Profile rho0_;
  double c_ = 0.0;
  ShockTime shock_;
};

// d-dimensional finite volume solver for d_s rho + sum_i c_i d_i(rho^2) = 0:
// Godunov flux per axis, Strang dimensional splitting, periodic grid of
// cells^dim cells, row-major with axis 0 fastest. CFL must be <= 0.5.
std::vector<double> burgers_fv(std::vector<double> field, int dim, int cells,
                               const std::array<double, 3>& c, double t, double cfl = 0.45);

// planar datum rho0(n . u) sampled at cell centers
std::vector<double> planar_field(const Profile& rho0, const std::array<int, 3>& normal,
                                 int dim, int cells);

// exact planar solution: the equation reduces to 1-d along zeta = n . u with
// coefficient c . n
double planar_characteristic(const Profile& rho0, const std::array<int, 3>& normal,
                             const std::array<double, 3>& c, double s,
                             const std::array<double, 3>& u);

double mean_field(const std::vector<double>& f);
double l1_error(const std::vector<double>& a, const std::vector<double>& b);
double total_variation_1d(const std::vector<double>& f);  // periodic

// Slowly varying exclusion density about rho_*: the O(N^{-alpha}) planar
// perturbation rides the frame moving at N^kappa lambda m, lambda = K - 2 rho_*,
// and evolves on timescale N^{kappa-alpha} with wave coefficient -(m . n).
struct GepMacro {
  double rho_star = 0.0;
  double lambda = 0.0;
  std::array<double, 3> drift{};  // m
  std::array<int, 3> normal{};    // direction of the planar datum
  Wave wave;                      // datum along zeta = n . u, coefficient -(m . n)
};

GepMacro make_gep_macro(double rho_star, int k_max, const std::array<double, 3>& drift,
                        const std::array<int, 3>& normal, const Profile& rho0);

double gep_profile(const GepMacro& mac, double n_sites, double alpha, double kappa,
                   double t, const std::array<double, 3>& u);

}  // namespace eqpert
