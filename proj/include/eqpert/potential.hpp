#pragma once

#include <string>
#include <utility>

namespace eqpert {

// Interaction potential. Uniform convexity is a range property here: the
// quartic has no global curvature cap, so bounds are measured on a working
// interval and all downstream constants use those range-verified values.
class Potential {
 public:
  // harmonic: r^2/2; fpu-quartic: r^2/2 + r^4/4; linear: r (degenerate,
  // force-free; rejected by curvature_bounds, usable by the integrator only)
  static Potential named(const std::string& name);

  double V(double r) const;
  double dV(double r) const;
  double d2V(double r) const;

  // tightest sampled bounds c_lo <= V'' <= c_hi on [-R, R]; throws if the
  // sampled curvature ever drops to zero or below
  std::pair<double, double> curvature_bounds(double R, int grid = 4096) const;

  const std::string& name() const { return name_; }

 private:
  enum class Kind { Harmonic, Quartic, Linear };
  Kind kind_ = Kind::Harmonic;
  std::string name_ = "harmonic";
};

}  // namespace eqpert
