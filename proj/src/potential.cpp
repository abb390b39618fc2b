#include "eqpert/potential.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace eqpert {

Potential Potential::named(const std::string& name) {
  Potential p;
  p.name_ = name;
  if (name == "harmonic") {
    p.kind_ = Kind::Harmonic;
  } else if (name == "fpu-quartic") {
    p.kind_ = Kind::Quartic;
  } else if (name == "linear") {
    p.kind_ = Kind::Linear;
  } else {
    throw std::invalid_argument("unknown potential: " + name);
  }
  return p;
}

double Potential::V(double r) const {
  switch (kind_) {
    case Kind::Harmonic:
      return 0.5 * r * r;
    case Kind::Quartic:
      return 0.5 * r * r + 0.25 * r * r * r * r;
    case Kind::Linear:
      return r;
  }
  return 0.0;
}

double Potential::dV(double r) const {
  switch (kind_) {
    case Kind::Harmonic:
      return r;
    case Kind::Quartic:
      return r + r * r * r;
    case Kind::Linear:
      return 1.0;
  }
  return 0.0;
}

double Potential::d2V(double r) const {
  switch (kind_) {
    case Kind::Harmonic:
      return 1.0;
    case Kind::Quartic:
      return 1.0 + 3.0 * r * r;
    case Kind::Linear:
      return 0.0;
  }
  return 0.0;
}

std::pair<double, double> Potential::curvature_bounds(double R, int grid) const {
  if (!(R > 0.0) || grid < 2) throw std::invalid_argument("curvature_bounds: bad range");
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (int i = 0; i <= grid; ++i) {
    double r = -R + 2.0 * R * static_cast<double>(i) / grid;
    double c = d2V(r);
    lo = std::min(lo, c);
    hi = std::max(hi, c);
  }
  if (!(lo > 0.0)) throw std::domain_error("curvature_bounds: potential not uniformly convex on range");
  return {lo, hi};
}

}  // namespace eqpert
