#include "eqpert/profiles.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <stdexcept>

namespace eqpert {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;
constexpr int kBumpTable = 2048;

double bump_shape(double y) {  // exp(1 - 1/(1-y^2)) on |y| < 1
  if (std::abs(y) >= 1.0) return 0.0;
  return std::exp(1.0 - 1.0 / (1.0 - y * y));
}

double bump_shape_d1(double y) {
  if (std::abs(y) >= 1.0) return 0.0;
  double q = 1.0 - y * y;
  return bump_shape(y) * (-2.0 * y / (q * q));
}

double bump_shape_d2(double y) {
  if (std::abs(y) >= 1.0) return 0.0;
  double q = 1.0 - y * y;
  double phi1 = -2.0 * y / (q * q);
  double phi2 = -2.0 * (1.0 + 3.0 * y * y) / (q * q * q);
  return bump_shape(y) * (phi1 * phi1 + phi2);
}

}  // namespace

Profile Profile::named(const std::string& name, double amplitude, double center,
                       double width, bool zero_mean) {
  Profile p;
  p.a_ = amplitude;
  p.name_ = name;
  p.center_ = center;
  p.width_ = width;
  if (name == "zero") {
    p.kind_ = Kind::Zero;
  } else if (name == "sin") {
    p.kind_ = Kind::Sin;
  } else if (name == "cos") {
    p.kind_ = Kind::Cos;
  } else if (name == "bump") {
    if (width <= 0.0 || width > 1.0) throw std::invalid_argument("profile: bump width in (0,1]");
    p.kind_ = Kind::Bump;
    // cumulative integral of the raw bump on a uniform grid; per-interval
    // Gauss rule is exact to round-off for this smooth shape
    using gauss = boost::math::quadrature::gauss<double, 15>;
    p.cum_.resize(kBumpTable + 1);
    p.cum_[0] = 0.0;
    for (int i = 0; i < kBumpTable; ++i) {
      double lo = static_cast<double>(i) / kBumpTable;
      double hi = static_cast<double>(i + 1) / kBumpTable;
      auto f = [&](double u) { return p.raw(u); };
      p.cum_[static_cast<std::size_t>(i) + 1] =
          p.cum_[static_cast<std::size_t>(i)] + gauss::integrate(f, lo, hi);
    }
    p.raw_mean_ = p.cum_[kBumpTable];
  } else {
    throw std::invalid_argument("profile: unknown name " + name);
  }
  if (zero_mean) p.shift_ = p.raw_mean_;
  return p;
}

double Profile::raw(double u) const {
  switch (kind_) {
    case Kind::Zero: return 0.0;
    case Kind::Sin: return a_ * std::sin(kTwoPi * u);
    case Kind::Cos: return a_ * std::cos(kTwoPi * u);
    case Kind::Bump: {
      double w = wrap_unit(u - center_ + 0.5) - 0.5;  // centered coordinate
      return a_ * bump_shape(2.0 * w / width_);
    }
  }
  return 0.0;
}

double Profile::value(double u) const { return raw(u) - shift_; }

double Profile::deriv(double u) const {
  switch (kind_) {
    case Kind::Zero: return 0.0;
    case Kind::Sin: return a_ * kTwoPi * std::cos(kTwoPi * u);
    case Kind::Cos: return -a_ * kTwoPi * std::sin(kTwoPi * u);
    case Kind::Bump: {
      double w = wrap_unit(u - center_ + 0.5) - 0.5;
      return a_ * bump_shape_d1(2.0 * w / width_) * (2.0 / width_);
    }
  }
  return 0.0;
}

double Profile::deriv2(double u) const {
  switch (kind_) {
    case Kind::Zero: return 0.0;
    case Kind::Sin: return -a_ * kTwoPi * kTwoPi * std::sin(kTwoPi * u);
    case Kind::Cos: return -a_ * kTwoPi * kTwoPi * std::cos(kTwoPi * u);
    case Kind::Bump: {
      double w = wrap_unit(u - center_ + 0.5) - 0.5;
      return a_ * bump_shape_d2(2.0 * w / width_) * (4.0 / (width_ * width_));
    }
  }
  return 0.0;
}

double Profile::raw_primitive(double u) const {
  switch (kind_) {
    case Kind::Zero: return 0.0;
    case Kind::Sin: return a_ * (1.0 - std::cos(kTwoPi * u)) / kTwoPi;
    case Kind::Cos: return a_ * std::sin(kTwoPi * u) / kTwoPi;
    case Kind::Bump: {
      // whole periods contribute raw_mean_ each; fractional part from the table
      double whole = std::floor(u);
      double frac = u - whole;
      double scaled = frac * kBumpTable;
      int i = std::min(static_cast<int>(scaled), kBumpTable - 1);
      double lo = static_cast<double>(i) / kBumpTable;
      using gauss = boost::math::quadrature::gauss<double, 15>;
      auto f = [&](double w) { return raw(w); };
      double part = cum_[static_cast<std::size_t>(i)] +
                    (frac > lo ? gauss::integrate(f, lo, frac) : 0.0);
      return whole * raw_mean_ + part;
    }
  }
  return 0.0;
}

double Profile::primitive(double u) const { return raw_primitive(u) - shift_ * u; }

double Profile::min_value() const {
  switch (kind_) {
    case Kind::Zero: return 0.0;
    case Kind::Sin:
    case Kind::Cos: return -std::abs(a_);
    case Kind::Bump: return (a_ >= 0.0 ? 0.0 : a_) - shift_;
  }
  return 0.0;
}

double Profile::max_value() const {
  switch (kind_) {
    case Kind::Zero: return 0.0;
    case Kind::Sin:
    case Kind::Cos: return std::abs(a_);
    case Kind::Bump: return (a_ >= 0.0 ? a_ : 0.0) - shift_;
  }
  return 0.0;
}

}  // namespace eqpert
