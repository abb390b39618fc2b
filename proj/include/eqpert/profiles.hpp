#pragma once

#include <string>
#include <vector>

#include "eqpert/torus.hpp"

namespace eqpert {

// Smooth periodic profile on the unit torus with derivatives and the exact
// primitive int_0^u. Built-ins: a*sin(2*pi*u), a*cos(2*pi*u), and a smooth
// bump a*exp(1 - 1/(1-y^2)) on |y| < 1, y = 2(u-center)/width. zero_mean
// subtracts the (precomputed) mean so the primitive is periodic.
class Profile {
 public:
  Profile() = default;
  static Profile named(const std::string& name, double amplitude, double center = 0.5,
                       double width = 0.5, bool zero_mean = false);

  double value(double u) const;
  double deriv(double u) const;
  double deriv2(double u) const;
  double primitive(double u) const;  // int_0^u value(w) dw

  double min_value() const;
  double max_value() const;
  double mean() const { return shift_ == 0.0 ? raw_mean_ : 0.0; }
  const std::string& name() const { return name_; }
  double amplitude() const { return a_; }

 private:
  enum class Kind { Zero, Sin, Cos, Bump };
  Kind kind_ = Kind::Zero;
  std::string name_ = "zero";
  double a_ = 0.0, center_ = 0.5, width_ = 0.5;
  double shift_ = 0.0;     // constant subtracted from the raw shape
  double raw_mean_ = 0.0;  // mean of the raw shape
  std::vector<double> cum_;  // bump: cumulative integral at i/table_size

  double raw(double u) const;
  double raw_primitive(double u) const;
};

}  // namespace eqpert
