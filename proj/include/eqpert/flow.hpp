#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "eqpert/kernels.hpp"

namespace eqpert {

// Discrete flow connecting the point mass at the origin to the kernel q_ell:
//   delta_0(z) - q(z) = sum_i [ phi(z, e_i) - phi(z - e_i, e_i) ]   for all z.
// phi(z, e_i) lives on directed edges (z, z + e_i); support is contained in
// {0,...,2ell-2}^d and every value is >= 0 by construction. Values are exact
// rationals num[dir][cell] / den with one common denominator.
struct Flow {
  int dim = 1;
  int ell = 1;
  int extent = 1;                            // 2*ell - 1 (1 when ell == 1)
  std::vector<std::vector<__int128>> num;    // [dim][box cells], row-major
  __int128 den = 1;

  std::int64_t cells() const {
    std::int64_t c = 1;
    for (int i = 0; i < dim; ++i) c *= extent;
    return c;
  }

  std::array<int, 3> offset(std::int64_t cell) const {
    std::array<int, 3> z{0, 0, 0};
    for (int i = 0; i < dim; ++i) {
      z[i] = static_cast<int>(cell % extent);
      cell /= extent;
    }
    return z;
  }

  double value(int axis, std::int64_t cell) const {
    return static_cast<double>(num[axis][cell]) / static_cast<double>(den);
  }

  // exact integer check of the divergence identity at every z (box plus rim)
  bool divergence_exact() const;

  // max |divergence residual| in floating point arithmetic
  double divergence_residual() const;

  double sum_abs() const;   // sum over edges of |phi|, exact numerator sum
  double sum_sq() const;    // sum over edges of phi^2 (double accumulation)

  bool nonnegative() const;
};

Flow construct_flow(int ell, int d);

// CSV with header "z0[,z1[,z2]],axis,weight", only nonzero entries
void write_flow_csv(const Flow& f, const std::string& path);

}  // namespace eqpert
