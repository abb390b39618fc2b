#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "eqpert/torus.hpp"

namespace eqpert {

// Averaging kernel on Z^d offsets, dense over the box [0, extent)^d
// (row-major, axis 0 fastest). Weights are exact rationals num[i]/den;
// den <= 64^6 fits comfortably in 64 bits.
struct Kernel {
  int dim = 1;
  int ell = 1;
  int extent = 1;
  std::vector<std::int64_t> num;
  std::int64_t den = 1;

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

  double weight(std::int64_t cell) const {
    return static_cast<double>(num[cell]) / static_cast<double>(den);
  }
};

// uniform kernel on the block {0,...,ell-1}^d
Kernel kernel_p(int ell, int d);

// convolution square p*p, supported on {0,...,2ell-2}^d
Kernel kernel_q(int ell, int d);

// dimension-dependent flow cost rate: ell, log(ell), 1 for d = 1, 2, >=3
double flow_cost_rate(int ell, int d);

// circular convolution out[x] = sum_z w(z) field[x+z] on the torus
std::vector<double> block_average(const Torus& t, const std::vector<double>& field,
                                  const Kernel& k);

// CSV with header "z0[,z1[,z2]],weight", LF line endings, cells in storage order
void write_kernel_csv(const Kernel& k, const std::string& path);

}  // namespace eqpert
