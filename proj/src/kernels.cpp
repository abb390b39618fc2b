#include "eqpert/kernels.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

namespace eqpert {

namespace {

void check_args(int ell, int d) {
  if (ell < 1) throw std::invalid_argument("kernel: ell must be >= 1");
  if (d < 1 || d > 3) throw std::invalid_argument("kernel: d must be 1, 2 or 3");
}

// 1-d occupation counts of p_ell * p_ell: ell - |z - (ell-1)| on [0, 2ell-1)
std::int64_t q1_count(int ell, int z) {
  int dev = z - (ell - 1);
  if (dev < 0) dev = -dev;
  return ell - dev;
}

}  // namespace

Kernel kernel_p(int ell, int d) {
  check_args(ell, d);
  Kernel k;
  k.dim = d;
  k.ell = ell;
  k.extent = ell;
  std::int64_t den = 1;
  for (int i = 0; i < d; ++i) den *= ell;
  k.den = den;
  k.num.assign(k.cells(), 1);
  return k;
}

Kernel kernel_q(int ell, int d) {
  check_args(ell, d);
  Kernel k;
  k.dim = d;
  k.ell = ell;
  k.extent = 2 * ell - 1;
  std::int64_t den = 1;
  for (int i = 0; i < 2 * d; ++i) den *= ell;
  k.den = den;
  k.num.resize(k.cells());
  for (std::int64_t c = 0; c < k.cells(); ++c) {
    auto z = k.offset(c);
    std::int64_t n = 1;
    for (int i = 0; i < d; ++i) n *= q1_count(ell, z[i]);
    k.num[c] = n;
  }
  return k;
}

double flow_cost_rate(int ell, int d) {
  check_args(ell, d);
  if (d == 1) return static_cast<double>(ell);
  if (d == 2) return std::log(static_cast<double>(ell));
  return 1.0;
}

std::vector<double> block_average(const Torus& t, const std::vector<double>& field,
                                  const Kernel& k) {
  if (t.dim != k.dim) throw std::invalid_argument("block_average: dimension mismatch");
  if (static_cast<std::int64_t>(field.size()) != t.sites())
    throw std::invalid_argument("block_average: field size mismatch");
  std::vector<double> out(field.size(), 0.0);
  const std::int64_t cells = k.cells();
  for (std::int64_t x = 0; x < t.sites(); ++x) {
    auto cx = t.coords(x);
    double acc = 0.0;
    for (std::int64_t c = 0; c < cells; ++c) {
      if (k.num[c] == 0) continue;
      auto z = k.offset(c);
      std::array<int, 3> cy{0, 0, 0};
      for (int i = 0; i < t.dim; ++i) cy[i] = cx[i] + z[i];
      acc += k.weight(c) * field[t.index(cy)];
    }
    out[x] = acc;
  }
  return out;
}

void write_kernel_csv(const Kernel& k, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path);
  for (int i = 0; i < k.dim; ++i) os << "z" << i << ",";
  os << "weight\n";
  char buf[64];
  for (std::int64_t c = 0; c < k.cells(); ++c) {
    auto z = k.offset(c);
    for (int i = 0; i < k.dim; ++i) os << z[i] << ",";
    std::snprintf(buf, sizeof buf, "%.17g", k.weight(c));
    os << buf << "\n";
  }
}

}  // namespace eqpert
