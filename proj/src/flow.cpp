#include "eqpert/flow.hpp"

#include <algorithm>
#include <bit>
#include <cstdio>
#include <fstream>
#include <stdexcept>

// Construction: walk the binary digits of ell (below the leading bit, most
// significant first) and advance the 1-d uniform measure on every axis in
// turn, using
//   u_{2L}   = U_L * u_L,               U_L = (delta_0 + delta_L)/2,
//   u_{2L+1} = (2L u_{2L} + delta_{2L}) / (2L+1),
// then close each axis with the unique 1-d move from u_ell to q1 = u_ell*u_ell.
// Each elementary move contributes (1-d flow on the active axis) x (current
// measures on the other axes); divergences telescope along the path from
// delta_0 to q_ell. Interleaving the axes keeps mass spread over a box of the
// current scale while it moves, which is what makes sum(phi^2) scale like
// ell, log(ell), O(1) in d = 1, 2, 3. Every elementary 1-d move pushes mass
// rightward, so all flow values are >= 0.

namespace eqpert {

namespace {

using i128 = __int128;

i128 gcd128(i128 a, i128 b) {
  if (a < 0) a = -a;
  if (b < 0) b = -b;
  while (b != 0) {
    i128 t = a % b;
    a = b;
    b = t;
  }
  return a;
}

i128 lcm128(i128 a, i128 b) { return a / gcd128(a, b) * b; }

// exact 1-d vector over offsets [0, v.size()), values v[i]/den
struct Vec1 {
  std::vector<i128> v;
  i128 den = 1;
};

Vec1 uniform1(long long L) {
  Vec1 m;
  m.v.assign(static_cast<size_t>(L), 1);
  m.den = L;
  return m;
}

Vec1 square1(long long L) {  // u_L * u_L
  Vec1 m;
  m.v.resize(static_cast<size_t>(2 * L - 1));
  for (long long z = 0; z < 2 * L - 1; ++z) {
    long long dev = z - (L - 1);
    m.v[static_cast<size_t>(z)] = L - (dev < 0 ? -dev : dev);
  }
  m.den = L * L;
  return m;
}

// flow for u_L -> u_{2L}: (flow delta_0 -> U_L) * u_L, triangular on [0, 2L-1)
Vec1 step_double(long long L) {
  Vec1 f;
  f.v.resize(static_cast<size_t>(2 * L - 1));
  for (long long z = 0; z < 2 * L - 1; ++z) {
    long long dev = z - (L - 1);
    f.v[static_cast<size_t>(z)] = L - (dev < 0 ? -dev : dev);
  }
  f.den = 2 * L;
  return f;
}

// flow for u_L -> delta_{2L}: running cdf of u_L, min(z+1, L)/L on [0, 2L)
Vec1 step_collapse(long long L) {
  Vec1 f;
  f.v.resize(static_cast<size_t>(2 * L));
  for (long long z = 0; z < 2 * L; ++z) f.v[static_cast<size_t>(z)] = std::min(z + 1, L);
  f.den = L;
  return f;
}

// flow for u_L -> u_{2L+1}, mixture of the two moves above with the weights
// of u_{2L+1} = (2L u_{2L} + delta_{2L}) / (2L+1)
Vec1 step_odd(long long L) {
  Vec1 a = step_double(L);    // den 2L, weight 2L/(2L+1)
  Vec1 b = step_collapse(L);  // den L, weight 1/(2L+1)
  Vec1 f;
  f.den = 2 * L * (2 * L + 1);
  f.v.assign(std::max(a.v.size(), b.v.size()), 0);
  for (size_t z = 0; z < a.v.size(); ++z) f.v[z] += 2 * L * a.v[z];
  for (size_t z = 0; z < b.v.size(); ++z) f.v[z] += 2 * b.v[z];
  return f;
}

// flow for u_ell -> q1: running cdf difference, the unique 1-d flow
Vec1 step_final(long long ell) {
  Vec1 f;
  f.den = ell * ell;
  f.v.resize(static_cast<size_t>(2 * ell - 1));
  Vec1 q = square1(ell);
  i128 pc = 0, qc = 0;
  for (long long z = 0; z < 2 * ell - 1; ++z) {
    if (z < ell) pc += ell;  // u_ell cdf over den ell^2
    qc += q.v[static_cast<size_t>(z)];
    f.v[static_cast<size_t>(z)] = pc - qc;
  }
  return f;
}

struct Piece {
  int axis;
  Vec1 f;                  // 1-d flow along `axis`
  std::array<Vec1, 3> m;   // measures on the other axes (m[axis] unused)
};

}  // namespace

Flow construct_flow(int ell, int d) {
  if (ell < 1 || ell > 4096) throw std::invalid_argument("flow: ell out of range");
  if (d < 1 || d > 3) throw std::invalid_argument("flow: d must be 1, 2 or 3");

  Flow flow;
  flow.dim = d;
  flow.ell = ell;
  flow.extent = ell == 1 ? 1 : 2 * ell - 1;
  flow.num.assign(static_cast<size_t>(d), std::vector<i128>(static_cast<size_t>(flow.cells()), 0));
  flow.den = 1;
  if (ell == 1) return flow;

  std::vector<int> digits;
  for (int b = std::bit_width(static_cast<unsigned>(ell)) - 2; b >= 0; --b)
    digits.push_back((ell >> b) & 1);

  std::array<Vec1, 3> cur;
  std::array<long long, 3> scale{};
  for (int i = 0; i < d; ++i) {
    cur[i] = uniform1(1);
    scale[i] = 1;
  }

  std::vector<Piece> pieces;
  for (int digit : digits) {
    for (int axis = 0; axis < d; ++axis) {
      long long L = scale[axis];
      Piece p;
      p.axis = axis;
      p.f = digit ? step_odd(L) : step_double(L);
      for (int j = 0; j < d; ++j)
        if (j != axis) p.m[static_cast<size_t>(j)] = cur[static_cast<size_t>(j)];
      pieces.push_back(std::move(p));
      scale[axis] = 2 * L + digit;
      cur[axis] = uniform1(scale[axis]);
    }
  }
  for (int axis = 0; axis < d; ++axis) {
    Piece p;
    p.axis = axis;
    p.f = step_final(ell);
    for (int j = 0; j < d; ++j)
      if (j != axis) p.m[static_cast<size_t>(j)] = cur[static_cast<size_t>(j)];
    pieces.push_back(std::move(p));
    cur[axis] = square1(ell);
  }

  i128 D = 1;
  const i128 kDenCap = (i128)1 << 100;
  for (const Piece& p : pieces) {
    i128 pd = p.f.den;
    for (int j = 0; j < d; ++j)
      if (j != p.axis) pd *= p.m[static_cast<size_t>(j)].den;
    D = lcm128(D, pd);
    if (D > kDenCap) throw std::runtime_error("flow: common denominator overflow");
  }
  flow.den = D;

  const int ext = flow.extent;
  for (const Piece& p : pieces) {
    i128 pd = p.f.den;
    for (int j = 0; j < d; ++j)
      if (j != p.axis) pd *= p.m[static_cast<size_t>(j)].den;
    const i128 up = D / pd;

    std::array<const Vec1*, 3> comp{};
    for (int j = 0; j < d; ++j)
      comp[static_cast<size_t>(j)] = (j == p.axis) ? &p.f : &p.m[static_cast<size_t>(j)];
    const long long n0 = static_cast<long long>(comp[0]->v.size());
    const long long n1 = d > 1 ? static_cast<long long>(comp[1]->v.size()) : 1;
    const long long n2 = d > 2 ? static_cast<long long>(comp[2]->v.size()) : 1;
    auto& dst = flow.num[static_cast<size_t>(p.axis)];
    for (long long z2 = 0; z2 < n2; ++z2) {
      const i128 w2 = d > 2 ? comp[2]->v[static_cast<size_t>(z2)] : 1;
      if (w2 == 0) continue;
      for (long long z1 = 0; z1 < n1; ++z1) {
        const i128 w12 = w2 * (d > 1 ? comp[1]->v[static_cast<size_t>(z1)] : 1);
        if (w12 == 0) continue;
        const i128 w = w12 * up;
        std::int64_t base = (z2 * ext + z1) * ext;
        for (long long z0 = 0; z0 < n0; ++z0)
          dst[static_cast<size_t>(base + z0)] += w * comp[0]->v[static_cast<size_t>(z0)];
      }
    }
  }
  return flow;
}

bool Flow::divergence_exact() const {
  Kernel q = kernel_q(ell, dim);
  // iterate the box extended one cell past each axis to cover the rim
  const int e1 = extent + 1;
  std::int64_t span = 1;
  for (int i = 0; i < dim; ++i) span *= e1;
  auto in_box = [&](const std::array<int, 3>& z) {
    for (int i = 0; i < dim; ++i)
      if (z[i] < 0 || z[i] >= extent) return false;
    return true;
  };
  auto cell_of = [&](const std::array<int, 3>& z) {
    std::int64_t c = 0;
    for (int i = dim - 1; i >= 0; --i) c = c * extent + z[i];
    return c;
  };
  for (std::int64_t s = 0; s < span; ++s) {
    std::array<int, 3> z{0, 0, 0};
    std::int64_t r = s;
    for (int i = 0; i < dim; ++i) {
      z[i] = static_cast<int>(r % e1);
      r /= e1;
    }
    i128 rhs = 0;  // over den
    for (int i = 0; i < dim; ++i) {
      if (in_box(z)) rhs += num[static_cast<size_t>(i)][static_cast<size_t>(cell_of(z))];
      std::array<int, 3> zm = z;
      zm[i] -= 1;
      if (in_box(zm)) rhs -= num[static_cast<size_t>(i)][static_cast<size_t>(cell_of(zm))];
    }
    bool origin = true;
    for (int i = 0; i < dim; ++i) origin = origin && z[i] == 0;
    i128 lhs = origin ? q.den : 0;  // over q.den
    if (in_box(z)) lhs -= q.num[static_cast<size_t>(cell_of(z))];
    if (lhs * den != rhs * static_cast<i128>(q.den)) return false;
  }
  return true;
}

double Flow::divergence_residual() const {
  Kernel q = kernel_q(ell, dim);
  const int e1 = extent + 1;
  std::int64_t span = 1;
  for (int i = 0; i < dim; ++i) span *= e1;
  auto in_box = [&](const std::array<int, 3>& z) {
    for (int i = 0; i < dim; ++i)
      if (z[i] < 0 || z[i] >= extent) return false;
    return true;
  };
  auto cell_of = [&](const std::array<int, 3>& z) {
    std::int64_t c = 0;
    for (int i = dim - 1; i >= 0; --i) c = c * extent + z[i];
    return c;
  };
  double worst = 0.0;
  for (std::int64_t s = 0; s < span; ++s) {
    std::array<int, 3> z{0, 0, 0};
    std::int64_t r = s;
    for (int i = 0; i < dim; ++i) {
      z[i] = static_cast<int>(r % e1);
      r /= e1;
    }
    double rhs = 0.0;
    for (int i = 0; i < dim; ++i) {
      if (in_box(z)) rhs += value(i, cell_of(z));
      std::array<int, 3> zm = z;
      zm[i] -= 1;
      if (in_box(zm)) rhs -= value(i, cell_of(zm));
    }
    bool origin = true;
    for (int i = 0; i < dim; ++i) origin = origin && z[i] == 0;
    double lhs = origin ? 1.0 : 0.0;
    if (in_box(z)) lhs -= q.weight(cell_of(z));
    worst = std::max(worst, std::abs(lhs - rhs));
  }
  return worst;
}

double Flow::sum_abs() const {
  i128 acc = 0;
  for (const auto& dir : num)
    for (i128 x : dir) acc += x < 0 ? -x : x;
  return static_cast<double>(static_cast<long double>(acc) / static_cast<long double>(den));
}

double Flow::sum_sq() const {
  double acc = 0.0;
  const double dd = static_cast<double>(static_cast<long double>(den));
  for (const auto& dir : num)
    for (i128 x : dir) {
      double v = static_cast<double>(static_cast<long double>(x)) / dd;
      acc += v * v;
    }
  return acc;
}

bool Flow::nonnegative() const {
  for (const auto& dir : num)
    for (i128 x : dir)
      if (x < 0) return false;
  return true;
}

void write_flow_csv(const Flow& f, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path);
  for (int i = 0; i < f.dim; ++i) os << "z" << i << ",";
  os << "axis,weight\n";
  char buf[64];
  for (int axis = 0; axis < f.dim; ++axis)
    for (std::int64_t c = 0; c < f.cells(); ++c) {
      if (f.num[static_cast<size_t>(axis)][static_cast<size_t>(c)] == 0) continue;
      auto z = f.offset(c);
      for (int i = 0; i < f.dim; ++i) os << z[i] << ",";
      std::snprintf(buf, sizeof buf, "%.17g", f.value(axis, c));
      os << axis << "," << buf << "\n";
    }
}

}  // namespace eqpert
