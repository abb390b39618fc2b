#pragma once

#include <array>
#include <cassert>
#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace eqpert {

// Discrete torus (Z/nZ)^d, d in {1,2,3}. Sites are indexed row-major with
// axis 0 fastest. Directions 0..d-1 are +e_i, directions d..2d-1 are -e_i.
struct Torus {
  int dim = 1;
  int side = 1;

  Torus() = default;
  Torus(int d, int n) : dim(d), side(n) {
    if (d < 1 || d > 3) throw std::invalid_argument("torus: dim must be 1, 2 or 3");
    if (n < 1) throw std::invalid_argument("torus: side must be >= 1");
  }

  std::int64_t sites() const {
    std::int64_t s = 1;
    for (int i = 0; i < dim; ++i) s *= side;
    return s;
  }

  int directions() const { return 2 * dim; }

  // integer wrap into [0, side)
  int wrap(int c) const {
    int r = c % side;
    return r < 0 ? r + side : r;
  }

  std::array<int, 3> coords(std::int64_t idx) const {
    std::array<int, 3> c{0, 0, 0};
    for (int i = 0; i < dim; ++i) {
      c[i] = static_cast<int>(idx % side);
      idx /= side;
    }
    return c;
  }

  std::int64_t index(const std::array<int, 3>& c) const {
    std::int64_t idx = 0;
    for (int i = dim - 1; i >= 0; --i) idx = idx * side + wrap(c[i]);
    return idx;
  }

  // site shifted one step along direction dir (dir >= dim means -e_{dir-dim})
  std::int64_t neighbor(std::int64_t idx, int dir) const {
    assert(dir >= 0 && dir < 2 * dim);
    auto c = coords(idx);
    int axis = dir < dim ? dir : dir - dim;
    c[axis] += dir < dim ? 1 : -1;
    return index(c);
  }

  bool operator==(const Torus& o) const { return dim == o.dim && side == o.side; }
};

// continuous wrap into [0,1); exact for inputs already there
inline double wrap_unit(double u) {
  double w = u - std::floor(u);
  return w < 1.0 ? w : 0.0;  // floor rounding can land exactly on 1.0
}

}  // namespace eqpert
