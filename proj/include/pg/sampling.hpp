// Seeded Latin-hypercube sampling over a coordinate box. Identical seeds
// give identical samples: doubles are derived from raw mt19937_64 output
// rather than std::uniform_real_distribution.
#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include "pg/expr.hpp"

namespace pg {

struct SampleRegion {
  std::vector<double> lo, hi;

  static SampleRegion cube(int dim, double a = -1.0, double b = 1.0) {
    SampleRegion r;
    r.lo.assign(dim, a);
    r.hi.assign(dim, b);
    return r;
  }

  int dim() const { return static_cast<int>(lo.size()); }
};

namespace detail {

inline double unit_double(std::mt19937_64& g) {
  return static_cast<double>(g() >> 11) * 0x1.0p-53;
}

}  // namespace detail

inline std::vector<Point> latin_hypercube(const SampleRegion& region, int n,
                                          std::uint64_t seed) {
  if (region.lo.size() != region.hi.size())
    throw std::invalid_argument("sample region bounds disagree");
  int m = region.dim();
  std::mt19937_64 gen(seed);
  std::vector<Point> pts(n, Point(m));
  std::vector<int> strata(n);
  for (int d = 0; d < m; ++d) {
    for (int i = 0; i < n; ++i) strata[i] = i;
    for (int i = n - 1; i > 0; --i) {
      int j = static_cast<int>(gen() % static_cast<std::uint64_t>(i + 1));
      std::swap(strata[i], strata[j]);
    }
    for (int i = 0; i < n; ++i) {
      double u = (strata[i] + detail::unit_double(gen)) / n;
      pts[i][d] = region.lo[d] + u * (region.hi[d] - region.lo[d]);
    }
  }
  return pts;
}

}  // namespace pg
