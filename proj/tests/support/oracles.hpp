// Independent numerical oracles used to pin expected values: a matrix
// exponential (scaling-and-squaring Taylor, independent of the RK4
// integration path it checks) and small helpers.
#pragma once

#include <cmath>

#include "pg/linalg.hpp"

namespace pgtest {

inline pg::Mat<double> expm(const pg::Mat<double>& a) {
  int n = a.rows();
  double norm = 0.0;
  for (int i = 0; i < n; ++i) {
    double row = 0.0;
    for (int j = 0; j < n; ++j) row += std::abs(a(i, j));
    norm = std::max(norm, row);
  }
  int squarings = 0;
  while (norm > 0.5) {
    norm /= 2.0;
    ++squarings;
  }
  double scale = std::ldexp(1.0, -squarings);
  pg::Mat<double> as = scale * a;
  pg::Mat<double> term = pg::Mat<double>::identity(n, 1.0);
  pg::Mat<double> sum = term;
  for (int k = 1; k <= 24; ++k) {
    term = (1.0 / k) * (term * as);
    sum = sum + term;
  }
  for (int s = 0; s < squarings; ++s) sum = sum * sum;
  return sum;
}

inline double max_entry_diff(const pg::Mat<double>& x, const pg::Mat<double>& y) {
  double worst = 0.0;
  for (int i = 0; i < x.rows(); ++i)
    for (int j = 0; j < x.cols(); ++j)
      worst = std::max(worst, std::abs(x(i, j) - y(i, j)));
  return worst;
}

}  // namespace pgtest
