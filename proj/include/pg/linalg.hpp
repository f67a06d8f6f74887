// Small dense matrices over an arbitrary ring (double for numerics, Expr
// for symbolic work). Sizes here are chart dimensions, so O(n^3) and the
// Laplace determinant are fine.
#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

namespace pg {

template <typename T>
class Mat {
 public:
  Mat() : rows_(0), cols_(0) {}
  Mat(int rows, int cols) : rows_(rows), cols_(cols), a_(rows * cols, T{}) {}

  static Mat identity(int n, const T& one) {
    Mat m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = one;
    return m;
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }

  T& operator()(int r, int c) { return a_[static_cast<std::size_t>(r) * cols_ + c]; }
  const T& operator()(int r, int c) const {
    return a_[static_cast<std::size_t>(r) * cols_ + c];
  }

  friend Mat operator+(const Mat& x, const Mat& y) {
    Mat r(x.rows_, x.cols_);
    for (std::size_t i = 0; i < x.a_.size(); ++i) r.a_[i] = x.a_[i] + y.a_[i];
    return r;
  }

  friend Mat operator-(const Mat& x, const Mat& y) {
    Mat r(x.rows_, x.cols_);
    for (std::size_t i = 0; i < x.a_.size(); ++i) r.a_[i] = x.a_[i] - y.a_[i];
    return r;
  }

  friend Mat operator*(const Mat& x, const Mat& y) {
    if (x.cols_ != y.rows_) throw std::invalid_argument("matrix shape mismatch");
    Mat r(x.rows_, y.cols_);
    for (int i = 0; i < x.rows_; ++i)
      for (int k = 0; k < x.cols_; ++k) {
        const T& xv = x(i, k);
        for (int j = 0; j < y.cols_; ++j) r(i, j) = r(i, j) + xv * y(k, j);
      }
    return r;
  }

  friend Mat operator*(const T& s, const Mat& x) {
    Mat r(x.rows_, x.cols_);
    for (std::size_t i = 0; i < x.a_.size(); ++i) r.a_[i] = s * x.a_[i];
    return r;
  }

  T trace() const {
    T s{};
    for (int i = 0; i < rows_; ++i) s = s + (*this)(i, i);
    return s;
  }

  Mat transposed() const {
    Mat r(cols_, rows_);
    for (int i = 0; i < rows_; ++i)
      for (int j = 0; j < cols_; ++j) r(j, i) = (*this)(i, j);
    return r;
  }

  Mat minor_matrix(int drop_row, int drop_col) const {
    Mat r(rows_ - 1, cols_ - 1);
    int ri = 0;
    for (int i = 0; i < rows_; ++i) {
      if (i == drop_row) continue;
      int rj = 0;
      for (int j = 0; j < cols_; ++j) {
        if (j == drop_col) continue;
        r(ri, rj) = (*this)(i, j);
        ++rj;
      }
      ++ri;
    }
    return r;
  }

 private:
  int rows_, cols_;
  std::vector<T> a_;
};

template <typename T>
T det(const Mat<T>& m) {
  int n = m.rows();
  if (n == 0) throw std::invalid_argument("determinant of empty matrix");
  if (n == 1) return m(0, 0);
  if (n == 2) return m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
  T acc{};
  for (int j = 0; j < n; ++j) {
    T cof = m(0, j) * det(m.minor_matrix(0, j));
    acc = (j % 2 == 0) ? acc + cof : acc - cof;
  }
  return acc;
}

// Adjugate-based inverse as a (cofactor matrix, determinant) pair, so the
// caller controls the division (symbolic inverses stay as adj/det).
template <typename T>
Mat<T> adjugate(const Mat<T>& m) {
  int n = m.rows();
  Mat<T> adj(n, n);
  if (n == 1) {
    // adj of 1x1 is [1]; leave as value-one via det path below
    throw std::invalid_argument("adjugate needs n >= 2");
  }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      T cof = det(m.minor_matrix(i, j));
      adj(j, i) = ((i + j) % 2 == 0) ? cof : T{} - cof;
    }
  return adj;
}

inline double det_lu(Mat<double> m) {
  int n = m.rows();
  double d = 1.0;
  for (int k = 0; k < n; ++k) {
    int piv = k;
    for (int i = k + 1; i < n; ++i)
      if (std::abs(m(i, k)) > std::abs(m(piv, k))) piv = i;
    if (m(piv, k) == 0.0) return 0.0;
    if (piv != k) {
      for (int j = 0; j < n; ++j) std::swap(m(piv, j), m(k, j));
      d = -d;
    }
    d *= m(k, k);
    for (int i = k + 1; i < n; ++i) {
      double f = m(i, k) / m(k, k);
      for (int j = k; j < n; ++j) m(i, j) -= f * m(k, j);
    }
  }
  return d;
}

}  // namespace pg
