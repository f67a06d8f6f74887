// Invariant polynomials sigma_k (scaled elementary symmetric functions),
// the Poisson-Chern-Weil 2k-vector fields, secondary characteristic
// (2k-1)-vector fields comparing two connections, closed Lie-Poisson
// forms built from traces of adjoint maps, and the modular-class
// comparison m_1 = (1/2pi) mod(M).
//
// sigma_k(A) = e_k(A) / (2pi)^k where e_k is the k-th elementary
// symmetric function of the eigenvalues; sigma_polarized is its full
// symmetric polarization, so sigma_polarized(k, A, .., A) = sigma_k(A)
// and sigma_polarized(1, A) = tr(A)/(2pi).
#pragma once

#include <cmath>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

#include "pg/connection.hpp"
#include "pg/fields.hpp"
#include "pg/linalg.hpp"
#include "pg/sampling.hpp"

namespace pg {

class LieAlgebra {
 public:
  explicit LieAlgebra(int dim)
      : dim_(dim), c_(static_cast<std::size_t>(dim) * dim * dim, 0.0) {
    if (dim < 1) throw std::invalid_argument("dimension must be positive");
  }

  int dim() const { return dim_; }

  // [e_i, e_j] = sum_k coeffs[k] e_k (and the antisymmetric mirror)
  void set_bracket(int i, int j, const std::vector<double>& coeffs) {
    if (i == j || i < 0 || j < 0 || i >= dim_ || j >= dim_ ||
        static_cast<int>(coeffs.size()) != dim_)
      throw std::invalid_argument("bad bracket specification");
    for (int k = 0; k < dim_; ++k) {
      at(i, j, k) = coeffs[k];
      at(j, i, k) = -coeffs[k];
    }
  }

  double structure_constant(int i, int j, int k) const { return at(i, j, k); }

  // Checks antisymmetry (by construction) and the Jacobi identity.
  void validate(double tol = 1e-12) const {
    for (int i = 0; i < dim_; ++i)
      for (int j = 0; j < dim_; ++j)
        for (int k = 0; k < dim_; ++k)
          for (int l = 0; l < dim_; ++l) {
            double s = 0.0;
            for (int m = 0; m < dim_; ++m)
              s += at(i, j, m) * at(m, k, l) + at(j, k, m) * at(m, i, l) +
                   at(k, i, m) * at(m, j, l);
            if (std::abs(s) > tol)
              throw std::invalid_argument(
                  "structure constants violate the Jacobi identity");
          }
  }

  // Matrix of ad_v on basis coordinates: (ad_v)_{kj} = v_i c^{ij}_k.
  Mat<double> ad(std::span<const double> v) const {
    Mat<double> m(dim_, dim_);
    for (int k = 0; k < dim_; ++k)
      for (int j = 0; j < dim_; ++j) {
        double s = 0.0;
        for (int i = 0; i < dim_; ++i) s += v[i] * at(i, j, k);
        m(k, j) = s;
      }
    return m;
  }

  std::vector<double> bracket(std::span<const double> u,
                              std::span<const double> v) const {
    std::vector<double> w(dim_, 0.0);
    for (int k = 0; k < dim_; ++k) {
      double s = 0.0;
      for (int i = 0; i < dim_; ++i)
        for (int j = 0; j < dim_; ++j) s += u[i] * v[j] * at(i, j, k);
      w[k] = s;
    }
    return w;
  }

  // Lie-Poisson structure on the dual: pi^{ij} = c^{ij}_k x^k.
  PoissonStructure lie_poisson() const {
    std::map<std::pair<int, int>, Expr> up;
    for (int i = 0; i < dim_; ++i)
      for (int j = i + 1; j < dim_; ++j) {
        Expr e;
        for (int k = 0; k < dim_; ++k)
          if (at(i, j, k) != 0.0)
            e = e + Expr::constant(at(i, j, k)) * Expr::var(k);
        if (!e.is_zero()) up[{i, j}] = e;
      }
    return PoissonStructure(dim_, std::move(up));
  }

 private:
  double& at(int i, int j, int k) {
    return c_[(static_cast<std::size_t>(i) * dim_ + j) * dim_ + k];
  }
  const double& at(int i, int j, int k) const {
    return c_[(static_cast<std::size_t>(i) * dim_ + j) * dim_ + k];
  }

  int dim_;
  std::vector<double> c_;
};

// K_j(v_1,..,v_j) = tr(ad v_1 ... ad v_j)
inline double K_form(const LieAlgebra& g,
                     std::span<const std::vector<double>> vs) {
  if (vs.empty()) throw std::invalid_argument("K_form needs j >= 1");
  Mat<double> p = g.ad(vs[0]);
  for (std::size_t i = 1; i < vs.size(); ++i) p = p * g.ad(vs[i]);
  return p.trace();
}

namespace detail {

// e_k via the Newton recursion j*e_j = sum_{i=1..j} (-1)^{i-1} e_{j-i} p_i
// from power sums p_i = tr(A^i). Works over double and Expr alike.
template <typename T>
T elementary_symmetric(const Mat<T>& a, int k) {
  std::vector<T> p(k + 1), e(k + 1);
  e[0] = T(1.0);
  Mat<T> pw = a;
  for (int i = 1; i <= k; ++i) {
    p[i] = pw.trace();
    if (i < k) pw = pw * a;
  }
  for (int j = 1; j <= k; ++j) {
    T acc{};
    for (int i = 1; i <= j; ++i) {
      T term = e[j - i] * p[i];
      acc = (i % 2 == 1) ? acc + term : acc - term;
    }
    e[j] = T(1.0 / j) * acc;
  }
  return e[k];
}

// Full symmetric polarization of e_k by inclusion-exclusion over subset
// sums: P(A_1..A_k) = (1/k!) sum_{S != {}} (-1)^{k-|S|} e_k(sum_S A_i).
template <typename T>
T polarized_elementary(std::span<const Mat<T>> as) {
  int k = static_cast<int>(as.size());
  int n = as[0].rows();
  double fact = 1.0;
  for (int i = 2; i <= k; ++i) fact *= i;
  T acc{};
  for (unsigned mask = 1; mask < (1u << k); ++mask) {
    Mat<T> sum(n, n);
    int bits = 0;
    for (int i = 0; i < k; ++i)
      if (mask & (1u << i)) {
        sum = sum + as[i];
        ++bits;
      }
    T ek = elementary_symmetric(sum, k);
    acc = ((k - bits) % 2 == 0) ? acc + ek : acc - ek;
  }
  return T(1.0 / fact) * acc;
}

template <typename T>
T sigma_polarized_impl(int k, std::span<const Mat<T>> as) {
  if (k < 1 || static_cast<int>(as.size()) != k)
    throw std::invalid_argument("sigma_polarized needs k matrices");
  int n = as[0].rows();
  for (const auto& a : as)
    if (a.rows() != n || a.cols() != n)
      throw std::invalid_argument("dimension mismatch");
  double scale = std::pow(2.0 * std::numbers::pi, -k);
  return T(scale) * polarized_elementary(as);
}

}  // namespace detail

inline double sigma_polarized(int k, std::span<const Mat<double>> as) {
  return detail::sigma_polarized_impl<double>(k, as);
}

namespace detail {

// Curvature matrices R_{dx^a, dx^b} as endomorphisms of the coframe
// fiber: entry (l, k) is R^{abk}_l, acting on covector components.
inline std::vector<Mat<Expr>> curvature_matrices(const TensorField& r, int m) {
  std::vector<Mat<Expr>> out(static_cast<std::size_t>(m) * m, Mat<Expr>(m, m));
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) {
      Mat<Expr>& mat = out[static_cast<std::size_t>(a) * m + b];
      for (int k = 0; k < m; ++k)
        for (int l = 0; l < m; ++l) mat(l, k) = r.at({a, b, k}, {l});
    }
  return out;
}

// Connection-difference matrix slot: entry (l, j) of L(dx^a) is G^{aj}_l.
inline Mat<Expr> lambda_matrix(const ConnectionSymbols& conn, int a) {
  int m = conn.dim();
  Mat<Expr> mat(m, m);
  for (int j = 0; j < m; ++j)
    for (int l = 0; l < m; ++l) mat(l, j) = conn.g(a, j, l);
  return mat;
}

inline void for_each_permutation(int n,
                                 const std::function<void(const std::vector<int>&, int)>& fn) {
  std::vector<int> perm(n);
  for (int i = 0; i < n; ++i) perm[i] = i;
  // Plain lexicographic enumeration with explicit sign tracking.
  std::vector<int> work;
  do {
    work = perm;
    int sign = 1;
    for (std::size_t i = 0; i < work.size(); ++i)
      for (std::size_t j = i + 1; j < work.size(); ++j)
        if (work[i] > work[j]) sign = -sign;
    fn(perm, sign);
  } while (std::next_permutation(perm.begin(), perm.end()));
}

inline const std::vector<std::pair<double, double>>& gauss_legendre01(int n) {
  // nodes/weights on [0,1] for n = 1..4
  static const std::vector<std::vector<std::pair<double, double>>> tables = {
      {},
      {{0.5, 1.0}},
      {{0.5 - 0.5 / std::sqrt(3.0), 0.5}, {0.5 + 0.5 / std::sqrt(3.0), 0.5}},
      {{0.5 - 0.5 * std::sqrt(3.0 / 5.0), 5.0 / 18.0},
       {0.5, 8.0 / 18.0},
       {0.5 + 0.5 * std::sqrt(3.0 / 5.0), 5.0 / 18.0}},
      {{0.5 - 0.5 * std::sqrt(3.0 / 7.0 + 2.0 / 7.0 * std::sqrt(6.0 / 5.0)),
        (18.0 - std::sqrt(30.0)) / 72.0},
       {0.5 - 0.5 * std::sqrt(3.0 / 7.0 - 2.0 / 7.0 * std::sqrt(6.0 / 5.0)),
        (18.0 + std::sqrt(30.0)) / 72.0},
       {0.5 + 0.5 * std::sqrt(3.0 / 7.0 - 2.0 / 7.0 * std::sqrt(6.0 / 5.0)),
        (18.0 + std::sqrt(30.0)) / 72.0},
       {0.5 + 0.5 * std::sqrt(3.0 / 7.0 + 2.0 / 7.0 * std::sqrt(6.0 / 5.0)),
        (18.0 - std::sqrt(30.0)) / 72.0}}};
  if (n < 1 || n > 4)
    throw std::invalid_argument("Gauss-Legendre table covers 1..4 nodes");
  return tables[static_cast<std::size_t>(n)];
}

}  // namespace detail

// lambda(R)(P_k)(a_1..a_2k) = sum_{s in S_2k} sign(s)
//   P_k(R_{a_s1,a_s2}, .., R_{a_s(2k-1),a_s(2k)}), assembled on increasing
// basis tuples. Returns the zero field when 2k > m.
inline MultiVectorField chern_weil(const PoissonStructure& pi,
                                   const ConnectionSymbols& conn, int k) {
  if (k < 1) throw std::invalid_argument("k must be >= 1");
  int m = pi.dim();
  MultiVectorField out(m, 2 * k);
  if (2 * k > m) return out;
  TensorField r = curvature(pi, conn);
  auto rmat = detail::curvature_matrices(r, m);
  detail::iterate_increasing(m, 2 * k, [&](const std::vector<int>& idx) {
    Expr acc;
    detail::for_each_permutation(2 * k, [&](const std::vector<int>& perm,
                                            int sign) {
      std::vector<Mat<Expr>> slots;
      slots.reserve(k);
      for (int s = 0; s < k; ++s) {
        int a = idx[perm[2 * s]], b = idx[perm[2 * s + 1]];
        slots.push_back(rmat[static_cast<std::size_t>(a) * m + b]);
      }
      Expr term = detail::sigma_polarized_impl<Expr>(
          k, std::span<const Mat<Expr>>(slots));
      acc = sign > 0 ? acc + term : acc - term;
    });
    if (!acc.is_zero()) out.set(idx, acc);
  });
  return out;
}

// lambda(G1,G0)(P_k)(a_1..a_{2k-1}) = k sum_{s} sign(s) int_0^1
//   P_k(L^{1,0}(a_s1), Xi^t(a_s2,a_s3), ..) dt  with L^t = t L1 + (1-t) L0
// and Xi^t the curvature of the interpolated symbols. The integrand is
// polynomial of degree <= 2k-2 in t, so k+1 Gauss-Legendre nodes is exact.
// Even k requires both connections flat (checked on a seeded sample).
inline MultiVectorField secondary_class(const PoissonStructure& pi,
                                        const ConnectionSymbols& conn1,
                                        const ConnectionSymbols& conn0,
                                        int k) {
  if (k < 1) throw std::invalid_argument("k must be >= 1");
  detail::require_dim(pi.dim(), conn1.dim());
  detail::require_dim(pi.dim(), conn0.dim());
  int m = pi.dim();
  MultiVectorField out(m, 2 * k - 1);
  if (2 * k - 1 > m) return out;

  if (k % 2 == 0) {
    auto pts = latin_hypercube(SampleRegion::cube(m), 100, 0);
    double r1 = curvature(pi, conn1).max_abs_at(pts);
    double r0 = curvature(pi, conn0).max_abs_at(pts);
    if (r1 > 1e-10 || r0 > 1e-10)
      throw std::invalid_argument(
          "even-k secondary classes need both connections flat");
  }

  // difference symbols and per-node interpolated curvature matrices
  ConnectionSymbols diff(m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      for (int l = 0; l < m; ++l)
        diff.g(i, j, l) = conn1.g(i, j, l) - conn0.g(i, j, l);

  const auto& nodes = detail::gauss_legendre01(k + 1);
  std::vector<std::vector<Mat<Expr>>> xi;
  xi.reserve(nodes.size());
  for (const auto& [t, w] : nodes) {
    (void)w;
    ConnectionSymbols interp(m);
    Expr et = Expr::constant(t), eot = Expr::constant(1.0 - t);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j)
        for (int l = 0; l < m; ++l)
          interp.g(i, j, l) = et * conn1.g(i, j, l) + eot * conn0.g(i, j, l);
    xi.push_back(detail::curvature_matrices(curvature(pi, interp), m));
  }

  std::vector<Mat<Expr>> lam(m);
  for (int a = 0; a < m; ++a) lam[a] = detail::lambda_matrix(diff, a);

  detail::iterate_increasing(m, 2 * k - 1, [&](const std::vector<int>& idx) {
    Expr acc;
    detail::for_each_permutation(
        2 * k - 1, [&](const std::vector<int>& perm, int sign) {
          Expr integral;
          for (std::size_t q = 0; q < nodes.size(); ++q) {
            std::vector<Mat<Expr>> slots;
            slots.reserve(k);
            slots.push_back(lam[idx[perm[0]]]);
            for (int s = 1; s < k; ++s) {
              int a = idx[perm[2 * s - 1]], b = idx[perm[2 * s]];
              slots.push_back(xi[q][static_cast<std::size_t>(a) * m + b]);
            }
            Expr val = detail::sigma_polarized_impl<Expr>(
                k, std::span<const Mat<Expr>>(slots));
            integral = integral + Expr::constant(nodes[q].second) * val;
          }
          acc = sign > 0 ? acc + integral : acc - integral;
        });
    acc = Expr::constant(static_cast<double>(k)) * acc;
    if (!acc.is_zero()) out.set(idx, acc);
  });
  return out;
}

// Closed Lie-Poisson forms: constant (2k-1)-vector fields
//   m_k(v_1..v_{2k-1}) = (1/(2pi)^k) sum_s sign(s)
//     K_k(v_s1, [v_s2,v_s3], .., [v_s(2k-2),v_s(2k-1)]).
inline MultiVectorField lie_poisson_mk(const LieAlgebra& g, int k) {
  if (k < 1) throw std::invalid_argument("k must be >= 1");
  int m = g.dim();
  MultiVectorField out(m, 2 * k - 1);
  if (2 * k - 1 > m) return out;
  double scale = std::pow(2.0 * std::numbers::pi, -k);
  detail::iterate_increasing(m, 2 * k - 1, [&](const std::vector<int>& idx) {
    double acc = 0.0;
    detail::for_each_permutation(
        2 * k - 1, [&](const std::vector<int>& perm, int sign) {
          std::vector<std::vector<double>> args;
          args.reserve(k);
          std::vector<double> v(m, 0.0);
          v[idx[perm[0]]] = 1.0;
          args.push_back(v);
          for (int s = 1; s < k; ++s) {
            std::vector<double> a(m, 0.0), b(m, 0.0);
            a[idx[perm[2 * s - 1]]] = 1.0;
            b[idx[perm[2 * s]]] = 1.0;
            args.push_back(g.bracket(a, b));
          }
          double kk = K_form(g, args);
          acc += sign * kk;
        });
    double val = scale * acc;
    if (val != 0.0) out.set(idx, Expr::constant(val));
  });
  return out;
}

// Builds D1 = canonical basic connection, D0 = levi_civita_contra(pi, g),
// mu = sqrt(det g), and returns the largest sampled deviation of
// lambda(D1, D0)(tr) from the modular field v_mu. "tr" is the unnormalized
// trace (2pi * P_1), so the comparison is against v_mu itself.
inline double modular_comparison(const PoissonStructure& pi, const Metric& g,
                                 std::span<const Point> pts) {
  detail::require_dim(pi.dim(), g.dim());
  int m = pi.dim();
  ConnectionSymbols d1 = canonical_poisson_connection(pi);
  ConnectionSymbols d0 = levi_civita_contra(pi, g);
  Expr weight = sqrt(det(g.matrix()));
  MultiVectorField vmu = modular_vector_field(pi, DensityField{weight});

  double worst = 0.0;
  for (int a = 0; a < m; ++a) {
    Expr tr;
    for (int i = 0; i < m; ++i) tr = tr + d1.g(a, i, i) - d0.g(a, i, i);
    Expr res = tr - vmu.component({a});
    for (const auto& p : pts) worst = std::max(worst, std::abs(res.eval(p)));
  }
  return worst;
}

inline double modular_comparison(const PoissonStructure& pi, const Metric& g,
                                 int n_samples = 100, std::uint64_t seed = 0) {
  auto pts = latin_hypercube(SampleRegion::cube(pi.dim()), n_samples, seed);
  return modular_comparison(pi, g, pts);
}

}  // namespace pg
