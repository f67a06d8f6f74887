// Poisson structures on a chart and the contravariant Cartan calculus:
// the anchor map #, Koszul bracket on 1-forms, hamiltonian fields, the
// contravariant differential delta, contraction and Lie derivative, # on
// higher forms, and the modular vector field.
//
// Conventions (see CONVENTIONS.md): pi^{ij} = {x^i, x^j} stored for i<j;
// (#a)^l = sum_k pi^{kl} a_k so that b(#a) = Pi(a,b); delta is the
// unnormalized Chevalley-Eilenberg sum; the wedge uses the determinant
// convention with no combinatorial prefactor. All types are immutable
// after construction and all operations are pure.
#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "pg/expr.hpp"
#include "pg/linalg.hpp"

namespace pg {

namespace detail {

// Sorts idx increasingly, returning the permutation sign, or 0 when an
// index repeats.
inline int normalize_index_tuple(std::vector<int>& idx) {
  int sign = 1;
  for (std::size_t i = 1; i < idx.size(); ++i) {
    std::size_t j = i;
    while (j > 0 && idx[j - 1] > idx[j]) {
      std::swap(idx[j - 1], idx[j]);
      sign = -sign;
      --j;
    }
  }
  for (std::size_t i = 1; i < idx.size(); ++i)
    if (idx[i] == idx[i - 1]) return 0;
  return sign;
}

// Alternating Expr-valued map on index tuples, stored sparsely on
// strictly increasing tuples.
class SkewTable {
 public:
  SkewTable() : dim_(0), degree_(0) {}
  SkewTable(int dim, int degree) : dim_(dim), degree_(degree) {
    if (dim < 1 || degree < 0)
      throw std::invalid_argument("bad skew table shape");
  }

  int dim() const { return dim_; }
  int degree() const { return degree_; }

  const std::map<std::vector<int>, Expr>& components() const { return comp_; }

  void set(std::vector<int> idx, Expr e) {
    check_tuple(idx);
    if (e.is_zero())
      comp_.erase(idx);
    else
      comp_[std::move(idx)] = std::move(e);
  }

  Expr component(std::span<const int> idx) const {
    if (static_cast<int>(idx.size()) != degree_)
      throw std::invalid_argument("index tuple length != degree");
    if (degree_ == 0) {
      auto it = comp_.find({});
      return it == comp_.end() ? Expr() : it->second;
    }
    std::vector<int> key(idx.begin(), idx.end());
    int sign = normalize_index_tuple(key);
    if (sign == 0) return Expr();
    auto it = comp_.find(key);
    if (it == comp_.end()) return Expr();
    return sign > 0 ? it->second : -it->second;
  }

  Expr component(std::initializer_list<int> idx) const {
    return component(std::span<const int>(idx.begin(), idx.size()));
  }

  bool empty() const { return comp_.empty(); }

  // Maximum |component| over a set of points (residual helper).
  double max_abs_at(std::span<const Point> pts) const {
    double r = 0.0;
    for (const auto& [idx, e] : comp_)
      for (const auto& p : pts) r = std::max(r, std::abs(e.eval(p)));
    return r;
  }

 private:
  void check_tuple(const std::vector<int>& idx) const {
    if (static_cast<int>(idx.size()) != degree_)
      throw std::invalid_argument("index tuple length != degree");
    for (std::size_t i = 0; i < idx.size(); ++i) {
      if (idx[i] < 0 || idx[i] >= dim_)
        throw std::invalid_argument("index out of range");
      if (i > 0 && idx[i] <= idx[i - 1])
        throw std::invalid_argument("indices must be strictly increasing");
    }
  }

  int dim_, degree_;
  std::map<std::vector<int>, Expr> comp_;
};

inline void iterate_increasing(int dim, int deg,
                               const std::function<void(const std::vector<int>&)>& fn) {
  std::vector<int> idx(deg);
  for (int i = 0; i < deg; ++i) idx[i] = i;
  if (deg == 0) {
    fn(idx);
    return;
  }
  if (deg > dim) return;
  for (;;) {
    fn(idx);
    int k = deg - 1;
    while (k >= 0 && idx[k] == dim - deg + k) --k;
    if (k < 0) return;
    ++idx[k];
    for (int j = k + 1; j < deg; ++j) idx[j] = idx[j - 1] + 1;
  }
}

}  // namespace detail

class MultiVectorField : public detail::SkewTable {
 public:
  using detail::SkewTable::SkewTable;
};

class DifferentialForm : public detail::SkewTable {
 public:
  using detail::SkewTable::SkewTable;
};

// A positive density mu = weight * dx^1 ^ ... ^ dx^m. Positivity is
// checked where the density is actually evaluated.
struct DensityField {
  Expr weight;

  static DensityField lebesgue() { return {Expr::constant(1.0)}; }
};

class PoissonStructure {
 public:
  PoissonStructure(int dim, std::map<std::pair<int, int>, Expr> upper)
      : dim_(dim), grid_(static_cast<std::size_t>(dim) * dim) {
    if (dim < 1) throw std::invalid_argument("dimension must be positive");
    for (auto& [ij, e] : upper) {
      auto [i, j] = ij;
      if (i < 0 || j >= dim || i >= j)
        throw std::invalid_argument("poisson components need 0 <= i < j < dim");
      grid_[static_cast<std::size_t>(i) * dim + j] = e;
      grid_[static_cast<std::size_t>(j) * dim + i] = -e;
    }
  }

  int dim() const { return dim_; }

  // pi^{ij} with the antisymmetric extension; zero on the diagonal.
  const Expr& entry(int i, int j) const {
    return grid_[static_cast<std::size_t>(i) * dim_ + j];
  }

  MultiVectorField bivector() const {
    MultiVectorField q(dim_, 2);
    for (int i = 0; i < dim_; ++i)
      for (int j = i + 1; j < dim_; ++j)
        if (!entry(i, j).is_zero()) q.set({i, j}, entry(i, j));
    return q;
  }

  Mat<double> value_at(const Point& p) const;

 private:
  int dim_;
  std::vector<Expr> grid_;
};

namespace detail {

inline void require_dim(int a, int b) {
  if (a != b) throw std::invalid_argument("dimension mismatch");
}

// Coefficients of a 1-form (or covector field) as a dense Expr vector.
inline std::vector<Expr> form_coeffs(const DifferentialForm& a) {
  if (a.degree() != 1) throw std::invalid_argument("expected a 1-form");
  std::vector<Expr> c(a.dim());
  for (int i = 0; i < a.dim(); ++i) c[i] = a.component({i});
  return c;
}

inline DifferentialForm form_from_coeffs(const std::vector<Expr>& c) {
  DifferentialForm a(static_cast<int>(c.size()), 1);
  for (int i = 0; i < static_cast<int>(c.size()); ++i)
    if (!c[i].is_zero()) a.set({i}, c[i]);
  return a;
}

// #a as a dense component vector: (#a)^l = sum_k pi^{kl} a_k.
inline std::vector<Expr> sharp_coeffs(const PoissonStructure& pi,
                                      const std::vector<Expr>& a) {
  std::vector<Expr> v(pi.dim());
  for (int l = 0; l < pi.dim(); ++l) {
    Expr s;
    for (int k = 0; k < pi.dim(); ++k) s = s + pi.entry(k, l) * a[k];
    v[l] = s;
  }
  return v;
}

// Directional derivative #a(f).
inline Expr sharp_apply(const PoissonStructure& pi, const std::vector<Expr>& a,
                        const Expr& f) {
  Expr s;
  for (int l = 0; l < pi.dim(); ++l) {
    Expr fl = f.diff(l);
    if (fl.is_zero()) continue;
    Expr vl;
    for (int k = 0; k < pi.dim(); ++k) vl = vl + pi.entry(k, l) * a[k];
    s = s + vl * fl;
  }
  return s;
}

// Koszul bracket of two 1-forms, componentwise:
//   [a,b]_k = (#a)^l d_l b_k - (#b)^l d_l a_k + a_r b_l d_k pi^{rl}.
inline std::vector<Expr> koszul_coeffs(const PoissonStructure& pi,
                                       const std::vector<Expr>& a,
                                       const std::vector<Expr>& b) {
  int m = pi.dim();
  std::vector<Expr> sa = sharp_coeffs(pi, a), sb = sharp_coeffs(pi, b);
  std::vector<Expr> out(m);
  for (int k = 0; k < m; ++k) {
    Expr s;
    for (int l = 0; l < m; ++l) {
      s = s + sa[l] * b[k].diff(l) - sb[l] * a[k].diff(l);
    }
    for (int r = 0; r < m; ++r)
      for (int l = 0; l < m; ++l) {
        const Expr& prl = pi.entry(r, l);
        if (prl.is_zero()) continue;
        Expr d = prl.diff(k);
        if (d.is_zero()) continue;
        s = s + a[r] * b[l] * d;
      }
    out[k] = s;
  }
  return out;
}

// Q evaluated with a general 1-form in the first slot and basis covectors
// in the remaining slots.
inline Expr slot_form_component(const SkewTable& q, const std::vector<Expr>& w,
                                std::span<const int> rest) {
  Expr s;
  std::vector<int> idx(rest.size() + 1);
  std::copy(rest.begin(), rest.end(), idx.begin() + 1);
  for (int l = 0; l < q.dim(); ++l) {
    if (w[l].is_zero()) continue;
    idx[0] = l;
    Expr c = q.component(idx);
    if (!c.is_zero()) s = s + w[l] * c;
  }
  return s;
}

}  // namespace detail

// --- anchor map and brackets -------------------------------------------

inline MultiVectorField sharp(const PoissonStructure& pi,
                              const DifferentialForm& alpha) {
  detail::require_dim(pi.dim(), alpha.dim());
  auto v = detail::sharp_coeffs(pi, detail::form_coeffs(alpha));
  MultiVectorField out(pi.dim(), 1);
  for (int l = 0; l < pi.dim(); ++l)
    if (!v[l].is_zero()) out.set({l}, v[l]);
  return out;
}

inline Expr poisson_bracket(const PoissonStructure& pi, const Expr& f,
                            const Expr& g) {
  Expr s;
  for (int k = 0; k < pi.dim(); ++k)
    for (int l = k + 1; l < pi.dim(); ++l) {
      const Expr& pkl = pi.entry(k, l);
      if (pkl.is_zero()) continue;
      s = s + pkl * (f.diff(k) * g.diff(l) - f.diff(l) * g.diff(k));
    }
  return s;
}

inline DifferentialForm differential(int dim, const Expr& f) {
  DifferentialForm df(dim, 1);
  for (int i = 0; i < dim; ++i) {
    Expr d = f.diff(i);
    if (!d.is_zero()) df.set({i}, d);
  }
  return df;
}

inline MultiVectorField hamiltonian_field(const PoissonStructure& pi,
                                          const Expr& f) {
  return sharp(pi, differential(pi.dim(), f));
}

inline DifferentialForm koszul_bracket(const PoissonStructure& pi,
                                       const DifferentialForm& alpha,
                                       const DifferentialForm& beta) {
  detail::require_dim(pi.dim(), alpha.dim());
  detail::require_dim(pi.dim(), beta.dim());
  return detail::form_from_coeffs(detail::koszul_coeffs(
      pi, detail::form_coeffs(alpha), detail::form_coeffs(beta)));
}

// --- jacobiator ----------------------------------------------------------

// J^{ijk} = sum_l pi^{li} d_l pi^{jk} + pi^{lj} d_l pi^{ki} + pi^{lk} d_l pi^{ij};
// vanishes identically iff pi is Poisson.
inline MultiVectorField jacobiator(const PoissonStructure& pi) {
  int m = pi.dim();
  MultiVectorField j(m, 3);
  if (m < 3) return j;
  detail::iterate_increasing(m, 3, [&](const std::vector<int>& idx) {
    int a = idx[0], b = idx[1], c = idx[2];
    Expr s;
    for (int l = 0; l < m; ++l) {
      s = s + pi.entry(l, a) * pi.entry(b, c).diff(l);
      s = s + pi.entry(l, b) * pi.entry(c, a).diff(l);
      s = s + pi.entry(l, c) * pi.entry(a, b).diff(l);
    }
    if (!s.is_zero()) j.set({a, b, c}, s);
  });
  return j;
}

// --- contravariant differential ------------------------------------------

// Unnormalized Chevalley-Eilenberg differential on multivector fields:
//   dQ(a_0..a_r) = sum_k (-1)^k #a_k(Q(..a_k^..))
//                + sum_{k<l} (-1)^{k+l} Q([a_k,a_l], ..a_k^..a_l^..).
inline MultiVectorField contravariant_differential(const PoissonStructure& pi,
                                                   const MultiVectorField& q) {
  detail::require_dim(pi.dim(), q.dim());
  int m = pi.dim();
  int r = q.degree();
  MultiVectorField out(m, r + 1);
  if (r + 1 > m) return out;

  detail::iterate_increasing(m, r + 1, [&](const std::vector<int>& idx) {
    Expr s;
    std::vector<int> sub(r);
    std::vector<Expr> basis(m);
    for (int k = 0; k <= r; ++k) {
      int pos = 0;
      for (int i = 0; i <= r; ++i)
        if (i != k) sub[pos++] = idx[i];
      Expr inner = q.component(sub);
      if (!inner.is_zero()) {
        // #dx^{i_k}(inner)
        Expr term;
        for (int l = 0; l < m; ++l) {
          Expr d = inner.diff(l);
          if (d.is_zero()) continue;
          term = term + pi.entry(idx[k], l) * d;
        }
        s = (k % 2 == 0) ? s + term : s - term;
      }
    }
    std::vector<int> rest(r - 1 >= 0 ? r - 1 : 0);
    for (int k = 0; k <= r; ++k)
      for (int l = k + 1; l <= r; ++l) {
        // [dx^{i_k}, dx^{i_l}] = d_s(pi^{i_k i_l}) dx^s
        const Expr& pkl = pi.entry(idx[k], idx[l]);
        int pos = 0;
        for (int i = 0; i <= r; ++i)
          if (i != k && i != l) rest[pos++] = idx[i];
        Expr term;
        for (int sidx = 0; sidx < m; ++sidx) {
          Expr coeff = pkl.diff(sidx);
          if (coeff.is_zero()) continue;
          std::vector<int> whole(r);
          whole[0] = sidx;
          std::copy(rest.begin(), rest.begin() + (r - 1), whole.begin() + 1);
          Expr c = q.component(whole);
          if (!c.is_zero()) term = term + coeff * c;
        }
        s = ((k + l) % 2 == 0) ? s + term : s - term;
      }
    if (!s.is_zero()) out.set(idx, s);
  });
  return out;
}

// --- contraction and Lie derivative ---------------------------------------

inline MultiVectorField contract(const DifferentialForm& alpha,
                                 const MultiVectorField& q) {
  detail::require_dim(alpha.dim(), q.dim());
  if (q.degree() < 1) throw std::invalid_argument("contract needs degree >= 1");
  auto a = detail::form_coeffs(alpha);
  MultiVectorField out(q.dim(), q.degree() - 1);
  detail::iterate_increasing(q.dim(), q.degree() - 1,
                             [&](const std::vector<int>& idx) {
                               Expr s = detail::slot_form_component(q, a, idx);
                               if (!s.is_zero()) out.set(idx, s);
                             });
  return out;
}

inline MultiVectorField lie_derivative(const PoissonStructure& pi,
                                       const DifferentialForm& alpha,
                                       const MultiVectorField& q) {
  detail::require_dim(pi.dim(), alpha.dim());
  detail::require_dim(pi.dim(), q.dim());
  int m = pi.dim();
  int r = q.degree();
  auto a = detail::form_coeffs(alpha);
  // [alpha, dx^j] once per j
  std::vector<std::vector<Expr>> bracket_with_basis(m);
  for (int j = 0; j < m; ++j) {
    std::vector<Expr> dxj(m);
    dxj[j] = Expr::constant(1.0);
    bracket_with_basis[j] = detail::koszul_coeffs(pi, a, dxj);
  }
  MultiVectorField out(m, r);
  detail::iterate_increasing(m, r, [&](const std::vector<int>& idx) {
    Expr s = detail::sharp_apply(pi, a, q.component(idx));
    std::vector<int> work(idx);
    for (int k = 0; k < r; ++k) {
      const auto& br = bracket_with_basis[idx[k]];
      // Q(idx with slot k replaced by the 1-form [alpha, dx^{i_k}])
      Expr term;
      for (int l = 0; l < m; ++l) {
        if (br[l].is_zero()) continue;
        work[k] = l;
        Expr c = q.component(work);
        if (!c.is_zero()) term = term + br[l] * c;
      }
      work[k] = idx[k];
      s = s - term;
    }
    if (!s.is_zero()) out.set(idx, s);
  });
  return out;
}

// --- # on forms of any degree and the de Rham differential -----------------

// (#lambda)(a_1..a_r) = (-1)^r lambda(#a_1, .., #a_r); for r = 1 this
// coincides with the anchor map.
inline MultiVectorField sharp_form(const PoissonStructure& pi,
                                   const DifferentialForm& lambda) {
  detail::require_dim(pi.dim(), lambda.dim());
  int m = pi.dim();
  int r = lambda.degree();
  MultiVectorField out(m, r);
  if (r == 0) {
    Expr c = lambda.component(std::span<const int>{});
    if (!c.is_zero()) out.set({}, c);
    return out;
  }
  int sign = (r % 2 == 0) ? 1 : -1;
  detail::iterate_increasing(m, r, [&](const std::vector<int>& idx) {
    // lambda(#dx^{i_1}, .., #dx^{i_r}) expanded multilinearly
    Expr s;
    std::vector<int> jdx(r, 0);
    for (;;) {
      Expr coeff = Expr::constant(1.0);
      bool dead = false;
      for (int a = 0; a < r && !dead; ++a) {
        const Expr& p = pi.entry(idx[a], jdx[a]);
        if (p.is_zero()) dead = true;
        coeff = coeff * p;
      }
      if (!dead) {
        Expr lam = lambda.component(jdx);
        if (!lam.is_zero()) s = s + coeff * lam;
      }
      int k = r - 1;
      while (k >= 0 && jdx[k] == m - 1) jdx[k--] = 0;
      if (k < 0) break;
      ++jdx[k];
    }
    if (!s.is_zero()) out.set(idx, sign > 0 ? s : -s);
  });
  return out;
}

inline DifferentialForm de_rham(const DifferentialForm& lambda) {
  int m = lambda.dim();
  int r = lambda.degree();
  DifferentialForm out(m, r + 1);
  if (r + 1 > m) return out;
  detail::iterate_increasing(m, r + 1, [&](const std::vector<int>& idx) {
    Expr s;
    std::vector<int> sub(r);
    for (int k = 0; k <= r; ++k) {
      int pos = 0;
      for (int i = 0; i <= r; ++i)
        if (i != k) sub[pos++] = idx[i];
      Expr d = lambda.component(sub).diff(idx[k]);
      if (d.is_zero()) continue;
      s = (k % 2 == 0) ? s + d : s - d;
    }
    if (!s.is_zero()) out.set(idx, s);
  });
  return out;
}

// --- wedge (determinant convention, no prefactor) --------------------------

namespace detail {

template <typename Table>
Table wedge_impl(const Table& a, const Table& b) {
  require_dim(a.dim(), b.dim());
  int m = a.dim();
  int r = a.degree(), s = b.degree();
  Table out(m, r + s);
  if (r + s > m) return out;
  iterate_increasing(m, r + s, [&](const std::vector<int>& idx) {
    // sum over (r,s) shuffles of idx
    Expr acc;
    std::vector<int> left, right;
    std::vector<char> mask(r + s, 0);
    // iterate subsets of size r via combination indices into idx
    std::vector<int> c(r);
    for (int i = 0; i < r; ++i) c[i] = i;
    bool more = r >= 0;
    if (r == 0) {
      acc = a.component(std::span<const int>{}) * b.component(idx);
      if (!acc.is_zero()) out.set(idx, acc);
      return;
    }
    while (more) {
      std::fill(mask.begin(), mask.end(), 0);
      left.clear();
      right.clear();
      for (int i = 0; i < r; ++i) mask[c[i]] = 1;
      int inversions = 0;
      for (int i = 0; i < r + s; ++i)
        (mask[i] ? left : right).push_back(idx[i]);
      // shuffle sign: count pairs (i in right before j in left positions)
      {
        int seen_right = 0;
        for (int i = 0; i < r + s; ++i) {
          if (mask[i])
            inversions += seen_right;
          else
            ++seen_right;
        }
      }
      Expr term = a.component(left) * b.component(right);
      if (!term.is_zero())
        acc = (inversions % 2 == 0) ? acc + term : acc - term;
      // next combination
      int k = r - 1;
      while (k >= 0 && c[k] == r + s - r + k) --k;
      if (k < 0) {
        more = false;
      } else {
        ++c[k];
        for (int j = k + 1; j < r; ++j) c[j] = c[j - 1] + 1;
      }
    }
    if (!acc.is_zero()) out.set(idx, acc);
  });
  return out;
}

}  // namespace detail

inline MultiVectorField wedge(const MultiVectorField& a,
                              const MultiVectorField& b) {
  return detail::wedge_impl(a, b);
}

inline DifferentialForm wedge(const DifferentialForm& a,
                              const DifferentialForm& b) {
  return detail::wedge_impl(a, b);
}

// Commutator of vector fields, [X,Y]^i = X^l d_l Y^i - Y^l d_l X^i.
inline MultiVectorField vector_commutator(const MultiVectorField& x,
                                          const MultiVectorField& y) {
  detail::require_dim(x.dim(), y.dim());
  if (x.degree() != 1 || y.degree() != 1)
    throw std::invalid_argument("commutator expects vector fields");
  int m = x.dim();
  MultiVectorField out(m, 1);
  for (int i = 0; i < m; ++i) {
    Expr s;
    for (int l = 0; l < m; ++l) {
      s = s + x.component({l}) * y.component({i}).diff(l) -
          y.component({l}) * x.component({i}).diff(l);
    }
    if (!s.is_zero()) out.set({i}, s);
  }
  return out;
}

// --- modular vector field ---------------------------------------------------

// v_mu(f) = div_mu(X_f); in coordinates
//   v^i = sum_j d_j pi^{ij} + pi^{ij} (d_j w)/w   for mu = w dx^1..dx^m.
// The sign is pinned by the m_1 = (1/2pi) mod(M) calibration.
inline MultiVectorField modular_vector_field(const PoissonStructure& pi,
                                             const DensityField& mu) {
  int m = pi.dim();
  MultiVectorField v(m, 1);
  for (int i = 0; i < m; ++i) {
    Expr s;
    for (int j = 0; j < m; ++j) {
      const Expr& pij = pi.entry(i, j);
      if (pij.is_zero()) continue;
      s = s + pij.diff(j);
      Expr dw = mu.weight.diff(j);
      if (!dw.is_zero()) s = s + pij * (dw / mu.weight);
    }
    if (!s.is_zero()) v.set({i}, s);
  }
  return v;
}

inline Mat<double> PoissonStructure::value_at(const Point& p) const {
  Mat<double> m(dim_, dim_);
  for (int i = 0; i < dim_; ++i)
    for (int j = 0; j < dim_; ++j)
      if (!entry(i, j).is_zero()) m(i, j) = entry(i, j).eval(p);
  return m;
}

}  // namespace pg
