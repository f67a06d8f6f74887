// Linear contravariant connections on a single chart, given by symbols
// G^{ij}_k with D_{dx^i} dx^j = G^{ij}_k dx^k. Provides the contravariant
// derivative of (r,s) tensor fields, torsion and curvature in both the
// operator and the coordinate form, symmetrization, and the stock
// constructions: the canonical Poisson (basic) connection, the flat
// connection, and the one induced by a riemannian metric.
#pragma once

#include <map>
#include <span>
#include <stdexcept>
#include <vector>

#include "pg/fields.hpp"

namespace pg {

// Dense (r,s) tensor field with Expr components K^{i1..ir}_{j1..js}.
class TensorField {
 public:
  TensorField(int rank_contra, int rank_cov, int dim)
      : r_(rank_contra), s_(rank_cov), dim_(dim) {
    if (dim < 1 || r_ < 0 || s_ < 0)
      throw std::invalid_argument("bad tensor shape");
    std::size_t n = 1;
    for (int i = 0; i < r_ + s_; ++i) n *= static_cast<std::size_t>(dim);
    comp_.assign(n, Expr());
  }

  int rank_contra() const { return r_; }
  int rank_cov() const { return s_; }
  int dim() const { return dim_; }

  Expr& at(std::span<const int> upper, std::span<const int> lower) {
    return comp_[offset(upper, lower)];
  }
  const Expr& at(std::span<const int> upper, std::span<const int> lower) const {
    return comp_[offset(upper, lower)];
  }
  Expr& at(std::initializer_list<int> upper, std::initializer_list<int> lower) {
    return comp_[offset({upper.begin(), upper.size()},
                        {lower.begin(), lower.size()})];
  }
  const Expr& at(std::initializer_list<int> upper,
                 std::initializer_list<int> lower) const {
    return comp_[offset({upper.begin(), upper.size()},
                        {lower.begin(), lower.size()})];
  }

  const std::vector<Expr>& raw() const { return comp_; }
  std::vector<Expr>& raw() { return comp_; }

  double max_abs_at(std::span<const Point> pts) const {
    double r = 0.0;
    for (const auto& e : comp_) {
      if (e.is_zero()) continue;
      for (const auto& p : pts) r = std::max(r, std::abs(e.eval(p)));
    }
    return r;
  }

 private:
  std::size_t offset(std::span<const int> upper,
                     std::span<const int> lower) const {
    if (static_cast<int>(upper.size()) != r_ ||
        static_cast<int>(lower.size()) != s_)
      throw std::invalid_argument("tensor index arity mismatch");
    std::size_t o = 0;
    for (int u : upper) o = o * dim_ + static_cast<std::size_t>(u);
    for (int l : lower) o = o * dim_ + static_cast<std::size_t>(l);
    return o;
  }

  int r_, s_, dim_;
  std::vector<Expr> comp_;
};

enum class ConnKind { canonical_poisson, flat, levi_civita, explicit_symbols };

class ConnectionSymbols {
 public:
  ConnectionSymbols(int dim, ConnKind kind = ConnKind::explicit_symbols)
      : dim_(dim), kind_(kind),
        gamma_(static_cast<std::size_t>(dim) * dim * dim) {}

  int dim() const { return dim_; }
  ConnKind kind() const { return kind_; }

  // D_{dx^i} dx^j = G^{ij}_k dx^k
  Expr& g(int i, int j, int k) {
    return gamma_[(static_cast<std::size_t>(i) * dim_ + j) * dim_ + k];
  }
  const Expr& g(int i, int j, int k) const {
    return gamma_[(static_cast<std::size_t>(i) * dim_ + j) * dim_ + k];
  }

 private:
  int dim_;
  ConnKind kind_;
  std::vector<Expr> gamma_;
};

class Metric {
 public:
  Metric(int dim, std::map<std::pair<int, int>, Expr> upper_or_diag)
      : dim_(dim), g_(static_cast<std::size_t>(dim) * dim) {
    for (auto& [ij, e] : upper_or_diag) {
      auto [i, j] = ij;
      if (i < 0 || j < 0 || i >= dim || j >= dim || i > j)
        throw std::invalid_argument("metric components need 0 <= i <= j < dim");
      g_[static_cast<std::size_t>(i) * dim + j] = e;
      g_[static_cast<std::size_t>(j) * dim + i] = e;
    }
  }

  static Metric euclidean(int dim) {
    std::map<std::pair<int, int>, Expr> d;
    for (int i = 0; i < dim; ++i) d[{i, i}] = Expr::constant(1.0);
    return Metric(dim, std::move(d));
  }

  int dim() const { return dim_; }
  const Expr& entry(int i, int j) const {
    return g_[static_cast<std::size_t>(i) * dim_ + j];
  }

  Mat<Expr> matrix() const {
    Mat<Expr> m(dim_, dim_);
    for (int i = 0; i < dim_; ++i)
      for (int j = 0; j < dim_; ++j) m(i, j) = entry(i, j);
    return m;
  }

 private:
  int dim_;
  std::vector<Expr> g_;
};

// --- derivative of tensor fields -------------------------------------------

// (D_a K)^I_J = pi^{kl} a_k d_l K^I_J
//             - sum_a G^{k i_a}_l a_k K^{..l..}_J
//             + sum_b G^{k l}_{j_b} a_k K^I_{..l..}
inline TensorField contra_derivative(const PoissonStructure& pi,
                                     const ConnectionSymbols& conn,
                                     const DifferentialForm& alpha,
                                     const TensorField& k) {
  detail::require_dim(pi.dim(), conn.dim());
  detail::require_dim(pi.dim(), alpha.dim());
  detail::require_dim(pi.dim(), k.dim());
  int m = pi.dim();
  int r = k.rank_contra(), s = k.rank_cov();
  auto a = detail::form_coeffs(alpha);

  TensorField out(r, s, m);
  std::vector<int> upper(r), lower(s);
  std::vector<int> work;
  std::function<void(int)> walk = [&](int depth) {
    if (depth < r + s) {
      for (int v = 0; v < m; ++v) {
        if (depth < r)
          upper[depth] = v;
        else
          lower[depth - r] = v;
        walk(depth + 1);
      }
      return;
    }
    const Expr& kc = k.at(upper, lower);
    Expr acc;
    // transport term pi^{kl} a_k d_l K
    if (!kc.is_zero())
      for (int l = 0; l < m; ++l) {
        Expr d = kc.diff(l);
        if (d.is_zero()) continue;
        for (int kk = 0; kk < m; ++kk) {
          const Expr& p = pi.entry(kk, l);
          if (p.is_zero() || a[kk].is_zero()) continue;
          acc = acc + p * a[kk] * d;
        }
      }
    // upper slots
    for (int slot = 0; slot < r; ++slot) {
      int save = upper[slot];
      for (int l = 0; l < m; ++l) {
        upper[slot] = l;
        const Expr& kl = k.at(upper, lower);
        if (!kl.is_zero())
          for (int kk = 0; kk < m; ++kk) {
            const Expr& gam = conn.g(kk, save, l);
            if (gam.is_zero() || a[kk].is_zero()) continue;
            acc = acc - gam * a[kk] * kl;
          }
      }
      upper[slot] = save;
    }
    // lower slots
    for (int slot = 0; slot < s; ++slot) {
      int save = lower[slot];
      for (int l = 0; l < m; ++l) {
        lower[slot] = l;
        const Expr& kl = k.at(upper, lower);
        if (!kl.is_zero())
          for (int kk = 0; kk < m; ++kk) {
            const Expr& gam = conn.g(kk, l, save);
            if (gam.is_zero() || a[kk].is_zero()) continue;
            acc = acc + gam * a[kk] * kl;
          }
      }
      lower[slot] = save;
    }
    out.at(upper, lower) = acc;
  };
  walk(0);
  return out;
}

// Specialization to 1-forms: (D_a b)_i = pi^{kl} a_k d_l b_i + G^{kl}_i a_k b_l.
inline DifferentialForm contra_derivative_form(const PoissonStructure& pi,
                                               const ConnectionSymbols& conn,
                                               const DifferentialForm& alpha,
                                               const DifferentialForm& beta) {
  detail::require_dim(pi.dim(), conn.dim());
  int m = pi.dim();
  auto a = detail::form_coeffs(alpha);
  auto b = detail::form_coeffs(beta);
  std::vector<Expr> out(m);
  for (int i = 0; i < m; ++i) {
    Expr acc;
    for (int k = 0; k < m; ++k) {
      if (a[k].is_zero()) continue;
      for (int l = 0; l < m; ++l) {
        const Expr& p = pi.entry(k, l);
        Expr db = b[i].diff(l);
        if (!p.is_zero() && !db.is_zero()) acc = acc + p * a[k] * db;
        const Expr& gam = conn.g(k, l, i);
        if (!gam.is_zero() && !b[l].is_zero()) acc = acc + gam * a[k] * b[l];
      }
    }
    out[i] = acc;
  }
  return detail::form_from_coeffs(out);
}

// --- torsion and curvature ---------------------------------------------------

// T^{ij}_k = G^{ij}_k - G^{ji}_k - d pi^{ij} / d x^k
inline TensorField torsion(const PoissonStructure& pi,
                           const ConnectionSymbols& conn) {
  detail::require_dim(pi.dim(), conn.dim());
  int m = pi.dim();
  TensorField t(2, 1, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      for (int k = 0; k < m; ++k)
        t.at({i, j}, {k}) =
            conn.g(i, j, k) - conn.g(j, i, k) - pi.entry(i, j).diff(k);
  return t;
}

// R^{ijk}_l = G^{ir}_l G^{jk}_r - G^{jr}_l G^{ik}_r
//           + pi^{ir} d_r G^{jk}_l - pi^{jr} d_r G^{ik}_l
//           - (d_r pi^{ij}) G^{rk}_l
inline TensorField curvature(const PoissonStructure& pi,
                             const ConnectionSymbols& conn) {
  detail::require_dim(pi.dim(), conn.dim());
  int m = pi.dim();
  TensorField rt(3, 1, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      for (int k = 0; k < m; ++k)
        for (int l = 0; l < m; ++l) {
          Expr acc;
          for (int r = 0; r < m; ++r) {
            acc = acc + conn.g(i, r, l) * conn.g(j, k, r) -
                  conn.g(j, r, l) * conn.g(i, k, r);
            const Expr& pir = pi.entry(i, r);
            if (!pir.is_zero()) acc = acc + pir * conn.g(j, k, l).diff(r);
            const Expr& pjr = pi.entry(j, r);
            if (!pjr.is_zero()) acc = acc - pjr * conn.g(i, k, l).diff(r);
            Expr dpi = pi.entry(i, j).diff(r);
            if (!dpi.is_zero()) acc = acc - dpi * conn.g(r, k, l);
          }
          rt.at({i, j, k}, {l}) = acc;
        }
  return rt;
}

// T(a,b) = D_a b - D_b a - [a,b]
inline DifferentialForm torsion_operator(const PoissonStructure& pi,
                                         const ConnectionSymbols& conn,
                                         const DifferentialForm& alpha,
                                         const DifferentialForm& beta) {
  DifferentialForm dab = contra_derivative_form(pi, conn, alpha, beta);
  DifferentialForm dba = contra_derivative_form(pi, conn, beta, alpha);
  DifferentialForm kos = koszul_bracket(pi, alpha, beta);
  std::vector<Expr> out(pi.dim());
  for (int i = 0; i < pi.dim(); ++i)
    out[i] = dab.component({i}) - dba.component({i}) - kos.component({i});
  return detail::form_from_coeffs(out);
}

// R(a,b)c = D_a D_b c - D_b D_a c - D_{[a,b]} c
inline DifferentialForm curvature_operator(const PoissonStructure& pi,
                                           const ConnectionSymbols& conn,
                                           const DifferentialForm& alpha,
                                           const DifferentialForm& beta,
                                           const DifferentialForm& gamma) {
  DifferentialForm dbg = contra_derivative_form(pi, conn, beta, gamma);
  DifferentialForm dag = contra_derivative_form(pi, conn, alpha, gamma);
  DifferentialForm t1 = contra_derivative_form(pi, conn, alpha, dbg);
  DifferentialForm t2 = contra_derivative_form(pi, conn, beta, dag);
  DifferentialForm kos = koszul_bracket(pi, alpha, beta);
  DifferentialForm t3 = contra_derivative_form(pi, conn, kos, gamma);
  std::vector<Expr> out(pi.dim());
  for (int i = 0; i < pi.dim(); ++i)
    out[i] = t1.component({i}) - t2.component({i}) - t3.component({i});
  return detail::form_from_coeffs(out);
}

// --- constructions -----------------------------------------------------------

// *G^{ij}_k = (G^{ij}_k + G^{ji}_k + d_k pi^{ij}) / 2: zero torsion, same
// geodesics.
inline ConnectionSymbols symmetrize(const PoissonStructure& pi,
                                    const ConnectionSymbols& conn) {
  detail::require_dim(pi.dim(), conn.dim());
  int m = pi.dim();
  ConnectionSymbols out(m, ConnKind::explicit_symbols);
  Expr half = Expr::constant(0.5);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      for (int k = 0; k < m; ++k)
        out.g(i, j, k) =
            half * (conn.g(i, j, k) + conn.g(j, i, k) + pi.entry(i, j).diff(k));
  return out;
}

// G^{ij}_k = d pi^{ij} / d x^k; on a chart this is at once a Poisson
// connection (D Pi = 0) and the basic connection D_{dx^i} b = [dx^i, b].
inline ConnectionSymbols canonical_poisson_connection(
    const PoissonStructure& pi) {
  int m = pi.dim();
  ConnectionSymbols out(m, ConnKind::canonical_poisson);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      const Expr& pij = pi.entry(i, j);
      if (pij.is_zero()) continue;
      for (int k = 0; k < m; ++k) out.g(i, j, k) = pij.diff(k);
    }
  return out;
}

inline ConnectionSymbols flat_connection(int dim) {
  return ConnectionSymbols(dim, ConnKind::flat);
}

// Covariant Levi-Civita symbols C^j_{lk} of a metric, from the symbolic
// adjugate inverse.
inline std::vector<Expr> covariant_levi_civita(const Metric& g) {
  int m = g.dim();
  Mat<Expr> gm = g.matrix();
  Expr dg = det(gm);
  Mat<Expr> ginv_num =
      m == 1 ? Mat<Expr>::identity(1, Expr::constant(1.0)) : adjugate(gm);
  auto ginv = [&](int i, int j) { return ginv_num(i, j) / dg; };
  std::vector<Expr> c(static_cast<std::size_t>(m) * m * m);
  auto at = [&](int j, int l, int k) -> Expr& {
    return c[(static_cast<std::size_t>(j) * m + l) * m + k];
  };
  Expr half = Expr::constant(0.5);
  for (int j = 0; j < m; ++j)
    for (int l = 0; l < m; ++l)
      for (int k = l; k < m; ++k) {
        Expr s;
        for (int n = 0; n < m; ++n) {
          Expr inner = g.entry(n, k).diff(l) + g.entry(n, l).diff(k) -
                       g.entry(l, k).diff(n);
          if (!inner.is_zero()) s = s + ginv(j, n) * inner;
        }
        at(j, l, k) = half * s;
        at(j, k, l) = at(j, l, k);
      }
  return c;
}

// Contravariant connection induced by the Levi-Civita connection of g,
// D_a = nabla_{#a} on 1-forms. Since nabla_{d_l} dx^j = -C^j_{lk} dx^k,
// the symbols are G^{ij}_k = -sum_l pi^{il} C^j_{lk}.
inline ConnectionSymbols levi_civita_contra(const PoissonStructure& pi,
                                            const Metric& g) {
  detail::require_dim(pi.dim(), g.dim());
  int m = pi.dim();
  std::vector<Expr> cov = covariant_levi_civita(g);
  auto c = [&](int j, int l, int k) -> const Expr& {
    return cov[(static_cast<std::size_t>(j) * m + l) * m + k];
  };
  ConnectionSymbols out(m, ConnKind::levi_civita);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      for (int k = 0; k < m; ++k) {
        Expr s;
        for (int l = 0; l < m; ++l) {
          const Expr& pil = pi.entry(i, l);
          if (pil.is_zero() || c(j, l, k).is_zero()) continue;
          s = s - pil * c(j, l, k);
        }
        out.g(i, j, k) = s;
      }
  return out;
}

// D Pi as a (3,0) tensor: (D Pi)^{kij} = (D_{dx^k} Pi)^{ij}. Zero iff the
// connection is a Poisson connection.
inline TensorField d_pi_residual(const PoissonStructure& pi,
                                 const ConnectionSymbols& conn) {
  detail::require_dim(pi.dim(), conn.dim());
  int m = pi.dim();
  TensorField out(3, 0, m);
  for (int k = 0; k < m; ++k)
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) {
        Expr acc;
        for (int l = 0; l < m; ++l) {
          const Expr& pkl = pi.entry(k, l);
          Expr d = pi.entry(i, j).diff(l);
          if (!pkl.is_zero() && !d.is_zero()) acc = acc + pkl * d;
          const Expr& plj = pi.entry(l, j);
          if (!conn.g(k, i, l).is_zero() && !plj.is_zero())
            acc = acc - conn.g(k, i, l) * plj;
          const Expr& pil = pi.entry(i, l);
          if (!conn.g(k, j, l).is_zero() && !pil.is_zero())
            acc = acc - conn.g(k, j, l) * pil;
        }
        out.at({k, i, j}, {}) = acc;
      }
  return out;
}

}  // namespace pg
