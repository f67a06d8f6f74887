// ODE layer over the symbolic core: geodesics, parallel transport of
// covectors along cotangent paths, linear Poisson holonomy of loops,
// zero-leaf holonomy flows with finite-difference Jacobians, and
// cotangent-path line integrals.
//
// All integrations use fixed-step classical RK4 (default 1000 steps on
// [0,1]); reproducibility of reported numbers is preferred over adaptive
// stepping. Integrations are pure given (fields, config) and independent
// integrations may run concurrently.
#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "pg/connection.hpp"
#include "pg/fields.hpp"
#include "pg/linalg.hpp"

namespace pg {

struct IntegrationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IntegratorConfig {
  int steps = 1000;
};

// Parametric pair (gamma(t), alpha(t)) on [0,1] with #alpha = gamma-dot;
// components are closed-form expressions in t.
struct CotangentPath {
  int dim = 0;
  std::vector<Expr> gamma;
  std::vector<Expr> alpha;

  static CotangentPath constant_loop(const Point& base,
                                     const std::vector<double>& covector) {
    CotangentPath p;
    p.dim = static_cast<int>(base.size());
    for (double c : base) p.gamma.push_back(Expr::constant(c));
    for (double c : covector) p.alpha.push_back(Expr::constant(c));
    return p;
  }

  Point gamma_at(double t) const {
    Point x(dim);
    for (int i = 0; i < dim; ++i) x[i] = gamma[i].eval_time(t);
    return x;
  }

  std::vector<double> alpha_at(double t) const {
    std::vector<double> a(dim);
    for (int i = 0; i < dim; ++i) a[i] = alpha[i].eval_time(t);
    return a;
  }
};

struct HolonomyResult {
  Mat<double> matrix;  // covector transport, beta(1) = matrix * beta(0)
  double determinant = 0.0;
  double path_residual = 0.0;
  int steps = 0;
};

struct TrajectorySample {
  double t;
  Point x;
  std::vector<double> a;
};

namespace detail {

using Rhs = std::function<void(double, const std::vector<double>&,
                               std::vector<double>&)>;

// Classical fixed-step RK4 on [0, T]; calls visit after every step when
// provided.
inline std::vector<double> rk4(const Rhs& f, std::vector<double> y, double T,
                               int steps,
                               const std::function<void(double, const std::vector<double>&)>&
                                   visit = nullptr) {
  if (steps < 1) throw std::invalid_argument("steps must be >= 1");
  const std::size_t n = y.size();
  double h = T / steps;
  std::vector<double> k1(n), k2(n), k3(n), k4(n), tmp(n);
  if (visit) visit(0.0, y);
  for (int s = 0; s < steps; ++s) {
    double t = s * h;
    f(t, y, k1);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * h * k1[i];
    f(t + 0.5 * h, tmp, k2);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * h * k2[i];
    f(t + 0.5 * h, tmp, k3);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + h * k3[i];
    f(t + h, tmp, k4);
    for (std::size_t i = 0; i < n; ++i)
      y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    if (visit) visit(t + h, y);
  }
  return y;
}

inline void check_finite(const std::vector<double>& y, double t) {
  for (double v : y)
    if (!std::isfinite(v))
      throw IntegrationError("integration diverged at t = " +
                             std::to_string(t));
}

}  // namespace detail

// Max over a 201-point grid of |gamma-dot^i(t) - pi^{ji}(gamma(t)) alpha_j(t)|.
inline double check_cotangent(const PoissonStructure& pi,
                              const CotangentPath& path) {
  detail::require_dim(pi.dim(), path.dim);
  int m = pi.dim();
  std::vector<Expr> gdot(m);
  for (int i = 0; i < m; ++i) gdot[i] = path.gamma[i].diff(kTimeSlot);
  double worst = 0.0;
  const int grid = 201;
  for (int s = 0; s < grid; ++s) {
    double t = static_cast<double>(s) / (grid - 1);
    Point x = path.gamma_at(t);
    auto a = path.alpha_at(t);
    for (int i = 0; i < m; ++i) {
      double rhs = 0.0;
      for (int j = 0; j < m; ++j) {
        const Expr& pji = pi.entry(j, i);
        if (!pji.is_zero()) rhs += pji.eval(x) * a[j];
      }
      worst = std::max(worst, std::abs(gdot[i].eval_time(t) - rhs));
    }
  }
  return worst;
}

inline constexpr double kPathResidualTol = 1e-8;

// Geodesic flow of eq. dx^i/dt = pi^{ji}(x) alpha_j,
// d alpha_i/dt = -G^{jk}_i(x) alpha_j alpha_k.
inline std::vector<TrajectorySample> integrate_geodesic(
    const PoissonStructure& pi, const ConnectionSymbols& conn, const Point& x0,
    const std::vector<double>& alpha0, double T,
    const IntegratorConfig& cfg = {}) {
  detail::require_dim(pi.dim(), conn.dim());
  int m = pi.dim();
  if (static_cast<int>(x0.size()) != m ||
      static_cast<int>(alpha0.size()) != m)
    throw std::invalid_argument("dimension mismatch");

  auto rhs = [&](double, const std::vector<double>& y,
                 std::vector<double>& dy) {
    Point x(y.begin(), y.begin() + m);
    for (int i = 0; i < m; ++i) {
      double v = 0.0;
      for (int j = 0; j < m; ++j) {
        const Expr& pji = pi.entry(j, i);
        if (!pji.is_zero()) v += pji.eval(x) * y[m + j];
      }
      dy[i] = v;
    }
    for (int i = 0; i < m; ++i) {
      double v = 0.0;
      for (int j = 0; j < m; ++j)
        for (int k = 0; k < m; ++k) {
          const Expr& g = conn.g(j, k, i);
          if (!g.is_zero()) v -= g.eval(x) * y[m + j] * y[m + k];
        }
      dy[m + i] = v;
    }
  };

  std::vector<double> y(2 * m);
  std::copy(x0.begin(), x0.end(), y.begin());
  std::copy(alpha0.begin(), alpha0.end(), y.begin() + m);

  std::vector<TrajectorySample> out;
  out.reserve(cfg.steps + 1);
  try {
    detail::rk4(rhs, y, T, cfg.steps, [&](double t, const std::vector<double>& s) {
      detail::check_finite(s, t);
      TrajectorySample smp;
      smp.t = t;
      smp.x.assign(s.begin(), s.begin() + m);
      smp.a.assign(s.begin() + m, s.end());
      out.push_back(std::move(smp));
    });
  } catch (const EvalError& e) {
    throw IntegrationError(std::string("evaluation failed mid-trajectory: ") +
                           e.what());
  }
  return out;
}

// Transport ODE along a cotangent path: d beta_i/dt = -G^{kl}_i a_k beta_l.
inline std::vector<double> parallel_transport_covector(
    const PoissonStructure& pi, const ConnectionSymbols& conn,
    const CotangentPath& path, const std::vector<double>& beta0,
    const IntegratorConfig& cfg = {}) {
  detail::require_dim(pi.dim(), conn.dim());
  detail::require_dim(pi.dim(), path.dim);
  int m = pi.dim();
  if (static_cast<int>(beta0.size()) != m)
    throw std::invalid_argument("dimension mismatch");
  double res = check_cotangent(pi, path);
  if (res > kPathResidualTol)
    throw std::invalid_argument("cotangent path residual " +
                                std::to_string(res) + " above threshold");

  auto rhs = [&](double t, const std::vector<double>& b,
                 std::vector<double>& db) {
    Point x = path.gamma_at(t);
    auto a = path.alpha_at(t);
    for (int i = 0; i < m; ++i) {
      double v = 0.0;
      for (int k = 0; k < m; ++k)
        for (int l = 0; l < m; ++l) {
          const Expr& g = conn.g(k, l, i);
          if (!g.is_zero()) v -= g.eval(x) * a[k] * b[l];
        }
      db[i] = v;
    }
  };
  try {
    return detail::rk4(rhs, beta0, 1.0, cfg.steps);
  } catch (const EvalError& e) {
    throw IntegrationError(std::string("evaluation failed mid-transport: ") +
                           e.what());
  }
}

// Transports the full covector basis; column j is the transport of dx^j.
inline Mat<double> transport_matrix(const PoissonStructure& pi,
                                    const ConnectionSymbols& conn,
                                    const CotangentPath& path,
                                    const IntegratorConfig& cfg = {}) {
  int m = pi.dim();
  Mat<double> h(m, m);
  for (int j = 0; j < m; ++j) {
    std::vector<double> e(m, 0.0);
    e[j] = 1.0;
    auto out = parallel_transport_covector(pi, conn, path, e, cfg);
    for (int i = 0; i < m; ++i) h(i, j) = out[i];
  }
  return h;
}

inline HolonomyResult linear_holonomy(const PoissonStructure& pi,
                                      const ConnectionSymbols& conn,
                                      const CotangentPath& loop,
                                      const IntegratorConfig& cfg = {}) {
  int m = pi.dim();
  Point start = loop.gamma_at(0.0), end = loop.gamma_at(1.0);
  double gap = 0.0;
  for (int i = 0; i < m; ++i) gap = std::max(gap, std::abs(start[i] - end[i]));
  if (gap > 1e-9)
    throw std::invalid_argument("holonomy needs a closed base path");

  HolonomyResult r;
  r.path_residual = check_cotangent(pi, loop);
  r.matrix = transport_matrix(pi, conn, loop, cfg);
  r.determinant = det_lu(r.matrix);
  r.steps = cfg.steps;
  return r;
}

// Holonomy of a piecewise loop given as legs, each parameterized on
// [0,1]; legs are traversed in order and the transports composed.
inline HolonomyResult linear_holonomy(const PoissonStructure& pi,
                                      const ConnectionSymbols& conn,
                                      const std::vector<CotangentPath>& legs,
                                      const IntegratorConfig& cfg = {}) {
  if (legs.empty()) throw std::invalid_argument("no legs");
  int m = pi.dim();
  Point start = legs.front().gamma_at(0.0), end = legs.back().gamma_at(1.0);
  double gap = 0.0;
  for (int i = 0; i < m; ++i) gap = std::max(gap, std::abs(start[i] - end[i]));
  if (gap > 1e-9)
    throw std::invalid_argument("holonomy needs a closed base path");

  IntegratorConfig leg_cfg = cfg;
  leg_cfg.steps = std::max(1, cfg.steps / static_cast<int>(legs.size()));
  HolonomyResult r;
  r.matrix = Mat<double>::identity(m, 1.0);
  for (const auto& leg : legs) {
    r.path_residual = std::max(r.path_residual, check_cotangent(pi, leg));
    r.matrix = transport_matrix(pi, conn, leg, leg_cfg) * r.matrix;
  }
  r.determinant = det_lu(r.matrix);
  r.steps = leg_cfg.steps * static_cast<int>(legs.size());
  return r;
}

struct ZeroLeafResult {
  Point endpoint;
  Mat<double> jacobian;  // of the time-1 map, by central differences
};

// Flow of u-dot = #_u alpha(t) for a structure vanishing at the origin;
// alpha is given componentwise as expressions in t.
inline ZeroLeafResult zero_leaf_holonomy_flow(const PoissonStructure& pi,
                                              const std::vector<Expr>& alpha,
                                              const Point& u0,
                                              const IntegratorConfig& cfg = {}) {
  int m = pi.dim();
  if (static_cast<int>(alpha.size()) != m ||
      static_cast<int>(u0.size()) != m)
    throw std::invalid_argument("dimension mismatch");
  Point origin(m, 0.0);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      if (!pi.entry(i, j).is_zero() &&
          std::abs(pi.entry(i, j).eval(origin)) > 1e-12)
        throw std::invalid_argument("structure does not vanish at the origin");

  auto rhs = [&](double t, const std::vector<double>& u,
                 std::vector<double>& du) {
    for (int i = 0; i < m; ++i) {
      double v = 0.0;
      for (int j = 0; j < m; ++j) {
        const Expr& pji = pi.entry(j, i);
        if (!pji.is_zero()) v += pji.eval(u) * alpha[j].eval_time(t);
      }
      du[i] = v;
    }
  };

  auto flow = [&](const Point& u) {
    auto end = detail::rk4(rhs, u, 1.0, cfg.steps);
    detail::check_finite(end, 1.0);
    return end;
  };

  ZeroLeafResult out;
  try {
    out.endpoint = flow(u0);
    out.jacobian = Mat<double>(m, m);
    const double h = 1e-5;
    for (int j = 0; j < m; ++j) {
      Point up = u0, dn = u0;
      up[j] += h;
      dn[j] -= h;
      auto fu = flow(up), fd = flow(dn);
      for (int i = 0; i < m; ++i) out.jacobian(i, j) = (fu[i] - fd[i]) / (2 * h);
    }
  } catch (const EvalError& e) {
    throw IntegrationError(std::string("flow left the evaluable region: ") +
                           e.what());
  }
  return out;
}

// Cotangent-path line integral of a vector field,
//   int_{(gamma,alpha)} X = -int_0^1 <alpha(t), X(gamma(t))> dt,
// by composite Simpson quadrature over the step grid.
inline double line_integral(const MultiVectorField& x,
                            const CotangentPath& path,
                            const IntegratorConfig& cfg = {}) {
  if (x.degree() != 1) throw std::invalid_argument("line integral needs a vector field");
  detail::require_dim(x.dim(), path.dim);
  int m = path.dim;
  int n = cfg.steps;
  if (n % 2 == 1) ++n;  // Simpson needs an even interval count
  auto integrand = [&](double t) {
    Point p = path.gamma_at(t);
    auto a = path.alpha_at(t);
    double s = 0.0;
    for (int i = 0; i < m; ++i) {
      Expr xi = x.component({i});
      if (!xi.is_zero()) s += a[i] * xi.eval(p);
    }
    return -s;
  };
  double h = 1.0 / n;
  double acc = integrand(0.0) + integrand(1.0);
  for (int s = 1; s < n; ++s) acc += integrand(s * h) * (s % 2 == 1 ? 4.0 : 2.0);
  return acc * h / 3.0;
}

}  // namespace pg
