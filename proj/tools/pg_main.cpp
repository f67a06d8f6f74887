// pg — manifest-driven command line for Poisson geometry on a chart.
//
// Subcommands: check, geodesic, transport, holonomy, classes, modular,
// integral. JSON goes to stdout; trajectory CSV to --out. Exit codes:
// 0 all residuals within tolerance, 1 a computation ran and failed (or
// diverged), 2 malformed input (manifest, expression, flags).

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pg/classes.hpp"
#include "pg/connection.hpp"
#include "pg/fields.hpp"
#include "pg/manifest.hpp"
#include "pg/report.hpp"
#include "pg/sampling.hpp"
#include "pg/transport.hpp"

namespace {

constexpr int kExitPass = 0;
constexpr int kExitFail = 1;
constexpr int kExitInput = 2;

struct CommandError : std::runtime_error {  // computation-stage failure
  using std::runtime_error::runtime_error;
};

std::vector<double> parse_csv_doubles(const std::string& text, int expect,
                                      const std::string& what) {
  std::vector<double> out;
  std::string cur;
  auto flush = [&] {
    if (cur.empty()) throw pg::ManifestError(what + ": empty entry");
    char* end = nullptr;
    double v = std::strtod(cur.c_str(), &end);
    if (end != cur.c_str() + cur.size())
      throw pg::ManifestError(what + ": bad number '" + cur + "'");
    out.push_back(v);
    cur.clear();
  };
  for (char c : text) {
    if (c == ',')
      flush();
    else if (!std::isspace(static_cast<unsigned char>(c)))
      cur += c;
  }
  flush();
  if (expect > 0 && static_cast<int>(out.size()) != expect)
    throw pg::ManifestError(what + ": expected " + std::to_string(expect) +
                            " comma-separated numbers");
  return out;
}

// Deterministic polynomial generator for the seeded check battery.
class FieldGen {
 public:
  explicit FieldGen(std::uint64_t seed) : gen_(seed) {}

  double uniform(double lo, double hi) {
    double u = static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    return lo + (hi - lo) * u;
  }

  pg::Expr poly(int dim) {
    pg::Expr e = pg::Expr::constant(uniform(-1.0, 1.0));
    int terms = 1 + static_cast<int>(gen_() % 3);
    for (int t = 0; t < terms; ++t) {
      pg::Expr m = pg::Expr::constant(uniform(-1.0, 1.0));
      int deg = static_cast<int>(gen_() % 3);
      for (int d = 0; d < deg; ++d)
        m = m * pg::Expr::var(static_cast<int>(gen_() % dim));
      e = e + m;
    }
    return e;
  }

  pg::DifferentialForm one_form(int dim) {
    pg::DifferentialForm a(dim, 1);
    for (int i = 0; i < dim; ++i) a.set({i}, poly(dim));
    return a;
  }

  pg::MultiVectorField field(int dim, int deg) {
    pg::MultiVectorField q(dim, deg);
    pg::detail::iterate_increasing(dim, deg, [&](const std::vector<int>& idx) {
      q.set(idx, poly(dim));
    });
    return q;
  }

 private:
  std::mt19937_64 gen_;
};

double max_field_abs(const pg::detail::SkewTable& q,
                     std::span<const pg::Point> pts) {
  return q.max_abs_at(pts);
}

double max_field_diff(const pg::detail::SkewTable& a,
                      const pg::detail::SkewTable& b,
                      std::span<const pg::Point> pts) {
  double worst = 0.0;
  pg::detail::iterate_increasing(
      a.dim(), a.degree(), [&](const std::vector<int>& idx) {
        pg::Expr d = a.component(idx) - b.component(idx);
        for (const auto& p : pts)
          worst = std::max(worst, std::abs(d.eval(p)));
      });
  return worst;
}

void write_csv(const std::string& path,
               const std::vector<pg::TrajectorySample>& traj, int dim) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CommandError("cannot open csv output " + path);
  out << "t";
  for (int i = 1; i <= dim; ++i) out << ",x" << i;
  for (int i = 1; i <= dim; ++i) out << ",a" << i;
  out << "\n";
  char buf[40];
  auto put = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out << buf;
  };
  for (const auto& s : traj) {
    put(s.t);
    for (double v : s.x) {
      out << ",";
      put(v);
    }
    for (double v : s.a) {
      out << ",";
      put(v);
    }
    out << "\n";
  }
}

// Pinned cross-formula constants; see CONVENTIONS.md. rho relates the
// direct secondary classes to the closed Lie-Poisson trace forms.
double pinned_rho(int k) {
  switch (k) {
    case 1: return 1.0;
    case 2: return 1.0 / 6.0;
    case 3: return 1.0 / 30.0;
    default: return 1.0;
  }
}

struct Options {
  std::string manifest_path;
  std::uint64_t seed = 0;
  bool no_timestamp = false;
  std::optional<int> steps;
};

pg::IntegratorConfig integrator(const Options& opt, const pg::Manifest& m) {
  pg::IntegratorConfig cfg;
  cfg.steps = opt.steps.value_or(m.steps);
  return cfg;
}

int finish(pg::ReportDocument& doc) {
  std::cout << doc.to_json().dump(2) << "\n";
  return doc.all_pass() ? kExitPass : kExitFail;
}

// ---------------------------------------------------------------------------

int cmd_check(const Options& opt) {
  pg::Manifest m = pg::load_manifest(opt.manifest_path);
  pg::PoissonStructure pi = m.poisson_structure();
  pg::ReportDocument doc("check", opt.manifest_path,
                         pg::manifest_hash(m.raw_text), opt.seed,
                         !opt.no_timestamp);
  int dim = m.dim;
  auto pts = pg::latin_hypercube(m.sample_region(), 100, opt.seed);
  FieldGen gen(opt.seed + 1);

  doc.add_check("jacobiator", max_field_abs(jacobiator(pi), pts), 1e-9);
  doc.add_check("delta_pi",
                max_field_abs(contravariant_differential(pi, pi.bivector()), pts),
                1e-10);

  double dd_worst = 0.0;
  for (int deg = 0; deg <= std::min(1, dim - 2); ++deg)
    for (int rep = 0; rep < 3; ++rep) {
      auto q = gen.field(dim, deg);
      auto dd = contravariant_differential(
          pi, contravariant_differential(pi, q));
      dd_worst = std::max(dd_worst, max_field_abs(dd, pts));
    }
  doc.add_check("delta_squared", dd_worst, 1e-10);

  double leib_worst = 0.0;
  for (int rep = 0; rep < 3; ++rep) {
    auto f = gen.field(dim, 0);
    auto q = gen.field(dim, 1);
    auto lhs = contravariant_differential(pi, wedge(f, q));
    auto rhs1 = wedge(contravariant_differential(pi, f), q);
    auto rhs2 = wedge(f, contravariant_differential(pi, q));
    pg::detail::iterate_increasing(dim, 2, [&](const std::vector<int>& idx) {
      pg::Expr d = lhs.component(idx) - rhs1.component(idx) -
                   rhs2.component(idx);
      for (const auto& p : pts)
        leib_worst = std::max(leib_worst, std::abs(d.eval(p)));
    });
    if (dim >= 3) {
      auto q1 = gen.field(dim, 1);
      auto lhs2 = contravariant_differential(pi, wedge(q1, q));
      auto r1 = wedge(contravariant_differential(pi, q1), q);
      auto r2 = wedge(q1, contravariant_differential(pi, q));
      pg::detail::iterate_increasing(dim, 3, [&](const std::vector<int>& idx) {
        pg::Expr d =
            lhs2.component(idx) - r1.component(idx) + r2.component(idx);
        for (const auto& p : pts)
          leib_worst = std::max(leib_worst, std::abs(d.eval(p)));
      });
    }
  }
  doc.add_check("leibniz", leib_worst, 1e-10);

  double cartan_worst = 0.0;
  for (int rep = 0; rep < 3; ++rep) {
    auto a = gen.one_form(dim);
    auto q = gen.field(dim, 1);
    auto lhs = lie_derivative(pi, a, q);
    auto r1 = contract(a, contravariant_differential(pi, q));
    auto r2 = contravariant_differential(pi, contract(a, q));
    pg::detail::iterate_increasing(dim, 1, [&](const std::vector<int>& idx) {
      pg::Expr d = lhs.component(idx) - r1.component(idx) - r2.component(idx);
      for (const auto& p : pts)
        cartan_worst = std::max(cartan_worst, std::abs(d.eval(p)));
    });
  }
  doc.add_check("cartan_magic", cartan_worst, 1e-10);

  double musical_worst = 0.0;
  for (int rep = 0; rep < 5; ++rep) {
    auto a = gen.one_form(dim);
    auto b = gen.one_form(dim);
    auto lhs = sharp(pi, koszul_bracket(pi, a, b));
    auto rhs = vector_commutator(sharp(pi, a), sharp(pi, b));
    musical_worst = std::max(musical_worst, max_field_diff(lhs, rhs, pts));
  }
  doc.add_check("musical_homomorphism", musical_worst, 1e-10);

  return finish(doc);
}

int cmd_geodesic(const Options& opt, const std::string& x0_text,
                 const std::string& alpha0_text, double T,
                 const std::string& out_csv) {
  pg::Manifest m = pg::load_manifest(opt.manifest_path);
  pg::PoissonStructure pi = m.poisson_structure();
  pg::ConnectionSymbols conn = m.connection(pi);
  pg::Point x0 = parse_csv_doubles(x0_text, m.dim, "--x0");
  std::vector<double> a0 = parse_csv_doubles(alpha0_text, m.dim, "--alpha0");

  pg::ReportDocument doc("geodesic", opt.manifest_path,
                         pg::manifest_hash(m.raw_text), opt.seed,
                         !opt.no_timestamp);
  auto traj = integrate_geodesic(pi, conn, x0, a0, T, integrator(opt, m));
  const auto& end = traj.back();
  pg::ResultRecord rx;
  rx.name = "endpoint_x";
  rx.values = end.x;
  doc.add(std::move(rx));
  pg::ResultRecord ra;
  ra.name = "endpoint_alpha";
  ra.values = end.a;
  doc.add(std::move(ra));
  doc.add_value("samples", static_cast<double>(traj.size()));
  if (!out_csv.empty()) write_csv(out_csv, traj, m.dim);
  return finish(doc);
}

int cmd_transport(const Options& opt, const std::string& path_name,
                  const std::string& beta0_text) {
  pg::Manifest m = pg::load_manifest(opt.manifest_path);
  pg::PoissonStructure pi = m.poisson_structure();
  pg::ConnectionSymbols conn = m.connection(pi);
  pg::CotangentPath path = m.path(path_name);
  std::vector<double> b0 = parse_csv_doubles(beta0_text, m.dim, "--beta0");

  pg::ReportDocument doc("transport", opt.manifest_path,
                         pg::manifest_hash(m.raw_text), opt.seed,
                         !opt.no_timestamp);
  double res = check_cotangent(pi, path);
  doc.add_check("path_residual", res, pg::kPathResidualTol);
  if (res > pg::kPathResidualTol) return finish(doc);

  auto out = parallel_transport_covector(pi, conn, path, b0, integrator(opt, m));
  pg::ResultRecord r;
  r.name = "transported_covector";
  r.values = out;
  doc.add(std::move(r));
  return finish(doc);
}

int cmd_holonomy(const Options& opt, const std::string& path_name) {
  pg::Manifest m = pg::load_manifest(opt.manifest_path);
  pg::PoissonStructure pi = m.poisson_structure();
  pg::ConnectionSymbols conn = m.connection(pi);
  pg::CotangentPath loop = m.path(path_name);

  pg::ReportDocument doc("holonomy", opt.manifest_path,
                         pg::manifest_hash(m.raw_text), opt.seed,
                         !opt.no_timestamp);
  pg::HolonomyResult h;
  try {
    h = linear_holonomy(pi, conn, loop, integrator(opt, m));
  } catch (const std::invalid_argument& e) {
    throw CommandError(e.what());  // open path / bad cotangent data: exit 1
  }
  pg::ResultRecord mat;
  mat.name = "holonomy_matrix";
  for (int i = 0; i < m.dim; ++i)
    for (int j = 0; j < m.dim; ++j) mat.values.push_back(h.matrix(i, j));
  doc.add(std::move(mat));
  doc.add_value("determinant", h.determinant);
  doc.add_check("path_residual", h.path_residual, pg::kPathResidualTol);

  if (m.density_weight || m.metric) {
    pg::DensityField mu =
        m.density_weight
            ? m.density()
            : pg::DensityField{sqrt(det(m.metric_tensor().matrix()))};
    auto vmu = modular_vector_field(pi, mu);
    double li = line_integral(vmu, loop, integrator(opt, m));
    doc.add_value("modular_line_integral", li);
    doc.add_check("ginzburg_golubev", std::abs(h.determinant - std::exp(li)),
                  1e-6);
  }
  return finish(doc);
}

int cmd_classes(const Options& opt, const std::string& k_list) {
  pg::Manifest m = pg::load_manifest(opt.manifest_path);
  pg::PoissonStructure pi = m.poisson_structure();
  std::vector<int> ks;
  for (double v : parse_csv_doubles(k_list, -1, "--k")) {
    if (v < 1 || v != std::floor(v))
      throw pg::ManifestError("--k entries must be positive integers");
    ks.push_back(static_cast<int>(v));
  }

  pg::ReportDocument doc("classes", opt.manifest_path,
                         pg::manifest_hash(m.raw_text), opt.seed,
                         !opt.no_timestamp);
  auto d1 = canonical_poisson_connection(pi);
  auto d0 = m.metric ? levi_civita_contra(pi, m.metric_tensor())
                     : pg::flat_connection(m.dim);
  auto pts = pg::latin_hypercube(m.sample_region(), 100, opt.seed);

  for (int k : ks) {
    pg::MultiVectorField sec(m.dim, 2 * k - 1);
    try {
      sec = secondary_class(pi, d1, d0, k);
    } catch (const std::invalid_argument& e) {
      throw CommandError(e.what());  // even-k flatness gate: exit 1
    }
    pg::detail::iterate_increasing(
        m.dim, 2 * k - 1, [&](const std::vector<int>& idx) {
          std::string name = "m" + std::to_string(k) + "[";
          for (std::size_t i = 0; i < idx.size(); ++i) {
            if (i) name += ",";
            name += std::to_string(idx[i] + 1);
          }
          name += "]";
          pg::Expr c = sec.component(idx);
          doc.add_value(name, c.is_zero() ? 0.0 : c.eval(pts.front()));
        });

    auto dsec = contravariant_differential(pi, sec);
    doc.add_check("m" + std::to_string(k) + "_closedness",
                  max_field_abs(dsec, pts), 1e-8);

    if (m.lie_algebra && m.lie_algebra->dim == m.dim) {
      auto g = m.algebra();
      auto closed = lie_poisson_mk(g, k);
      double rho = pinned_rho(k);
      double worst = 0.0;
      pg::detail::iterate_increasing(
          m.dim, 2 * k - 1, [&](const std::vector<int>& idx) {
            pg::Expr d = sec.component(idx) -
                         pg::Expr::constant(rho) * closed.component(idx);
            for (const auto& p : pts)
              worst = std::max(worst, std::abs(d.eval(p)));
          });
      doc.add_value("rho" + std::to_string(k), rho);
      doc.add_check("m" + std::to_string(k) + "_closed_form", worst, 1e-8);
    }
  }
  return finish(doc);
}

int cmd_modular(const Options& opt) {
  pg::Manifest m = pg::load_manifest(opt.manifest_path);
  pg::PoissonStructure pi = m.poisson_structure();
  if (!m.metric && !m.density_weight)
    throw pg::ManifestError("modular needs a [metric] or [density] section");

  pg::ReportDocument doc("modular", opt.manifest_path,
                         pg::manifest_hash(m.raw_text), opt.seed,
                         !opt.no_timestamp);
  auto pts = pg::latin_hypercube(m.sample_region(), 100, opt.seed);

  pg::DensityField mu = pg::DensityField::lebesgue();
  if (m.metric) {
    pg::Metric g = m.metric_tensor();
    // positive-definiteness at the sampled points (leading minors)
    for (const auto& p : pts) {
      pg::Mat<double> gm(m.dim, m.dim);
      for (int i = 0; i < m.dim; ++i)
        for (int j = 0; j < m.dim; ++j) gm(i, j) = g.entry(i, j).eval(p);
      for (int lead = 1; lead <= m.dim; ++lead) {
        pg::Mat<double> sub(lead, lead);
        for (int i = 0; i < lead; ++i)
          for (int j = 0; j < lead; ++j) sub(i, j) = gm(i, j);
        if (pg::det_lu(sub) <= 0.0)
          throw CommandError("metric is not positive definite at a sample");
      }
    }
    mu = pg::DensityField{sqrt(det(g.matrix()))};
  } else {
    mu = m.density();
  }

  auto vmu = modular_vector_field(pi, mu);
  for (int s = 0; s < 3 && s < static_cast<int>(pts.size()); ++s) {
    pg::ResultRecord rp;
    rp.name = "sample_point_" + std::to_string(s);
    rp.values = pts[s];
    doc.add(std::move(rp));
    pg::ResultRecord rv;
    rv.name = "v_mu_" + std::to_string(s);
    for (int i = 0; i < m.dim; ++i) {
      pg::Expr c = vmu.component({i});
      rv.values.push_back(c.is_zero() ? 0.0 : c.eval(pts[s]));
    }
    doc.add(std::move(rv));
  }

  if (m.metric) {
    double res = modular_comparison(pi, m.metric_tensor(), pts);
    doc.add_check("modular_comparison", res, 1e-8);
  }
  return finish(doc);
}

int cmd_integral(const Options& opt, const std::string& path_name,
                 const std::string& field_exprs) {
  pg::Manifest m = pg::load_manifest(opt.manifest_path);
  pg::PoissonStructure pi = m.poisson_structure();
  pg::CotangentPath path = m.path(path_name);

  pg::MultiVectorField x(m.dim, 1);
  if (field_exprs.empty()) {
    x = modular_vector_field(pi, m.density());
  } else {
    std::vector<std::string> parts;
    std::string cur;
    for (char c : field_exprs) {
      if (c == ';') {
        parts.push_back(cur);
        cur.clear();
      } else {
        cur += c;
      }
    }
    parts.push_back(cur);
    if (static_cast<int>(parts.size()) != m.dim)
      throw pg::ManifestError("--field needs dim semicolon-separated exprs");
    for (int i = 0; i < m.dim; ++i) {
      pg::Expr e = pg::parse_expr(parts[i], m.dim, false);
      if (!e.is_zero()) x.set({i}, e);
    }
  }

  pg::ReportDocument doc("integral", opt.manifest_path,
                         pg::manifest_hash(m.raw_text), opt.seed,
                         !opt.no_timestamp);
  double res = check_cotangent(pi, path);
  doc.add_check("path_residual", res, pg::kPathResidualTol);
  if (res <= pg::kPathResidualTol)
    doc.add_value("line_integral", line_integral(x, path, integrator(opt, m)));
  return finish(doc);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Poisson geometry on coordinate charts"};
  app.require_subcommand(1);

  Options opt;
  std::uint64_t env_seed = 0;
  if (const char* s = std::getenv("PG_SEED")) env_seed = std::strtoull(s, nullptr, 10);
  opt.seed = env_seed;

  std::string x0_text, alpha0_text, out_csv, path_name, beta0_text;
  std::string k_list = "1";
  std::string field_exprs;
  double T = 1.0;
  int steps_flag = 0;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("manifest", opt.manifest_path, "manifest file")->required();
    sub->add_option("--seed", opt.seed, "sampling seed (default PG_SEED or 0)");
    sub->add_flag("--no-timestamp", opt.no_timestamp,
                  "omit timestamp and wall time from the report");
    sub->add_option("--steps", steps_flag, "override integrator steps");
  };

  CLI::App* check = app.add_subcommand("check", "run the structure battery");
  add_common(check);

  CLI::App* geodesic = app.add_subcommand("geodesic", "integrate a geodesic");
  add_common(geodesic);
  geodesic->add_option("--x0", x0_text, "start point, comma separated")->required();
  geodesic->add_option("--alpha0", alpha0_text, "start covector")->required();
  geodesic->add_option("--T", T, "integration time (default 1)");
  geodesic->add_option("--out", out_csv, "trajectory CSV path");

  CLI::App* transport = app.add_subcommand("transport", "parallel transport a covector");
  add_common(transport);
  transport->add_option("--path", path_name, "named path from the manifest")->required();
  transport->add_option("--beta0", beta0_text, "covector to transport")->required();

  CLI::App* holonomy = app.add_subcommand("holonomy", "linear holonomy of a loop");
  add_common(holonomy);
  holonomy->add_option("--path", path_name, "named loop from the manifest")->required();

  CLI::App* classes = app.add_subcommand("classes", "secondary characteristic classes");
  add_common(classes);
  classes->add_option("--k", k_list, "comma separated list of k (default 1)");

  CLI::App* modular = app.add_subcommand("modular", "modular field and m1 comparison");
  add_common(modular);

  CLI::App* integral = app.add_subcommand("integral", "cotangent-path line integral");
  add_common(integral);
  integral->add_option("--path", path_name, "named path from the manifest")->required();
  integral->add_option("--field", field_exprs,
                       "vector field components e1;e2;... (default: modular field)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kExitInput;
  }
  if (steps_flag > 0) opt.steps = steps_flag;

  try {
    if (check->parsed()) return cmd_check(opt);
    if (geodesic->parsed()) return cmd_geodesic(opt, x0_text, alpha0_text, T, out_csv);
    if (transport->parsed()) return cmd_transport(opt, path_name, beta0_text);
    if (holonomy->parsed()) return cmd_holonomy(opt, path_name);
    if (classes->parsed()) return cmd_classes(opt, k_list);
    if (modular->parsed()) return cmd_modular(opt);
    if (integral->parsed()) return cmd_integral(opt, path_name, field_exprs);
  } catch (const pg::ManifestError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const pg::ParseError& e) {
    std::cerr << "expression error: " << e.what() << "\n";
    return kExitInput;
  } catch (const CommandError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFail;
  } catch (const pg::IntegrationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFail;
  } catch (const pg::EvalError& e) {
    std::cerr << "evaluation error: " << e.what() << "\n";
    return kExitFail;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  }
  return kExitInput;
}
