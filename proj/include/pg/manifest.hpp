// Manifest loading: a flat key/section text format (a TOML-compatible
// subset: [section] headers, dotted bare keys, quoted strings, numbers,
// # comments). Expression values are strings handed to the expression
// parser; indices in keys are 1-based, as in the DSL.
#pragma once

#include <cctype>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "pg/classes.hpp"
#include "pg/connection.hpp"
#include "pg/fields.hpp"
#include "pg/sampling.hpp"
#include "pg/transport.hpp"

namespace pg {

struct ManifestError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct PathSpec {
  std::vector<std::string> gamma;
  std::vector<std::string> alpha;
};

struct Manifest {
  int dim = 0;
  std::map<std::pair<int, int>, std::string> poisson;  // 0-based, i < j
  std::optional<std::map<std::pair<int, int>, std::string>> metric;
  std::optional<std::string> connection_type;
  std::map<std::tuple<int, int, int>, std::string> connection_symbols;
  struct LieSpec {
    int dim = 0;
    std::map<std::tuple<int, int, int>, double> c;  // 0-based (i,j,k)
  };
  std::optional<LieSpec> lie_algebra;
  std::map<std::string, PathSpec> paths;
  std::optional<std::string> density_weight;
  int steps = 1000;
  std::optional<SampleRegion> region;

  std::string raw_text;

  // --- builders ------------------------------------------------------------

  PoissonStructure poisson_structure() const {
    std::map<std::pair<int, int>, Expr> up;
    for (const auto& [ij, src] : poisson)
      up[ij] = parse_expr(src, dim, false);
    return PoissonStructure(dim, std::move(up));
  }

  Metric metric_tensor() const {
    if (!metric) throw ManifestError("manifest has no [metric] section");
    std::map<std::pair<int, int>, Expr> entries;
    for (const auto& [ij, src] : *metric)
      entries[ij] = parse_expr(src, dim, false);
    return Metric(dim, std::move(entries));
  }

  ConnectionSymbols connection(const PoissonStructure& pi) const {
    std::string type = connection_type.value_or("canonical");
    if (type == "canonical") return canonical_poisson_connection(pi);
    if (type == "flat") return flat_connection(dim);
    if (type == "levi_civita") return levi_civita_contra(pi, metric_tensor());
    if (type == "explicit") {
      ConnectionSymbols c(dim, ConnKind::explicit_symbols);
      for (const auto& [ijk, src] : connection_symbols) {
        auto [i, j, k] = ijk;
        c.g(i, j, k) = parse_expr(src, dim, false);
      }
      return c;
    }
    throw ManifestError("unknown connection type: " + type);
  }

  LieAlgebra algebra() const {
    if (!lie_algebra) throw ManifestError("manifest has no [lie_algebra] section");
    LieAlgebra g(lie_algebra->dim);
    std::map<std::pair<int, int>, std::vector<double>> rows;
    for (const auto& [ijk, v] : lie_algebra->c) {
      auto [i, j, k] = ijk;
      auto& row = rows[{i, j}];
      row.resize(lie_algebra->dim, 0.0);
      row[k] = v;
    }
    for (auto& [ij, coeffs] : rows) {
      coeffs.resize(lie_algebra->dim, 0.0);
      g.set_bracket(ij.first, ij.second, coeffs);
    }
    g.validate();
    return g;
  }

  CotangentPath path(const std::string& name) const {
    auto it = paths.find(name);
    if (it == paths.end()) throw ManifestError("no path named " + name);
    const PathSpec& spec = it->second;
    if (static_cast<int>(spec.gamma.size()) != dim ||
        static_cast<int>(spec.alpha.size()) != dim)
      throw ManifestError("path " + name + " must give gamma.i and alpha.i for i = 1.." +
                          std::to_string(dim));
    CotangentPath p;
    p.dim = dim;
    for (const auto& src : spec.gamma) p.gamma.push_back(parse_expr(src, 0, true));
    for (const auto& src : spec.alpha) p.alpha.push_back(parse_expr(src, 0, true));
    return p;
  }

  DensityField density() const {
    if (!density_weight) return DensityField::lebesgue();
    return DensityField{parse_expr(*density_weight, dim, false)};
  }

  SampleRegion sample_region() const {
    return region ? *region : SampleRegion::cube(dim);
  }
};

namespace detail {

struct RawManifest {
  // section -> key -> value (values keep their kind)
  struct Value {
    enum Kind { Str, Num } kind;
    std::string s;
    double num = 0.0;
  };
  std::map<std::string, std::map<std::string, Value>> sections;
};

inline std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline RawManifest parse_raw_manifest(const std::string& text) {
  RawManifest raw;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::size_t hash = std::string::npos;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      if (line[i] == '"') quoted = !quoted;
      if (line[i] == '#' && !quoted) {
        hash = i;
        break;
      }
    }
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ManifestError("line " + std::to_string(lineno) +
                            ": malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty())
        throw ManifestError("line " + std::to_string(lineno) + ": empty section");
      raw.sections[section];
      continue;
    }
    std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ManifestError("line " + std::to_string(lineno) + ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    std::string val = trim(line.substr(eq + 1));
    if (key.empty() || val.empty())
      throw ManifestError("line " + std::to_string(lineno) + ": empty key or value");
    RawManifest::Value v;
    if (val.front() == '"') {
      if (val.size() < 2 || val.back() != '"')
        throw ManifestError("line " + std::to_string(lineno) +
                            ": unterminated string");
      v.kind = RawManifest::Value::Str;
      v.s = val.substr(1, val.size() - 2);
    } else {
      char* end = nullptr;
      v.kind = RawManifest::Value::Num;
      v.num = std::strtod(val.c_str(), &end);
      if (end != val.c_str() + val.size())
        throw ManifestError("line " + std::to_string(lineno) +
                            ": malformed number '" + val + "'");
    }
    raw.sections[section][key] = v;
  }
  return raw;
}

inline std::vector<std::string> split_key(const std::string& key) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : key) {
    if (c == '.') {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  parts.push_back(cur);
  return parts;
}

inline int key_index(const std::string& part, int dim, const std::string& what) {
  for (char c : part)
    if (!std::isdigit(static_cast<unsigned char>(c)))
      throw ManifestError(what + ": index '" + part + "' is not a number");
  int v = std::atoi(part.c_str());
  if (v < 1 || v > dim)
    throw ManifestError(what + ": index " + part + " out of range 1.." +
                        std::to_string(dim));
  return v - 1;
}

}  // namespace detail

inline Manifest parse_manifest_text(const std::string& text) {
  auto raw = detail::parse_raw_manifest(text);
  Manifest m;
  m.raw_text = text;

  auto section = [&](const std::string& name)
      -> const std::map<std::string, detail::RawManifest::Value>* {
    auto it = raw.sections.find(name);
    return it == raw.sections.end() ? nullptr : &it->second;
  };

  const auto* manifold = section("manifold");
  if (!manifold) throw ManifestError("missing [manifold] section");
  auto dim_it = manifold->find("dim");
  if (dim_it == manifold->end() || dim_it->second.kind != detail::RawManifest::Value::Num)
    throw ManifestError("[manifold] needs a numeric dim");
  m.dim = static_cast<int>(dim_it->second.num);
  if (m.dim < 1 || m.dim != dim_it->second.num)
    throw ManifestError("[manifold] dim must be a positive integer");

  if (const auto* poisson = section("poisson")) {
    for (const auto& [key, val] : *poisson) {
      auto parts = detail::split_key(key);
      if (parts.size() != 3 || parts[0] != "pi")
        throw ManifestError("[poisson] keys must look like pi.i.j");
      int i = detail::key_index(parts[1], m.dim, "[poisson]");
      int j = detail::key_index(parts[2], m.dim, "[poisson]");
      if (i >= j) throw ManifestError("[poisson] indices must satisfy i<j");
      if (val.kind != detail::RawManifest::Value::Str)
        throw ManifestError("[poisson] values must be expression strings");
      m.poisson[{i, j}] = val.s;
    }
  }
  if (m.poisson.empty()) throw ManifestError("missing or empty [poisson] section");

  if (const auto* metric = section("metric")) {
    std::map<std::pair<int, int>, std::string> g;
    for (const auto& [key, val] : *metric) {
      auto parts = detail::split_key(key);
      if (parts.size() != 3 || parts[0] != "g")
        throw ManifestError("[metric] keys must look like g.i.j");
      int i = detail::key_index(parts[1], m.dim, "[metric]");
      int j = detail::key_index(parts[2], m.dim, "[metric]");
      if (i > j) throw ManifestError("[metric] indices must satisfy i<=j");
      if (val.kind != detail::RawManifest::Value::Str)
        throw ManifestError("[metric] values must be expression strings");
      g[{i, j}] = val.s;
    }
    m.metric = std::move(g);
  }

  if (const auto* conn = section("connection")) {
    for (const auto& [key, val] : *conn) {
      if (key == "type") {
        if (val.kind != detail::RawManifest::Value::Str)
          throw ManifestError("[connection] type must be a string");
        m.connection_type = val.s;
        continue;
      }
      auto parts = detail::split_key(key);
      if (parts.size() != 4 || parts[0] != "gamma")
        throw ManifestError("[connection] keys must be type or gamma.i.j.k");
      int i = detail::key_index(parts[1], m.dim, "[connection]");
      int j = detail::key_index(parts[2], m.dim, "[connection]");
      int k = detail::key_index(parts[3], m.dim, "[connection]");
      if (val.kind != detail::RawManifest::Value::Str)
        throw ManifestError("[connection] symbols must be expression strings");
      m.connection_symbols[{i, j, k}] = val.s;
    }
    if (m.connection_type && *m.connection_type == "explicit" &&
        m.connection_symbols.empty())
      throw ManifestError("[connection] type explicit needs gamma.i.j.k symbols");
    if (m.connection_type && *m.connection_type == "levi_civita" && !m.metric)
      throw ManifestError("[connection] type levi_civita needs a [metric] section");
  }

  if (const auto* lie = section("lie_algebra")) {
    Manifest::LieSpec spec;
    auto it = lie->find("dim");
    if (it == lie->end() || it->second.kind != detail::RawManifest::Value::Num)
      throw ManifestError("[lie_algebra] needs a numeric dim");
    spec.dim = static_cast<int>(it->second.num);
    for (const auto& [key, val] : *lie) {
      if (key == "dim") continue;
      auto parts = detail::split_key(key);
      if (parts.size() != 4 || parts[0] != "c")
        throw ManifestError("[lie_algebra] keys must be dim or c.i.j.k");
      int i = detail::key_index(parts[1], spec.dim, "[lie_algebra]");
      int j = detail::key_index(parts[2], spec.dim, "[lie_algebra]");
      int k = detail::key_index(parts[3], spec.dim, "[lie_algebra]");
      if (i >= j) throw ManifestError("[lie_algebra] indices must satisfy i<j");
      if (val.kind != detail::RawManifest::Value::Num)
        throw ManifestError("[lie_algebra] structure constants must be numbers");
      spec.c[{i, j, k}] = val.num;
    }
    m.lie_algebra = std::move(spec);
  }

  if (const auto* density = section("density")) {
    auto it = density->find("weight");
    if (it == density->end() || it->second.kind != detail::RawManifest::Value::Str)
      throw ManifestError("[density] needs a weight expression string");
    m.density_weight = it->second.s;
  }

  if (const auto* integ = section("integrator")) {
    auto it = integ->find("steps");
    if (it != integ->end()) {
      if (it->second.kind != detail::RawManifest::Value::Num ||
          it->second.num < 1)
        throw ManifestError("[integrator] steps must be a positive number");
      m.steps = static_cast<int>(it->second.num);
    }
  }

  if (const auto* sampling = section("sampling")) {
    SampleRegion region = SampleRegion::cube(m.dim);
    for (const auto& [key, val] : *sampling) {
      auto parts = detail::split_key(key);
      if (parts.size() != 2 || (parts[0] != "min" && parts[0] != "max"))
        throw ManifestError("[sampling] keys must be min.i or max.i");
      int i = detail::key_index(parts[1], m.dim, "[sampling]");
      if (val.kind != detail::RawManifest::Value::Num)
        throw ManifestError("[sampling] bounds must be numbers");
      (parts[0] == "min" ? region.lo : region.hi)[i] = val.num;
    }
    m.region = region;
  }

  for (const auto& [name, keys] : raw.sections) {
    if (name.rfind("paths.", 0) == 0) {
      std::string pname = name.substr(6);
      if (pname.empty()) throw ManifestError("path section needs a name");
      PathSpec spec;
      spec.gamma.resize(m.dim);
      spec.alpha.resize(m.dim);
      std::vector<bool> gset(m.dim, false), aset(m.dim, false);
      for (const auto& [key, val] : keys) {
        auto parts = detail::split_key(key);
        if (parts.size() != 2 || (parts[0] != "gamma" && parts[0] != "alpha"))
          throw ManifestError("[paths." + pname +
                              "] keys must be gamma.i or alpha.i");
        int i = detail::key_index(parts[1], m.dim, "[paths." + pname + "]");
        if (val.kind != detail::RawManifest::Value::Str)
          throw ManifestError("[paths." + pname + "] values must be strings");
        if (parts[0] == "gamma") {
          spec.gamma[i] = val.s;
          gset[i] = true;
        } else {
          spec.alpha[i] = val.s;
          aset[i] = true;
        }
      }
      for (int i = 0; i < m.dim; ++i)
        if (!gset[i] || !aset[i])
          throw ManifestError("[paths." + pname + "] must set gamma." +
                              std::to_string(i + 1) + " and alpha." +
                              std::to_string(i + 1));
      m.paths[pname] = std::move(spec);
    }
  }

  static const char* known[] = {"manifold", "poisson", "metric",  "connection",
                                "lie_algebra", "density", "integrator",
                                "sampling"};
  for (const auto& [name, keys] : raw.sections) {
    (void)keys;
    if (name.rfind("paths.", 0) == 0) continue;
    bool ok = false;
    for (const char* k : known) ok = ok || name == k;
    if (!ok) throw ManifestError("unknown section [" + name + "]");
  }

  return m;
}

inline Manifest load_manifest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ManifestError("cannot open manifest " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_manifest_text(buf.str());
}

// FNV-1a over the manifest bytes; hex string for report provenance.
inline std::string manifest_hash(const std::string& text) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace pg
