// Report assembly: one JSON document per command with a fixed field
// order, one record per computed result. Timestamps and wall time are
// omitted under --no-timestamp so identical runs are byte-identical.
#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace pg {

struct ResultRecord {
  std::string name;
  std::vector<double> values;       // empty when only a residual is reported
  std::optional<double> residual;
  std::optional<double> tolerance;
  std::optional<bool> pass;
};

class ReportDocument {
 public:
  ReportDocument(std::string command, std::string manifest_path,
                 std::string hash, std::uint64_t seed, bool with_timestamp)
      : command_(std::move(command)),
        manifest_path_(std::move(manifest_path)),
        hash_(std::move(hash)),
        seed_(seed),
        with_timestamp_(with_timestamp),
        start_(std::chrono::steady_clock::now()) {}

  void add(ResultRecord r) { results_.push_back(std::move(r)); }

  void add_value(const std::string& name, double v) {
    ResultRecord r;
    r.name = name;
    r.values = {v};
    add(std::move(r));
  }

  void add_check(const std::string& name, double residual, double tolerance) {
    ResultRecord r;
    r.name = name;
    r.residual = residual;
    r.tolerance = tolerance;
    r.pass = residual <= tolerance;
    add(std::move(r));
  }

  bool all_pass() const {
    for (const auto& r : results_)
      if (r.pass && !*r.pass) return false;
    return true;
  }

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json doc;
    doc["command"] = command_;
    doc["manifest"] = manifest_path_;
    doc["manifest_hash"] = hash_;
    doc["seed"] = seed_;
    nlohmann::ordered_json results = nlohmann::ordered_json::array();
    for (const auto& r : results_) {
      nlohmann::ordered_json jr;
      jr["name"] = r.name;
      if (r.values.size() == 1)
        jr["value"] = r.values[0];
      else if (!r.values.empty())
        jr["values"] = r.values;
      if (r.residual) jr["residual"] = *r.residual;
      if (r.tolerance) jr["tolerance"] = *r.tolerance;
      if (r.pass) jr["pass"] = *r.pass;
      results.push_back(jr);
    }
    doc["results"] = results;
    doc["pass"] = all_pass();
    if (with_timestamp_) {
      auto wall = std::chrono::duration_cast<std::chrono::microseconds>(
                      std::chrono::steady_clock::now() - start_)
                      .count();
      doc["wall_time_ms"] = static_cast<double>(wall) / 1000.0;
      doc["timestamp"] = static_cast<std::int64_t>(
          std::chrono::duration_cast<std::chrono::seconds>(
              std::chrono::system_clock::now().time_since_epoch())
              .count());
    }
    return doc;
  }

 private:
  std::string command_, manifest_path_, hash_;
  std::uint64_t seed_;
  bool with_timestamp_;
  std::chrono::steady_clock::time_point start_;
  std::vector<ResultRecord> results_;
};

}  // namespace pg
