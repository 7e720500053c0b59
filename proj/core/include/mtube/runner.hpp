#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "mtube/singularity.hpp"

namespace mtube {

/// Declarative description of one experiment run.  Everything that affects
/// the numbers lives here; reports are a pure function of the config.
struct RunConfig {
  FlatModel model{3, 2, 2};
  std::string experiment = "full-suite";
  nlohmann::json params = nlohmann::json::object();
  std::string out_dir = "runs";
  std::string format = "both";  ///< csv | json | both
  int threads = 1;
  std::uint64_t seed = 1;

  static RunConfig from_file(const std::string& path);
  static RunConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;

  /// Deterministic serialization; the run directory is named by its hash.
  std::string canonical() const;
  std::uint64_t hash() const;

  void validate() const;  ///< throws ConstraintError on bad fields
};

struct CheckRecord {
  std::string name;
  std::string anchor;  ///< one-line description of the property checked
  std::string basis;   ///< exact | derived | stated
  nlohmann::json measured;
  nlohmann::json expected;
  double tolerance = 0.0;
  bool pass = false;
};

struct RunReport {
  std::string experiment;
  std::vector<CheckRecord> records;
  bool all_pass = false;

  nlohmann::json to_json() const;  ///< deterministic (no timing fields)
  std::string to_csv() const;
  std::string summary() const;     ///< one line per record
};

/// Executes the configured experiment.  Deterministic: identical configs give
/// byte-identical reports regardless of the thread count.
RunReport run(const RunConfig& config);

/// Writes report.json / report.csv (per the format flag) under
/// out_dir/<config-hash>/ and returns that directory.
std::string write_outputs(const RunConfig& config, const RunReport& report);

}  // namespace mtube
