#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "stochmap/scenario.hpp"

namespace stochmap {

/// A scenario document that does not match the schema. `path()` names the
/// offending field, e.g. "steps[2].noise_cov".
class SchemaError : public std::runtime_error {
 public:
  SchemaError(std::string path, const std::string& message);
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

struct ScenarioParseOptions {
  /// Angles (and the angle rows of covariances) are given in degrees.
  bool degrees = false;
};

Scenario parse_scenario(const nlohmann::json& doc, const ScenarioParseOptions& options = {});
Scenario load_scenario(const std::string& path, const ScenarioParseOptions& options = {});

nlohmann::json to_json(const StochasticMap& map);
StochasticMap map_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Gaussian& g);
Gaussian gaussian_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Ellipse& e);

nlohmann::json to_json(const Snapshot& s);
Snapshot snapshot_from_json(const nlohmann::json& j);

/// One JSON document per line.
void write_snapshots(std::ostream& out, const std::vector<Snapshot>& snapshots);
std::vector<Snapshot> read_snapshots(std::istream& in);

}  // namespace stochmap
