#include "stochmap/serialization.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <map>
#include <set>

#include "stochmap/transforms2d.hpp"

namespace stochmap {

using nlohmann::json;

namespace {

constexpr double kDeg = kPi / 180.0;

json vector_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

json matrix_json(const Eigen::MatrixXd& m) {
  json out = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    out.push_back(std::move(row));
  }
  return out;
}

Eigen::VectorXd vector_from(const json& j) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = j.at(i).get<double>();
  return v;
}

Eigen::MatrixXd matrix_from(const json& j) {
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = rows == 0 ? Eigen::Index{0} : static_cast<Eigen::Index>(j.at(0).size());
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const json& row = j.at(static_cast<std::size_t>(r));
    if (static_cast<Eigen::Index>(row.size()) != cols) {
      throw Error(ErrorKind::ShapeMismatch, "ragged matrix");
    }
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = row.at(static_cast<std::size_t>(c)).get<double>();
  }
  return m;
}

json optional_vector(const std::optional<Eigen::VectorXd>& v) {
  return v ? vector_json(*v) : json(nullptr);
}

// Scenario documents.

class Reader {
 public:
  Reader(const json& doc, std::string path) : doc_(doc), path_(std::move(path)) {}

  [[noreturn]] void fail(const std::string& field, const std::string& message) const {
    throw SchemaError(join(field), message);
  }

  std::string join(const std::string& field) const {
    if (field.empty()) return path_;
    return path_.empty() ? field : path_ + "." + field;
  }

  void only(std::initializer_list<std::string_view> allowed) const {
    if (!doc_.is_object()) fail("", "expected an object");
    for (const auto& [key, value] : doc_.items()) {
      if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
        fail(key, "unknown field");
      }
    }
  }

  bool has(const std::string& field) const { return doc_.contains(field); }

  const json& at(const std::string& field) const {
    if (!doc_.contains(field)) fail(field, "missing required field");
    return doc_.at(field);
  }

  std::string text(const std::string& field) const {
    const json& j = at(field);
    if (!j.is_string()) fail(field, "expected a string");
    return j.get<std::string>();
  }

  std::string text_or(const std::string& field, std::string fallback) const {
    return has(field) ? text(field) : fallback;
  }

  double number(const std::string& field) const {
    const json& j = at(field);
    if (!j.is_number()) fail(field, "expected a number");
    return j.get<double>();
  }

  double probability_or(const std::string& field, double fallback) const {
    if (!has(field)) return fallback;
    const double p = number(field);
    if (!(p > 0.0 && p < 1.0)) fail(field, "expected a probability in (0, 1)");
    return p;
  }

  std::uint64_t seed(const std::string& field) const {
    const json& j = at(field);
    if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<std::int64_t>() >= 0)) {
      fail(field, "expected a non-negative integer");
    }
    return j.get<std::uint64_t>();
  }

  Eigen::VectorXd vector(const std::string& field, Eigen::Index dim,
                         const std::vector<int>& angles, bool degrees) const {
    const json& j = at(field);
    if (!j.is_array()) fail(field, "expected an array of numbers");
    for (const json& v : j) {
      if (!v.is_number()) fail(field, "expected an array of numbers");
    }
    Eigen::VectorXd v = vector_from(j);
    if (v.size() != dim) {
      fail(field, "expected " + std::to_string(dim) + " components, got " +
                      std::to_string(v.size()));
    }
    if (!v.allFinite()) fail(field, "non-finite value");
    if (degrees) {
      for (int k : angles) v(k) *= kDeg;
    }
    return v;
  }

  /// Row-major covariance, either as rows or flattened.
  Eigen::MatrixXd covariance(const std::string& field, Eigen::Index dim,
                             const std::vector<int>& angles, bool degrees) const {
    const json& j = at(field);
    if (!j.is_array()) fail(field, "expected a row-major array");
    Eigen::MatrixXd m(dim, dim);
    const bool nested = !j.empty() && j.at(0).is_array();
    if (nested) {
      if (static_cast<Eigen::Index>(j.size()) != dim) {
        fail(field, "expected " + std::to_string(dim) + " rows");
      }
      for (Eigen::Index r = 0; r < dim; ++r) {
        const json& row = j.at(static_cast<std::size_t>(r));
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != dim) {
          fail(field, "row " + std::to_string(r) + " must have " + std::to_string(dim) +
                          " entries");
        }
        for (Eigen::Index c = 0; c < dim; ++c) {
          const json& x = row.at(static_cast<std::size_t>(c));
          if (!x.is_number()) fail(field, "expected numbers");
          m(r, c) = x.get<double>();
        }
      }
    } else {
      if (static_cast<Eigen::Index>(j.size()) != dim * dim) {
        fail(field, "expected " + std::to_string(dim * dim) + " entries");
      }
      for (Eigen::Index k = 0; k < dim * dim; ++k) {
        const json& x = j.at(static_cast<std::size_t>(k));
        if (!x.is_number()) fail(field, "expected numbers");
        m(k / dim, k % dim) = x.get<double>();
      }
    }
    if (!m.allFinite()) fail(field, "non-finite value");
    if (degrees) {
      for (int k : angles) {
        m.row(k) *= kDeg;
        m.col(k) *= kDeg;
      }
    }
    try {
      check_covariance(m);
    } catch (const Error& e) {
      fail(field, e.what());
    }
    return m;
  }

  std::vector<std::string> names(const std::string& field) const {
    const json& j = at(field);
    if (!j.is_array()) fail(field, "expected an array of names");
    std::vector<std::string> out;
    for (const json& v : j) {
      if (!v.is_string()) fail(field, "expected an array of names");
      out.push_back(v.get<std::string>());
    }
    return out;
  }

 private:
  const json& doc_;
  std::string path_;
};

struct Declared {
  std::map<std::string, EntityKind, std::less<>> kinds;

  EntityKind require(const Reader& r, const std::string& field, const std::string& name) const {
    auto it = kinds.find(name);
    if (it == kinds.end()) r.fail(field, "'" + name + "' is not declared by an earlier step");
    return it->second;
  }
};

Step parse_step(const Reader& r, MapMode mode, Declared& declared, bool degrees) {
  const std::string kind = r.text("kind");
  const EntityKind pose = pose_kind(mode);
  const Eigen::Index pose_dim = kind_dimension(pose);
  const std::vector<int> pose_angles = kind_angle_components(pose);

  auto actor_of = [&](const std::string& field) {
    const std::string actor = r.text_or(field, "robot");
    if (declared.require(r, field, actor) != pose) r.fail(field, "'" + actor + "' is not a pose");
    return actor;
  };

  if (kind == "sense_new") {
    r.only({"kind", "name", "actor", "entity_kind", "true_relation", "noise_cov", "gate_against",
            "gate_p"});
    SenseNew s;
    s.name = r.text("name");
    if (s.name.empty()) r.fail("name", "must not be empty");
    if (declared.kinds.contains(s.name) || s.name == kWorldFrame) {
      r.fail("name", "'" + s.name + "' is already declared");
    }
    s.actor = actor_of("actor");
    EntityKind ek = pose;
    if (r.has("entity_kind")) {
      try {
        ek = entity_kind_from_string(r.text("entity_kind"));
      } catch (const Error& e) {
        r.fail("entity_kind", e.what());
      }
      if (!kind_allowed(mode, ek) || ek == EntityKind::Scalar) {
        r.fail("entity_kind", "not available in mode " + std::string(to_string(mode)));
      }
      s.kind = ek;
    }
    const Eigen::Index d = kind_dimension(ek);
    const std::vector<int> angles = kind_angle_components(ek);
    s.true_relation = r.vector("true_relation", d, angles, degrees);
    s.noise_cov = r.covariance("noise_cov", d, angles, degrees);
    if (r.has("gate_against")) {
      s.gate_against = r.names("gate_against");
      for (const std::string& g : s.gate_against) {
        if (declared.require(r, "gate_against", g) != ek) {
          r.fail("gate_against", "'" + g + "' has a different kind");
        }
      }
    }
    s.gate_p = r.probability_or("gate_p", s.gate_p);
    declared.kinds.emplace(s.name, ek);
    return s;
  }
  if (kind == "move") {
    r.only({"kind", "actor", "control_mean", "noise_cov"});
    Move s;
    s.actor = actor_of("actor");
    s.control_mean = r.vector("control_mean", pose_dim, pose_angles, degrees);
    s.noise_cov = r.covariance("noise_cov", pose_dim, pose_angles, degrees);
    return s;
  }
  if (kind == "sense_known") {
    r.only({"kind", "actor", "target", "noise_cov", "gate_p"});
    SenseKnown s;
    s.actor = actor_of("actor");
    s.target = r.text("target");
    const EntityKind tk = declared.require(r, "target", s.target);
    if (s.target == s.actor) r.fail("target", "an entity cannot observe itself");
    s.noise_cov = r.covariance("noise_cov", kind_dimension(tk), kind_angle_components(tk), degrees);
    s.gate_p = r.probability_or("gate_p", s.gate_p);
    return s;
  }
  if (kind == "constraint") {
    r.only({"kind", "constraint", "targets", "noise_cov"});
    if (r.text("constraint") != "rectangle") r.fail("constraint", "only 'rectangle' is supported");
    Constraint s;
    s.targets = r.names("targets");
    if (s.targets.size() != 4) r.fail("targets", "a rectangle needs four corners");
    std::set<std::string> unique(s.targets.begin(), s.targets.end());
    if (unique.size() != 4) r.fail("targets", "corners must be distinct");
    for (const std::string& t : s.targets) {
      if (declared.require(r, "targets", t) != EntityKind::Point2) {
        r.fail("targets", "'" + t + "' is not a Point2");
      }
    }
    s.noise_cov = r.covariance("noise_cov", 3, {}, false);
    return s;
  }
  if (kind == "query") {
    r.only({"kind", "i", "j"});
    Query s{r.text("i"), r.text("j")};
    if (s.i != kWorldFrame && declared.require(r, "i", s.i) != pose) {
      r.fail("i", "'" + s.i + "' is not a pose");
    }
    if (s.j != kWorldFrame) declared.require(r, "j", s.j);
    return s;
  }
  r.fail("kind", "unknown step kind '" + kind + "'");
}

json update_json(const UpdateDiagnostics& u) {
  return {{"gain", matrix_json(u.gain)},
          {"innovation", vector_json(u.innovation)},
          {"innovation_cov", matrix_json(u.innovation_cov)},
          {"iterations", u.iterations},
          {"mahalanobis_sq", u.mahalanobis_sq},
          {"converged", u.converged}};
}

UpdateDiagnostics update_from(const json& j) {
  UpdateDiagnostics u;
  u.gain = matrix_from(j.at("gain"));
  u.innovation = vector_from(j.at("innovation"));
  u.innovation_cov = matrix_from(j.at("innovation_cov"));
  u.iterations = j.at("iterations").get<int>();
  u.mahalanobis_sq = j.at("mahalanobis_sq").get<double>();
  u.converged = j.at("converged").get<bool>();
  return u;
}

Ellipse ellipse_from(const json& j) {
  Ellipse e;
  e.center = vector_from(j.at("center"));
  e.semi_axes = vector_from(j.at("semi_axes"));
  e.orientation = j.at("orientation").get<double>();
  e.confidence = j.at("confidence").get<double>();
  return e;
}

json ellipse_or_null(const std::optional<Ellipse>& e) { return e ? to_json(*e) : json(nullptr); }

}  // namespace

SchemaError::SchemaError(std::string path, const std::string& message)
    : std::runtime_error((path.empty() ? std::string("document") : path) + ": " + message),
      path_(std::move(path)) {}

Scenario parse_scenario(const json& doc, const ScenarioParseOptions& options) {
  const Reader top(doc, "");
  top.only({"mode", "seed", "anchor_truth", "steps"});
  Scenario sc;
  try {
    sc.mode = map_mode_from_string(top.text("mode"));
  } catch (const Error& e) {
    top.fail("mode", e.what());
  }
  sc.seed = top.seed("seed");
  const EntityKind pose = pose_kind(sc.mode);
  if (top.has("anchor_truth")) {
    sc.anchor_truth = top.vector("anchor_truth", kind_dimension(pose), kind_angle_components(pose),
                                 options.degrees);
  }
  const json& steps = top.at("steps");
  if (!steps.is_array()) top.fail("steps", "expected an array");
  Declared declared;
  declared.kinds.emplace("robot", pose);
  for (std::size_t k = 0; k < steps.size(); ++k) {
    const Reader r(steps.at(k), "steps[" + std::to_string(k) + "]");
    sc.steps.push_back(parse_step(r, sc.mode, declared, options.degrees));
  }
  return sc;
}

Scenario load_scenario(const std::string& path, const ScenarioParseOptions& options) {
  std::ifstream in(path);
  if (!in) throw SchemaError("", "cannot open '" + path + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw SchemaError("", e.what());
  }
  return parse_scenario(doc, options);
}

json to_json(const Gaussian& g) {
  return {{"mean", vector_json(g.mean())}, {"cov", matrix_json(g.cov())}};
}

Gaussian gaussian_from_json(const json& j) {
  return {vector_from(j.at("mean")), matrix_from(j.at("cov"))};
}

json to_json(const Ellipse& e) {
  return {{"center", vector_json(e.center)},
          {"semi_axes", vector_json(e.semi_axes)},
          {"orientation", e.orientation},
          {"confidence", e.confidence}};
}

json to_json(const StochasticMap& map) {
  json entities = json::array();
  for (const Entity& e : map.entities()) {
    entities.push_back({{"id", e.id.value},
                        {"name", e.name},
                        {"kind", to_string(e.kind)},
                        {"offset", e.offset}});
  }
  return {{"mode", to_string(map.mode())},
          {"entities", std::move(entities)},
          {"mean", vector_json(map.mean())},
          {"covariance", matrix_json(map.covariance())}};
}

StochasticMap map_from_json(const json& j) {
  std::vector<Entity> entities;
  for (const json& e : j.at("entities")) {
    entities.push_back({EntityId{e.at("id").get<std::uint32_t>()},
                        entity_kind_from_string(e.at("kind").get<std::string>()),
                        e.at("offset").get<Eigen::Index>(), e.at("name").get<std::string>()});
  }
  return StochasticMap::from_parts(map_mode_from_string(j.at("mode").get<std::string>()),
                                   std::move(entities), vector_from(j.at("mean")),
                                   matrix_from(j.at("covariance")));
}

json to_json(const Snapshot& s) {
  json ellipses = json::array();
  for (std::size_t k = 0; k < s.ellipses.size(); ++k) ellipses.push_back(ellipse_or_null(s.ellipses[k]));
  json truth = json::array();
  for (const Eigen::VectorXd& t : s.truth) truth.push_back(vector_json(t));
  json gates = json::array();
  for (const GateRecord& g : s.diagnostics.gates) {
    gates.push_back({{"target", g.target},
                     {"accept", g.result.accept},
                     {"distance_sq", g.result.distance_sq},
                     {"threshold", g.result.threshold}});
  }
  json query = nullptr;
  if (const auto& q = s.diagnostics.query) {
    query = {{"i", q->i}, {"j", q->j}, {"relation", to_json(q->relation)},
             {"ellipse", ellipse_or_null(q->ellipse)}};
  }
  const auto& u = s.diagnostics.update;
  return {{"step", s.step},
          {"kind", s.kind},
          {"map", to_json(s.map)},
          {"confidence", s.confidence},
          {"ellipses", std::move(ellipses)},
          {"truth", std::move(truth)},
          {"diagnostics",
           {{"gates", std::move(gates)},
            {"update", u ? update_json(*u) : json(nullptr)},
            {"query", std::move(query)},
            {"measurement", optional_vector(s.diagnostics.measurement)},
            {"warnings", s.diagnostics.warnings}}}};
}

Snapshot snapshot_from_json(const json& j) {
  Snapshot s;
  s.step = j.at("step").get<std::size_t>();
  s.kind = j.at("kind").get<std::string>();
  s.map = map_from_json(j.at("map"));
  s.confidence = j.at("confidence").get<double>();
  for (const json& e : j.at("ellipses")) {
    s.ellipses.push_back(e.is_null() ? std::nullopt : std::optional<Ellipse>(ellipse_from(e)));
  }
  for (const json& t : j.at("truth")) s.truth.push_back(vector_from(t));
  const json& d = j.at("diagnostics");
  for (const json& g : d.at("gates")) {
    s.diagnostics.gates.push_back({g.at("target").get<std::string>(),
                                   {g.at("accept").get<bool>(), g.at("distance_sq").get<double>(),
                                    g.at("threshold").get<double>()}});
  }
  if (!d.at("update").is_null()) s.diagnostics.update = update_from(d.at("update"));
  if (const json& q = d.at("query"); !q.is_null()) {
    const json& e = q.at("ellipse");
    s.diagnostics.query = QueryRecord{q.at("i").get<std::string>(), q.at("j").get<std::string>(),
                                      gaussian_from_json(q.at("relation")),
                                      e.is_null() ? std::nullopt
                                                  : std::optional<Ellipse>(ellipse_from(e))};
  }
  if (!d.at("measurement").is_null()) s.diagnostics.measurement = vector_from(d.at("measurement"));
  s.diagnostics.warnings = d.at("warnings").get<std::vector<std::string>>();
  return s;
}

void write_snapshots(std::ostream& out, const std::vector<Snapshot>& snapshots) {
  for (const Snapshot& s : snapshots) out << to_json(s).dump() << '\n';
}

std::vector<Snapshot> read_snapshots(std::istream& in) {
  std::vector<Snapshot> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    out.push_back(snapshot_from_json(json::parse(line)));
  }
  return out;
}

}  // namespace stochmap
