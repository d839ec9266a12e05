#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "stochmap/error.hpp"
#include "stochmap/propagate.hpp"
#include "stochmap/stochastic_map.hpp"

namespace stochmap {

/// The actor senses a new entity at `true_relation` in its own frame.
/// The measurement is gated against each entity in `gate_against` before the
/// entity is added, so a mistaken identity shows up as an accepted gate.
struct SenseNew {
  std::string name;
  std::string actor = "robot";
  std::optional<EntityKind> kind;  // pose kind of the map when empty
  Eigen::VectorXd true_relation;
  Eigen::MatrixXd noise_cov;
  std::vector<std::string> gate_against;
  double gate_p = 0.999;
};

/// Commanded relative motion; the actual motion adds a noise draw.
struct Move {
  std::string actor = "robot";
  Eigen::VectorXd control_mean;
  Eigen::MatrixXd noise_cov;
};

/// Re-observation of a mapped entity; updates the map only if the gate accepts.
struct SenseKnown {
  std::string actor = "robot";
  std::string target;
  Eigen::MatrixXd noise_cov;
  double gate_p = 0.999;
};

/// Rectangle pseudo-measurement z = 0 over four Point2 corners.
struct Constraint {
  std::vector<std::string> targets;
  Eigen::MatrixXd noise_cov;
};

/// Relation of j in i's frame; the name "world" denotes the world frame.
struct Query {
  std::string i;
  std::string j;
};

using Step = std::variant<SenseNew, Move, SenseKnown, Constraint, Query>;

inline constexpr std::string_view kWorldFrame = "world";

std::string_view step_kind(const Step& step);

struct Scenario {
  MapMode mode = MapMode::Planar;
  std::uint64_t seed = 0;
  std::vector<Step> steps;
  /// World pose of the anchor in the simulator's ground truth.
  std::optional<Eigen::VectorXd> anchor_truth;
};

struct GateRecord {
  std::string target;
  GateResult result;
};

struct QueryRecord {
  std::string i;
  std::string j;
  Gaussian relation;
  std::optional<Ellipse> ellipse;
};

struct StepDiagnostics {
  std::vector<GateRecord> gates;
  std::optional<UpdateDiagnostics> update;
  std::optional<QueryRecord> query;
  std::optional<Eigen::VectorXd> measurement;
  std::vector<std::string> warnings;
};

struct Snapshot {
  std::size_t step = 0;        // 0 is the initial map
  std::string kind = "initial";
  StochasticMap map{MapMode::Planar};
  std::vector<std::optional<Ellipse>> ellipses;  // per entity, from its (x, y) block
  std::vector<Eigen::VectorXd> truth;            // per entity, world frame
  double confidence = 0.999;
  StepDiagnostics diagnostics;
};

struct RunOptions {
  double confidence = 0.999;
  double iekf_tol = 1e-10;
  int iekf_max_iter = 20;
};

/// Runs every step in order and returns the initial snapshot followed by one
/// per step. Randomness for step s comes from CounterRng(seed, s).
std::vector<Snapshot> run(const Scenario& scenario, const RunOptions& options = {});

/// Ellipses for every entity with an (x, y) block; empty where the block is
/// not positive definite.
std::vector<std::optional<Ellipse>> entity_ellipses(const StochasticMap& map, double p);

/// Thrown by run(); names the failing step.
class StepError : public std::runtime_error {
 public:
  StepError(std::size_t step, const Error& cause);
  std::size_t step() const { return step_; }
  ErrorKind kind() const { return kind_; }

 private:
  std::size_t step_;
  ErrorKind kind_;
};

}  // namespace stochmap
