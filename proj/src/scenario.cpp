#include "stochmap/scenario.hpp"

#include <cmath>

#include "stochmap/random.hpp"
#include "stochmap/relations.hpp"
#include "stochmap/sensors.hpp"
#include "stochmap/transforms2d.hpp"

namespace stochmap {
namespace {

template <class... F>
struct Overloaded : F... {
  using F::operator()...;
};

class Runner {
 public:
  Runner(const Scenario& sc, const RunOptions& opt) : sc_(sc), opt_(opt), map_(sc.mode) {
    const Eigen::Index d = kind_dimension(pose_kind(sc.mode));
    Eigen::VectorXd anchor = sc.anchor_truth.value_or(Eigen::VectorXd::Zero(d));
    if (anchor.size() != d) {
      throw Error(ErrorKind::ShapeMismatch, "anchor truth has the wrong dimension");
    }
    truth_.push_back(std::move(anchor));
  }

  Snapshot snapshot(std::size_t step, std::string kind, StepDiagnostics diag) const {
    Snapshot s;
    s.step = step;
    s.kind = std::move(kind);
    s.map = map_;
    s.ellipses = entity_ellipses(map_, opt_.confidence);
    s.truth = truth_;
    s.confidence = opt_.confidence;
    s.diagnostics = std::move(diag);
    return s;
  }

  StepDiagnostics apply(const Step& step, std::size_t index) {
    CounterRng rng(sc_.seed, index);
    StepDiagnostics diag;
    std::visit(Overloaded{
                   [&](const SenseNew& s) { sense_new(s, rng, diag); },
                   [&](const Move& s) { move(s, rng); },
                   [&](const SenseKnown& s) { sense_known(s, rng, diag); },
                   [&](const Constraint& s) { constrain(s, diag); },
                   [&](const Query& s) { query(s, diag); },
               },
               step);
    warn_singular(diag);
    return diag;
  }

 private:
  EntityId lookup(const std::string& name) const {
    if (auto id = map_.find(name)) return *id;
    throw Error(ErrorKind::UnknownEntity, "no entity named '" + name + "'");
  }

  Eigen::VectorXd noisy(const Eigen::VectorXd& value, const Eigen::MatrixXd& cov,
                        EntityKind kind, CounterRng& rng) const {
    if (cov.rows() != value.size() || cov.cols() != value.size()) {
      throw Error(ErrorKind::ShapeMismatch, "noise covariance does not match the value");
    }
    check_covariance(cov);
    Eigen::VectorXd out = rng.gaussian(value, covariance_factor(cov));
    for (int k : kind_angle_components(kind)) out(k) = normalize_angle(out(k));
    return out;
  }

  void sense_new(const SenseNew& s, CounterRng& rng, StepDiagnostics& diag) {
    const EntityId actor = lookup(s.actor);
    const EntityKind kind = s.kind.value_or(pose_kind(sc_.mode));
    if (s.true_relation.size() != kind_dimension(kind)) {
      throw Error(ErrorKind::ShapeMismatch, "true relation has the wrong dimension");
    }
    const Eigen::VectorXd z = noisy(s.true_relation, s.noise_cov, kind, rng);
    diag.measurement = z;
    for (const std::string& name : s.gate_against) {
      const EntityId target = lookup(name);
      if (map_.entity(target).kind != kind) {
        throw Error(ErrorKind::KindMismatch, "cannot gate against '" + name + "'");
      }
      const Gaussian expected = map_.extract_relation(actor, target);
      const std::vector<int> angles = kind_angle_components(kind);
      diag.gates.push_back(
          {name, mahalanobis_gate(expected, z, floored_noise(s.noise_cov), s.gate_p, angles)});
    }
    const Eigen::VectorXd world =
        compound_value(sc_.mode, kind, truth_[actor.value], s.true_relation);
    map_.add_object_relative(actor, Gaussian(z, s.noise_cov), kind, s.name);
    truth_.push_back(world);
  }

  void move(const Move& s, CounterRng& rng) {
    const EntityId actor = lookup(s.actor);
    const EntityKind kind = map_.entity(actor).kind;
    map_.move_entity(actor, Gaussian(s.control_mean, s.noise_cov));
    const Eigen::VectorXd actual = noisy(s.control_mean, s.noise_cov, kind, rng);
    truth_[actor.value] = compound_value(sc_.mode, kind, truth_[actor.value], actual);
  }

  void sense_known(const SenseKnown& s, CounterRng& rng, StepDiagnostics& diag) {
    const EntityId actor = lookup(s.actor);
    const EntityId target = lookup(s.target);
    const EntityKind kind = map_.entity(target).kind;
    const SensorModel sensor = relative_pose_sensor(map_, actor, target, s.noise_cov);
    const Eigen::VectorXd truth =
        tail_to_tail_value(sc_.mode, kind, truth_[actor.value], truth_[target.value]);
    const Eigen::VectorXd z = noisy(truth, s.noise_cov, kind, rng);
    diag.measurement = z;
    const Gaussian expected = map_.extract_relation(actor, target);
    const GateResult gate = mahalanobis_gate(expected, z, sensor.noise_cov(), s.gate_p,
                                             sensor.angle_components());
    diag.gates.push_back({s.target, gate});
    if (gate.accept) {
      diag.update = map_.iekf_update(sensor, z, opt_.iekf_tol, opt_.iekf_max_iter);
    } else {
      diag.warnings.push_back("measurement of '" + s.target + "' rejected by the gate");
    }
  }

  void constrain(const Constraint& s, StepDiagnostics& diag) {
    if (s.targets.size() != 4) {
      throw Error(ErrorKind::ShapeMismatch, "a rectangle constraint needs four corners");
    }
    const SensorModel sensor = rectangle_sensor(map_, lookup(s.targets[0]), lookup(s.targets[1]),
                                                lookup(s.targets[2]), lookup(s.targets[3]),
                                                s.noise_cov);
    diag.measurement = Eigen::VectorXd::Zero(3);
    diag.update =
        map_.iekf_update(sensor, Eigen::VectorXd::Zero(3), opt_.iekf_tol, opt_.iekf_max_iter);
  }

  void query(const Query& s, StepDiagnostics& diag) {
    auto frame = [&](const std::string& name) -> std::optional<EntityId> {
      if (name == kWorldFrame) return std::nullopt;
      return lookup(name);
    };
    const Gaussian rel = extract_relation(map_, frame(s.i), frame(s.j));
    std::optional<Ellipse> ellipse;
    try {
      ellipse = confidence_ellipse(Eigen::Vector2d(rel.mean().head<2>()),
                                   Eigen::Matrix2d(rel.cov().topLeftCorner<2, 2>()),
                                   opt_.confidence);
    } catch (const Error&) {
    }
    diag.query = QueryRecord{s.i, s.j, rel, ellipse};
  }

  void warn_singular(StepDiagnostics& diag) const {
    if (sc_.mode == MapMode::Planar) return;
    const AngleConvention conv = convention_of(sc_.mode);
    for (const Entity& e : map_.entities()) {
      if (e.kind != EntityKind::Pose3) continue;
      const double margin = singularity_margin(Pose3::from_vector(map_.mean_of(e.id), conv));
      if (margin < kSingularityWarnMargin) {
        diag.warnings.push_back("entity '" + e.name + "' is near a singular orientation (margin " +
                                std::to_string(margin) + ")");
      }
    }
  }

  const Scenario& sc_;
  const RunOptions& opt_;
  StochasticMap map_;
  std::vector<Eigen::VectorXd> truth_;
};

}  // namespace

std::string_view step_kind(const Step& step) {
  return std::visit(Overloaded{
                        [](const SenseNew&) { return std::string_view("sense_new"); },
                        [](const Move&) { return std::string_view("move"); },
                        [](const SenseKnown&) { return std::string_view("sense_known"); },
                        [](const Constraint&) { return std::string_view("constraint"); },
                        [](const Query&) { return std::string_view("query"); },
                    },
                    step);
}

std::vector<std::optional<Ellipse>> entity_ellipses(const StochasticMap& map, double p) {
  std::vector<std::optional<Ellipse>> out;
  for (const Entity& e : map.entities()) {
    if (e.dimension() < 2) {
      out.emplace_back();
      continue;
    }
    const Eigen::Vector2d center = map.mean_of(e.id).head<2>();
    const Eigen::Matrix2d cov = map.block(e.id, e.id).topLeftCorner<2, 2>();
    try {
      out.emplace_back(confidence_ellipse(center, cov, p));
    } catch (const Error&) {
      out.emplace_back();
    }
  }
  return out;
}

StepError::StepError(std::size_t step, const Error& cause)
    : std::runtime_error("step " + std::to_string(step) + ": " + cause.what()),
      step_(step),
      kind_(cause.kind()) {}

std::vector<Snapshot> run(const Scenario& scenario, const RunOptions& options) {
  Runner runner(scenario, options);
  std::vector<Snapshot> out;
  out.push_back(runner.snapshot(0, "initial", {}));
  for (std::size_t s = 0; s < scenario.steps.size(); ++s) {
    const std::size_t index = s + 1;
    StepDiagnostics diag;
    try {
      diag = runner.apply(scenario.steps[s], index);
    } catch (const Error& e) {
      throw StepError(index, e);
    }
    out.push_back(runner.snapshot(index, std::string(step_kind(scenario.steps[s])), diag));
  }
  return out;
}

}  // namespace stochmap
