#include "stochmap/stochastic_map.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include <Eigen/Cholesky>

#include "stochmap/error.hpp"
#include "stochmap/relations.hpp"
#include "stochmap/transforms2d.hpp"

namespace stochmap {
namespace {

bool is_pose(EntityKind kind) { return kind == EntityKind::Pose2 || kind == EntityKind::Pose3; }

Eigen::MatrixXd grown(const Eigen::MatrixXd& c, const Eigen::MatrixXd& cross,
                      const Eigen::MatrixXd& diag) {
  const Eigen::Index n = c.rows();
  const Eigen::Index d = diag.rows();
  Eigen::MatrixXd out(n + d, n + d);
  out.topLeftCorner(n, n) = c;
  out.bottomLeftCorner(d, n) = cross;
  out.topRightCorner(n, d) = cross.transpose();
  out.bottomRightCorner(d, d) = diag;
  return out;
}

using Factor = Eigen::LDLT<Eigen::MatrixXd>;

bool positive_definite(const Factor& f) {
  return f.info() == Eigen::Success && f.isPositive() && f.vectorD().minCoeff() > 0.0;
}

struct Gain {
  Eigen::MatrixXd k;
  Eigen::MatrixXd s;
  Factor ldlt;
};

Gain kalman_gain(const Eigen::MatrixXd& cov, const std::vector<Eigen::Index>& idx,
                 const Eigen::MatrixXd& h, const Eigen::MatrixXd& noise) {
  Gain g;
  const Eigen::MatrixXd pht = cov(Eigen::all, idx) * h.transpose();
  g.s = symmetrized(h * cov(idx, idx) * h.transpose() + noise);
  if (!g.s.allFinite()) {
    throw Error(ErrorKind::InnovationNotPD, "innovation covariance is not finite");
  }
  g.ldlt.compute(g.s);
  if (!positive_definite(g.ldlt)) {
    throw Error(ErrorKind::InnovationNotPD, "innovation covariance is not positive definite");
  }
  g.k = g.ldlt.solve(pht.transpose()).transpose();
  return g;
}

}  // namespace

StochasticMap::StochasticMap(MapMode mode, std::string anchor_name) : mode_(mode) {
  const EntityKind kind = pose_kind(mode);
  entities_.push_back({EntityId{0}, kind, 0, std::move(anchor_name)});
  mean_ = Eigen::VectorXd::Zero(kind_dimension(kind));
  cov_ = Eigen::MatrixXd::Zero(mean_.size(), mean_.size());
}

StochasticMap StochasticMap::from_parts(MapMode mode, std::vector<Entity> entities,
                                        Eigen::VectorXd mean, Eigen::MatrixXd cov) {
  StochasticMap m;
  m.mode_ = mode;
  m.entities_ = std::move(entities);
  m.mean_ = std::move(mean);
  m.cov_ = std::move(cov);
  m.validate();
  m.cov_ = symmetrized(m.cov_);
  m.normalize_angles();
  return m;
}

void StochasticMap::validate() const {
  if (entities_.empty() || entities_.front().kind != pose_kind(mode_)) {
    throw Error(ErrorKind::KindMismatch, "the first entity must be the anchor pose");
  }
  std::set<EntityId> ids;
  std::set<std::string> names;
  Eigen::Index offset = 0;
  for (const Entity& e : entities_) {
    if (!kind_allowed(mode_, e.kind)) {
      throw Error(ErrorKind::KindMismatch, "entity kind not allowed in this map mode");
    }
    if (!ids.insert(e.id).second) {
      throw Error(ErrorKind::DuplicateEntity, "entity id appears twice");
    }
    if (!e.name.empty() && !names.insert(e.name).second) {
      throw Error(ErrorKind::DuplicateEntity, "entity name '" + e.name + "' appears twice");
    }
    if (e.offset != offset) {
      throw Error(ErrorKind::ShapeMismatch, "entity offsets are not contiguous");
    }
    offset += e.dimension();
  }
  if (mean_.size() != offset || cov_.rows() != offset || cov_.cols() != offset) {
    throw Error(ErrorKind::ShapeMismatch, "state dimension does not match the entities");
  }
  if (!mean_.allFinite()) {
    throw Error(ErrorKind::InvalidValue, "state mean is not finite");
  }
  check_covariance(cov_);
}

const Entity& StochasticMap::entity(EntityId id) const {
  auto it = std::find_if(entities_.begin(), entities_.end(),
                         [id](const Entity& e) { return e.id == id; });
  if (it == entities_.end()) {
    throw Error(ErrorKind::UnknownEntity, "no entity with id " + std::to_string(id.value));
  }
  return *it;
}

std::optional<EntityId> StochasticMap::find(std::string_view name) const {
  for (const Entity& e : entities_) {
    if (e.name == name) return e.id;
  }
  return std::nullopt;
}

Eigen::VectorXd StochasticMap::mean_of(EntityId id) const {
  const Entity& e = entity(id);
  return mean_.segment(e.offset, e.dimension());
}

Eigen::MatrixXd StochasticMap::block(EntityId i, EntityId j) const {
  const Entity& a = entity(i);
  const Entity& b = entity(j);
  return cov_.block(a.offset, b.offset, a.dimension(), b.dimension());
}

Gaussian StochasticMap::marginal(EntityId id) const { return {mean_of(id), block(id, id)}; }

std::vector<Eigen::Index> StochasticMap::indices(std::span<const EntityId> ids) const {
  std::vector<Eigen::Index> out;
  for (EntityId id : ids) {
    const Entity& e = entity(id);
    for (Eigen::Index k = 0; k < e.dimension(); ++k) out.push_back(e.offset + k);
  }
  return out;
}

Eigen::VectorXd StochasticMap::subvector(std::span<const EntityId> ids) const {
  const std::vector<Eigen::Index> idx = indices(ids);
  return mean_(idx);
}

void StochasticMap::require_pose(const Entity& e) const {
  if (!is_pose(e.kind)) {
    throw Error(ErrorKind::KindMismatch,
                "entity '" + e.name + "' is a " + std::string(to_string(e.kind)) + ", not a pose");
  }
}

void StochasticMap::normalize_angles() {
  for (const Entity& e : entities_) {
    for (int k : kind_angle_components(e.kind)) {
      mean_(e.offset + k) = normalize_angle(mean_(e.offset + k));
    }
  }
}

EntityId StochasticMap::add_object_world(const Gaussian& prior, EntityKind kind, std::string name) {
  if (!kind_allowed(mode_, kind)) {
    throw Error(ErrorKind::KindMismatch, "entity kind not allowed in this map mode");
  }
  if (prior.dim() != kind_dimension(kind)) {
    throw Error(ErrorKind::ShapeMismatch, "prior dimension does not match the entity kind");
  }
  if (!name.empty() && find(name)) {
    throw Error(ErrorKind::DuplicateEntity, "entity name '" + name + "' already exists");
  }
  const EntityId id{static_cast<std::uint32_t>(entities_.size())};
  const Eigen::Index n = dimension();
  entities_.push_back({id, kind, n, std::move(name)});
  mean_.conservativeResize(n + prior.dim());
  mean_.tail(prior.dim()) = prior.mean();
  cov_ = grown(cov_, Eigen::MatrixXd::Zero(prior.dim(), n), prior.cov());
  normalize_angles();
  return id;
}

EntityId StochasticMap::add_object_relative(EntityId base, const Gaussian& rel, EntityKind kind,
                                            std::string name) {
  const Entity b = entity(base);
  require_pose(b);
  if (!kind_allowed(mode_, kind)) {
    throw Error(ErrorKind::KindMismatch, "entity kind not allowed in this map mode");
  }
  if (rel.dim() != kind_dimension(kind)) {
    throw Error(ErrorKind::ShapeMismatch, "relation dimension does not match the entity kind");
  }
  if (!name.empty() && find(name)) {
    throw Error(ErrorKind::DuplicateEntity, "entity name '" + name + "' already exists");
  }
  const Relation g = compound_relation(mode_, kind, mean_of(base), rel.mean());
  const Eigen::MatrixXd c_base_all = cov_.middleRows(b.offset, b.dimension());
  const Eigen::MatrixXd c_bb = c_base_all.middleCols(b.offset, b.dimension());
  const Eigen::MatrixXd cross = g.d_first * c_base_all;
  const Eigen::MatrixXd diag = symmetrized(g.d_first * c_bb * g.d_first.transpose() +
                                           g.d_second * rel.cov() * g.d_second.transpose());

  const EntityId id{static_cast<std::uint32_t>(entities_.size())};
  const Eigen::Index n = dimension();
  entities_.push_back({id, kind, n, std::move(name)});
  mean_.conservativeResize(n + rel.dim());
  mean_.tail(rel.dim()) = g.value;
  cov_ = grown(cov_, cross, diag);
  normalize_angles();
  return id;
}

void StochasticMap::move_entity(EntityId id, const Gaussian& control) {
  const Entity e = entity(id);
  require_pose(e);
  const Eigen::Index d = e.dimension();
  if (control.dim() != d) {
    throw Error(ErrorKind::ShapeMismatch, "control dimension does not match the entity");
  }
  const Relation f = compound_relation(mode_, e.kind, mean_of(id), control.mean());
  const Eigen::MatrixXd row = f.d_first * cov_.middleRows(e.offset, d);
  const Eigen::MatrixXd c_rr = cov_.block(e.offset, e.offset, d, d);
  const Eigen::MatrixXd a = symmetrized(f.d_first * c_rr * f.d_first.transpose() +
                                        f.d_second * control.cov() * f.d_second.transpose());
  cov_.middleRows(e.offset, d) = row;
  cov_.middleCols(e.offset, d) = row.transpose();
  cov_.block(e.offset, e.offset, d, d) = a;
  mean_.segment(e.offset, d) = f.value;
  normalize_angles();
}

UpdateDiagnostics StochasticMap::ekf_update(const SensorModel& sensor, const Eigen::VectorXd& z) {
  return iekf_update(sensor, z, std::numeric_limits<double>::infinity(), 1);
}

UpdateDiagnostics StochasticMap::iekf_update(const SensorModel& sensor, const Eigen::VectorXd& z,
                                             double tol, int max_iter) {
  if (max_iter < 1 || !(tol >= 0.0)) {
    throw Error(ErrorKind::InvalidValue, "iteration limits must be positive");
  }
  for (std::size_t k = 0; k < sensor.touched().size(); ++k) {
    if (entity(sensor.touched()[k]).dimension() != sensor.block_dims()[k]) {
      throw Error(ErrorKind::ShapeMismatch, "sensor block does not match the entity dimension");
    }
  }
  if (z.size() != sensor.meas_dim() || !z.allFinite()) {
    throw Error(ErrorKind::ShapeMismatch, "measurement has the wrong size or is not finite");
  }

  const std::vector<Eigen::Index> idx = indices(sensor.touched());
  std::vector<bool> is_angle(static_cast<std::size_t>(dimension()), false);
  for (const Entity& e : entities_) {
    for (int k : kind_angle_components(e.kind)) is_angle[e.offset + k] = true;
  }
  auto wrapped = [&](Eigen::VectorXd d, const std::vector<Eigen::Index>* map) {
    for (Eigen::Index r = 0; r < d.size(); ++r) {
      const Eigen::Index s = map ? (*map)[r] : r;
      if (is_angle[s]) d(r) = normalize_angle(d(r));
    }
    return d;
  };
  auto normalized = [&](Eigen::VectorXd x) {
    for (Eigen::Index r = 0; r < x.size(); ++r) {
      if (is_angle[r]) x(r) = normalize_angle(x(r));
    }
    return x;
  };

  const Eigen::VectorXd prior = mean_;
  const Eigen::VectorXd prior_sub = prior(idx);
  UpdateDiagnostics diag;
  diag.converged = false;

  Eigen::VectorXd current = prior;
  Eigen::MatrixXd gain;
  Eigen::MatrixXd h_accepted;
  for (int step = 1; step <= max_iter; ++step) {
    const Eigen::VectorXd sub = current(idx);
    const Eigen::VectorXd h = sensor.evaluate(sub);
    const Eigen::MatrixXd jac = sensor.jacobian(sub);
    const Gain g = kalman_gain(cov_, idx, jac, sensor.noise_cov());
    const Eigen::VectorXd offset = wrapped(prior_sub - sub, &idx);
    const Eigen::VectorXd r = sensor.residual(z, h) - jac * offset;
    const Eigen::VectorXd next = normalized(prior + g.k * r);
    const double move = wrapped(next - current, nullptr).norm();

    if (step == 1) {
      diag.innovation = sensor.residual(z, h);
      diag.innovation_cov = g.s;
      diag.mahalanobis_sq = diag.innovation.dot(g.ldlt.solve(diag.innovation));
    }
    if (step > 1 && move < tol) {
      diag.converged = true;
      break;
    }
    current = next;
    gain = g.k;
    h_accepted = jac;
    diag.iterations = step;
    if (move < tol) {
      diag.converged = true;
      break;
    }
  }

  cov_ = symmetrized(cov_ - gain * (h_accepted * cov_(idx, Eigen::all)));
  mean_ = current;
  diag.gain = std::move(gain);
  return diag;
}

Gaussian StochasticMap::extract_relation(EntityId i, EntityId j) const {
  const Entity& a = entity(i);
  const Entity& b = entity(j);
  require_pose(a);
  if (i == j) {
    return Gaussian::exact(Eigen::VectorXd::Zero(a.dimension()));
  }
  const Relation rel = tail_to_tail_relation(mode_, b.kind, mean_of(i), mean_of(j));
  Eigen::MatrixXd g(rel.value.size(), a.dimension() + b.dimension());
  g << rel.d_first, rel.d_second;
  const std::array<EntityId, 2> ids{i, j};
  const std::vector<Eigen::Index> idx = indices(ids);
  return {rel.value, symmetrized(g * cov_(idx, idx) * g.transpose())};
}

Gaussian extract_relation(const StochasticMap& map, std::optional<EntityId> i,
                          std::optional<EntityId> j) {
  const EntityKind pose = pose_kind(map.mode());
  if (i && j) return map.extract_relation(*i, *j);
  if (!i && !j) return Gaussian::exact(Eigen::VectorXd::Zero(kind_dimension(pose)));
  if (!i) return map.marginal(*j);
  const Entity& a = map.entity(*i);
  if (a.kind != pose) {
    throw Error(ErrorKind::KindMismatch, "entity '" + a.name + "' is not a pose");
  }
  const Eigen::VectorXd origin = Eigen::VectorXd::Zero(a.dimension());
  const Relation rel = tail_to_tail_relation(map.mode(), pose, map.mean_of(*i), origin);
  return {rel.value, symmetrized(rel.d_first * map.block(*i, *i) * rel.d_first.transpose())};
}

GateResult mahalanobis_gate(const Gaussian& expected, const Eigen::VectorXd& z,
                            const Eigen::MatrixXd& noise_cov, double p,
                            std::span<const int> angle_components) {
  if (z.size() != expected.dim() || noise_cov.rows() != expected.dim() ||
      noise_cov.cols() != expected.dim()) {
    throw Error(ErrorKind::ShapeMismatch, "gate inputs do not conform");
  }
  Eigen::VectorXd nu = z - expected.mean();
  for (int k : angle_components) nu(k) = normalize_angle(nu(k));
  const Eigen::MatrixXd s = symmetrized(expected.cov() + noise_cov);
  const Factor ldlt(s);
  if (!positive_definite(ldlt)) {
    throw Error(ErrorKind::NonPositiveDefinite, "innovation covariance is not positive definite");
  }
  GateResult out;
  out.distance_sq = nu.dot(ldlt.solve(nu));
  out.threshold = chi_square_quantile(p, static_cast<int>(nu.size()));
  out.accept = out.distance_sq <= out.threshold;
  return out;
}

}  // namespace stochmap
