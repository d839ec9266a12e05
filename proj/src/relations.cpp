#include "stochmap/relations.hpp"

#include "stochmap/error.hpp"
#include "stochmap/transforms2d.hpp"
#include "stochmap/transforms3d.hpp"

namespace stochmap {
namespace {

void check_kinds(MapMode mode, EntityKind second_kind) {
  const bool ok = second_kind == pose_kind(mode) ||
                  (mode == MapMode::Planar && second_kind == EntityKind::Point2);
  if (!ok) {
    throw Error(ErrorKind::KindMismatch, "relation between a pose and a " +
                                             std::string(to_string(second_kind)) +
                                             " is not defined in " + std::string(to_string(mode)));
  }
}

Relation from_point(const PointTransform2& p) {
  return {p.value, p.d_pose, p.d_point};
}

}  // namespace

Relation compound_relation(MapMode mode, EntityKind second_kind, const Eigen::VectorXd& first,
                           const Eigen::VectorXd& second) {
  check_kinds(mode, second_kind);
  if (mode == MapMode::Planar) {
    const Pose2 a = Pose2::from_vector(first);
    if (second_kind == EntityKind::Point2) {
      return from_point(transform_point2(a, Eigen::Vector2d(second)));
    }
    const Pose2 b = Pose2::from_vector(second);
    const Pose2 r = compose2(a, b);
    const CompoundJacobian2 j = jac_compose2(a, b, r);
    return {r.vector(), j.leftCols<3>(), j.rightCols<3>()};
  }
  const AngleConvention conv = convention_of(mode);
  const Pose3 a = Pose3::from_vector(first, conv);
  const Pose3 b = Pose3::from_vector(second, conv);
  const Pose3 r = compose3(a, b);
  const CompoundJacobian3 j = jac_compose3(a, b, r);
  return {r.vector(), j.leftCols<6>(), j.rightCols<6>()};
}

Relation tail_to_tail_relation(MapMode mode, EntityKind second_kind, const Eigen::VectorXd& first,
                               const Eigen::VectorXd& second) {
  check_kinds(mode, second_kind);
  if (mode == MapMode::Planar) {
    const Pose2 a = Pose2::from_vector(first);
    if (second_kind == EntityKind::Point2) {
      return from_point(relative_point2(a, Eigen::Vector2d(second)));
    }
    const TailToTail2 t = tail_to_tail2(a, Pose2::from_vector(second));
    return {t.value.vector(), t.jacobian.leftCols<3>(), t.jacobian.rightCols<3>()};
  }
  const AngleConvention conv = convention_of(mode);
  const TailToTail3 t =
      tail_to_tail3(Pose3::from_vector(first, conv), Pose3::from_vector(second, conv));
  return {t.value.vector(), t.jacobian.leftCols<6>(), t.jacobian.rightCols<6>()};
}

Eigen::VectorXd compound_value(MapMode mode, EntityKind second_kind, const Eigen::VectorXd& first,
                               const Eigen::VectorXd& second) {
  check_kinds(mode, second_kind);
  if (mode == MapMode::Planar) {
    const Pose2 a = Pose2::from_vector(first);
    if (second_kind == EntityKind::Point2) {
      return transform_point2(a, Eigen::Vector2d(second)).value;
    }
    return compose2(a, Pose2::from_vector(second)).vector();
  }
  const AngleConvention conv = convention_of(mode);
  return compose3(Pose3::from_vector(first, conv), Pose3::from_vector(second, conv)).vector();
}

Eigen::VectorXd tail_to_tail_value(MapMode mode, EntityKind second_kind,
                                   const Eigen::VectorXd& first, const Eigen::VectorXd& second) {
  check_kinds(mode, second_kind);
  if (mode == MapMode::Planar) {
    const Pose2 a = Pose2::from_vector(first);
    if (second_kind == EntityKind::Point2) {
      return relative_point2(a, Eigen::Vector2d(second)).value;
    }
    return compose2(inverse2(a), Pose2::from_vector(second)).vector();
  }
  const AngleConvention conv = convention_of(mode);
  return compose3(inverse3(Pose3::from_vector(first, conv)), Pose3::from_vector(second, conv))
      .vector();
}

}  // namespace stochmap
