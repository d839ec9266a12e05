#include "stochmap/entity.hpp"

#include "stochmap/error.hpp"

namespace stochmap {

std::string_view to_string(MapMode mode) {
  switch (mode) {
    case MapMode::Planar: return "2D";
    case MapMode::SpatialEuler: return "3D-Euler";
    case MapMode::SpatialRpy: return "3D-RPY";
  }
  return "?";
}

std::string_view to_string(EntityKind kind) {
  switch (kind) {
    case EntityKind::Scalar: return "Scalar";
    case EntityKind::Point2: return "Point2";
    case EntityKind::Pose2: return "Pose2";
    case EntityKind::Pose3: return "Pose3";
  }
  return "?";
}

MapMode map_mode_from_string(std::string_view text) {
  if (text == "2D") return MapMode::Planar;
  if (text == "3D-Euler") return MapMode::SpatialEuler;
  if (text == "3D-RPY") return MapMode::SpatialRpy;
  throw Error(ErrorKind::InvalidValue, "unknown map mode '" + std::string(text) + "'");
}

EntityKind entity_kind_from_string(std::string_view text) {
  if (text == "Scalar") return EntityKind::Scalar;
  if (text == "Point2") return EntityKind::Point2;
  if (text == "Pose2") return EntityKind::Pose2;
  if (text == "Pose3") return EntityKind::Pose3;
  throw Error(ErrorKind::InvalidValue, "unknown entity kind '" + std::string(text) + "'");
}

Eigen::Index kind_dimension(EntityKind kind) {
  switch (kind) {
    case EntityKind::Scalar: return 1;
    case EntityKind::Point2: return 2;
    case EntityKind::Pose2: return 3;
    case EntityKind::Pose3: return 6;
  }
  return 0;
}

std::vector<int> kind_angle_components(EntityKind kind) {
  switch (kind) {
    case EntityKind::Pose2: return {2};
    case EntityKind::Pose3: return {3, 4, 5};
    default: return {};
  }
}

EntityKind pose_kind(MapMode mode) {
  return mode == MapMode::Planar ? EntityKind::Pose2 : EntityKind::Pose3;
}

AngleConvention convention_of(MapMode mode) {
  return mode == MapMode::SpatialRpy ? AngleConvention::Rpy : AngleConvention::Euler;
}

bool kind_allowed(MapMode mode, EntityKind kind) {
  switch (kind) {
    case EntityKind::Scalar: return true;
    case EntityKind::Point2:
    case EntityKind::Pose2: return mode == MapMode::Planar;
    case EntityKind::Pose3: return mode != MapMode::Planar;
  }
  return false;
}

}  // namespace stochmap
