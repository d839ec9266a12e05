#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "stochmap/transforms3d.hpp"

namespace stochmap {

enum class MapMode { Planar, SpatialEuler, SpatialRpy };

/// Scalar is a single unconstrained variable (used for toy filters).
enum class EntityKind { Scalar, Point2, Pose2, Pose3 };

std::string_view to_string(MapMode mode);
std::string_view to_string(EntityKind kind);
/// Accepts "2D", "3D-Euler", "3D-RPY"; throws InvalidValue otherwise.
MapMode map_mode_from_string(std::string_view text);
EntityKind entity_kind_from_string(std::string_view text);

Eigen::Index kind_dimension(EntityKind kind);
/// Offsets of angle-valued components within an entity of this kind.
std::vector<int> kind_angle_components(EntityKind kind);
/// The pose kind that carries the map's world frame and its robots.
EntityKind pose_kind(MapMode mode);
AngleConvention convention_of(MapMode mode);
bool kind_allowed(MapMode mode, EntityKind kind);

struct EntityId {
  std::uint32_t value = 0;
  auto operator<=>(const EntityId&) const = default;
};

struct Entity {
  EntityId id;
  EntityKind kind = EntityKind::Pose2;
  Eigen::Index offset = 0;
  std::string name;

  Eigen::Index dimension() const { return kind_dimension(kind); }
};

}  // namespace stochmap
