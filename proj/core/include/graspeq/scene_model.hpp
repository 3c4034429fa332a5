#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "graspeq/geometry.hpp"

namespace graspeq {

/// Static 3-d KD-tree over a fixed point set. Immutable after construction.
class PointIndex {
 public:
  struct Hit {
    std::size_t index = 0;
    double distance_sq = 0.0;
  };

  PointIndex() = default;
  explicit PointIndex(std::span<const Vec3> points);

  /// Nearest point; ties resolve to the lowest index.
  Hit nearest(const Vec3& query) const;

  /// Nearest and second-nearest points (second is infinite when size() < 2).
  std::pair<Hit, Hit> nearest_two(const Vec3& query) const;

  std::size_t size() const { return points_.size(); }

 private:
  struct Node {
    std::size_t begin = 0;
    std::size_t end = 0;
    int axis = -1;  // -1 marks a leaf
    double split = 0.0;
    int left = -1;
    int right = -1;
  };

  int build(std::size_t begin, std::size_t end);
  void search(int node, const Vec3& query, Hit& best, Hit& second) const;

  std::vector<Vec3> points_;
  std::vector<std::size_t> order_;
  std::vector<Node> nodes_;
};

/// Sampled rigid object: surface points with outward unit normals.
///
/// Inertia is derived from the points (solid-ball approximation about the
/// center of mass) and cannot be set independently.
class ObjectModel {
 public:
  static ObjectModel create(std::vector<Vec3> points, std::vector<Vec3> normals, const Vec3& com,
                            double mass = 1.0);

  std::span<const Vec3> points() const { return points_; }
  std::span<const Vec3> normals() const { return normals_; }
  const Vec3& point(std::size_t i) const { return points_[i]; }
  const Vec3& normal(std::size_t i) const { return normals_[i]; }
  const Vec3& com() const { return com_; }
  double mass() const { return mass_; }
  double inertia() const { return inertia_; }
  /// Largest distance from the center of mass to a surface sample.
  double bounding_radius() const { return bounding_radius_; }
  std::size_t size() const { return points_.size(); }
  const PointIndex& index() const { return *index_; }

 private:
  ObjectModel() = default;

  std::vector<Vec3> points_;
  std::vector<Vec3> normals_;
  Vec3 com_ = Vec3::Zero();
  double mass_ = 1.0;
  double inertia_ = 0.0;
  double bounding_radius_ = 0.0;
  std::shared_ptr<const PointIndex> index_;
};

/// Per-point contact maps: likelihood, hand-part label (0 = none) and normal force.
struct ContactState {
  std::vector<double> likelihood;
  std::vector<int> part_label;
  std::vector<double> force;

  static ContactState zeros(std::size_t n);
  std::size_t size() const { return likelihood.size(); }

  /// Throws ShapeError / InvalidArgument when the invariants against an
  /// object with `point_count` samples do not hold.
  void validate(std::size_t point_count) const;

  bool operator==(const ContactState&) const = default;
};

struct TangentBasis {
  Vec3 b;
  Vec3 t;
  Vec3 n;
};

inline constexpr int kPartCount = 16;
inline constexpr double kUnitTolerance = 1e-6;

/// Right-handed orthonormal frame (b, t, n) with n as the third axis.
/// The helper axis is the global axis least aligned with n.
TangentBasis build_tangent_basis(const Vec3& n);

double compute_inertia(std::span<const Vec3> points, const Vec3& com, double mass);

/// Point-cloud signed distance: (q - p_k) . n_k for the nearest sample p_k.
double signed_distance(const ObjectModel& object, const Vec3& query);

struct SurfaceQuery {
  double signed_distance = 0.0;
  std::size_t nearest = 0;
  /// Distance gap between the nearest and second-nearest sample; the signed
  /// distance is discontinuous where this reaches zero.
  double switch_margin = 0.0;
};

SurfaceQuery query_surface(const ObjectModel& object, const Vec3& query);

/// A point of the hand surface. Points with radius > 0 are capsule-axis samples
/// whose surface lies `radius` away.
struct HandSample {
  Vec3 point;
  int part = 0;
  double radius = 0.0;
};

struct ContactParams {
  double contact_radius = 0.002;  // c0, meters
  double threshold = 0.5;         // likelihood at or above which a point is in contact

  /// Largest hand distance that still counts as contact (c0 / threshold).
  double contact_distance() const { return contact_radius / threshold; }
};

/// Contact likelihood from a hand distance: min(c0 / d, 1).
double likelihood_from_distance(double d, const ContactParams& params);

/// Distance from an object point to the hand surface: the nearest
/// capsule-surface distance, clamped at zero.
struct HandDistance {
  double distance = 0.0;
  std::size_t sample = 0;
  double switch_margin = 0.0;
};

HandDistance nearest_hand_distance(const Vec3& point, std::span<const HandSample> hand);

/// Likelihood = min(c0/d, 1) using the nearest hand sample; part label of
/// that sample where the likelihood reaches the threshold. Force is zero.
ContactState contact_map_from_hand(const ObjectModel& object, std::span<const HandSample> hand,
                                   const ContactParams& params = {});

}  // namespace graspeq
