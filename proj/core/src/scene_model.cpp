#include "graspeq/scene_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "graspeq/error.hpp"

namespace graspeq {

namespace {

constexpr std::size_t kLeafSize = 12;

bool is_finite(const Vec3& v) { return v.allFinite(); }

void consider(const PointIndex::Hit& candidate, PointIndex::Hit& best, PointIndex::Hit& second) {
  const auto better = [](const PointIndex::Hit& a, const PointIndex::Hit& b) {
    return a.distance_sq < b.distance_sq ||
           (a.distance_sq == b.distance_sq && a.index < b.index);
  };
  if (better(candidate, best)) {
    second = best;
    best = candidate;
  } else if (better(candidate, second)) {
    second = candidate;
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// PointIndex

PointIndex::PointIndex(std::span<const Vec3> points) : points_(points.begin(), points.end()) {
  order_.resize(points_.size());
  std::iota(order_.begin(), order_.end(), std::size_t{0});
  if (!points_.empty()) {
    nodes_.reserve(2 * points_.size() / kLeafSize + 2);
    build(0, points_.size());
  }
}

int PointIndex::build(std::size_t begin, std::size_t end) {
  const int id = static_cast<int>(nodes_.size());
  nodes_.push_back(Node{begin, end});
  if (end - begin <= kLeafSize) {
    return id;
  }
  Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
  Vec3 hi = -lo;
  for (std::size_t i = begin; i < end; ++i) {
    lo = lo.cwiseMin(points_[order_[i]]);
    hi = hi.cwiseMax(points_[order_[i]]);
  }
  int axis = 0;
  (hi - lo).maxCoeff(&axis);
  const std::size_t mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + static_cast<std::ptrdiff_t>(begin),
                   order_.begin() + static_cast<std::ptrdiff_t>(mid),
                   order_.begin() + static_cast<std::ptrdiff_t>(end),
                   [&](std::size_t a, std::size_t b) {
                     return points_[a][axis] < points_[b][axis] ||
                            (points_[a][axis] == points_[b][axis] && a < b);
                   });
  const double split = points_[order_[mid]][axis];
  const int left = build(begin, mid);
  const int right = build(mid, end);
  nodes_[id].axis = axis;
  nodes_[id].split = split;
  nodes_[id].left = left;
  nodes_[id].right = right;
  return id;
}

void PointIndex::search(int node_id, const Vec3& query, Hit& best, Hit& second) const {
  const Node& node = nodes_[static_cast<std::size_t>(node_id)];
  if (node.axis < 0) {
    for (std::size_t i = node.begin; i < node.end; ++i) {
      const std::size_t idx = order_[i];
      consider(Hit{idx, (points_[idx] - query).squaredNorm()}, best, second);
    }
    return;
  }
  const double diff = query[node.axis] - node.split;
  const int near = diff < 0.0 ? node.left : node.right;
  const int far = diff < 0.0 ? node.right : node.left;
  search(near, query, best, second);
  // <= keeps equal-distance ties reachable so the lowest index wins.
  if (diff * diff <= second.distance_sq) {
    search(far, query, best, second);
  }
}

PointIndex::Hit PointIndex::nearest(const Vec3& query) const { return nearest_two(query).first; }

std::pair<PointIndex::Hit, PointIndex::Hit> PointIndex::nearest_two(const Vec3& query) const {
  constexpr double inf = std::numeric_limits<double>::infinity();
  Hit best{0, inf};
  Hit second{0, inf};
  if (!nodes_.empty()) {
    search(0, query, best, second);
  }
  return {best, second};
}

// ---------------------------------------------------------------------------
// ObjectModel

ObjectModel ObjectModel::create(std::vector<Vec3> points, std::vector<Vec3> normals,
                                const Vec3& com, double mass) {
  if (points.empty()) {
    throw Error(ErrorCode::EmptyObject, "object has no surface points");
  }
  if (points.size() != normals.size()) {
    throw Error(ErrorCode::ShapeError, "points and normals differ in length");
  }
  if (!(mass > 0.0) || !std::isfinite(mass)) {
    throw Error(ErrorCode::InvalidArgument, "mass must be positive and finite");
  }
  if (!is_finite(com)) {
    throw Error(ErrorCode::InvalidArgument, "center of mass is not finite");
  }
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!is_finite(points[i])) {
      throw Error(ErrorCode::InvalidArgument, "non-finite point at index " + std::to_string(i));
    }
    if (!is_finite(normals[i]) || std::abs(normals[i].norm() - 1.0) > kUnitTolerance) {
      throw Error(ErrorCode::InvalidNormal, "normal " + std::to_string(i) + " is not unit length");
    }
  }
  ObjectModel object;
  object.inertia_ = compute_inertia(points, com, mass);
  double r2 = 0.0;
  for (const auto& p : points) r2 = std::max(r2, (p - com).squaredNorm());
  object.bounding_radius_ = std::sqrt(r2);
  object.index_ = std::make_shared<const PointIndex>(points);
  object.points_ = std::move(points);
  object.normals_ = std::move(normals);
  object.com_ = com;
  object.mass_ = mass;
  return object;
}

// ---------------------------------------------------------------------------
// ContactState

ContactState ContactState::zeros(std::size_t n) {
  return ContactState{std::vector<double>(n, 0.0), std::vector<int>(n, 0),
                      std::vector<double>(n, 0.0)};
}

void ContactState::validate(std::size_t point_count) const {
  if (likelihood.size() != point_count || part_label.size() != point_count ||
      force.size() != point_count) {
    throw Error(ErrorCode::ShapeError, "contact maps must have one entry per object point");
  }
  for (std::size_t i = 0; i < point_count; ++i) {
    const double c = likelihood[i];
    const int label = part_label[i];
    const double f = force[i];
    if (!std::isfinite(c) || c < 0.0 || c > 1.0) {
      throw Error(ErrorCode::InvalidArgument, "likelihood outside [0,1] at " + std::to_string(i));
    }
    if (label < 0 || label > kPartCount) {
      throw Error(ErrorCode::InvalidPart, "part label outside [0,16] at " + std::to_string(i));
    }
    if (!std::isfinite(f) || f < 0.0) {
      throw Error(ErrorCode::InvalidForce, "negative or non-finite force at " + std::to_string(i));
    }
    if (f > 0.0 && c <= 0.0) {
      throw Error(ErrorCode::InvalidArgument,
                  "positive force without contact likelihood at " + std::to_string(i));
    }
    if (label != 0 && c <= 0.0) {
      throw Error(ErrorCode::InvalidArgument,
                  "part label without contact likelihood at " + std::to_string(i));
    }
  }
}

// ---------------------------------------------------------------------------
// Free functions

TangentBasis build_tangent_basis(const Vec3& n) {
  if (!is_finite(n) || std::abs(n.norm() - 1.0) > kUnitTolerance) {
    throw Error(ErrorCode::InvalidNormal, "tangent basis needs a finite unit normal");
  }
  const Vec3 unit = n.normalized();
  int axis = 0;
  unit.cwiseAbs().minCoeff(&axis);
  const Vec3 helper = Vec3::Unit(axis);
  const Vec3 b = (helper - helper.dot(unit) * unit).normalized();
  const Vec3 t = unit.cross(b);
  return TangentBasis{b, t, unit};
}

double compute_inertia(std::span<const Vec3> points, const Vec3& com, double mass) {
  if (points.empty()) {
    throw Error(ErrorCode::EmptyObject, "inertia of an empty point set");
  }
  double r2 = 0.0;
  for (const auto& p : points) {
    r2 = std::max(r2, (p - com).squaredNorm());
  }
  return 0.4 * mass * r2;
}

SurfaceQuery query_surface(const ObjectModel& object, const Vec3& query) {
  const auto [best, second] = object.index().nearest_two(query);
  SurfaceQuery out;
  out.nearest = best.index;
  out.signed_distance = (query - object.point(best.index)).dot(object.normal(best.index));
  out.switch_margin = std::sqrt(second.distance_sq) - std::sqrt(best.distance_sq);
  return out;
}

double signed_distance(const ObjectModel& object, const Vec3& query) {
  const auto hit = object.index().nearest(query);
  return (query - object.point(hit.index)).dot(object.normal(hit.index));
}

double likelihood_from_distance(double d, const ContactParams& params) {
  if (d <= params.contact_radius) return 1.0;
  return params.contact_radius / d;
}

HandDistance nearest_hand_distance(const Vec3& point, std::span<const HandSample> hand) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  double best = inf;
  double second = inf;
  std::size_t best_idx = 0;
  for (std::size_t k = 0; k < hand.size(); ++k) {
    const double d = (point - hand[k].point).norm() - hand[k].radius;
    if (d < best) {
      second = best;
      best = d;
      best_idx = k;
    } else if (d < second) {
      second = d;
    }
  }
  return HandDistance{std::max(best, 0.0), best_idx, second - best};
}

ContactState contact_map_from_hand(const ObjectModel& object, std::span<const HandSample> hand,
                                   const ContactParams& params) {
  if (hand.empty()) {
    throw Error(ErrorCode::EmptyHand, "hand surface has no samples");
  }
  ContactState state = ContactState::zeros(object.size());
  for (std::size_t i = 0; i < object.size(); ++i) {
    const HandDistance hd = nearest_hand_distance(object.point(i), hand);
    const double c = likelihood_from_distance(hd.distance, params);
    state.likelihood[i] = c;
    state.part_label[i] = c >= params.threshold ? hand[hd.sample].part : 0;
  }
  return state;
}

}  // namespace graspeq
