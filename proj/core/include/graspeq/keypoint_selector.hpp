#pragma once

#include <map>
#include <vector>

#include "graspeq/equilibrium.hpp"
#include "graspeq/scene_model.hpp"

namespace graspeq {

/// A connected patch of one hand part's contact points, reduced to a single
/// force-weighted contact.
struct PartCluster {
  int part = 0;
  std::vector<std::size_t> points;  // indices into the object
  Vec3 center = Vec3::Zero();       // sum F_i p_i / sum F_i
  double force = 0.0;               // sum F_i
  Vec3 normal = Vec3::UnitZ();      // force-weighted mean normal, renormalized

  Contact as_contact() const { return Contact{center, normal, force}; }
};

using ClusterMap = std::map<int, std::vector<PartCluster>>;
using RepresentativeMap = std::map<int, PartCluster>;

struct KeypointSet {
  std::vector<int> parts;
  std::vector<Vec3> centers;
  std::vector<double> forces;
  std::vector<Vec3> normals;
  std::vector<Vec3> targets;
  double energy = 0.0;

  std::size_t size() const { return parts.size(); }
};

struct KeypointParams {
  double cluster_radius = 0.01;  // single-linkage distance, meters
  int n_kp = 3;
  double target_offset = 0.005;  // r, roughly a finger radius
  bool fixpoint = false;         // repeat the cluster pass until nothing changes
  double mu = kDefaultFriction;
  Vec3 gravity = kDefaultGravity;
};

/// Single-linkage clustering of force-bearing contact points within each part.
ClusterMap cluster_contacts(const ObjectModel& object, const ContactState& contacts, double radius);

/// Builds a cluster from a set of point indices (exposed for tests and tools).
PartCluster make_cluster(const ObjectModel& object, const ContactState& contacts, int part,
                         std::vector<std::size_t> points);

/// Stability energy of a set of representative contacts.
double representative_energy(const ObjectModel& object, std::span<const PartCluster> clusters,
                             double mu, const Vec3& gravity);

/// Picks one cluster per part: start from the heaviest cluster of every part,
/// then for each part in ascending id choose the cluster minimizing the
/// stability energy together with the current representatives of the others.
RepresentativeMap select_clusters(const ClusterMap& clusters, const ObjectModel& object, double mu,
                                  const Vec3& gravity, bool fixpoint = false);

/// Exhaustive search over all n_kp-subsets of parts for the least stability
/// energy; ties go to the lexicographically smallest part tuple.
KeypointSet select_keypoints(const RepresentativeMap& representatives, int n_kp,
                             const ObjectModel& object, double mu, const Vec3& gravity);

/// Fills targets = centers + r * normals.
KeypointSet make_targets(KeypointSet keypoints, double r);

/// cluster -> select clusters -> select keypoints -> targets.
KeypointSet extract_keypoints(const ObjectModel& object, const ContactState& contacts,
                              const KeypointParams& params = {});

}  // namespace graspeq
