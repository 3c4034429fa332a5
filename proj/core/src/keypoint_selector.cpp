#include "graspeq/keypoint_selector.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace graspeq {

namespace {

std::size_t find_root(std::vector<std::size_t>& parent, std::size_t i) {
  while (parent[i] != i) {
    parent[i] = parent[parent[i]];
    i = parent[i];
  }
  return i;
}

std::vector<Contact> to_contacts(std::span<const PartCluster> clusters) {
  std::vector<Contact> out;
  out.reserve(clusters.size());
  for (const auto& c : clusters) out.push_back(c.as_contact());
  return out;
}

}  // namespace

PartCluster make_cluster(const ObjectModel& object, const ContactState& contacts, int part,
                         std::vector<std::size_t> points) {
  PartCluster c;
  c.part = part;
  c.points = std::move(points);
  std::sort(c.points.begin(), c.points.end());
  Vec3 weighted_pos = Vec3::Zero();
  Vec3 weighted_normal = Vec3::Zero();
  double heaviest = -1.0;
  Vec3 heaviest_normal = Vec3::UnitZ();
  for (std::size_t i : c.points) {
    const double f = contacts.force[i];
    c.force += f;
    weighted_pos += f * object.point(i);
    weighted_normal += f * object.normal(i);
    if (f > heaviest) {
      heaviest = f;
      heaviest_normal = object.normal(i);
    }
  }
  if (c.force > 0.0) {
    c.center = weighted_pos / c.force;
  }
  const double len = weighted_normal.norm();
  c.normal = (c.force > 0.0 && len > 1e-9 * c.force) ? Vec3(weighted_normal / len) : heaviest_normal;
  return c;
}

ClusterMap cluster_contacts(const ObjectModel& object, const ContactState& contacts, double radius) {
  contacts.validate(object.size());
  if (!(radius > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "cluster radius must be positive");
  }
  std::map<int, std::vector<std::size_t>> by_part;
  for (std::size_t i = 0; i < object.size(); ++i) {
    if (contacts.force[i] > 0.0 && contacts.part_label[i] > 0) {
      by_part[contacts.part_label[i]].push_back(i);
    }
  }
  const double r2 = radius * radius;
  ClusterMap out;
  for (auto& [part, idx] : by_part) {
    std::vector<std::size_t> parent(idx.size());
    std::iota(parent.begin(), parent.end(), std::size_t{0});
    for (std::size_t a = 0; a < idx.size(); ++a) {
      for (std::size_t b = a + 1; b < idx.size(); ++b) {
        if ((object.point(idx[a]) - object.point(idx[b])).squaredNorm() <= r2) {
          const std::size_t ra = find_root(parent, a);
          const std::size_t rb = find_root(parent, b);
          if (ra != rb) parent[std::max(ra, rb)] = std::min(ra, rb);
        }
      }
    }
    // Clusters are ordered by their smallest member index.
    std::map<std::size_t, std::vector<std::size_t>> groups;
    for (std::size_t a = 0; a < idx.size(); ++a) {
      groups[find_root(parent, a)].push_back(idx[a]);
    }
    auto& list = out[part];
    for (auto& [root, members] : groups) {
      list.push_back(make_cluster(object, contacts, part, std::move(members)));
    }
  }
  return out;
}

double representative_energy(const ObjectModel& object, std::span<const PartCluster> clusters,
                             double mu, const Vec3& gravity) {
  const auto contacts = to_contacts(clusters);
  try {
    return stability_energy(assemble(object, contacts, mu, gravity)).energy;
  } catch (const SolverError& e) {
    return e.best().energy;  // still a valid upper bound
  }
}

RepresentativeMap select_clusters(const ClusterMap& clusters, const ObjectModel& object, double mu,
                                  const Vec3& gravity, bool fixpoint) {
  RepresentativeMap reps;
  std::map<int, std::size_t> chosen;
  for (const auto& [part, list] : clusters) {
    if (list.empty()) continue;
    std::size_t best = 0;
    for (std::size_t k = 1; k < list.size(); ++k) {
      if (list[k].force > list[best].force) best = k;
    }
    chosen[part] = best;
    reps[part] = list[best];
  }
  if (reps.empty()) {
    throw Error(ErrorCode::InvalidArgument, "no part has a force-bearing contact cluster");
  }

  // Fixpoint mode is bounded; energies only decrease, so cycles cannot occur
  // beyond ties, which keep the earlier choice.
  const int max_passes = fixpoint ? 32 : 1;
  for (int pass = 0; pass < max_passes; ++pass) {
    bool changed = false;
    for (const auto& [part, list] : clusters) {
      if (list.size() < 2) continue;
      std::vector<PartCluster> others;
      for (const auto& [other, rep] : reps) {
        if (other != part) others.push_back(rep);
      }
      double best_energy = std::numeric_limits<double>::infinity();
      std::size_t best = chosen[part];
      for (std::size_t k = 0; k < list.size(); ++k) {
        std::vector<PartCluster> set = others;
        set.push_back(list[k]);
        const double e = representative_energy(object, set, mu, gravity);
        if (e < best_energy) {
          best_energy = e;
          best = k;
        }
      }
      if (best != chosen[part]) {
        changed = true;
        chosen[part] = best;
        reps[part] = list[best];
      }
    }
    if (!changed) break;
  }
  return reps;
}

KeypointSet select_keypoints(const RepresentativeMap& representatives, int n_kp,
                             const ObjectModel& object, double mu, const Vec3& gravity) {
  if (representatives.empty()) {
    throw Error(ErrorCode::InvalidArgument, "keypoint selection needs at least one part");
  }
  if (n_kp < 1) {
    throw Error(ErrorCode::InvalidArgument, "n_kp must be at least 1");
  }
  std::vector<const PartCluster*> parts;
  for (const auto& [part, rep] : representatives) parts.push_back(&rep);
  const std::size_t total = parts.size();
  const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(n_kp), total);

  // Lexicographic enumeration of k-combinations; strict < keeps the first minimum.
  std::vector<std::size_t> combo(k);
  std::iota(combo.begin(), combo.end(), std::size_t{0});
  std::vector<std::size_t> best_combo;
  double best_energy = std::numeric_limits<double>::infinity();
  std::vector<PartCluster> set(k);
  while (true) {
    for (std::size_t j = 0; j < k; ++j) set[j] = *parts[combo[j]];
    const double e = representative_energy(object, set, mu, gravity);
    if (e < best_energy) {
      best_energy = e;
      best_combo = combo;
    }
    // Advance to the next combination.
    std::size_t j = k;
    while (j > 0 && combo[j - 1] == total - k + (j - 1)) --j;
    if (j == 0) break;
    ++combo[j - 1];
    for (std::size_t m = j; m < k; ++m) combo[m] = combo[m - 1] + 1;
  }

  KeypointSet out;
  for (std::size_t idx : best_combo) {
    const PartCluster& c = *parts[idx];
    out.parts.push_back(c.part);
    out.centers.push_back(c.center);
    out.forces.push_back(c.force);
    out.normals.push_back(c.normal);
  }
  out.targets = out.centers;
  out.energy = best_energy;
  return out;
}

KeypointSet make_targets(KeypointSet keypoints, double r) {
  keypoints.targets.resize(keypoints.centers.size());
  for (std::size_t i = 0; i < keypoints.centers.size(); ++i) {
    keypoints.targets[i] = keypoints.centers[i] + r * keypoints.normals[i];
  }
  return keypoints;
}

KeypointSet extract_keypoints(const ObjectModel& object, const ContactState& contacts,
                              const KeypointParams& params) {
  const ClusterMap clusters = cluster_contacts(object, contacts, params.cluster_radius);
  const RepresentativeMap reps =
      select_clusters(clusters, object, params.mu, params.gravity, params.fixpoint);
  return make_targets(select_keypoints(reps, params.n_kp, object, params.mu, params.gravity),
                      params.target_offset);
}

}  // namespace graspeq
