#include <doctest.h>

#include <algorithm>
#include <numbers>

#include "graspeq/error.hpp"
#include "graspeq/keypoint_selector.hpp"
#include "graspeq/synthetic.hpp"
#include "support/oracles.hpp"

using namespace graspeq;

namespace {

ObjectModel sphere(int n = 1024) {
  SyntheticScene s;
  s.sample_count = n;
  return generate_scene(s);
}

ObjectModel plate() {
  SyntheticScene s;
  s.shape = ShapeKind::Plate;
  s.dimensions = {0.1, 0.1, 0.01};
  s.sample_count = 2000;
  return generate_scene(s);
}

// Marks every point within `radius` of `center` (and facing like `normal`) as
// contact with `part`, spreading `force` uniformly.
void paint(const ObjectModel& obj, ContactState& st, const Vec3& center, const Vec3& normal, double radius,
           int part, double force) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < obj.size(); ++i) {
    if ((obj.point(i) - center).norm() <= radius && obj.normal(i).dot(normal) > 0.9) idx.push_back(i);
  }
  REQUIRE(!idx.empty());
  for (std::size_t i : idx) {
    st.likelihood[i] = 1.0;
    st.part_label[i] = part;
    st.force[i] = force / static_cast<double>(idx.size());
  }
}

PartCluster cluster_at(int part, const Vec3& p, const Vec3& n, double f) {
  PartCluster c;
  c.part = part;
  c.center = p;
  c.normal = n;
  c.force = f;
  c.points = {0};
  return c;
}

double oracle_energy(const ObjectModel& obj, const std::vector<PartCluster>& set) {
  std::vector<Contact> cs;
  for (const auto& c : set) cs.push_back(c.as_contact());
  const auto e = testing::energy_form(assemble(obj, cs));
  return testing::box_minimum_by_enumeration(e.m, e.c);
}

}  // namespace

TEST_CASE("clusters follow connectivity") {
  const ObjectModel obj = sphere();
  ContactState st = ContactState::zeros(obj.size());
  paint(obj, st, obj.point(0), obj.normal(0), 0.008, 4, 2.0);
  auto map = cluster_contacts(obj, st, 0.01);
  REQUIRE(map.size() == 1);
  CHECK(map[4].size() == 1);

  const std::size_t far = obj.index().nearest(-obj.point(0)).index;
  paint(obj, st, obj.point(far), obj.normal(far), 0.008, 4, 3.0);
  map = cluster_contacts(obj, st, 0.01);
  REQUIRE(map[4].size() == 2);
  // clusters partition the part's contact points
  std::vector<std::size_t> all;
  for (const auto& c : map[4]) all.insert(all.end(), c.points.begin(), c.points.end());
  std::sort(all.begin(), all.end());
  CHECK(std::adjacent_find(all.begin(), all.end()) == all.end());
  std::size_t labelled = 0;
  for (std::size_t i = 0; i < obj.size(); ++i) labelled += st.part_label[i] == 4 ? 1 : 0;
  CHECK(all.size() == labelled);
}

TEST_CASE("cluster aggregates are force weighted") {
  const ObjectModel obj = sphere();
  ContactState st = ContactState::zeros(obj.size());
  paint(obj, st, obj.point(7), obj.normal(7), 0.008, 2, 1.0);
  std::size_t heavy = 0;
  for (std::size_t i = 0; i < obj.size(); ++i) {
    if (st.part_label[i] == 2) {
      st.force[i] *= static_cast<double>(i % 3 + 1);
      heavy = i;
    }
  }
  const auto map = cluster_contacts(obj, st, 0.01);
  const PartCluster& c = map.at(2).front();
  double f = 0.0;
  Vec3 p = Vec3::Zero();
  Vec3 n = Vec3::Zero();
  for (std::size_t i : c.points) {
    f += st.force[i];
    p += st.force[i] * obj.point(i);
    n += st.force[i] * obj.normal(i);
  }
  CHECK(c.force == doctest::Approx(f).epsilon(1e-12));
  CHECK((c.center - p / f).norm() < 1e-12);
  CHECK((c.normal - n.normalized()).norm() < 1e-12);
  (void)heavy;
}

TEST_CASE("antipodal thumb patches on a plate form two clusters") {
  const ObjectModel obj = plate();
  ContactState st = ContactState::zeros(obj.size());
  paint(obj, st, Vec3(0.0, 0.0, 0.005), Vec3::UnitZ(), 0.008, 16, 5.0);
  paint(obj, st, Vec3(0.0, 0.0, -0.005), -Vec3::UnitZ(), 0.008, 16, 5.0);
  const auto map = cluster_contacts(obj, st, 0.008);
  CHECK(map.at(16).size() == 2);
}

TEST_CASE("select clusters picks the supporting thumb patch") {
  const ObjectModel obj = plate();
  ContactState st = ContactState::zeros(obj.size());
  paint(obj, st, Vec3(0.03, 0.0, 0.005), Vec3::UnitZ(), 0.006, 4, 2.0);
  paint(obj, st, Vec3(0.03, 0.03, 0.005), Vec3::UnitZ(), 0.006, 7, 2.0);
  paint(obj, st, Vec3(-0.03, 0.0, 0.005), Vec3::UnitZ(), 0.006, 16, 16.0);   // top, heaviest first
  paint(obj, st, Vec3(0.0, 0.01, -0.005), -Vec3::UnitZ(), 0.006, 16, 13.81);  // bottom
  const auto clusters = cluster_contacts(obj, st, 0.008);
  REQUIRE(clusters.at(16).size() == 2);
  const auto reps = select_clusters(clusters, obj, 1.0, kDefaultGravity);
  CHECK(reps.at(16).normal.z() < 0.0);

  std::vector<PartCluster> others{reps.at(4), reps.at(7)};
  std::vector<double> energies;
  for (const auto& cand : clusters.at(16)) {
    auto set = others;
    set.push_back(cand);
    energies.push_back(oracle_energy(obj, set));
  }
  const auto best = std::min_element(energies.begin(), energies.end()) - energies.begin();
  CHECK(clusters.at(16)[static_cast<std::size_t>(best)].normal.z() < 0.0);
}

TEST_CASE("single cluster selection") {
  const ObjectModel obj = sphere();
  ContactState st = ContactState::zeros(obj.size());
  paint(obj, st, obj.point(3), obj.normal(3), 0.008, 9, 4.0);
  const auto clusters = cluster_contacts(obj, st, 0.01);
  const auto reps = select_clusters(clusters, obj, 1.0, kDefaultGravity);
  REQUIRE(reps.size() == 1);
  const KeypointSet k = select_keypoints(reps, 3, obj, 1.0, kDefaultGravity);
  CHECK(k.size() == 1);
  CHECK(k.energy == doctest::Approx(oracle_energy(obj, {reps.at(9)})).epsilon(1e-9));
  CHECK_THROWS_AS(select_clusters({}, obj, 1.0, kDefaultGravity), Error);
}

TEST_CASE("select keypoints finds the unique supporting triple") {
  const ObjectModel obj = sphere();
  RepresentativeMap reps;
  // Three contacts under the object share its weight evenly.
  for (int k = 0; k < 3; ++k) {
    const double a = 2.0 * std::numbers::pi * k / 3.0;
    const Vec3 n = Vec3(0.5 * std::cos(a), 0.5 * std::sin(a), -1.0).normalized();
    const int part = std::array{3, 8, 12}[static_cast<std::size_t>(k)];
    reps[part] = cluster_at(part, 0.05 * n, n, 9.81 / 3.0 / -n.z());
  }
  reps[5] = cluster_at(5, Vec3(0, 0, 0.05), Vec3::UnitZ(), 8.0);
  reps[14] = cluster_at(14, Vec3(0.05, 0, 0), Vec3::UnitX(), 3.0);
  const KeypointSet k = select_keypoints(reps, 3, obj, 1.0, kDefaultGravity);
  CHECK(k.parts == std::vector<int>{3, 8, 12});
  CHECK(k.energy < 1e-12);

  // independent enumeration
  std::vector<int> ids;
  for (const auto& [p, unused] : reps) ids.push_back(p);
  int zero_triples = 0;
  for (std::size_t a = 0; a < ids.size(); ++a)
    for (std::size_t b = a + 1; b < ids.size(); ++b)
      for (std::size_t c = b + 1; c < ids.size(); ++c) {
        const double e = oracle_energy(obj, {reps[ids[a]], reps[ids[b]], reps[ids[c]]});
        CHECK(k.energy <= e + 1e-9);
        zero_triples += e < 1e-9 ? 1 : 0;
      }
  CHECK(zero_triples == 1);
}

TEST_CASE("forced selection and determinism") {
  const ObjectModel obj = sphere();
  Rng rng(3);
  RepresentativeMap reps;
  for (int part : {2, 6, 11}) {
    const Vec3 n = rng.unit_vector();
    reps[part] = cluster_at(part, 0.05 * n, n, rng.uniform(1, 8));
  }
  const KeypointSet a = select_keypoints(reps, 3, obj, 1.0, kDefaultGravity);
  CHECK(a.parts == std::vector<int>{2, 6, 11});
  std::vector<PartCluster> set{reps[2], reps[6], reps[11]};
  CHECK(a.energy == doctest::Approx(oracle_energy(obj, set)).epsilon(1e-8));
  const KeypointSet b = select_keypoints(reps, 3, obj, 1.0, kDefaultGravity);
  CHECK(a.parts == b.parts);
  CHECK(a.energy == b.energy);
  CHECK_THROWS_AS(select_keypoints(reps, 0, obj, 1.0, kDefaultGravity), Error);
}

TEST_CASE("ties go to the lexicographically smallest tuple") {
  const ObjectModel obj = sphere();
  RepresentativeMap reps;
  // Every triple is empty-handed free fall: all energies equal.
  for (int part : {9, 2, 5, 13}) reps[part] = cluster_at(part, Vec3(0.05, 0, 0), Vec3::UnitX(), 0.0);
  const KeypointSet k = select_keypoints(reps, 3, obj, 1.0, kDefaultGravity);
  CHECK(k.parts == std::vector<int>{2, 5, 9});
}

TEST_CASE("exhaustiveness against random subsets") {
  const ObjectModel obj = sphere();
  Rng rng(19);
  RepresentativeMap reps;
  for (int part = 1; part <= 7; ++part) {
    const Vec3 n = rng.unit_vector();
    reps[part] = cluster_at(part, 0.05 * n, n, rng.uniform(1, 12));
  }
  const KeypointSet k = select_keypoints(reps, 3, obj, 1.0, kDefaultGravity);
  for (int t = 0; t < 30; ++t) {
    std::vector<int> ids{1, 2, 3, 4, 5, 6, 7};
    for (int i = 6; i > 0; --i) std::swap(ids[static_cast<std::size_t>(i)], ids[static_cast<std::size_t>(rng.integer(0, i))]);
    const double e = oracle_energy(obj, {reps[ids[0]], reps[ids[1]], reps[ids[2]]});
    CHECK(k.energy <= e + 1e-9);
  }
}

TEST_CASE("targets") {
  KeypointSet k;
  k.parts = {4};
  k.centers = {Vec3::Zero()};
  k.normals = {Vec3::UnitZ()};
  k.forces = {1.0};
  CHECK(make_targets(k, 0.0).targets[0] == Vec3::Zero());
  CHECK((make_targets(k, 0.005).targets[0] - Vec3(0, 0, 0.005)).norm() < 1e-15);
  const ObjectModel obj = sphere();
  KeypointSet s;
  s.parts = {2};
  s.centers = {obj.point(9)};
  s.normals = {obj.normal(9)};
  s.forces = {1.0};
  CHECK(make_targets(s, 0.005).targets[0].norm() == doctest::Approx(0.055).epsilon(1e-12));
}

TEST_CASE("extract keypoints from generated contacts") {
  const ObjectModel obj = sphere(2048);
  const GeneratedContacts gen = generate_contacts(obj, ContactStyle::Tripod, 1);
  const KeypointSet k = extract_keypoints(obj, gen.state);
  CHECK(k.size() == 3);
  CHECK(k.energy < 1e-6);
  for (std::size_t i = 0; i < k.size(); ++i) {
    CHECK((k.targets[i] - k.centers[i] - 0.005 * k.normals[i]).norm() < 1e-15);
  }
}
