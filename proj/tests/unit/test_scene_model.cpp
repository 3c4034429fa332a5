#include <doctest.h>

#include <cmath>
#include <numbers>

#include "graspeq/error.hpp"
#include "graspeq/scene_model.hpp"
#include "graspeq/synthetic.hpp"
#include "support/oracles.hpp"

using namespace graspeq;

namespace {

void check_basis(const TangentBasis& f, const Vec3& n) {
  Mat3 m;
  m << f.b, f.t, f.n;
  CHECK((m.transpose() * m - Mat3::Identity()).norm() < 1e-9);
  CHECK((f.b.cross(f.t) - n).norm() < 1e-9);
  CHECK((f.n - n).norm() < 1e-12);
}

ObjectModel sphere(double r, int n, std::uint64_t seed = 0) {
  SyntheticScene s;
  s.dimensions = {r};
  s.sample_count = n;
  s.seed = seed;
  return generate_scene(s);
}

}  // namespace

TEST_CASE("tangent basis canonical axes") {
  const TangentBasis up = build_tangent_basis(Vec3::UnitZ());
  CHECK((up.b - Vec3::UnitX()).norm() < 1e-15);
  CHECK((up.t - Vec3::UnitY()).norm() < 1e-15);
  check_basis(up, Vec3::UnitZ());
  check_basis(build_tangent_basis(-Vec3::UnitZ()), -Vec3::UnitZ());
  const Vec3 diag = Vec3::Ones().normalized();
  check_basis(build_tangent_basis(diag), diag);
}

TEST_CASE("tangent basis is orthonormal for random normals") {
  Rng rng(5);
  for (int i = 0; i < 1000; ++i) {
    const Vec3 n = rng.unit_vector();
    check_basis(build_tangent_basis(n), n);
  }
}

TEST_CASE("inertia examples") {
  const std::vector<Vec3> one{Vec3(0.1, 0, 0)};
  CHECK(compute_inertia(one, Vec3::Zero(), 1.0) == doctest::Approx(0.004).epsilon(1e-12));
  const std::vector<Vec3> at_com{Vec3::Zero(), Vec3::Zero()};
  CHECK(compute_inertia(at_com, Vec3::Zero(), 1.0) == 0.0);
  std::vector<Vec3> cube;
  for (int i = 0; i < 8; ++i) cube.emplace_back(i & 1 ? 0.5 : -0.5, i & 2 ? 0.5 : -0.5, i & 4 ? 0.5 : -0.5);
  CHECK(compute_inertia(cube, Vec3::Zero(), 2.0) == doctest::Approx(0.6).epsilon(1e-12));
}

TEST_CASE("inertia is invariant under rotation about the center of mass") {
  Rng rng(8);
  std::vector<Vec3> pts;
  for (int i = 0; i < 50; ++i) pts.push_back(Vec3(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)));
  const Vec3 com(0.1, -0.2, 0.3);
  const Mat3 r = testing::random_rotation(rng);
  std::vector<Vec3> rotated;
  for (const auto& p : pts) rotated.push_back(com + r * (p - com));
  CHECK(compute_inertia(rotated, com, 1.5) == doctest::Approx(compute_inertia(pts, com, 1.5)).epsilon(1e-12));
}

TEST_CASE("object validation") {
  CHECK_THROWS_AS(ObjectModel::create({}, {}, Vec3::Zero()), Error);
  try {
    ObjectModel::create({Vec3::Zero()}, {Vec3(0, 0, 2)}, Vec3::Zero());
    FAIL("expected InvalidNormal");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InvalidNormal);
  }
  try {
    ObjectModel::create({Vec3::Zero(), Vec3::Ones()}, {Vec3::UnitZ()}, Vec3::Zero());
    FAIL("expected ShapeError");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ShapeError);
  }
  CHECK_THROWS_AS(ObjectModel::create({Vec3::Zero()}, {Vec3::UnitZ()}, Vec3::Zero(), 0.0), Error);
  const ObjectModel ok = ObjectModel::create({Vec3(0.1, 0, 0)}, {Vec3::UnitX()}, Vec3::Zero(), 2.0);
  CHECK(ok.inertia() == doctest::Approx(0.4 * 2.0 * 0.01));
}

TEST_CASE("kd-tree nearest agrees with brute force") {
  Rng rng(21);
  std::vector<Vec3> pts;
  for (int i = 0; i < 500; ++i) pts.push_back(Vec3(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)));
  pts.push_back(pts[17]);  // duplicate: ties go to the lower index
  const PointIndex index(pts);
  for (int q = 0; q < 300; ++q) {
    const Vec3 query = q == 0 ? pts[17] : Vec3(rng.uniform(-1.2, 1.2), rng.uniform(-1.2, 1.2), rng.uniform(-1.2, 1.2));
    std::size_t best = 0;
    for (std::size_t i = 1; i < pts.size(); ++i) {
      if ((pts[i] - query).squaredNorm() < (pts[best] - query).squaredNorm()) best = i;
    }
    const auto hit = index.nearest(query);
    CHECK(hit.index == best);
    CHECK(hit.distance_sq == doctest::Approx((pts[best] - query).squaredNorm()));
  }
  CHECK(index.nearest(pts[17]).index == 17);
}

TEST_CASE("signed distance examples") {
  const ObjectModel obj = sphere(0.05, 2048);
  CHECK(signed_distance(obj, obj.point(123)) == 0.0);
  CHECK(signed_distance(obj, Vec3::Zero()) == doctest::Approx(-0.05).epsilon(0.02));
  const Vec3 out = obj.point(40) + 0.02 * obj.normal(40);
  CHECK(signed_distance(obj, out) == doctest::Approx(0.02).epsilon(1e-9));
}

TEST_CASE("signed distance is bounded by the nearest-sample distance") {
  const ObjectModel obj = sphere(0.05, 512, 3);
  Rng rng(4);
  for (int i = 0; i < 200; ++i) {
    const Vec3 q = rng.unit_vector() * rng.uniform(0.0, 0.1);
    const auto hit = obj.index().nearest(q);
    CHECK(std::abs(signed_distance(obj, q)) <= std::sqrt(hit.distance_sq) + 1e-15);
  }
}

TEST_CASE("contact map from hand samples") {
  const ObjectModel obj = sphere(0.05, 256);
  const ContactParams params;
  SUBCASE("coincident sample") {
    const std::vector<HandSample> hand{{obj.point(10), 7, 0.0}};
    const ContactState s = contact_map_from_hand(obj, hand, params);
    CHECK(s.likelihood[10] == 1.0);
    CHECK(s.part_label[10] == 7);
    CHECK(s.force[10] == 0.0);
    s.validate(obj.size());
  }
  SUBCASE("distance 2 c0 gives 0.5") {
    const std::vector<HandSample> hand{{obj.point(10) + 2 * params.contact_radius * obj.normal(10), 3, 0.0}};
    const ContactState s = contact_map_from_hand(obj, hand, params);
    CHECK(s.likelihood[10] == doctest::Approx(0.5).epsilon(1e-12));
  }
  SUBCASE("far hand") {
    const std::vector<HandSample> hand{{Vec3(1.0, 0, 0), 3, 0.0}};
    const ContactState s = contact_map_from_hand(obj, hand, params);
    for (std::size_t i = 0; i < obj.size(); ++i) {
      CHECK(s.part_label[i] == 0);
      CHECK(s.likelihood[i] < params.threshold);
    }
  }
  SUBCASE("capsule radius shortens the distance") {
    const Vec3 p = obj.point(10) + 0.009 * obj.normal(10);
    const std::vector<HandSample> hand{{p, 4, 0.005}};
    const ContactState s = contact_map_from_hand(obj, hand, params);
    CHECK(s.likelihood[10] == doctest::Approx(0.5).epsilon(1e-9));
  }
  CHECK_THROWS_AS(contact_map_from_hand(obj, {}, params), Error);
}

TEST_CASE("likelihood is monotone in distance") {
  const ContactParams params;
  double prev = 2.0;
  for (double d = 0.0; d < 0.05; d += 1e-4) {
    const double c = likelihood_from_distance(d, params);
    CHECK(c <= prev);
    CHECK(c <= 1.0);
    prev = c;
  }
}

TEST_CASE("contact state invariants") {
  ContactState s = ContactState::zeros(3);
  s.validate(3);
  CHECK_THROWS_AS(s.validate(4), Error);
  s.force[1] = 1.0;
  CHECK_THROWS_AS(s.validate(3), Error);  // force without likelihood
  s.likelihood[1] = 0.8;
  s.part_label[1] = 2;
  s.validate(3);
  s.part_label[2] = 5;  // label without likelihood
  CHECK_THROWS_AS(s.validate(3), Error);
}
