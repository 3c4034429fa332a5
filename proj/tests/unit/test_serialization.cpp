#include <doctest.h>

#include <filesystem>

#include "graspeq/error.hpp"
#include "graspeq/serialization.hpp"
#include "graspeq/synthetic.hpp"

using namespace graspeq;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error raised");
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST_CASE("config defaults and overrides") {
  const AppConfig d = parse_config("{}");
  CHECK(d.bin_count == 10);
  CHECK(d.bin_mu_log == 0.0);
  CHECK(d.bin_sigma_log == 1.0);
  CHECK(d.temperature == 0.02);
  CHECK(d.optimization.mu == kDefaultFriction);

  const AppConfig c = parse_config(R"({"mu": 0.5, "gravity": [0, 0, -1],
      "optimization": {"w_c": 2.0, "max_iters_stage3": 7},
      "keypoints": {"n_kp": 4},
      "binning": {"s": 12, "mu_log": 1.0, "temperature": 0.1}})");
  CHECK(c.optimization.mu == 0.5);
  CHECK(c.keypoints.mu == 0.5);
  CHECK(c.generation.mu == 0.5);
  CHECK(c.optimization.gravity == Vec3(0, 0, -1));
  CHECK(c.optimization.w_c == 2.0);
  CHECK(c.optimization.max_iters_stage3 == 7);
  CHECK(c.keypoints.n_kp == 4);
  CHECK(c.binning().s == 12);
  CHECK(c.binning().mu_log == 1.0);
  CHECK(c.temperature == 0.1);
}

TEST_CASE("config errors") {
  CHECK(code_of([] { parse_config("{"); }) == ErrorCode::ParseError);
  CHECK(code_of([] { parse_config("[1]"); }) == ErrorCode::ParseError);
  CHECK(code_of([] { parse_config(R"({"optimization": {"w_c": -1}})"); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("scene round trip") {
  SyntheticScene s;
  s.shape = ShapeKind::Cylinder;
  s.dimensions = {0.03, 0.08};
  s.sample_count = 200;
  s.seed = 5;
  s.mass = 0.3;
  const ObjectModel o = generate_scene(s);
  const ObjectModel back = scene_from_json(scene_to_json(o));
  REQUIRE(back.size() == o.size());
  for (std::size_t i = 0; i < o.size(); ++i) {
    CHECK(back.point(i) == o.point(i));
    CHECK(back.normal(i) == o.normal(i));
  }
  CHECK(back.mass() == o.mass());
  CHECK(back.inertia() == o.inertia());

  const ObjectModel gen = scene_from_json(synthetic_to_json(s));
  REQUIRE(gen.size() == o.size());
  for (std::size_t i = 0; i < o.size(); ++i) CHECK(gen.point(i) == o.point(i));

  CHECK(code_of([] { scene_from_json(R"({"points": [[0,0,0]], "normals": [[0,0,2]], "com": [0,0,0]})"); }) ==
        ErrorCode::InvalidNormal);
  CHECK(code_of([] { scene_from_json(R"({"points": [[0,0]], "normals": [[0,0,1]], "com": [0,0,0]})"); }) ==
        ErrorCode::ParseError);
}

TEST_CASE("contact state, pose and keypoint round trips") {
  SyntheticScene s;
  s.sample_count = 512;
  const ObjectModel o = generate_scene(s);
  const GeneratedContacts g = generate_contacts(o, ContactStyle::Tripod, 3);
  CHECK(contact_state_from_json(contact_state_to_json(g.state)) == g.state);

  HandPose p;
  p.global_rotation = Vec3(0.1, -0.2, 1.0 / 3.0);
  p.global_translation = Vec3(1e-7, 0.3, -0.25);
  for (int i = 0; i < kAngleCount; ++i) p.joint_angles[static_cast<std::size_t>(i)] = 0.01 * i + 1.0 / 7.0;
  p.shape_scale = 1.1;
  CHECK(pose_from_json(pose_to_json(p)) == p);

  KeypointSet k;
  k.parts = {4, 16};
  k.centers = {Vec3(0.1, 0.2, 0.3), Vec3(-0.1, 0, 1.0 / 3.0)};
  k.forces = {2.5, 3.0};
  k.normals = {Vec3::UnitX(), Vec3::UnitZ()};
  k.targets = {Vec3(0.11, 0.2, 0.3), Vec3(-0.1, 0, 0.34)};
  k.energy = 1e-9;
  const KeypointSet kb = keypoints_from_json(keypoints_to_json(k));
  CHECK(kb.parts == k.parts);
  CHECK(kb.centers == k.centers);
  CHECK(kb.targets == k.targets);
  CHECK(kb.forces == k.forces);
  CHECK(kb.energy == k.energy);

  CHECK(code_of([] { pose_from_json(R"({"global_rotation":[0,0,0],"global_translation":[0,0,0],"joint_angles":[1],"shape_scale":1})"); }) ==
        ErrorCode::ShapeError);
  CHECK(code_of([] { contact_state_from_json(R"({"likelihood":[0.5],"part_label":[99],"force":[0]})"); }) !=
        ErrorCode::ParseError);
}

TEST_CASE("csv and files") {
  CHECK(format_double(0.1) == "0.10000000000000001");
  CHECK(std::stod(format_double(1.0 / 3.0)) == 1.0 / 3.0);
  OptimizationTrace t;
  t.records.push_back(TraceRecord{3, 0, 1.5, 0.5, 0.25, 0.0, 0.75, 0.01, true});
  const std::string csv = trace_to_csv(t);
  CHECK(csv.rfind("stage,iteration,total,kp,contact,pene,reg,step,accepted\n", 0) == 0);
  CHECK(csv.find("\n3,0,1.5,0.5,0.25,0,0.75,") != std::string::npos);

  const auto dir = std::filesystem::temp_directory_path() / "graspeq_serialization_test";
  std::filesystem::create_directories(dir);
  write_file_atomic(dir / "a.txt", "hello");
  CHECK(read_file(dir / "a.txt") == "hello");
  CHECK_FALSE(std::filesystem::exists(dir / "a.txt.tmp"));
  CHECK(code_of([&] { read_file(dir / "missing.txt"); }) == ErrorCode::IoError);
  std::filesystem::remove_all(dir);
}
