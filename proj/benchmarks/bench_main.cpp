#include <benchmark/benchmark.h>

#include "graspeq/box_qp.hpp"
#include "graspeq/keypoint_selector.hpp"
#include "graspeq/pipeline.hpp"
#include "graspeq/synthetic.hpp"

using namespace graspeq;

namespace {

ObjectModel ball(int samples) {
  SyntheticScene s;
  s.sample_count = samples;
  return generate_scene(s);
}

void BM_StabilityEnergy(benchmark::State& state) {
  Rng rng(1);
  std::vector<Contact> contacts;
  for (int i = 0; i < state.range(0); ++i) {
    const Vec3 u = rng.unit_vector();
    contacts.push_back(Contact{0.05 * u, u, rng.uniform(1.0, 8.0)});
  }
  const EquilibriumSystem sys = assemble(Vec3::Zero(), 1.0, 0.001, contacts, 1.0, kDefaultGravity);
  for (auto _ : state) benchmark::DoNotOptimize(stability_energy(sys).energy);
}
BENCHMARK(BM_StabilityEnergy)->Arg(3)->Arg(8)->Arg(16);

void BM_FullHandKeypointSearch(benchmark::State& state) {
  const ObjectModel obj = ball(2048);
  Rng rng(2);
  RepresentativeMap reps;
  for (int part = 1; part <= kPartCount; ++part) {
    const Vec3 n = rng.unit_vector();
    PartCluster c;
    c.part = part;
    c.center = 0.05 * n;
    c.normal = n;
    c.force = rng.uniform(1.0, 8.0);
    c.points = {0};
    reps[part] = c;
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(select_keypoints(reps, 3, obj, kDefaultFriction, kDefaultGravity).energy);
  }
}
BENCHMARK(BM_FullHandKeypointSearch)->Unit(benchmark::kMillisecond);

void BM_ForwardKinematicsJacobian(benchmark::State& state) {
  HandPose pose;
  for (auto& a : pose.joint_angles) a = 0.4;
  for (auto _ : state) benchmark::DoNotOptimize(forward_kinematics_with_jacobian(pose).geometry.joints[0]);
}
BENCHMARK(BM_ForwardKinematicsJacobian);

void BM_ObjectiveEvaluation(benchmark::State& state) {
  const ObjectModel obj = ball(static_cast<int>(state.range(0)));
  const GeneratedContacts gen = generate_contacts(obj, ContactStyle::Tripod, 1);
  const KeypointSet k = extract_keypoints(obj, gen.state);
  const HandPose pose = register_rest_hand(k);
  const GraspObjective objective(&obj, k.parts, k.targets, gen.state.likelihood, LossWeights{100, 0.5, 10, 0.01});
  for (auto _ : state) benchmark::DoNotOptimize(objective.evaluate(pose, true).total);
}
BENCHMARK(BM_ObjectiveEvaluation)->Arg(512)->Arg(2048)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
