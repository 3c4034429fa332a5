#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "graspeq/pose_optimizer.hpp"
#include "graspeq/synthetic.hpp"

namespace graspeq {

struct BatchScene {
  std::string name;
  SyntheticScene scene;
  ContactStyle style = ContactStyle::Tripod;
};

struct BatchConfig {
  OptimizationConfig optimization;
  KeypointParams keypoints;
  ContactGenParams generation;
  std::uint64_t seed = 0;  // scene i uses seed + i
  bool baseline = false;   // also run the keypoint-free optimization
  int threads = 0;         // 0: hardware concurrency, capped by GRASP_EQ_THREADS
};

struct BatchRow {
  std::string name;
  std::string shape;
  std::string style;
  bool ok = false;
  std::string error;
  double residual_before = 0.0;  // stage-I pose
  double residual_after = 0.0;   // stage-III pose
  int contact_count = 0;
  double max_penetration = 0.0;
  double baseline_residual = 0.0;
  double wall_time = 0.0;  // seconds; reported separately from the CSV
};

struct BatchResult {
  std::vector<BatchRow> rows;
  /// Per-scene rows plus one aggregate row of means over successful scenes.
  std::string csv;
  /// Mean residual after stage III per max-penetration interval.
  std::string curve_csv;
  /// Wall time per scene; kept apart so the other outputs are reproducible.
  std::string timing_csv;
};

/// Shapes cycled in order sphere, box, cylinder, plate with tripod contacts.
std::vector<BatchScene> default_suite(int count, std::uint64_t seed);

/// Runs the full pipeline on every scene. Failures are recorded per row.
BatchResult batch_report(const std::vector<BatchScene>& scenes, const BatchConfig& config);

/// Worker count after applying GRASP_EQ_THREADS and the scene count.
int batch_threads(int requested, std::size_t scenes);

}  // namespace graspeq
