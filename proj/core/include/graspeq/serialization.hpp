#pragma once

#include <filesystem>
#include <string>

#include "graspeq/force_codec.hpp"
#include "graspeq/keypoint_selector.hpp"
#include "graspeq/pose_optimizer.hpp"
#include "graspeq/scene_model.hpp"
#include "graspeq/synthetic.hpp"

namespace graspeq {

/// Settings shared by the command-line verbs; every field has a default and
/// a config file only needs to name what it overrides.
struct AppConfig {
  OptimizationConfig optimization;
  KeypointParams keypoints;
  ContactGenParams generation;
  int bin_count = 10;
  double bin_mu_log = 0.0;
  double bin_sigma_log = 1.0;
  double temperature = kDefaultTemperature;

  /// Applies mu / gravity to every sub-config.
  void set_mu(double mu);
  void set_gravity(const Vec3& gravity);
  ForceBinning binning() const;
};

AppConfig parse_config(const std::string& json_text);
AppConfig load_config(const std::filesystem::path& path);

// Scenes: either explicit {"points", "normals", "com", "mass"} or {"synthetic": {...}}.
std::string scene_to_json(const ObjectModel& object);
ObjectModel scene_from_json(const std::string& text);
std::string synthetic_to_json(const SyntheticScene& spec);

std::string contact_state_to_json(const ContactState& state);
ContactState contact_state_from_json(const std::string& text);

std::string pose_to_json(const HandPose& pose);
HandPose pose_from_json(const std::string& text);

std::string keypoints_to_json(const KeypointSet& keypoints);
KeypointSet keypoints_from_json(const std::string& text);

std::string report_to_json(const GraspReport& report);

/// Columns: stage, iteration, total, kp, contact, pene, reg, step, accepted.
std::string trace_to_csv(const OptimizationTrace& trace);

/// Round-trip formatting for CSV cells.
std::string format_double(double v);

std::string read_file(const std::filesystem::path& path);
/// Writes to a sibling temporary file, then renames over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

}  // namespace graspeq
