#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "graspeq/scene_model.hpp"

namespace graspeq {

/// How a bin's representative value is chosen when decoding.
enum class BinCenter {
  Geometric,   // sqrt(l_i * l_{i+1}); symmetric in log space
  Arithmetic,  // (l_i + l_{i+1}) / 2
};

/// Log-normal force binning. Bin 0 holds exactly-zero force; bins 1..s-2
/// split [mu - 3 sigma, mu + 3 sigma] uniformly in log space; bin s-1 is open.
struct ForceBinning {
  int s = 10;
  double mu_log = 0.0;
  double sigma_log = 1.0;
  BinCenter center_rule = BinCenter::Geometric;
  std::vector<double> edges;    // s + 1 entries, edges[0] = 0, edges[s] = +inf
  std::vector<double> centers;  // s decode values, centers[0] = 0

  /// Width of one interior bin in log space.
  double log_width() const { return 6.0 * sigma_log / (s - 2); }
};

using ForceVector = std::vector<double>;

inline constexpr double kDefaultTemperature = 0.02;

ForceBinning build_binning(int s, double mu_log, double sigma_log,
                           BinCenter center_rule = BinCenter::Geometric);

/// Zero-based index of the bin with edges[i] <= force < edges[i+1].
int bin_index(double force, const ForceBinning& binning);

/// One-hot vector of the bin containing `force`.
ForceVector encode(double force, const ForceBinning& binning);

/// Temperature-scaled soft-argmax over bin centers.
double decode(std::span<const double> v, const ForceBinning& binning,
              double temperature = kDefaultTemperature);

/// A simulator-style point force label.
struct LabelPoint {
  Vec3 position;
  double force = 0.0;
};

struct SpreadResult {
  std::vector<double> force;  // one entry per object point
  int empty_labels = 0;       // labels whose affinity set was empty
};

/// Distributes each label's force uniformly over the contact points whose
/// nearest label is that label (lowest label index on ties).
SpreadResult spread_force(std::span<const LabelPoint> labels, const ObjectModel& object,
                          std::span<const std::uint8_t> contact_mask);

}  // namespace graspeq
