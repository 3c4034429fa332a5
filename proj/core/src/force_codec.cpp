#include "graspeq/force_codec.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "graspeq/error.hpp"

namespace graspeq {

namespace {

// Softmax weights below exp(-40) (~4e-18 relative) are flushed to zero. They
// are below double rounding of the dominant term, and flushing keeps the
// decode of a one-hot zero bin exactly zero.
constexpr double kWeightFloorExponent = -40.0;

}  // namespace

ForceBinning build_binning(int s, double mu_log, double sigma_log, BinCenter center_rule) {
  if (s < 3) {
    throw Error(ErrorCode::InvalidBinCount, "need at least 3 force bins, got " + std::to_string(s));
  }
  if (!(sigma_log > 0.0) || !std::isfinite(sigma_log)) {
    throw Error(ErrorCode::InvalidSpread, "sigma_log must be positive and finite");
  }
  if (!std::isfinite(mu_log)) {
    throw Error(ErrorCode::InvalidArgument, "mu_log must be finite");
  }
  ForceBinning b;
  b.s = s;
  b.mu_log = mu_log;
  b.sigma_log = sigma_log;
  b.center_rule = center_rule;
  b.edges.assign(static_cast<std::size_t>(s) + 1, 0.0);
  // One-based l_i for 2 <= i <= s lives at edges[i - 1].
  for (int i = 2; i <= s; ++i) {
    const double z = 6.0 * (i - 2) / static_cast<double>(s - 2) - 3.0;
    b.edges[static_cast<std::size_t>(i - 1)] = std::exp(mu_log + z * sigma_log);
  }
  b.edges[static_cast<std::size_t>(s)] = std::numeric_limits<double>::infinity();

  b.centers.assign(static_cast<std::size_t>(s), 0.0);
  for (int i = 1; i < s - 1; ++i) {
    const double lo = b.edges[static_cast<std::size_t>(i)];
    const double hi = b.edges[static_cast<std::size_t>(i) + 1];
    b.centers[static_cast<std::size_t>(i)] =
        center_rule == BinCenter::Geometric ? std::sqrt(lo * hi) : 0.5 * (lo + hi);
  }
  // Open last bin: one geometric half-step beyond its lower edge.
  b.centers[static_cast<std::size_t>(s - 1)] =
      b.edges[static_cast<std::size_t>(s - 1)] * std::exp(0.5 * b.log_width());
  return b;
}

int bin_index(double force, const ForceBinning& binning) {
  if (!std::isfinite(force) || force < 0.0) {
    throw Error(ErrorCode::InvalidForce, "force must be finite and non-negative");
  }
  if (force == 0.0) return 0;
  // First edge strictly greater than force, minus one.
  const auto it = std::upper_bound(binning.edges.begin(), binning.edges.end(), force);
  return static_cast<int>(std::distance(binning.edges.begin(), it)) - 1;
}

ForceVector encode(double force, const ForceBinning& binning) {
  ForceVector v(static_cast<std::size_t>(binning.s), 0.0);
  v[static_cast<std::size_t>(bin_index(force, binning))] = 1.0;
  return v;
}

double decode(std::span<const double> v, const ForceBinning& binning, double temperature) {
  if (!(temperature > 0.0) || !std::isfinite(temperature)) {
    throw Error(ErrorCode::InvalidTemperature, "temperature must be positive");
  }
  if (v.size() != static_cast<std::size_t>(binning.s)) {
    throw Error(ErrorCode::ShapeError, "force vector length " + std::to_string(v.size()) +
                                           " does not match bin count " +
                                           std::to_string(binning.s));
  }
  double top = -std::numeric_limits<double>::infinity();
  for (double x : v) {
    if (!std::isfinite(x)) throw Error(ErrorCode::InvalidArgument, "non-finite force score");
    top = std::max(top, x / temperature);
  }
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double e = v[i] / temperature - top;
    if (e < kWeightFloorExponent) continue;
    const double w = std::exp(e);
    num += w * binning.centers[i];
    den += w;
  }
  return num / den;
}

SpreadResult spread_force(std::span<const LabelPoint> labels, const ObjectModel& object,
                          std::span<const std::uint8_t> contact_mask) {
  if (contact_mask.size() != object.size()) {
    throw Error(ErrorCode::ShapeError, "contact mask must have one entry per object point");
  }
  for (const auto& label : labels) {
    if (!std::isfinite(label.force) || label.force < 0.0) {
      throw Error(ErrorCode::InvalidForce, "label force must be finite and non-negative");
    }
  }
  SpreadResult out;
  out.force.assign(object.size(), 0.0);
  if (labels.empty()) return out;

  std::vector<int> owner(object.size(), -1);
  std::vector<std::size_t> count(labels.size(), 0);
  for (std::size_t i = 0; i < object.size(); ++i) {
    if (!contact_mask[i]) continue;
    double best = std::numeric_limits<double>::infinity();
    int best_j = -1;
    for (std::size_t j = 0; j < labels.size(); ++j) {
      const double d = (object.point(i) - labels[j].position).squaredNorm();
      if (d < best) {
        best = d;
        best_j = static_cast<int>(j);
      }
    }
    owner[i] = best_j;
    ++count[static_cast<std::size_t>(best_j)];
  }
  for (std::size_t i = 0; i < object.size(); ++i) {
    if (owner[i] < 0) continue;
    const auto j = static_cast<std::size_t>(owner[i]);
    out.force[i] = labels[j].force / static_cast<double>(count[j]);
  }
  for (std::size_t c : count) {
    if (c == 0) ++out.empty_labels;
  }
  return out;
}

}  // namespace graspeq
