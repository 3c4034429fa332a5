#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "graspeq/equilibrium.hpp"
#include "graspeq/scene_model.hpp"

namespace graspeq {

/// Deterministic generator: identical seeds give identical streams on every
/// platform (the standard distributions are implementation-defined).
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next();
  /// Uniform in [0, 1).
  double uniform();
  double uniform(double lo, double hi);
  /// Uniform integer in [lo, hi].
  int integer(int lo, int hi);
  /// Standard normal (Box-Muller).
  double normal();
  Vec3 unit_vector();

 private:
  std::mt19937_64 engine_;
};

enum class ShapeKind { Sphere, Box, Cylinder, Plate };

std::string to_string(ShapeKind kind);
ShapeKind shape_from_string(const std::string& name);

/// Shape parameters in meters:
///   sphere {radius}, box / plate {x, y, z} full edge lengths, cylinder {radius, height}.
struct SyntheticScene {
  ShapeKind shape = ShapeKind::Sphere;
  std::vector<double> dimensions{0.05};
  int sample_count = 2048;
  std::uint64_t seed = 0;
  double mass = 1.0;
};

/// Quasi-uniform, area-proportional surface sampling with analytic normals,
/// centered at the origin.
ObjectModel generate_scene(const SyntheticScene& spec);

enum class ContactStyle { Tripod, Pinch, Wrap, Random };

std::string to_string(ContactStyle style);
ContactStyle style_from_string(const std::string& name);

struct ContactGenParams {
  double patch_radius = 0.008;
  int random_min_patches = 2;
  int random_max_patches = 5;
  double mu = kDefaultFriction;
  Vec3 gravity = kDefaultGravity;
  double f_min = 1.0;
  double f_max = 20.0;
};

/// A patch on the object surface assigned to one hand part.
struct ContactPatch {
  int part = 0;
  std::vector<std::size_t> points;
  Vec3 center = Vec3::Zero();
  Vec3 normal = Vec3::UnitZ();
  double force = 0.0;
};

struct GeneratedContacts {
  ContactState state;
  std::vector<ContactPatch> patches;
  double residual = 0.0;  // force-existence residual of the patch contacts
};

/// Stand-in for a learned contact generator: places hand-part patches by style
/// and assigns them forces from a force-existence solve on the patch centers.
GeneratedContacts generate_contacts(const ObjectModel& object, ContactStyle style,
                                    std::uint64_t seed, const ContactGenParams& params = {});

}  // namespace graspeq
