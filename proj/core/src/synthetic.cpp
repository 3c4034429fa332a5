#include "graspeq/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "graspeq/error.hpp"
#include "graspeq/force_codec.hpp"
#include "graspeq/pose_optimizer.hpp"

namespace graspeq {

// ---------------------------------------------------------------------------
// Rng

Rng::Rng(std::uint64_t seed) : engine_(seed) {}

std::uint64_t Rng::next() { return engine_(); }

double Rng::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

int Rng::integer(int lo, int hi) {
  const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
  return lo + static_cast<int>(next() % span);
}

double Rng::normal() {
  const double u1 = 1.0 - uniform();  // (0, 1]
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

Vec3 Rng::unit_vector() {
  const double z = uniform(-1.0, 1.0);
  const double phi = uniform(0.0, 2.0 * std::numbers::pi);
  const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
  return Vec3(r * std::cos(phi), r * std::sin(phi), z);
}

// ---------------------------------------------------------------------------
// Names

std::string to_string(ShapeKind kind) {
  switch (kind) {
    case ShapeKind::Sphere: return "sphere";
    case ShapeKind::Box: return "box";
    case ShapeKind::Cylinder: return "cylinder";
    case ShapeKind::Plate: return "plate";
  }
  return "unknown";
}

ShapeKind shape_from_string(const std::string& name) {
  if (name == "sphere") return ShapeKind::Sphere;
  if (name == "box") return ShapeKind::Box;
  if (name == "cylinder") return ShapeKind::Cylinder;
  if (name == "plate") return ShapeKind::Plate;
  throw Error(ErrorCode::InvalidShape, "unknown shape '" + name + "'");
}

std::string to_string(ContactStyle style) {
  switch (style) {
    case ContactStyle::Tripod: return "tripod";
    case ContactStyle::Pinch: return "pinch";
    case ContactStyle::Wrap: return "wrap";
    case ContactStyle::Random: return "random";
  }
  return "unknown";
}

ContactStyle style_from_string(const std::string& name) {
  if (name == "tripod") return ContactStyle::Tripod;
  if (name == "pinch") return ContactStyle::Pinch;
  if (name == "wrap") return ContactStyle::Wrap;
  if (name == "random") return ContactStyle::Random;
  throw Error(ErrorCode::InvalidArgument, "unknown contact style '" + name + "'");
}

// ---------------------------------------------------------------------------
// Surface sampling

namespace {

// Additive-recurrence (R2) low-discrepancy sequence on the unit square.
struct R2Sequence {
  double ox;
  double oy;
  double at_x(std::size_t k) const {
    constexpr double a1 = 0.7548776662466927;  // 1 / plastic number
    return std::fmod(ox + a1 * static_cast<double>(k + 1), 1.0);
  }
  double at_y(std::size_t k) const {
    constexpr double a2 = 0.5698402909980532;  // 1 / plastic number^2
    return std::fmod(oy + a2 * static_cast<double>(k + 1), 1.0);
  }
};

std::vector<int> allocate(const std::vector<double>& areas, int total) {
  const double sum = std::accumulate(areas.begin(), areas.end(), 0.0);
  std::vector<int> counts(areas.size());
  std::vector<std::pair<double, std::size_t>> remainders;
  int assigned = 0;
  for (std::size_t i = 0; i < areas.size(); ++i) {
    const double exact = total * areas[i] / sum;
    counts[i] = static_cast<int>(std::floor(exact));
    assigned += counts[i];
    remainders.emplace_back(exact - counts[i], i);
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (int k = 0; assigned < total; ++k, ++assigned) {
    ++counts[remainders[static_cast<std::size_t>(k)].second];
  }
  return counts;
}

void require_dims(const SyntheticScene& spec, std::size_t count) {
  if (spec.dimensions.size() != count) {
    throw Error(ErrorCode::InvalidShape, to_string(spec.shape) + " needs " + std::to_string(count) +
                                             " dimensions");
  }
  for (double d : spec.dimensions) {
    if (!(d > 0.0) || !std::isfinite(d)) {
      throw Error(ErrorCode::InvalidShape, "shape dimensions must be positive");
    }
  }
}

void sample_sphere(const SyntheticScene& spec, Rng& rng, std::vector<Vec3>& pts, std::vector<Vec3>& nrm) {
  const double r = spec.dimensions[0];
  const auto n = static_cast<std::size_t>(spec.sample_count);
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
  for (std::size_t k = 0; k < n; ++k) {
    const double z = 1.0 - 2.0 * (static_cast<double>(k) + 0.5) / static_cast<double>(n);
    const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double phi = phase + golden * static_cast<double>(k);
    const Vec3 u = Vec3(rho * std::cos(phi), rho * std::sin(phi), z).normalized();
    nrm.push_back(u);
    pts.push_back(r * u);
  }
}

void sample_box(const SyntheticScene& spec, Rng& rng, std::vector<Vec3>& pts, std::vector<Vec3>& nrm) {
  const Vec3 half = 0.5 * Vec3(spec.dimensions[0], spec.dimensions[1], spec.dimensions[2]);
  std::vector<double> areas;
  for (int axis = 0; axis < 3; ++axis) {
    const int b = (axis + 1) % 3;
    const int c = (axis + 2) % 3;
    const double area = 4.0 * half[b] * half[c];
    areas.push_back(area);
    areas.push_back(area);
  }
  const auto counts = allocate(areas, spec.sample_count);
  for (int face = 0; face < 6; ++face) {
    const int axis = face / 2;
    const double sign = face % 2 == 0 ? 1.0 : -1.0;
    const int b = (axis + 1) % 3;
    const int c = (axis + 2) % 3;
    const R2Sequence seq{rng.uniform(), rng.uniform()};
    for (int k = 0; k < counts[static_cast<std::size_t>(face)]; ++k) {
      Vec3 p;
      p[axis] = sign * half[axis];
      p[b] = (2.0 * seq.at_x(static_cast<std::size_t>(k)) - 1.0) * half[b];
      p[c] = (2.0 * seq.at_y(static_cast<std::size_t>(k)) - 1.0) * half[c];
      Vec3 n = Vec3::Zero();
      n[axis] = sign;
      pts.push_back(p);
      nrm.push_back(n);
    }
  }
}

void sample_cylinder(const SyntheticScene& spec, Rng& rng, std::vector<Vec3>& pts,
                     std::vector<Vec3>& nrm) {
  const double r = spec.dimensions[0];
  const double h = spec.dimensions[1];
  const double cap = std::numbers::pi * r * r;
  const auto counts = allocate({2.0 * std::numbers::pi * r * h, cap, cap}, spec.sample_count);
  const R2Sequence side{rng.uniform(), rng.uniform()};
  for (int k = 0; k < counts[0]; ++k) {
    const double phi = 2.0 * std::numbers::pi * side.at_x(static_cast<std::size_t>(k));
    const Vec3 n(std::cos(phi), std::sin(phi), 0.0);
    pts.push_back(Vec3(r * n.x(), r * n.y(), (side.at_y(static_cast<std::size_t>(k)) - 0.5) * h));
    nrm.push_back(n);
  }
  for (int c = 0; c < 2; ++c) {
    const double sign = c == 0 ? 1.0 : -1.0;
    const R2Sequence seq{rng.uniform(), rng.uniform()};
    for (int k = 0; k < counts[static_cast<std::size_t>(c + 1)]; ++k) {
      const double rho = r * std::sqrt(seq.at_x(static_cast<std::size_t>(k)));
      const double phi = 2.0 * std::numbers::pi * seq.at_y(static_cast<std::size_t>(k));
      pts.push_back(Vec3(rho * std::cos(phi), rho * std::sin(phi), sign * 0.5 * h));
      nrm.push_back(Vec3(0.0, 0.0, sign));
    }
  }
}

}  // namespace

ObjectModel generate_scene(const SyntheticScene& spec) {
  if (spec.sample_count < 16) {
    throw Error(ErrorCode::InvalidShape, "sample_count must be at least 16");
  }
  Rng rng(spec.seed);
  std::vector<Vec3> pts;
  std::vector<Vec3> nrm;
  pts.reserve(static_cast<std::size_t>(spec.sample_count));
  nrm.reserve(static_cast<std::size_t>(spec.sample_count));
  switch (spec.shape) {
    case ShapeKind::Sphere:
      require_dims(spec, 1);
      sample_sphere(spec, rng, pts, nrm);
      break;
    case ShapeKind::Box:
    case ShapeKind::Plate:
      require_dims(spec, 3);
      sample_box(spec, rng, pts, nrm);
      break;
    case ShapeKind::Cylinder:
      require_dims(spec, 2);
      sample_cylinder(spec, rng, pts, nrm);
      break;
  }
  return ObjectModel::create(std::move(pts), std::move(nrm), Vec3::Zero(), spec.mass);
}

// ---------------------------------------------------------------------------
// Contact generation

namespace {

struct PatchRequest {
  int part;
  Vec3 direction;  // from the center of mass, unit
};

// Gravity-aligned frame: up opposes gravity; e1, e2 span the horizontal plane.
struct UpFrame {
  Vec3 e1;
  Vec3 e2;
  Vec3 up;
  Vec3 dir(double x, double y, double z) const { return (x * e1 + y * e2 + z * up).normalized(); }
};

UpFrame up_frame(const Vec3& gravity, double spin) {
  const Vec3 up = gravity.norm() > 0.0 ? Vec3(-gravity.normalized()) : Vec3::UnitZ();
  const TangentBasis basis = build_tangent_basis(up);
  const Vec3 e1 = std::cos(spin) * basis.b + std::sin(spin) * basis.t;
  return UpFrame{e1, up.cross(e1), up};
}

std::vector<PatchRequest> style_requests(const ObjectModel& object, ContactStyle style, Rng& rng,
                                         const ContactGenParams& params) {
  const double spin = rng.uniform(-0.3, 0.3);
  const UpFrame f = up_frame(params.gravity, spin);
  const auto jitter = [&](double v) { return v + rng.uniform(-0.05, 0.05); };
  switch (style) {
    case ContactStyle::Tripod:
      return {{16, f.dir(-1.0, jitter(0.0), jitter(-0.35))},
              {4, f.dir(1.0, jitter(0.45), jitter(-0.35))},
              {7, f.dir(1.0, jitter(-0.45), jitter(-0.35))}};
    case ContactStyle::Pinch: {
      // Squeeze across the thinnest extent of the object.
      Vec3 extent = Vec3::Zero();
      for (const auto& p : object.points()) extent = extent.cwiseMax((p - object.com()).cwiseAbs());
      int axis = 0;
      extent.minCoeff(&axis);
      const bool isotropic = extent.maxCoeff() - extent.minCoeff() < 1e-9 * extent.maxCoeff();
      const Vec3 a = isotropic ? f.e1 : Vec3::Unit(axis);
      return {{16, -a}, {4, a}};
    }
    case ContactStyle::Wrap:
      // Fingers curl around the far side, at least 40 degrees apart.
      return {{1, f.dir(-1.0, 0.0, jitter(0.0))},
              {4, f.dir(0.55, jitter(0.65), jitter(0.45))},
              {7, f.dir(0.95, jitter(0.2), jitter(0.1))},
              {10, f.dir(0.75, jitter(-0.3), jitter(-0.55))},
              {13, f.dir(0.2, jitter(-0.2), -1.0)},
              {16, f.dir(0.05, -1.0, jitter(0.35))}};
    case ContactStyle::Random: {
      const int count = rng.integer(params.random_min_patches, params.random_max_patches);
      std::vector<int> parts(kPartCount);
      std::iota(parts.begin(), parts.end(), 1);
      for (int i = kPartCount - 1; i > 0; --i) {
        std::swap(parts[static_cast<std::size_t>(i)], parts[static_cast<std::size_t>(rng.integer(0, i))]);
      }
      std::vector<PatchRequest> out;
      for (int i = 0; i < count; ++i) out.push_back({parts[static_cast<std::size_t>(i)], rng.unit_vector()});
      return out;
    }
  }
  return {};
}

// Surface point closest to the ray from the center of mass along `dir`.
std::optional<std::size_t> ray_hit(const ObjectModel& object, const Vec3& dir) {
  std::optional<std::size_t> best;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < object.size(); ++i) {
    const Vec3 rel = object.point(i) - object.com();
    const double along = rel.dot(dir);
    if (along <= 0.0 || object.normal(i).dot(dir) <= 0.0) continue;
    const double perp = (rel - along * dir).squaredNorm();
    if (perp < best_d) {
      best_d = perp;
      best = i;
    }
  }
  return best;
}

}  // namespace

GeneratedContacts generate_contacts(const ObjectModel& object, ContactStyle style,
                                    std::uint64_t seed, const ContactGenParams& params) {
  if (!(params.patch_radius > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "patch radius must be positive");
  }
  if (object.bounding_radius() < 1.5 * params.patch_radius) {
    throw Error(ErrorCode::StyleInfeasible, "object is too small for contact patches");
  }
  Rng rng(seed);
  const int attempts = style == ContactStyle::Random ? 50 : 1;
  const double min_separation = 2.5 * params.patch_radius;

  std::vector<ContactPatch> patches;
  std::vector<int> owner(object.size(), -1);
  std::vector<double> likelihood(object.size(), 0.0);
  const auto requests = style_requests(object, style, rng, params);
  for (const PatchRequest& req : requests) {
    bool placed = false;
    Vec3 dir = req.direction;
    for (int attempt = 0; attempt < attempts && !placed; ++attempt) {
      if (attempt > 0) dir = rng.unit_vector();
      const auto hit = ray_hit(object, dir);
      if (!hit) continue;
      const Vec3& hp = object.point(*hit);
      const Vec3& hn = object.normal(*hit);
      bool separated = true;
      for (const auto& p : patches) {
        if ((p.center - hp).norm() < min_separation) separated = false;
      }
      if (!separated) continue;
      ContactPatch patch;
      patch.part = req.part;
      for (std::size_t i = 0; i < object.size(); ++i) {
        const double rho = (object.point(i) - hp).norm();
        if (owner[i] < 0 && rho <= params.patch_radius && object.normal(i).dot(hn) >= 0.7) {
          patch.points.push_back(i);
          likelihood[i] = 1.0 - 0.5 * rho / params.patch_radius;
        }
      }
      if (patch.points.empty()) continue;
      Vec3 sum_p = Vec3::Zero();
      Vec3 sum_n = Vec3::Zero();
      for (std::size_t i : patch.points) {
        owner[i] = static_cast<int>(patches.size());
        sum_p += object.point(i);
        sum_n += object.normal(i);
      }
      patch.center = sum_p / static_cast<double>(patch.points.size());
      patch.normal = sum_n.norm() > 1e-12 ? Vec3(sum_n.normalized()) : hn;
      patches.push_back(std::move(patch));
      placed = true;
    }
    if (!placed) {
      throw Error(ErrorCode::StyleInfeasible,
                  "could not place a contact patch for part " + std::to_string(req.part));
    }
  }

  std::vector<Contact> contacts;
  for (const auto& p : patches) contacts.push_back(Contact{p.center, p.normal, 0.0});
  const ForceExistenceResult fe = solve_force_existence(object, contacts, params.mu, params.gravity,
                                                        params.f_min, params.f_max);

  GeneratedContacts out;
  out.residual = fe.energy;
  std::vector<LabelPoint> labels;
  std::vector<std::uint8_t> mask(object.size(), 0);
  for (std::size_t j = 0; j < patches.size(); ++j) {
    patches[j].force = fe.forces[static_cast<Eigen::Index>(j)];
    labels.push_back(LabelPoint{patches[j].center, patches[j].force});
    for (std::size_t i : patches[j].points) mask[i] = 1;
  }
  const SpreadResult spread = spread_force(labels, object, mask);

  out.state = ContactState::zeros(object.size());
  for (std::size_t i = 0; i < object.size(); ++i) {
    if (owner[i] < 0) continue;
    out.state.likelihood[i] = likelihood[i];
    out.state.part_label[i] = patches[static_cast<std::size_t>(owner[i])].part;
    out.state.force[i] = spread.force[i];
  }
  out.patches = std::move(patches);
  return out;
}

}  // namespace graspeq
