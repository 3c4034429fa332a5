#include "graspeq/serialization.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "graspeq/error.hpp"

namespace graspeq {

using nlohmann::json;

namespace {

json vec_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

Vec3 vec_from(const json& j, const char* what) {
  if (!j.is_array() || j.size() != 3 || !j[0].is_number() || !j[1].is_number() || !j[2].is_number()) {
    throw Error(ErrorCode::ParseError, std::string(what) + " must be an array of 3 numbers");
  }
  return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

json parse(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
}

template <class T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("field '") + key + "': " + e.what());
  }
}

const json& require(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) {
    throw Error(ErrorCode::ParseError, std::string("missing field '") + key + "'");
  }
  return j.at(key);
}

template <class F>
auto guarded(F&& f) {
  try {
    return f();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Config

void AppConfig::set_mu(double mu) {
  optimization.mu = mu;
  keypoints.mu = mu;
  generation.mu = mu;
}

void AppConfig::set_gravity(const Vec3& gravity) {
  optimization.gravity = gravity;
  keypoints.gravity = gravity;
  generation.gravity = gravity;
}

ForceBinning AppConfig::binning() const {
  return build_binning(bin_count, bin_mu_log, bin_sigma_log);
}

AppConfig parse_config(const std::string& json_text) {
  const json root = parse(json_text);
  if (!root.is_object()) throw Error(ErrorCode::ParseError, "config must be a JSON object");
  AppConfig cfg;
  if (root.contains("mu")) cfg.set_mu(get_or(root, "mu", kDefaultFriction));
  if (root.contains("gravity")) cfg.set_gravity(vec_from(root["gravity"], "gravity"));

  if (root.contains("optimization")) {
    const json& o = root["optimization"];
    auto& c = cfg.optimization;
    c.w_kp = get_or(o, "w_kp", c.w_kp);
    c.w_c = get_or(o, "w_c", c.w_c);
    c.w_pene = get_or(o, "w_pene", c.w_pene);
    c.w_reg = get_or(o, "w_reg", c.w_reg);
    c.step_size = get_or(o, "step_size", c.step_size);
    c.max_iters_stage2 = get_or(o, "max_iters_stage2", c.max_iters_stage2);
    c.max_iters_stage3 = get_or(o, "max_iters_stage3", c.max_iters_stage3);
    c.convergence_tol = get_or(o, "convergence_tol", c.convergence_tol);
    c.patience = get_or(o, "patience", c.patience);
    c.seed = get_or(o, "seed", c.seed);
    c.snapshot_interval = get_or(o, "snapshot_interval", c.snapshot_interval);
    c.f_max = get_or(o, "f_max", c.f_max);
    c.contact.contact_radius = get_or(o, "contact_radius", c.contact.contact_radius);
    c.contact.threshold = get_or(o, "contact_threshold", c.contact.threshold);
  }
  if (root.contains("keypoints")) {
    const json& k = root["keypoints"];
    auto& c = cfg.keypoints;
    c.cluster_radius = get_or(k, "cluster_radius", c.cluster_radius);
    c.n_kp = get_or(k, "n_kp", c.n_kp);
    c.target_offset = get_or(k, "target_offset", c.target_offset);
    c.fixpoint = get_or(k, "fixpoint", c.fixpoint);
  }
  if (root.contains("generation")) {
    const json& g = root["generation"];
    auto& c = cfg.generation;
    c.patch_radius = get_or(g, "patch_radius", c.patch_radius);
    c.random_min_patches = get_or(g, "random_min_patches", c.random_min_patches);
    c.random_max_patches = get_or(g, "random_max_patches", c.random_max_patches);
    c.f_min = get_or(g, "f_min", c.f_min);
    c.f_max = get_or(g, "f_max", c.f_max);
  }
  if (root.contains("binning")) {
    const json& b = root["binning"];
    cfg.bin_count = get_or(b, "s", cfg.bin_count);
    cfg.bin_mu_log = get_or(b, "mu_log", cfg.bin_mu_log);
    cfg.bin_sigma_log = get_or(b, "sigma_log", cfg.bin_sigma_log);
    cfg.temperature = get_or(b, "temperature", cfg.temperature);
  }
  cfg.optimization.validate();
  return cfg;
}

AppConfig load_config(const std::filesystem::path& path) { return parse_config(read_file(path)); }

// ---------------------------------------------------------------------------
// Scenes

std::string scene_to_json(const ObjectModel& object) {
  json pts = json::array();
  json nrm = json::array();
  for (std::size_t i = 0; i < object.size(); ++i) {
    pts.push_back(vec_json(object.point(i)));
    nrm.push_back(vec_json(object.normal(i)));
  }
  json j;
  j["points"] = std::move(pts);
  j["normals"] = std::move(nrm);
  j["com"] = vec_json(object.com());
  j["mass"] = object.mass();
  return j.dump();
}

std::string synthetic_to_json(const SyntheticScene& spec) {
  json s;
  s["shape"] = to_string(spec.shape);
  s["dimensions"] = spec.dimensions;
  s["sample_count"] = spec.sample_count;
  s["seed"] = spec.seed;
  s["mass"] = spec.mass;
  return json{{"synthetic", s}}.dump(2);
}

ObjectModel scene_from_json(const std::string& text) {
  const json root = parse(text);
  if (root.is_object() && root.contains("synthetic")) {
    const json& s = root["synthetic"];
    SyntheticScene spec;
    spec.shape = shape_from_string(get_or<std::string>(s, "shape", "sphere"));
    spec.dimensions = get_or(s, "dimensions", spec.dimensions);
    spec.sample_count = get_or(s, "sample_count", spec.sample_count);
    spec.seed = get_or(s, "seed", spec.seed);
    spec.mass = get_or(s, "mass", spec.mass);
    return generate_scene(spec);
  }
  return guarded([&] {
    std::vector<Vec3> pts;
    std::vector<Vec3> nrm;
    for (const auto& p : require(root, "points")) pts.push_back(vec_from(p, "point"));
    for (const auto& n : require(root, "normals")) nrm.push_back(vec_from(n, "normal"));
    const Vec3 com = vec_from(require(root, "com"), "com");
    const double mass = get_or(root, "mass", 1.0);
    return ObjectModel::create(std::move(pts), std::move(nrm), com, mass);
  });
}

// ---------------------------------------------------------------------------
// Contact states

std::string contact_state_to_json(const ContactState& state) {
  json j;
  j["likelihood"] = state.likelihood;
  j["part_label"] = state.part_label;
  j["force"] = state.force;
  return j.dump();
}

ContactState contact_state_from_json(const std::string& text) {
  const json root = parse(text);
  return guarded([&] {
    ContactState s;
    s.likelihood = require(root, "likelihood").get<std::vector<double>>();
    s.part_label = require(root, "part_label").get<std::vector<int>>();
    s.force = require(root, "force").get<std::vector<double>>();
    if (s.part_label.size() != s.likelihood.size() || s.force.size() != s.likelihood.size()) {
      throw Error(ErrorCode::ShapeError, "contact state fields differ in length");
    }
    s.validate(s.likelihood.size());
    return s;
  });
}

// ---------------------------------------------------------------------------
// Poses and keypoints

std::string pose_to_json(const HandPose& pose) {
  json j;
  j["global_rotation"] = vec_json(pose.global_rotation);
  j["global_translation"] = vec_json(pose.global_translation);
  j["joint_angles"] = pose.joint_angles;
  j["shape_scale"] = pose.shape_scale;
  return j.dump(2);
}

HandPose pose_from_json(const std::string& text) {
  const json root = parse(text);
  return guarded([&] {
    HandPose pose;
    pose.global_rotation = vec_from(require(root, "global_rotation"), "global_rotation");
    pose.global_translation = vec_from(require(root, "global_translation"), "global_translation");
    const auto angles = require(root, "joint_angles").get<std::vector<double>>();
    if (angles.size() != static_cast<std::size_t>(kAngleCount)) {
      throw Error(ErrorCode::ShapeError, "joint_angles must have " + std::to_string(kAngleCount) + " entries");
    }
    std::copy(angles.begin(), angles.end(), pose.joint_angles.begin());
    pose.shape_scale = require(root, "shape_scale").get<double>();
    return pose;
  });
}

std::string keypoints_to_json(const KeypointSet& keypoints) {
  json list = json::array();
  for (std::size_t i = 0; i < keypoints.size(); ++i) {
    json k;
    k["part"] = keypoints.parts[i];
    k["center"] = vec_json(keypoints.centers[i]);
    k["force"] = keypoints.forces[i];
    k["normal"] = vec_json(keypoints.normals[i]);
    if (i < keypoints.targets.size()) k["target"] = vec_json(keypoints.targets[i]);
    list.push_back(std::move(k));
  }
  json j;
  j["keypoints"] = std::move(list);
  j["energy"] = keypoints.energy;
  return j.dump(2);
}

KeypointSet keypoints_from_json(const std::string& text) {
  const json root = parse(text);
  return guarded([&] {
    KeypointSet out;
    out.energy = get_or(root, "energy", 0.0);
    for (const auto& k : require(root, "keypoints")) {
      out.parts.push_back(require(k, "part").get<int>());
      out.centers.push_back(vec_from(require(k, "center"), "center"));
      out.forces.push_back(require(k, "force").get<double>());
      out.normals.push_back(vec_from(require(k, "normal"), "normal"));
      if (k.contains("target")) out.targets.push_back(vec_from(k["target"], "target"));
    }
    if (!out.targets.empty() && out.targets.size() != out.parts.size()) {
      throw Error(ErrorCode::ShapeError, "either all or no keypoints carry targets");
    }
    return out;
  });
}

std::string report_to_json(const GraspReport& report) {
  json contacts = json::array();
  for (const Contact& c : report.contacts) {
    contacts.push_back({{"position", vec_json(c.position)}, {"normal", vec_json(c.normal)}, {"force", c.force}});
  }
  json j;
  j["residual"] = report.residual;
  j["contact_count"] = report.contact_count;
  j["max_penetration"] = report.max_penetration;
  j["contacts"] = std::move(contacts);
  return j.dump(2);
}

// ---------------------------------------------------------------------------
// CSV and files

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string trace_to_csv(const OptimizationTrace& trace) {
  std::ostringstream os;
  os << "stage,iteration,total,kp,contact,pene,reg,step,accepted\n";
  for (const TraceRecord& r : trace.records) {
    os << r.stage << ',' << r.iteration << ',' << format_double(r.total) << ',' << format_double(r.kp)
       << ',' << format_double(r.contact) << ',' << format_double(r.pene) << ','
       << format_double(r.reg) << ',' << format_double(r.step) << ',' << (r.accepted ? 1 : 0) << '\n';
  }
  return os.str();
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + tmp.string());
    out << contents;
    out.flush();
    if (!out) throw Error(ErrorCode::IoError, "write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw Error(ErrorCode::IoError, "cannot rename onto " + path.string());
  }
}

}  // namespace graspeq
