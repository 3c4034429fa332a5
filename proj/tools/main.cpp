// graspeq: command-line front end for the grasp equilibrium library.
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "graspeq/batch.hpp"
#include "graspeq/equilibrium.hpp"
#include "graspeq/error.hpp"
#include "graspeq/force_codec.hpp"
#include "graspeq/keypoint_selector.hpp"
#include "graspeq/pipeline.hpp"
#include "graspeq/serialization.hpp"
#include "graspeq/synthetic.hpp"

namespace fs = std::filesystem;
using namespace graspeq;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitInput = 2;
constexpr int kExitSolver = 3;

struct Globals {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string gravity;
  std::optional<double> mu;
};

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw Error(ErrorCode::InvalidArgument, "not a number: '" + item + "'");
    }
  }
  return out;
}

AppConfig resolve_config(const Globals& g) {
  AppConfig cfg = g.config_path.empty() ? AppConfig{} : load_config(g.config_path);
  if (g.mu) cfg.set_mu(*g.mu);
  if (!g.gravity.empty()) {
    const auto v = parse_list(g.gravity);
    if (v.size() != 3) throw Error(ErrorCode::InvalidArgument, "--gravity expects x,y,z");
    cfg.set_gravity(Vec3(v[0], v[1], v[2]));
  }
  if (g.seed) cfg.optimization.seed = *g.seed;
  return cfg;
}

void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    if (!text.empty() && text.back() != '\n') std::cout << '\n';
  } else {
    write_file_atomic(path, text);
  }
}

json vec(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

// --- verbs -----------------------------------------------------------------

int cmd_analyze(const AppConfig& cfg, const std::string& scene, const std::string& contacts,
                const std::string& out) {
  const ObjectModel object = scene_from_json(read_file(scene));
  const ContactState state = contact_state_from_json(read_file(contacts));
  state.validate(object.size());
  const auto cs = contacts_from_state(object, state);
  const EquilibriumSystem sys = assemble(object, cs, cfg.optimization.mu, cfg.optimization.gravity);
  const StabilityResult st = stability_energy(sys);
  json j;
  j["contact_points"] = cs.size();
  j["stability_energy"] = st.energy;
  j["stability_loss"] = stability_loss(sys);
  j["solver_iterations"] = st.iterations;
  j["acceleration"] = std::vector<double>(st.accel.data(), st.accel.data() + 6);
  json parts = json::object();
  for (const auto& [part, clusters] : cluster_contacts(object, state, cfg.keypoints.cluster_radius)) {
    json list = json::array();
    for (const auto& c : clusters) {
      list.push_back({{"points", c.points.size()}, {"force", c.force}, {"center", vec(c.center)},
                      {"normal", vec(c.normal)}});
    }
    parts[std::to_string(part)] = std::move(list);
  }
  j["clusters"] = std::move(parts);
  emit(out, j.dump(2));
  return kExitOk;
}

int cmd_keypoints(const AppConfig& cfg, const std::string& scene, const std::string& contacts,
                  const std::string& out) {
  const ObjectModel object = scene_from_json(read_file(scene));
  const ContactState state = contact_state_from_json(read_file(contacts));
  emit(out, keypoints_to_json(extract_keypoints(object, state, cfg.keypoints)));
  return kExitOk;
}

int cmd_optimize(const AppConfig& cfg, const std::string& scene, const std::string& contacts,
                 const std::string& out_dir) {
  const ObjectModel object = scene_from_json(read_file(scene));
  const ContactState state = contact_state_from_json(read_file(contacts));
  const PipelineResult res = run_pipeline(object, state, cfg.optimization, cfg.keypoints);
  const GraspReport report = evaluate_grasp(res.stage3.pose, object, cfg.optimization);

  OptimizationTrace trace = res.stage2_trace;
  trace.records.insert(trace.records.end(), res.stage3.trace.records.begin(), res.stage3.trace.records.end());

  fs::create_directories(out_dir);
  write_file_atomic(fs::path(out_dir) / "pose.json", pose_to_json(res.stage3.pose));
  write_file_atomic(fs::path(out_dir) / "keypoints.json", keypoints_to_json(res.keypoints));
  write_file_atomic(fs::path(out_dir) / "trace.csv", trace_to_csv(trace));
  write_file_atomic(fs::path(out_dir) / "report.json", report_to_json(report));
  std::printf("residual %.6g  contacts %d  max penetration %.6g m\n", report.residual,
              report.contact_count, report.max_penetration);
  if (res.stage3.aborted) {
    std::fprintf(stderr, "optimization aborted: %s\n", res.stage3.diagnostic.c_str());
    return kExitSolver;
  }
  return kExitOk;
}

int cmd_synth(const AppConfig& cfg, const std::string& shape, const std::string& dims, int samples,
              const std::string& style, const std::string& out_scene, const std::string& out_contacts) {
  SyntheticScene spec;
  spec.shape = shape_from_string(shape);
  spec.seed = cfg.optimization.seed;
  spec.sample_count = samples;
  if (!dims.empty()) {
    spec.dimensions = parse_list(dims);
  } else if (spec.shape == ShapeKind::Box) {
    spec.dimensions = {0.1, 0.1, 0.1};
  } else if (spec.shape == ShapeKind::Plate) {
    spec.dimensions = {0.2, 0.2, 0.005};
  } else if (spec.shape == ShapeKind::Cylinder) {
    spec.dimensions = {0.035, 0.1};
  }
  const ObjectModel object = generate_scene(spec);
  emit(out_scene, scene_to_json(object));
  if (!out_contacts.empty()) {
    const GeneratedContacts gen =
        generate_contacts(object, style_from_string(style), cfg.optimization.seed, cfg.generation);
    write_file_atomic(out_contacts, contact_state_to_json(gen.state));
    std::fprintf(stderr, "%zu patches, force residual %.3g\n", gen.patches.size(), gen.residual);
  }
  return kExitOk;
}

int cmd_encode(const AppConfig& cfg, double force) {
  const ForceVector v = encode(force, cfg.binning());
  emit("", json(v).dump());
  return kExitOk;
}

int cmd_decode(const AppConfig& cfg, const std::string& vector_text) {
  const auto v = parse_list(vector_text);
  std::printf("%.17g\n", decode(v, cfg.binning(), cfg.temperature));
  return kExitOk;
}

int cmd_gradcheck(const AppConfig& cfg, const std::string& scene, const std::string& contacts,
                  const std::string& pose_path, double h) {
  const ObjectModel object = scene_from_json(read_file(scene));
  const ContactState state = contact_state_from_json(read_file(contacts));
  const KeypointSet kp = extract_keypoints(object, state, cfg.keypoints);
  const HandPose pose = pose_path.empty() ? register_rest_hand(kp) : pose_from_json(read_file(pose_path));
  const auto& o = cfg.optimization;
  const GraspObjective objective(&object, kp.parts, kp.targets, state.likelihood,
                                 LossWeights{o.w_kp, o.w_c, o.w_pene, o.w_reg}, o.contact);
  const LossTerms terms = objective.evaluate(pose, true);
  const PoseParams x = to_params(pose);
  PoseParams fd = PoseParams::Zero();
  for (int i = 0; i < kParamCount; ++i) {
    PoseParams xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    fd[i] = (objective.evaluate(from_params(xp), false).total -
             objective.evaluate(from_params(xm), false).total) / (2.0 * h);
  }
  const double err = (terms.grad_total - fd).norm() / std::max(fd.norm(), 1e-12);
  std::printf("loss %.9g  |grad| %.6g  relative error %.3g  kink margin %.3g  switch margin %.3g\n",
              terms.total, terms.grad_total.norm(), err, objective.kink_margin(pose),
              objective.switch_margin(pose));
  return err <= 1e-3 ? kExitOk : kExitSolver;
}

int cmd_batch(const AppConfig& cfg, int count, const std::string& out_dir, bool baseline, int threads) {
  BatchConfig bc;
  bc.optimization = cfg.optimization;
  bc.keypoints = cfg.keypoints;
  bc.generation = cfg.generation;
  bc.seed = cfg.optimization.seed;
  bc.baseline = baseline;
  bc.threads = threads;
  const BatchResult res = batch_report(default_suite(count, bc.seed), bc);
  fs::create_directories(out_dir);
  write_file_atomic(fs::path(out_dir) / "batch.csv", res.csv);
  write_file_atomic(fs::path(out_dir) / "curve.csv", res.curve_csv);
  write_file_atomic(fs::path(out_dir) / "timing.csv", res.timing_csv);
  std::cout << res.csv;
  return kExitOk;
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::SolverError: return kExitSolver;
    case ErrorCode::InvalidArgument: return kExitUsage;
    default: return kExitInput;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Force-aware grasp equilibrium tools"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--config", g.config_path, "JSON configuration file");
  app.add_option("--seed", g.seed, "Random seed");
  app.add_option("--gravity", g.gravity, "Gravity vector x,y,z");
  app.add_option("--mu", g.mu, "Friction coefficient");

  std::string scene, contacts, out, shape = "sphere", dims, style = "tripod", pose_path, vector_text;
  std::string out_contacts;
  int samples = 2048, count = 10, threads = 0;
  double force = 0.0, h = 1e-6;
  bool baseline = false;

  auto* analyze = app.add_subcommand("analyze", "Stability energy and clusters of a contact state");
  auto* keypoints = app.add_subcommand("keypoints", "Select keypoints from a contact state");
  auto* optimize = app.add_subcommand("optimize", "Run the three-stage pose optimization");
  for (auto* sub : {analyze, keypoints, optimize}) {
    sub->add_option("--scene", scene, "Scene JSON")->required();
    sub->add_option("--contacts", contacts, "Contact state JSON")->required();
  }
  analyze->add_option("--out", out, "Output JSON (default stdout)");
  keypoints->add_option("--out", out, "Output JSON (default stdout)");
  optimize->add_option("--out-dir", out, "Output directory")->required();

  auto* synth = app.add_subcommand("synth", "Generate a synthetic scene and contact state");
  synth->add_option("--shape", shape, "sphere | box | cylinder | plate");
  synth->add_option("--dims", dims, "Comma-separated dimensions in meters");
  synth->add_option("--samples", samples, "Surface sample count");
  synth->add_option("--style", style, "tripod | pinch | wrap | random");
  synth->add_option("--out", out, "Scene JSON (default stdout)");
  synth->add_option("--contacts-out", out_contacts, "Contact state JSON");

  auto* enc = app.add_subcommand("encode-force", "One-hot encode a force magnitude");
  enc->add_option("force", force, "Force in newtons")->required();
  auto* dec = app.add_subcommand("decode-force", "Soft-argmax decode a bin vector");
  dec->add_option("vector", vector_text, "Comma-separated bin scores")->required();

  auto* grad = app.add_subcommand("gradcheck", "Compare analytic and finite-difference gradients");
  grad->add_option("--scene", scene, "Scene JSON")->required();
  grad->add_option("--contacts", contacts, "Contact state JSON")->required();
  grad->add_option("--pose", pose_path, "Pose JSON (default: stage-I pose)");
  grad->add_option("--step", h, "Central difference step");

  auto* batch = app.add_subcommand("batch", "Run the pipeline over a synthetic suite");
  batch->add_option("--count", count, "Number of scenes");
  batch->add_option("--out-dir", out, "Output directory")->required();
  batch->add_flag("--baseline", baseline, "Also run keypoint-free optimization");
  batch->add_option("--threads", threads, "Worker threads (0: all cores)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    const AppConfig cfg = resolve_config(g);
    if (*analyze) return cmd_analyze(cfg, scene, contacts, out);
    if (*keypoints) return cmd_keypoints(cfg, scene, contacts, out);
    if (*optimize) return cmd_optimize(cfg, scene, contacts, out);
    if (*synth) return cmd_synth(cfg, shape, dims, samples, style, out, out_contacts);
    if (*enc) return cmd_encode(cfg, force);
    if (*dec) return cmd_decode(cfg, vector_text);
    if (*grad) return cmd_gradcheck(cfg, scene, contacts, pose_path, h);
    if (*batch) return cmd_batch(cfg, count, out, baseline, threads);
  } catch (const SolverError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitSolver;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitInput;
  }
  return kExitUsage;
}
