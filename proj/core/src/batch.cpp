#include "graspeq/batch.hpp"

#include <array>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <sstream>
#include <thread>

#include "graspeq/error.hpp"
#include "graspeq/pipeline.hpp"
#include "graspeq/serialization.hpp"

namespace graspeq {

std::vector<BatchScene> default_suite(int count, std::uint64_t seed) {
  std::vector<BatchScene> out;
  for (int i = 0; i < count; ++i) {
    BatchScene s;
    s.scene.seed = seed + static_cast<std::uint64_t>(i);
    s.scene.sample_count = 1024;
    switch (i % 4) {
      case 0:
        s.scene.shape = ShapeKind::Sphere;
        s.scene.dimensions = {0.04 + 0.002 * (i % 5)};
        break;
      case 1:
        s.scene.shape = ShapeKind::Box;
        s.scene.dimensions = {0.06, 0.05 + 0.004 * (i % 3), 0.07};
        break;
      case 2:
        s.scene.shape = ShapeKind::Cylinder;
        s.scene.dimensions = {0.035, 0.09};
        break;
      default:
        s.scene.shape = ShapeKind::Plate;
        s.scene.dimensions = {0.09, 0.09, 0.03};
        break;
    }
    s.name = to_string(s.scene.shape) + "_" + std::to_string(i);
    out.push_back(std::move(s));
  }
  return out;
}

int batch_threads(int requested, std::size_t scenes) {
  int n = requested > 0 ? requested : static_cast<int>(std::thread::hardware_concurrency());
  if (const char* env = std::getenv("GRASP_EQ_THREADS")) {
    const int cap = std::atoi(env);
    if (cap > 0) n = std::min(n, cap);
  }
  n = std::max(n, 1);
  return static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(n), std::max<std::size_t>(scenes, 1)));
}

namespace {

BatchRow run_scene(const BatchScene& bs, std::size_t index, const BatchConfig& config) {
  BatchRow row;
  row.name = bs.name;
  row.shape = to_string(bs.scene.shape);
  row.style = to_string(bs.style);
  const auto start = std::chrono::steady_clock::now();
  try {
    const std::uint64_t seed = config.seed + index;
    const ObjectModel object = generate_scene(bs.scene);
    const GeneratedContacts gen = generate_contacts(object, bs.style, seed, config.generation);
    OptimizationConfig opt = config.optimization;
    opt.seed = seed;
    const PipelineResult res = run_pipeline(object, gen.state, opt, config.keypoints);
    const GraspReport before = evaluate_grasp(res.stage1, object, opt);
    const GraspReport after = evaluate_grasp(res.stage3.pose, object, opt);
    row.residual_before = before.residual;
    row.residual_after = after.residual;
    row.contact_count = after.contact_count;
    row.max_penetration = after.max_penetration;
    if (config.baseline) {
      const GraspResult base = run_keypoint_free(object, gen.state, opt);
      row.baseline_residual = evaluate_grasp(base.pose, object, opt).residual;
    }
    row.ok = !res.stage3.aborted;
    if (res.stage3.aborted) row.error = res.stage3.diagnostic;
  } catch (const std::exception& e) {
    row.ok = false;
    row.error = e.what();
  }
  row.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return row;
}

std::string csv_text(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += (c == '\n' ? ' ' : c);
  }
  return out + "\"";
}

}  // namespace

BatchResult batch_report(const std::vector<BatchScene>& scenes, const BatchConfig& config) {
  if (scenes.empty()) throw Error(ErrorCode::InvalidArgument, "batch needs at least one scene");
  config.optimization.validate();

  BatchResult out;
  out.rows.resize(scenes.size());
  const int workers = batch_threads(config.threads, scenes.size());
  std::atomic<std::size_t> next{0};
  const auto work = [&] {
    for (std::size_t i = next++; i < scenes.size(); i = next++) {
      out.rows[i] = run_scene(scenes[i], i, config);
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
  }

  std::ostringstream csv;
  csv << "scene,shape,style,status,residual_before,residual_after,contact_count,max_penetration";
  if (config.baseline) csv << ",baseline_residual";
  csv << ",error\n";
  double sum_before = 0.0, sum_after = 0.0, sum_count = 0.0, sum_pene = 0.0, sum_base = 0.0;
  int ok = 0;
  for (const BatchRow& r : out.rows) {
    csv << r.name << ',' << r.shape << ',' << r.style << ',' << (r.ok ? "ok" : "failed") << ','
        << format_double(r.residual_before) << ',' << format_double(r.residual_after) << ','
        << r.contact_count << ',' << format_double(r.max_penetration);
    if (config.baseline) csv << ',' << format_double(r.baseline_residual);
    csv << ',' << csv_text(r.error) << '\n';
    if (!r.ok) continue;
    ++ok;
    sum_before += r.residual_before;
    sum_after += r.residual_after;
    sum_count += r.contact_count;
    sum_pene += r.max_penetration;
    sum_base += r.baseline_residual;
  }
  const double n = ok > 0 ? ok : 1.0;
  csv << "mean,,," << ok << '/' << out.rows.size() << ',' << format_double(sum_before / n) << ','
      << format_double(sum_after / n) << ',' << format_double(sum_count / n) << ','
      << format_double(sum_pene / n);
  if (config.baseline) csv << ',' << format_double(sum_base / n);
  csv << ",\n";
  out.csv = csv.str();

  // Penetration intervals in millimeters.
  constexpr std::array<double, 6> edges{0.0, 1.0, 2.0, 5.0, 10.0, 1e300};
  std::ostringstream curve;
  curve << "penetration_min_mm,penetration_max_mm,count,mean_residual\n";
  for (std::size_t b = 0; b + 1 < edges.size(); ++b) {
    int count = 0;
    double sum = 0.0;
    for (const BatchRow& r : out.rows) {
      const double mm = 1000.0 * r.max_penetration;
      if (r.ok && mm >= edges[b] && mm < edges[b + 1]) {
        ++count;
        sum += r.residual_after;
      }
    }
    curve << format_double(edges[b]) << ',' << (b + 2 == edges.size() ? std::string("inf") : format_double(edges[b + 1]))
          << ',' << count << ',' << (count > 0 ? format_double(sum / count) : std::string("")) << '\n';
  }
  out.curve_csv = curve.str();

  std::ostringstream timing;
  timing << "scene,wall_time_s\n";
  for (const BatchRow& r : out.rows) timing << r.name << ',' << format_double(r.wall_time) << '\n';
  out.timing_csv = timing.str();
  return out;
}

}  // namespace graspeq
