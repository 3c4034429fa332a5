#include <doctest.h>

#include <cstdlib>

#include "graspeq/batch.hpp"
#include "graspeq/error.hpp"

using namespace graspeq;

TEST_CASE("default suite") {
  const auto suite = default_suite(8, 10);
  REQUIRE(suite.size() == 8);
  CHECK(suite[0].scene.shape == ShapeKind::Sphere);
  CHECK(suite[1].scene.shape == ShapeKind::Box);
  CHECK(suite[2].scene.shape == ShapeKind::Cylinder);
  CHECK(suite[3].scene.shape == ShapeKind::Plate);
  CHECK(suite[4].scene.shape == ShapeKind::Sphere);
  CHECK(suite[5].scene.seed == 15);
  for (const auto& s : suite) CHECK(s.style == ContactStyle::Tripod);
}

TEST_CASE("thread count") {
  unsetenv("GRASP_EQ_THREADS");
  CHECK(batch_threads(4, 2) == 2);
  CHECK(batch_threads(3, 10) == 3);
  CHECK(batch_threads(0, 10) >= 1);
  setenv("GRASP_EQ_THREADS", "1", 1);
  CHECK(batch_threads(4, 10) == 1);
  unsetenv("GRASP_EQ_THREADS");
}

TEST_CASE("batch output is independent of thread count") {
  const auto suite = default_suite(3, 0);
  BatchConfig cfg;
  cfg.threads = 1;
  cfg.baseline = true;
  const BatchResult a = batch_report(suite, cfg);
  cfg.threads = 3;
  const BatchResult b = batch_report(suite, cfg);
  CHECK(a.csv == b.csv);
  CHECK(a.curve_csv == b.curve_csv);
  REQUIRE(a.rows.size() == 3);
  for (const auto& r : a.rows) {
    CHECK(r.ok);
    CHECK(r.residual_after >= 0.0);
  }
  // One header, three scenes, one aggregate row.
  CHECK(std::count(a.csv.begin(), a.csv.end(), '\n') == 5);
  CHECK(a.csv.find("\nmean,") != std::string::npos);
}

TEST_CASE("batch failures stay per scene") {
  auto suite = default_suite(2, 0);
  suite[1].scene.sample_count = 4;
  BatchConfig cfg;
  cfg.threads = 1;
  const BatchResult r = batch_report(suite, cfg);
  CHECK(r.rows[0].ok);
  CHECK_FALSE(r.rows[1].ok);
  CHECK_FALSE(r.rows[1].error.empty());
  CHECK_THROWS_AS(batch_report({}, cfg), Error);
}
