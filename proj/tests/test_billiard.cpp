#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "wtl/billiard.hpp"

using namespace wtl;

namespace {

WindtreeTable square_table(double x0, double x1, double y0, double y1) {
  WindtreeTable t;
  t.obstacles = {rectangle_obstacle(x0, x1, y0, y1)};
  return t;
}

DiffusionSeries power_series(double exponent, double c, int m) {
  DiffusionSeries s;
  double t = 16.0;
  for (int k = 0; k < m; ++k, t *= 2.0) s.checkpoints.push_back({t, c * std::pow(t, exponent), {0, 0}});
  return s;
}

}  // namespace

TEST_CASE("single specular bounce") {
  const BilliardTable table(square_table(0.4, 0.8, 0.3, 0.7));
  Ray r;
  r.position = {0.1, 0.5};
  r.direction = {1.0, 0.0};
  const TraceResult res = trace(table, r);
  CHECK(res.event.hit);
  CHECK(res.event.time == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(res.ray.direction.x == doctest::Approx(-1.0));
  CHECK(res.ray.direction.y == doctest::Approx(0.0));
  CHECK(res.ray.position.x == doctest::Approx(0.4));
}

TEST_CASE("oblique bounce off a horizontal side") {
  const BilliardTable table(square_table(0.4, 0.8, 0.3, 0.7));
  Ray r;
  r.position = {0.5, 0.1};
  const double th = 1.1;
  r.direction = {std::cos(th), std::sin(th)};
  const TraceResult res = trace(table, r);
  CHECK(res.event.hit);
  CHECK(res.event.time == doctest::Approx(0.2 / std::sin(th)));
  CHECK(res.ray.direction.x == doctest::Approx(std::cos(th)));
  CHECK(res.ray.direction.y == doctest::Approx(-std::sin(th)));
}

TEST_CASE("empty table is ballistic") {
  const BilliardTable table(WindtreeTable{});
  CHECK(table.empty());
  Ray r;
  r.position = {0.3, 0.3};
  r.direction = {std::cos(0.7), std::sin(0.7)};
  TraceOptions opts;
  opts.max_time = 10.0;
  const TraceResult res = trace(table, r, opts);
  CHECK_FALSE(res.event.hit);

  const DiffusionSeries s = diffuse(table, 0.7, {0.3, 0.3}, 1e5);
  REQUIRE(s.checkpoints.size() >= 8);
  for (const auto& c : s.checkpoints) CHECK(c.displacement == doctest::Approx(c.t).epsilon(1e-6));
  const RateEstimate e = diffusion_rate(s);
  CHECK(e.slope == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("synthetic power laws") {
  const RateEstimate half = diffusion_rate(power_series(0.5, 1.0, 14));
  CHECK(std::abs(half.slope - 0.5) < 1e-3);
  const RateEstimate lin = diffusion_rate(power_series(1.0, 3.7, 14));
  CHECK(std::abs(lin.slope - 1.0) < 1e-3);
  CHECK(lin.window_end - lin.window_begin == 7);
  CHECK_THROWS_AS(diffusion_rate(power_series(0.5, 1.0, 5)), Error);
}

TEST_CASE("double tracer matches the 128-bit shadow") {
  const BilliardTable table(square_table(0.25, 0.75, 0.25, 0.75));
  const Vec2 start{0.1, 0.13};
  const auto a = cell_after(table, start, 0.578235, 10000);
  const auto b = shadow_cell_after(table, start, 0.578235, 10000);
  CHECK(a == b);
  CHECK(cell_after(table, start, 0.578235, 10000) == a);
}

TEST_CASE("the unit cell is periodic") {
  // A trajectory and its copy shifted by a lattice vector land in shifted cells.
  const BilliardTable table(sample_table(FamilySpec::parse("n=2"), 8));
  const Vec2 p = random_free_point(table, 3);
  const DiffusionSeries s = diffuse(table, 0.9, p, 4096);
  CHECK(!s.aborted.has_value());
  CHECK(s.bounces > 0);
  CHECK(table.is_free(p));
}

TEST_CASE("axis directions are excluded") {
  CHECK(near_axis(0.0));
  CHECK(near_axis(std::acos(-1.0) / 2 + 1e-8));
  CHECK_FALSE(near_axis(0.3));
  const BilliardTable table(sample_table(FamilySpec::parse("n=2"), 2));
  AverageOptions opts;
  const DirectionRun run = run_direction(table, 0.0, 5, 1e4, opts);
  CHECK(run.excluded);
  for (std::uint64_t s = 0; s < 200; ++s) CHECK_FALSE(near_axis(random_direction(s)));
}

TEST_CASE("direction average on the empty table") {
  const BilliardTable table(WindtreeTable{});
  const DirectionAverage avg = direction_averaged_rate(table, 8, 1e5, 1);
  CHECK(avg.used == 8);
  CHECK(std::abs(avg.mean - 1.0) < 0.01);
}

TEST_CASE("averages are deterministic across thread counts") {
  const BilliardTable table(sample_table(FamilySpec::parse("n=1"), 4));
  AverageOptions one, four;
  four.threads = 4;
  const auto a = direction_averaged_rate(table, 6, 2e4, 17, one);
  const auto b = direction_averaged_rate(table, 6, 2e4, 17, four);
  CHECK(a.mean == b.mean);
  CHECK(a.stderr_ == b.stderr_);
}

TEST_CASE("seed derivation") {
  std::set<std::uint64_t> seen;
  for (std::uint64_t i = 0; i < 1000; ++i) seen.insert(derive_seed(42, i));
  CHECK(seen.size() == 1000);
  CHECK(derive_seed(42, 3) == derive_seed(42, 3));
}

TEST_CASE("series csv") {
  const BilliardTable table(WindtreeTable{});
  AverageOptions opts;
  opts.keep_series = true;
  const auto avg = direction_averaged_rate(table, 2, 1e4, 1, opts);
  std::ostringstream out;
  write_series_csv(out, "empty", avg.runs);
  const std::string text = out.str();
  CHECK(text.find("empty") != std::string::npos);
  CHECK(std::count(text.begin(), text.end(), '\n') > 2);
}
