#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include "wtl/error.hpp"
#include "wtl/experiment.hpp"

using namespace wtl;

namespace {

FigurePoint point(int x, double lambda, double err) {
  FigurePoint p;
  p.x = x;
  p.report.lambda_plus_top = lambda;
  p.report.stderr_ = err;
  return p;
}

bool all_passed(const std::vector<TrendCheck>& checks) {
  for (const auto& c : checks)
    if (!c.passed) return false;
  return !checks.empty();
}

}  // namespace

TEST_CASE("config parsing") {
  const auto j = nlohmann::json::parse(R"({"family": "n=2,k=1,0", "n_tables": 3, "seed": 9})");
  const ExperimentConfig c = ExperimentConfig::from_json(j);
  CHECK(c.family.n == 2);
  CHECK(c.n_tables == 3);
  CHECK(c.seed == 9);
  CHECK(c.n_directions == 50);
  CHECK(ExperimentConfig::from_json(c.to_json()).to_json() == c.to_json());
  CHECK_THROWS_AS(ExperimentConfig::from_json(nlohmann::json::parse(R"({"n_tabels": 3})")), Error);

  ExperimentConfig bad = c;
  bad.n_directions = 0;
  CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("config hash ignores workers and paths") {
  ExperimentConfig a;
  ExperimentConfig b = a;
  b.workers = 8;
  b.output_dir = "/tmp/elsewhere";
  CHECK(a.hash() == b.hash());
  b.seed = 2;
  CHECK(a.hash() != b.hash());
  ExperimentConfig c = a;
  c.T_flow = 2e6;
  CHECK(a.hash() != c.hash());
}

TEST_CASE("parallel_for covers every index once") {
  std::vector<int> hits(97, 0);
  parallel_for(97, 4, [&](int i) { hits[static_cast<size_t>(i)] += 1; });
  for (int h : hits) CHECK(h == 1);
}

TEST_CASE("sweeps are independent of the worker count") {
  ExperimentConfig c;
  c.family = FamilySpec::parse("n=1");
  c.n_tables = 3;
  c.n_directions = 4;
  c.T_flow = 2e4;
  const SweepResult one = run_diffusion_sweep(c);
  c.workers = 3;
  const SweepResult three = run_diffusion_sweep(c);
  REQUIRE(one.rows.size() == 3);
  for (size_t i = 0; i < one.rows.size(); ++i) {
    CHECK(one.rows[i].seed == three.rows[i].seed);
    CHECK(one.rows[i].rate == three.rows[i].rate);
  }
  CHECK(one.mean == three.mean);

  std::ostringstream out;
  write_sweep_csv(out, c, one);
  CHECK(out.str().find(c.hash()) != std::string::npos);
}

TEST_CASE("figure strata") {
  const auto np = figure_strata("no_pole", 5, 6);
  REQUIRE(np.size() == 4);
  CHECK(np.front().second == "1^8");
  const auto poles = figure_strata("poles", 5, 6);
  CHECK(poles.size() == 7);
  CHECK(poles[3].second == "1^11,-1^3");
  CHECK(figure_strata("ten_pole", 5, 6).size() == 3);
  CHECK_THROWS_AS(figure_strata("spiral", 5, 6), Error);
  CHECK_THROWS_AS(figure_strata("no_pole", 9, 6), Error);
}

TEST_CASE("trend checks on synthetic curves") {
  const std::vector<FigurePoint> good{point(2, 0.654, 0.002), point(3, 0.612, 0.002), point(4, 0.588, 0.002),
                                      point(5, 0.575, 0.002)};
  CHECK(all_passed(figure_trends("no_pole", good)));
  std::vector<FigurePoint> rising = good;
  rising[3].report.lambda_plus_top = 0.7;
  CHECK_FALSE(all_passed(figure_trends("no_pole", rising)));

  const std::vector<FigurePoint> low{point(1, 0.38, 0.01), point(2, 0.41, 0.01)};
  CHECK(all_passed(figure_trends("ten_pole", low)));
  const std::vector<FigurePoint> high{point(1, 0.38, 0.01), point(2, 0.55, 0.01)};
  CHECK_FALSE(all_passed(figure_trends("ten_pole", high)));
}

TEST_CASE("figure output") {
  FigureResult f;
  f.name = "no_pole";
  f.points = {point(2, 0.65, 0.01), point(3, 0.61, 0.01)};
  f.points[0].stratum = "1^8";
  f.points[1].stratum = "1^12";
  std::ostringstream csv, svg;
  write_figure_csv(csv, ExperimentConfig{}, f);
  write_figure_svg(svg, f);
  CHECK(csv.str().find("1^12") != std::string::npos);
  CHECK(csv.str().find(kCodeVersion) != std::string::npos);
  CHECK(svg.str().find("<svg") != std::string::npos);
  CHECK(svg.str().find("</svg>") != std::string::npos);
}

TEST_CASE("selftest passes") {
  const SelftestReport r = selftest(1);
  for (const auto& c : r.checks) CHECK_MESSAGE(c.passed, std::string(c.name + ": " + c.detail));
  CHECK(r.passed());
}
