#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <array>

#include "wtl/error.hpp"
#include "wtl/windtree.hpp"

using namespace wtl;

namespace {

// Closed-box intersection over the nine neighbouring translates.
bool boxes_touch(const std::array<double, 4>& a, const std::array<double, 4>& b) {
  for (int dx = -1; dx <= 1; ++dx)
    for (int dy = -1; dy <= 1; ++dy) {
      const bool sx = std::max(a[0], b[0] + dx) <= std::min(a[1], b[1] + dx);
      const bool sy = std::max(a[2], b[2] + dy) <= std::min(a[3], b[3] + dy);
      if (sx && sy) return true;
    }
  return false;
}

WindtreeTable rects(std::vector<std::array<double, 4>> boxes) {
  WindtreeTable t;
  for (const auto& b : boxes) t.obstacles.push_back(rectangle_obstacle(b[0], b[1], b[2], b[3]));
  return t;
}

}  // namespace

TEST_CASE("validate_table") {
  CHECK(validate_table(rects({{0.25, 0.75, 0.25, 0.75}})).ok);

  const auto touching = validate_table(rects({{0.1, 0.4, 0.1, 0.4}, {0.4, 0.7, 0.4, 0.7}}));
  CHECK_FALSE(touching.ok);
  REQUIRE(touching.code.has_value());
  CHECK(*touching.code == ErrorCode::Overlap);
  CHECK(touching.first == 0);
  CHECK(touching.second == 1);

  const auto wrap = rects({{0.8, 1.1, 0.3, 0.5}});
  CHECK(validate_table(wrap).ok);
  CHECK_FALSE(validate_table(rects({{0.8, 1.1, 0.3, 0.5}, {0.05, 0.2, 0.35, 0.45}})).ok);

  const auto full = validate_table(rects({{0.0, 1.0, 0.2, 0.4}}));
  CHECK_FALSE(full.ok);

  WindtreeTable slanted;
  slanted.obstacles.push_back(Obstacle{{{0.2, 0.2}, {0.5, 0.2}, {0.5, 0.5}, {0.3, 0.6}}});
  const auto bad = validate_table(slanted);
  CHECK_FALSE(bad.ok);
  REQUIRE(bad.code.has_value());
  CHECK(*bad.code == ErrorCode::NonRectilinear);
}

TEST_CASE("validation agrees with a brute-force box oracle") {
  // Random rectangle pairs: overlap verdict equals the translate-box test.
  std::uint64_t state = 12345;
  auto next = [&] {
    state = state * 6364136223846793005ULL + 1442695040888963407ULL;
    return static_cast<double>(state >> 11) / 9007199254740992.0;
  };
  int agreed = 0;
  for (int trial = 0; trial < 200; ++trial) {
    std::array<std::array<double, 4>, 2> b;
    for (auto& x : b) {
      const double w = 0.05 + 0.3 * next(), h = 0.05 + 0.3 * next();
      const double x0 = 0.01 + (0.98 - w) * next(), y0 = 0.01 + (0.98 - h) * next();
      x = {x0, x0 + w, y0, y0 + h};
    }
    const auto rep = validate_table(rects({b[0], b[1]}));
    const bool overlap = rep.code && *rep.code == ErrorCode::Overlap;
    agreed += overlap == boxes_touch(b[0], b[1]);
  }
  CHECK(agreed == 200);
}

TEST_CASE("validation is invariant under torus translation") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const WindtreeTable t = sample_table(FamilySpec::parse("n=3,k=1,0,2"), seed);
    WindtreeTable moved = t;
    for (auto& o : moved.obstacles) o = o.translated({0.37, -0.21});
    CHECK(validate_table(t).ok);
    CHECK(validate_table(moved).ok);
  }
}

TEST_CASE("obstacle shapes") {
  const Obstacle o = staircase_obstacle(0.1, 0.5, 0.1, 0.5, {0.2, 0.35}, {0.45, 0.3});
  CHECK(o.concave_count() == 2);
  CHECK(o.boundary.size() == 8);
  const auto sides = o.clockwise_sides();
  REQUIRE(sides.size() == 8);
  for (size_t i = 0; i < sides.size(); ++i) {
    const Vec2 d = sides[i][1] - sides[i][0];
    if (i % 2 == 0) CHECK(d.x == 0.0);
    else CHECK(d.y == 0.0);
  }
  // The clockwise walk starts with the left side going up.
  CHECK(sides[0][1].y > sides[0][0].y);
}

TEST_CASE("family spec parsing") {
  const FamilySpec s = FamilySpec::parse("n=2,k=1,2");
  CHECK(s.n == 2);
  CHECK(s.p() == 3);
  CHECK(FamilySpec::parse(s.to_string()).k == s.k);
  CHECK(FamilySpec::parse("n=3").p() == 0);
  CHECK_THROWS_AS(FamilySpec::parse("n=2,k=1"), Error);
}

TEST_CASE("sampled tables unfold into the expected stratum") {
  for (const char* fam : {"n=1", "n=2", "n=2,k=1,2", "n=3,k=0,1,0", "n=4"}) {
    const FamilySpec spec = FamilySpec::parse(fam);
    for (std::uint64_t seed = 0; seed < 4; ++seed) {
      const WindtreeTable t = sample_table(spec, seed);
      CHECK(validate_table(t).ok);
      CHECK(t.family().k == spec.k);
      const StratumInfo st = stratum_of(unfold(t).surface());
      std::vector<int> expected(static_cast<size_t>(4 * spec.n + spec.p()), 1);
      expected.insert(expected.end(), static_cast<size_t>(spec.p()), -1);
      CHECK(st.signature.multiplicities == expected);
      CHECK(st.genus == spec.n + 1);
      CHECK(st.complex_dimension == 6 * spec.n + 2 * spec.p());
    }
  }
}

TEST_CASE("sampling is deterministic in the seed") {
  const FamilySpec spec = FamilySpec::parse("n=2,k=1,0");
  CHECK(table_to_json(sample_table(spec, 9)) == table_to_json(sample_table(spec, 9)));
  CHECK(table_to_json(sample_table(spec, 9)) != table_to_json(sample_table(spec, 10)));
}

TEST_CASE("table json round trip") {
  const WindtreeTable t = sample_table(FamilySpec::parse("n=2,k=2,1"), 3);
  const WindtreeTable back = table_from_json(table_to_json(t));
  CHECK(table_to_json(back) == table_to_json(t));
}

TEST_CASE("marked classes pair with the lattice cocycles") {
  const auto u = unfold(sample_table(FamilySpec::parse("n=2,k=1,0"), 6));
  const auto& m = u.marked();
  for (const DualCycle* h : {&m.h1, &m.h2}) {
    CHECK(std::abs(evaluate(m.fx, *h)) == 1);
    CHECK(evaluate(m.fy, *h) == 0);
  }
  for (const DualCycle* v : {&m.v1, &m.v2}) {
    CHECK(evaluate(m.fx, *v) == 0);
    CHECK(std::abs(evaluate(m.fy, *v)) == 1);
  }
}

TEST_CASE("family coordinate counts") {
  CHECK(family_coordinates(sample_table(FamilySpec::parse("n=2"), 1)).size() == 7);
  CHECK(family_coordinates(sample_table(FamilySpec::parse("n=2,k=1,2"), 1)).size() == 13);
  CHECK(family_coordinates(sample_table(FamilySpec::parse("n=1"), 1)).size() == 3);
}

TEST_CASE("reconstruct inverts family coordinates") {
  const FamilySpec spec = FamilySpec::parse("n=3,k=1,0,1");
  const WindtreeTable t = sample_table(spec, 4);
  const auto start = t.obstacles[0].boundary[static_cast<size_t>(t.obstacles[0].start_vertex())];
  const WindtreeTable r = reconstruct_table(spec, family_coordinates(t), start);
  REQUIRE(r.obstacles.size() == t.obstacles.size());
  for (size_t i = 0; i < t.obstacles.size(); ++i) {
    const auto a = t.obstacles[i].bounds(), b = r.obstacles[i].bounds();
    for (int j = 0; j < 4; ++j) CHECK(a[static_cast<size_t>(j)] == doctest::Approx(b[static_cast<size_t>(j)]).epsilon(1e-12));
  }
}

TEST_CASE("named classes") {
  const auto u = unfold(sample_table(FamilySpec::parse("n=2,k=1,0"), 2));
  for (const char* n : {"a1", "b1", "a2", "b2", "alpha1.1", "alpha1.2", "beta1.1", "beta1.2", "alpha2.1", "beta2.1",
                        "c1", "c2", "gamma1", "d1"})
    CHECK(u.classes().count(n) == 1);
  CHECK(std::abs(period(u.surface(), u.chain("a1")) - std::complex<double>(1, 0)) < 1e-12);
  CHECK(std::abs(period(u.surface(), u.chain("b1")) - std::complex<double>(0, 1)) < 1e-12);
  CHECK(std::abs(period(u.surface(), u.chain("c1"))) < 1e-12);
}
