#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "wtl/family.hpp"
#include "wtl/surface_flow.hpp"

using namespace wtl;

namespace {

HalfTranslationSurface square_torus() {
  EdgeGluing g;
  g.pairs = {{{0, 0}, {0, 2}, +1}, {{0, 1}, {0, 3}, +1}};
  return build_surface({PlanarPolygon{{{0, 0}, {1, 0}, {1, 1}, {0, 1}}}}, g);
}

MarkedClasses torus_marks() {
  MarkedClasses m;
  m.fx.weights = {{{0, 1}, 1}, {{0, 3}, -1}};
  m.fy.weights = {{{0, 2}, 1}, {{0, 0}, -1}};
  return m;
}

}  // namespace

TEST_CASE("torus pairing grows linearly") {
  const auto s = square_torus();
  const double theta = 0.61;
  const CrossingSeries cs = crossing_diffusion(s, torus_marks(), theta, 0, {0.2, 0.3}, 1e5);
  REQUIRE_FALSE(cs.aborted.has_value());
  for (const auto& c : cs.checkpoints) {
    CHECK(std::abs(c.pairing_x - c.t * std::cos(theta)) <= 2.0);
    CHECK(std::abs(c.pairing_y - c.t * std::sin(theta)) <= 2.0);
  }
  const RateEstimate e = diffusion_rate(as_displacement(cs));
  CHECK(e.slope == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("crossing counts equal billiard lattice cells") {
  for (const char* fam : {"n=1", "n=2", "n=2,k=1,1"}) {
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
      const WindtreeTable t = sample_table(FamilySpec::parse(fam), seed);
      const BilliardTable bt(t);
      const auto u = unfold(t);
      const Vec2 p = random_free_point(bt, seed);
      const double theta = random_direction(derive_seed(seed, 7));
      const auto cs = crossing_diffusion(u, theta, p, 2e4);
      const auto ds = diffuse(bt, theta, p, 2e4);
      if (cs.aborted || ds.aborted) continue;
      REQUIRE(cs.checkpoints.size() == ds.checkpoints.size());
      for (size_t k = 0; k < cs.checkpoints.size(); ++k) {
        CHECK(cs.checkpoints[k].pairing_x == ds.checkpoints[k].cell[0]);
        CHECK(cs.checkpoints[k].pairing_y == ds.checkpoints[k].cell[1]);
      }
    }
  }
}

TEST_CASE("torus has one horizontal cylinder") {
  const auto d = detect_cylinders(square_torus(), 0.0);
  REQUIRE(d.cylinders.size() == 1);
  CHECK(d.cylinders[0].width == doctest::Approx(1.0));
  CHECK(d.cylinders[0].circumference == doctest::Approx(1.0));
  CHECK(d.total_area() == doctest::Approx(1.0));
}

TEST_CASE("aligned squares decompose into horizontal cylinders") {
  const auto u = unfold(aligned_squares_table());
  const auto& s = u.surface();
  const auto d = detect_cylinders(s, 0.0);
  CHECK(d.total_area() == doctest::Approx(s.area()));

  const int c = designated_cylinder(s, d, u.classes());
  REQUIRE(c >= 0);
  const auto hits = core_intersections(s, d.cylinders[static_cast<size_t>(c)], u.classes());
  CHECK(std::abs(hits.at("b1")) == 1);
  CHECK(std::abs(hits.at("b2")) == 1);
  CHECK(std::abs(hits.at("alpha1.1")) == 1);

  // A band missing every obstacle stays in one copy and meets only b of that copy.
  bool found = false;
  for (const auto& cyl : d.cylinders) {
    const auto h = core_intersections(s, cyl, u.classes());
    int others = 0;
    for (const auto& [name, v] : h)
      if (name != "b1" && name != "a1" && name.rfind("gamma", 0) != 0 && name.rfind("d", 0) != 0) others += std::abs(v);
    if (std::abs(h.at("b1")) == 1 && others == 0) found = true;
  }
  CHECK(found);
}

TEST_CASE("cylinders of a vertical direction") {
  const auto u = unfold(aligned_squares_table());
  const auto d = detect_cylinders(u.surface(), std::acos(-1.0) / 2);
  CHECK_FALSE(d.cylinders.empty());
  CHECK(d.total_area() == doctest::Approx(u.surface().area()));
}

TEST_CASE("flow from a corner hits the surface sides") {
  const auto s = square_torus();
  GeodesicFlow flow(s);
  FlowState st;
  st.polygon = 0;
  st.position = {0.5, 0.25};
  st.direction = {1.0, 0.0};
  int crossings = 0;
  const FlowState end = flow.run(st, 3.0, [&](const Crossing&) { ++crossings; });
  CHECK(crossings == 3);
  CHECK(end.position.x == doctest::Approx(0.5));
  CHECK(locate(s, {0.4, 0.4}).value() == 0);
}
