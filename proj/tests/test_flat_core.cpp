#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>
#include <numbers>

#include "wtl/double_cover.hpp"
#include "wtl/error.hpp"
#include "wtl/surface.hpp"
#include "wtl/surface_io.hpp"
#include "wtl/windtree.hpp"

using namespace wtl;

namespace {

constexpr double kPi = std::numbers::pi;

PlanarPolygon rect(double x0, double y0, double x1, double y1) {
  return {{{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}}};
}

HalfTranslationSurface square_torus() {
  EdgeGluing g;
  g.pairs = {{{0, 0}, {0, 2}, +1}, {{0, 1}, {0, 3}, +1}};
  return build_surface({rect(0, 0, 1, 1)}, g);
}

// 2x1 rectangle with both long sides folded in half: four poles.
HalfTranslationSurface pillowcase() {
  PlanarPolygon p{{{0, 0}, {1, 0}, {2, 0}, {2, 1}, {1, 1}, {0, 1}}};
  EdgeGluing g;
  g.pairs = {{{0, 0}, {0, 1}, -1}, {{0, 3}, {0, 4}, -1}, {{0, 2}, {0, 5}, +1}};
  return build_surface({p}, g);
}

double shoelace(const PlanarPolygon& p) {
  double a = 0.0;
  for (int i = 0; i < p.size(); ++i) {
    const Vec2 u = p.vertex(i), v = p.vertex(i + 1);
    a += u.x * v.y - v.x * u.y;
  }
  return 0.5 * a;
}

double corner_angle(const PlanarPolygon& p, int i) {
  const Vec2 in = p.edge(i - 1), out = p.edge(i);
  return kPi - std::atan2(in.x * out.y - in.y * out.x, in.x * out.x + in.y * out.y);
}

// Total angle per vertex class, summed from the polygon corners directly.
std::map<int, double> class_angles(const HalfTranslationSurface& s) {
  std::map<int, double> out;
  for (int p = 0; p < s.polygon_count(); ++p)
    for (int i = 0; i < s.edge_count(p); ++i) out[s.vertex_class({p, i})] += corner_angle(s.polygons()[p], i);
  return out;
}

int euler_genus(const HalfTranslationSurface& s) {
  const int chi = static_cast<int>(s.cone_points().size()) - s.surface_edge_count() + s.polygon_count();
  return (2 - chi) / 2;
}

void check_corner_oracle(const HalfTranslationSurface& s) {
  const auto angles = class_angles(s);
  REQUIRE(angles.size() == s.cone_points().size());
  for (const auto& [cls, a] : angles)
    CHECK(a == doctest::Approx(kPi * s.cone_points()[static_cast<size_t>(cls)].angle_multiple).epsilon(1e-9));
}

WindtreeTable one_rectangle(double side) {
  WindtreeTable t;
  t.obstacles = {rectangle_obstacle(0.2, 0.2 + side, 0.3, 0.3 + side)};
  return t;
}

}  // namespace

TEST_CASE("polygon area matches shoelace") {
  const PlanarPolygon p{{{0, 0}, {3, 0}, {3, 1}, {1, 1}, {1, 2}, {0, 2}}};
  CHECK(p.signed_area() == doctest::Approx(shoelace(p)));
  CHECK(shoelace(p) == doctest::Approx(4.0));
  CHECK(p.is_simple());
  CHECK(p.interior_angle(3) == doctest::Approx(1.5 * kPi));
}

TEST_CASE("square torus has no cone points") {
  const auto s = square_torus();
  const StratumInfo st = stratum_of(s);
  CHECK(st.signature.multiplicities.empty());
  CHECK(st.genus == 1);
  CHECK(euler_genus(s) == 1);
  CHECK(s.is_translation());
  check_corner_oracle(s);
}

TEST_CASE("pillowcase is Q(-1^4)") {
  const auto s = pillowcase();
  const StratumInfo st = stratum_of(s);
  CHECK(st.signature == StratumSignature::parse("-1^4"));
  CHECK(st.genus == 0);
  CHECK(euler_genus(s) == 0);
  CHECK_FALSE(s.is_translation());
  check_corner_oracle(s);
}

TEST_CASE("build_surface rejects bad input") {
  EdgeGluing g;
  g.pairs = {{{0, 0}, {0, 2}, -1}, {{0, 1}, {0, 3}, +1}};
  CHECK_THROWS_AS(build_surface({rect(0, 0, 1, 1)}, g), Error);
  try {
    build_surface({rect(0, 0, 1, 1)}, g);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::MismatchedEdge);
  }

  EdgeGluing two;
  two.pairs = {{{0, 0}, {0, 2}, +1}, {{0, 1}, {0, 3}, +1}, {{1, 0}, {1, 2}, +1}, {{1, 1}, {1, 3}, +1}};
  try {
    build_surface({rect(0, 0, 1, 1), rect(0, 0, 1, 1)}, two);
    FAIL("expected Disconnected");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Disconnected);
  }

  const PlanarPolygon flat{{{0, 0}, {1, 0}, {2, 0}}};
  CHECK_THROWS_AS(build_surface({flat}, {}), Error);
}

TEST_CASE("gauss-bonnet on random windtree unfoldings") {
  for (const char* fam : {"n=1", "n=2", "n=1,k=1", "n=1,k=2", "n=2,k=1,0", "n=3"}) {
    const FamilySpec spec = FamilySpec::parse(fam);
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
      const auto u = unfold(sample_table(spec, seed));
      const auto& s = u.surface();
      const StratumInfo st = stratum_of(s);
      int sum = 0;
      for (int d : st.signature.multiplicities) sum += d;
      CHECK(sum == 4 * st.genus - 4);
      CHECK(euler_genus(s) == st.genus);
      CHECK(st.genus == spec.n + 1);
      check_corner_oracle(s);
    }
  }
}

TEST_CASE("windtree strata") {
  SUBCASE("one rectangle") {
    const StratumInfo st = stratum_of(unfold(one_rectangle(0.4)).surface());
    CHECK(st.signature == StratumSignature::parse("1^4"));
    CHECK(st.genus == 2);
  }
  SUBCASE("two rectangles") {
    const StratumInfo st = stratum_of(unfold(sample_table(FamilySpec::parse("n=2"), 11)).surface());
    CHECK(st.signature == StratumSignature::parse("1^8"));
    CHECK(st.genus == 3);
    CHECK(st.complex_dimension == 12);
  }
  SUBCASE("one obstacle with concave corners") {
    const StratumInfo one = stratum_of(unfold(sample_table(FamilySpec::parse("n=1,k=1"), 5)).surface());
    CHECK(one.signature == StratumSignature::parse("1^5,-1"));
    const StratumInfo two = stratum_of(unfold(sample_table(FamilySpec::parse("n=1,k=2"), 5)).surface());
    CHECK(two.signature == StratumSignature::parse("1^6,-1^2"));
    CHECK(two.genus == 2);
  }
}

TEST_CASE("stratum signature parsing") {
  const auto q = StratumSignature::parse("1^10,-1^2");
  CHECK(q.kind == StratumKind::Quadratic);
  CHECK(q.multiplicities.size() == 12);
  CHECK(q.genus() == 3);
  CHECK(q.complex_dimension() == 16);
  CHECK(StratumSignature::parse(q.to_string()) == q);
  const auto h = StratumSignature::parse("H(2)");
  CHECK(h.kind == StratumKind::Abelian);
  CHECK(h.genus() == 2);
  CHECK(StratumSignature::parse("Q(1^4)") == StratumSignature::parse("1^4"));
}

TEST_CASE("double cover and riemann-hurwitz") {
  auto rh_genus = [](const StratumInfo& base) {
    int odd = 0;
    for (int d : base.signature.multiplicities) odd += d % 2 != 0;
    // 2 - 2h = 2(2 - 2g) - odd
    return (2 - 2 * (2 - 2 * base.genus) + odd) / 2;
  };

  SUBCASE("pillowcase covers a torus") {
    const auto s = pillowcase();
    const DoubleCover c = double_cover(s);
    CHECK(c.connected);
    CHECK(c.surface.is_translation());
    const StratumInfo st = stratum_of(c.surface);
    CHECK(st.genus == rh_genus(stratum_of(s)));
    CHECK(st.genus == 1);
    for (size_t i = 0; i < c.deck.size(); ++i) CHECK(c.deck[static_cast<size_t>(c.deck[i])] == static_cast<int>(i));
  }
  SUBCASE("one rectangle lifts to H(2^4)") {
    const auto s = unfold(one_rectangle(0.3)).surface();
    const DoubleCover c = double_cover(s);
    const StratumInfo st = stratum_of(c.surface);
    CHECK(st.genus == 5);
    CHECK(st.genus == rh_genus(stratum_of(s)));
    CHECK(st.signature == StratumSignature::parse("H(2^4)"));
    CHECK(c.surface.area() == doctest::Approx(2.0 * s.area()));
  }
  SUBCASE("torus has trivial holonomy") {
    const DoubleCover c = double_cover(square_torus());
    CHECK_FALSE(c.connected);
  }
}

TEST_CASE("hat basis") {
  SUBCASE("pillowcase saddle connections") {
    const auto s = pillowcase();
    const DoubleCover c = double_cover(s);
    HomologyBasis b;
    b.relative.push_back({"e0", EdgeChain{}.add({0, 0})});
    b.relative.push_back({"e2", EdgeChain{}.add({0, 2})});
    const HatBasis h = hat_basis(s, c, b);
    CHECK(h.expected_dimension == 2);
    CHECK(h.rank == 2);
    CHECK(h.is_basis());
  }
  SUBCASE("null-homologous loop is rejected") {
    const auto s = pillowcase();
    const DoubleCover c = double_cover(s);
    HomologyBasis b;
    b.absolute.push_back({"loop", EdgeChain{}.add({0, 2}).add({0, 5})});
    try {
      hat_basis(s, c, b);
      FAIL("expected HolonomyObstruction");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::HolonomyObstruction);
    }
  }
  SUBCASE("two rectangles: maximal subset has the stratum dimension") {
    const auto u = unfold(sample_table(FamilySpec::parse("n=2"), 3));
    const auto& s = u.surface();
    const DoubleCover c = double_cover(s);
    HomologyBasis b;
    for (const char* n : {"a1", "b1", "a2", "b2", "d1"}) b.absolute.push_back({n, u.chain(n)});
    for (const auto& [name, chain] : u.classes())
      if (name.rfind("alpha", 0) == 0 || name.rfind("beta", 0) == 0 || name.rfind("gamma", 0) == 0)
        b.relative.push_back({name, chain});
    const HatBasis h = hat_basis(s, c, b);
    CHECK(h.expected_dimension == 12);
    CHECK(h.rank == 12);
    CHECK(independent_subset(c.surface, h.classes).size() == 12);
  }
}

TEST_CASE("periods") {
  SUBCASE("torus loops") {
    const auto s = square_torus();
    CHECK(std::abs(period(s, EdgeChain{}.add({0, 0})) - std::complex<double>(1, 0)) < 1e-12);
    CHECK(std::abs(period(s, EdgeChain{}.add({0, 1})) - std::complex<double>(0, 1)) < 1e-12);
  }
  SUBCASE("obstacle side") {
    const auto u = unfold(one_rectangle(0.25));
    const auto z = period(u.surface(), u.chain("alpha1.1"));
    CHECK(std::abs(z - std::complex<double>(0, 0.25)) < 1e-12);
  }
  SUBCASE("additivity") {
    const auto u = unfold(sample_table(FamilySpec::parse("n=2,k=1,1"), 4));
    const auto& s = u.surface();
    const EdgeChain& x = u.chain("gamma1");
    const EdgeChain& y = u.chain("alpha1.1");
    EdgeChain xy = x;
    xy.append(y);
    CHECK(std::abs(period(s, xy) - period(s, x) - period(s, y)) < 1e-12);
  }
  SUBCASE("unknown edge") {
    CHECK_THROWS_AS(period(square_torus(), EdgeChain{}.add({0, 7})), Error);
  }
}

TEST_CASE("json round trip is stable") {
  const auto u = unfold(sample_table(FamilySpec::parse("n=1,k=1"), 2));
  const auto j = surface_to_json(u.surface());
  const auto back = surface_from_json(j);
  CHECK(surface_to_json(back) == j);
  CHECK(stratum_of(back).signature == stratum_of(u.surface()).signature);
  CHECK(back.cone_points().size() == u.surface().cone_points().size());
}

TEST_CASE("GL(2,R) action preserves the stratum") {
  const auto s = unfold(one_rectangle(0.3)).surface();
  const auto t = transform(s, 2.0, 1.0, 0.0, 0.5);
  CHECK(stratum_of(t).signature == stratum_of(s).signature);
  CHECK(t.area() == doctest::Approx(s.area()));
}
