#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "wtl/error.hpp"
#include "wtl/family.hpp"

using namespace wtl;

namespace {

int rank_oracle(std::vector<std::vector<double>> a, double tol = 1e-9) {
  int rank = 0;
  const size_t cols = a.empty() ? 0 : a[0].size();
  for (size_t c = 0; c < cols && rank < static_cast<int>(a.size()); ++c) {
    size_t p = static_cast<size_t>(rank);
    for (size_t r = p; r < a.size(); ++r)
      if (std::abs(a[r][c]) > std::abs(a[p][c])) p = r;
    if (std::abs(a[p][c]) < tol) continue;
    std::swap(a[p], a[static_cast<size_t>(rank)]);
    const auto& piv = a[static_cast<size_t>(rank)];
    for (size_t r = 0; r < a.size(); ++r) {
      if (r == static_cast<size_t>(rank)) continue;
      const double f = a[r][c] / piv[c];
      for (size_t k = c; k < cols; ++k) a[r][k] -= f * piv[k];
    }
    ++rank;
  }
  return rank;
}

std::vector<double> realify(const PeriodVector& p) {
  std::vector<double> v;
  for (const auto& z : p.values) v.insert(v.end(), {z.real(), z.imag()});
  return v;
}

bool mentions_b(const std::string& row) {
  return row.find("b_1") != std::string::npos || row.find("b_2") != std::string::npos;
}

}  // namespace

TEST_CASE("equation counts") {
  struct Case {
    const char* family;
    int real, complex, dim;
  };
  for (const Case c : {Case{"n=2", 7, 5, 7}, Case{"n=2,k=1,2", 13, 5, 13}, Case{"n=1", 5, 2, 3},
                       Case{"n=3,k=1,0,2", 15, 8, 17}, Case{"n=4", 11, 11, 15}}) {
    const auto sys = build_equations(FamilySpec::parse(c.family));
    CHECK_MESSAGE(sys.real_rows() == c.real, c.family);
    CHECK_MESSAGE(sys.complex_rows() == c.complex, c.family);
    CHECK_MESSAGE(sys.solution_dimension() == c.dim, c.family);
    const int r = rank_oracle(sys.real_matrix());
    CHECK(2 * sys.labels.size() - r == c.dim);
  }
}

TEST_CASE("labels") {
  const auto l = period_labels(FamilySpec::parse("n=2,k=1,0"));
  CHECK(l.size() == 6 * 2 + 2 * 1);
  CHECK(l.labels.front() == "a1");
  CHECK(std::count(l.labels.begin(), l.labels.end(), "gamma1") == 1);
  CHECK(std::count(l.labels.begin(), l.labels.end(), "d1") == 1);
}

TEST_CASE("sampled periods span the solution space") {
  for (const char* fam : {"n=1", "n=2", "n=2,k=1,2", "n=3,k=0,1,0"}) {
    const FamilySpec spec = FamilySpec::parse(fam);
    const auto sys = build_equations(spec);
    std::vector<std::vector<double>> samples;
    for (std::uint64_t seed = 1; seed <= 40; ++seed) {
      WindtreeTable t = sample_table(spec, seed);
      t.scale = 1.0 + 0.05 * static_cast<double>(seed % 7);
      const auto u = unfold(t);
      const auto p = family_periods(u, sys.labels);
      const auto m = check_membership(p, sys);
      CHECK_MESSAGE(m.member, fam);
      samples.push_back(realify(p));
    }
    CHECK_MESSAGE(rank_oracle(samples, 1e-7) == sys.solution_dimension(), fam);
    CHECK(sys.solution_dimension() == static_cast<int>(family_coordinates(sample_table(spec, 1)).size()));
  }
}

TEST_CASE("perturbed b2 breaks exactly its gluing row") {
  const FamilySpec spec = FamilySpec::parse("n=2");
  const auto sys = build_equations(spec);
  auto p = family_periods(unfold(sample_table(spec, 3)), sys.labels);
  CHECK(check_membership(p, sys).member);
  p.values[static_cast<size_t>(p.index_of("b2"))] += 1e-3;
  const auto m = check_membership(p, sys);
  CHECK_FALSE(m.member);
  CHECK(m.violated == std::vector<std::string>{"b_1 = -b_2"});
}

TEST_CASE("label mismatch") {
  const auto sys = build_equations(FamilySpec::parse("n=2"));
  const auto other = build_equations(FamilySpec::parse("n=2,k=1,0"));
  const auto p = family_periods(unfold(sample_table(FamilySpec::parse("n=2,k=1,0"), 1)), other.labels);
  try {
    check_membership(p, sys);
    FAIL("expected LabelMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::LabelMismatch);
  }
}

TEST_CASE("cylinder deformation") {
  const auto u = unfold(aligned_squares_table());
  const auto& s = u.surface();
  const auto sys = build_equations(FamilySpec::parse("n=2"));
  const auto dec = detect_cylinders(s, 0.0);
  const auto p = family_periods(u, sys.labels);
  REQUIRE(check_membership(p, sys).member);

  SUBCASE("zero shift is the identity") {
    const auto q = cylinder_deform(p, s, dec, {0, 1}, u.classes(), 0.0);
    CHECK(q.values == p.values);
  }
  SUBCASE("long cylinder breaks the alpha relation among gluing rows") {
    const int c = designated_cylinder(s, dec, u.classes());
    REQUIRE(c >= 0);
    const auto q = cylinder_deform(p, s, dec, {c}, u.classes(), 0.01);
    const auto m = check_membership(q, sys);
    std::vector<std::string> group2;
    for (const auto& r : sys.rows)
      if (r.group == 2 && std::find(m.violated.begin(), m.violated.end(), r.name) != m.violated.end())
        group2.push_back(r.name);
    CHECK(group2 == std::vector<std::string>{"alpha_1 = -alpha'_1"});

    // Recompute the shifted periods directly from the intersection numbers.
    const auto w = deformation_weights(s, dec, {c}, u.classes(), sys.labels.labels);
    for (int k = 0; k < p.size(); ++k) {
      const auto& name = p.labels[static_cast<size_t>(k)];
      const double expect = w.count(name) ? w.at(name) * 0.01 : 0.0;
      CHECK(std::abs(q.values[static_cast<size_t>(k)] - p.values[static_cast<size_t>(k)] - expect) < 1e-12);
    }
  }
  SUBCASE("a cylinder meeting only b1, imaginary shift") {
    int pick = -1;
    for (int c = 0; c < static_cast<int>(dec.cylinders.size()) && pick < 0; ++c) {
      const auto w = deformation_weights(s, dec, {c}, u.classes(), sys.labels.labels);
      int others = 0;
      for (const auto& [name, v] : w)
        if (name != "b1") others += std::abs(v);
      if (w.count("b1") && w.at("b1") != 0 && others == 0) pick = c;
    }
    REQUIRE(pick >= 0);
    const auto q = cylinder_deform(p, s, dec, {pick}, u.classes(), std::complex<double>(0, 0.01));
    const auto m = check_membership(q, sys);
    CHECK_FALSE(m.member);
    for (const auto& v : m.violated) CHECK_MESSAGE(mentions_b(v), v);
  }
  SUBCASE("too large a shift degenerates the cylinder") {
    const int c = designated_cylinder(s, dec, u.classes());
    try {
      cylinder_deform(p, s, dec, {c}, u.classes(), std::complex<double>(0, -10.0));
      FAIL("expected DegeneratingCylinder");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::DegeneratingCylinder);
    }
  }
}

TEST_CASE("json output") {
  const auto sys = build_equations(FamilySpec::parse("n=2,k=1,0"));
  const auto j = system_to_json(sys);
  CHECK(j.contains("rows"));
  CHECK(j["rows"].size() == sys.rows.size());
}
