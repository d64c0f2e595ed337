#include "wtl/family.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "wtl/error.hpp"

namespace wtl {

namespace {

std::string side_label(const char* kind, int i, int j) {
  return std::string(kind) + std::to_string(i) + "." + std::to_string(j);
}

const std::complex<double> kI{0.0, 1.0};

// Crossings of a chain with a cylinder core, each weighted by the direction
// of the core in the chart of the crossed side relative to e^{i theta}: the
// shear adds delta in the cylinder frame, which is -delta in a flipped chart.
int sheared_intersection(const HalfTranslationSurface& s, const DualCycle& core, const EdgeChain& chain,
                         double theta) {
  const Vec2 dir{std::cos(theta), std::sin(theta)};
  auto outward = [&](EdgeRef e) {
    const Vec2 v = s.edge_vector(e);
    return dot(Vec2{v.y, -v.x}, dir) > 0.0 ? 1 : -1;
  };
  int total = 0;
  for (const auto& exit : core.exits) {
    const EdgeRef entry = s.partner(exit);
    for (const auto& t : chain.terms) {
      if (t.edge == exit) total += t.coeff * outward(exit);
      else if (t.edge == entry) total += t.coeff * outward(entry);
    }
  }
  return total;
}

}  // namespace

PeriodLabelSet period_labels(const FamilySpec& spec) {
  PeriodLabelSet out;
  out.labels = {"a1", "b1", "a2", "b2"};
  for (int i = 1; i <= spec.n; ++i) {
    const int sides = 2 + spec.k[static_cast<size_t>(i - 1)];
    const int last = i < spec.n ? sides : sides - 1;
    for (int j = 1; j <= last; ++j) {
      out.labels.push_back(side_label("alpha", i, j));
      out.labels.push_back(side_label("beta", i, j));
    }
  }
  for (int i = 1; i < spec.n; ++i) out.labels.push_back("gamma" + std::to_string(i));
  for (int i = 1; i < spec.n; ++i) out.labels.push_back("d" + std::to_string(i));
  return out;
}

std::complex<double> EquationRow::evaluate(const PeriodVector& p) const {
  std::complex<double> v = 0.0;
  for (const auto& [label, c] : coeff) v += c * p.at(label);
  for (const auto& [label, c] : conj_coeff) v += c * std::conj(p.at(label));
  return complex ? v : std::complex<double>(v.real(), 0.0);
}

int FamilyEquationSystem::real_rows() const {
  return static_cast<int>(std::count_if(rows.begin(), rows.end(), [](const EquationRow& r) { return !r.complex; }));
}

int FamilyEquationSystem::complex_rows() const { return static_cast<int>(rows.size()) - real_rows(); }

std::vector<std::vector<double>> FamilyEquationSystem::real_matrix() const {
  std::map<std::string, int> index;
  for (int k = 0; k < labels.size(); ++k) index[labels.labels[static_cast<size_t>(k)]] = k;
  std::vector<std::vector<double>> m;
  const size_t width = 2 * static_cast<size_t>(labels.size());
  for (const auto& r : rows) {
    std::vector<double> re(width, 0.0), im(width, 0.0);
    auto put = [&](const std::string& label, std::complex<double> c, bool conj) {
      const size_t x = 2 * static_cast<size_t>(index.at(label)), y = x + 1;
      // c*(x+iy) or c*(x-iy)
      const double s = conj ? -1.0 : 1.0;
      re[x] += c.real();
      re[y] += -s * c.imag();
      im[x] += c.imag();
      im[y] += s * c.real();
    };
    for (const auto& [label, c] : r.coeff) put(label, c, false);
    for (const auto& [label, c] : r.conj_coeff) put(label, c, true);
    m.push_back(re);
    if (r.complex) m.push_back(im);
  }
  return m;
}

int FamilyEquationSystem::rank() const {
  const auto m = real_matrix();
  if (m.empty()) return 0;
  Eigen::MatrixXd a(static_cast<Eigen::Index>(m.size()), static_cast<Eigen::Index>(m[0].size()));
  for (size_t i = 0; i < m.size(); ++i)
    for (size_t j = 0; j < m[i].size(); ++j) a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = m[i][j];
  Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
  lu.setThreshold(1e-10);
  return static_cast<int>(lu.rank());
}

int FamilyEquationSystem::solution_dimension() const { return 2 * labels.size() - rank(); }

FamilyEquationSystem build_equations(const FamilySpec& spec) {
  if (spec.n < 1 || static_cast<int>(spec.k.size()) != spec.n)
    throw Error(ErrorCode::InvalidArgument, "family needs n >= 1 obstacles with one k entry each");
  FamilyEquationSystem sys;
  sys.spec = spec;
  sys.labels = period_labels(spec);
  auto real_row = [&](std::string name, std::map<std::string, std::complex<double>> c) {
    sys.rows.push_back({std::move(name), 1, false, std::move(c), {}});
  };
  auto complex_row = [&](std::string name, std::map<std::string, std::complex<double>> c,
                         std::map<std::string, std::complex<double>> e = {}) {
    sys.rows.push_back({std::move(name), 2, true, std::move(c), std::move(e)});
  };

  real_row("Im a_1 = 0", {{"a1", -kI}});
  real_row("Re b_1 = 0", {{"b1", 1.0}});
  real_row("Re a_1 = Im b_1", {{"a1", 1.0}, {"b1", kI}});
  for (int i = 1; i <= spec.n; ++i) {
    const int free_sides = 1 + spec.k[static_cast<size_t>(i - 1)];
    for (int j = 1; j <= free_sides; ++j) {
      real_row("Re alpha_" + std::to_string(i) + "^" + std::to_string(j) + " = 0", {{side_label("alpha", i, j), 1.0}});
      real_row("Im beta_" + std::to_string(i) + "^" + std::to_string(j) + " = 0", {{side_label("beta", i, j), -kI}});
    }
  }

  complex_row("a_1 = a_2", {{"a1", 1.0}, {"a2", -1.0}});
  complex_row("b_1 = -b_2", {{"b1", 1.0}, {"b2", 1.0}});
  for (int i = 1; i < spec.n; ++i) {
    const int sides = 2 + spec.k[static_cast<size_t>(i - 1)];
    const std::string is = std::to_string(i);
    std::map<std::string, std::complex<double>> a, b;
    for (int j = 1; j <= sides; ++j) {
      a[side_label("alpha", i, j)] = 1.0;
      b[side_label("beta", i, j)] = 1.0;
    }
    const bool rect = sides == 2;
    complex_row(rect ? "alpha_" + is + " = -alpha'_" + is : "sum_j alpha_" + is + "^j = 0", a);
    complex_row(rect ? "beta_" + is + " = -beta'_" + is : "sum_j beta_" + is + "^j = 0", b);
  }
  for (int i = 1; i < spec.n; ++i) {
    const std::string is = std::to_string(i);
    complex_row("d_" + is + " = gamma_" + is + " - conj(gamma_" + is + ")", {{"d" + is, 1.0}, {"gamma" + is, -1.0}},
                {{"gamma" + is, 1.0}});
  }
  return sys;
}

PeriodVector family_periods(const UnfoldedTable& u, const PeriodLabelSet& labels) {
  PeriodVector p;
  for (const auto& l : labels.labels) {
    p.labels.push_back(l);
    p.values.push_back(period(u.surface(), u.chain(l)));
  }
  return p;
}

MembershipReport check_membership(const PeriodVector& p, const FamilyEquationSystem& sys, double tol) {
  std::vector<std::string> a = p.labels, b = sys.labels.labels;
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  if (a != b || std::adjacent_find(a.begin(), a.end()) != a.end())
    throw Error(ErrorCode::LabelMismatch, "period vector labels differ from the system's labels");
  double scale = 0.0;
  for (const auto& z : p.values) scale = std::max(scale, std::abs(z));
  if (scale == 0.0) scale = 1.0;
  MembershipReport rep;
  for (const auto& r : sys.rows) {
    const double res = std::abs(r.evaluate(p)) / scale;
    rep.residuals.push_back(res);
    if (!(res < tol)) {
      rep.member = false;
      rep.violated.push_back(r.name);
    }
  }
  return rep;
}

std::map<std::string, int> deformation_weights(const HalfTranslationSurface& s, const CylinderDecomposition& dec,
                                               const std::vector<int>& subset,
                                               const std::map<std::string, EdgeChain>& classes,
                                               const std::vector<std::string>& labels) {
  std::map<std::string, int> w;
  for (const auto& l : labels) {
    const auto it = classes.find(l);
    if (it == classes.end()) throw Error(ErrorCode::LabelMismatch, "no class named " + l);
    w[l] = 0;
    for (int c : subset) {
      if (c < 0 || c >= static_cast<int>(dec.cylinders.size()))
        throw Error(ErrorCode::InvalidArgument, "cylinder index out of range");
      w[l] += sheared_intersection(s, dec.cylinders[static_cast<size_t>(c)].core, it->second, dec.direction);
    }
  }
  return w;
}

PeriodVector cylinder_deform(const PeriodVector& p, const HalfTranslationSurface& s, const CylinderDecomposition& dec,
                             const std::vector<int>& subset, const std::map<std::string, EdgeChain>& classes,
                             std::complex<double> delta) {
  if (dec.cylinders.empty()) throw Error(ErrorCode::NotPeriodic, "direction has no cylinder decomposition");
  // Component of delta transverse to the cylinder direction changes the widths.
  const std::complex<double> turned = delta * std::polar(1.0, -dec.direction);
  for (int c : subset) {
    if (c < 0 || c >= static_cast<int>(dec.cylinders.size()))
      throw Error(ErrorCode::InvalidArgument, "cylinder index out of range");
    if (dec.cylinders[static_cast<size_t>(c)].width + turned.imag() <= 0.0)
      throw Error(ErrorCode::DegeneratingCylinder, "cylinder " + std::to_string(c) + " would lose its width");
  }
  const auto w = deformation_weights(s, dec, subset, classes, p.labels);
  PeriodVector out = p;
  for (size_t k = 0; k < out.labels.size(); ++k) out.values[k] += static_cast<double>(w.at(out.labels[k])) * delta;
  return out;
}

WindtreeTable aligned_squares_table() {
  WindtreeTable t;
  t.obstacles = {rectangle_obstacle(0.1, 0.4, 0.3, 0.6), rectangle_obstacle(0.55, 0.85, 0.3, 0.6)};
  return t;
}

int designated_cylinder(const HalfTranslationSurface& s, const CylinderDecomposition& dec,
                        const std::map<std::string, EdgeChain>& classes) {
  const std::map<std::string, EdgeChain> probe{{"alpha1.1", classes.at("alpha1.1")}};
  for (size_t c = 0; c < dec.cylinders.size(); ++c)
    if (core_intersections(s, dec.cylinders[c], probe).at("alpha1.1") != 0) return static_cast<int>(c);
  return -1;
}

nlohmann::json system_to_json(const FamilyEquationSystem& sys) {
  nlohmann::json rows = nlohmann::json::array();
  auto terms = [](const std::map<std::string, std::complex<double>>& m) {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [l, c] : m) j[l] = {c.real(), c.imag()};
    return j;
  };
  for (const auto& r : sys.rows) {
    nlohmann::json row = {{"name", r.name}, {"group", r.group}, {"kind", r.complex ? "complex" : "real"},
                          {"coeff", terms(r.coeff)}};
    if (!r.conj_coeff.empty()) row["conj_coeff"] = terms(r.conj_coeff);
    rows.push_back(row);
  }
  return {{"family", sys.spec.to_string()},
          {"labels", sys.labels.labels},
          {"real_rows", sys.real_rows()},
          {"complex_rows", sys.complex_rows()},
          {"solution_dimension", sys.solution_dimension()},
          {"rows", rows}};
}

nlohmann::json membership_to_json(const FamilyEquationSystem& sys, const MembershipReport& r) {
  nlohmann::json res = nlohmann::json::object();
  for (size_t k = 0; k < sys.rows.size(); ++k) res[sys.rows[k].name] = r.residuals[k];
  return {{"member", r.member}, {"violated", r.violated}, {"residuals", res}};
}

}  // namespace wtl
