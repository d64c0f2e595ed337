#include "wtl/surface.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <queue>
#include <sstream>

#include "wtl/error.hpp"

namespace wtl {

namespace {

bool segments_intersect(Vec2 p1, Vec2 p2, Vec2 q1, Vec2 q2) {
  const double d1 = cross(q2 - q1, p1 - q1);
  const double d2 = cross(q2 - q1, p2 - q1);
  const double d3 = cross(p2 - p1, q1 - p1);
  const double d4 = cross(p2 - p1, q2 - p1);
  if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0))) return true;
  auto on_segment = [](Vec2 a, Vec2 b, Vec2 p) {
    return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) && std::min(a.y, b.y) <= p.y &&
           p.y <= std::max(a.y, b.y);
  };
  if (d1 == 0 && on_segment(q1, q2, p1)) return true;
  if (d2 == 0 && on_segment(q1, q2, p2)) return true;
  if (d3 == 0 && on_segment(p1, p2, q1)) return true;
  if (d4 == 0 && on_segment(p1, p2, q2)) return true;
  return false;
}

bool close(Vec2 a, Vec2 b) {
  const double scale = std::max({1.0, a.norm(), b.norm()});
  return (a - b).norm() <= kGeomTol * scale;
}

}  // namespace

double PlanarPolygon::signed_area() const {
  double a = 0.0;
  for (int i = 0; i < size(); ++i) a += cross(vertex(i), vertex(i + 1));
  return 0.5 * a;
}

double PlanarPolygon::interior_angle(int i) const {
  const Vec2 out = edge(i);
  const Vec2 back = -edge(i - 1);
  double a = std::atan2(cross(out, back), dot(out, back));
  if (a <= 0.0) a += 2.0 * std::numbers::pi;
  return a;
}

bool PlanarPolygon::is_simple() const {
  const int n = size();
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (j == i + 1 || (i == 0 && j == n - 1)) continue;
      if (segments_intersect(vertex(i), vertex(i + 1), vertex(j), vertex(j + 1))) return false;
    }
  }
  return true;
}

bool PlanarPolygon::contains(Vec2 p) const {
  bool inside = false;
  const int n = size();
  for (int i = 0, j = n - 1; i < n; j = i++) {
    const Vec2 a = vertex(i), b = vertex(j);
    if ((a.y > p.y) != (b.y > p.y) && p.x < (b.x - a.x) * (p.y - a.y) / (b.y - a.y) + a.x) inside = !inside;
  }
  return inside;
}

EdgeChain& EdgeChain::append(const EdgeChain& other, int coeff) {
  if (coeff >= 0) {
    for (const auto& t : other.terms) terms.push_back({t.edge, t.coeff * coeff});
  } else {
    for (auto it = other.terms.rbegin(); it != other.terms.rend(); ++it) terms.push_back({it->edge, it->coeff * coeff});
  }
  return *this;
}

int PeriodVector::index_of(const std::string& label) const {
  const auto it = std::find(labels.begin(), labels.end(), label);
  if (it == labels.end()) throw Error(ErrorCode::LabelMismatch, "no period labelled " + label);
  return static_cast<int>(it - labels.begin());
}

std::complex<double> PeriodVector::at(const std::string& label) const {
  return values[static_cast<size_t>(index_of(label))];
}

// --- StratumSignature -------------------------------------------------------

int StratumSignature::genus() const {
  int total = 0;
  for (int d : multiplicities) total += d;
  return kind == StratumKind::Quadratic ? (total + 4) / 4 : (total + 2) / 2;
}

int StratumSignature::complex_dimension() const {
  const int k = static_cast<int>(multiplicities.size());
  return kind == StratumKind::Quadratic ? 2 * genus() - 2 + k : 2 * genus() - 1 + k;
}

StratumSignature StratumSignature::parse(const std::string& text) {
  StratumSignature sig;
  std::string body = text;
  if (body.rfind("H:", 0) == 0) {
    sig.kind = StratumKind::Abelian;
    body = body.substr(2);
  } else if (body.rfind("Q:", 0) == 0) {
    body = body.substr(2);
  } else if (body.size() >= 3 && (body[0] == 'Q' || body[0] == 'H') && body[1] == '(' && body.back() == ')') {
    if (body[0] == 'H') sig.kind = StratumKind::Abelian;
    body = body.substr(2, body.size() - 3);
  }
  std::stringstream ss(body);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item.erase(std::remove_if(item.begin(), item.end(), ::isspace), item.end());
    if (item.empty()) continue;
    int value = 0, count = 1;
    const auto caret = item.find('^');
    try {
      if (caret == std::string::npos) {
        value = std::stoi(item);
      } else {
        value = std::stoi(item.substr(0, caret));
        count = std::stoi(item.substr(caret + 1));
      }
    } catch (const std::exception&) {
      throw Error(ErrorCode::InvalidArgument, "cannot parse stratum entry '" + item + "'");
    }
    if (count < 0) throw Error(ErrorCode::InvalidArgument, "negative exponent in '" + item + "'");
    for (int i = 0; i < count; ++i) sig.multiplicities.push_back(value);
  }
  std::sort(sig.multiplicities.rbegin(), sig.multiplicities.rend());
  int total = 0;
  for (int d : sig.multiplicities) total += d;
  const int mod = sig.kind == StratumKind::Quadratic ? 4 : 2;
  if (((total % mod) + mod) % mod != 0 || sig.genus() < 0)
    throw Error(ErrorCode::InvalidArgument, "multiplicities of '" + text + "' do not sum to a valid genus");
  return sig;
}

std::string StratumSignature::to_string() const {
  std::ostringstream out;
  out << (kind == StratumKind::Quadratic ? "Q(" : "H(");
  bool first = true;
  for (size_t i = 0; i < multiplicities.size();) {
    size_t j = i;
    while (j < multiplicities.size() && multiplicities[j] == multiplicities[i]) ++j;
    if (!first) out << ",";
    first = false;
    out << multiplicities[i];
    if (j - i > 1) out << "^" << (j - i);
    i = j;
  }
  out << ")";
  return out.str();
}

// --- HalfTranslationSurface -------------------------------------------------

void HalfTranslationSurface::check_edge(EdgeRef e) const {
  if (e.polygon < 0 || e.polygon >= polygon_count() || e.edge < 0 || e.edge >= edge_count(e.polygon)) {
    throw Error(ErrorCode::UnknownEdge,
                "side (" + std::to_string(e.polygon) + "," + std::to_string(e.edge) + ") does not exist");
  }
}

Vec2 HalfTranslationSurface::edge_vector(EdgeRef e) const {
  return polygons_[static_cast<size_t>(e.polygon)].edge(e.edge);
}

Vec2 HalfTranslationSurface::vertex(CornerRef c) const {
  return polygons_[static_cast<size_t>(c.polygon)].vertex(c.edge);
}

EdgeRef HalfTranslationSurface::partner(EdgeRef e) const { return partner_[flat(e)]; }
int HalfTranslationSurface::sign(EdgeRef e) const { return sign_[flat(e)]; }
int HalfTranslationSurface::vertex_class(CornerRef c) const { return corner_class_[flat(c)]; }
int HalfTranslationSurface::surface_edge(EdgeRef e) const { return pair_id_[flat(e)]; }
int HalfTranslationSurface::surface_edge_orientation(EdgeRef e) const { return pair_orientation_[flat(e)]; }

bool HalfTranslationSurface::is_translation() const {
  return std::all_of(gluing_.pairs.begin(), gluing_.pairs.end(), [](const SidePair& p) { return p.sign == 1; });
}

double HalfTranslationSurface::area() const {
  double a = 0.0;
  for (const auto& p : polygons_) a += p.signed_area();
  return a;
}

HalfTranslationSurface build_surface(std::vector<PlanarPolygon> polygons, EdgeGluing gluing) {
  HalfTranslationSurface s;
  if (polygons.empty()) throw Error(ErrorCode::DegeneratePolygon, "no polygons");
  for (size_t i = 0; i < polygons.size(); ++i) {
    const auto& p = polygons[i];
    if (p.size() < 3) throw Error(ErrorCode::DegeneratePolygon, "polygon " + std::to_string(i) + " has < 3 vertices");
    for (int k = 0; k < p.size(); ++k) {
      if (p.edge(k).norm() <= 0.0)
        throw Error(ErrorCode::DegeneratePolygon, "polygon " + std::to_string(i) + " has a zero-length side");
    }
    if (p.signed_area() <= 0.0)
      throw Error(ErrorCode::DegeneratePolygon, "polygon " + std::to_string(i) + " is not positively oriented");
    if (!p.is_simple()) throw Error(ErrorCode::DegeneratePolygon, "polygon " + std::to_string(i) + " is not simple");
  }

  s.offsets_.resize(polygons.size() + 1, 0);
  for (size_t i = 0; i < polygons.size(); ++i) s.offsets_[i + 1] = s.offsets_[i] + static_cast<size_t>(polygons[i].size());
  const size_t total = s.offsets_.back();
  s.polygons_ = std::move(polygons);
  s.partner_.assign(total, EdgeRef{});
  s.sign_.assign(total, 0);
  s.pair_id_.assign(total, -1);
  s.pair_orientation_.assign(total, 0);

  for (size_t k = 0; k < gluing.pairs.size(); ++k) {
    const auto& pr = gluing.pairs[k];
    s.check_edge(pr.a);
    s.check_edge(pr.b);
    if (pr.sign != 1 && pr.sign != -1) throw Error(ErrorCode::InvalidArgument, "gluing sign must be +1 or -1");
    if (pr.a == pr.b) throw Error(ErrorCode::InvalidArgument, "a side cannot be glued to itself");
    const size_t fa = s.flat(pr.a), fb = s.flat(pr.b);
    if (s.pair_id_[fa] >= 0 || s.pair_id_[fb] >= 0)
      throw Error(ErrorCode::InvalidArgument, "side glued twice in pair " + std::to_string(k));
    const Vec2 va = s.edge_vector(pr.a), vb = s.edge_vector(pr.b);
    const bool ok = pr.sign == 1 ? close(va, -vb) : close(va, vb);
    if (!ok) {
      std::ostringstream msg;
      msg << "pair " << k << " (" << pr.a.polygon << "," << pr.a.edge << ")~(" << pr.b.polygon << "," << pr.b.edge
          << ") sign " << pr.sign << ": vectors (" << va.x << "," << va.y << ") and (" << vb.x << "," << vb.y << ")";
      throw Error(ErrorCode::MismatchedEdge, msg.str());
    }
    s.partner_[fa] = pr.b;
    s.partner_[fb] = pr.a;
    s.sign_[fa] = s.sign_[fb] = pr.sign;
    s.pair_id_[fa] = s.pair_id_[fb] = static_cast<int>(k);
    s.pair_orientation_[fa] = 1;
    s.pair_orientation_[fb] = -1;
  }
  for (size_t f = 0; f < total; ++f) {
    if (s.pair_id_[f] < 0) throw Error(ErrorCode::InvalidArgument, "gluing is not a perfect matching of the sides");
  }
  s.gluing_ = std::move(gluing);

  // Connectivity over the side pairing.
  {
    std::vector<char> seen(s.polygons_.size(), 0);
    std::queue<int> todo;
    todo.push(0);
    seen[0] = 1;
    while (!todo.empty()) {
      const int p = todo.front();
      todo.pop();
      for (int e = 0; e < s.edge_count(p); ++e) {
        const int q = s.partner({p, e}).polygon;
        if (!seen[static_cast<size_t>(q)]) {
          seen[static_cast<size_t>(q)] = 1;
          todo.push(q);
        }
      }
    }
    if (std::find(seen.begin(), seen.end(), 0) != seen.end())
      throw Error(ErrorCode::Disconnected, "glued polygons do not form a connected surface");
  }

  // Corner walking: from corner (A,i) cross the incoming side i-1 of A; its
  // endpoint is the start of the glued side (B,j), i.e. corner (B,j).
  s.corner_class_.assign(total, -1);
  for (int p = 0; p < s.polygon_count(); ++p) {
    for (int v = 0; v < s.edge_count(p); ++v) {
      if (s.corner_class_[s.flat({p, v})] >= 0) continue;
      ConePoint cp;
      const int id = static_cast<int>(s.cone_points_.size());
      double angle = 0.0;
      CornerRef c{p, v};
      while (s.corner_class_[s.flat(c)] < 0) {
        s.corner_class_[s.flat(c)] = id;
        cp.corners.push_back(c);
        angle += s.polygons_[static_cast<size_t>(c.polygon)].interior_angle(c.edge);
        const int n = s.edge_count(c.polygon);
        const EdgeRef incoming{c.polygon, (c.edge + n - 1) % n};
        c = s.partner(incoming);
      }
      if (!(c == CornerRef{p, v}))
        throw Error(ErrorCode::InvalidArgument, "corner walk did not close up (inconsistent orientation)");
      const double m = angle / std::numbers::pi;
      cp.angle_multiple = static_cast<int>(std::lround(m));
      if (std::abs(m - cp.angle_multiple) > 1e-6)
        throw Error(ErrorCode::InvalidArgument, "cone angle " + std::to_string(m) + "*pi is not a multiple of pi");
      s.cone_points_.push_back(std::move(cp));
    }
  }
  return s;
}

StratumInfo stratum_of(const HalfTranslationSurface& s) {
  StratumInfo info;
  const bool abelian = s.is_translation();
  info.signature.kind = abelian ? StratumKind::Abelian : StratumKind::Quadratic;
  int total = 0;
  for (const auto& cp : s.cone_points()) {
    if (cp.angle_multiple <= 0) throw Error(ErrorCode::NonPositiveAngle, "cone point with non-positive angle");
    if (cp.angle_multiple == 2) {
      ++info.marked_points;
      continue;
    }
    int d;
    if (abelian) {
      if (cp.angle_multiple % 2 != 0) throw Error(ErrorCode::InvalidArgument, "odd cone angle on a translation surface");
      d = cp.angle_multiple / 2 - 1;
    } else {
      d = cp.angle_multiple - 2;
    }
    info.signature.multiplicities.push_back(d);
    total += d;
  }
  std::sort(info.signature.multiplicities.rbegin(), info.signature.multiplicities.rend());

  // Euler characteristic of the cell structure.
  const int chi = static_cast<int>(s.cone_points().size()) - s.surface_edge_count() + s.polygon_count();
  if (chi % 2 != 0) throw Error(ErrorCode::InvalidArgument, "odd Euler characteristic");
  info.genus = (2 - chi) / 2;
  const int expected = abelian ? 2 * info.genus - 2 : 4 * info.genus - 4;
  if (total != expected)
    throw Error(ErrorCode::InvalidArgument, "Gauss-Bonnet check failed: sum of multiplicities " +
                                                std::to_string(total) + " vs " + std::to_string(expected));
  info.complex_dimension = info.signature.complex_dimension();
  return info;
}

std::complex<double> period(const HalfTranslationSurface& s, const EdgeChain& chain) {
  std::complex<double> z{0.0, 0.0};
  for (const auto& t : chain.terms) {
    s.check_edge(t.edge);
    z += static_cast<double>(t.coeff) * s.edge_vector(t.edge).complex();
  }
  return z;
}

PeriodVector periods(const HalfTranslationSurface& s, const HomologyBasis& basis) {
  PeriodVector out;
  for (const auto* group : {&basis.absolute, &basis.relative}) {
    for (const auto& nc : *group) {
      out.labels.push_back(nc.name);
      out.values.push_back(period(s, nc.chain));
    }
  }
  return out;
}

HalfTranslationSurface transform(const HalfTranslationSurface& s, double a, double b, double c, double d) {
  if (a * d - b * c <= 0.0) throw Error(ErrorCode::InvalidArgument, "linear map must have positive determinant");
  std::vector<PlanarPolygon> polys = s.polygons();
  for (auto& p : polys)
    for (auto& v : p.vertices) v = {a * v.x + b * v.y, c * v.x + d * v.y};
  return build_surface(std::move(polys), s.gluing());
}

std::vector<int> chain_vector(const HalfTranslationSurface& s, const EdgeChain& chain) {
  std::vector<int> v(static_cast<size_t>(s.surface_edge_count()), 0);
  for (const auto& t : chain.terms) {
    s.check_edge(t.edge);
    v[static_cast<size_t>(s.surface_edge(t.edge))] += t.coeff * s.surface_edge_orientation(t.edge);
  }
  return v;
}

namespace {

int matrix_rank(const Eigen::MatrixXd& m) {
  if (m.rows() == 0 || m.cols() == 0) return 0;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(m);
  lu.setThreshold(1e-9);
  return static_cast<int>(lu.rank());
}

}  // namespace

int relative_homology_rank(const HalfTranslationSurface& s, const std::vector<std::vector<int>>& chains) {
  const int ne = s.surface_edge_count();
  const int nf = s.polygon_count();
  Eigen::MatrixXd faces = Eigen::MatrixXd::Zero(nf, ne);
  for (int p = 0; p < nf; ++p) {
    for (int e = 0; e < s.edge_count(p); ++e) {
      faces(p, s.surface_edge({p, e})) += s.surface_edge_orientation({p, e});
    }
  }
  Eigen::MatrixXd all(nf + static_cast<int>(chains.size()), ne);
  all.topRows(nf) = faces;
  for (size_t i = 0; i < chains.size(); ++i) {
    if (static_cast<int>(chains[i].size()) != ne) throw Error(ErrorCode::InvalidArgument, "chain vector size mismatch");
    for (int e = 0; e < ne; ++e) all(nf + static_cast<int>(i), e) = chains[i][static_cast<size_t>(e)];
  }
  return matrix_rank(all) - matrix_rank(faces);
}

}  // namespace wtl
