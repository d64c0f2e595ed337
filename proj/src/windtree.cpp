#include "wtl/windtree.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <random>
#include <sstream>

namespace wtl {

namespace {

constexpr double kCoordTol = 1e-12;

bool is_horizontal(Vec2 a, Vec2 b) { return std::abs(a.y - b.y) <= kCoordTol && std::abs(a.x - b.x) > kCoordTol; }
bool is_vertical(Vec2 a, Vec2 b) { return std::abs(a.x - b.x) <= kCoordTol && std::abs(a.y - b.y) > kCoordTol; }

std::vector<double> unique_sorted(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  std::vector<double> out;
  for (double x : v) {
    if (out.empty() || x - out.back() > kCoordTol) out.push_back(x);
  }
  return out;
}

bool segments_touch(Vec2 p1, Vec2 p2, Vec2 q1, Vec2 q2) {
  auto orient = [](Vec2 a, Vec2 b, Vec2 c) {
    const double v = cross(b - a, c - a);
    return (v > kCoordTol) - (v < -kCoordTol);
  };
  auto on_seg = [](Vec2 a, Vec2 b, Vec2 p) {
    return std::min(a.x, b.x) - kCoordTol <= p.x && p.x <= std::max(a.x, b.x) + kCoordTol &&
           std::min(a.y, b.y) - kCoordTol <= p.y && p.y <= std::max(a.y, b.y) + kCoordTol;
  };
  const int o1 = orient(p1, p2, q1), o2 = orient(p1, p2, q2), o3 = orient(q1, q2, p1), o4 = orient(q1, q2, p2);
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && on_seg(p1, p2, q1)) return true;
  if (o2 == 0 && on_seg(p1, p2, q2)) return true;
  if (o3 == 0 && on_seg(q1, q2, p1)) return true;
  if (o4 == 0 && on_seg(q1, q2, p2)) return true;
  return false;
}

PlanarPolygon as_polygon(const Obstacle& o) { return PlanarPolygon{o.boundary}; }

bool closures_intersect(const Obstacle& a, const Obstacle& b) {
  const auto ba = a.bounds(), bb = b.bounds();
  if (ba[1] < bb[0] - kCoordTol || bb[1] < ba[0] - kCoordTol || ba[3] < bb[2] - kCoordTol || bb[3] < ba[2] - kCoordTol)
    return false;
  const int na = static_cast<int>(a.boundary.size()), nb = static_cast<int>(b.boundary.size());
  for (int i = 0; i < na; ++i)
    for (int j = 0; j < nb; ++j)
      if (segments_touch(a.boundary[static_cast<size_t>(i)], a.boundary[static_cast<size_t>((i + 1) % na)],
                         b.boundary[static_cast<size_t>(j)], b.boundary[static_cast<size_t>((j + 1) % nb)]))
        return true;
  return as_polygon(a).contains(b.boundary[0]) || as_polygon(b).contains(a.boundary[0]);
}

ValidationReport fail(ErrorCode code, std::string msg, int i = -1, int j = -1) {
  ValidationReport r;
  r.ok = false;
  r.code = code;
  r.message = std::move(msg);
  r.first = i;
  r.second = j;
  return r;
}

}  // namespace

// --- Obstacle ---------------------------------------------------------------

int Obstacle::concave_count() const {
  const int n = static_cast<int>(boundary.size());
  int count = 0;
  for (int i = 0; i < n; ++i) {
    const Vec2 a = boundary[static_cast<size_t>((i + n - 1) % n)], b = boundary[static_cast<size_t>(i)],
               c = boundary[static_cast<size_t>((i + 1) % n)];
    if (cross(b - a, c - b) < 0.0) ++count;
  }
  return count;
}

int Obstacle::start_vertex() const {
  const int n = static_cast<int>(boundary.size());
  int best = -1;
  for (int i = 0; i < n; ++i) {
    const Vec2 a = boundary[static_cast<size_t>(i)], b = boundary[static_cast<size_t>((i + 1) % n)];
    if (!is_horizontal(a, b) || b.x < a.x) continue;
    if (best < 0) {
      best = i;
      continue;
    }
    const Vec2 cur = boundary[static_cast<size_t>(best)];
    if (a.y < cur.y - kCoordTol || (std::abs(a.y - cur.y) <= kCoordTol && a.x < cur.x)) best = i;
  }
  if (best < 0) throw Error(ErrorCode::NonRectilinear, "obstacle has no bottom side");
  return best;
}

std::vector<std::array<Vec2, 2>> Obstacle::clockwise_sides() const {
  const int n = static_cast<int>(boundary.size());
  const int s = start_vertex();
  std::vector<std::array<Vec2, 2>> sides;
  for (int k = 0; k < n; ++k) {
    const int from = ((s - k) % n + n) % n;
    const int to = ((s - k - 1) % n + n) % n;
    sides.push_back({boundary[static_cast<size_t>(from)], boundary[static_cast<size_t>(to)]});
  }
  return sides;
}

Obstacle Obstacle::translated(Vec2 by) const {
  Obstacle o = *this;
  for (auto& v : o.boundary) v += by;
  return o;
}

std::array<double, 4> Obstacle::bounds() const {
  std::array<double, 4> b{1e300, -1e300, 1e300, -1e300};
  for (const auto& v : boundary) {
    b[0] = std::min(b[0], v.x);
    b[1] = std::max(b[1], v.x);
    b[2] = std::min(b[2], v.y);
    b[3] = std::max(b[3], v.y);
  }
  return b;
}

Obstacle staircase_obstacle(double x0, double x1, double y0, double y1, const std::vector<double>& xs,
                            const std::vector<double>& ys) {
  if (xs.size() != ys.size()) throw Error(ErrorCode::InvalidArgument, "staircase needs as many x as y steps");
  Obstacle o;
  o.boundary.push_back({x0, y0});
  o.boundary.push_back({x1, y0});
  const size_t k = xs.size();
  if (k == 0) {
    o.boundary.push_back({x1, y1});
  } else {
    o.boundary.push_back({x1, ys[k - 1]});
    for (size_t j = k; j-- > 0;) {
      o.boundary.push_back({xs[j], ys[j]});
      o.boundary.push_back({xs[j], j == 0 ? y1 : ys[j - 1]});
    }
  }
  o.boundary.push_back({x0, y1});
  return o;
}

Obstacle rectangle_obstacle(double x0, double x1, double y0, double y1) { return staircase_obstacle(x0, x1, y0, y1, {}, {}); }

// --- FamilySpec -------------------------------------------------------------

int FamilySpec::p() const {
  int s = 0;
  for (int v : k) s += v;
  return s;
}

FamilySpec FamilySpec::parse(const std::string& text) {
  FamilySpec spec;
  spec.n = -1;
  std::string body = text;
  body.erase(std::remove_if(body.begin(), body.end(), ::isspace), body.end());
  std::stringstream ss(body);
  std::string item;
  bool in_k = false;
  try {
    while (std::getline(ss, item, ',')) {
      if (item.rfind("n=", 0) == 0) {
        spec.n = std::stoi(item.substr(2));
        in_k = false;
      } else if (item.rfind("k=", 0) == 0) {
        in_k = true;
        if (item.size() > 2) spec.k.push_back(std::stoi(item.substr(2)));
      } else if (in_k && !item.empty()) {
        spec.k.push_back(std::stoi(item));
      } else if (!item.empty()) {
        throw Error(ErrorCode::InvalidArgument, "unexpected token '" + item + "' in family spec");
      }
    }
  } catch (const std::invalid_argument&) {
    throw Error(ErrorCode::InvalidArgument, "cannot parse family spec '" + text + "'");
  }
  if (spec.n < 0) throw Error(ErrorCode::InvalidArgument, "family spec needs n=<count>");
  if (spec.k.empty()) spec.k.assign(static_cast<size_t>(spec.n), 0);
  if (static_cast<int>(spec.k.size()) != spec.n)
    throw Error(ErrorCode::InvalidArgument, "family spec lists " + std::to_string(spec.k.size()) +
                                                " concave counts for n=" + std::to_string(spec.n));
  if (std::any_of(spec.k.begin(), spec.k.end(), [](int v) { return v < 0; }))
    throw Error(ErrorCode::InvalidArgument, "concave counts must be non-negative");
  return spec;
}

std::string FamilySpec::to_string() const {
  std::ostringstream out;
  out << "n=" << n;
  if (!k.empty()) {
    out << ",k=";
    for (size_t i = 0; i < k.size(); ++i) out << (i ? "," : "") << k[i];
  }
  return out.str();
}

FamilySpec WindtreeTable::family() const {
  FamilySpec f;
  f.n = static_cast<int>(obstacles.size());
  for (const auto& o : obstacles) f.k.push_back(o.concave_count());
  return f;
}

// --- JSON -------------------------------------------------------------------

nlohmann::json table_to_json(const WindtreeTable& t) {
  const FamilySpec f = t.family();
  nlohmann::json obs = nlohmann::json::array();
  for (const auto& o : t.obstacles) {
    nlohmann::json b = nlohmann::json::array();
    for (const auto& v : o.boundary) b.push_back({v.x, v.y});
    obs.push_back(std::move(b));
  }
  nlohmann::json j{{"n", f.n}, {"k", f.k}, {"obstacles", std::move(obs)}};
  if (t.seed) j["seed"] = *t.seed;
  else j["seed"] = nullptr;
  if (t.scale != 1.0) j["scale"] = t.scale;
  return j;
}

WindtreeTable table_from_json(const nlohmann::json& j) {
  try {
    WindtreeTable t;
    for (const auto& jo : j.at("obstacles")) {
      Obstacle o;
      for (const auto& v : jo) o.boundary.push_back({v.at(0).get<double>(), v.at(1).get<double>()});
      t.obstacles.push_back(std::move(o));
    }
    if (j.contains("seed") && !j["seed"].is_null()) t.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("scale")) t.scale = j["scale"].get<double>();
    if (j.contains("n") && j["n"].get<int>() != static_cast<int>(t.obstacles.size()))
      throw Error(ErrorCode::InvalidArgument, "table JSON: n does not match the obstacle list");
    if (j.contains("k")) {
      const auto k = j["k"].get<std::vector<int>>();
      if (k != t.family().k) throw Error(ErrorCode::InvalidArgument, "table JSON: k does not match the obstacle shapes");
    }
    return t;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("malformed table JSON: ") + e.what());
  }
}

// --- validation -------------------------------------------------------------

ValidationReport validate_table(const WindtreeTable& t) {
  const int n = static_cast<int>(t.obstacles.size());
  for (int i = 0; i < n; ++i) {
    const auto& b = t.obstacles[static_cast<size_t>(i)].boundary;
    const int m = static_cast<int>(b.size());
    if (m < 4 || m % 2 != 0) return fail(ErrorCode::NonRectilinear, "obstacle " + std::to_string(i) + " has odd or too few vertices", i);
    for (int v = 0; v < m; ++v) {
      const Vec2 p = b[static_cast<size_t>(v)], q = b[static_cast<size_t>((v + 1) % m)], r = b[static_cast<size_t>((v + 2) % m)];
      const bool h1 = is_horizontal(p, q), v1 = is_vertical(p, q), h2 = is_horizontal(q, r), v2 = is_vertical(q, r);
      if (!(h1 || v1) || !((h1 && v2) || (v1 && h2)))
        return fail(ErrorCode::NonRectilinear, "obstacle " + std::to_string(i) + " is not an alternating axis-parallel polygon", i);
    }
    const PlanarPolygon poly = as_polygon(t.obstacles[static_cast<size_t>(i)]);
    if (poly.signed_area() <= 0.0 || !poly.is_simple())
      return fail(ErrorCode::NonRectilinear, "obstacle " + std::to_string(i) + " is not simple and counter-clockwise", i);
    const int k = t.obstacles[static_cast<size_t>(i)].concave_count();
    if (m != 4 + 2 * k) return fail(ErrorCode::NonRectilinear, "obstacle " + std::to_string(i) + " corner count mismatch", i);
  }

  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      for (int dx = -1; dx <= 1; ++dx) {
        for (int dy = -1; dy <= 1; ++dy) {
          if (i == j && dx == 0 && dy == 0) continue;
          const Obstacle moved = t.obstacles[static_cast<size_t>(j)].translated({double(dx), double(dy)});
          if (closures_intersect(t.obstacles[static_cast<size_t>(i)], moved)) {
            return fail(ErrorCode::Overlap,
                        "obstacles " + std::to_string(i) + " and " + std::to_string(j) + " (translate " +
                            std::to_string(dx) + "," + std::to_string(dy) + ") intersect",
                        i, j);
          }
        }
      }
    }
  }

  // Connectivity of the complement on the grid of all coordinates mod 1.
  std::vector<double> xs{0.0}, ys{0.0};
  for (const auto& o : t.obstacles) {
    for (const auto& v : o.boundary) {
      xs.push_back(v.x - std::floor(v.x));
      ys.push_back(v.y - std::floor(v.y));
    }
  }
  xs = unique_sorted(xs);
  ys = unique_sorted(ys);
  if (1.0 - xs.back() <= kCoordTol) xs.pop_back();
  if (1.0 - ys.back() <= kCoordTol) ys.pop_back();
  const int nx = static_cast<int>(xs.size()), ny = static_cast<int>(ys.size());
  auto cx = [&](int i) { return 0.5 * (xs[static_cast<size_t>(i)] + (i + 1 < nx ? xs[static_cast<size_t>(i + 1)] : 1.0)); };
  auto cy = [&](int j) { return 0.5 * (ys[static_cast<size_t>(j)] + (j + 1 < ny ? ys[static_cast<size_t>(j + 1)] : 1.0)); };
  std::vector<char> free(static_cast<size_t>(nx * ny), 1);
  for (int i = 0; i < nx; ++i) {
    for (int j = 0; j < ny; ++j) {
      const Vec2 c{cx(i), cy(j)};
      for (const auto& o : t.obstacles) {
        const PlanarPolygon poly = as_polygon(o);
        bool inside = false;
        for (int dx = -2; dx <= 2 && !inside; ++dx)
          for (int dy = -2; dy <= 2 && !inside; ++dy) inside = poly.contains(c + Vec2{double(dx), double(dy)});
        if (inside) free[static_cast<size_t>(i * ny + j)] = 0;
      }
    }
  }
  int start = -1, total = 0;
  for (int c = 0; c < nx * ny; ++c) {
    if (free[static_cast<size_t>(c)]) {
      ++total;
      if (start < 0) start = c;
    }
  }
  if (start < 0) return fail(ErrorCode::DisconnectedComplement, "obstacles cover the torus");
  std::vector<char> seen(free.size(), 0);
  std::queue<int> todo;
  todo.push(start);
  seen[static_cast<size_t>(start)] = 1;
  int reached = 1;
  while (!todo.empty()) {
    const int c = todo.front();
    todo.pop();
    const int i = c / ny, j = c % ny;
    const int nb[4] = {((i + 1) % nx) * ny + j, ((i + nx - 1) % nx) * ny + j, i * ny + (j + 1) % ny, i * ny + (j + ny - 1) % ny};
    for (int d : nb) {
      if (free[static_cast<size_t>(d)] && !seen[static_cast<size_t>(d)]) {
        seen[static_cast<size_t>(d)] = 1;
        ++reached;
        todo.push(d);
      }
    }
  }
  if (reached != total) return fail(ErrorCode::DisconnectedComplement, "complement of the obstacles is disconnected");
  return {};
}

void require_valid(const WindtreeTable& t) {
  const auto r = validate_table(t);
  if (!r.ok) throw Error(*r.code, r.message);
}

// --- sampling ---------------------------------------------------------------

WindtreeTable sample_table(const FamilySpec& spec, std::uint64_t seed, int max_rounds) {
  if (spec.n < 0 || static_cast<int>(spec.k.size()) != spec.n)
    throw Error(ErrorCode::InvalidArgument, "invalid family spec " + spec.to_string());
  WindtreeTable t;
  t.seed = seed;
  if (spec.n == 0) return t;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double max_side = std::min(0.6, 0.75 / std::sqrt(static_cast<double>(spec.n)));
  const double min_side = std::min(0.08, 0.5 * max_side);
  const double d = kMinFeature;

  for (int round = 0; round < max_rounds; ++round) {
    std::vector<Obstacle> obs;
    std::vector<std::array<double, 4>> boxes;
    bool ok = true;
    for (int i = 0; i < spec.n && ok; ++i) {
      const int k = spec.k[static_cast<size_t>(i)];
      const double w = min_side + (max_side - min_side) * unit(rng);
      const double h = min_side + (max_side - min_side) * unit(rng);
      const double x0 = d + (1.0 - 2 * d - w) * unit(rng);
      const double y0 = d + (1.0 - 2 * d - h) * unit(rng);
      const std::array<double, 4> box{x0, x0 + w, y0, y0 + h};
      for (const auto& b : boxes) {
        if (!(box[1] + d < b[0] || b[1] + d < box[0] || box[3] + d < b[2] || b[3] + d < box[2])) ok = false;
      }
      if (!ok) break;
      std::vector<double> xs, ys;
      for (int s = 0; s < k; ++s) {
        xs.push_back(x0 + d + (w - 2 * d) * unit(rng));
        ys.push_back(y0 + d + (h - 2 * d) * unit(rng));
      }
      std::sort(xs.begin(), xs.end());
      std::sort(ys.rbegin(), ys.rend());
      obs.push_back(staircase_obstacle(x0, x0 + w, y0, y0 + h, xs, ys));
      boxes.push_back(box);
    }
    if (!ok) continue;
    // Feature separation between all distinct coordinates.
    std::vector<double> xs{0.0, 1.0}, ys{0.0, 1.0};
    for (const auto& o : obs)
      for (const auto& v : o.boundary) {
        xs.push_back(v.x);
        ys.push_back(v.y);
      }
    xs = unique_sorted(xs);
    ys = unique_sorted(ys);
    for (size_t i = 1; i < xs.size() && ok; ++i) ok = xs[i] - xs[i - 1] >= d;
    for (size_t i = 1; i < ys.size() && ok; ++i) ok = ys[i] - ys[i - 1] >= d;
    if (!ok) continue;
    t.obstacles = std::move(obs);
    require_valid(t);
    return t;
  }
  throw Error(ErrorCode::SamplingExhausted,
              "no valid table for " + spec.to_string() + " after " + std::to_string(max_rounds) + " rounds");
}

// --- cochains ---------------------------------------------------------------

int evaluate(const Cochain& f, const DualCycle& c) {
  int total = 0;
  for (const auto& e : c.exits) total += f.at_exit(e);
  return total;
}

int intersection(const HalfTranslationSurface& s, const DualCycle& eta, const EdgeChain& chain) {
  int total = 0;
  for (const auto& exit : eta.exits) {
    const EdgeRef entry = s.partner(exit);
    for (const auto& t : chain.terms) {
      if (t.edge == exit) total += t.coeff;
      else if (t.edge == entry) total -= t.coeff;
    }
  }
  return total;
}

// --- unfolding --------------------------------------------------------------

namespace {

enum Side { kBottom = 0, kRight = 1, kTop = 2, kLeft = 3 };

struct SeamKey {
  int obstacle;
  int side;
  int piece;
  auto operator<=>(const SeamKey&) const = default;
};

struct SideRecord {
  int polygon;
  int edge;
};

}  // namespace

const EdgeChain& UnfoldedTable::chain(const std::string& name) const {
  const auto it = classes_.find(name);
  if (it == classes_.end()) throw Error(ErrorCode::LabelMismatch, "unfolded table has no class " + name);
  return it->second;
}

int UnfoldedTable::locate(int copy, Vec2 p) const {
  const auto& xs = xs_[static_cast<size_t>(copy)];
  const auto& ys = ys_[static_cast<size_t>(copy)];
  const double x = p.x - std::floor(p.x), y = p.y - std::floor(p.y);
  const int i = std::clamp(static_cast<int>(std::upper_bound(xs.begin(), xs.end(), x) - xs.begin()) - 1, 0,
                           static_cast<int>(xs.size()) - 2);
  const int j = std::clamp(static_cast<int>(std::upper_bound(ys.begin(), ys.end(), y) - ys.begin()) - 1, 0,
                           static_cast<int>(ys.size()) - 2);
  return cell_index_[static_cast<size_t>(copy)][static_cast<size_t>(i * (static_cast<int>(ys.size()) - 1) + j)];
}

EdgeChain UnfoldedTable::straight_chain(int copy, Vec2 from, Vec2 to) const {
  const Vec2 dir = to - from;
  const double len = dir.norm();
  if (len <= kCoordTol) return {};
  const Vec2 u = dir * (1.0 / len);
  struct Cand {
    EdgeRef e;
    double t0, t1;
    int coeff;
    bool left;
  };
  std::vector<Cand> cands;
  for (int p = 0; p < surface_.polygon_count(); ++p) {
    const auto& cell = cells_[static_cast<size_t>(p)];
    if (cell.copy != copy) continue;
    const auto& sides = side_table_[static_cast<size_t>(p)];
    for (int e = 0; e < static_cast<int>(sides.size()); ++e) {
      const Vec2 a = sides[static_cast<size_t>(e)][0], b = sides[static_cast<size_t>(e)][1];
      if (std::abs(cross(u, a - from)) > 1e-10 || std::abs(cross(u, b - from)) > 1e-10) continue;
      double ta = dot(a - from, u), tb = dot(b - from, u);
      const int coeff = tb > ta ? 1 : -1;
      if (ta > tb) std::swap(ta, tb);
      if (ta < -1e-10 || tb > len + 1e-10) continue;
      const Vec2 center{0.5 * (cell.x0 + cell.x1), 0.5 * (cell.y0 + cell.y1)};
      cands.push_back({{p, e}, ta, tb, coeff, cross(u, center - from) > 0.0});
    }
  }
  std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
    if (std::abs(a.t0 - b.t0) > 1e-10) return a.t0 < b.t0;
    return a.left > b.left;
  });
  EdgeChain out;
  double t = 0.0;
  while (t < len - 1e-10) {
    const Cand* pick = nullptr;
    for (const auto& c : cands) {
      if (std::abs(c.t0 - t) <= 1e-10) {
        pick = &c;
        break;
      }
    }
    if (!pick) throw Error(ErrorCode::InvalidArgument, "segment is not covered by polygon sides");
    out.add(pick->e, pick->coeff);
    t = pick->t1;
  }
  return out;
}

EdgeChain UnfoldedTable::grid_path(int copy, Vec2 from, Vec2 to) const {
  const auto& xs = xs_[static_cast<size_t>(copy)];
  const auto& ys = ys_[static_cast<size_t>(copy)];
  const int nx = static_cast<int>(xs.size()), ny = static_cast<int>(ys.size());
  auto find = [](const std::vector<double>& v, double x) {
    for (size_t i = 0; i < v.size(); ++i)
      if (std::abs(v[i] - x) <= 1e-10) return static_cast<int>(i);
    throw Error(ErrorCode::InvalidArgument, "point is not on a grid line");
  };
  const int si = find(xs, from.x), sj = find(ys, from.y), ti = find(xs, to.x), tj = find(ys, to.y);
  const auto& idx = cell_index_[static_cast<size_t>(copy)];
  auto cell_free = [&](int i, int j) {
    if (i < 0 || j < 0 || i >= nx - 1 || j >= ny - 1) return false;
    return idx[static_cast<size_t>(i * (ny - 1) + j)] >= 0;
  };
  // Grid segment usable if one adjacent cell is free.
  auto usable = [&](int i, int j, int di, int dj) {
    if (di != 0) {
      const int ci = std::min(i, i + di);
      return cell_free(ci, j) || cell_free(ci, j - 1);
    }
    const int cj = std::min(j, j + dj);
    return cell_free(i, cj) || cell_free(i - 1, cj);
  };
  std::vector<int> prev(static_cast<size_t>(nx * ny), -1);
  std::vector<char> seen(static_cast<size_t>(nx * ny), 0);
  std::queue<int> todo;
  todo.push(si * ny + sj);
  seen[static_cast<size_t>(si * ny + sj)] = 1;
  while (!todo.empty()) {
    const int c = todo.front();
    todo.pop();
    if (c == ti * ny + tj) break;
    const int i = c / ny, j = c % ny;
    const int d[4][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
    for (const auto& dd : d) {
      const int i2 = i + dd[0], j2 = j + dd[1];
      if (i2 < 0 || j2 < 0 || i2 >= nx || j2 >= ny) continue;
      const int c2 = i2 * ny + j2;
      if (seen[static_cast<size_t>(c2)] || !usable(i, j, dd[0], dd[1])) continue;
      seen[static_cast<size_t>(c2)] = 1;
      prev[static_cast<size_t>(c2)] = c;
      todo.push(c2);
    }
  }
  if (!seen[static_cast<size_t>(ti * ny + tj)]) throw Error(ErrorCode::InvalidArgument, "no grid path between points");
  std::vector<int> nodes;
  for (int c = ti * ny + tj; c != -1; c = prev[static_cast<size_t>(c)]) nodes.push_back(c);
  std::reverse(nodes.begin(), nodes.end());
  auto point = [&](int c) { return Vec2{xs[static_cast<size_t>(c / ny)], ys[static_cast<size_t>(c % ny)]}; };
  EdgeChain out;
  size_t run_start = 0;
  for (size_t k = 1; k < nodes.size(); ++k) {
    const bool last = k + 1 == nodes.size();
    bool turn = false;
    if (!last) {
      const Vec2 d1 = point(nodes[k]) - point(nodes[k - 1]);
      const Vec2 d2 = point(nodes[k + 1]) - point(nodes[k]);
      turn = std::abs(cross(d1, d2)) > 0.0;
    }
    if (last || turn) {
      out.append(straight_chain(copy, point(nodes[run_start]), point(nodes[k])));
      run_start = k;
    }
  }
  return out;
}

UnfoldedTable unfold(const WindtreeTable& t) { return unfold_pair(t, t); }

UnfoldedTable unfold_pair(const WindtreeTable& copy1, const WindtreeTable& copy2) {
  require_valid(copy1);
  require_valid(copy2);
  const int n = static_cast<int>(copy1.obstacles.size());
  if (static_cast<int>(copy2.obstacles.size()) != n) throw Error(ErrorCode::InvalidArgument, "copies differ in obstacle count");
  UnfoldedTable out;
  out.shapes_[0] = copy1.obstacles;
  out.shapes_[1] = copy2.obstacles;
  for (int i = 0; i < n; ++i) {
    const auto& a = copy1.obstacles[static_cast<size_t>(i)].boundary;
    const auto& b = copy2.obstacles[static_cast<size_t>(i)].boundary;
    if (a.size() != b.size()) throw Error(ErrorCode::InvalidArgument, "copies have non-congruent obstacles");
    const Vec2 shift = b[0] - a[0];
    for (size_t v = 0; v < a.size(); ++v)
      if ((b[v] - a[v] - shift).norm() > 1e-12) throw Error(ErrorCode::InvalidArgument, "copies have non-congruent obstacles");
  }
  for (const auto* t : {&copy1, &copy2}) {
    for (const auto& o : t->obstacles) {
      const auto bb = o.bounds();
      if (bb[0] <= 0.0 || bb[1] >= 1.0 || bb[2] <= 0.0 || bb[3] >= 1.0)
        throw Error(ErrorCode::InvalidArgument, "unfolding requires obstacles strictly inside the unit square");
    }
  }

  // Clockwise sides per obstacle and copy, and seam breakpoints from both grids.
  std::array<std::vector<std::vector<std::array<Vec2, 2>>>, 2> sides;
  for (int c = 0; c < 2; ++c) {
    std::vector<double> xs{0.0, 1.0}, ys{0.0, 1.0};
    for (const auto& o : out.shapes_[static_cast<size_t>(c)]) {
      sides[static_cast<size_t>(c)].push_back(o.clockwise_sides());
      for (const auto& v : o.boundary) {
        xs.push_back(v.x);
        ys.push_back(v.y);
      }
    }
    out.xs_[static_cast<size_t>(c)] = unique_sorted(xs);
    out.ys_[static_cast<size_t>(c)] = unique_sorted(ys);
  }
  // breakpoints[o][q] = sorted distances from the side start.
  std::vector<std::vector<std::vector<double>>> breakpoints(static_cast<size_t>(n));
  for (int o = 0; o < n; ++o) {
    const int m = static_cast<int>(sides[0][static_cast<size_t>(o)].size());
    breakpoints[static_cast<size_t>(o)].resize(static_cast<size_t>(m));
    for (int q = 0; q < m; ++q) {
      std::vector<double> ts;
      for (int c = 0; c < 2; ++c) {
        const auto [a, b] = sides[static_cast<size_t>(c)][static_cast<size_t>(o)][static_cast<size_t>(q)];
        const bool vertical = std::abs(a.x - b.x) <= kCoordTol;
        const auto& grid = vertical ? out.ys_[static_cast<size_t>(c)] : out.xs_[static_cast<size_t>(c)];
        const double lo = vertical ? std::min(a.y, b.y) : std::min(a.x, b.x);
        const double hi = vertical ? std::max(a.y, b.y) : std::max(a.x, b.x);
        const double origin = vertical ? a.y : a.x;
        for (double g : grid)
          if (g > lo + kCoordTol && g < hi - kCoordTol) ts.push_back(std::abs(g - origin));
      }
      ts.push_back(0.0);
      ts.push_back((sides[0][static_cast<size_t>(o)][static_cast<size_t>(q)][1] - sides[0][static_cast<size_t>(o)][static_cast<size_t>(q)][0]).norm());
      breakpoints[static_cast<size_t>(o)][static_cast<size_t>(q)] = unique_sorted(ts);
    }
  }

  std::vector<PlanarPolygon> polys;
  std::map<SeamKey, std::vector<SideRecord>> seams;
  // (copy, i, j, side) -> polygon side for unsubdivided interior sides
  std::map<std::array<int, 4>, SideRecord> interior;
  std::vector<std::array<std::vector<int>, 4>> table_sides;

  for (int c = 0; c < 2; ++c) {
    const auto& xs = out.xs_[static_cast<size_t>(c)];
    const auto& ys = out.ys_[static_cast<size_t>(c)];
    const int nx = static_cast<int>(xs.size()) - 1, ny = static_cast<int>(ys.size()) - 1;
    auto& index = out.cell_index_[static_cast<size_t>(c)];
    index.assign(static_cast<size_t>(nx * ny), -1);
    auto blocked_by = [&](int i, int j) -> int {
      i = (i % nx + nx) % nx;
      j = (j % ny + ny) % ny;
      const Vec2 center{0.5 * (xs[static_cast<size_t>(i)] + xs[static_cast<size_t>(i + 1)]),
                        0.5 * (ys[static_cast<size_t>(j)] + ys[static_cast<size_t>(j + 1)])};
      for (int o = 0; o < n; ++o)
        if (as_polygon(out.shapes_[static_cast<size_t>(c)][static_cast<size_t>(o)]).contains(center)) return o;
      return -1;
    };
    for (int i = 0; i < nx; ++i) {
      for (int j = 0; j < ny; ++j) {
        if (blocked_by(i, j) >= 0) continue;
        const double x0 = xs[static_cast<size_t>(i)], x1 = xs[static_cast<size_t>(i + 1)];
        const double y0 = ys[static_cast<size_t>(j)], y1 = ys[static_cast<size_t>(j + 1)];
        const Vec2 corners[4] = {{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}};
        const int nbr[4][2] = {{i, j - 1}, {i + 1, j}, {i, j + 1}, {i - 1, j}};
        // Table-ccw sub-segments with their seam keys.
        struct Piece {
          Vec2 a, b;
          int side;
          std::optional<SeamKey> seam;
        };
        std::vector<Piece> pieces;
        for (int sd = 0; sd < 4; ++sd) {
          const Vec2 a = corners[sd], b = corners[(sd + 1) % 4];
          const int ob = blocked_by(nbr[sd][0], nbr[sd][1]);
          if (ob < 0) {
            pieces.push_back({a, b, sd, std::nullopt});
            continue;
          }
          // Locate the obstacle side containing [a,b].
          const auto& osides = sides[static_cast<size_t>(c)][static_cast<size_t>(ob)];
          int q = -1;
          for (int k = 0; k < static_cast<int>(osides.size()) && q < 0; ++k) {
            const Vec2 p0 = osides[static_cast<size_t>(k)][0], p1 = osides[static_cast<size_t>(k)][1];
            const Vec2 u = p1 - p0;
            if (std::abs(cross(u, a - p0)) > 1e-12 || std::abs(cross(u, b - p0)) > 1e-12) continue;
            const double L2 = dot(u, u);
            const double ta = dot(a - p0, u) / L2, tb = dot(b - p0, u) / L2;
            if (std::min(ta, tb) >= -1e-12 && std::max(ta, tb) <= 1.0 + 1e-12) q = k;
          }
          if (q < 0) throw Error(ErrorCode::InvalidArgument, "cell side not found on its obstacle");
          const Vec2 p0 = osides[static_cast<size_t>(q)][0];
          const Vec2 u = osides[static_cast<size_t>(q)][1] - p0;
          const Vec2 unit = u * (1.0 / u.norm());
          const auto& bps = breakpoints[static_cast<size_t>(ob)][static_cast<size_t>(q)];
          const double ta = dot(a - p0, unit), tb = dot(b - p0, unit);
          std::vector<double> cuts{ta};
          if (ta < tb) {
            for (double tt : bps) if (tt > ta + kCoordTol && tt < tb - kCoordTol) cuts.push_back(tt);
          } else {
            for (auto it = bps.rbegin(); it != bps.rend(); ++it) if (*it < ta - kCoordTol && *it > tb + kCoordTol) cuts.push_back(*it);
          }
          cuts.push_back(tb);
          for (size_t k = 0; k + 1 < cuts.size(); ++k) {
            const double lo = std::min(cuts[k], cuts[k + 1]);
            int piece = -1;
            for (size_t r = 0; r + 1 < bps.size(); ++r)
              if (std::abs(bps[r] - lo) <= 1e-11) piece = static_cast<int>(r);
            if (piece < 0) throw Error(ErrorCode::InvalidArgument, "seam breakpoint mismatch");
            const Vec2 pa = k == 0 ? a : p0 + unit * cuts[k];
            const Vec2 pb = k + 2 == cuts.size() ? b : p0 + unit * cuts[k + 1];
            pieces.push_back({pa, pb, sd, SeamKey{ob, q, piece}});
          }
        }
        const int poly_index = static_cast<int>(polys.size());
        index[static_cast<size_t>(i * ny + j)] = poly_index;
        out.cells_.push_back({c, x0, x1, y0, y1});
        PlanarPolygon poly;
        std::vector<std::array<Vec2, 2>> st;
        std::array<std::vector<int>, 4> ts;
        const int N = static_cast<int>(pieces.size());
        for (int m = 0; m < N; ++m) {
          // Copy 2 is reflected: chart side m is table piece N-1-m reversed.
          const int k = c == 0 ? m : N - 1 - m;
          const auto& pc = pieces[static_cast<size_t>(k)];
          const Vec2 a = c == 0 ? pc.a : pc.b;
          const Vec2 b = c == 0 ? pc.b : pc.a;
          poly.vertices.push_back(UnfoldedTable::to_chart(c, a));
          st.push_back({a, b});
          ts[static_cast<size_t>(pc.side)].push_back(m);
          if (pc.seam) seams[*pc.seam].push_back({poly_index, m});
          else interior[{c, i, j, pc.side}] = {poly_index, m};
        }
        if (c == 1) {
          for (auto& v : ts) std::reverse(v.begin(), v.end());
        }
        polys.push_back(std::move(poly));
        out.side_table_.push_back(std::move(st));
        table_sides.push_back(std::move(ts));
      }
    }
  }

  EdgeGluing gluing;
  for (int c = 0; c < 2; ++c) {
    const int nx = static_cast<int>(out.xs_[static_cast<size_t>(c)].size()) - 1;
    const int ny = static_cast<int>(out.ys_[static_cast<size_t>(c)].size()) - 1;
    for (int i = 0; i < nx; ++i) {
      for (int j = 0; j < ny; ++j) {
        const auto right = interior.find({c, i, j, kRight});
        if (right != interior.end()) {
          const auto left = interior.at({c, (i + 1) % nx, j, kLeft});
          gluing.pairs.push_back({{right->second.polygon, right->second.edge}, {left.polygon, left.edge}, 1});
        }
        const auto top = interior.find({c, i, j, kTop});
        if (top != interior.end()) {
          const auto bottom = interior.at({c, i, (j + 1) % ny, kBottom});
          gluing.pairs.push_back({{top->second.polygon, top->second.edge}, {bottom.polygon, bottom.edge}, 1});
        }
      }
    }
  }
  for (const auto& [key, recs] : seams) {
    if (recs.size() != 2) throw Error(ErrorCode::InvalidArgument, "seam piece is not shared by both copies");
    const EdgeRef a{recs[0].polygon, recs[0].edge}, b{recs[1].polygon, recs[1].edge};
    const Vec2 va = polys[static_cast<size_t>(a.polygon)].edge(a.edge);
    const Vec2 vb = polys[static_cast<size_t>(b.polygon)].edge(b.edge);
    gluing.pairs.push_back({a, b, dot(va, vb) > 0.0 ? -1 : 1});
  }
  out.surface_ = build_surface(std::move(polys), std::move(gluing));

  // Marked loops and displacement cocycles.
  for (int c = 0; c < 2; ++c) {
    const int nx = static_cast<int>(out.xs_[static_cast<size_t>(c)].size()) - 1;
    const int ny = static_cast<int>(out.ys_[static_cast<size_t>(c)].size()) - 1;
    const auto& index = out.cell_index_[static_cast<size_t>(c)];
    auto cell = [&](int i, int j) { return index[static_cast<size_t>(i * ny + j)]; };
    auto side_of = [&](int poly, int sd) {
      const auto& v = table_sides[static_cast<size_t>(poly)][static_cast<size_t>(sd)];
      if (v.size() != 1) throw Error(ErrorCode::InvalidArgument, "boundary cell side is subdivided");
      return EdgeRef{poly, v[0]};
    };
    DualCycle h, v;
    for (int i = 0; i < nx; ++i) h.exits.push_back(side_of(cell(i, 0), kRight));
    for (int j = 0; j < ny; ++j) v.exits.push_back(side_of(cell(0, j), kTop));
    (c == 0 ? out.marked_.h1 : out.marked_.h2) = h;
    (c == 0 ? out.marked_.v1 : out.marked_.v2) = v;
    for (int j = 0; j < ny; ++j) {
      if (cell(nx - 1, j) < 0) continue;
      const EdgeRef e = side_of(cell(nx - 1, j), kRight);
      out.marked_.fx.weights[e] = 1;
      out.marked_.fx.weights[out.surface_.partner(e)] = -1;
    }
    for (int i = 0; i < nx; ++i) {
      if (cell(i, ny - 1) < 0) continue;
      const EdgeRef e = side_of(cell(i, ny - 1), kTop);
      out.marked_.fy.weights[e] = 1;
      out.marked_.fy.weights[out.surface_.partner(e)] = -1;
    }
  }

  // Named classes.
  auto& cls = out.classes_;
  cls["a1"] = out.straight_chain(0, {0, 0}, {1, 0});
  cls["b1"] = out.straight_chain(0, {0, 0}, {0, 1});
  cls["a2"] = out.straight_chain(1, {0, 0}, {1, 0});
  cls["b2"] = out.straight_chain(1, {0, 0}, {0, 1});
  for (int o = 0; o < n; ++o) {
    const auto& sd = sides[0][static_cast<size_t>(o)];
    EdgeChain loop;
    for (int q = 0; q < static_cast<int>(sd.size()); ++q) {
      EdgeChain side = out.straight_chain(0, sd[static_cast<size_t>(q)][0], sd[static_cast<size_t>(q)][1]);
      const std::string name = (q % 2 == 0 ? "alpha" : "beta") + std::to_string(o + 1) + "." + std::to_string(q / 2 + 1);
      loop.append(side);
      cls[name] = std::move(side);
    }
    cls["c" + std::to_string(o + 1)] = std::move(loop);
  }
  for (int o = 0; o + 1 < n; ++o) {
    const Vec2 from1 = sides[0][static_cast<size_t>(o)][0][0], to1 = sides[0][static_cast<size_t>(o + 1)][0][0];
    const Vec2 from2 = sides[1][static_cast<size_t>(o)][0][0], to2 = sides[1][static_cast<size_t>(o + 1)][0][0];
    EdgeChain gamma = out.grid_path(0, from1, to1);
    EdgeChain d = gamma;
    d.append(out.grid_path(1, from2, to2), -1);
    cls["gamma" + std::to_string(o + 1)] = std::move(gamma);
    cls["d" + std::to_string(o + 1)] = std::move(d);
  }
  return out;
}

// --- family coordinates -----------------------------------------------------

std::vector<double> family_coordinates(const WindtreeTable& t) {
  std::vector<double> out;
  for (const auto& o : t.obstacles) {
    const auto sides = o.clockwise_sides();
    const int m = static_cast<int>(sides.size()) / 2;
    for (int j = 0; j + 1 < m; ++j) out.push_back(sides[static_cast<size_t>(2 * j)][1].y - sides[static_cast<size_t>(2 * j)][0].y);
    for (int j = 0; j + 1 < m; ++j) out.push_back(sides[static_cast<size_t>(2 * j + 1)][1].x - sides[static_cast<size_t>(2 * j + 1)][0].x);
  }
  if (!t.obstacles.empty()) {
    const Vec2 first = t.obstacles[0].boundary[static_cast<size_t>(t.obstacles[0].start_vertex())];
    for (size_t i = 1; i < t.obstacles.size(); ++i) {
      const Vec2 s = t.obstacles[i].boundary[static_cast<size_t>(t.obstacles[i].start_vertex())];
      out.push_back(s.x - first.x);
      out.push_back(s.y - first.y);
    }
  }
  out.push_back(t.scale);
  return out;
}

WindtreeTable reconstruct_table(const FamilySpec& spec, const std::vector<double>& coords, Vec2 anchor) {
  size_t expected = 1;
  for (int k : spec.k) expected += static_cast<size_t>(2 + 2 * k);
  if (spec.n > 0) expected += static_cast<size_t>(2 * (spec.n - 1));
  if (coords.size() != expected)
    throw Error(ErrorCode::InvalidArgument, "expected " + std::to_string(expected) + " coordinates, got " +
                                                std::to_string(coords.size()));
  WindtreeTable t;
  size_t pos = 0;
  std::vector<std::vector<double>> verticals, horizontals;
  for (int i = 0; i < spec.n; ++i) {
    const int m = 2 + spec.k[static_cast<size_t>(i)];
    std::vector<double> vs(coords.begin() + static_cast<long>(pos), coords.begin() + static_cast<long>(pos) + m - 1);
    pos += static_cast<size_t>(m - 1);
    std::vector<double> hs(coords.begin() + static_cast<long>(pos), coords.begin() + static_cast<long>(pos) + m - 1);
    pos += static_cast<size_t>(m - 1);
    double sv = 0, sh = 0;
    for (double v : vs) sv += v;
    for (double h : hs) sh += h;
    vs.push_back(-sv);
    hs.push_back(-sh);
    verticals.push_back(std::move(vs));
    horizontals.push_back(std::move(hs));
  }
  std::vector<Vec2> starts{anchor};
  for (int i = 1; i < spec.n; ++i) {
    starts.push_back(anchor + Vec2{coords[pos], coords[pos + 1]});
    pos += 2;
  }
  t.scale = coords[pos];
  for (int i = 0; i < spec.n; ++i) {
    std::vector<Vec2> cw{starts[static_cast<size_t>(i)]};
    const auto& vs = verticals[static_cast<size_t>(i)];
    const auto& hs = horizontals[static_cast<size_t>(i)];
    for (size_t j = 0; j < vs.size(); ++j) {
      cw.push_back(cw.back() + Vec2{0.0, vs[j]});
      if (j + 1 < vs.size()) cw.push_back(cw.back() + Vec2{hs[j], 0.0});
    }
    // cw holds the clockwise walk; reverse into counter-clockwise order
    // starting at the start vertex.
    Obstacle o;
    o.boundary.push_back(cw[0]);
    for (size_t j = cw.size(); j-- > 1;) o.boundary.push_back(cw[j]);
    t.obstacles.push_back(std::move(o));
  }
  return t;
}

}  // namespace wtl
