#include "wtl/surface_flow.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <set>

namespace wtl {

// --- crossing counts --------------------------------------------------------

CrossingSeries crossing_diffusion(const HalfTranslationSurface& s, const MarkedClasses& m, double theta, int polygon,
                                  Vec2 start, double T, const CrossingOptions& opts) {
  if (!(opts.t0 > 0.0) || !(T >= opts.t0)) throw Error(ErrorCode::InvalidArgument, "need 0 < t0 <= T");
  s.check_edge({polygon, 0});
  GeodesicFlow flow(s, opts.flow);
  FlowState st;
  st.polygon = polygon;
  st.position = start;
  st.direction = {std::cos(theta), std::sin(theta)};
  CrossingSeries out;
  long px = 0, py = 0;
  double time = 0.0;
  const auto count = [&](const Crossing& c) {
    px += m.fx.at_exit(c.exit);
    py += m.fy.at_exit(c.exit);
    ++out.crossings;
  };
  try {
    for (double next = opts.t0; next <= T * (1 + 1e-15); next *= 2.0) {
      st = flow.run(st, next - time, count);
      time = next;
      out.checkpoints.push_back({next, px, py});
    }
  } catch (const Error& e) {
    out.aborted = e.code();
    out.message = e.what();
  }
  return out;
}

CrossingSeries crossing_diffusion(const UnfoldedTable& u, double theta, Vec2 p, double T, const CrossingOptions& opts) {
  const int poly = u.locate(0, p);
  if (poly < 0) throw Error(ErrorCode::InvalidArgument, "start point lies inside an obstacle");
  const Vec2 q{p.x - std::floor(p.x), p.y - std::floor(p.y)};
  return crossing_diffusion(u.surface(), u.marked(), theta, poly, UnfoldedTable::to_chart(0, q), T, opts);
}

DiffusionSeries as_displacement(const CrossingSeries& s) {
  DiffusionSeries d;
  for (const auto& c : s.checkpoints)
    d.checkpoints.push_back({c.t, std::hypot(double(c.pairing_x), double(c.pairing_y)), {c.pairing_x, c.pairing_y}});
  d.aborted = s.aborted;
  d.message = s.message;
  return d;
}

void write_crossings_csv(std::ostream& out, const std::string& table_id, double theta, const CrossingSeries& s,
                         bool header) {
  if (header) out << "table_id,theta,t_k,pairing_x,pairing_y\n";
  out.precision(17);
  for (const auto& c : s.checkpoints)
    out << table_id << ',' << theta << ',' << c.t << ',' << c.pairing_x << ',' << c.pairing_y << '\n';
}

// --- cylinders --------------------------------------------------------------

double CylinderDecomposition::total_area() const {
  double a = 0.0;
  for (const auto& c : cylinders) a += c.width * c.circumference;
  return a;
}

namespace {

struct Rect {
  double xl, xr, yb, yt;
  std::vector<int> left, right, top, bottom;  // side indices
};

struct Piece {
  int polygon;
  double y0, y1;
};

int find_root(std::vector<int>& parent, int i) {
  while (parent[static_cast<size_t>(i)] != i) {
    parent[static_cast<size_t>(i)] = parent[static_cast<size_t>(parent[static_cast<size_t>(i)])];
    i = parent[static_cast<size_t>(i)];
  }
  return i;
}

}  // namespace

CylinderDecomposition detect_cylinders(const HalfTranslationSurface& s0, double theta, int max_breakpoints) {
  const double c = std::cos(theta), sn = std::sin(theta);
  const HalfTranslationSurface s = theta == 0.0 ? s0 : transform(s0, c, sn, -sn, c);
  const int np = s.polygon_count();
  double diam = 0.0;
  std::vector<Rect> rects(static_cast<size_t>(np));
  for (int p = 0; p < np; ++p) {
    const auto& poly = s.polygons()[static_cast<size_t>(p)];
    Rect r{1e300, -1e300, 1e300, -1e300, {}, {}, {}, {}};
    for (const auto& v : poly.vertices) {
      r.xl = std::min(r.xl, v.x);
      r.xr = std::max(r.xr, v.x);
      r.yb = std::min(r.yb, v.y);
      r.yt = std::max(r.yt, v.y);
    }
    diam = std::max({diam, r.xr - r.xl, r.yt - r.yb});
    const double tol = 1e-9 * std::max(1.0, r.xr - r.xl + r.yt - r.yb);
    for (int e = 0; e < poly.size(); ++e) {
      const Vec2 a = poly.vertex(e), b = poly.vertex(e + 1);
      if (std::abs(a.x - b.x) <= tol && std::abs(a.x - r.xr) <= tol) r.right.push_back(e);
      else if (std::abs(a.x - b.x) <= tol && std::abs(a.x - r.xl) <= tol) r.left.push_back(e);
      else if (std::abs(a.y - b.y) <= tol && std::abs(a.y - r.yt) <= tol) r.top.push_back(e);
      else if (std::abs(a.y - b.y) <= tol && std::abs(a.y - r.yb) <= tol) r.bottom.push_back(e);
      else
        throw Error(ErrorCode::InvalidArgument,
                    "cylinder detection needs polygons that are rectangles aligned with the direction");
    }
    rects[static_cast<size_t>(p)] = std::move(r);
  }
  const double tol = 1e-9 * std::max(1.0, diam);

  // Leaf heights through corners, propagated across vertical sides.
  std::vector<std::vector<double>> heights(static_cast<size_t>(np));
  auto insert = [&](int p, double y) {
    auto& h = heights[static_cast<size_t>(p)];
    auto it = std::lower_bound(h.begin(), h.end(), y - tol);
    if (it != h.end() && std::abs(*it - y) <= tol) return false;
    h.insert(it, y);
    return true;
  };
  std::vector<std::pair<int, double>> todo;
  for (int p = 0; p < np; ++p)
    for (const auto& v : s.polygons()[static_cast<size_t>(p)].vertices)
      if (insert(p, v.y)) todo.push_back({p, v.y});
  long total = static_cast<long>(todo.size());
  while (!todo.empty()) {
    const auto [p, y] = todo.back();
    todo.pop_back();
    const Rect& r = rects[static_cast<size_t>(p)];
    for (const auto* sides : {&r.left, &r.right}) {
      for (int e : *sides) {
        const Vec2 a = s.vertex({p, e}), b = s.vertex({p, (e + 1) % s.edge_count(p)});
        if (y <= std::min(a.y, b.y) + tol || y >= std::max(a.y, b.y) - tol) continue;
        const double u = (y - a.y) / (b.y - a.y);
        const EdgeRef q = s.partner({p, e});
        const Vec2 at = s.vertex(q) + s.edge_vector(q) * (1.0 - u);
        if (insert(q.polygon, at.y)) {
          todo.push_back({q.polygon, at.y});
          if (++total > max_breakpoints)
            throw Error(ErrorCode::NotPeriodic, "leaf heights do not close up: direction is not completely periodic");
        }
      }
    }
  }

  // Strips between consecutive heights.
  std::vector<Piece> pieces;
  std::vector<int> first(static_cast<size_t>(np) + 1, 0);
  for (int p = 0; p < np; ++p) {
    first[static_cast<size_t>(p)] = static_cast<int>(pieces.size());
    const auto& h = heights[static_cast<size_t>(p)];
    for (size_t j = 0; j + 1 < h.size(); ++j) pieces.push_back({p, h[j], h[j + 1]});
  }
  first[static_cast<size_t>(np)] = static_cast<int>(pieces.size());
  auto piece_at = [&](int p, double y) {
    for (int i = first[static_cast<size_t>(p)]; i < first[static_cast<size_t>(p) + 1]; ++i)
      if (y > pieces[static_cast<size_t>(i)].y0 && y < pieces[static_cast<size_t>(i)].y1) return i;
    throw Error(ErrorCode::NotPeriodic, "leaf lands on a strip boundary");
  };

  // Bands: cycles of strips.
  struct Band {
    std::vector<int> pieces;
    std::vector<int> dirs;
    std::vector<EdgeRef> exits;
    double height = 0.0, length = 0.0;
  };
  std::vector<Band> bands;
  std::vector<int> band_of(pieces.size(), -1), dir_of(pieces.size(), 0);
  for (int start = 0; start < static_cast<int>(pieces.size()); ++start) {
    if (band_of[static_cast<size_t>(start)] >= 0) continue;
    Band b;
    b.height = pieces[static_cast<size_t>(start)].y1 - pieces[static_cast<size_t>(start)].y0;
    int cur = start, dir = 1;
    for (size_t guard = 0;; ++guard) {
      if (guard > 2 * pieces.size()) throw Error(ErrorCode::NotPeriodic, "strip cycle does not close");
      const Piece& pc = pieces[static_cast<size_t>(cur)];
      const Rect& r = rects[static_cast<size_t>(pc.polygon)];
      if (band_of[static_cast<size_t>(cur)] >= 0) {
        if (cur != start || dir != 1) throw Error(ErrorCode::NotPeriodic, "strips do not form closed bands");
        break;
      }
      if (std::abs(pc.y1 - pc.y0 - b.height) > 10 * tol) throw Error(ErrorCode::NotPeriodic, "strip heights differ along a band");
      band_of[static_cast<size_t>(cur)] = static_cast<int>(bands.size());
      dir_of[static_cast<size_t>(cur)] = dir;
      b.pieces.push_back(cur);
      b.dirs.push_back(dir);
      b.length += r.xr - r.xl;
      const double ym = 0.5 * (pc.y0 + pc.y1);
      int exit_side = -1;
      for (int e : dir > 0 ? r.right : r.left) {
        const Vec2 a = s.vertex({pc.polygon, e}), bb = s.vertex({pc.polygon, (e + 1) % s.edge_count(pc.polygon)});
        if (ym > std::min(a.y, bb.y) && ym < std::max(a.y, bb.y)) exit_side = e;
      }
      if (exit_side < 0) throw Error(ErrorCode::NotPeriodic, "strip has no exit side");
      const EdgeRef ex{pc.polygon, exit_side};
      b.exits.push_back(ex);
      const Vec2 a = s.vertex(ex);
      const double u = (ym - a.y) / s.edge_vector(ex).y;
      const EdgeRef q = s.partner(ex);
      const Vec2 at = s.vertex(q) + s.edge_vector(q) * (1.0 - u);
      dir *= s.sign(ex);
      cur = piece_at(q.polygon, at.y);
    }
    bands.push_back(std::move(b));
  }

  // Which band boundary leaves carry a singular point. Side 0 of a band is
  // the chart-bottom of its strips traversed rightwards.
  auto singular_on = [&](int p, double y, double x0, double x1) {
    const auto& poly = s.polygons()[static_cast<size_t>(p)];
    for (int v = 0; v < poly.size(); ++v) {
      const Vec2 q = poly.vertex(v);
      if (std::abs(q.y - y) <= tol && q.x >= x0 - tol && q.x <= x1 + tol &&
          s.cone_points()[static_cast<size_t>(s.vertex_class({p, v}))].singular())
        return true;
    }
    return false;
  };
  std::vector<std::array<bool, 2>> singular(bands.size(), {false, false});
  for (size_t bi = 0; bi < bands.size(); ++bi) {
    for (size_t k = 0; k < bands[bi].pieces.size(); ++k) {
      const Piece& pc = pieces[static_cast<size_t>(bands[bi].pieces[k])];
      const Rect& r = rects[static_cast<size_t>(pc.polygon)];
      const int d = bands[bi].dirs[k];
      if (singular_on(pc.polygon, pc.y0, r.xl, r.xr)) singular[bi][d > 0 ? 0 : 1] = true;
      if (singular_on(pc.polygon, pc.y1, r.xl, r.xr)) singular[bi][d > 0 ? 1 : 0] = true;
    }
  }

  std::vector<int> parent(bands.size());
  std::iota(parent.begin(), parent.end(), 0);
  auto unite = [&](int a, int b) { parent[static_cast<size_t>(find_root(parent, a))] = find_root(parent, b); };
  for (int i = 0; i < static_cast<int>(pieces.size()); ++i) {
    const Piece& pc = pieces[static_cast<size_t>(i)];
    const int bi = band_of[static_cast<size_t>(i)];
    const int top_side = dir_of[static_cast<size_t>(i)] > 0 ? 1 : 0;
    if (singular[static_cast<size_t>(bi)][static_cast<size_t>(top_side)]) continue;
    const Rect& r = rects[static_cast<size_t>(pc.polygon)];
    if (pc.y1 < r.yt - tol) {
      unite(bi, band_of[static_cast<size_t>(piece_at(pc.polygon, pc.y1 + tol * 2))]);
      continue;
    }
    for (int e : r.top) {
      const EdgeRef q = s.partner({pc.polygon, e});
      const Vec2 at = s.vertex(q) + s.edge_vector(q) * 0.5;
      const Rect& rq = rects[static_cast<size_t>(q.polygon)];
      const double y = std::abs(at.y - rq.yb) <= tol ? at.y + 2 * tol : at.y - 2 * tol;
      unite(bi, band_of[static_cast<size_t>(piece_at(q.polygon, y))]);
    }
  }

  CylinderDecomposition out;
  out.direction = theta;
  std::map<int, int> cyl_of_root;
  for (int bi = 0; bi < static_cast<int>(bands.size()); ++bi) {
    const int root = find_root(parent, bi);
    auto [it, fresh] = cyl_of_root.try_emplace(root, static_cast<int>(out.cylinders.size()));
    if (fresh) {
      Cylinder cyl;
      cyl.circumference = bands[static_cast<size_t>(bi)].length;
      cyl.core.exits = bands[static_cast<size_t>(bi)].exits;
      out.cylinders.push_back(std::move(cyl));
    }
    Cylinder& cyl = out.cylinders[static_cast<size_t>(it->second)];
    cyl.width += bands[static_cast<size_t>(bi)].height;
    cyl.bands.push_back(bi);
  }
  return out;
}

std::map<std::string, int> core_intersections(const HalfTranslationSurface& s, const Cylinder& c,
                                              const std::map<std::string, EdgeChain>& classes) {
  std::map<std::string, int> out;
  for (const auto& [name, chain] : classes) out[name] = intersection(s, c.core, chain);
  return out;
}

nlohmann::json cylinders_to_json(const HalfTranslationSurface& s, const CylinderDecomposition& d,
                                 const std::map<std::string, EdgeChain>& classes) {
  nlohmann::json list = nlohmann::json::array();
  for (const auto& c : d.cylinders) {
    nlohmann::json core = nlohmann::json::object();
    for (const auto& [name, v] : core_intersections(s, c, classes)) core[name] = v;
    nlohmann::json word = nlohmann::json::array();
    for (const auto& e : c.core.exits) word.push_back({e.polygon, e.edge});
    list.push_back({{"width", c.width}, {"circumference", c.circumference}, {"core_class", core}, {"core_word", word}});
  }
  return list;
}

}  // namespace wtl
