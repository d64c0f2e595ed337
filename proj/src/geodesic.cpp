#include "wtl/geodesic.hpp"

#include <algorithm>
#include <limits>
#include <string>

#include "wtl/error.hpp"

namespace wtl {

std::optional<Crossing> GeodesicFlow::next_crossing(const FlowState& st) const {
  const auto& poly = s_->polygons()[static_cast<size_t>(st.polygon)];
  const int n = poly.size();
  double best_t = std::numeric_limits<double>::infinity();
  Crossing best;
  bool found = false;
  for (int e = 0; e < n; ++e) {
    if (st.entered.polygon == st.polygon && st.entered.edge == e) continue;
    if (st.from_corner >= 0 && (e == st.from_corner || e == (st.from_corner + n - 1) % n)) continue;
    const Vec2 a = poly.vertex(e);
    const Vec2 ab = poly.edge(e);
    const double denom = wtl::cross(st.direction, ab);
    // Only sides crossed from inside to outside: the outward normal of a
    // counter-clockwise side is to its right.
    if (denom <= 0.0) continue;
    const Vec2 ap = a - st.position;
    const double t = wtl::cross(ap, ab) / denom;
    const double u = wtl::cross(ap, st.direction) / denom;
    const double len = ab.norm();
    const double slack = opt_.vertex_tol;
    if (u < -slack || u > 1.0 + slack) continue;
    if (t <= -1e-12 * len) continue;
    if (t < best_t) {
      best_t = t;
      best.exit = {st.polygon, e};
      best.time = t < 0.0 ? 0.0 : t;
      best.param = u;
      found = true;
    }
  }
  if (!found) return std::nullopt;
  if (best.param < opt_.vertex_tol || best.param > 1.0 - opt_.vertex_tol) {
    const CornerRef c{st.polygon, best.param < 0.5 ? best.exit.edge : (best.exit.edge + 1) % n};
    const int cls = s_->vertex_class(c);
    // Regular points (angle 2 pi) are harmless; clamp onto the side.
    if (!s_->cone_points()[static_cast<size_t>(cls)].singular()) {
      best.param = std::clamp(best.param, 0.0, 1.0);
      best.entry = s_->partner(best.exit);
      return best;
    }
    throw Error(ErrorCode::SingularityHit, "trajectory passes through a polygon corner (vertex class " +
                                               std::to_string(cls) + ")");
  }
  best.entry = s_->partner(best.exit);
  return best;
}

FlowState GeodesicFlow::cross(const FlowState& st, const Crossing& c) const {
  const EdgeRef to = c.entry;
  const auto& poly = s_->polygons()[static_cast<size_t>(to.polygon)];
  FlowState next;
  next.polygon = to.polygon;
  next.position = poly.vertex(to.edge) + poly.edge(to.edge) * (1.0 - c.param);
  next.direction = s_->sign(c.exit) == 1 ? st.direction : -st.direction;
  next.entered = to;
  return next;
}

FlowState GeodesicFlow::run(FlowState st, double duration, const std::function<void(const Crossing&)>& on_cross) const {
  double elapsed = 0.0;
  while (true) {
    auto c = next_crossing(st);
    if (!c) throw Error(ErrorCode::NoProgress, "flow found no exit side");
    if (elapsed + c->time >= duration) {
      st.position += st.direction * (duration - elapsed);
      return st;
    }
    elapsed += c->time;
    Crossing at = *c;
    at.time = elapsed;
    if (on_cross) on_cross(at);
    st = cross(st, at);
  }
}

FlowState leave_corner(const HalfTranslationSurface& s, CornerRef c, Vec2 dir) {
  FlowState st;
  st.polygon = c.polygon;
  st.position = s.vertex(c);
  st.direction = dir;
  st.from_corner = c.edge;
  return st;
}

std::optional<int> locate(const HalfTranslationSurface& s, Vec2 p) {
  for (int i = 0; i < s.polygon_count(); ++i) {
    if (s.polygons()[static_cast<size_t>(i)].contains(p)) return i;
  }
  return std::nullopt;
}

}  // namespace wtl
