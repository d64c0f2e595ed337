#pragma once

#include <functional>
#include <optional>

#include "wtl/surface.hpp"

namespace wtl {

/// Unit-speed straight-line flow on a glued-polygon surface. Positions and
/// directions are expressed in the chart of the current polygon.
struct FlowState {
  int polygon = 0;
  Vec2 position;
  Vec2 direction;
  EdgeRef entered{};  ///< side through which the polygon was entered (polygon -1: none)
  int from_corner = -1;  ///< start corner of a separatrix: both adjacent sides are ignored
};

/// State leaving corner `c` of `s` in chart direction `dir`.
FlowState leave_corner(const HalfTranslationSurface& s, CornerRef c, Vec2 dir);

struct Crossing {
  EdgeRef exit;
  EdgeRef entry;
  double time = 0.0;  ///< flow time at which the side is crossed
  double param = 0.0; ///< position along the exit side, in [0,1]
};

/// Thrown (as Error SingularityHit) when the flow passes within `vertex_tol`
/// (relative to the side length) of a polygon corner.
struct FlowOptions {
  double vertex_tol = 1e-10;
};

class GeodesicFlow {
 public:
  explicit GeodesicFlow(const HalfTranslationSurface& s, FlowOptions opt = {}) : s_(&s), opt_(opt) {}

  /// First side hit from `st`; the side through which st entered is ignored.
  /// Returns nullopt only if no side is hit (which indicates a bug).
  std::optional<Crossing> next_crossing(const FlowState& st) const;

  /// Moves across side `c.exit` into the glued polygon.
  FlowState cross(const FlowState& st, const Crossing& c) const;

  /// Flows for `duration`, calling `on_cross` at each side crossing.
  FlowState run(FlowState st, double duration, const std::function<void(const Crossing&)>& on_cross = {}) const;

  const HalfTranslationSurface& surface() const { return *s_; }

 private:
  const HalfTranslationSurface* s_;
  FlowOptions opt_;
};

/// Polygon containing `p` in its chart, searching all polygons (interior test).
std::optional<int> locate(const HalfTranslationSurface& s, Vec2 p);

}  // namespace wtl
