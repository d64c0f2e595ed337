#pragma once

#include <array>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "wtl/billiard.hpp"
#include "wtl/geodesic.hpp"
#include "wtl/windtree.hpp"

namespace wtl {

struct CrossingCheckpoint {
  double t = 0.0;
  long pairing_x = 0;
  long pairing_y = 0;
};

struct CrossingSeries {
  std::vector<CrossingCheckpoint> checkpoints;
  long crossings = 0;
  std::optional<ErrorCode> aborted;
  std::string message;
};

struct CrossingOptions {
  double t0 = 16.0;
  FlowOptions flow;
};

/// Flows from `start` (chart position in polygon `polygon`) in chart
/// direction theta and accumulates f_x, f_y over the crossed sides. The
/// closing arc back to the start is bounded and left out.
CrossingSeries crossing_diffusion(const HalfTranslationSurface& s, const MarkedClasses& m, double theta, int polygon,
                                  Vec2 start, double T, const CrossingOptions& opts = {});

/// Same flow started at table point `p` of copy 1 of an unfolded table, so
/// that it shadows the billiard trajectory from p in direction theta.
CrossingSeries crossing_diffusion(const UnfoldedTable& u, double theta, Vec2 p, double T,
                                  const CrossingOptions& opts = {});

/// Norm of the pairing vector as a displacement series, for diffusion_rate().
DiffusionSeries as_displacement(const CrossingSeries& s);

void write_crossings_csv(std::ostream& out, const std::string& table_id, double theta, const CrossingSeries& s,
                         bool header = true);

struct Cylinder {
  double width = 0.0;          ///< height transverse to the direction
  double circumference = 0.0;
  DualCycle core;              ///< sides exited by a core curve, in order
  std::vector<int> bands;      ///< indices of the strips making up the cylinder
};

struct CylinderDecomposition {
  double direction = 0.0;  ///< angle
  std::vector<Cylinder> cylinders;
  double total_area() const;
};

/// Cylinders in direction theta. Supported when, after rotating theta to
/// the horizontal, every polygon is a rectangle with horizontal and vertical
/// sides (possibly subdivided); the leaf heights of all corners are
/// propagated around the surface until they close up.
CylinderDecomposition detect_cylinders(const HalfTranslationSurface& s, double theta = 0.0, int max_breakpoints = 200000);

/// Intersection numbers of a cylinder core with named side chains.
std::map<std::string, int> core_intersections(const HalfTranslationSurface& s, const Cylinder& c,
                                              const std::map<std::string, EdgeChain>& classes);

nlohmann::json cylinders_to_json(const HalfTranslationSurface& s, const CylinderDecomposition& d,
                                 const std::map<std::string, EdgeChain>& classes);

}  // namespace wtl
