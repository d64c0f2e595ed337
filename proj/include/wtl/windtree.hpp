#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "wtl/error.hpp"
#include "wtl/surface.hpp"

namespace wtl {

/// Minimum separation between distinct obstacle coordinates and between obstacles.
inline constexpr double kMinFeature = 1e-3;

/// Axis-parallel simple polygon, counter-clockwise, in torus units.
struct Obstacle {
  std::vector<Vec2> boundary;

  int concave_count() const;
  /// Index (into boundary) of the left end of the lowest horizontal side;
  /// the side walk starts there and runs clockwise.
  int start_vertex() const;
  /// Sides in clockwise order from start_vertex(): even positions are the
  /// vertical sides alpha^1, alpha^2, ..., odd ones the horizontal beta^j.
  std::vector<std::array<Vec2, 2>> clockwise_sides() const;
  Obstacle translated(Vec2 by) const;
  std::array<double, 4> bounds() const;  ///< xmin, xmax, ymin, ymax
};

/// Rectangle [x0,x1]x[y0,y1] with `steps` concave corners cut as a staircase
/// at its upper-right corner. `xs` and `ys` give the step positions
/// (x increasing, y decreasing).
Obstacle staircase_obstacle(double x0, double x1, double y0, double y1, const std::vector<double>& xs,
                            const std::vector<double>& ys);
Obstacle rectangle_obstacle(double x0, double x1, double y0, double y1);

struct FamilySpec {
  int n = 1;
  std::vector<int> k;  ///< concave corners per obstacle (size n)

  int p() const;
  /// Accepts "n=2,k=1,2", "n=2" (rectangles) or "n=0" (empty table).
  static FamilySpec parse(const std::string& text);
  std::string to_string() const;
};

struct WindtreeTable {
  std::vector<Obstacle> obstacles;
  double scale = 1.0;  ///< torus side, kept as a separate global parameter
  std::optional<std::uint64_t> seed;

  FamilySpec family() const;
};

nlohmann::json table_to_json(const WindtreeTable& t);
WindtreeTable table_from_json(const nlohmann::json& j);

struct ValidationReport {
  bool ok = true;
  std::optional<ErrorCode> code;
  std::string message;
  int first = -1;   ///< offending obstacle indices for Overlap
  int second = -1;
};

/// Checks rectilinearity, pairwise disjointness of closures over the nine
/// neighbouring translates, and connectivity of the complement in the torus.
ValidationReport validate_table(const WindtreeTable& t);
void require_valid(const WindtreeTable& t);

/// Uniform bounding boxes by rejection, staircase notches for k_i > 0.
WindtreeTable sample_table(const FamilySpec& spec, std::uint64_t seed, int max_rounds = 10000);

/// Edge cochain: weight of crossing each polygon side outwards (the reverse
/// crossing counts with the opposite sign).
struct Cochain {
  std::map<EdgeRef, int> weights;
  int at_exit(EdgeRef e) const {
    const auto it = weights.find(e);
    return it == weights.end() ? 0 : it->second;
  }
};

/// Closed curve transverse to the sides, given by the sides it exits through.
struct DualCycle {
  std::vector<EdgeRef> exits;
};

int evaluate(const Cochain& f, const DualCycle& c);
/// Algebraic intersection of a transverse cycle with a side chain; a crossing
/// from the left of the chain to its right counts +1.
int intersection(const HalfTranslationSurface& s, const DualCycle& eta, const EdgeChain& chain);

/// Lifts of the torus loops and the cocycles counting lattice displacement.
/// h_c, v_c are the horizontal/vertical loops in copy c (table orientation);
/// f_x, f_y evaluate to the x/y lattice displacement of a curve.
struct MarkedClasses {
  DualCycle h1, h2, v1, v2;
  Cochain fx, fy;
};

/// Half-translation surface of a table: two copies of the torus minus the
/// obstacles, copy 2 drawn reflected across the horizontal axis, obstacle
/// sides glued copy to copy.
class UnfoldedTable {
 public:
  struct Cell {
    int copy = 0;
    double x0 = 0, x1 = 0, y0 = 0, y1 = 0;  ///< table coordinates
  };

  const HalfTranslationSurface& surface() const { return surface_; }
  const MarkedClasses& marked() const { return marked_; }
  const std::vector<Cell>& cells() const { return cells_; }
  int obstacle_count() const { return static_cast<int>(shapes_[0].size()); }
  const std::vector<Obstacle>& obstacles(int copy) const { return shapes_[static_cast<size_t>(copy)]; }

  /// Chart position of a table point in copy `copy`.
  static Vec2 to_chart(int copy, Vec2 p) { return copy == 0 ? p : Vec2{p.x, -p.y}; }
  /// Polygon containing a table point of copy `copy` (interior).
  int locate(int copy, Vec2 p) const;

  /// Named classes as side chains: a1 b1 a2 b2 (torus loops of each copy),
  /// alpha{i}.{j} / beta{i}.{j} (obstacle sides, copy-1 side of the seam),
  /// c{i} (obstacle boundary), gamma{i} (start of obstacle i to start of
  /// obstacle i+1 in copy 1) and d{i} (gamma{i} closed through copy 2).
  const std::map<std::string, EdgeChain>& classes() const { return classes_; }
  const EdgeChain& chain(const std::string& name) const;

  /// Path along grid lines of copy `copy` between two grid points (table
  /// coordinates), avoiding obstacle interiors, as a side chain.
  EdgeChain grid_path(int copy, Vec2 from, Vec2 to) const;
  EdgeChain straight_chain(int copy, Vec2 from, Vec2 to) const;

 private:
  friend UnfoldedTable unfold_pair(const WindtreeTable&, const WindtreeTable&);

  HalfTranslationSurface surface_;
  MarkedClasses marked_;
  std::vector<Cell> cells_;
  std::array<std::vector<Obstacle>, 2> shapes_;
  std::array<std::vector<double>, 2> xs_, ys_;
  std::array<std::vector<int>, 2> cell_index_;  // per copy: grid (i,j) -> polygon or -1
  // Per polygon side: endpoints in table coordinates, in counter-clockwise chart order.
  std::vector<std::vector<std::array<Vec2, 2>>> side_table_;
  std::map<std::string, EdgeChain> classes_;
};

UnfoldedTable unfold(const WindtreeTable& t);
/// Copies carrying differently placed (but congruent) obstacle sets; used
/// for surfaces in the orbit closure that are not billiards.
UnfoldedTable unfold_pair(const WindtreeTable& copy1, const WindtreeTable& copy2);

/// Intrinsic parameters: per obstacle the first 1+k_i signed vertical and
/// horizontal side lengths of the clockwise walk, then start-point offsets
/// of obstacles 2..n relative to obstacle 1, then the torus scale.
std::vector<double> family_coordinates(const WindtreeTable& t);
WindtreeTable reconstruct_table(const FamilySpec& spec, const std::vector<double>& coords, Vec2 anchor);

}  // namespace wtl
