#pragma once

#include <complex>
#include <string>
#include <vector>

#include "wtl/geometry.hpp"

namespace wtl {

/// Relative tolerance on gluing-vector equality.
inline constexpr double kGeomTol = 1e-9;

/// A directed polygon side: edge `edge` of polygon `polygon`, oriented
/// counter-clockwise with respect to that polygon.
struct EdgeRef {
  int polygon = -1;
  int edge = -1;
  auto operator<=>(const EdgeRef&) const = default;
};

/// A polygon corner, addressed by (polygon, vertex index).
using CornerRef = EdgeRef;

/// One side pairing. sign = +1 glues by a translation, sign = -1 by a
/// translation composed with -Id. In terms of the counter-clockwise side
/// vectors, a translation pairs opposite vectors and a half-translation
/// pairs equal vectors.
struct SidePair {
  EdgeRef a;
  EdgeRef b;
  int sign = +1;
};

struct EdgeGluing {
  std::vector<SidePair> pairs;
};

struct ConePoint {
  std::vector<CornerRef> corners;  ///< in counter-clockwise order around the point
  int angle_multiple = 0;          ///< total angle / pi
  bool singular() const { return angle_multiple != 2; }
};

enum class StratumKind { Abelian, Quadratic };

/// Multiplicities of the singularities of a flat surface, sorted
/// non-increasingly. Regular points (angle 2*pi) are not listed.
struct StratumSignature {
  StratumKind kind = StratumKind::Quadratic;
  std::vector<int> multiplicities;

  bool operator==(const StratumSignature&) const = default;
  int genus() const;
  /// Complex dimension of the stratum: 2g-2+#sing (quadratic), 2g-1+#sing (abelian).
  int complex_dimension() const;
  /// Parses "1^8,-1^2" style strings; "H:2,2" or "H(2,2)" selects the abelian kind.
  static StratumSignature parse(const std::string& text);
  std::string to_string() const;
};

struct StratumInfo {
  StratumSignature signature;
  int genus = 0;
  int complex_dimension = 0;
  int marked_points = 0;  ///< vertex classes of angle 2*pi
};

/// Formal signed sum of directed polygon sides. When used as a path the
/// terms are read in order: a term with coeff +1 runs from vertex e to
/// vertex e+1 of its polygon, coeff -1 runs backwards.
struct EdgeChain {
  struct Term {
    EdgeRef edge;
    int coeff = 1;
  };
  std::vector<Term> terms;

  EdgeChain& add(EdgeRef e, int coeff = 1) {
    terms.push_back({e, coeff});
    return *this;
  }
  EdgeChain& append(const EdgeChain& other, int coeff = 1);
};

struct NamedChain {
  std::string name;
  EdgeChain chain;
};

struct HomologyBasis {
  std::vector<NamedChain> absolute;
  std::vector<NamedChain> relative;
};

struct PeriodVector {
  std::vector<std::string> labels;
  std::vector<std::complex<double>> values;

  int size() const { return static_cast<int>(values.size()); }
  int index_of(const std::string& label) const;
  std::complex<double> at(const std::string& label) const;
};

/// A compact (half-)translation surface given by polygons with glued sides.
/// Immutable after construction.
class HalfTranslationSurface {
 public:
  HalfTranslationSurface() = default;

  const std::vector<PlanarPolygon>& polygons() const { return polygons_; }
  const EdgeGluing& gluing() const { return gluing_; }
  const std::vector<ConePoint>& cone_points() const { return cone_points_; }

  int polygon_count() const { return static_cast<int>(polygons_.size()); }
  int edge_count(int polygon) const { return polygons_[static_cast<size_t>(polygon)].size(); }
  Vec2 edge_vector(EdgeRef e) const;
  Vec2 vertex(CornerRef c) const;

  /// Side glued to `e`, with the sign of that pairing.
  EdgeRef partner(EdgeRef e) const;
  int sign(EdgeRef e) const;
  /// Index of the vertex class (into cone_points()) of a corner.
  int vertex_class(CornerRef c) const;

  bool is_translation() const;
  double area() const;

  /// Undirected surface-edge id of a side, and the orientation (+1/-1) of
  /// the side relative to that id.
  int surface_edge(EdgeRef e) const;
  int surface_edge_orientation(EdgeRef e) const;
  int surface_edge_count() const { return static_cast<int>(gluing_.pairs.size()); }

  void check_edge(EdgeRef e) const;

 private:
  friend HalfTranslationSurface build_surface(std::vector<PlanarPolygon>, EdgeGluing);

  std::vector<PlanarPolygon> polygons_;
  EdgeGluing gluing_;
  std::vector<size_t> offsets_;        // first flat side index per polygon
  std::vector<EdgeRef> partner_;       // per flat side
  std::vector<int> sign_;              // per flat side
  std::vector<int> pair_id_;           // per flat side
  std::vector<int> pair_orientation_;  // per flat side
  std::vector<int> corner_class_;      // per flat corner
  std::vector<ConePoint> cone_points_;

  size_t flat(EdgeRef e) const { return offsets_[static_cast<size_t>(e.polygon)] + static_cast<size_t>(e.edge); }
};

/// Validates polygons and gluing, traces vertex classes, checks connectivity.
HalfTranslationSurface build_surface(std::vector<PlanarPolygon> polygons, EdgeGluing gluing);

StratumInfo stratum_of(const HalfTranslationSurface& s);

/// Period of a chain: sum of its side vectors in the charts of their polygons.
std::complex<double> period(const HalfTranslationSurface& s, const EdgeChain& chain);
PeriodVector periods(const HalfTranslationSurface& s, const HomologyBasis& basis);

/// Applies a real linear map to every polygon (the GL(2,R) action). The map
/// must have positive determinant.
HalfTranslationSurface transform(const HalfTranslationSurface& s, double a, double b, double c, double d);

/// Chain as a coefficient vector over surface edges.
std::vector<int> chain_vector(const HalfTranslationSurface& s, const EdgeChain& chain);

/// Rank of chain vectors modulo polygon boundaries, i.e. in relative
/// homology when the chains are relative cycles.
int relative_homology_rank(const HalfTranslationSurface& s, const std::vector<std::vector<int>>& chains);

}  // namespace wtl
