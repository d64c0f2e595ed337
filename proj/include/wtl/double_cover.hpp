#pragma once

#include <string>
#include <vector>

#include "wtl/surface.hpp"

namespace wtl {

/// Orientation double cover of a half-translation surface. Cover polygon
/// p + sheet * F lies over base polygon p; sheet-1 polygons are the base
/// polygons rotated by pi.
struct DoubleCover {
  HalfTranslationSurface surface;
  /// False when the holonomy is trivial; `surface` is then one of the two
  /// isomorphic components and `deck` maps out of it (-1).
  bool connected = true;
  std::vector<int> deck;        ///< cover polygon -> deck image polygon
  std::vector<int> projection;  ///< cover polygon -> base polygon
  std::vector<int> sheet;       ///< cover polygon -> 0 or 1
  int base_polygons = 0;
  std::vector<int> vertex_projection;  ///< cover vertex class -> base vertex class
};

DoubleCover double_cover(const HalfTranslationSurface& s);

struct HatClass {
  std::string name;
  std::vector<int> coefficients;  ///< over cover surface edges
};

struct HatBasis {
  std::vector<HatClass> classes;
  int rank = 0;                ///< rank in H_1(cover, preimage of singularities)
  int expected_dimension = 0;  ///< 2g + #singularities - 2 of the base
  bool is_basis() const {
    return rank == static_cast<int>(classes.size()) && rank == expected_dimension;
  }
};

/// Lifts every class gamma of `basis` to gamma' - gamma''. Absolute classes
/// must have trivial linear holonomy.
HatBasis hat_basis(const HalfTranslationSurface& base, const DoubleCover& cover, const HomologyBasis& basis);

/// Indices of a maximal linearly independent subset, chosen greedily in order.
std::vector<int> independent_subset(const HalfTranslationSurface& cover_surface, const std::vector<HatClass>& classes);

}  // namespace wtl
