#pragma once

#include <complex>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "wtl/surface_flow.hpp"
#include "wtl/windtree.hpp"

namespace wtl {

/// Labels of the period coordinates of a family, in the order used by the
/// equation rows: a1 b1 a2 b2, then the obstacle sides alpha{i}.{j} and
/// beta{i}.{j} (all of them for i < n, the last pair dropped for i = n),
/// then gamma{i} and d{i} for i < n.
struct PeriodLabelSet {
  std::vector<std::string> labels;
  int size() const { return static_cast<int>(labels.size()); }
};
PeriodLabelSet period_labels(const FamilySpec& spec);

/// Linear relation on periods z_k. A real row reads Re(sum c_k z_k) = 0, a
/// complex row reads sum c_k z_k + sum e_k conj(z_k) = 0.
struct EquationRow {
  std::string name;
  int group = 1;  ///< 1: shape of the pieces, 2: how the pieces are glued
  bool complex = false;
  std::map<std::string, std::complex<double>> coeff;
  std::map<std::string, std::complex<double>> conj_coeff;

  std::complex<double> evaluate(const PeriodVector& p) const;
};

struct FamilyEquationSystem {
  FamilySpec spec;
  PeriodLabelSet labels;
  std::vector<EquationRow> rows;

  int real_rows() const;
  int complex_rows() const;
  /// Rows written over (Re z_1, Im z_1, Re z_2, ...); complex rows give two.
  std::vector<std::vector<double>> real_matrix() const;
  int rank() const;
  /// Real dimension of the solution space: 2 * labels - rank.
  int solution_dimension() const;
};

FamilyEquationSystem build_equations(const FamilySpec& spec);

/// Periods of the labelled classes of an unfolded table.
PeriodVector family_periods(const UnfoldedTable& u, const PeriodLabelSet& labels);

struct MembershipReport {
  bool member = true;
  std::vector<double> residuals;  ///< per row, relative to the largest period
  std::vector<std::string> violated;
};

/// Throws LabelMismatch unless p carries exactly the system's labels.
MembershipReport check_membership(const PeriodVector& p, const FamilyEquationSystem& sys, double tol = 1e-12);

/// Intersection of the summed cores of the chosen cylinders with each label,
/// each crossing signed by the direction of the core in the chart of the
/// crossed side (so the result is the coefficient of delta in that label).
std::map<std::string, int> deformation_weights(const HalfTranslationSurface& s, const CylinderDecomposition& dec,
                                               const std::vector<int>& subset,
                                               const std::map<std::string, EdgeChain>& classes,
                                               const std::vector<std::string>& labels);

/// Periods after the cylinder move: each label gains <eta, label> * delta.
/// Throws DegeneratingCylinder if a chosen cylinder would lose its width and
/// NotPeriodic if the decomposition is empty.
PeriodVector cylinder_deform(const PeriodVector& p, const HalfTranslationSurface& s, const CylinderDecomposition& dec,
                             const std::vector<int>& subset, const std::map<std::string, EdgeChain>& classes,
                             std::complex<double> delta);

/// Two equal squares (n = 2) at the same height, so that a horizontal
/// cylinder runs around the torus through the gap between them.
WindtreeTable aligned_squares_table();
/// Index of the cylinder in `dec` whose core meets alpha1.1, or -1.
int designated_cylinder(const HalfTranslationSurface& s, const CylinderDecomposition& dec,
                        const std::map<std::string, EdgeChain>& classes);

nlohmann::json system_to_json(const FamilyEquationSystem& sys);
nlohmann::json membership_to_json(const FamilyEquationSystem& sys, const MembershipReport& r);

}  // namespace wtl
