#pragma once

#include <optional>
#include <string>
#include <vector>

#include "wtl/surface.hpp"

namespace wtl {

/// Generalized permutation with interval lengths. Letters are 0..d-1; each
/// appears exactly twice across the two rows, both read left to right.
struct LinearInvolution {
  std::vector<int> top;
  std::vector<int> bottom;
  std::vector<double> lengths;  ///< per letter; may be empty for combinatorics only

  int letters() const { return static_cast<int>((top.size() + bottom.size()) / 2); }
  /// -1 if both occurrences of the letter lie in the same row, +1 otherwise.
  int pairing_type(int letter) const;
  bool is_abelian() const;  ///< every letter appears once in each row

  /// "A A B / B C C" style; letters are whitespace-separated tokens.
  static LinearInvolution parse(const std::string& text);
  std::string to_string() const;

  /// Row sums of the lengths agree (relative tolerance).
  bool balanced(double tol = 1e-9) const;
};

/// Throws InvalidArgument unless each letter occurs exactly twice and both
/// rows are non-empty.
void check_combinatorics(const LinearInvolution& li);

/// No pair of proper non-empty prefixes (top i < l, bottom j < m) whose
/// letters are closed under the pairing.
bool is_irreducible(const LinearInvolution& li);

/// Heights tau with positive top partial sums and negative bottom partial
/// sums (both rows closing at height 0 when possible); nullopt if none found.
std::optional<std::vector<double>> suspension_heights(const LinearInvolution& li);

/// Polygon of the suspension: bottom broken line, then the top one back.
/// Requires balanced lengths.
HalfTranslationSurface suspension_surface(const LinearInvolution& li, const std::vector<double>& heights);

/// Stratum of a suspension with lengths from `li` (or generic ones if absent).
StratumInfo suspension_stratum(const LinearInvolution& li);

/// Uniform (0,1] lengths, then the same-row letters of one row scaled so
/// that both rows have the same total.
std::vector<double> balanced_random_lengths(const LinearInvolution& li, std::uint64_t seed);

}  // namespace wtl
