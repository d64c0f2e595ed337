#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "wtl/linear_involution.hpp"
#include "wtl/rauzy.hpp"

namespace wtl {

/// Stratum of a suspension read off the combinatorics alone: with heights
/// shrunk to zero every interior row vertex carries angle pi and the two
/// row ends carry none.
StratumInfo combinatorial_stratum(const LinearInvolution& li);

struct CatalogEntry {
  std::string stratum;      ///< "1^8,-1^2" form
  std::string permutation;  ///< "A B ... / ..." form
};

/// Representatives: the pillowcase, one-cylinder block permutations for
/// Q(1^{4n}) (n <= 5), and the n = 2 (resp. n = 1..3) ones with 1..6
/// (resp. 10) poles opened along a cut letter.
const std::vector<CatalogEntry>& catalog_entries();
inline constexpr int kCatalogVersion = 1;

bool in_catalog(const StratumSignature& sig);

/// Catalog representative; its suspension is rebuilt and checked against
/// `sig` on first use. Throws NotInCatalog.
LinearInvolution stratum_representative(const StratumSignature& sig);

/// Suspension check output for a catalog entry.
struct Certificate {
  std::string stratum;
  std::string permutation;
  int genus = 0;
  int complex_dimension = 0;
  int marked_points = 0;
  bool verified = false;
};
Certificate certify(const StratumSignature& sig);

/// Top exponent of a catalog stratum.
ExponentReport estimate_top_exponent(const StratumSignature& sig, std::uint64_t seed, const ExponentOptions& opts = {});

}  // namespace wtl
