#pragma once

#include <cstdint>
#include <vector>

#include <json.hpp>

#include "wtl/linear_involution.hpp"

namespace wtl {

/// Induction state carrying two cocycles on the letter space: the "minus"
/// one acts like the lengths (period coordinates), the "plus" one acts on
/// the 1-cells of the base surface, whose orientation relative to each
/// occurrence is tracked in top_orient / bottom_orient.
struct ZorichState {
  LinearInvolution gp;
  std::vector<int> top_orient, bottom_orient;  ///< +1/-1 per occurrence
  double log_scale = 0.0;                      ///< accumulated -log of length renormalizations
  std::vector<std::vector<double>> frame_plus, frame_minus;
  /// Accumulated log stretching per frame vector (Gram-Schmidt order).
  std::vector<double> log_norms_plus, log_norms_minus;
  long step_count = 0;         ///< single Rauzy-Veech steps (bulk steps counted individually)
  long accelerated_count = 0;  ///< changes of step type
  int last_type = 0;           ///< +1 top won, -1 bottom won

  /// Renormalization clock: log_scale plus the current length deficit.
  double clock() const;
};

/// Fresh state with the given lengths and seeded random frames of `frame_size` vectors.
ZorichState make_state(const LinearInvolution& li, std::uint64_t seed, int frame_size = 2);

/// Records the integer matrix of the last step on lengths (new = M old).
struct StepRecord {
  int winner = -1, loser = -1;
  bool top_won = true;
};

/// One Rauzy-Veech step. Throws LengthTie or Reducible.
StepRecord rauzy_step(ZorichState& st);

/// Elementary length matrix of a step (d x d, row-major): identity with -1
/// at (winner, loser).
std::vector<std::vector<long>> step_matrix(int d, const StepRecord& r);
long determinant(std::vector<std::vector<long>> m);

/// Runs until `n` accelerated steps are completed, re-orthonormalizing every
/// 32 of them (or sooner once an entry exceeds 1e8) and bulk-processing rotation cycles.
void run_accelerated(ZorichState& st, long n);

/// Gram-Schmidt on a frame; returns the log norms of the vectors before normalization.
std::vector<double> orthonormalize(std::vector<std::vector<double>>& frame);

struct ExponentReport {
  double lambda_plus_top = 0.0;
  double lambda_minus_top = 0.0;
  double stderr_ = 0.0;         ///< of lambda_plus_top, from batch means
  double stderr_minus = 0.0;
  long iterations = 0;          ///< accelerated steps per chain
  int chains = 0;
  std::vector<double> chain_means;
};

struct ExponentOptions {
  long iterations = 1000000;  ///< accelerated steps per chain
  int chains = 8;
  int batches = 20;
  int threads = 1;
  long burn_in = 0;  ///< 0: 1% of the iterations (at least 1000)
};

/// Top exponents of the plus and minus cocycles, normalized by the length decay.
ExponentReport estimate_top_exponent(const LinearInvolution& li, std::uint64_t seed, const ExponentOptions& opts = {});

nlohmann::json report_to_json(const std::string& stratum, const ExponentReport& r);

}  // namespace wtl
