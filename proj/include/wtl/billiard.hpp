#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "wtl/error.hpp"
#include "wtl/geometry.hpp"
#include "wtl/windtree.hpp"

namespace wtl {

/// Billiard state: position in the fundamental domain [0,1)^2 plus the
/// integer lattice cell, unit direction.
struct Ray {
  Vec2 position;
  std::array<std::int64_t, 2> cell{0, 0};
  Vec2 direction{1.0, 0.0};
};

struct HitEvent {
  bool hit = false;
  double time = 0.0;  ///< flow time to the hit (or to the end of the step)
  int obstacle = -1;
  int side = -1;      ///< index into the obstacle's boundary (ccw side)
  double param = 0.0; ///< position along the side, in [0,1]
};

struct TraceOptions {
  double corner_eps = 1e-12;  ///< relative to the length of the current step
  double step_eps = 1e-14;
  /// Upper bound on the flow time of one trace() call (the table may be empty).
  double max_time = 1e300;
};

struct TraceResult {
  Ray ray;
  HitEvent event;
};

/// Geometry of a table prepared for repeated tracing.
class BilliardTable {
 public:
  explicit BilliardTable(const WindtreeTable& t);

  struct Segment {
    Vec2 a, b;
    bool vertical;
    Vec2 normal;  ///< outward normal of the obstacle
    int obstacle;
    int side;
  };

  const std::vector<Segment>& segments() const { return segments_; }
  const std::vector<Vec2>& corners() const { return corners_; }
  bool empty() const { return segments_.empty(); }
  double scale() const { return scale_; }
  /// True if the point lies in the closed complement of the obstacles.
  bool is_free(Vec2 p) const;
  const WindtreeTable& table() const { return table_; }

 private:
  WindtreeTable table_;
  double scale_ = 1.0;
  // Sides and corners of all obstacle translates meeting the closed unit square.
  std::vector<Segment> segments_;
  std::vector<Vec2> corners_;
  std::vector<PlanarPolygon> translates_;
};

/// Advances to the next obstacle hit (or by opts.max_time when nothing is
/// hit), reflecting the direction. `last_hit` (segment index, may be -1)
/// is skipped.
TraceResult trace(const BilliardTable& t, const Ray& r, const TraceOptions& opts = {}, int* last_hit = nullptr);

/// Same flow in 128-bit floating point, for validating the double tracer.
/// Returns the final lattice cell after `bounces` hits.
std::array<std::int64_t, 2> shadow_cell_after(const BilliardTable& t, Vec2 start, double theta, long bounces);
std::array<std::int64_t, 2> cell_after(const BilliardTable& t, Vec2 start, double theta, long bounces);

struct Checkpoint {
  double t = 0.0;
  double displacement = 0.0;
  std::array<std::int64_t, 2> cell{0, 0};
};

struct DiffusionSeries {
  std::vector<Checkpoint> checkpoints;
  long bounces = 0;
  /// Set when the trajectory was aborted; checkpoints hold the partial series.
  std::optional<ErrorCode> aborted;
  std::string message;
};

struct DiffuseOptions {
  double t0 = 16.0;
  TraceOptions trace;
};

/// Checkpoints at t_k = t0 * 2^k up to T.
DiffusionSeries diffuse(const BilliardTable& t, double theta, Vec2 start, double T, const DiffuseOptions& opts = {});

enum class RateStatus { Converged, LowConfidence };
enum class RateMode { Plain, Envelope };

struct RateEstimate {
  double slope = 0.0;
  double stderr_ = 0.0;
  int window_begin = 0;  ///< checkpoint index range [begin, end)
  int window_end = 0;
  RateStatus status = RateStatus::Converged;
};

/// Least-squares slope of log d against log t over the top ceil(m/2)
/// checkpoints; needs at least `min_checkpoints`.
RateEstimate diffusion_rate(const DiffusionSeries& s, RateMode mode = RateMode::Plain, int min_checkpoints = 8);

/// Generic-direction check: true if theta is within `eps` of an axis.
bool near_axis(double theta, double eps = 1e-6);

struct DirectionRun {
  double theta = 0.0;
  Vec2 start;
  RateEstimate rate;
  bool excluded = false;
  std::string reason;
  DiffusionSeries series;
};

struct DirectionAverage {
  double mean = 0.0;
  double stderr_ = 0.0;
  int used = 0;
  int excluded = 0;
  std::vector<DirectionRun> runs;
};

struct AverageOptions {
  DiffuseOptions diffuse;
  RateMode mode = RateMode::Plain;
  int threads = 1;
  double max_excluded_fraction = 0.2;
  bool keep_series = false;
};

/// Uniform random start point in the free part of the fundamental domain.
Vec2 random_free_point(const BilliardTable& t, std::uint64_t seed);
/// Uniform direction avoiding 1e-6 neighbourhoods of the axes.
double random_direction(std::uint64_t seed);

/// One direction: diffuse from a random start, rate, exclusion decision.
/// Corner grazes restart from a fresh start point up to three times.
DirectionRun run_direction(const BilliardTable& t, double theta, std::uint64_t seed, double T, const AverageOptions& opts);

DirectionAverage direction_averaged_rate(const BilliardTable& t, int N, double T, std::uint64_t seed,
                                         const AverageOptions& opts = {});

/// Per-job seeds derived from a master seed.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

void write_series_csv(std::ostream& out, const std::string& table_id, const std::vector<DirectionRun>& runs,
                      bool header = true);

}  // namespace wtl
