#include "wtl/billiard.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <random>
#include <thread>

#include <quadmath.h>

namespace wtl {

// --- table preparation ------------------------------------------------------

BilliardTable::BilliardTable(const WindtreeTable& t) : table_(t), scale_(t.scale) {
  require_valid(t);
  for (int o = 0; o < static_cast<int>(t.obstacles.size()); ++o) {
    const auto& ob = t.obstacles[static_cast<size_t>(o)];
    const auto bb = ob.bounds();
    for (int dx = -static_cast<int>(std::ceil(bb[1])); dx <= 1 - static_cast<int>(std::floor(bb[0])); ++dx) {
      for (int dy = -static_cast<int>(std::ceil(bb[3])); dy <= 1 - static_cast<int>(std::floor(bb[2])); ++dy) {
        if (bb[1] + dx < 0.0 || bb[0] + dx > 1.0 || bb[3] + dy < 0.0 || bb[2] + dy > 1.0) continue;
        const Obstacle moved = ob.translated({double(dx), double(dy)});
        translates_.push_back(PlanarPolygon{moved.boundary});
        const int m = static_cast<int>(moved.boundary.size());
        for (int i = 0; i < m; ++i) {
          const Vec2 a = moved.boundary[static_cast<size_t>(i)], b = moved.boundary[static_cast<size_t>((i + 1) % m)];
          const Vec2 e = b - a;
          const Vec2 normal = Vec2{e.y, -e.x} * (1.0 / e.norm());  // outward for ccw polygons
          segments_.push_back({a, b, a.x == b.x, normal, o, i});
          corners_.push_back(a);
        }
      }
    }
  }
}

bool BilliardTable::is_free(Vec2 p) const {
  const Vec2 q{p.x - std::floor(p.x), p.y - std::floor(p.y)};
  return std::none_of(translates_.begin(), translates_.end(), [&](const PlanarPolygon& poly) { return poly.contains(q); });
}

// --- tracer -----------------------------------------------------------------

namespace {

template <class R>
struct Tracer {
  struct Seg {
    R x0, y0, x1, y1;  // x0==x1 for vertical
    bool vertical;
    R nx, ny;
  };
  struct Corner {
    R x, y;
  };

  std::vector<Seg> segs;
  std::vector<Corner> corners;
  R px, py, dx, dy;
  std::int64_t cx = 0, cy = 0;
  int last = -1;
  TraceOptions opts;

  Tracer(const BilliardTable& t, const TraceOptions& o) : opts(o) {
    for (const auto& s : t.segments()) {
      segs.push_back({R(std::min(s.a.x, s.b.x)), R(std::min(s.a.y, s.b.y)), R(std::max(s.a.x, s.b.x)),
                      R(std::max(s.a.y, s.b.y)), s.vertical, R(s.normal.x), R(s.normal.y)});
    }
    for (const auto& c : t.corners()) corners.push_back({R(c.x), R(c.y)});
  }

  static R abs(R v) { return v < 0 ? -v : v; }

  // Advances until an obstacle hit or until `budget` time elapsed. Returns
  // the elapsed time; `hit` receives the segment index or -1.
  R advance(R budget, int& hit, R& param) {
    const R inf = R(std::numeric_limits<double>::infinity());
    R elapsed = 0;
    hit = -1;
    for (;;) {
      const R tx = dx > 0 ? (1 - px) / dx : (dx < 0 ? -px / dx : inf);
      const R ty = dy > 0 ? (1 - py) / dy : (dy < 0 ? -py / dy : inf);
      R best = tx < ty ? tx : ty;
      int best_seg = -1;
      R best_param = 0;
      for (int k = 0; k < static_cast<int>(segs.size()); ++k) {
        if (k == last) continue;
        const Seg& s = segs[static_cast<size_t>(k)];
        if (dx * s.nx + dy * s.ny >= 0) continue;
        R t, along, lo, hi;
        if (s.vertical) {
          t = (s.x0 - px) / dx;
          along = py + t * dy;
          lo = s.y0;
          hi = s.y1;
        } else {
          t = (s.y0 - py) / dy;
          along = px + t * dx;
          lo = s.x0;
          hi = s.x1;
        }
        if (!(t > 0) || t >= best) continue;
        if (along < lo || along > hi) continue;
        best = t;
        best_seg = k;
        best_param = (along - lo) / (hi - lo);
      }
      const bool stop_at_budget = elapsed + best > budget;
      const R step = stop_at_budget ? budget - elapsed : best;
      // Grazing: any corner passed closer than eps along this step.
      const R eps = R(opts.corner_eps) * (step > 1 ? step : R(1));
      for (const auto& c : corners) {
        const R rx = c.x - px, ry = c.y - py;
        const R s = rx * dx + ry * dy;
        if (s < -eps || s > step + eps) continue;
        if (abs(dx * ry - dy * rx) < eps)
          throw Error(ErrorCode::CornerGraze, "trajectory passes within " + std::to_string(opts.corner_eps) +
                                                  " of an obstacle corner");
      }
      if (stop_at_budget) {
        px += step * dx;
        py += step * dy;
        return budget;
      }
      elapsed += best;
      if (best_seg >= 0) {
        if (best < R(opts.step_eps) && last >= 0)
          throw Error(ErrorCode::NoProgress, "billiard step below the progress threshold");
        const Seg& s = segs[static_cast<size_t>(best_seg)];
        if (s.vertical) {
          px = s.x0;
          py += best * dy;
          dx = -dx;
        } else {
          py = s.y0;
          px += best * dx;
          dy = -dy;
        }
        last = best_seg;
        hit = best_seg;
        param = best_param;
        return elapsed;
      }
      // Cell crossing.
      const bool cross_x = tx <= ty, cross_y = ty <= tx;
      px += best * dx;
      py += best * dy;
      if (cross_x) {
        if (dx > 0) {
          px = 0;
          ++cx;
        } else {
          px = 1;
          --cx;
        }
      }
      if (cross_y) {
        if (dy > 0) {
          py = 0;
          ++cy;
        } else {
          py = 1;
          --cy;
        }
      }
      last = -1;
      if (segs.empty() && budget - elapsed > R(1e6)) {
        // Straight flow in an empty table: jump whole cells.
        const R rest = budget - elapsed;
        const R fx = px + rest * dx, fy = py + rest * dy;
        const R flx = fx >= 0 ? R(static_cast<std::int64_t>(fx)) : R(static_cast<std::int64_t>(fx) - 1);
        const R fly = fy >= 0 ? R(static_cast<std::int64_t>(fy)) : R(static_cast<std::int64_t>(fy) - 1);
        cx += static_cast<std::int64_t>(flx);
        cy += static_cast<std::int64_t>(fly);
        px = fx - flx;
        py = fy - fly;
        return budget;
      }
    }
  }
};

}  // namespace

TraceResult trace(const BilliardTable& t, const Ray& r, const TraceOptions& opts, int* last_hit) {
  Tracer<double> tr(t, opts);
  tr.px = r.position.x;
  tr.py = r.position.y;
  tr.dx = r.direction.x;
  tr.dy = r.direction.y;
  tr.cx = r.cell[0];
  tr.cy = r.cell[1];
  tr.last = last_hit ? *last_hit : -1;
  int hit = -1;
  double param = 0.0;
  const double elapsed = tr.advance(opts.max_time, hit, param);
  TraceResult out;
  out.ray.position = {tr.px, tr.py};
  out.ray.direction = {tr.dx, tr.dy};
  out.ray.cell = {tr.cx, tr.cy};
  out.event.time = elapsed;
  if (hit >= 0) {
    out.event.hit = true;
    out.event.obstacle = t.segments()[static_cast<size_t>(hit)].obstacle;
    out.event.side = t.segments()[static_cast<size_t>(hit)].side;
    out.event.param = param;
  }
  if (last_hit) *last_hit = hit;
  return out;
}

namespace {

template <class R>
std::array<std::int64_t, 2> run_bounces(Tracer<R>& tr, long bounces) {
  int hit = -1;
  R param = 0;
  for (long b = 0; b < bounces;) {
    tr.advance(R(1e300), hit, param);
    if (hit >= 0) ++b;
    if (tr.segs.empty()) break;
  }
  return {tr.cx, tr.cy};
}

}  // namespace

std::array<std::int64_t, 2> shadow_cell_after(const BilliardTable& t, Vec2 start, double theta, long bounces) {
  Tracer<__float128> tr(t, {});
  tr.px = start.x;
  tr.py = start.y;
  tr.dx = cosq(static_cast<__float128>(theta));
  tr.dy = sinq(static_cast<__float128>(theta));
  return run_bounces(tr, bounces);
}

std::array<std::int64_t, 2> cell_after(const BilliardTable& t, Vec2 start, double theta, long bounces) {
  Tracer<double> tr(t, {});
  tr.px = start.x;
  tr.py = start.y;
  tr.dx = std::cos(theta);
  tr.dy = std::sin(theta);
  return run_bounces(tr, bounces);
}

// --- diffusion --------------------------------------------------------------

DiffusionSeries diffuse(const BilliardTable& t, double theta, Vec2 start, double T, const DiffuseOptions& opts) {
  if (!(opts.t0 > 0.0) || !(T >= opts.t0)) throw Error(ErrorCode::InvalidArgument, "need 0 < t0 <= T");
  if (!t.is_free(start)) throw Error(ErrorCode::InvalidArgument, "start point lies inside an obstacle");
  Tracer<double> tr(t, opts.trace);
  tr.px = start.x - std::floor(start.x);
  tr.py = start.y - std::floor(start.y);
  tr.dx = std::cos(theta);
  tr.dy = std::sin(theta);
  const Vec2 origin{tr.px, tr.py};
  DiffusionSeries out;
  // Flow time in table units; Kahan-compensated.
  double time = 0.0, comp = 0.0;
  const double scale = t.scale();
  double next = opts.t0 / scale;
  const double end = T / scale;
  int hit = -1;
  double param = 0.0;
  try {
    while (next <= end * (1 + 1e-15)) {
      const double dt = tr.advance(next - time, hit, param);
      const double y = dt - comp;
      const double s = time + y;
      comp = (s - time) - y;
      time = s;
      if (hit >= 0) {
        ++out.bounces;
        continue;
      }
      const double ddx = static_cast<double>(tr.cx) + (tr.px - origin.x);
      const double ddy = static_cast<double>(tr.cy) + (tr.py - origin.y);
      out.checkpoints.push_back({next * scale, std::hypot(ddx, ddy) * scale, {tr.cx, tr.cy}});
      time = next;
      comp = 0.0;
      next *= 2.0;
    }
  } catch (const Error& e) {
    out.aborted = e.code();
    out.message = e.what();
  }
  return out;
}

RateEstimate diffusion_rate(const DiffusionSeries& s, RateMode mode, int min_checkpoints) {
  const int m = static_cast<int>(s.checkpoints.size());
  if (m < min_checkpoints)
    throw Error(ErrorCode::InsufficientData,
                std::to_string(m) + " checkpoints, need at least " + std::to_string(min_checkpoints));
  RateEstimate r;
  const int w = (m + 1) / 2;
  r.window_begin = m - w;
  r.window_end = m;
  std::vector<double> xs, ys;
  double running = 0.0;
  for (int k = 0; k < m; ++k) {
    running = std::max(running, s.checkpoints[static_cast<size_t>(k)].displacement);
    if (k < r.window_begin) continue;
    const double d = mode == RateMode::Envelope ? running : s.checkpoints[static_cast<size_t>(k)].displacement;
    if (!(d > 0.0)) {
      r.status = RateStatus::LowConfidence;
      continue;
    }
    xs.push_back(std::log(s.checkpoints[static_cast<size_t>(k)].t));
    ys.push_back(std::log(d));
  }
  const int n = static_cast<int>(xs.size());
  if (n < 3) {
    r.status = RateStatus::LowConfidence;
    r.slope = 0.0;
    r.stderr_ = std::numeric_limits<double>::infinity();
    return r;
  }
  double mx = 0, my = 0;
  for (int i = 0; i < n; ++i) {
    mx += xs[static_cast<size_t>(i)];
    my += ys[static_cast<size_t>(i)];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0;
  for (int i = 0; i < n; ++i) {
    sxx += (xs[static_cast<size_t>(i)] - mx) * (xs[static_cast<size_t>(i)] - mx);
    sxy += (xs[static_cast<size_t>(i)] - mx) * (ys[static_cast<size_t>(i)] - my);
  }
  r.slope = sxy / sxx;
  double ssr = 0;
  for (int i = 0; i < n; ++i) {
    const double e = ys[static_cast<size_t>(i)] - my - r.slope * (xs[static_cast<size_t>(i)] - mx);
    ssr += e * e;
  }
  r.stderr_ = std::sqrt(ssr / (n - 2) / sxx);
  if (r.slope < -0.1 || r.slope > 1.1) {
    r.status = RateStatus::LowConfidence;
    r.slope = std::clamp(r.slope, -0.1, 1.1);
  }
  return r;
}

bool near_axis(double theta, double eps) {
  const double q = std::numbers::pi / 2;
  const double r = std::remainder(theta, q);
  return std::abs(r) < eps;
}

// --- direction averages -----------------------------------------------------

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  // splitmix64 of the pair
  std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

Vec2 random_free_point(const BilliardTable& t, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 100000; ++i) {
    const Vec2 p{u(rng), u(rng)};
    if (t.is_free(p)) return p;
  }
  throw Error(ErrorCode::SamplingExhausted, "no free start point found");
}

double random_direction(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 2 * std::numbers::pi);
  for (;;) {
    const double th = u(rng);
    if (!near_axis(th)) return th;
  }
}

DirectionRun run_direction(const BilliardTable& t, double theta, std::uint64_t seed, double T, const AverageOptions& opts) {
  DirectionRun run;
  run.theta = theta;
  for (int attempt = 0; attempt < 4; ++attempt) {
    run.start = random_free_point(t, derive_seed(seed, static_cast<std::uint64_t>(attempt)));
    run.series = diffuse(t, theta, run.start, T, opts.diffuse);
    if (!run.series.aborted) break;
  }
  if (run.series.aborted) {
    run.excluded = true;
    run.reason = run.series.message;
  } else {
    try {
      run.rate = diffusion_rate(run.series, opts.mode);
      if (run.rate.status == RateStatus::LowConfidence) {
        run.excluded = true;
        run.reason = "low-confidence rate estimate";
      }
    } catch (const Error& e) {
      run.excluded = true;
      run.reason = e.what();
    }
  }
  if (!t.empty() && near_axis(theta)) {
    run.rate.status = RateStatus::LowConfidence;
    run.excluded = true;
    run.reason = "direction within 1e-6 of an axis";
  }
  if (!opts.keep_series) run.series.checkpoints.clear();
  return run;
}

DirectionAverage direction_averaged_rate(const BilliardTable& t, int N, double T, std::uint64_t seed,
                                         const AverageOptions& opts) {
  if (N < 2) throw Error(ErrorCode::InvalidArgument, "need at least 2 directions");
  DirectionAverage avg;
  avg.runs.resize(static_cast<size_t>(N));
  const int threads = std::max(1, std::min(opts.threads, N));
  auto job = [&](int i) {
    const std::uint64_t s = derive_seed(seed, static_cast<std::uint64_t>(i));
    avg.runs[static_cast<size_t>(i)] = run_direction(t, random_direction(s), derive_seed(s, 1000), T, opts);
  };
  if (threads == 1) {
    for (int i = 0; i < N; ++i) job(i);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < threads; ++w)
      pool.emplace_back([&, w] {
        for (int i = w; i < N; i += threads) job(i);
      });
    for (auto& th : pool) th.join();
  }
  std::vector<double> slopes;
  for (const auto& r : avg.runs) {
    if (r.excluded) ++avg.excluded;
    else slopes.push_back(r.rate.slope);
  }
  avg.used = static_cast<int>(slopes.size());
  if (avg.excluded > opts.max_excluded_fraction * N)
    throw Error(ErrorCode::TooManyExclusions,
                std::to_string(avg.excluded) + " of " + std::to_string(N) + " directions excluded");
  double sum = 0;
  for (double v : slopes) sum += v;
  avg.mean = sum / avg.used;
  double var = 0;
  for (double v : slopes) var += (v - avg.mean) * (v - avg.mean);
  avg.stderr_ = avg.used > 1 ? std::sqrt(var / (avg.used - 1) / avg.used) : 0.0;
  return avg;
}

void write_series_csv(std::ostream& out, const std::string& table_id, const std::vector<DirectionRun>& runs, bool header) {
  if (header) out << "table_id,theta,t_k,displacement,cell_x,cell_y\n";
  out.precision(17);
  for (const auto& r : runs)
    for (const auto& c : r.series.checkpoints)
      out << table_id << ',' << r.theta << ',' << c.t << ',' << c.displacement << ',' << c.cell[0] << ',' << c.cell[1]
          << '\n';
}

}  // namespace wtl
