// End-to-end acceptance run: one PASS/FAIL line per criterion.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "wtl/billiard.hpp"
#include "wtl/catalog.hpp"
#include "wtl/experiment.hpp"
#include "wtl/family.hpp"
#include "wtl/surface_flow.hpp"

using namespace wtl;

namespace {

struct Outcome {
  bool passed = false;
  std::string detail;
};

int failures = 0;

void criterion(int id, const std::string& name, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (!o.passed) ++failures;
  std::printf("[%s] %2d %s: %s (%.1fs)\n", o.passed ? "PASS" : "FAIL", id, name.c_str(), o.detail.c_str(), secs);
  std::fflush(stdout);
}

std::string fmt(double v, int prec = 4) {
  std::ostringstream s;
  s.precision(prec);
  s << v;
  return s.str();
}

int workers() { return std::max(1, static_cast<int>(std::thread::hardware_concurrency())); }

double mean_of(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double stderr_of(const std::vector<double>& v) {
  const double m = mean_of(v);
  double s = 0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
}

ExperimentConfig lyap_config() {
  ExperimentConfig c;
  c.lyap_iterations = 1000000;
  c.lyap_chains = 8;
  c.seed = 2024;
  c.workers = workers();
  return c;
}

std::vector<FigurePoint> figure_points(const std::string& name) {
  const FigureResult f = reproduce_figure(name, lyap_config());
  return f.points;
}

Outcome trend_outcome(const std::vector<TrendCheck>& checks) {
  Outcome o{true, ""};
  for (const auto& c : checks) {
    o.passed = o.passed && c.passed;
    if (o.detail.empty()) o.detail = c.detail;
    if (!c.passed) o.detail += " [" + c.name + " failed]";
  }
  return o;
}

}  // namespace

int main() {
  criterion(1, "ballistic control", [] {
    const BilliardTable t(WindtreeTable{});
    const auto avg = direction_averaged_rate(t, 8, 1e6, 1);
    return Outcome{std::abs(avg.mean - 1.0) <= 0.02, "rate " + fmt(avg.mean) + " +- " + fmt(avg.stderr_, 2)};
  });

  criterion(2, "classical windtree rate", [] {
    const BilliardTable t(sample_table(FamilySpec::parse("n=1"), 7));
    AverageOptions o;
    o.threads = workers();
    const auto avg = direction_averaged_rate(t, 50, 1e6, 7, o);
    return Outcome{std::abs(avg.mean - 2.0 / 3.0) <= 0.05,
                   "rate " + fmt(avg.mean) + " +- " + fmt(avg.stderr_, 2) + " over " + std::to_string(avg.used)};
  });

  criterion(3, "billiard vs crossing estimator", [] {
    const int directions = 10;
    std::string detail;
    bool ok = true;
    for (std::uint64_t table = 0; table < 5; ++table) {
      const std::uint64_t ts = derive_seed(31, table);
      const WindtreeTable t = sample_table(FamilySpec::parse("n=2"), ts);
      const BilliardTable bt(t);
      const auto u = unfold(t);
      std::vector<double> billiard(directions, NAN), crossing(directions, NAN);
      parallel_for(directions, workers(), [&](int k) {
        const double theta = random_direction(derive_seed(ts, static_cast<std::uint64_t>(k)));
        const Vec2 p = random_free_point(bt, derive_seed(ts, 1000 + static_cast<std::uint64_t>(k)));
        try {
          const auto ds = diffuse(bt, theta, p, 1e6);
          const auto cs = crossing_diffusion(u, theta, p, 1e6);
          if (ds.aborted || cs.aborted) return;
          billiard[static_cast<size_t>(k)] = diffusion_rate(ds).slope;
          crossing[static_cast<size_t>(k)] = diffusion_rate(as_displacement(cs)).slope;
        } catch (const Error&) {
        }
      });
      std::vector<double> b, c;
      for (int k = 0; k < directions; ++k)
        if (!std::isnan(billiard[static_cast<size_t>(k)])) {
          b.push_back(billiard[static_cast<size_t>(k)]);
          c.push_back(crossing[static_cast<size_t>(k)]);
        }
      if (b.size() < 3) {
        ok = false;
        detail += "table " + std::to_string(table) + " too few runs; ";
        continue;
      }
      const double diff = std::abs(mean_of(b) - mean_of(c));
      const double sigma = std::hypot(stderr_of(b), stderr_of(c));
      ok = ok && diff <= 2 * sigma;
      detail += fmt(mean_of(b), 3) + "/" + fmt(mean_of(c), 3) + " ";
    }
    return Outcome{ok, detail};
  });

  criterion(4, "Q(1^8) exponent vs B_2 diffusion", [] {
    ExponentOptions o;
    o.iterations = 1000000;
    o.chains = 8;
    o.threads = workers();
    const auto r = estimate_top_exponent(StratumSignature::parse("1^8"), 4, o);
    ExperimentConfig c;
    c.family = FamilySpec::parse("n=2");
    c.n_tables = 10;
    c.n_directions = 50;
    c.T_flow = 1e6;
    c.seed = 4;
    c.workers = workers();
    const SweepResult s = run_diffusion_sweep(c);
    return Outcome{s.failed == 0 && std::abs(r.lambda_plus_top - s.mean) <= 0.05,
                   "lambda " + fmt(r.lambda_plus_top) + " vs rate " + fmt(s.mean) + " +- " + fmt(s.stderr_, 2)};
  });

  criterion(5, "no_pole trend", [] { return trend_outcome(figure_trends("no_pole", figure_points("no_pole"))); });

  criterion(6, "poles trend", [] {
    std::vector<FigurePoint> even;
    for (const auto& p : figure_points("poles"))
      if (p.x % 2 == 0) even.push_back(p);
    return trend_outcome(figure_trends("poles", even));
  });

  criterion(7, "ten_pole below 1/2", [] { return trend_outcome(figure_trends("ten_pole", figure_points("ten_pole"))); });

  criterion(8, "exact bookkeeping", [] {
    int cases = 0;
    std::string bad;
    for (int n = 1; n <= 4; ++n) {
      std::vector<int> k(static_cast<size_t>(n), 0);
      // All k with sum at most 4, odometer order.
      while (true) {
        int p = 0;
        for (int x : k) p += x;
        if (p <= 4) {
          FamilySpec spec;
          spec.n = n;
          spec.k = k;
          const StratumInfo st = stratum_of(unfold(sample_table(spec, 100 + static_cast<std::uint64_t>(cases))).surface());
          std::vector<int> want(static_cast<size_t>(4 * n + p), 1);
          want.insert(want.end(), static_cast<size_t>(p), -1);
          const auto sys = build_equations(spec);
          const bool ok = st.signature.multiplicities == want && st.genus == n + 1 &&
                          st.complex_dimension == 6 * n + 2 * p && sys.real_rows() == 2 * n + 2 * p + 3 &&
                          sys.complex_rows() == 3 * n - 1 && sys.solution_dimension() == 4 * n + 2 * p - 1;
          if (!ok) bad += spec.to_string() + " ";
          ++cases;
        }
        size_t i = 0;
        while (i < k.size() && ++k[i] > 4) k[i++] = 0;
        if (i == k.size()) break;
      }
    }
    return Outcome{bad.empty(), std::to_string(cases) + " families" + (bad.empty() ? "" : ", mismatched: " + bad)};
  });

  criterion(9, "induction self-checks", [] {
    bool ok = true;
    std::string detail;
    ExponentOptions o;
    o.iterations = 100000;
    o.chains = 4;
    o.threads = workers();
    double worst = 0;
    for (const auto& e : catalog_entries()) {
      const auto sig = StratumSignature::parse(e.stratum);
      const auto r = estimate_top_exponent(sig, 9, o);
      worst = std::max(worst, std::abs(r.lambda_minus_top - 1.0));
      ZorichState st = make_state(stratum_representative(sig), 9);
      for (int i = 0; i < 1000; ++i) {
        const StepRecord rec = rauzy_step(st);
        if (std::abs(determinant(step_matrix(st.gp.letters(), rec))) != 1) ok = false;
      }
    }
    ok = ok && worst <= 0.03;
    ExponentOptions t;
    t.iterations = 100000;
    t.chains = 2;
    const auto torus = estimate_top_exponent(LinearInvolution::parse("A B / B A"), 9, t);
    ok = ok && std::abs(torus.lambda_plus_top - 1.0) <= 0.01;
    detail = "max |lambda_minus - 1| " + fmt(worst, 3) + ", torus " + fmt(torus.lambda_plus_top, 5);
    return Outcome{ok, detail};
  });

  criterion(10, "cylinder deformation", [] {
    const auto u = unfold(aligned_squares_table());
    const auto sys = build_equations(FamilySpec::parse("n=2"));
    const auto dec = detect_cylinders(u.surface(), 0.0);
    const int c = designated_cylinder(u.surface(), dec, u.classes());
    const auto p = family_periods(u, sys.labels);
    const auto before = check_membership(p, sys);
    const auto after = check_membership(cylinder_deform(p, u.surface(), dec, {c}, u.classes(), 0.01), sys);
    std::vector<std::string> flipped;
    for (const auto& r : sys.rows) {
      if (r.group != 2) continue;
      const bool was = std::find(before.violated.begin(), before.violated.end(), r.name) == before.violated.end();
      const bool is = std::find(after.violated.begin(), after.violated.end(), r.name) == after.violated.end();
      if (was != is) flipped.push_back(r.name);
    }
    std::string detail;
    for (const auto& f : flipped) detail += (detail.empty() ? "" : ", ") + f;
    return Outcome{before.member && flipped == std::vector<std::string>{"alpha_1 = -alpha'_1"},
                   "flipped: " + (detail.empty() ? std::string("none") : detail)};
  });

  std::printf("%d of 10 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
