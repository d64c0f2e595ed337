#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "wtl/rauzy.hpp"
#include "wtl/windtree.hpp"

namespace wtl {

inline constexpr const char* kCodeVersion = "0.3.1";

struct ExperimentConfig {
  FamilySpec family;
  int n_tables = 5;
  int n_directions = 50;
  double T_flow = 1e6;
  long lyap_iterations = 1000000;
  int lyap_chains = 8;
  std::uint64_t seed = 1;
  int workers = 1;
  int max_n = 5;  ///< figure budget
  int max_p = 6;
  std::string output_dir = ".";

  /// Missing keys keep their defaults; unknown keys are rejected.
  static ExperimentConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
  /// Throws InvalidArgument unless all counts are positive.
  void validate() const;
  /// FNV-1a of the parameters that influence results (not workers or paths).
  std::string hash() const;
};

/// Runs job(i) for i in [0, n) on `workers` threads; results are expected
/// to be written by index so that the merge order is fixed.
void parallel_for(int n, int workers, const std::function<void(int)>& job);

struct SweepRow {
  int table = 0;
  std::uint64_t seed = 0;
  double rate = 0.0;
  double stderr_ = 0.0;
  int used = 0;
  int excluded = 0;
  std::string status = "ok";  ///< "ok" or the error message
};

struct SweepResult {
  std::vector<SweepRow> rows;
  double mean = 0.0;  ///< over successful tables
  double stderr_ = 0.0;
  int failed = 0;
};

SweepResult run_diffusion_sweep(const ExperimentConfig& cfg);
void write_sweep_csv(std::ostream& out, const ExperimentConfig& cfg, const SweepResult& r);

struct FigurePoint {
  int x = 0;  ///< n or p
  std::string stratum;
  ExponentReport report;
};

struct TrendCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct FigureResult {
  std::string name;
  std::vector<FigurePoint> points;
  std::vector<TrendCheck> checks;
};

/// Strata of a figure ("no_pole", "poles", "ten_pole") within the budget.
/// Throws InvalidArgument for unknown names and NotInCatalog beyond the catalog.
std::vector<std::pair<int, std::string>> figure_strata(const std::string& name, int max_n, int max_p);

/// Estimates every point; the trend checks are those of the figure.
FigureResult reproduce_figure(const std::string& name, const ExperimentConfig& cfg);
std::vector<TrendCheck> figure_trends(const std::string& name, const std::vector<FigurePoint>& points);
void write_figure_csv(std::ostream& out, const ExperimentConfig& cfg, const FigureResult& f);
void write_figure_svg(std::ostream& out, const FigureResult& f);

struct SelftestReport {
  std::vector<TrendCheck> checks;
  bool passed() const;
};

/// Quick assertions across the modules (a few seconds).
SelftestReport selftest(std::uint64_t seed = 1);

}  // namespace wtl
