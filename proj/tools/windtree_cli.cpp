#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "wtl/billiard.hpp"
#include "wtl/catalog.hpp"
#include "wtl/error.hpp"
#include "wtl/experiment.hpp"
#include "wtl/family.hpp"
#include "wtl/surface_flow.hpp"
#include "wtl/windtree.hpp"

using namespace wtl;
using nlohmann::json;

namespace {

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::InvalidArgument, "cannot open " + path);
  return json::parse(in);
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::InvalidArgument, "cannot write " + path);
  out << text;
}

// Shared experiment parameters: config file first, explicit flags on top.
struct Params {
  std::string config;
  std::string family = "n=1";
  int tables = 5, directions = 50, chains = 8, workers = 1, max_n = 5, max_p = 6;
  double T = 1e6, iters = 1e6;
  std::uint64_t seed = 1;
  std::string out_dir = ".";
  std::map<std::string, CLI::Option*> opts;

  void add(CLI::App* app, std::initializer_list<std::string> which) {
    app->add_option("--config", config, "JSON experiment config")->check(CLI::ExistingFile);
    for (const auto& w : which) {
      if (w == "family") opts[w] = app->add_option("--family", family, "family, e.g. n=2,k=1,2");
      if (w == "tables") opts[w] = app->add_option("--tables", tables, "number of sampled tables");
      if (w == "directions") opts[w] = app->add_option("--directions", directions, "directions per table");
      if (w == "T") opts[w] = app->add_option("--T", T, "flow time");
      if (w == "iters") opts[w] = app->add_option("--iters", iters, "accelerated steps per chain");
      if (w == "chains") opts[w] = app->add_option("--chains", chains, "independent chains");
      if (w == "seed") opts[w] = app->add_option("--seed", seed, "master seed");
      if (w == "workers") opts[w] = app->add_option("--workers", workers, "worker threads");
      if (w == "max_n") opts[w] = app->add_option("--max-n", max_n, "largest n in a figure");
      if (w == "max_p") opts[w] = app->add_option("--max-p", max_p, "largest p in a figure");
      if (w == "out_dir") opts[w] = app->add_option("--out-dir", out_dir, "output directory");
    }
  }

  bool given(const std::string& w) const {
    const auto it = opts.find(w);
    return it != opts.end() && it->second->count() > 0;
  }

  ExperimentConfig resolve() const {
    ExperimentConfig c;
    if (!config.empty()) c = ExperimentConfig::from_json(read_json(config));
    if (given("family") || config.empty()) c.family = FamilySpec::parse(family);
    if (given("tables") || config.empty()) c.n_tables = tables;
    if (given("directions") || config.empty()) c.n_directions = directions;
    if (given("T") || config.empty()) c.T_flow = T;
    if (given("iters") || config.empty()) c.lyap_iterations = std::llround(iters);
    if (given("chains") || config.empty()) c.lyap_chains = chains;
    if (given("seed") || config.empty()) c.seed = seed;
    if (given("workers") || config.empty()) c.workers = workers;
    if (given("max_n") || config.empty()) c.max_n = max_n;
    if (given("max_p") || config.empty()) c.max_p = max_p;
    if (given("out_dir") || config.empty()) c.output_dir = out_dir;
    c.validate();
    return c;
  }
};

WindtreeTable load_or_sample(const std::string& table_path, const ExperimentConfig& c) {
  if (!table_path.empty()) {
    WindtreeTable t = table_from_json(read_json(table_path));
    require_valid(t);
    return t;
  }
  return sample_table(c.family, c.seed);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Windtree billiards, half-translation surfaces and Lyapunov exponents"};
  app.require_subcommand(1);

  // sample
  auto* sample = app.add_subcommand("sample", "sample a random table of a family");
  Params sp;
  sp.add(sample, {"family", "seed"});
  std::string sample_out;
  bool sample_unfold = false;
  sample->add_option("--out", sample_out, "write the table JSON here");
  sample->add_flag("--unfold", sample_unfold, "also report the stratum of the unfolded surface");

  // diffuse
  auto* diffuse_cmd = app.add_subcommand("diffuse", "direction-averaged diffusion rate of tables");
  Params dp;
  dp.add(diffuse_cmd, {"family", "tables", "directions", "T", "seed", "workers", "out_dir"});
  std::string diffuse_table, diffuse_csv, series_csv;
  diffuse_cmd->add_option("--table", diffuse_table, "table JSON (single table instead of a sweep)");
  diffuse_cmd->add_option("--csv", diffuse_csv, "sweep summary CSV path");
  diffuse_cmd->add_option("--series", series_csv, "per-direction checkpoint CSV (single table)");

  // crossings
  auto* crossings = app.add_subcommand("crossings", "rate from crossing counts on the unfolded surface");
  Params cp;
  cp.add(crossings, {"family", "T", "seed"});
  std::string cross_table, cross_csv;
  double cross_theta = std::nan("");
  bool cross_compare = false;
  crossings->add_option("--table", cross_table, "table JSON");
  crossings->add_option("--theta", cross_theta, "direction (default: random from the seed)");
  crossings->add_option("--csv", cross_csv, "checkpoint CSV");
  crossings->add_flag("--compare", cross_compare, "also run the billiard from the same start");

  // lyapunov
  auto* lyap = app.add_subcommand("lyapunov", "top exponent of a quadratic stratum");
  Params lp;
  lp.add(lyap, {"iters", "chains", "seed", "workers"});
  std::vector<std::string> strata;
  std::string lyap_csv, lyap_perm;
  bool list_catalog = false;
  lyap->add_option("--stratum", strata, "stratum such as 1^8 or 1^10,-1^2 (repeatable)");
  lyap->add_option("--permutation", lyap_perm, "explicit generalized permutation instead, e.g. 'A B / B A'");
  lyap->add_option("--csv", lyap_csv, "table of results");
  lyap->add_flag("--list", list_catalog, "print the representative catalog with certificates");

  // equations
  auto* eqs = app.add_subcommand("equations", "period-coordinate equations of a family");
  Params ep;
  ep.add(eqs, {"family", "seed"});
  std::string eq_check;
  bool eq_sample = false;
  eqs->add_option("--check", eq_check, "table JSON whose periods are tested");
  eqs->add_flag("--check-sample", eq_sample, "test a sampled table of the family");

  // reproduce-figure
  auto* fig = app.add_subcommand("reproduce-figure", "exponent curves as CSV and SVG");
  Params fp;
  fp.add(fig, {"iters", "chains", "seed", "workers", "max_n", "max_p", "out_dir"});
  std::string fig_name;
  fig->add_option("name", fig_name, "no_pole, poles or ten_pole")->required();

  // selftest
  auto* self = app.add_subcommand("selftest", "quick assertions across all modules");
  std::uint64_t self_seed = 1;
  self->add_option("--seed", self_seed, "seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (sample->parsed()) {
      const ExperimentConfig c = sp.resolve();
      const WindtreeTable t = sample_table(c.family, c.seed);
      json j = table_to_json(t);
      if (sample_unfold) {
        const StratumInfo st = stratum_of(unfold(t).surface());
        j["unfolded"] = {{"stratum", st.signature.to_string()},
                         {"genus", st.genus},
                         {"complex_dimension", st.complex_dimension}};
      }
      write_text(sample_out, j.dump(2) + "\n");
    } else if (diffuse_cmd->parsed()) {
      const ExperimentConfig c = dp.resolve();
      if (!diffuse_table.empty()) {
        const WindtreeTable t = load_or_sample(diffuse_table, c);
        AverageOptions o;
        o.threads = c.workers;
        o.keep_series = !series_csv.empty();
        const DirectionAverage avg = direction_averaged_rate(BilliardTable(t), c.n_directions, c.T_flow, c.seed, o);
        std::cout << json{{"rate", avg.mean}, {"stderr", avg.stderr_}, {"used", avg.used}, {"excluded", avg.excluded}}.dump()
                  << "\n";
        if (!series_csv.empty()) {
          std::ostringstream s;
          write_series_csv(s, diffuse_table, avg.runs);
          write_text(series_csv, s.str());
        }
      } else {
        const SweepResult r = run_diffusion_sweep(c);
        std::ostringstream s;
        write_sweep_csv(s, c, r);
        if (diffuse_csv.empty()) diffuse_csv = (std::filesystem::path(c.output_dir) / "sweep.csv").string();
        write_text(diffuse_csv, s.str());
        std::cout << json{{"family", c.family.to_string()}, {"mean", r.mean}, {"stderr", r.stderr_}, {"failed", r.failed},
                          {"csv", diffuse_csv}}.dump()
                  << "\n";
      }
    } else if (crossings->parsed()) {
      const ExperimentConfig c = cp.resolve();
      const WindtreeTable t = load_or_sample(cross_table, c);
      const BilliardTable bt(t);
      const UnfoldedTable u = unfold(t);
      const Vec2 p = random_free_point(bt, c.seed);
      const double theta = std::isnan(cross_theta) ? random_direction(derive_seed(c.seed, 1)) : cross_theta;
      const CrossingSeries cs = crossing_diffusion(u, theta, p, c.T_flow);
      json j = {{"theta", theta}, {"crossings", cs.crossings}, {"aborted", cs.aborted ? cs.message : ""}};
      try {
        const RateEstimate r = diffusion_rate(as_displacement(cs));
        j["rate"] = r.slope;
        j["stderr"] = r.stderr_;
      } catch (const Error& e) {
        j["rate_error"] = e.what();
      }
      if (cross_compare) {
        const DiffusionSeries ds = diffuse(bt, theta, p, c.T_flow);
        bool same = ds.checkpoints.size() == cs.checkpoints.size();
        for (size_t k = 0; same && k < ds.checkpoints.size(); ++k)
          same = ds.checkpoints[k].cell[0] == cs.checkpoints[k].pairing_x &&
                 ds.checkpoints[k].cell[1] == cs.checkpoints[k].pairing_y;
        j["billiard_agrees"] = same;
      }
      std::cout << j.dump() << "\n";
      if (!cross_csv.empty()) {
        std::ostringstream s;
        write_crossings_csv(s, cross_table.empty() ? c.family.to_string() : cross_table, theta, cs);
        write_text(cross_csv, s.str());
      }
    } else if (lyap->parsed()) {
      const ExperimentConfig c = lp.resolve();
      if (list_catalog) {
        json list = json::array();
        for (const auto& e : catalog_entries()) {
          const Certificate cert = certify(StratumSignature::parse(e.stratum));
          list.push_back({{"stratum", cert.stratum},
                          {"permutation", cert.permutation},
                          {"genus", cert.genus},
                          {"complex_dimension", cert.complex_dimension},
                          {"verified", cert.verified}});
        }
        std::cout << json{{"catalog_version", kCatalogVersion}, {"entries", list}}.dump(2) << "\n";
        return 0;
      }
      ExponentOptions o;
      o.iterations = c.lyap_iterations;
      o.chains = c.lyap_chains;
      o.threads = c.workers;
      if (!lyap_perm.empty()) {
        const ExponentReport r = estimate_top_exponent(LinearInvolution::parse(lyap_perm), c.seed, o);
        std::cout << report_to_json(lyap_perm, r).dump() << "\n";
        return 0;
      }
      if (strata.empty()) throw Error(ErrorCode::InvalidArgument, "give --stratum, --permutation or --list");
      std::ostringstream csv;
      csv << "config_hash,version,stratum,lambda_plus,stderr,lambda_minus,iterations,chains\n";
      for (const auto& s : strata) {
        const StratumSignature sig = StratumSignature::parse(s);
        const ExponentReport r = estimate_top_exponent(sig, c.seed, o);
        std::cout << report_to_json(s, r).dump() << "\n";
        csv << c.hash() << "," << kCodeVersion << ",\"" << sig.to_string() << "\"," << r.lambda_plus_top << ","
            << r.stderr_ << "," << r.lambda_minus_top << "," << r.iterations << "," << r.chains << "\n";
      }
      if (!lyap_csv.empty()) write_text(lyap_csv, csv.str());
    } else if (eqs->parsed()) {
      const ExperimentConfig c = ep.resolve();
      const FamilyEquationSystem sys = build_equations(c.family);
      if (eq_check.empty() && !eq_sample) {
        std::cout << system_to_json(sys).dump(2) << "\n";
        return 0;
      }
      const WindtreeTable t = eq_sample ? sample_table(c.family, c.seed) : load_or_sample(eq_check, c);
      if (!(t.family().n == c.family.n && t.family().k == c.family.k))
        throw Error(ErrorCode::LabelMismatch, "table is of family " + t.family().to_string());
      const UnfoldedTable u = unfold(t);
      const MembershipReport m = check_membership(family_periods(u, sys.labels), sys);
      std::cout << membership_to_json(sys, m).dump(2) << "\n";
    } else if (fig->parsed()) {
      const ExperimentConfig c = fp.resolve();
      const FigureResult f = reproduce_figure(fig_name, c);
      std::filesystem::create_directories(c.output_dir);
      const auto base = std::filesystem::path(c.output_dir) / fig_name;
      std::ostringstream csv, svg;
      write_figure_csv(csv, c, f);
      write_figure_svg(svg, f);
      write_text(base.string() + ".csv", csv.str());
      write_text(base.string() + ".svg", svg.str());
      for (const auto& p : f.points)
        std::cout << "Q(" << p.stratum << ") " << p.report.lambda_plus_top << " +- " << p.report.stderr_ << "\n";
      for (const auto& ch : f.checks) std::cout << (ch.passed ? "PASS " : "FAIL ") << ch.name << "\n";
    } else if (self->parsed()) {
      const SelftestReport r = selftest(self_seed);
      for (const auto& ch : r.checks)
        std::cout << (ch.passed ? "PASS " : "FAIL ") << ch.name << ": " << ch.detail << "\n";
      return r.passed() ? 0 : 1;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
