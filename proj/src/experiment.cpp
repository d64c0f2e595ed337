#include "wtl/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <thread>

#include "wtl/billiard.hpp"
#include "wtl/catalog.hpp"
#include "wtl/error.hpp"
#include "wtl/family.hpp"
#include "wtl/surface_flow.hpp"

namespace wtl {

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
  static const std::vector<std::string> known{"family",     "n_tables", "n_directions", "T_flow", "lyap_iterations",
                                              "lyap_chains", "seed",     "workers",      "max_n",  "max_p",
                                              "output_dir"};
  for (const auto& [key, value] : j.items())
    if (std::find(known.begin(), known.end(), key) == known.end())
      throw Error(ErrorCode::InvalidArgument, "unknown config key '" + key + "'");
  ExperimentConfig c;
  if (j.contains("family")) c.family = FamilySpec::parse(j.at("family").get<std::string>());
  c.n_tables = j.value("n_tables", c.n_tables);
  c.n_directions = j.value("n_directions", c.n_directions);
  c.T_flow = j.value("T_flow", c.T_flow);
  c.lyap_iterations = j.value("lyap_iterations", c.lyap_iterations);
  c.lyap_chains = j.value("lyap_chains", c.lyap_chains);
  c.seed = j.value("seed", c.seed);
  c.workers = j.value("workers", c.workers);
  c.max_n = j.value("max_n", c.max_n);
  c.max_p = j.value("max_p", c.max_p);
  c.output_dir = j.value("output_dir", c.output_dir);
  return c;
}

nlohmann::json ExperimentConfig::to_json() const {
  return {{"family", family.to_string()}, {"n_tables", n_tables},
          {"n_directions", n_directions}, {"T_flow", T_flow},
          {"lyap_iterations", lyap_iterations}, {"lyap_chains", lyap_chains},
          {"seed", seed},                 {"workers", workers},
          {"max_n", max_n},               {"max_p", max_p},
          {"output_dir", output_dir}};
}

void ExperimentConfig::validate() const {
  if (n_tables < 1 || n_directions < 2 || !(T_flow > 0) || lyap_iterations < 1 || lyap_chains < 1 || workers < 1 ||
      max_n < 1 || max_p < 0)
    throw Error(ErrorCode::InvalidArgument, "experiment counts must be positive");
}

std::string ExperimentConfig::hash() const {
  nlohmann::json j = to_json();
  j.erase("workers");
  j.erase("output_dir");
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : j.dump()) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void parallel_for(int n, int workers, const std::function<void(int)>& job) {
  const int w = std::max(1, std::min(workers, n));
  if (w == 1) {
    for (int i = 0; i < n; ++i) job(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  for (int k = 0; k < w; ++k)
    pool.emplace_back([&] {
      for (int i = next++; i < n; i = next++) job(i);
    });
  for (auto& t : pool) t.join();
}

SweepResult run_diffusion_sweep(const ExperimentConfig& cfg) {
  cfg.validate();
  SweepResult r;
  r.rows.resize(static_cast<size_t>(cfg.n_tables));
  for (int i = 0; i < cfg.n_tables; ++i) {
    SweepRow& row = r.rows[static_cast<size_t>(i)];
    row.table = i;
    row.seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(i));
    try {
      const WindtreeTable t = sample_table(cfg.family, row.seed);
      const BilliardTable bt(t);
      AverageOptions opts;
      opts.threads = cfg.workers;
      const DirectionAverage avg =
          direction_averaged_rate(bt, cfg.n_directions, cfg.T_flow, derive_seed(row.seed, 77), opts);
      row.rate = avg.mean;
      row.stderr_ = avg.stderr_;
      row.used = avg.used;
      row.excluded = avg.excluded;
    } catch (const std::exception& e) {
      row.status = e.what();
      ++r.failed;
    }
  }
  std::vector<double> ok;
  for (const auto& row : r.rows)
    if (row.status == "ok") ok.push_back(row.rate);
  if (!ok.empty()) {
    for (double v : ok) r.mean += v;
    r.mean /= static_cast<double>(ok.size());
    double var = 0.0;
    for (double v : ok) var += (v - r.mean) * (v - r.mean);
    r.stderr_ = ok.size() > 1 ? std::sqrt(var / static_cast<double>(ok.size() - 1) / static_cast<double>(ok.size())) : 0.0;
  }
  return r;
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
  return out + "\"";
}

}  // namespace

void write_sweep_csv(std::ostream& out, const ExperimentConfig& cfg, const SweepResult& r) {
  const std::string tag = cfg.hash() + "," + kCodeVersion;
  out << std::setprecision(10);
  out << "config_hash,version,family,table,seed,rate,stderr,used,excluded,status\n";
  for (const auto& row : r.rows)
    out << tag << "," << cfg.family.to_string() << "," << row.table << "," << row.seed << "," << row.rate << ","
        << row.stderr_ << "," << row.used << "," << row.excluded << "," << csv_field(row.status) << "\n";
  out << tag << "," << cfg.family.to_string() << ",mean,," << r.mean << "," << r.stderr_ << ","
      << (static_cast<int>(r.rows.size()) - r.failed) << "," << r.failed << ",aggregate\n";
}

std::vector<std::pair<int, std::string>> figure_strata(const std::string& name, int max_n, int max_p) {
  std::vector<std::pair<int, std::string>> out;
  if (name == "no_pole") {
    for (int n = 2; n <= max_n; ++n) out.push_back({n, "1^" + std::to_string(4 * n)});
  } else if (name == "poles") {
    for (int p = 0; p <= max_p; ++p)
      out.push_back({p, p == 0 ? "1^8" : "1^" + std::to_string(8 + p) + ",-1^" + std::to_string(p)});
  } else if (name == "ten_pole") {
    for (int n = 1; n <= std::min(max_n, 3); ++n) out.push_back({n, "1^" + std::to_string(4 * n + 10) + ",-1^10"});
  } else {
    throw Error(ErrorCode::InvalidArgument, "unknown figure '" + name + "' (no_pole, poles, ten_pole)");
  }
  for (const auto& [x, s] : out)
    if (!in_catalog(StratumSignature::parse(s)))
      throw Error(ErrorCode::NotInCatalog, "Q(" + s + ") is beyond the representative catalog");
  return out;
}

std::vector<TrendCheck> figure_trends(const std::string& name, const std::vector<FigurePoint>& pts) {
  std::vector<TrendCheck> checks;
  auto fmt = [](double v) {
    std::ostringstream s;
    s << std::setprecision(4) << v;
    return s.str();
  };
  auto values = [&] {
    std::string s;
    for (const auto& p : pts) s += (s.empty() ? "" : " ") + fmt(p.report.lambda_plus_top);
    return s;
  };
  if (pts.size() < 2) return {{name + ": enough points", false, "fewer than two points"}};
  if (name == "no_pole") {
    bool dec = true, above = true, shrinking = true;
    for (size_t i = 0; i < pts.size(); ++i) {
      const auto& r = pts[i].report;
      if (!(r.lambda_plus_top > 0.5 - 2 * r.stderr_)) above = false;
      if (i > 0) {
        const auto& q = pts[i - 1].report;
        if (!(r.lambda_plus_top < q.lambda_plus_top)) dec = false;
        if (!(r.lambda_plus_top - 0.5 < q.lambda_plus_top - 0.5)) shrinking = false;
      }
    }
    checks.push_back({"no_pole strictly decreasing", dec, values()});
    checks.push_back({"no_pole above 1/2 - 2 sigma", above, values()});
    checks.push_back({"no_pole gap to 1/2 shrinking", shrinking, values()});
  } else if (name == "poles") {
    bool dec = true;
    for (size_t i = 1; i < pts.size(); ++i) {
      const auto& r = pts[i].report;
      const auto& q = pts[i - 1].report;
      const double sigma = std::hypot(r.stderr_, q.stderr_);
      if (!(q.lambda_plus_top - r.lambda_plus_top > sigma)) dec = false;
    }
    checks.push_back({"poles decreasing beyond 1 sigma", dec, values()});
  } else if (name == "ten_pole") {
    bool below = true;
    for (const auto& p : pts)
      if (!(p.report.lambda_plus_top < 0.5)) below = false;
    checks.push_back({"ten_pole below 1/2", below, values()});
  }
  return checks;
}

FigureResult reproduce_figure(const std::string& name, const ExperimentConfig& cfg) {
  cfg.validate();
  FigureResult f;
  f.name = name;
  const auto strata = figure_strata(name, cfg.max_n, cfg.max_p);
  f.points.resize(strata.size());
  ExponentOptions opts;
  opts.iterations = cfg.lyap_iterations;
  opts.chains = cfg.lyap_chains;
  opts.threads = cfg.workers;
  for (size_t i = 0; i < strata.size(); ++i) {
    f.points[i].x = strata[i].first;
    f.points[i].stratum = strata[i].second;
    f.points[i].report =
        estimate_top_exponent(StratumSignature::parse(strata[i].second), derive_seed(cfg.seed, i), opts);
  }
  f.checks = figure_trends(name, f.points);
  return f;
}

void write_figure_csv(std::ostream& out, const ExperimentConfig& cfg, const FigureResult& f) {
  out << std::setprecision(10);
  out << "config_hash,version,figure,x,stratum,lambda_plus,stderr,lambda_minus,iterations,chains\n";
  for (const auto& p : f.points)
    out << cfg.hash() << "," << kCodeVersion << "," << f.name << "," << p.x << "," << csv_field("Q(" + p.stratum + ")")
        << "," << p.report.lambda_plus_top << "," << p.report.stderr_ << "," << p.report.lambda_minus_top << ","
        << p.report.iterations << "," << p.report.chains << "\n";
}

void write_figure_svg(std::ostream& out, const FigureResult& f) {
  const double w = 480, h = 320, left = 60, right = 20, top = 30, bottom = 45;
  double xmin = 1e9, xmax = -1e9, ymin = 0.5, ymax = 0.5;
  for (const auto& p : f.points) {
    xmin = std::min(xmin, static_cast<double>(p.x));
    xmax = std::max(xmax, static_cast<double>(p.x));
    ymin = std::min(ymin, p.report.lambda_plus_top - p.report.stderr_);
    ymax = std::max(ymax, p.report.lambda_plus_top + p.report.stderr_);
  }
  if (xmax <= xmin) xmax = xmin + 1;
  const double pad = 0.1 * (ymax - ymin) + 1e-3;
  ymin -= pad;
  ymax += pad;
  auto X = [&](double x) { return left + (x - xmin) / (xmax - xmin) * (w - left - right); };
  auto Y = [&](double y) { return h - bottom - (y - ymin) / (ymax - ymin) * (h - top - bottom); };
  out << std::fixed << std::setprecision(2);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << w / 2 << "\" y=\"18\" text-anchor=\"middle\" font-size=\"14\">" << f.name << "</text>\n";
  out << "<line x1=\"" << left << "\" y1=\"" << h - bottom << "\" x2=\"" << w - right << "\" y2=\"" << h - bottom
      << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << h - bottom
      << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << left << "\" y1=\"" << Y(0.5) << "\" x2=\"" << w - right << "\" y2=\"" << Y(0.5)
      << "\" stroke=\"gray\" stroke-dasharray=\"4 3\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double y = ymin + (ymax - ymin) * k / 4.0;
    out << "<text x=\"" << left - 6 << "\" y=\"" << Y(y) + 4 << "\" text-anchor=\"end\" font-size=\"10\">"
        << std::setprecision(3) << y << std::setprecision(2) << "</text>\n";
  }
  for (const auto& p : f.points)
    out << "<text x=\"" << X(p.x) << "\" y=\"" << h - bottom + 16 << "\" text-anchor=\"middle\" font-size=\"10\">"
        << p.x << "</text>\n";
  out << "<text x=\"" << w / 2 << "\" y=\"" << h - 8 << "\" text-anchor=\"middle\" font-size=\"11\">"
      << (f.name == "poles" ? "p" : "n") << "</text>\n";
  out << "<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"1.5\" points=\"";
  for (const auto& p : f.points) out << X(p.x) << "," << Y(p.report.lambda_plus_top) << " ";
  out << "\"/>\n";
  for (const auto& p : f.points) {
    const double y = p.report.lambda_plus_top, e = p.report.stderr_;
    out << "<line x1=\"" << X(p.x) << "\" y1=\"" << Y(y - e) << "\" x2=\"" << X(p.x) << "\" y2=\"" << Y(y + e)
        << "\" stroke=\"steelblue\"/>\n";
    out << "<circle cx=\"" << X(p.x) << "\" cy=\"" << Y(y) << "\" r=\"3\" fill=\"steelblue\"/>\n";
  }
  out << "</svg>\n";
}

bool SelftestReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const TrendCheck& c) { return c.passed; });
}

SelftestReport selftest(std::uint64_t seed) {
  SelftestReport rep;
  auto run = [&](const std::string& name, const std::function<std::pair<bool, std::string>()>& body) {
    try {
      auto [ok, detail] = body();
      rep.checks.push_back({name, ok, detail});
    } catch (const std::exception& e) {
      rep.checks.push_back({name, false, e.what()});
    }
  };
  auto num = [](double v) {
    std::ostringstream s;
    s << std::setprecision(5) << v;
    return s.str();
  };

  run("ballistic empty table", [&] {
    const BilliardTable bt(WindtreeTable{});
    const auto avg = direction_averaged_rate(bt, 8, 1e4, seed);
    return std::make_pair(std::abs(avg.mean - 1.0) <= 0.02, "rate " + num(avg.mean));
  });
  run("unfold bookkeeping", [&] {
    std::string detail;
    bool ok = true;
    for (const char* fam : {"n=1", "n=2", "n=2,k=1,1", "n=3,k=0,1,0"}) {
      const FamilySpec spec = FamilySpec::parse(fam);
      const StratumInfo st = stratum_of(unfold(sample_table(spec, seed)).surface());
      StratumSignature want;
      want.multiplicities.assign(static_cast<size_t>(4 * spec.n + spec.p()), 1);
      want.multiplicities.insert(want.multiplicities.end(), static_cast<size_t>(spec.p()), -1);
      ok = ok && st.signature == want && st.genus == spec.n + 1 && st.complex_dimension == 6 * spec.n + 2 * spec.p();
      detail += std::string(fam) + ":" + st.signature.to_string() + " ";
    }
    return std::make_pair(ok, detail);
  });
  run("equation counts", [&] {
    bool ok = true;
    for (const char* fam : {"n=1", "n=2", "n=2,k=1,2", "n=3,k=1,0,2"}) {
      const FamilySpec spec = FamilySpec::parse(fam);
      const auto sys = build_equations(spec);
      ok = ok && sys.real_rows() == 2 * spec.n + 2 * spec.p() + 3 && sys.complex_rows() == 3 * spec.n - 1 &&
           sys.solution_dimension() == 4 * spec.n + 2 * spec.p() - 1;
    }
    return std::make_pair(ok, std::string(ok ? "all match" : "count mismatch"));
  });
  run("membership of a sampled table", [&] {
    const FamilySpec spec = FamilySpec::parse("n=2,k=1,0");
    const auto sys = build_equations(spec);
    const auto u = unfold(sample_table(spec, seed));
    const auto m = check_membership(family_periods(u, sys.labels), sys);
    return std::make_pair(m.member, m.member ? std::string("member") : "violates " + m.violated.front());
  });
  run("catalog certificates", [&] {
    int bad = 0;
    for (const auto& e : catalog_entries())
      if (!certify(StratumSignature::parse(e.stratum)).verified) ++bad;
    return std::make_pair(bad == 0, std::to_string(catalog_entries().size() - bad) + " verified");
  });
  run("torus exponent", [&] {
    ExponentOptions o;
    o.iterations = 100000;
    o.chains = 2;
    const auto r = estimate_top_exponent(LinearInvolution::parse("A B / B A"), seed, o);
    return std::make_pair(std::abs(r.lambda_plus_top - 1.0) <= 0.01, "lambda " + num(r.lambda_plus_top));
  });
  run("pillowcase normalization", [&] {
    ExponentOptions o;
    o.iterations = 1000;
    o.chains = 2;
    const auto r = estimate_top_exponent(LinearInvolution::parse("A A B / B C C"), seed, o);
    return std::make_pair(std::abs(r.lambda_minus_top - 1.0) <= 0.05, "lambda_minus " + num(r.lambda_minus_top));
  });
  run("step determinants", [&] {
    ZorichState st = make_state(stratum_representative(StratumSignature::parse("1^8")), seed);
    bool ok = true;
    for (int i = 0; i < 200; ++i) {
      const StepRecord r = rauzy_step(st);
      ok = ok && std::abs(determinant(step_matrix(st.gp.letters(), r))) == 1;
    }
    return std::make_pair(ok, std::string("200 steps"));
  });
  run("cylinder deformation", [&] {
    const auto u = unfold(aligned_squares_table());
    const auto sys = build_equations(FamilySpec::parse("n=2"));
    const auto dec = detect_cylinders(u.surface(), 0.0);
    const int c = designated_cylinder(u.surface(), dec, u.classes());
    const auto p = family_periods(u, sys.labels);
    const auto q = cylinder_deform(p, u.surface(), dec, {c}, u.classes(), 0.01);
    const auto m = check_membership(q, sys);
    std::vector<std::string> group2;
    for (const auto& v : m.violated)
      for (const auto& r : sys.rows)
        if (r.name == v && r.group == 2) group2.push_back(v);
    const bool ok = group2 == std::vector<std::string>{"alpha_1 = -alpha'_1"};
    return std::make_pair(ok, group2.empty() ? std::string("no group-2 row changed") : group2.front());
  });
  run("crossings match billiard cells", [&] {
    const WindtreeTable t = sample_table(FamilySpec::parse("n=2"), seed);
    const BilliardTable bt(t);
    const auto u = unfold(t);
    const Vec2 p = random_free_point(bt, seed);
    const double theta = random_direction(derive_seed(seed, 3));
    const auto cs = crossing_diffusion(u, theta, p, 1e4);
    const auto ds = diffuse(bt, theta, p, 1e4);
    bool ok = !cs.aborted && !ds.aborted && cs.checkpoints.size() == ds.checkpoints.size();
    for (size_t k = 0; ok && k < cs.checkpoints.size(); ++k)
      ok = cs.checkpoints[k].pairing_x == ds.checkpoints[k].cell[0] &&
           cs.checkpoints[k].pairing_y == ds.checkpoints[k].cell[1];
    return std::make_pair(ok, std::to_string(cs.checkpoints.size()) + " checkpoints");
  });
  return rep;
}

}  // namespace wtl
