#include "wtl/rauzy.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <thread>

#include "wtl/error.hpp"

namespace wtl {

double ZorichState::clock() const {
  double total = 0.0;
  for (double x : gp.lengths) total += x;
  return log_scale - std::log(total);
}

std::vector<double> orthonormalize(std::vector<std::vector<double>>& frame) {
  std::vector<double> logs;
  for (size_t i = 0; i < frame.size(); ++i) {
    auto& v = frame[i];
    for (size_t j = 0; j < i; ++j) {
      double p = 0.0;
      for (size_t k = 0; k < v.size(); ++k) p += v[k] * frame[j][k];
      for (size_t k = 0; k < v.size(); ++k) v[k] -= p * frame[j][k];
    }
    double n = 0.0;
    for (double x : v) n += x * x;
    n = std::sqrt(n);
    if (!std::isfinite(n)) throw Error(ErrorCode::NonConvergence, "frame vector overflowed");
    if (!(n > 1e-200)) {
      // Lost to cancellation: restart along the basis vector least covered so far.
      size_t best = 0;
      double best_cov = 2.0;
      for (size_t k = 0; k < v.size(); ++k) {
        double cov = 0.0;
        for (size_t j = 0; j < i; ++j) cov += frame[j][k] * frame[j][k];
        if (cov < best_cov) {
          best_cov = cov;
          best = k;
        }
      }
      std::fill(v.begin(), v.end(), 0.0);
      for (size_t k = 0; k < v.size(); ++k) {
        v[k] = (k == best ? 1.0 : 0.0);
        for (size_t j = 0; j < i; ++j) v[k] -= frame[j][best] * frame[j][k];
      }
      n = 0.0;
      for (double x : v) n += x * x;
      n = std::sqrt(n);
      for (double& x : v) x /= n;
      logs.push_back(0.0);
      continue;
    }
    for (double& x : v) x /= n;
    logs.push_back(std::log(n));
  }
  return logs;
}

ZorichState make_state(const LinearInvolution& li, std::uint64_t seed, int frame_size) {
  check_combinatorics(li);
  ZorichState st;
  st.gp = li;
  if (st.gp.lengths.empty()) st.gp.lengths = balanced_random_lengths(li, seed);
  const int d = li.letters();
  std::vector<int> seen(static_cast<size_t>(d), 0);
  auto orient = [&](int a) {
    const int o = seen[static_cast<size_t>(a)] == 0 ? 1 : li.pairing_type(a);
    ++seen[static_cast<size_t>(a)];
    return o;
  };
  for (int a : li.top) st.top_orient.push_back(orient(a));
  for (int a : li.bottom) st.bottom_orient.push_back(orient(a));
  std::mt19937_64 rng(seed ^ 0x5DEECE66DULL);
  std::normal_distribution<double> g(0.0, 1.0);
  for (auto* frame : {&st.frame_plus, &st.frame_minus}) {
    frame->assign(static_cast<size_t>(std::min(frame_size, d)), std::vector<double>(static_cast<size_t>(d)));
    for (auto& v : *frame)
      for (auto& x : v) x = g(rng);
    orthonormalize(*frame);
  }
  st.log_norms_plus.assign(st.frame_plus.size(), 0.0);
  st.log_norms_minus.assign(st.frame_minus.size(), 0.0);
  return st;
}

namespace {

int find_in(const std::vector<int>& row, int letter, int skip = -1) {
  for (int i = 0; i < static_cast<int>(row.size()); ++i)
    if (row[static_cast<size_t>(i)] == letter && i != skip) return i;
  return -1;
}

// Rounding drift off the balance hyperplane grows with the expanding
// direction, so the same-row letters are projected back regularly.
void rebalance(ZorichState& st) {
  auto& len = st.gp.lengths;
  double tt = 0.0, bb = 0.0;
  for (int a = 0; a < st.gp.letters(); ++a) {
    if (st.gp.pairing_type(a) == 1) continue;
    (find_in(st.gp.top, a) >= 0 ? tt : bb) += len[static_cast<size_t>(a)];
  }
  if (tt > 0.0)
    for (int a = 0; a < st.gp.letters(); ++a)
      if (st.gp.pairing_type(a) == -1 && find_in(st.gp.top, a) >= 0) len[static_cast<size_t>(a)] *= bb / tt;
}

void renormalize(ZorichState& st) {
  double total = 0.0;
  for (double x : st.gp.lengths) total += x;
  if (total < 0.5) {
    const double c = 1.0 / total;
    for (double& x : st.gp.lengths) x *= c;
    st.log_scale += std::log(c);
    rebalance(st);
  }
}

}  // namespace

StepRecord rauzy_step(ZorichState& st) {
  auto& top = st.gp.top;
  auto& bot = st.gp.bottom;
  auto& len = st.gp.lengths;
  const int a = top.back(), b = bot.back();
  if (a == b) throw Error(ErrorCode::Reducible, "same letter ends both rows: " + st.gp.to_string());
  const double la = len[static_cast<size_t>(a)], lb = len[static_cast<size_t>(b)];
  if (la == lb) throw Error(ErrorCode::LengthTie, "last intervals have equal length");
  StepRecord rec;
  rec.top_won = la > lb;
  const int w = rec.top_won ? a : b, l = rec.top_won ? b : a;
  rec.winner = w;
  rec.loser = l;
  auto& wrow = rec.top_won ? top : bot;
  auto& lrow = rec.top_won ? bot : top;
  auto& wori = rec.top_won ? st.top_orient : st.bottom_orient;
  auto& lori = rec.top_won ? st.bottom_orient : st.top_orient;
  const int s1 = wori.back(), s2 = lori.back();

  len[static_cast<size_t>(w)] -= len[static_cast<size_t>(l)];
  for (auto& v : st.frame_plus) v[static_cast<size_t>(w)] = s1 * v[static_cast<size_t>(w)] - s2 * v[static_cast<size_t>(l)];
  for (auto& v : st.frame_minus) v[static_cast<size_t>(w)] -= v[static_cast<size_t>(l)];

  // The winner's side is re-oriented along its last occurrence.
  const int wlast = static_cast<int>(wrow.size()) - 1;
  const int twin_same = find_in(wrow, w, wlast);
  wori.back() = 1;
  const int m = lori.back();
  lrow.pop_back();
  lori.pop_back();
  if (twin_same < 0) {
    const int k = find_in(lrow, w);
    lori[static_cast<size_t>(k)] = 1;
    lrow.insert(lrow.begin() + k + 1, l);
    lori.insert(lori.begin() + k + 1, m);
  } else {
    wori[static_cast<size_t>(twin_same)] = -1;
    wrow.insert(wrow.begin() + twin_same, l);
    wori.insert(wori.begin() + twin_same, -m);
  }
  if (top.empty() || bot.empty()) throw Error(ErrorCode::Reducible, "a row became empty");

  ++st.step_count;
  const int type = rec.top_won ? 1 : -1;
  if (type != st.last_type) {
    ++st.accelerated_count;
    st.last_type = type;
  }
  renormalize(st);
  return rec;
}

std::vector<std::vector<long>> step_matrix(int d, const StepRecord& r) {
  std::vector<std::vector<long>> m(static_cast<size_t>(d), std::vector<long>(static_cast<size_t>(d), 0));
  for (int i = 0; i < d; ++i) m[static_cast<size_t>(i)][static_cast<size_t>(i)] = 1;
  m[static_cast<size_t>(r.winner)][static_cast<size_t>(r.loser)] = -1;
  return m;
}

long determinant(std::vector<std::vector<long>> m) {
  // Bareiss fraction-free elimination.
  const int n = static_cast<int>(m.size());
  long sign = 1, prev = 1;
  for (int k = 0; k < n - 1; ++k) {
    if (m[static_cast<size_t>(k)][static_cast<size_t>(k)] == 0) {
      int r = k + 1;
      while (r < n && m[static_cast<size_t>(r)][static_cast<size_t>(k)] == 0) ++r;
      if (r == n) return 0;
      std::swap(m[static_cast<size_t>(k)], m[static_cast<size_t>(r)]);
      sign = -sign;
    }
    for (int i = k + 1; i < n; ++i)
      for (int j = k + 1; j < n; ++j)
        m[static_cast<size_t>(i)][static_cast<size_t>(j)] =
            (m[static_cast<size_t>(i)][static_cast<size_t>(j)] * m[static_cast<size_t>(k)][static_cast<size_t>(k)] -
             m[static_cast<size_t>(i)][static_cast<size_t>(k)] * m[static_cast<size_t>(k)][static_cast<size_t>(j)]) /
            prev;
    prev = m[static_cast<size_t>(k)][static_cast<size_t>(k)];
  }
  return sign * m[static_cast<size_t>(n - 1)][static_cast<size_t>(n - 1)];
}

namespace {

// After a step won by a letter whose twin is in the other row, the same
// letter keeps winning while the block behind its twin rotates; whole
// rotations are applied at once.
void bulk_rotations(ZorichState& st, const StepRecord& last) {
  auto& top = st.gp.top;
  auto& bot = st.gp.bottom;
  const int w = last.winner;
  const auto& wrow = last.top_won ? top : bot;
  const auto& orow = last.top_won ? bot : top;
  const auto& oori = last.top_won ? st.bottom_orient : st.top_orient;
  if (wrow.back() != w) return;
  const int k = find_in(orow, w);
  if (k < 0 || k + 1 >= static_cast<int>(orow.size())) return;
  auto& len = st.gp.lengths;
  double S = 0.0;
  for (size_t i = static_cast<size_t>(k) + 1; i < orow.size(); ++i) S += len[static_cast<size_t>(orow[i])];
  const double lw = len[static_cast<size_t>(w)];
  if (!(lw > S)) return;
  double q = std::floor(lw / S);
  if (lw - q * S <= 0.0) q -= 1.0;
  if (q < 1.0) return;
  len[static_cast<size_t>(w)] = lw - q * S;
  for (auto& v : st.frame_plus) {
    double acc = 0.0;
    for (size_t i = static_cast<size_t>(k) + 1; i < orow.size(); ++i) acc += oori[i] * v[static_cast<size_t>(orow[i])];
    v[static_cast<size_t>(w)] -= q * acc;
  }
  for (auto& v : st.frame_minus) {
    double acc = 0.0;
    for (size_t i = static_cast<size_t>(k) + 1; i < orow.size(); ++i) acc += v[static_cast<size_t>(orow[i])];
    v[static_cast<size_t>(w)] -= q * acc;
  }
  st.step_count += static_cast<long>(q) * static_cast<long>(orow.size() - static_cast<size_t>(k) - 1);
  renormalize(st);
}

// Exact ties come from floating point lengths being dyadic rationals; a
// relative jitter far below the statistical noise breaks them.
void jitter(ZorichState& st) {
  std::mt19937_64 rng(static_cast<std::uint64_t>(st.step_count) * 0x9E3779B97F4A7C15ULL + 17);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (double& x : st.gp.lengths) x *= 1.0 + 1e-12 * u(rng);
  rebalance(st);
}

void accumulate(ZorichState& st) {
  const auto p = orthonormalize(st.frame_plus);
  const auto m = orthonormalize(st.frame_minus);
  for (size_t i = 0; i < p.size(); ++i) st.log_norms_plus[i] += p[i];
  for (size_t i = 0; i < m.size(); ++i) st.log_norms_minus[i] += m[i];
}

bool overflowing(const ZorichState& st, int w) {
  for (const auto* f : {&st.frame_plus, &st.frame_minus})
    for (const auto& v : *f)
      if (std::abs(v[static_cast<size_t>(w)]) > 1e8) return true;
  return false;
}

}  // namespace

void run_accelerated(ZorichState& st, long n) {
  const long target = st.accelerated_count + n;
  long since = 0;
  long mark = st.accelerated_count;
  while (st.accelerated_count < target) {
    StepRecord r;
    try {
      r = rauzy_step(st);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::LengthTie) throw;
      jitter(st);
      ++st.step_count;
      continue;
    }
    bulk_rotations(st, r);
    if (st.accelerated_count != mark) {
      since += st.accelerated_count - mark;
      mark = st.accelerated_count;
    }
    if (since >= 32 || overflowing(st, r.winner)) {
      accumulate(st);
      since = 0;
    }
  }
  accumulate(st);
}

ExponentReport estimate_top_exponent(const LinearInvolution& li, std::uint64_t seed, const ExponentOptions& opts) {
  check_combinatorics(li);
  if (opts.chains < 1 || opts.batches < 2 || opts.iterations < opts.batches)
    throw Error(ErrorCode::InvalidArgument, "need at least one chain, two batches and one step per batch");
  const long burn = opts.burn_in > 0 ? opts.burn_in : std::max(1000L, opts.iterations / 100);
  const long per_batch = opts.iterations / opts.batches;
  std::vector<std::vector<double>> plus(static_cast<size_t>(opts.chains)), minus(static_cast<size_t>(opts.chains));
  std::vector<std::string> failures(static_cast<size_t>(opts.chains));

  auto chain = [&](int c) {
    for (int attempt = 0; attempt < 5; ++attempt) {
      try {
        const std::uint64_t s = seed * 0x9E3779B97F4A7C15ULL + static_cast<std::uint64_t>(c) * 7919 + attempt;
        LinearInvolution start = li;
        start.lengths = balanced_random_lengths(li, s);
        ZorichState st = make_state(start, s);
        run_accelerated(st, burn);
        double p0 = st.log_norms_plus[0], m0 = st.log_norms_minus[0], c0 = st.clock();
        plus[static_cast<size_t>(c)].clear();
        minus[static_cast<size_t>(c)].clear();
        for (int b = 0; b < opts.batches; ++b) {
          run_accelerated(st, per_batch);
          const double dc = st.clock() - c0;
          plus[static_cast<size_t>(c)].push_back((st.log_norms_plus[0] - p0) / dc);
          minus[static_cast<size_t>(c)].push_back((st.log_norms_minus[0] - m0) / dc);
          p0 = st.log_norms_plus[0];
          m0 = st.log_norms_minus[0];
          c0 = st.clock();
        }
        failures[static_cast<size_t>(c)].clear();
        return;
      } catch (const Error& e) {
        if (e.code() != ErrorCode::LengthTie) {
          failures[static_cast<size_t>(c)] = e.what();
          return;
        }
        failures[static_cast<size_t>(c)] = e.what();
      }
    }
  };
  const int threads = std::max(1, std::min(opts.threads, opts.chains));
  if (threads == 1) {
    for (int c = 0; c < opts.chains; ++c) chain(c);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < threads; ++w)
      pool.emplace_back([&, w] {
        for (int c = w; c < opts.chains; c += threads) chain(c);
      });
    for (auto& t : pool) t.join();
  }
  for (const auto& f : failures)
    if (!f.empty()) throw Error(ErrorCode::NonConvergence, "chain failed: " + f);

  ExponentReport rep;
  rep.iterations = opts.iterations;
  rep.chains = opts.chains;
  auto stats = [&](const std::vector<std::vector<double>>& all, double& mean, double& se) {
    std::vector<double> flat;
    for (const auto& v : all) flat.insert(flat.end(), v.begin(), v.end());
    mean = 0.0;
    for (double x : flat) mean += x;
    mean /= static_cast<double>(flat.size());
    double var = 0.0;
    for (double x : flat) var += (x - mean) * (x - mean);
    var /= static_cast<double>(flat.size() - 1);
    se = std::sqrt(var / static_cast<double>(flat.size()));
    return var;
  };
  const double var = stats(plus, rep.lambda_plus_top, rep.stderr_);
  stats(minus, rep.lambda_minus_top, rep.stderr_minus);
  const double chain_se = std::sqrt(var / opts.batches);
  for (const auto& v : plus) {
    double m = 0.0;
    for (double x : v) m += x;
    m /= static_cast<double>(v.size());
    rep.chain_means.push_back(m);
    if (opts.chains > 1 && std::abs(m - rep.lambda_plus_top) > 5.0 * chain_se)
      throw Error(ErrorCode::NonConvergence, "chain mean " + std::to_string(m) + " deviates from " +
                                                 std::to_string(rep.lambda_plus_top) + " by more than 5 sigma");
  }
  return rep;
}

nlohmann::json report_to_json(const std::string& stratum, const ExponentReport& r) {
  return {{"stratum", stratum},
          {"lambda_plus_top", r.lambda_plus_top},
          {"stderr", r.stderr_},
          {"lambda_minus_check", r.lambda_minus_top},
          {"stderr_minus", r.stderr_minus},
          {"iters", r.iterations},
          {"chains", r.chains}};
}

}  // namespace wtl
