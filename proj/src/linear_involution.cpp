#include "wtl/linear_involution.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <sstream>

#include "wtl/error.hpp"

namespace wtl {

int LinearInvolution::pairing_type(int letter) const {
  int in_top = 0;
  for (int v : top) in_top += (v == letter);
  return in_top == 1 ? 1 : -1;
}

bool LinearInvolution::is_abelian() const {
  for (int a = 0; a < letters(); ++a)
    if (pairing_type(a) != 1) return false;
  return true;
}

LinearInvolution LinearInvolution::parse(const std::string& text) {
  const auto slash = text.find('/');
  if (slash == std::string::npos) throw Error(ErrorCode::InvalidArgument, "expected 'top / bottom' rows");
  std::map<std::string, int> ids;
  auto row = [&](const std::string& part) {
    std::vector<int> out;
    std::istringstream in(part);
    std::string tok;
    while (in >> tok) {
      auto [it, fresh] = ids.try_emplace(tok, static_cast<int>(ids.size()));
      out.push_back(it->second);
    }
    return out;
  };
  LinearInvolution li;
  li.top = row(text.substr(0, slash));
  li.bottom = row(text.substr(slash + 1));
  check_combinatorics(li);
  return li;
}

std::string LinearInvolution::to_string() const {
  auto name = [](int a) {
    std::string s;
    do {
      s.insert(s.begin(), static_cast<char>('A' + a % 26));
      a = a / 26 - 1;
    } while (a >= 0);
    return s;
  };
  std::string out;
  for (size_t i = 0; i < top.size(); ++i) out += (i ? " " : "") + name(top[i]);
  out += " /";
  for (int v : bottom) out += " " + name(v);
  return out;
}

bool LinearInvolution::balanced(double tol) const {
  double st = 0, sb = 0;
  for (int v : top) st += lengths[static_cast<size_t>(v)];
  for (int v : bottom) sb += lengths[static_cast<size_t>(v)];
  return std::abs(st - sb) <= tol * std::max(1.0, st);
}

void check_combinatorics(const LinearInvolution& li) {
  if (li.top.empty() || li.bottom.empty()) throw Error(ErrorCode::InvalidArgument, "both rows must be non-empty");
  if ((li.top.size() + li.bottom.size()) % 2 != 0) throw Error(ErrorCode::InvalidArgument, "odd number of occurrences");
  const int d = li.letters();
  std::vector<int> count(static_cast<size_t>(d), 0);
  for (const auto* row : {&li.top, &li.bottom})
    for (int v : *row) {
      if (v < 0 || v >= d) throw Error(ErrorCode::InvalidArgument, "letter index out of range");
      ++count[static_cast<size_t>(v)];
    }
  for (int c : count)
    if (c != 2) throw Error(ErrorCode::InvalidArgument, "every letter must appear exactly twice");
  if (!li.lengths.empty() && static_cast<int>(li.lengths.size()) != d)
    throw Error(ErrorCode::InvalidArgument, "length vector size differs from letter count");
}

bool is_irreducible(const LinearInvolution& li) {
  const int l = static_cast<int>(li.top.size()), m = static_cast<int>(li.bottom.size());
  std::vector<int> count(static_cast<size_t>(li.letters()));
  for (int i = 1; i < l; ++i) {
    std::fill(count.begin(), count.end(), 0);
    int open = 0;  // letters seen exactly once
    auto add = [&](int a) {
      const int c = ++count[static_cast<size_t>(a)];
      open += c == 1 ? 1 : -1;
    };
    for (int a = 0; a < i; ++a) add(li.top[static_cast<size_t>(a)]);
    for (int j = 1; j < m; ++j) {
      add(li.bottom[static_cast<size_t>(j - 1)]);
      if (open == 0) return false;
    }
  }
  return true;
}

namespace {

// Relaxation for a.tau >= 1 on the subspace cut out by `eq` rows.
std::optional<std::vector<double>> relax(const std::vector<std::vector<double>>& ineq,
                                         const std::vector<std::vector<double>>& eq, int d) {
  // Orthonormal basis of the equality rows (Gram-Schmidt).
  std::vector<std::vector<double>> basis;
  for (auto v : eq) {
    for (const auto& b : basis) {
      double p = 0;
      for (int k = 0; k < d; ++k) p += v[static_cast<size_t>(k)] * b[static_cast<size_t>(k)];
      for (int k = 0; k < d; ++k) v[static_cast<size_t>(k)] -= p * b[static_cast<size_t>(k)];
    }
    double n = 0;
    for (double x : v) n += x * x;
    if (n < 1e-18) continue;
    for (double& x : v) x /= std::sqrt(n);
    basis.push_back(std::move(v));
  }
  std::vector<std::vector<double>> proj;
  for (auto a : ineq) {
    for (const auto& b : basis) {
      double p = 0;
      for (int k = 0; k < d; ++k) p += a[static_cast<size_t>(k)] * b[static_cast<size_t>(k)];
      for (int k = 0; k < d; ++k) a[static_cast<size_t>(k)] -= p * b[static_cast<size_t>(k)];
    }
    proj.push_back(std::move(a));
  }
  std::vector<double> tau(static_cast<size_t>(d), 0.0);
  for (int iter = 0; iter < 200000; ++iter) {
    int worst = -1;
    double worst_gap = 0.0;
    for (size_t r = 0; r < proj.size(); ++r) {
      double v = 0;
      for (int k = 0; k < d; ++k) v += proj[r][static_cast<size_t>(k)] * tau[static_cast<size_t>(k)];
      if (1.0 - v > worst_gap + 1e-12) {
        worst_gap = 1.0 - v;
        worst = static_cast<int>(r);
      }
    }
    if (worst < 0) return tau;
    const auto& a = proj[static_cast<size_t>(worst)];
    double n = 0;
    for (double x : a) n += x * x;
    if (n < 1e-18) return std::nullopt;
    const double step = 1.5 * (worst_gap + 0.01) / n;
    for (int k = 0; k < d; ++k) tau[static_cast<size_t>(k)] += step * a[static_cast<size_t>(k)];
  }
  return std::nullopt;
}

bool polygon_simple(const LinearInvolution& li, const std::vector<double>& tau) {
  std::vector<double> lengths = li.lengths;
  if (lengths.empty()) lengths = balanced_random_lengths(li, 1);
  LinearInvolution tmp = li;
  tmp.lengths = lengths;
  try {
    const auto s = suspension_surface(tmp, tau);
    return s.polygons()[0].is_simple();
  } catch (const Error&) {
    return false;
  }
}

}  // namespace

std::optional<std::vector<double>> suspension_heights(const LinearInvolution& li) {
  check_combinatorics(li);
  const int d = li.letters();
  const int l = static_cast<int>(li.top.size()), m = static_cast<int>(li.bottom.size());
  std::vector<std::vector<double>> ineq;
  std::vector<double> acc(static_cast<size_t>(d), 0.0);
  for (int i = 0; i + 1 < l; ++i) {
    acc[static_cast<size_t>(li.top[static_cast<size_t>(i)])] += 1.0;
    ineq.push_back(acc);
  }
  std::vector<double> top_total = acc;
  top_total[static_cast<size_t>(li.top.back())] += 1.0;
  std::fill(acc.begin(), acc.end(), 0.0);
  for (int j = 0; j + 1 < m; ++j) {
    acc[static_cast<size_t>(li.bottom[static_cast<size_t>(j)])] -= 1.0;
    ineq.push_back(acc);
  }
  std::vector<double> bottom_total = acc;
  bottom_total[static_cast<size_t>(li.bottom.back())] -= 1.0;
  for (auto& x : bottom_total) x = -x;
  // First try: both rows close at height 0, then only equal totals.
  if (auto tau = relax(ineq, {top_total, bottom_total}, d)) return tau;
  std::vector<double> diff(static_cast<size_t>(d));
  for (int k = 0; k < d; ++k) diff[static_cast<size_t>(k)] = top_total[static_cast<size_t>(k)] - bottom_total[static_cast<size_t>(k)];
  if (auto tau = relax(ineq, {diff}, d)) {
    if (polygon_simple(li, *tau)) return tau;
  }
  return std::nullopt;
}

HalfTranslationSurface suspension_surface(const LinearInvolution& li, const std::vector<double>& heights) {
  check_combinatorics(li);
  if (li.lengths.empty()) throw Error(ErrorCode::InvalidArgument, "suspension needs lengths");
  if (!li.balanced(1e-9)) throw Error(ErrorCode::InvalidArgument, "row lengths are not balanced");
  const int l = static_cast<int>(li.top.size()), m = static_cast<int>(li.bottom.size());
  auto zeta = [&](int a) { return Vec2{li.lengths[static_cast<size_t>(a)], heights[static_cast<size_t>(a)]}; };
  std::vector<Vec2> bottom_pts{{0, 0}}, top_pts{{0, 0}};
  for (int v : li.bottom) bottom_pts.push_back(bottom_pts.back() + zeta(v));
  for (int v : li.top) top_pts.push_back(top_pts.back() + zeta(v));
  PlanarPolygon poly;
  for (int j = 0; j <= m; ++j) poly.vertices.push_back(bottom_pts[static_cast<size_t>(j)]);
  for (int i = l - 1; i >= 1; --i) poly.vertices.push_back(top_pts[static_cast<size_t>(i)]);
  EdgeGluing g;
  const int d = li.letters();
  std::vector<std::vector<std::pair<int, bool>>> occ(static_cast<size_t>(d));  // edge, in top row
  for (int j = 0; j < m; ++j) occ[static_cast<size_t>(li.bottom[static_cast<size_t>(j)])].push_back({j, false});
  for (int i = 0; i < l; ++i) occ[static_cast<size_t>(li.top[static_cast<size_t>(i)])].push_back({m + (l - 1 - i), true});
  for (int a = 0; a < d; ++a) {
    const auto& o = occ[static_cast<size_t>(a)];
    const int sign = o[0].second == o[1].second ? -1 : 1;
    g.pairs.push_back({{0, o[0].first}, {0, o[1].first}, sign});
  }
  return build_surface({std::move(poly)}, std::move(g));
}

StratumInfo suspension_stratum(const LinearInvolution& li) {
  LinearInvolution tmp = li;
  if (tmp.lengths.empty()) tmp.lengths = balanced_random_lengths(li, 12345);
  const auto tau = suspension_heights(tmp);
  if (!tau) throw Error(ErrorCode::Reducible, "generalized permutation " + li.to_string() + " has no suspension");
  return stratum_of(suspension_surface(tmp, *tau));
}

std::vector<double> balanced_random_lengths(const LinearInvolution& li, std::uint64_t seed) {
  check_combinatorics(li);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const int d = li.letters();
  std::vector<double> lengths(static_cast<size_t>(d));
  for (auto& x : lengths) x = 1.0 - u(rng);  // (0,1]
  double tt = 0, bb = 0;
  for (int a = 0; a < d; ++a) {
    if (li.pairing_type(a) == 1) continue;
    const bool in_top = std::find(li.top.begin(), li.top.end(), a) != li.top.end();
    (in_top ? tt : bb) += lengths[static_cast<size_t>(a)];
  }
  if ((tt > 0) != (bb > 0)) throw Error(ErrorCode::InvalidArgument, "lengths cannot be balanced: same-row letters in only one row");
  if (tt > 0) {
    for (int a = 0; a < d; ++a)
      if (li.pairing_type(a) == -1 && std::find(li.top.begin(), li.top.end(), a) != li.top.end())
        lengths[static_cast<size_t>(a)] *= bb / tt;
  }
  return lengths;
}

}  // namespace wtl
